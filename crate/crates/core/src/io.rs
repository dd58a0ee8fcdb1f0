//! File formats: CSV tables, `XMEB` embeddings and JSON documents.
//!
//! `XMEB` layout (little-endian):
//!
//! ```text
//! b"XMEB" | u32 rows | u32 dim | rows*dim f32 values, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::dataset::{AlignedDataset, ColumnSchema, Embeddings, ErrorMask};
use crate::error::{Error, Result};

pub const XMEB_MAGIC: &[u8; 4] = b"XMEB";

/// Header plus string rows of a CSV table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table_from<R: Read>(reader: R, context: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::parse(context, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::parse(context, "missing header row"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(context, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Table { header, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(BufReader::new(file), &path.display().to_string())
}

pub fn write_table_to<W: Write>(writer: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let ctx = |e: csv::Error| Error::parse("csv writer", e);
    w.write_record(header).map_err(ctx)?;
    for r in rows {
        w.write_record(r).map_err(ctx)?;
    }
    w.flush().map_err(|e| Error::parse("csv writer", e))?;
    Ok(())
}

pub fn read_embeddings_from<R: Read>(mut reader: R, context: &str) -> Result<Embeddings> {
    let mut header = [0u8; 12];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::parse(context, "truncated XMEB header"))?;
    if &header[0..4] != XMEB_MAGIC {
        return Err(Error::parse(context, "bad magic, expected XMEB"));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    if dim == 0 {
        return Err(Error::parse(context, "embedding dimension is zero"));
    }
    let expected = rows
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::parse(context, "embedding size overflows"))?;
    let mut body = Vec::new();
    reader
        .read_to_end(&mut body)
        .map_err(|e| Error::parse(context, e))?;
    if body.len() != expected {
        return Err(Error::parse(
            context,
            format!("expected {expected} payload bytes for {rows}x{dim}, found {}", body.len()),
        ));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Embeddings::new(rows, dim, values).map_err(|e| Error::parse(context, e))
}

pub fn read_embeddings(path: &Path) -> Result<Embeddings> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings_from(BufReader::new(file), &path.display().to_string())
}

pub fn write_embeddings_to<W: Write>(mut writer: W, emb: &Embeddings) -> std::io::Result<()> {
    let too_big = || std::io::Error::new(std::io::ErrorKind::InvalidInput, "exceeds u32 range");
    let rows = u32::try_from(emb.len()).map_err(|_| too_big())?;
    let dim = u32::try_from(emb.dim()).map_err(|_| too_big())?;
    writer.write_all(XMEB_MAGIC)?;
    writer.write_all(&rows.to_le_bytes())?;
    writer.write_all(&dim.to_le_bytes())?;
    for v in emb.as_slice() {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.flush()
}

pub fn write_embeddings(path: &Path, emb: &Embeddings) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_embeddings_to(BufWriter::new(file), emb).map_err(|e| Error::io(path, e))
}

/// Builds a dataset from a parsed table; every column starts categorical.
pub fn dataset_from_parts(table: Table, embeddings: Embeddings) -> Result<AlignedDataset> {
    let columns = table
        .header
        .into_iter()
        .map(ColumnSchema::categorical)
        .collect();
    AlignedDataset::new(columns, table.rows, embeddings)
}

pub fn load_dataset(table_path: &Path, embeddings_path: &Path) -> Result<AlignedDataset> {
    let table = read_table(table_path)?;
    let embeddings = read_embeddings(embeddings_path)?;
    dataset_from_parts(table, embeddings)
}

pub fn write_dataset_table(path: &Path, dataset: &AlignedDataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let header: Vec<String> = dataset.column_names().map(str::to_string).collect();
    write_table_to(BufWriter::new(file), &header, dataset.rows())
}

pub fn save_dataset(dataset: &AlignedDataset, table_path: &Path, embeddings_path: &Path) -> Result<()> {
    write_dataset_table(table_path, dataset)?;
    write_embeddings(embeddings_path, dataset.embeddings())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::parse(path.display().to_string(), e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_mask(path: &Path) -> Result<ErrorMask> {
    let mask: ErrorMask = read_json(path)?;
    mask.validate()?;
    Ok(mask)
}

pub fn save_mask(path: &Path, mask: &ErrorMask) -> Result<()> {
    write_json(path, mask)
}
