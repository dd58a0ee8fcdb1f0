//! Whole-word, case-insensitive matching used for title propagation.

use std::ops::Range;

fn chars_eq_ci(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

/// Byte ranges of all non-overlapping whole-word occurrences of `word`.
///
/// A match is whole-word when the characters immediately around it are not
/// alphanumeric (or are the string boundaries).
pub(crate) fn find_whole_words(text: &str, word: &str) -> Vec<Range<usize>> {
    let t: Vec<(usize, char)> = text.char_indices().collect();
    let w: Vec<char> = word.chars().collect();
    let mut out = Vec::new();
    if w.is_empty() || w.len() > t.len() {
        return out;
    }
    let mut s = 0;
    while s + w.len() <= t.len() {
        let e = s + w.len();
        let left_ok = s == 0 || !t[s - 1].1.is_alphanumeric();
        let right_ok = e == t.len() || !t[e].1.is_alphanumeric();
        if left_ok
            && right_ok
            && t[s..e].iter().zip(&w).all(|(&(_, a), &b)| chars_eq_ci(a, b))
        {
            let end = if e < t.len() { t[e].0 } else { text.len() };
            out.push(t[s].0..end);
            s = e;
        } else {
            s += 1;
        }
    }
    out
}

pub(crate) fn contains_whole_word(text: &str, word: &str) -> bool {
    !find_whole_words(text, word).is_empty()
}

/// Carries the case pattern of `matched` over to `replacement`.
fn match_case(matched: &str, replacement: &str) -> String {
    let letters: Vec<char> = matched.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return replacement.to_string();
    }
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    if letters.iter().all(|c| c.is_lowercase()) {
        return replacement.to_lowercase();
    }
    let first_upper = matched.chars().next().is_some_and(char::is_uppercase);
    if first_upper {
        let mut chars = replacement.chars();
        return match chars.next() {
            Some(f) => f.to_uppercase().chain(chars).collect(),
            None => String::new(),
        };
    }
    replacement.to_string()
}

/// Replaces every whole-word occurrence of `word`; `None` when absent.
pub(crate) fn replace_whole_words(text: &str, word: &str, replacement: &str) -> Option<String> {
    let ranges = find_whole_words(text, word);
    if ranges.is_empty() {
        return None;
    }
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for r in ranges {
        out.push_str(&text[last..r.start]);
        out.push_str(&match_case(&text[r.clone()], replacement));
        last = r.end;
    }
    out.push_str(&text[last..]);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_word_boundaries() {
        assert_eq!(find_whole_words("Nike Blue Shoes", "blue"), vec![5..9]);
        assert!(find_whole_words("Bluetooth speaker", "Blue").is_empty());
        assert!(find_whole_words("Women Shoes", "Men").is_empty());
        assert_eq!(find_whole_words("Men-Shoes", "men"), vec![0..3]);
        assert_eq!(find_whole_words("Navy Blue tee", "navy blue"), vec![0..9]);
        assert!(find_whole_words("", "x").is_empty());
        assert!(find_whole_words("abc", "").is_empty());
    }

    #[test]
    fn case_pattern_preserved() {
        assert_eq!(
            replace_whole_words("Nike Blue Shoes", "Blue", "Red").unwrap(),
            "Nike Red Shoes"
        );
        assert_eq!(
            replace_whole_words("nike blue shoes", "Blue", "Red").unwrap(),
            "nike red shoes"
        );
        assert_eq!(
            replace_whole_words("NIKE BLUE SHOES", "Blue", "red").unwrap(),
            "NIKE RED SHOES"
        );
        assert_eq!(
            replace_whole_words("Blue and blue", "blue", "green").unwrap(),
            "Green and green"
        );
        assert!(replace_whole_words("Nike Shoes", "Blue", "Red").is_none());
    }

    #[test]
    fn non_ascii_text() {
        assert_eq!(
            replace_whole_words("Chaussure Écrue été", "écrue", "Noire").unwrap(),
            "Chaussure Noire été"
        );
    }
}
