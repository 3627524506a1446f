//! Sentence splitting and syllable counting.
//!
//! Both rules are fixed and documented so every score computed from them
//! is reproducible:
//!
//! * Sentences end at a run of `.`, `!`, or `?` followed by whitespace or
//!   end of text, except when the token ending in `.` is on the
//!   abbreviation stop-list. Text with no boundary is one sentence.
//! * Syllables per word: count maximal vowel groups (a, e, i, o, u, y),
//!   subtract a silent trailing `e` unless the word ends in consonant +
//!   `le`, minimum one syllable per word. Tokens are stripped to their
//!   alphabetic characters first; a token with none still counts one
//!   syllable.

/// Tokens (lowercase, final period included) that do not terminate a
/// sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sen.", "rep.", "gov.", "gen.", "col.", "sgt.", "st.",
    "jr.", "sr.", "vs.", "etc.", "inc.", "no.", "u.s.", "d.c.", "e.g.", "i.e.",
];

/// Split text into sentences. Every returned segment contains at least one
/// whitespace-delimited word.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '.' || c == '!' || c == '?' {
            // Consume the whole terminal run ("?!", "...").
            let mut end = i + 1;
            while end < bytes.len() && matches!(bytes[end] as char, '.' | '!' | '?') {
                end += 1;
            }
            let at_boundary =
                end >= bytes.len() || (bytes[end] as char).is_whitespace();
            let is_abbrev = c == '.' && end == i + 1 && token_is_abbreviation(text, end);
            if at_boundary && !is_abbrev {
                let segment = &text[start..end];
                if segment.split_whitespace().next().is_some() {
                    sentences.push(segment);
                }
                start = end;
            }
            i = end;
        } else {
            i += c.len_utf8();
        }
    }
    let tail = &text[start..];
    if tail.split_whitespace().next().is_some() {
        sentences.push(tail);
    }
    sentences
}

fn token_is_abbreviation(text: &str, end: usize) -> bool {
    let token_start = text[..end]
        .rfind(|c: char| c.is_whitespace())
        .map(|p| p + 1)
        .unwrap_or(0);
    let token = text[token_start..end].to_ascii_lowercase();
    ABBREVIATIONS.contains(&token.as_str())
}

/// Syllables in one whitespace token under the vowel-group heuristic.
pub fn syllables_in_word(token: &str) -> usize {
    let word: String = token
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect::<String>()
        .to_lowercase();
    if word.is_empty() {
        return 1;
    }
    let chars: Vec<char> = word.chars().collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');

    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &chars {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
                in_group = true;
            }
        } else {
            in_group = false;
        }
    }

    let n = chars.len();
    if n >= 2 && chars[n - 1] == 'e' {
        let ends_consonant_le = n >= 3 && chars[n - 2] == 'l' && !is_vowel(chars[n - 3]);
        if !ends_consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Total syllables across all whitespace tokens of `text`.
pub fn count_syllables(text: &str) -> usize {
    text.split_whitespace().map(syllables_in_word).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminal_punctuation() {
        let s = split_sentences("First one. Second one! Third one? Done");
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].trim(), "First one.");
        assert_eq!(s[3].trim(), "Done");
    }

    #[test]
    fn abbreviations_do_not_split() {
        let s = split_sentences("Sen. Smith met Dr. Jones in the U.S. capital. It rained.");
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn decimals_and_runs() {
        assert_eq!(split_sentences("Taxes rose 3.5 percent.").len(), 1);
        assert_eq!(split_sentences("Really?! Yes.").len(), 2);
        assert_eq!(split_sentences("Wait... what happened?").len(), 2);
    }

    #[test]
    fn no_boundary_is_one_sentence() {
        assert_eq!(split_sentences("no terminal punctuation here").len(), 1);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn syllable_heuristic_cases() {
        assert_eq!(syllables_in_word("go"), 1);
        assert_eq!(syllables_in_word("the"), 1);
        assert_eq!(syllables_in_word("make"), 1);
        assert_eq!(syllables_in_word("see"), 1);
        assert_eq!(syllables_in_word("little"), 2);
        assert_eq!(syllables_in_word("castle"), 2);
        assert_eq!(syllables_in_word("people"), 2);
        assert_eq!(syllables_in_word("style"), 1);
        assert_eq!(syllables_in_word("senator"), 3);
        assert_eq!(syllables_in_word("families"), 3);
        assert_eq!(syllables_in_word("year."), 1);
        assert_eq!(syllables_in_word("2024"), 1);
    }

    #[test]
    fn syllable_totals() {
        assert_eq!(count_syllables("The cat sat on the mat."), 6);
    }
}
