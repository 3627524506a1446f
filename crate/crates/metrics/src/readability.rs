//! Flesch-Kincaid grade level.

use num_traits::{Float, FromPrimitive};

use crate::error::MetricError;
use crate::text::{count_syllables, split_sentences};

/// Counts feeding the grade formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextStats {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
}

/// Sentence, word, and syllable counts under the documented rules.
pub fn fkgl_stats(text: &str) -> Result<TextStats, MetricError> {
    let words = text.split_whitespace().count();
    let sentences = split_sentences(text).len();
    if words == 0 || sentences == 0 {
        return Err(MetricError::DegenerateText);
    }
    Ok(TextStats {
        sentences,
        words,
        syllables: count_syllables(text),
    })
}

/// Grade level: `0.39 * (words/sentences) + 11.8 * (syllables/words) - 15.59`.
pub fn fkgl<T: Float + FromPrimitive>(text: &str) -> Result<T, MetricError> {
    let stats = fkgl_stats(text)?;
    let f = |v: usize| T::from_usize(v).expect("count fits scalar");
    let words_per_sentence = f(stats.words) / f(stats.sentences);
    let syllables_per_word = f(stats.syllables) / f(stats.words);
    let c = |v: f64| T::from_f64(v).expect("constant fits scalar");
    Ok(c(0.39) * words_per_sentence + c(11.8) * syllables_per_word - c(15.59))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_syllable_sentence() {
        // 1 sentence, 1 word, 1 syllable.
        let grade: f64 = fkgl("Go.").unwrap();
        assert!((grade - (0.39 + 11.8 - 15.59)).abs() < 1e-9);
        assert!((grade + 3.40).abs() < 1e-9);
    }

    #[test]
    fn six_monosyllables() {
        // 6 words, 1 sentence, 6 syllables under the heuristic.
        let grade: f64 = fkgl("The cat sat on the mat.").unwrap();
        assert!((grade - (0.39 * 6.0 + 11.8 - 15.59)).abs() < 1e-9);
        assert!((grade + 1.45).abs() < 1e-9);
    }

    #[test]
    fn twenty_word_fixture_hand_count() {
        // Hand-counted under the heuristic: 20 words, 1 sentence,
        // 30 syllables (the=1 senator=3 said=1 the=1 new=1 budget=2 will=1
        // cut=1 taxes=2 for=1 working=2 families=3 and=1 expand=2
        // funding=2 for=1 public=2 schools=1 this=1 year=1).
        let text = "The senator said the new budget will cut taxes for \
                    working families and expand funding for public schools this year.";
        let stats = fkgl_stats(text).unwrap();
        assert_eq!(stats.words, 20);
        assert_eq!(stats.sentences, 1);
        assert_eq!(stats.syllables, 30);
        let grade: f64 = fkgl(text).unwrap();
        let expected = 0.39 * 20.0 + 11.8 * (30.0 / 20.0) - 15.59;
        assert!((grade - expected).abs() < 1e-9);
        assert!((grade - 9.91).abs() < 1e-9);
    }

    #[test]
    fn degenerate_text_errors() {
        assert_eq!(fkgl::<f64>("").unwrap_err(), MetricError::DegenerateText);
        assert_eq!(fkgl::<f64>("   \t\n").unwrap_err(), MetricError::DegenerateText);
    }

    #[test]
    fn sentence_reordering_invariance() {
        // Same word/sentence/syllable totals imply the same score.
        let a: f64 = fkgl("The vote failed badly. Senators argued for hours.").unwrap();
        let b: f64 = fkgl("Senators argued for hours. The vote failed badly.").unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn works_at_f32() {
        let grade: f32 = fkgl("Go.").unwrap();
        assert!((grade + 3.40).abs() < 1e-5);
    }
}
