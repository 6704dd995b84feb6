//! Corpus cleaning: tokenization, a language-profile line filter and corpus
//! statistics.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use unicode_normalization::char::is_combining_mark;

use crate::textnorm::{COMBINING_ACUTE, COMBINING_DOT_BELOW, COMBINING_GRAVE, COMBINING_MACRON};

/// Default minimum line score for [`filter_corpus`].
pub const DEFAULT_THRESHOLD: f64 = 0.25;

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c) || is_joiner(c)
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '\u{2010}')
}

/// Split a line into maximal runs of letters, marks, digits, apostrophes and
/// hyphens. Apostrophes and hyphens at either end of a run are dropped.
pub fn tokenize(line: &str) -> Vec<&str> {
    line.split(|c: char| !is_token_char(c))
        .map(|run| run.trim_matches(is_joiner))
        .filter(|token| !token.is_empty())
        .collect()
}

/// Tokenize lines for training: NFC-composed tokens, optionally lowercased.
/// Lines without tokens yield empty sentences.
pub fn sentences<S: AsRef<str> + Sync>(lines: &[S], lowercase: bool) -> Vec<Vec<String>> {
    use unicode_normalization::UnicodeNormalization;
    lines
        .par_iter()
        .map(|line| {
            tokenize(line.as_ref())
                .into_iter()
                .map(|t| {
                    let t: String = t.nfc().collect();
                    if lowercase {
                        t.to_lowercase()
                    } else {
                        t
                    }
                })
                .collect()
        })
        .collect()
}

/// Heuristic detector for Yorùbá lines.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageProfile {
    pub marker_codepoints: HashSet<char>,
    /// Compared against lowercased tokens.
    pub function_words: HashSet<String>,
    pub threshold: f64,
}

const YORUBA_FUNCTION_WORDS: &[&str] = &[
    "ati", "àti", "ni", "ní", "ti", "tí", "si", "sí", "sì", "won", "wọn", "wọ́n", "awon", "awọn", "àwọn", "ninu",
    "nínú", "fun", "fún", "pe", "pé", "je", "jẹ", "jẹ́", "lati", "láti", "kan", "kàn", "naa", "náà", "wa", "wà",
    "ko", "kò", "kì", "ki", "lo", "lọ", "bi", "bí", "yi", "yìí", "eyi", "èyí", "ile", "ilé", "odun", "ọdún",
    "ilu", "ìlú", "orile-ede", "orílẹ̀-èdè", "oun", "òun", "ohun", "sugbon", "ṣùgbọ́n", "nigba", "nígbà",
    "gbogbo", "lori", "lórí", "maa", "máa", "tabi", "tàbí", "omo", "ọmọ", "eniyan", "ènìyàn", "ọba", "oba",
];

impl Default for LanguageProfile {
    fn default() -> Self {
        Self::yoruba(DEFAULT_THRESHOLD)
    }
}

impl LanguageProfile {
    /// Markers: the tone and dot-below combining marks plus every precomposed
    /// letter carrying one of them; function words: frequent Yorùbá tokens in
    /// marked and unmarked spellings.
    pub fn yoruba(threshold: f64) -> Self {
        use unicode_normalization::UnicodeNormalization;
        let marks = [COMBINING_GRAVE, COMBINING_ACUTE, COMBINING_MACRON, COMBINING_DOT_BELOW];
        let mut marker_codepoints: HashSet<char> = marks.into_iter().collect();
        for base in "aeiomnusAEIOMNUS".chars() {
            for mark in marks {
                let composed: Vec<char> = [base, mark].into_iter().nfc().collect();
                if composed.len() == 1 {
                    marker_codepoints.insert(composed[0]);
                }
            }
        }
        // ẹ́ ọ̀ etc. have no single precomposed form; ẹ ọ ṣ are covered above.
        LanguageProfile {
            marker_codepoints,
            function_words: YORUBA_FUNCTION_WORDS.iter().map(|w| w.nfc().collect()).collect(),
            threshold: threshold.clamp(0.0, 1.0),
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold.clamp(0.0, 1.0);
        self
    }

    fn matches(&self, token: &str) -> bool {
        token.chars().any(|c| self.marker_codepoints.contains(&c))
            || self.function_words.contains(&token.to_lowercase())
    }
}

/// Fraction of tokens that carry a marker codepoint or are function words.
pub fn score_line(tokens: &[&str], profile: &LanguageProfile) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let hits = tokens.iter().filter(|t| profile.matches(t)).count();
    hits as f64 / tokens.len() as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub total_tokens: u64,
    pub distinct_tokens: u64,
    pub total_lines: u64,
    pub dropped_lines: u64,
    pub byte_size: u64,
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total_lines: {}", self.total_lines)?;
        writeln!(f, "kept_lines: {}", self.total_lines - self.dropped_lines)?;
        writeln!(f, "dropped_lines: {}", self.dropped_lines)?;
        writeln!(f, "total_tokens: {}", self.total_tokens)?;
        writeln!(f, "distinct_tokens: {}", self.distinct_tokens)?;
        writeln!(f, "byte_size: {}", self.byte_size)
    }
}

/// Mergeable accumulator behind [`CorpusStats`].
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    total_tokens: u64,
    distinct: HashSet<String>,
    total_lines: u64,
    dropped_lines: u64,
    byte_size: u64,
}

impl StatsAccumulator {
    /// Record a line that was kept; `byte_size` counts it plus a newline.
    pub fn add_kept(&mut self, line: &str) {
        let tokens = tokenize(line);
        self.total_tokens += tokens.len() as u64;
        for token in tokens {
            if !self.distinct.contains(token) {
                self.distinct.insert(token.to_owned());
            }
        }
        self.total_lines += 1;
        self.byte_size += line.len() as u64 + 1;
    }

    pub fn add_dropped(&mut self) {
        self.total_lines += 1;
        self.dropped_lines += 1;
    }

    pub fn merge(self, other: StatsAccumulator) -> StatsAccumulator {
        let (mut distinct, smaller) = if self.distinct.len() >= other.distinct.len() {
            (self.distinct, other.distinct)
        } else {
            (other.distinct, self.distinct)
        };
        distinct.extend(smaller);
        StatsAccumulator {
            total_tokens: self.total_tokens + other.total_tokens,
            distinct,
            total_lines: self.total_lines + other.total_lines,
            dropped_lines: self.dropped_lines + other.dropped_lines,
            byte_size: self.byte_size + other.byte_size,
        }
    }

    pub fn finish(&self) -> CorpusStats {
        CorpusStats {
            total_tokens: self.total_tokens,
            distinct_tokens: self.distinct.len() as u64,
            total_lines: self.total_lines,
            dropped_lines: self.dropped_lines,
            byte_size: self.byte_size,
        }
    }
}

/// Statistics of an already-clean corpus (nothing dropped).
pub fn corpus_stats<S: AsRef<str> + Sync>(lines: &[S]) -> CorpusStats {
    lines
        .par_iter()
        .fold(StatsAccumulator::default, |mut acc, line| {
            acc.add_kept(line.as_ref());
            acc
        })
        .reduce(StatsAccumulator::default, StatsAccumulator::merge)
        .finish()
}

/// Keep the lines whose score reaches the profile threshold, in input order.
/// Lines without any token are always dropped.
pub fn filter_corpus<S: AsRef<str> + Sync>(lines: &[S], profile: &LanguageProfile) -> (Vec<String>, CorpusStats) {
    let verdicts: Vec<bool> = lines
        .par_iter()
        .map(|line| {
            let tokens = tokenize(line.as_ref());
            !tokens.is_empty() && score_line(&tokens, profile) >= profile.threshold
        })
        .collect();
    let mut acc = StatsAccumulator::default();
    let mut kept = Vec::new();
    for (line, keep) in lines.iter().zip(verdicts) {
        if keep {
            acc.add_kept(line.as_ref());
            kept.push(line.as_ref().to_owned());
        } else {
            acc.add_dropped();
        }
    }
    (kept, acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Awo osan ati brown"), vec!["Awo", "osan", "ati", "brown"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("wọn je."), vec!["wọn", "je"]);
    }

    #[test]
    fn tokenize_keeps_inner_joiners_and_marks() {
        assert_eq!(tokenize("(kọ̀-sílẹ̀), n'ílé -- 1913!"), vec!["kọ̀-sílẹ̀", "n'ílé", "1913"]);
        assert_eq!(tokenize("'quoted'"), vec!["quoted"]);
        // decomposed marks stay attached
        assert_eq!(tokenize("o\u{0323}\u{0300}ta."), vec!["o\u{0323}\u{0300}ta"]);
    }

    #[test]
    fn sentences_are_composed() {
        let s = sentences(&["O\u{0323}\u{0300}tá wà.", ""], false);
        assert_eq!(s, vec![vec!["Ọ̀tá".to_string(), "wà".to_string()], vec![]]);
        assert_eq!(sentences(&["Ọ̀tá"], true)[0], vec!["ọ̀tá".to_string()]);
    }

    #[test]
    fn score_examples() {
        let profile = LanguageProfile::default();
        assert_eq!(score_line(&["ọ̀tá", "ọ̀rẹ́"], &profile), 1.0);
        assert_eq!(score_line(&["the", "quick", "fox"], &profile), 0.0);
        assert_eq!(score_line(&["ati", "brown"], &profile), 0.5);
        assert_eq!(score_line(&[], &profile), 0.0);
        // decomposed marks count as markers
        assert_eq!(score_line(&["o\u{0323}"], &profile), 1.0);
        assert_eq!(score_line(&["ATI"], &profile), 1.0);
    }

    #[test]
    fn profile_invariants() {
        let p = LanguageProfile::yoruba(3.0);
        assert_eq!(p.threshold, 1.0);
        assert!(!p.marker_codepoints.is_empty() && !p.function_words.is_empty());
        for c in ['ẹ', 'ọ', 'ṣ', 'á', 'Ò', 'ń', 'ǹ', 'ḿ', 'ā'] {
            assert!(p.marker_codepoints.contains(&c), "{c}");
        }
    }

    #[test]
    fn filter_three_line_fixture() {
        let lines = ["the quick fox", "ati brown", "ọ̀tá ọ̀rẹ́"];
        let profile = LanguageProfile::default().with_threshold(0.4);
        let (kept, stats) = filter_corpus(&lines, &profile);
        assert_eq!(kept, vec!["ati brown", "ọ̀tá ọ̀rẹ́"]);
        assert_eq!(stats.total_lines, 3);
        assert_eq!(stats.dropped_lines, 1);
        assert_eq!(stats.total_tokens, 4);
        assert_eq!(stats.distinct_tokens, 4);
        assert_eq!(stats.byte_size, ("ati brown".len() + "ọ̀tá ọ̀rẹ́".len() + 2) as u64);
    }

    #[test]
    fn degenerate_thresholds() {
        let lines = ["the quick fox", "", "ati brown", "  ...  "];
        let (kept, stats) = filter_corpus(&lines, &LanguageProfile::default().with_threshold(0.0));
        assert_eq!(kept, vec!["the quick fox", "ati brown"]);
        assert_eq!(stats.dropped_lines, 2);
        let (kept, _) = filter_corpus(&lines, &LanguageProfile::default().with_threshold(1.0));
        assert!(kept.is_empty());
    }

    #[test]
    fn merge_is_order_independent() {
        let lines = ["a b c", "b c d", "x", "a a a"];
        let mut left = StatsAccumulator::default();
        let mut right = StatsAccumulator::default();
        left.add_kept(lines[0]);
        left.add_kept(lines[1]);
        right.add_kept(lines[2]);
        right.add_kept(lines[3]);
        right.add_dropped();
        let ab = left.clone().merge(right.clone()).finish();
        let ba = right.merge(left).finish();
        assert_eq!(ab, ba);
        assert_eq!(ab.distinct_tokens, 5);
        assert_eq!(ab.total_tokens, 10);
        assert_eq!(corpus_stats(&lines).total_tokens, 10);
    }
}
