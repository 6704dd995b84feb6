//! Diacritic normalization for Yorùbá text.
//!
//! Yorùbá orthography marks tone on vowels and syllabic nasals with a grave
//! (low), acute (high) or, rarely, a macron (mid), and distinguishes the
//! letters ẹ, ọ and ṣ from e, o and s with a dot below. Text in the wild mixes
//! precomposed letters (`á`, `ẹ`) with base letters followed by combining
//! marks, so every operation here works on canonical decompositions and
//! produces NFC output.
//!
//! [`normalize_text`] maps each grapheme to its base form according to a
//! [`NormalizationPolicy`]. Common Yorùbá letters are served from a
//! precomputed [`GraphemeMapping`]; anything else goes through the generic
//! decompose/filter/recompose route, which yields the same result.

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

pub const COMBINING_GRAVE: char = '\u{0300}';
pub const COMBINING_ACUTE: char = '\u{0301}';
pub const COMBINING_MACRON: char = '\u{0304}';
pub const COMBINING_DOT_BELOW: char = '\u{0323}';

/// Combining marks that carry tone.
pub const TONE_MARKS: [char; 3] = [COMBINING_GRAVE, COMBINING_ACUTE, COMBINING_MACRON];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextNormError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidEncoding { offset: usize },
    #[error("expected a single grapheme, got {count} in {text:?}")]
    NotSingleGrapheme { text: String, count: usize },
}

/// Which classes of marks (and markup) to remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormalizationPolicy {
    /// Remove grave, acute and macron tone marks.
    pub strip_tone: bool,
    /// Remove the dot below (ẹ→e, ọ→o, ṣ→s).
    pub strip_underdot: bool,
    /// Remove angle-bracket tags and unwrap `[[wiki|links]]` first.
    pub strip_markup: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        Self::undiacritize()
    }
}

impl NormalizationPolicy {
    /// Strip every diacritic, leave markup alone.
    pub const fn undiacritize() -> Self {
        NormalizationPolicy {
            strip_tone: true,
            strip_underdot: true,
            strip_markup: false,
        }
    }

    pub const fn tone_only() -> Self {
        NormalizationPolicy {
            strip_tone: true,
            strip_underdot: false,
            strip_markup: false,
        }
    }

    pub const fn identity() -> Self {
        NormalizationPolicy {
            strip_tone: false,
            strip_underdot: false,
            strip_markup: false,
        }
    }

    /// True if `c` is a combining mark this policy removes.
    pub fn strips(&self, c: char) -> bool {
        (self.strip_tone && TONE_MARKS.contains(&c)) || (self.strip_underdot && c == COMBINING_DOT_BELOW)
    }

    fn mapping_slot(&self) -> usize {
        usize::from(self.strip_tone) | (usize::from(self.strip_underdot) << 1)
    }
}

/// Lookup table from every marked Yorùbá letter, in precomposed and
/// decomposed spellings, to its NFC output under one policy.
#[derive(Debug, Clone)]
pub struct GraphemeMapping {
    entries: HashMap<String, String>,
}

const TONE_BEARING: [char; 7] = ['a', 'e', 'i', 'o', 'u', 'm', 'n'];
const UNDERDOT_BEARING: [char; 3] = ['e', 'o', 's'];

impl GraphemeMapping {
    pub fn new(policy: &NormalizationPolicy) -> Self {
        let mut entries = HashMap::new();
        for lower in ['a', 'e', 'i', 'o', 'u', 'm', 'n', 's'] {
            for base in [lower, lower.to_ascii_uppercase()] {
                let dots: &[bool] = if UNDERDOT_BEARING.contains(&lower) { &[false, true] } else { &[false] };
                let tones: &[Option<char>] = if TONE_BEARING.contains(&lower) {
                    &[None, Some(COMBINING_GRAVE), Some(COMBINING_ACUTE), Some(COMBINING_MACRON)]
                } else {
                    &[None]
                };
                for &dot in dots {
                    for &tone in tones {
                        if !dot && tone.is_none() {
                            continue;
                        }
                        let mut marks = Vec::with_capacity(2);
                        if dot {
                            marks.push(COMBINING_DOT_BELOW);
                        }
                        marks.extend(tone);
                        let output: String = std::iter::once(base)
                            .chain(marks.iter().copied().filter(|&m| !policy.strips(m)))
                            .nfc()
                            .collect();
                        let canonical: String = std::iter::once(base).chain(marks.iter().copied()).collect();
                        let composed: String = canonical.nfc().collect();
                        let reversed: String = std::iter::once(base).chain(marks.iter().rev().copied()).collect();
                        for key in [canonical, composed, reversed] {
                            entries.insert(key, output.clone());
                        }
                    }
                }
            }
        }
        GraphemeMapping { entries }
    }

    /// Shared instance for `policy`.
    pub fn for_policy(policy: &NormalizationPolicy) -> &'static GraphemeMapping {
        static TABLES: OnceLock<Vec<GraphemeMapping>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            (0..4)
                .map(|slot| {
                    GraphemeMapping::new(&NormalizationPolicy {
                        strip_tone: slot & 1 != 0,
                        strip_underdot: slot & 2 != 0,
                        strip_markup: false,
                    })
                })
                .collect()
        });
        &tables[policy.mapping_slot()]
    }

    pub fn get(&self, grapheme: &str) -> Option<&str> {
        self.entries.get(grapheme).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Normalize raw bytes; rejects invalid UTF-8 instead of replacing it.
pub fn normalize_text(bytes: &[u8], policy: &NormalizationPolicy) -> Result<String, TextNormError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TextNormError::InvalidEncoding { offset: e.valid_up_to() })?;
    Ok(normalize_str(text, policy))
}

pub fn normalize_str(text: &str, policy: &NormalizationPolicy) -> String {
    let text = if policy.strip_markup {
        Cow::Owned(strip_markup(text))
    } else {
        Cow::Borrowed(text)
    };
    let mapping = GraphemeMapping::for_policy(policy);
    let mut out = String::with_capacity(text.len());
    for grapheme in text.graphemes(true) {
        if grapheme.is_ascii() {
            out.push_str(grapheme);
        } else if let Some(mapped) = mapping.get(grapheme) {
            out.push_str(mapped);
        } else {
            out.extend(strip_grapheme(grapheme, policy));
        }
    }
    out
}

/// Generic route: decompose, drop stripped marks, recompose.
fn strip_grapheme<'a>(grapheme: &'a str, policy: &'a NormalizationPolicy) -> impl Iterator<Item = char> + 'a {
    grapheme.nfd().filter(move |&c| !policy.strips(c)).nfc()
}

/// Split a single grapheme into its canonical base codepoint and trailing
/// codepoints (combining marks in canonical order).
pub fn canonical_decompose(grapheme: &str) -> Result<(char, Vec<char>), TextNormError> {
    let count = grapheme.graphemes(true).count();
    if count != 1 {
        return Err(TextNormError::NotSingleGrapheme {
            text: grapheme.to_owned(),
            count,
        });
    }
    let mut chars = grapheme.nfd();
    // nonempty: exactly one grapheme
    let base = chars.next().expect("grapheme has at least one codepoint");
    Ok((base, chars.collect()))
}

fn tag_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<!--.*?-->|</?[A-Za-z][A-Za-z0-9]*(?:\s[^<>]*)?/?>").unwrap())
}

fn link_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\[([^\[\]]*)\]\]").unwrap())
}

/// Remove HTML-like tags and reduce `[[target|label]]` links to their label.
pub fn strip_markup(raw: &str) -> String {
    let untagged = tag_regex().replace_all(raw, "");
    link_regex()
        .replace_all(&untagged, |caps: &regex::Captures| {
            let inner = &caps[1];
            inner.rsplit('|').next().unwrap_or(inner).to_owned()
        })
        .into_owned()
}

/// True if `c` is a marked Yorùbá letter or a mark that `policy` removes,
/// in either encoding.
pub fn carries_stripped_mark(c: char, policy: &NormalizationPolicy) -> bool {
    policy.strips(c) || c.to_string().nfd().any(|d| policy.strips(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: NormalizationPolicy = NormalizationPolicy::undiacritize();

    #[test]
    fn jupiter_word() {
        assert_eq!(normalize_str("Júpítérì", &FULL), "Jupiteri");
    }

    #[test]
    fn unmarked_text_is_untouched() {
        for policy in [FULL, NormalizationPolicy::tone_only(), NormalizationPolicy::identity()] {
            assert_eq!(normalize_str("Jupiter", &policy), "Jupiter");
        }
    }

    #[test]
    fn opposite_sample_line() {
        assert_eq!(normalize_str("wá lọ ọ̀tá ọ̀rẹ́", &FULL), "wa lo ota ore");
    }

    #[test]
    fn tone_only_keeps_underdots() {
        assert_eq!(normalize_str("ọ̀rẹ́", &NormalizationPolicy::tone_only()), "ọrẹ");
    }

    #[test]
    fn macron_is_a_tone_mark() {
        assert_eq!(normalize_str("ā ō\u{0323}", &FULL), "a o");
        assert_eq!(normalize_str("ā", &NormalizationPolicy::tone_only()), "a");
    }

    #[test]
    fn case_is_preserved() {
        assert_eq!(normalize_str("ẸṢỌ́ ÀÌ", &FULL), "ESO AI");
        assert_eq!(normalize_str("Ọ̀", &NormalizationPolicy::tone_only()), "Ọ");
    }

    #[test]
    fn syllabic_nasals() {
        assert_eq!(normalize_str("ń ǹ ḿ m\u{0300}", &FULL), "n n m m");
    }

    #[test]
    fn hyphens_digits_apostrophes_pass_through() {
        assert_eq!(normalize_str("kọ̀-sílẹ̀ 1913 n'ílé", &FULL), "ko-sile 1913 n'ile");
    }

    #[test]
    fn other_marks_survive() {
        // tilde and circumflex are not Yorùbá tone marks
        assert_eq!(normalize_str("ñ ê", &FULL), "ñ ê");
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        let err = normalize_text(b"ab\xffcd", &FULL).unwrap_err();
        assert_eq!(err, TextNormError::InvalidEncoding { offset: 2 });
    }

    #[test]
    fn markup_stripping_in_policy() {
        let policy = NormalizationPolicy {
            strip_markup: true,
            ..FULL
        };
        assert_eq!(normalize_str("imọle [[ultraviolet]] <b>lati</b>", &policy), "imole ultraviolet lati");
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(canonical_decompose("á").unwrap(), ('a', vec![COMBINING_ACUTE]));
        assert_eq!(canonical_decompose("ẹ́").unwrap(), ('e', vec![COMBINING_DOT_BELOW, COMBINING_ACUTE]));
        // non-canonical input order is reordered
        assert_eq!(
            canonical_decompose("e\u{0301}\u{0323}").unwrap(),
            ('e', vec![COMBINING_DOT_BELOW, COMBINING_ACUTE])
        );
        assert_eq!(canonical_decompose("x").unwrap(), ('x', vec![]));
        assert!(matches!(
            canonical_decompose("ab"),
            Err(TextNormError::NotSingleGrapheme { count: 2, .. })
        ));
        assert!(canonical_decompose("").is_err());
    }

    #[test]
    fn markup_examples() {
        assert_eq!(strip_markup("[[ultraviolet]]"), "ultraviolet");
        assert_eq!(strip_markup("[[hydrocarbon|haidrokarbon]]"), "haidrokarbon");
        assert_eq!(strip_markup("plain text"), "plain text");
        assert_eq!(strip_markup("a <ref name=\"x\">b</ref> c<br/>"), "a b c");
        assert_eq!(strip_markup("x <!-- note --> y"), "x  y");
        assert_eq!(strip_markup("[[unbalanced and 3 < 4 > 2"), "[[unbalanced and 3 < 4 > 2");
    }

    #[test]
    fn mapping_agrees_with_generic_route() {
        for policy in [FULL, NormalizationPolicy::tone_only(), NormalizationPolicy::identity(), NormalizationPolicy {
            strip_tone: false,
            strip_underdot: true,
            strip_markup: false,
        }] {
            let mapping = GraphemeMapping::new(&policy);
            assert!(!mapping.is_empty());
            for (key, value) in mapping.iter() {
                let generic: String = strip_grapheme(key, &policy).collect();
                assert_eq!(value, generic, "key {key:?}");
                assert!(!value.chars().any(|c| carries_stripped_mark(c, &policy)));
            }
        }
    }

    #[test]
    fn mapping_covers_precomposed_letters() {
        let mapping = GraphemeMapping::new(&FULL);
        for letter in ["á", "à", "ẹ", "ọ̀", "ṣ", "Ẹ́", "ń", "ǹ", "ḿ", "Ù", "ī"] {
            let nfc: String = letter.nfc().collect();
            let out = mapping.get(&nfc).unwrap_or_else(|| panic!("missing {letter}"));
            assert!(out.is_ascii());
            assert_eq!(out.chars().next().unwrap().is_uppercase(), nfc.chars().next().unwrap().is_uppercase());
        }
    }
}
