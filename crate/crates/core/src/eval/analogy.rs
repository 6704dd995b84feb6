//! Analogy sets in the `: section` / `a b c d` format and 3CosAdd scoring.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::{EvalError, Resolver};
use crate::embeddings::WordEmbeddings;
use crate::matrix::unit;
use crate::textnorm::{self, NormalizationPolicy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogySection {
    pub name: String,
    pub quadruples: Vec<[String; 4]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogySet {
    pub sections: Vec<AnalogySection>,
    /// Whether any token carries a tone mark or dot below.
    pub diacritized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    WrongArity { found: usize },
    EmptyToken,
    DuplicateQuadruple { first_line: usize },
    UnknownSectionMarker,
    DuplicateSection,
    DataBeforeSection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub line: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            ViolationKind::WrongArity { found } => write!(f, "expected 4 tokens, found {found}"),
            ViolationKind::EmptyToken => f.write_str("empty token"),
            ViolationKind::DuplicateQuadruple { first_line } => write!(f, "duplicate of line {first_line}"),
            ViolationKind::UnknownSectionMarker => f.write_str("malformed section header (expected \": name\")"),
            ViolationKind::DuplicateSection => f.write_str("section name already used"),
            ViolationKind::DataBeforeSection => f.write_str("data line before the first section header"),
        }
    }
}

enum Line<'a> {
    Blank,
    Header(&'a str),
    Data(Vec<&'a str>),
}

fn classify(line: &str) -> Result<Line<'_>, ViolationKind> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    if line.trim().is_empty() {
        return Ok(Line::Blank);
    }
    if let Some(rest) = line.strip_prefix(':') {
        return match rest.strip_prefix(' ') {
            Some(name) if !name.is_empty() && !name.contains(char::is_whitespace) => Ok(Line::Header(name)),
            _ => Err(ViolationKind::UnknownSectionMarker),
        };
    }
    let tokens: Vec<&str> = line.split([' ', '\t']).collect();
    if tokens.iter().any(|t| t.is_empty()) {
        return Err(ViolationKind::EmptyToken);
    }
    if tokens.len() != 4 {
        return Err(ViolationKind::WrongArity { found: tokens.len() });
    }
    Ok(Line::Data(tokens))
}

struct Scan {
    set: AnalogySet,
    violations: Vec<Violation>,
}

fn scan(text: &str) -> Scan {
    let mut sections: Vec<AnalogySection> = Vec::new();
    let mut names = HashSet::new();
    let mut seen: HashMap<[String; 4], usize> = HashMap::new();
    let mut violations = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut violate = |kind| violations.push(Violation { line, kind });
        match classify(raw) {
            Err(kind) => violate(kind),
            Ok(Line::Blank) => {}
            Ok(Line::Header(name)) => {
                if !names.insert(name.to_owned()) {
                    violate(ViolationKind::DuplicateSection);
                }
                sections.push(AnalogySection {
                    name: name.to_owned(),
                    quadruples: Vec::new(),
                });
                seen.clear();
            }
            Ok(Line::Data(tokens)) => {
                let Some(section) = sections.last_mut() else {
                    violate(ViolationKind::DataBeforeSection);
                    continue;
                };
                let quad: [String; 4] = std::array::from_fn(|k| tokens[k].to_owned());
                if let Some(&first_line) = seen.get(&quad) {
                    violate(ViolationKind::DuplicateQuadruple { first_line });
                    continue;
                }
                seen.insert(quad.clone(), line);
                section.quadruples.push(quad);
            }
        }
    }
    let diacritized = sections
        .iter()
        .flat_map(|s| s.quadruples.iter().flatten())
        .any(|t| t.chars().any(|c| textnorm::carries_stripped_mark(c, &NormalizationPolicy::undiacritize())));
    Scan {
        set: AnalogySet { sections, diacritized },
        violations,
    }
}

/// All structural problems of an analogy file, in line order.
pub fn validate_text(text: &str) -> Vec<Violation> {
    scan(text).violations
}

/// Validate the analogy file at `path`. Undecodable lines are a parse error.
pub fn validate_set(path: &Path) -> Result<Vec<Violation>, EvalError> {
    Ok(validate_text(&read_utf8(path)?))
}

pub(crate) fn read_utf8(path: &Path) -> Result<String, EvalError> {
    let bytes = fs::read(path)?;
    String::from_utf8(bytes).map_err(|e| {
        let offset = e.utf8_error().valid_up_to();
        let line = e.as_bytes()[..offset].iter().filter(|&&b| b == b'\n').count() + 1;
        EvalError::Parse {
            line,
            message: "invalid UTF-8".into(),
        }
    })
}

impl AnalogySet {
    /// Strict parse: the first violation is an error, as is an empty set.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let Scan { set, violations } = scan(text);
        if let Some(v) = violations.first() {
            return Err(EvalError::Parse {
                line: v.line,
                message: v.to_string(),
            });
        }
        if set.is_empty() {
            return Err(EvalError::EmptySet);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::parse(&read_utf8(path)?)
    }

    /// Total number of quadruples.
    pub fn len(&self) -> usize {
        self.sections.iter().map(|s| s.quadruples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for section in &self.sections {
            out.push_str(": ");
            out.push_str(&section.name);
            out.push('\n');
            for q in &section.quadruples {
                out.push_str(&q.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedSet {
    pub set: AnalogySet,
    /// Quadruples in which two distinct tokens collapsed into one.
    pub degenerate_dropped: usize,
    /// Quadruples that became copies of an earlier one in their section.
    pub duplicates_dropped: usize,
}

/// Normalize every token with `policy`, dropping quadruples that become
/// degenerate or duplicated.
pub fn derive_undiacritized_set(set: &AnalogySet, policy: &NormalizationPolicy) -> DerivedSet {
    let mut degenerate_dropped = 0;
    let mut duplicates_dropped = 0;
    let sections = set
        .sections
        .iter()
        .map(|section| {
            let mut seen = HashSet::new();
            let mut quadruples = Vec::with_capacity(section.quadruples.len());
            for q in &section.quadruples {
                let n: [String; 4] = std::array::from_fn(|k| textnorm::normalize_str(&q[k], policy));
                let collapsed = (0..4).any(|i| (i + 1..4).any(|j| q[i] != q[j] && n[i] == n[j]));
                if collapsed {
                    degenerate_dropped += 1;
                } else if !seen.insert(n.clone()) {
                    duplicates_dropped += 1;
                } else {
                    quadruples.push(n);
                }
            }
            AnalogySection {
                name: section.name.clone(),
                quadruples,
            }
        })
        .collect();
    DerivedSet {
        set: AnalogySet {
            sections,
            diacritized: false,
        },
        degenerate_dropped,
        duplicates_dropped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalogyOptions {
    /// Only the first N vocabulary words are candidates and resolvable.
    pub restrict_vocab: Option<usize>,
    pub case_insensitive: bool,
}

impl Default for AnalogyOptions {
    fn default() -> Self {
        AnalogyOptions {
            restrict_vocab: None,
            case_insensitive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionScore {
    pub name: String,
    pub evaluated: usize,
    pub skipped: usize,
    /// `None` when nothing in the section was evaluable.
    pub accuracy_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyResult {
    /// Micro-average over all evaluated quadruples.
    pub accuracy_pct: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub sections: Vec<SectionScore>,
}

/// 3CosAdd: for each quadruple `a b c d` whose words all resolve, predict the
/// candidate maximizing `cos(w, b̂ - â + ĉ)` over unit-normalized vectors,
/// excluding `a`, `b` and `c`; it is correct when it matches `d`. Quadruples
/// with an unresolvable word are skipped and counted.
pub fn analogy_accuracy(emb: &WordEmbeddings, set: &AnalogySet, opts: &AnalogyOptions) -> Result<AnalogyResult, EvalError> {
    let resolver = Resolver::new(emb, opts.restrict_vocab, opts.case_insensitive);
    let limit = resolver.limit();
    let dim = emb.dim();
    let units: Vec<f32> = (0..limit).flat_map(|i| unit(emb.vector(i))).collect();
    let unit_row = |i: usize| &units[i * dim..(i + 1) * dim];

    let predict = |q: &[String; 4]| -> Option<bool> {
        let ids: Vec<usize> = q.iter().map(|w| resolver.resolve(w)).collect::<Option<_>>()?;
        let (a, b, c) = (unit_row(ids[0]), unit_row(ids[1]), unit_row(ids[2]));
        let target: Vec<f64> = (0..dim)
            .map(|k| f64::from(b[k]) - f64::from(a[k]) + f64::from(c[k]))
            .collect();
        let excluded = [resolver.key_of(ids[0]), resolver.key_of(ids[1]), resolver.key_of(ids[2])];
        let mut best: Option<(usize, f64)> = None;
        for i in 0..limit {
            if excluded.contains(&resolver.key_of(i)) {
                continue;
            }
            let score: f64 = unit_row(i).iter().zip(&target).map(|(&x, &t)| f64::from(x) * t).sum();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        Some(best.is_some_and(|(i, _)| resolver.key_of(i) == resolver.key(&q[3]).as_str()))
    };

    let mut sections = Vec::with_capacity(set.sections.len());
    let (mut correct, mut evaluated, mut skipped) = (0usize, 0usize, 0usize);
    for section in &set.sections {
        let outcomes: Vec<Option<bool>> = section.quadruples.par_iter().map(predict).collect();
        let sec_eval = outcomes.iter().filter(|o| o.is_some()).count();
        let sec_correct = outcomes.iter().filter(|o| **o == Some(true)).count();
        let sec_skipped = outcomes.len() - sec_eval;
        sections.push(SectionScore {
            name: section.name.clone(),
            evaluated: sec_eval,
            skipped: sec_skipped,
            accuracy_pct: (sec_eval > 0).then(|| 100.0 * sec_correct as f64 / sec_eval as f64),
        });
        correct += sec_correct;
        evaluated += sec_eval;
        skipped += sec_skipped;
    }
    if evaluated == 0 {
        return Err(EvalError::NoEvaluableQuadruples { skipped });
    }
    Ok(AnalogyResult {
        accuracy_pct: 100.0 * correct as f64 / evaluated as f64,
        evaluated,
        skipped,
        sections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    const FIXTURE: &str = ": gram2-opposite\nwá lọ àgbà ọdọ\nwá lọ òwúrọ̀ ìrọlẹ́\n: family\nbaba ìyá ọkọ aya\n";

    fn emb(words: &[&str], rows: &[&[f32]]) -> WordEmbeddings {
        let dim = rows[0].len();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        WordEmbeddings::new(words.iter().map(|w| w.to_string()).collect(), Matrix::from_vec(rows.len(), dim, data))
    }

    fn set(text: &str) -> AnalogySet {
        AnalogySet::parse(text).unwrap()
    }

    #[test]
    fn parse_and_write_back() {
        let s = set(FIXTURE);
        assert_eq!(s.sections.len(), 2);
        assert_eq!(s.len(), 3);
        assert!(s.diacritized);
        assert_eq!(s.to_text(), FIXTURE);
        assert!(!set(": x\na b c d\n").diacritized);
    }

    #[test]
    fn validation_reports() {
        assert!(validate_text(FIXTURE).is_empty());
        let v = validate_text(": s\na b c\n");
        assert_eq!(v, vec![Violation { line: 2, kind: ViolationKind::WrongArity { found: 3 } }]);
        let v = validate_text(": s\na b c d\nx y z w\na b c d\n");
        assert_eq!(v, vec![Violation { line: 4, kind: ViolationKind::DuplicateQuadruple { first_line: 2 } }]);
        let v = validate_text("a b c d\n:bad\n:  x\n: s\na  b c d\n: s\n");
        let kinds: Vec<_> = v.into_iter().map(|v| (v.line, v.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (1, ViolationKind::DataBeforeSection),
                (2, ViolationKind::UnknownSectionMarker),
                (3, ViolationKind::UnknownSectionMarker),
                (5, ViolationKind::EmptyToken),
                (6, ViolationKind::DuplicateSection),
            ]
        );
        assert!(matches!(AnalogySet::parse(": s\na b c\n"), Err(EvalError::Parse { line: 2, .. })));
        assert!(matches!(AnalogySet::parse(": s\n"), Err(EvalError::EmptySet)));
    }

    #[test]
    fn derive_reference_sample() {
        let derived = derive_undiacritized_set(&set(FIXTURE), &NormalizationPolicy::undiacritize());
        assert_eq!(derived.set.sections[0].quadruples[0], ["wa", "lo", "agba", "odo"].map(String::from));
        assert_eq!(derived.degenerate_dropped, 0);
        assert!(!derived.set.diacritized);
        let again = derive_undiacritized_set(&derived.set, &NormalizationPolicy::undiacritize());
        assert_eq!(again.set, derived.set);
    }

    #[test]
    fn derive_drops_collisions() {
        // ọkọ (husband) and ọkọ̀ (vehicle) collapse; so do two quadruples that differ only in marks
        let s = set(": s\nbaba ọkọ ìyá ọkọ̀\na b c d\nà b c d\nkò lọ wá bọ\n");
        let d = derive_undiacritized_set(&s, &NormalizationPolicy::undiacritize());
        assert_eq!(d.degenerate_dropped, 1);
        assert_eq!(d.duplicates_dropped, 1);
        assert_eq!(d.set.to_text(), ": s\na b c d\nko lo wa bo\n");
    }

    #[test]
    fn forced_choice_two_words() {
        let e = emb(&["x", "y"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = analogy_accuracy(&e, &set(": s\nx x x y\n"), &AnalogyOptions::default()).unwrap();
        assert_eq!(r.accuracy_pct, 100.0);
        assert_eq!(r.evaluated, 1);
    }

    #[test]
    fn parallelogram_is_found() {
        // b - a + c = d exactly; the distractor e is orthogonal to everything
        let e = emb(
            &["a", "b", "c", "d", "e"],
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[1.0, 0.0, 1.0, 0.0],
                &[0.0, 1.0, 1.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
            ],
        );
        let r = analogy_accuracy(&e, &set(": s\na b c d\n"), &AnalogyOptions::default()).unwrap();
        assert_eq!(r.accuracy_pct, 100.0);
    }

    #[test]
    fn oov_quadruples_are_skipped() {
        let e = emb(&["x", "y"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = analogy_accuracy(&e, &set(": s\nx x x y\nx x q y\n: t\nq q q q\n"), &AnalogyOptions::default()).unwrap();
        assert_eq!((r.evaluated, r.skipped), (1, 2));
        assert_eq!(r.sections[1].accuracy_pct, None);
        assert!(matches!(
            analogy_accuracy(&e, &set(": s\nq q q q\n"), &AnalogyOptions::default()),
            Err(EvalError::NoEvaluableQuadruples { skipped: 1 })
        ));
    }

    #[test]
    fn case_handling() {
        let e = emb(&["X", "Y"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = set(": s\nx x x y\n");
        assert_eq!(analogy_accuracy(&e, &s, &AnalogyOptions::default()).unwrap().accuracy_pct, 100.0);
        let strict = AnalogyOptions { case_insensitive: false, ..AnalogyOptions::default() };
        assert!(analogy_accuracy(&e, &s, &strict).is_err());
    }

    #[test]
    fn restriction_limits_candidates() {
        let e = emb(&["x", "y", "z"], &[&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        let opts = AnalogyOptions { restrict_vocab: Some(2), ..AnalogyOptions::default() };
        let r = analogy_accuracy(&e, &set(": s\nx x x y\nx x x z\n"), &opts).unwrap();
        assert_eq!((r.evaluated, r.skipped), (1, 1));
    }
}
