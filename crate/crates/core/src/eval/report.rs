use std::fmt::Write as _;

use super::analogy::{analogy_accuracy, AnalogyOptions, AnalogyResult, AnalogySet, SectionScore};
use super::wordpairs::{wordpair_eval, WordPairResult, WordPairSet};
use super::EvalError;
use crate::embeddings::WordEmbeddings;

/// Intrinsic scores of one embedding. Correlations are stored in [-1, 1] and
/// reported as percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub vocab_size: usize,
    pub analogy: Option<AnalogyResult>,
    pub wordpairs: Option<WordPairResult>,
}

/// Run every supplied test set against `emb`.
pub fn evaluate(
    emb: &WordEmbeddings,
    analogies: Option<&AnalogySet>,
    pairs: Option<&WordPairSet>,
    opts: &AnalogyOptions,
) -> Result<EvalReport, EvalError> {
    let analogy = analogies.map(|set| analogy_accuracy(emb, set, opts)).transpose()?;
    let wordpairs = pairs
        .map(|set| wordpair_eval(emb, set, opts.case_insensitive))
        .transpose()?;
    Ok(EvalReport {
        vocab_size: emb.len(),
        analogy,
        wordpairs,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

impl EvalReport {
    pub fn analogy_pct(&self) -> Option<f64> {
        self.analogy.as_ref().map(|a| a.accuracy_pct)
    }

    pub fn wordsim_pct(&self) -> Option<f64> {
        self.wordpairs.as_ref().map(|w| 100.0 * w.pearson)
    }

    pub fn spearman_pct(&self) -> Option<f64> {
        self.wordpairs.as_ref().map(|w| 100.0 * w.spearman)
    }

    /// Arithmetic mean of every score. Counts must agree across reports,
    /// which holds when all runs share a vocabulary.
    pub fn mean(reports: &[EvalReport]) -> Result<EvalReport, EvalError> {
        let first = reports.first().ok_or(EvalError::MismatchedReports("no reports to average".into()))?;
        let mismatch = |what: &str| EvalError::MismatchedReports(format!("{what} differs between runs"));
        if reports.iter().any(|r| r.vocab_size != first.vocab_size) {
            return Err(mismatch("vocabulary size"));
        }

        let analogy = match &first.analogy {
            None => {
                if reports.iter().any(|r| r.analogy.is_some()) {
                    return Err(mismatch("analogy presence"));
                }
                None
            }
            Some(a0) => {
                let all: Vec<&AnalogyResult> = reports
                    .iter()
                    .map(|r| r.analogy.as_ref().ok_or_else(|| mismatch("analogy presence")))
                    .collect::<Result<_, _>>()?;
                if all.iter().any(|a| {
                    a.evaluated != a0.evaluated || a.skipped != a0.skipped || a.sections.len() != a0.sections.len()
                }) {
                    return Err(mismatch("analogy coverage"));
                }
                let sections = a0
                    .sections
                    .iter()
                    .enumerate()
                    .map(|(k, s0)| {
                        let column: Vec<&SectionScore> = all.iter().map(|a| &a.sections[k]).collect();
                        if column.iter().any(|s| s.name != s0.name || s.evaluated != s0.evaluated) {
                            return Err(mismatch("analogy section coverage"));
                        }
                        Ok(SectionScore {
                            name: s0.name.clone(),
                            evaluated: s0.evaluated,
                            skipped: s0.skipped,
                            accuracy_pct: s0
                                .accuracy_pct
                                .map(|_| mean(column.iter().map(|s| s.accuracy_pct.unwrap_or(0.0)))),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Some(AnalogyResult {
                    accuracy_pct: mean(all.iter().map(|a| a.accuracy_pct)),
                    evaluated: a0.evaluated,
                    skipped: a0.skipped,
                    sections,
                })
            }
        };

        let wordpairs = match &first.wordpairs {
            None => {
                if reports.iter().any(|r| r.wordpairs.is_some()) {
                    return Err(mismatch("word-pair presence"));
                }
                None
            }
            Some(w0) => {
                let all: Vec<&WordPairResult> = reports
                    .iter()
                    .map(|r| r.wordpairs.as_ref().ok_or_else(|| mismatch("word-pair presence")))
                    .collect::<Result<_, _>>()?;
                if all.iter().any(|w| w.evaluated != w0.evaluated || w.skipped != w0.skipped) {
                    return Err(mismatch("word-pair coverage"));
                }
                Some(WordPairResult {
                    pearson: mean(all.iter().map(|w| w.pearson)),
                    spearman: mean(all.iter().map(|w| w.spearman)),
                    evaluated: w0.evaluated,
                    skipped: w0.skipped,
                })
            }
        };

        Ok(EvalReport {
            vocab_size: first.vocab_size,
            analogy,
            wordpairs,
        })
    }

    /// Flat `(key, value)` list of stored values: accuracy in percent,
    /// correlations in [-1, 1].
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut m = vec![("vocab".to_owned(), self.vocab_size as f64)];
        if let Some(a) = &self.analogy {
            m.push(("analogy_pct".into(), a.accuracy_pct));
        }
        if let Some(w) = &self.wordpairs {
            m.push(("wordsim_pearson".into(), w.pearson));
            m.push(("wordsim_spearman".into(), w.spearman));
        }
        if let Some(a) = &self.analogy {
            m.push(("analogy_evaluated".into(), a.evaluated as f64));
            m.push(("analogy_skipped".into(), a.skipped as f64));
            for s in &a.sections {
                if let Some(p) = s.accuracy_pct {
                    m.push((format!("analogy_pct.{}", s.name), p));
                }
            }
        }
        if let Some(w) = &self.wordpairs {
            m.push(("wordsim_evaluated".into(), w.evaluated as f64));
            m.push(("wordsim_skipped".into(), w.skipped as f64));
            m.push(("wordsim_oov_ratio".into(), w.oov_ratio()));
        }
        m
    }

    /// `key: value` lines, optionally prefixed (`prefix.key: value`).
    pub fn to_key_values(&self, prefix: Option<&str>) -> String {
        let mut out = String::new();
        for (k, v) in self.metrics() {
            match prefix {
                Some(p) => writeln!(out, "{p}.{k}: {v}"),
                None => writeln!(out, "{k}: {v}"),
            }
            .expect("writing to a String");
        }
        out
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.2}"))
}

/// Human-readable comparison table, one row per labelled report.
pub fn format_table(rows: &[(String, EvalReport)]) -> String {
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(4).max(4);
    let mut out = format!("{:<width$}  {:>9}  {:>8}  {:>8}  {:>8}\n", "Data", "Vocab", "Analogy", "WordSim", "Spearman");
    for (label, r) in rows {
        writeln!(
            out,
            "{:<width$}  {:>9}  {:>8}  {:>8}  {:>8}",
            label,
            r.vocab_size,
            cell(r.analogy_pct()),
            cell(r.wordsim_pct()),
            cell(r.spearman_pct())
        )
        .expect("writing to a String");
    }
    out
}
