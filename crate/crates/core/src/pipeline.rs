//! End-to-end protocol: clean, fork into diacritized and undiacritized
//! corpora, train both modes on both, evaluate with repeats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{self, filter_corpus, CorpusStats, LanguageProfile};
use crate::embeddings::NgramBuckets;
use crate::eval::{derive_undiacritized_set, format_table, AnalogyOptions, AnalogySet, WordPairSet};
use crate::experiment::{run_experiment_with, Dataset, EvalSets, ExperimentResult};
use crate::sgns::{Mode, SigmoidMode, TrainConfig};
use crate::textnorm::{normalize_str, strip_markup, NormalizationPolicy};
use crate::Error;

/// Which test sets the undiacritized corpus is scored against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EvalSetChoice {
    /// Undiacritized corpus gets sets normalized with the same policy.
    #[default]
    Matched,
    /// Every corpus is scored on the sets as given.
    Diacritized,
}

impl FromStr for EvalSetChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matched" => Ok(EvalSetChoice::Matched),
            "diacritized" => Ok(EvalSetChoice::Diacritized),
            other => Err(format!("unknown eval_sets {other:?} (expected matched or diacritized)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub raw: Option<PathBuf>,
    pub cleaned: Option<PathBuf>,
    pub normalized: Option<PathBuf>,
    pub model_dir: Option<PathBuf>,
    pub analogy: Option<PathBuf>,
    pub wordpairs: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
    pub policy: NormalizationPolicy,
    pub profile: LanguageProfile,
    pub lowercase: bool,
    pub train: TrainConfig,
    pub repeats: usize,
    pub eval_sets: EvalSetChoice,
    pub eval: AnalogyOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            raw: None,
            cleaned: None,
            normalized: None,
            model_dir: None,
            analogy: None,
            wordpairs: None,
            report_dir: None,
            policy: NormalizationPolicy::undiacritize(),
            profile: LanguageProfile::default(),
            lowercase: false,
            train: TrainConfig::default(),
            repeats: 2,
            eval_sets: EvalSetChoice::Matched,
            eval: AnalogyOptions::default(),
        }
    }
}

/// Keys accepted by [`PipelineConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "raw",
    "cleaned",
    "normalized",
    "model_dir",
    "analogy",
    "wordpairs",
    "report_dir",
    "strip_tone",
    "strip_underdot",
    "threshold",
    "lowercase",
    "dim",
    "window",
    "negatives",
    "epochs",
    "lr_start",
    "lr_end",
    "subsample",
    "mode",
    "seed",
    "workers",
    "min_count",
    "buckets",
    "min_n",
    "max_n",
    "sigmoid",
    "repeats",
    "eval_sets",
    "restrict_vocab",
    "case_insensitive",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, Error>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key} = {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key} = {value:?}: expected true or false"))),
    }
}

impl PipelineConfig {
    /// Parse `key = value` lines; `#` starts a comment. Later keys win.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut config = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", i + 1)))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(config)
    }

    /// Read a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut config = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            config.rebase(base);
        }
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        for slot in [
            &mut self.raw,
            &mut self.cleaned,
            &mut self.normalized,
            &mut self.model_dir,
            &mut self.analogy,
            &mut self.wordpairs,
            &mut self.report_dir,
        ] {
            if let Some(p) = slot.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let path = || Some(PathBuf::from(value));
        match key {
            "raw" => self.raw = path(),
            "cleaned" => self.cleaned = path(),
            "normalized" => self.normalized = path(),
            "model_dir" => self.model_dir = path(),
            "analogy" => self.analogy = path(),
            "wordpairs" => self.wordpairs = path(),
            "report_dir" => self.report_dir = path(),
            "strip_tone" => self.policy.strip_tone = parse_bool(key, value)?,
            "strip_underdot" => self.policy.strip_underdot = parse_bool(key, value)?,
            "threshold" => {
                let t: f64 = parse_value(key, value)?;
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
                }
                self.profile.threshold = t;
            }
            "lowercase" => self.lowercase = parse_bool(key, value)?,
            "dim" => self.train.dim = parse_value(key, value)?,
            "window" => self.train.window = parse_value(key, value)?,
            "negatives" => self.train.negatives = parse_value(key, value)?,
            "epochs" => self.train.epochs = parse_value(key, value)?,
            "lr_start" => self.train.lr_start = parse_value(key, value)?,
            "lr_end" => self.train.lr_end = parse_value(key, value)?,
            "subsample" => self.train.subsample = parse_value(key, value)?,
            "mode" => self.train.mode = parse_value(key, value)?,
            "seed" => self.train.seed = parse_value(key, value)?,
            "workers" => self.train.workers = parse_value(key, value)?,
            "min_count" => self.train.min_count = parse_value(key, value)?,
            "buckets" => self.train.bucket_count = parse_value(key, value)?,
            "min_n" => self.train.min_n = parse_value(key, value)?,
            "max_n" => self.train.max_n = parse_value(key, value)?,
            "sigmoid" => {
                self.train.sigmoid = match value {
                    "table" => SigmoidMode::Table,
                    "exact" => SigmoidMode::Exact,
                    _ => return Err(Error::Config(format!("sigmoid = {value:?}: expected table or exact"))),
                }
            }
            "repeats" => self.repeats = parse_value(key, value)?,
            "eval_sets" => self.eval_sets = parse_value(key, value)?,
            "restrict_vocab" => {
                self.eval.restrict_vocab = match value {
                    "" | "none" | "0" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "case_insensitive" => self.eval.case_insensitive = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        self.train.validate()?;
        for p in [&self.raw, &self.analogy, &self.wordpairs].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

/// Read a UTF-8 text file as lines, reporting the line of the first invalid
/// byte sequence.
pub fn read_lines(path: &Path) -> Result<Vec<String>, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    decode_lines(&bytes).map_err(|line| Error::Encoding {
        path: path.display().to_string(),
        line,
    })
}

/// Split bytes into lines (`\n`, with an optional trailing `\r`). On invalid
/// UTF-8 returns the 1-based line number.
pub fn decode_lines(bytes: &[u8]) -> Result<Vec<String>, usize> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1)?;
    Ok(text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_owned())
        .collect())
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<(), Error> {
    let mut text = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Strip markup from every line, then filter by language profile.
pub fn clean_lines<S: AsRef<str> + Sync>(raw: &[S], profile: &LanguageProfile) -> Result<(Vec<String>, CorpusStats), Error> {
    if raw.iter().all(|l| l.as_ref().trim().is_empty()) {
        return Err(Error::EmptyInput("raw corpus".into()));
    }
    let stripped: Vec<String> = raw.par_iter().map(|l| strip_markup(l.as_ref())).collect();
    Ok(filter_corpus(&stripped, profile))
}

pub fn normalize_lines<S: AsRef<str> + Sync>(lines: &[S], policy: &NormalizationPolicy) -> Vec<String> {
    lines.par_iter().map(|l| normalize_str(l.as_ref(), policy)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub corpus: String,
    pub mode: Mode,
    pub result: ExperimentResult,
}

impl Leg {
    pub fn label(&self) -> String {
        format!("{}/{}", self.corpus, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    pub name: String,
    pub stats: CorpusStats,
    /// Vocabulary size after the `min_count` cut.
    pub vocab_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub clean: Option<CorpusStats>,
    pub corpora: Vec<CorpusSummary>,
    pub repeats: usize,
    pub legs: Vec<Leg>,
}

impl PipelineReport {
    pub fn leg(&self, corpus: &str, mode: Mode) -> Option<&Leg> {
        self.legs.iter().find(|l| l.corpus == corpus && l.mode == mode)
    }

    /// Comparison table followed by `key: value` lines.
    pub fn to_text(&self) -> String {
        let rows: Vec<(String, _)> = self.legs.iter().map(|l| (l.label(), l.result.mean.clone())).collect();
        let mut out = format_table(&rows);
        out.push('\n');
        writeln!(out, "repeats: {}", self.repeats).expect("writing to a String");
        if let Some(stats) = &self.clean {
            for line in stats.to_string().lines() {
                writeln!(out, "clean.{line}").expect("writing to a String");
            }
        }
        for c in &self.corpora {
            writeln!(out, "{}.vocab: {}", c.name, c.vocab_size).expect("writing to a String");
            writeln!(out, "{}.total_tokens: {}", c.name, c.stats.total_tokens).expect("writing to a String");
            writeln!(out, "{}.distinct_tokens: {}", c.name, c.stats.distinct_tokens).expect("writing to a String");
            writeln!(out, "{}.byte_size: {}", c.name, c.stats.byte_size).expect("writing to a String");
        }
        for leg in &self.legs {
            let prefix = format!("{}.{}", leg.corpus, leg.mode);
            out.push_str(&leg.result.mean.to_key_values(Some(&prefix)));
            for (r, run) in leg.result.runs.iter().enumerate() {
                out.push_str(&run.to_key_values(Some(&format!("{prefix}.run{}", r + 1))));
            }
        }
        out
    }
}

pub const DIACRITIZED: &str = "diacritized";
pub const UNDIACRITIZED: &str = "undiacritized";

/// Train and evaluate both modes on the cleaned corpus and on its
/// normalized copy.
pub fn run_protocol(
    cleaned: &[String],
    analogy: Option<&AnalogySet>,
    wordpairs: Option<&WordPairSet>,
    config: &PipelineConfig,
) -> Result<PipelineReport, Error> {
    if config.repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    config.train.validate()?;
    let policy = NormalizationPolicy {
        strip_markup: false,
        ..config.policy
    };
    let normalized = normalize_lines(cleaned, &policy);
    if let Some(path) = &config.normalized {
        write_lines(path, &normalized)?;
    }

    let matched = config.eval_sets == EvalSetChoice::Matched;
    let derived_analogy = analogy.filter(|_| matched).map(|set| {
        let d = derive_undiacritized_set(set, &policy);
        if d.degenerate_dropped + d.duplicates_dropped > 0 {
            log::info!(
                "undiacritized analogy set: {} degenerate and {} duplicate quadruples dropped",
                d.degenerate_dropped,
                d.duplicates_dropped
            );
        }
        d.set
    });
    let derived_pairs = wordpairs.filter(|_| matched).map(|set| {
        let (set, dropped) = set.normalized(&policy);
        if dropped > 0 {
            log::info!("undiacritized word-pair set: {dropped} pairs dropped");
        }
        set
    });

    let variants = [
        (DIACRITIZED, cleaned, analogy.cloned(), wordpairs.cloned()),
        (
            UNDIACRITIZED,
            &normalized[..],
            derived_analogy.or_else(|| analogy.cloned()),
            derived_pairs.or_else(|| wordpairs.cloned()),
        ),
    ];

    if let Some(dir) = &config.model_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    }

    let mut corpora = Vec::new();
    let mut legs = Vec::new();
    for (name, lines, analogy, wordpairs) in variants {
        let dataset = Dataset {
            name: name.to_owned(),
            sentences: corpus::sentences(lines, config.lowercase),
        };
        let sets = EvalSets {
            analogy,
            wordpairs,
            options: config.eval,
        };
        let mut vocab_size = 0;
        for mode in [Mode::Word, Mode::Subword] {
            let train = TrainConfig {
                mode,
                ..config.train.clone()
            };
            let result = run_experiment_with(&dataset, &sets, &train, config.repeats, |r, model| {
                let Some(dir) = &config.model_dir else {
                    return Ok(());
                };
                let stem = format!("{name}.{mode}.run{}", r + 1);
                save_model(&model.to_embeddings(), &dir.join(format!("{stem}.vec")), &dir.join(format!("{stem}.ngrams")))
            })?;
            vocab_size = result.vocab_size;
            legs.push(Leg {
                corpus: name.to_owned(),
                mode,
                result,
            });
        }
        corpora.push(CorpusSummary {
            name: name.to_owned(),
            stats: corpus::corpus_stats(lines),
            vocab_size,
        });
    }
    Ok(PipelineReport {
        clean: None,
        corpora,
        repeats: config.repeats,
        legs,
    })
}

/// Write vectors, plus the n-gram bucket file when the embedding has one.
pub fn save_model(emb: &crate::WordEmbeddings, vectors: &Path, ngrams: &Path) -> Result<(), Error> {
    emb.save(vectors).map_err(|e| Error::io(vectors.display().to_string(), e))?;
    if let Some(b) = emb.buckets() {
        save_buckets(b, ngrams)?;
    }
    Ok(())
}

fn save_buckets(b: &NgramBuckets, path: &Path) -> Result<(), Error> {
    let file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    b.write_text(std::io::BufWriter::new(file))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Full run from the raw corpus: clean, then [`run_protocol`]. Writes the
/// cleaned and normalized corpora and `report.txt` where configured.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport, Error> {
    config.validate()?;
    let raw_path = config
        .raw
        .as_ref()
        .ok_or_else(|| Error::Config("no raw corpus given".into()))?;
    let raw = read_lines(raw_path)?;
    let (cleaned, stats) = clean_lines(&raw, &config.profile)?;
    log::info!(
        "cleaned corpus: kept {} of {} lines",
        stats.total_lines - stats.dropped_lines,
        stats.total_lines
    );
    if let Some(path) = &config.cleaned {
        write_lines(path, &cleaned)?;
    }
    let analogy = config.analogy.as_deref().map(AnalogySet::load).transpose()?;
    let wordpairs = config.wordpairs.as_deref().map(WordPairSet::load).transpose()?;
    let mut report = run_protocol(&cleaned, analogy.as_ref(), wordpairs.as_ref(), config)?;
    report.clean = Some(stats);
    if let Some(dir) = &config.report_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let path = dir.join("report.txt");
        fs::write(&path, report.to_text()).map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(report)
}
