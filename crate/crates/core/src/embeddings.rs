//! Word vectors as seen by evaluation, and the word2vec text format.
//!
//! A [`WordEmbeddings`] holds one vector per vocabulary word. Models trained in
//! subword mode additionally carry their n-gram bucket rows so that
//! out-of-vocabulary words can still be composed.
//!
//! Text format: a header line `"<count> <dim>"` followed by one line per word,
//! `"<token> <v1> ... <v_dim>"`. The bucket companion file has the header
//! `"<bucket_count> <dim> <min_n> <max_n>"` and one line of `dim` values per
//! bucket, in bucket order.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::matrix::Matrix;
use crate::vocab::SubwordIndexer;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("word {0:?} is out of vocabulary")]
    OutOfVocabulary(String),
    #[error("word {0:?} has no n-grams to compose from")]
    NoRepresentableNgrams(String),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("header announces {expected} rows but file has {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("bucket file has dimension {found}, vectors have {expected}")]
    BucketDimension { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Hashed character n-gram rows used to compose out-of-vocabulary words.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramBuckets {
    indexer: SubwordIndexer,
    rows: Matrix,
}

impl NgramBuckets {
    pub fn new(min_n: usize, max_n: usize, rows: Matrix) -> Result<Self, FormatError> {
        let indexer = SubwordIndexer::new(min_n, max_n, rows.rows(), 0).map_err(|e| FormatError::Header(e.to_string()))?;
        Ok(NgramBuckets { indexer, rows })
    }

    /// Indexer with bucket ids starting at 0.
    pub fn indexer(&self) -> &SubwordIndexer {
        &self.indexer
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }

    /// Mean of the bucket rows of `word`'s n-grams.
    pub fn compose(&self, word: &str) -> Result<Vec<f32>, ModelError> {
        let ids = self.indexer.extract_ngrams(word);
        if ids.is_empty() {
            return Err(ModelError::NoRepresentableNgrams(word.to_owned()));
        }
        Ok(mean_rows(&self.rows, &ids).into_iter().map(|v| v as f32).collect())
    }

    pub fn write_text<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(
            out,
            "{} {} {} {}",
            self.rows.rows(),
            self.rows.cols(),
            self.indexer.min_n(),
            self.indexer.max_n()
        )?;
        for row in self.rows.iter_rows() {
            write_values(&mut out, row)?;
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, FormatError> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| FormatError::Header("empty file".into()))??;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse().map_err(|_| FormatError::Header(header.clone())))
            .collect::<Result<_, _>>()?;
        let [count, dim, min_n, max_n] = fields[..] else {
            return Err(FormatError::Header(header));
        };
        let mut data = Vec::with_capacity(count * dim);
        let mut found = 0;
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            parse_values(line.split_whitespace(), dim, i + 2, &mut data)?;
            found += 1;
        }
        if found != count {
            return Err(FormatError::CountMismatch { expected: count, found });
        }
        NgramBuckets::new(min_n, max_n, Matrix::from_vec(count, dim, data))
    }
}

/// Mean of the given rows, accumulated in `f64`.
pub(crate) fn mean_rows(m: &Matrix, ids: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0f64; m.cols()];
    for &id in ids {
        for (a, &v) in acc.iter_mut().zip(m.row(id)) {
            *a += f64::from(v);
        }
    }
    let n = ids.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn write_values<W: Write>(out: &mut W, values: &[f32]) -> io::Result<()> {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.write_all(b" ")?;
        }
        // shortest representation that parses back to the same f32
        write!(out, "{v}")?;
    }
    Ok(())
}

fn parse_values<'a>(
    fields: impl Iterator<Item = &'a str>,
    dim: usize,
    line: usize,
    out: &mut Vec<f32>,
) -> Result<(), FormatError> {
    let start = out.len();
    for field in fields {
        let v: f32 = field.parse().map_err(|_| FormatError::Line {
            line,
            message: format!("not a number: {field:?}"),
        })?;
        if !v.is_finite() {
            return Err(FormatError::Line {
                line,
                message: format!("non-finite value {field:?}"),
            });
        }
        out.push(v);
    }
    let found = out.len() - start;
    if found != dim {
        return Err(FormatError::DimensionMismatch { line, expected: dim, found });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Matrix,
    buckets: Option<NgramBuckets>,
}

impl WordEmbeddings {
    /// Panics if the row count differs from the word count. Duplicate words
    /// keep their first row for lookups.
    pub fn new(words: Vec<String>, vectors: Matrix) -> Self {
        assert_eq!(words.len(), vectors.rows(), "one vector per word");
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            index.entry(w.clone()).or_insert(i);
        }
        WordEmbeddings {
            words,
            index,
            vectors,
            buckets: None,
        }
    }

    pub fn with_buckets(mut self, buckets: NgramBuckets) -> Result<Self, FormatError> {
        if buckets.dim() != self.dim() {
            return Err(FormatError::BucketDimension {
                expected: self.dim(),
                found: buckets.dim(),
            });
        }
        self.buckets = Some(buckets);
        Ok(self)
    }

    pub fn buckets(&self) -> Option<&NgramBuckets> {
        self.buckets.as_ref()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, idx: usize) -> &[f32] {
        self.vectors.row(idx)
    }

    /// In-vocabulary row, or an n-gram composition when buckets are present.
    pub fn lookup(&self, word: &str) -> Result<Cow<'_, [f32]>, ModelError> {
        if let Some(idx) = self.index_of(word) {
            return Ok(Cow::Borrowed(self.vector(idx)));
        }
        match &self.buckets {
            Some(b) => b.compose(word).map(Cow::Owned),
            None => Err(ModelError::OutOfVocabulary(word.to_owned())),
        }
    }

    pub fn write_text<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = BufWriter::new(out);
        writeln!(out, "{} {}", self.len(), self.dim())?;
        for (word, row) in self.words.iter().zip(self.vectors.iter_rows()) {
            write!(out, "{word} ")?;
            write_values(&mut out, row)?;
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, FormatError> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| FormatError::Header("empty file".into()))??;
        let mut fields = header.split_whitespace().map(str::parse::<usize>);
        let (count, dim) = match (fields.next(), fields.next(), fields.next()) {
            (Some(Ok(c)), Some(Ok(d)), None) if d > 0 => (c, d),
            _ => return Err(FormatError::Header(header)),
        };
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields.next().ok_or_else(|| FormatError::Line {
                line: lineno,
                message: "missing token".into(),
            })?;
            parse_values(fields, dim, lineno, &mut data)?;
            words.push(word.to_owned());
        }
        if words.len() != count {
            return Err(FormatError::CountMismatch {
                expected: count,
                found: words.len(),
            });
        }
        Ok(WordEmbeddings::new(words, Matrix::from_vec(count, dim, data)))
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        self.write_text(File::create(path)?)
    }

    /// Load vectors, plus the bucket companion file when given.
    pub fn load(path: &Path, buckets: Option<&Path>) -> Result<Self, FormatError> {
        let emb = Self::read_text(BufReader::new(File::open(path)?))?;
        match buckets {
            Some(p) => emb.with_buckets(NgramBuckets::read_text(BufReader::new(File::open(p)?))?),
            None => Ok(emb),
        }
    }
}
