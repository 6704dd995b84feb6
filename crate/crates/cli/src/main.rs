use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use yorvec::corpus::LanguageProfile;
use yorvec::eval::{self, AnalogySet, WordPairSet};
use yorvec::pipeline::{self, PipelineConfig};
use yorvec::sgns::{self, IndexedCorpus};
use yorvec::textnorm::{normalize_str, NormalizationPolicy};
use yorvec::vocab::{count_tokens, Vocabulary};
use yorvec::{ErrorClass, WordEmbeddings};

#[derive(Parser)]
#[command(name = "yorvec", version, about = "Clean, normalize, train and evaluate Yorùbá word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Strip markup and drop lines that do not look like Yorùbá
    Clean(CleanArgs),
    /// Remove diacritics line by line (stdin to stdout by default)
    Normalize(NormalizeArgs),
    /// Train one embedding model
    Train(TrainArgs),
    /// Score a model on analogy and word-pair sets
    Eval(EvalArgs),
    /// Full protocol: both corpora, both modes, averaged over repeats
    Experiment(ExperimentArgs),
    /// Nearest neighbors of a word
    Nn(NnArgs),
    /// Check an analogy file for format problems
    ValidateSet(ValidateArgs),
    /// Write the undiacritized copy of an analogy set
    DeriveSet(DeriveArgs),
}

#[derive(Args)]
struct PolicyArgs {
    /// Keep tone marks
    #[arg(long)]
    keep_tone: bool,
    /// Keep the dot below (ẹ ọ ṣ)
    #[arg(long)]
    keep_underdot: bool,
    /// Also strip tags and wiki links
    #[arg(long)]
    strip_markup: bool,
}

impl PolicyArgs {
    fn policy(&self) -> NormalizationPolicy {
        NormalizationPolicy {
            strip_tone: !self.keep_tone,
            strip_underdot: !self.keep_underdot,
            strip_markup: self.strip_markup,
        }
    }
}

#[derive(Args)]
struct CleanArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Minimum fraction of Yorùbá-looking tokens per line
    #[arg(long, default_value_t = yorvec::corpus::DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
}

/// Training flags; each overrides the matching config key.
#[derive(Args)]
struct TrainFlags {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr_start: Option<f64>,
    #[arg(long)]
    lr_end: Option<f64>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long)]
    min_n: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    lowercase: bool,
    /// Any other config key, as key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl TrainFlags {
    fn config(&self) -> Result<PipelineConfig, yorvec::Error> {
        let mut config = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        let flags: [(&str, Option<String>); 14] = [
            ("mode", self.mode.clone()),
            ("dim", self.dim.map(|v| v.to_string())),
            ("window", self.window.map(|v| v.to_string())),
            ("negatives", self.negatives.map(|v| v.to_string())),
            ("epochs", self.epochs.map(|v| v.to_string())),
            ("lr_start", self.lr_start.map(|v| v.to_string())),
            ("lr_end", self.lr_end.map(|v| v.to_string())),
            ("subsample", self.subsample.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("workers", self.workers.map(|v| v.to_string())),
            ("min_count", self.min_count.map(|v| v.to_string())),
            ("buckets", self.buckets.map(|v| v.to_string())),
            ("min_n", self.min_n.map(|v| v.to_string())),
            ("max_n", self.max_n.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        if self.lowercase {
            config.lowercase = true;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| yorvec::Error::Config(format!("--set {kv:?}: expected KEY=VALUE")))?;
            config.set(k.trim(), v.trim())?;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Tokenizable text, one sentence or paragraph per line
    corpus: PathBuf,
    /// Vectors in word2vec text format
    #[arg(short, long)]
    output: PathBuf,
    /// N-gram bucket file for subword models [default: OUTPUT with extension .ngrams]
    #[arg(long)]
    ngrams: Option<PathBuf>,
    /// Also write the vocabulary as token<TAB>count
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    #[command(flatten)]
    flags: TrainFlags,
}

#[derive(Args)]
struct ModelArgs {
    /// Vectors in word2vec text format
    model: PathBuf,
    /// N-gram bucket file [default: MODEL with extension .ngrams, if present]
    #[arg(long)]
    ngrams: Option<PathBuf>,
}

impl ModelArgs {
    fn load(&self) -> Result<WordEmbeddings, yorvec::Error> {
        let sibling = self.model.with_extension("ngrams");
        let ngrams = self.ngrams.clone().or_else(|| sibling.exists().then_some(sibling));
        log::info!("loading {}", self.model.display());
        Ok(WordEmbeddings::load(&self.model, ngrams.as_deref())?)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    analogy: Option<PathBuf>,
    #[arg(long)]
    wordpairs: Option<PathBuf>,
    /// Only the N most frequent words are candidates
    #[arg(long)]
    restrict_vocab: Option<usize>,
    #[arg(long)]
    case_sensitive: bool,
    /// Normalize the test sets before scoring (for undiacritized models)
    #[arg(long)]
    undiacritize_sets: bool,
    /// Print per-section analogy accuracy
    #[arg(long)]
    sections: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    flags: TrainFlags,
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    report_dir: Option<PathBuf>,
    #[arg(long)]
    model_dir: Option<PathBuf>,
}

#[derive(Args)]
struct NnArgs {
    #[command(flatten)]
    model: ModelArgs,
    word: String,
    #[arg(short, default_value_t = 10)]
    k: usize,
}

#[derive(Args)]
struct ValidateArgs {
    path: PathBuf,
}

#[derive(Args)]
struct DeriveArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
}

enum Failure {
    Lib(yorvec::Error),
    Data(String),
}

impl From<yorvec::Error> for Failure {
    fn from(e: yorvec::Error) -> Self {
        Failure::Lib(e)
    }
}

macro_rules! from_lib {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Lib(e.into())
            }
        }
    )*};
}
from_lib!(
    yorvec::EvalError,
    yorvec::FormatError,
    yorvec::TrainError,
    yorvec::VocabError,
    yorvec::ModelError
);

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, yorvec::Error> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| yorvec::Error::io(path.display().to_string(), e))
}

fn cmd_clean(args: &CleanArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(yorvec::Error::Config(format!("threshold {} outside [0, 1]", args.threshold)).into());
    }
    let raw = pipeline::read_lines(&args.input)?;
    let (kept, stats) = pipeline::clean_lines(&raw, &LanguageProfile::yoruba(args.threshold))?;
    pipeline::write_lines(&args.output, &kept)?;
    print!("{stats}");
    Ok(())
}

fn cmd_normalize(args: &NormalizeArgs) -> Result<(), Failure> {
    let policy = args.policy.policy();
    let input: Box<dyn BufRead> = match &args.input {
        Some(p) => Box::new(io::BufReader::new(
            fs::File::open(p).map_err(|e| yorvec::Error::io(p.display().to_string(), e))?,
        )),
        None => Box::new(io::stdin().lock()),
    };
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let name = args
        .input
        .as_ref()
        .map_or_else(|| "<stdin>".to_owned(), |p| p.display().to_string());
    normalize_stream(input, &mut out, &policy, &name)?;
    out.flush()?;
    Ok(())
}

/// Copy lines through the normalizer, keeping line terminators as they are.
fn normalize_stream(mut input: impl BufRead, out: &mut impl Write, policy: &NormalizationPolicy, name: &str) -> Result<(), Failure> {
    let mut buf = Vec::new();
    let mut line = 0;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        line += 1;
        let text = std::str::from_utf8(&buf).map_err(|_| yorvec::Error::Encoding {
            path: name.to_owned(),
            line,
        })?;
        out.write_all(normalize_str(text, policy).as_bytes())?;
    }
}

fn cmd_train(args: &TrainArgs) -> Result<(), Failure> {
    let config = args.flags.config()?;
    config.train.validate()?;
    let lines = pipeline::read_lines(&args.corpus)?;
    let sentences = yorvec::corpus::sentences(&lines, config.lowercase);
    let vocab = Vocabulary::from_counts(count_tokens(&sentences), config.train.min_count)?;
    log::info!("vocabulary: {} words (min_count {})", vocab.len(), config.train.min_count);
    if let Some(p) = &args.vocab_out {
        let mut w = create(p)?;
        vocab.write_to(&mut w)?;
        w.flush()?;
    }
    let corpus = IndexedCorpus::new(&sentences, &vocab);
    let out = sgns::train(&corpus, &vocab, &config.train)?;
    for (epoch, loss) in out.epoch_losses.iter().enumerate() {
        log::info!("epoch {}: mean loss {loss:.5}", epoch + 1);
    }
    let ngrams = args.ngrams.clone().unwrap_or_else(|| args.output.with_extension("ngrams"));
    pipeline::save_model(&out.model.to_embeddings(), &args.output, &ngrams)?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Failure> {
    if args.analogy.is_none() && args.wordpairs.is_none() {
        return Err(yorvec::Error::Config("give --analogy and/or --wordpairs".into()).into());
    }
    let policy = NormalizationPolicy::undiacritize();
    let mut analogy = args.analogy.as_deref().map(AnalogySet::load).transpose()?;
    let mut wordpairs = args.wordpairs.as_deref().map(WordPairSet::load).transpose()?;
    if args.undiacritize_sets {
        analogy = analogy.map(|s| eval::derive_undiacritized_set(&s, &policy).set);
        wordpairs = wordpairs.map(|s| s.normalized(&policy).0);
    }
    let emb = args.model.load()?;
    let opts = eval::AnalogyOptions {
        restrict_vocab: args.restrict_vocab,
        case_insensitive: !args.case_sensitive,
    };
    let report = eval::evaluate(&emb, analogy.as_ref(), wordpairs.as_ref(), &opts)?;
    if args.sections {
        print!("{}", report.to_key_values(None));
    } else {
        for (k, v) in report.metrics() {
            if !k.starts_with("analogy_pct.") {
                println!("{k}: {v}");
            }
        }
    }
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let mut config = args.flags.config()?;
    if let Some(p) = &args.raw {
        config.raw = Some(p.clone());
    }
    if let Some(r) = args.repeats {
        config.repeats = r;
    }
    if let Some(p) = &args.report_dir {
        config.report_dir = Some(p.clone());
    }
    if let Some(p) = &args.model_dir {
        config.model_dir = Some(p.clone());
    }
    let report = pipeline::run_pipeline(&config)?;
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_nn(args: &NnArgs) -> Result<(), Failure> {
    let emb = args.model.load()?;
    let neighbors = eval::nearest_neighbors(&emb, &args.word, args.k)?;
    println!("{}", args.word);
    for (rank, (word, cos)) in neighbors.iter().enumerate() {
        println!("{:>3}  {word}  {cos:.4}", rank + 1);
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let violations = eval::validate_set(&args.path)?;
    if violations.is_empty() {
        println!("{}: ok", args.path.display());
        return Ok(());
    }
    for v in &violations {
        println!("{}:{v}", args.path.display());
    }
    Err(Failure::Data(format!("{} problem(s) found", violations.len())))
}

fn cmd_derive(args: &DeriveArgs) -> Result<(), Failure> {
    let set = AnalogySet::load(&args.input)?;
    let derived = eval::derive_undiacritized_set(&set, &args.policy.policy());
    fs::write(&args.output, derived.set.to_text()).map_err(|e| yorvec::Error::io(args.output.display().to_string(), e))?;
    println!("quadruples: {}", derived.set.len());
    println!("degenerate_dropped: {}", derived.degenerate_dropped);
    println!("duplicates_dropped: {}", derived.duplicates_dropped);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Clean(a) => cmd_clean(a),
        Command::Normalize(a) => cmd_normalize(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Nn(a) => cmd_nn(a),
        Command::ValidateSet(a) => cmd_validate(a),
        Command::DeriveSet(a) => cmd_derive(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numeric => 3,
            })
        }
    }
}
