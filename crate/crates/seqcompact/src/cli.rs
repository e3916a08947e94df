//! The `seqcompact` command line.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};
use seqcompact_core::compaction::CompactionWarning;
use seqcompact_core::evaluation::Profiler;
use seqcompact_core::rational::{self, to_f64};
use seqcompact_core::{
    compact, gen_synthetic, pruned_mass, similarity, sweep, window_eval, Alphabet, AvgMode, Background,
    CompactionParams, EvalParams, FeatureSet, FeatureSource, Format, MatchBase, Rational,
    SimilarityReport, SuffixIndex, SweepGrid, SynthSpec, TrainingStats,
};

use crate::error::{AppError, EXIT_USAGE};
use crate::io::{load_manifest, load_tests, load_training, read_file, resolve_out, write_atomic, write_fasta, TestSeq};
use crate::persist::{self, PersistedTree};
use crate::report::{self, config_line, write_json_line, EvalContext, EvalRecord, TestRecord};

/// Default cap on context length when neither `--lmax` nor `--bigN` says otherwise.
pub const DEFAULT_LMAX: usize = 64;

#[derive(Parser, Debug)]
#[command(
    name = "seqcompact",
    version,
    about = "Frequency-pruned suffix-tree compaction and similarity classification of sequences"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Worker threads for scoring and evaluation (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Input format; detected from the first byte when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// How match lengths are averaged.
    #[arg(long, global = true, value_enum, default_value_t = AvgArg::Matched)]
    pub avg_mode: AvgArg,
    /// Generator seed; echoed into every output.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for artifacts written without `-o`.
    #[arg(long, global = true, env = "SEQCOMPACT_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// No human-readable summary on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Fasta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AvgArg {
    Matched,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TreeFormat {
    Text,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackgroundArg {
    Uniform,
    Mixing,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Index a training sequence.
    Build(BuildArgs),
    /// Prune an index to the contexts with empirical probability at least ε/(N·f).
    Compact(CompactArgs),
    /// Score test sequences (JSON lines).
    Score(ScoreArgs),
    /// Score and decide acceptability against the threshold.
    Filter(FilterArgs),
    /// Rank test sequences by similarity, most similar first.
    Sort(ScoreArgs),
    /// Compare full and compacted classifiers over all windows of Y.
    Eval(EvalArgs),
    /// Generate a synthetic training sequence with planted features.
    Gen(GenArgs),
    /// Evaluate a grid of ε, f, N and T values (CSV).
    Sweep(SweepArgs),
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s)?;
    if rational::is_positive(&r) {
        Ok(r)
    } else {
        Err("must be positive".into())
    }
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Training sequence (plain text or single-record FASTA).
    pub training: PathBuf,
    /// Longest context indexed [default: min(N-1, 64), capped at N'-1].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lmax: Option<u64>,
    /// Test length N, used only for the default L_max.
    #[arg(long = "bigN", value_parser = clap::value_parser!(u64).range(1..))]
    pub big_n: Option<u64>,
    /// Alphabet symbols in code order [default: inferred, sorted].
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Output index path [default: <out-dir>/<stem>.sqidx].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompactArgs {
    /// Persisted index to prune.
    #[arg(long)]
    pub index: PathBuf,
    /// Error tolerance ε, as a fraction or decimal.
    #[arg(long, value_parser = parse_positive)]
    pub epsilon: Rational,
    /// Test length N.
    #[arg(long = "bigN", value_parser = clap::value_parser!(u64).range(1..))]
    pub big_n: u64,
    /// Feature budget f [default: alphabet size].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub features_budget: Option<u64>,
    /// On-disk tree encoding.
    #[arg(long, value_enum, default_value_t = TreeFormat::Text)]
    pub tree_format: TreeFormat,
    /// Output tree path [default: <out-dir>/<index stem>.tree].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Where the classifier's knowledge of `Y` comes from.
#[derive(Args, Debug)]
pub struct BaseArgs {
    /// Persisted index (universal mode, every substring of Y).
    #[arg(long, conflicts_with_all = ["tree", "features"])]
    pub index: Option<PathBuf>,
    /// Persisted compacted tree.
    #[arg(long, conflicts_with_all = ["features", "training"])]
    pub tree: Option<PathBuf>,
    /// Feature manifest (one feature per line, context order); needs --training.
    #[arg(long, requires = "training")]
    pub features: Option<PathBuf>,
    /// Training sequence; indexed in memory unless --features is given.
    #[arg(long, conflicts_with = "index")]
    pub training: Option<PathBuf>,
    /// Context cap when indexing --training in memory.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lmax: Option<u64>,
    /// Alphabet symbols in code order [default: inferred from the training data].
    #[arg(long)]
    pub alphabet: Option<String>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub base: BaseArgs,
    /// Test sequences (plain text or multi-record FASTA).
    pub tests: PathBuf,
    /// Decision threshold T; acceptable when D > T.
    #[arg(long, default_value = "0", value_parser = parse_rational, allow_hyphen_values = true)]
    pub threshold: Rational,
    /// JSON-lines output [default: stdout].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    #[command(flatten)]
    pub score: ScoreArgs,
    /// Also write the acceptable tests as FASTA here.
    #[arg(long)]
    pub accepted: Option<PathBuf>,
}

/// Training data for whole-sequence evaluation.
#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Persisted index.
    #[arg(long, conflicts_with = "training")]
    pub index: Option<PathBuf>,
    /// Training sequence, indexed in memory.
    #[arg(long)]
    pub training: Option<PathBuf>,
    /// Context cap when indexing --training.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lmax: Option<u64>,
    /// Alphabet symbols in code order.
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Feature mode: compare this feature set against its compaction-retained subset.
    #[arg(long)]
    pub features: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Error tolerance ε.
    #[arg(long, value_parser = parse_positive)]
    pub epsilon: Rational,
    /// Window length N.
    #[arg(long = "bigN", value_parser = clap::value_parser!(u64).range(1..))]
    pub big_n: u64,
    /// Feature budget f [default: alphabet size].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub features_budget: Option<u64>,
    /// Decision threshold T.
    #[arg(long, default_value = "0", value_parser = parse_rational, allow_hyphen_values = true)]
    pub threshold: Rational,
    /// Dump every flipped window as JSON lines here.
    #[arg(long)]
    pub flips: Option<PathBuf>,
    /// JSON-lines report [default: stdout].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Length N' of the generated sequence.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Alphabet size A.
    #[arg(long, default_value_t = 4)]
    pub alphabet_size: usize,
    /// Explicit features in context order, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "feature_count")]
    pub features: Option<Vec<String>>,
    /// Number of random prefix-free features.
    #[arg(long, default_value_t = 4)]
    pub feature_count: usize,
    /// Shortest random feature.
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    /// Longest random feature.
    #[arg(long, default_value_t = 14)]
    pub max_len: usize,
    /// Relative planting weights, one per feature, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<u32>>,
    /// Fraction of the sequence covered by planted copies.
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    pub density: Rational,
    /// Background process between planted copies.
    #[arg(long, value_enum, default_value_t = BackgroundArg::Uniform)]
    pub background: BackgroundArg,
    /// Copied block length for the mixing background.
    #[arg(long, default_value_t = 50)]
    pub block_len: usize,
    /// Per-step copy probability for the mixing background.
    #[arg(long, default_value = "1/20", value_parser = parse_rational)]
    pub copy_prob: Rational,
    /// Output prefix; writes <prefix>.fasta and <prefix>.features.tsv
    /// [default: <out-dir>/synthetic-<seed>].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Error tolerances ε, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_positive)]
    pub epsilon: Vec<Rational>,
    /// Window lengths N, comma separated.
    #[arg(long = "bigN", value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub big_n: Vec<u64>,
    /// Feature budgets f [default: alphabet size].
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub features_budget: Vec<u64>,
    /// Thresholds T, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = parse_rational, allow_hyphen_values = true)]
    pub threshold: Vec<Rational>,
    /// JSON-lines detail stream, one record per cell.
    #[arg(long)]
    pub detail: Option<PathBuf>,
    /// CSV output [default: stdout].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

impl Global {
    fn format(&self) -> Option<Format> {
        self.format.map(|f| match f {
            FormatArg::Plain => Format::Plain,
            FormatArg::Fasta => Format::Fasta,
        })
    }

    fn avg(&self) -> AvgMode {
        match self.avg_mode {
            AvgArg::Matched => AvgMode::Matched,
            AvgArg::All => AvgMode::All,
        }
    }

    fn avg_name(&self) -> &'static str {
        match self.avg_mode {
            AvgArg::Matched => "matched",
            AvgArg::All => "all",
        }
    }

    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn config(&self, command: &str, body: Value) -> Value {
        json!({
            "tool": "seqcompact",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "avg_mode": self.avg_name(),
            "format": self.format.map(|f| format!("{f:?}").to_lowercase()),
            "seed": self.seed,
            "params": body,
        })
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn parse_alphabet(s: Option<&String>) -> Result<Option<Alphabet>, AppError> {
    s.map(|s| Alphabet::new(s.as_bytes()).map_err(|e| AppError::Usage(format!("--alphabet: {e}"))))
        .transpose()
}

/// `--lmax` if given, else `min(N - 1, 64)`, clamped below `N'`.
pub fn resolve_lmax(lmax: Option<u64>, big_n: Option<u64>, n_prime: usize) -> Result<usize, AppError> {
    match lmax {
        Some(l) => Ok(usize::try_from(l).unwrap_or(usize::MAX)),
        None => {
            let by_n = big_n.map_or(DEFAULT_LMAX, |n| (n.saturating_sub(1) as usize).clamp(1, DEFAULT_LMAX));
            if n_prime < 2 {
                return Err(AppError::Invariant("training sequence needs at least 2 symbols".into()));
            }
            Ok(by_n.min(n_prime - 1))
        }
    }
}

fn load_index(path: &Path, expected: Option<&Alphabet>) -> Result<SuffixIndex, AppError> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut r = io::BufReader::with_capacity(1 << 20, file);
    persist::read_index(&mut r, expected).map(|(idx, _)| idx).map_err(|e| AppError::persist(path, e))
}

fn build_in_memory(
    training: &Path,
    lmax: Option<u64>,
    big_n: Option<u64>,
    alphabet: Option<&Alphabet>,
    g: &Global,
) -> Result<SuffixIndex, AppError> {
    let (y, a) = load_training(training, g.format(), alphabet)?;
    let l_max = resolve_lmax(lmax, big_n, y.len())?;
    SuffixIndex::build(&y, &a, l_max).map_err(|e| AppError::data_in(training, e))
}

/// Writes machine output to `out`, or stdout when absent.
fn emit<F>(out: Option<&Path>, body: F) -> Result<(), AppError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => write_atomic(path, |w| body(w).map_err(|e| AppError::io(path, e))),
        None => {
            let stdout = io::stdout();
            let mut lock = io::BufWriter::new(stdout.lock());
            body(&mut lock).and_then(|_| lock.flush()).map_err(|e| AppError::io(Path::new("<stdout>"), e))
        }
    }
}

fn cmd_build(a: BuildArgs, g: &Global) -> Result<(), AppError> {
    let alphabet = parse_alphabet(a.alphabet.as_ref())?;
    let out = resolve_out(
        a.out,
        g.out_dir.as_deref(),
        &format!("{}.sqidx", a.training.file_stem().unwrap_or_default().to_string_lossy()),
    );
    let start = Instant::now();
    let (y, alpha) = load_training(&a.training, g.format(), alphabet.as_ref())?;
    let l_max = resolve_lmax(a.lmax, a.big_n, y.len())?;
    let index = SuffixIndex::build(&y, &alpha, l_max).map_err(|e| AppError::data_in(&a.training, e))?;
    let built = start.elapsed();
    let config = g.config(
        "build",
        json!({ "training": path_str(&a.training), "lmax": l_max, "bigN": a.big_n, "alphabet": a.alphabet }),
    );
    write_atomic(&out, |w| persist::write_index(w, &index, &config.to_string()).map_err(|e| AppError::io(&out, e)))?;
    let symbols = String::from_utf8_lossy(alpha.symbols()).into_owned();
    g.note(format!(
        "indexed N'={} alphabet={} ({} symbols) L_max={} in {:.2?} -> {}",
        index.n_prime(),
        symbols,
        alpha.len(),
        l_max,
        built,
        out.display()
    ));
    emit(None, |w| {
        write_json_line(
            w,
            &json!({ "index": path_str(&out), "n_prime": index.n_prime(), "alphabet": symbols, "l_max": l_max }),
        )
    })
}

/// Match statistics of `y` against `base`: (sum, matched positions, length).
fn y_stats<B: MatchBase + ?Sized>(base: &B, y: &[u8]) -> (u64, u64, u64) {
    let p = Profiler::new(base, y);
    let g = p.global();
    (g.iter().map(|&l| u64::from(l)).sum(), g.iter().filter(|&&l| l > 0).count() as u64, y.len() as u64)
}

fn cmd_compact(a: CompactArgs, g: &Global) -> Result<(), AppError> {
    let index = load_index(&a.index, None)?;
    let f = a.features_budget.unwrap_or(index.alphabet().len() as u64);
    let params = CompactionParams::new(a.epsilon, a.big_n, f)?;
    let tree = compact(&index, params);
    match tree.warning() {
        Some(CompactionWarning::ThresholdAboveOne) => {
            eprintln!("warning: threshold ε/(N·f) exceeds 1; the tree is empty")
        }
        Some(CompactionWarning::EmptyTree) => eprintln!("warning: no context reaches the threshold; the tree is empty"),
        None => {}
    }
    let standalone = tree.to_standalone();
    let y = index.training_sequence();
    let stats = y_stats(&tree, &y);
    let leaf_count = standalone.leaf_count();
    let bound = params.leaf_bound();
    if leaf_count > bound {
        return Err(AppError::Invariant(format!("leaf count {leaf_count} exceeds the bound {bound}")));
    }
    let ext = match a.tree_format {
        TreeFormat::Text => "tree",
        TreeFormat::Binary => "treeb",
    };
    let out = resolve_out(
        a.out,
        g.out_dir.as_deref(),
        &format!("{}.{ext}", a.index.file_stem().unwrap_or_default().to_string_lossy()),
    );
    let config = g.config(
        "compact",
        json!({ "index": path_str(&a.index), "epsilon": a.epsilon.to_string(), "bigN": a.big_n, "f": f }),
    );
    let persisted = PersistedTree { tree: standalone, y_stats: stats, config: config.to_string() };
    write_atomic(&out, |w| {
        match a.tree_format {
            TreeFormat::Text => persist::write_tree_text(w, &persisted),
            TreeFormat::Binary => persist::write_tree_binary(w, &persisted),
        }
        .map_err(|e| AppError::io(&out, e))
    })?;
    g.note(format!(
        "leaf_count={leaf_count} bound=ceil(N*f/eps)={bound} min_count={} retained={} -> {}",
        tree.min_count(),
        persisted.tree.retained_count(),
        out.display()
    ));
    emit(None, |w| {
        write_json_line(
            w,
            &json!({
                "tree": path_str(&out),
                "leaf_count": leaf_count,
                "leaf_bound": bound,
                "min_count": tree.min_count(),
                "retained_count": persisted.tree.retained_count(),
                "empty": tree.is_empty(),
            }),
        )
    })
}

/// A loaded classification base.
pub enum Loaded {
    Index { index: SuffixIndex, y: Vec<u8> },
    Tree(PersistedTree),
    Features { features: FeatureSet, y: Vec<u8>, alphabet: Alphabet },
}

impl Loaded {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Loaded::Index { index, .. } => index.alphabet(),
            Loaded::Tree(t) => t.tree.alphabet(),
            Loaded::Features { alphabet, .. } => alphabet,
        }
    }

    pub fn base(&self) -> &dyn MatchBase {
        match self {
            Loaded::Index { index, .. } => index,
            Loaded::Tree(t) => &t.tree,
            Loaded::Features { features, .. } => features,
        }
    }

    pub fn stats(&self, mode: AvgMode) -> Result<TrainingStats, AppError> {
        let r = match self {
            Loaded::Index { index, y } => Profiler::new(index, y).training_stats(mode),
            Loaded::Tree(t) => t.training_stats(mode),
            Loaded::Features { features, y, .. } => Profiler::new(features, y).training_stats(mode),
        };
        r.map_err(|e| AppError::Data { context: "training statistics: ".into(), source: e })
    }
}

fn load_base(b: &BaseArgs, g: &Global) -> Result<(Loaded, Value), AppError> {
    let alphabet = parse_alphabet(b.alphabet.as_ref())?;
    let desc = json!({
        "index": b.index.as_deref().map(path_str),
        "tree": b.tree.as_deref().map(path_str),
        "features": b.features.as_deref().map(path_str),
        "training": b.training.as_deref().map(path_str),
        "lmax": b.lmax,
        "alphabet": b.alphabet,
    });
    let loaded = if let Some(p) = &b.index {
        let index = load_index(p, alphabet.as_ref())?;
        let y = index.training_sequence().into_codes();
        Loaded::Index { index, y }
    } else if let Some(p) = &b.tree {
        let bytes = read_file(p)?;
        Loaded::Tree(persist::read_tree(&bytes, alphabet.as_ref()).map_err(|e| AppError::persist(p, e))?)
    } else if let Some(t) = &b.training {
        match &b.features {
            Some(fp) => {
                let (y, a) = load_training(t, g.format(), alphabet.as_ref())?;
                let features = load_manifest(fp, &a)?;
                Loaded::Features { features, y: y.into_codes(), alphabet: a }
            }
            None => {
                let index = build_in_memory(t, b.lmax, None, alphabet.as_ref(), g)?;
                let y = index.training_sequence().into_codes();
                Loaded::Index { index, y }
            }
        }
    } else {
        return Err(AppError::Usage("one of --index, --tree, or --training is required".into()));
    };
    Ok((loaded, desc))
}

fn score_all(base: &dyn MatchBase, stats: &TrainingStats, tests: &[TestSeq], t: Rational) -> Vec<SimilarityReport> {
    tests.par_iter().map(|x| similarity(base, stats, &x.codes, t)).collect()
}

fn table(g: &Global, rows: &[TestRecord]) {
    if g.quiet {
        return;
    }
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).clamp(4, 40);
    eprintln!("{:>4}  {:<width$}  {:>9}  {:>9}  {:>9}  decision", "rank", "name", "L(X|Y)", "L(Y)", "D");
    for (k, r) in rows.iter().enumerate() {
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        eprintln!(
            "{:>4}  {:<width$}  {:>9}  {:>9.4}  {:>9}  {}{}",
            r.rank.unwrap_or(k + 1),
            r.name,
            num(r.l_x_given_y),
            r.l_y,
            num(r.d),
            r.decision,
            if r.flags.is_empty() { String::new() } else { format!(" [{}]", r.flags.join(",")) }
        );
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ScoreKind {
    Score,
    Filter,
    Sort,
}

fn run_scoring(a: &ScoreArgs, g: &Global, kind: ScoreKind) -> Result<(Vec<TestSeq>, Vec<TestRecord>), AppError> {
    let (loaded, desc) = load_base(&a.base, g)?;
    let stats = loaded.stats(g.avg())?;
    let tests = load_tests(&a.tests, g.format(), loaded.alphabet())?;
    let reports = score_all(loaded.base(), &stats, &tests, a.threshold);
    let mut order: Vec<usize> = (0..tests.len()).collect();
    if kind == ScoreKind::Sort {
        // descending D, stable, unscored last
        order.sort_by(|&i, &j| match (reports[i].d, reports[j].d) {
            (Some(x), Some(y)) => y.cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
    }
    let records: Vec<TestRecord> = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let rank = (kind == ScoreKind::Sort).then_some(rank + 1);
            TestRecord::new(&tests[i].name, &reports[i], tests[i].unknown, rank)
        })
        .collect();
    let name = match kind {
        ScoreKind::Score => "score",
        ScoreKind::Filter => "filter",
        ScoreKind::Sort => "sort",
    };
    let config = g.config(
        name,
        json!({ "base": desc, "tests": path_str(&a.tests), "T": a.threshold.to_string() }),
    );
    emit(a.out.as_deref(), |w| {
        write_json_line(w, &config_line(&config))?;
        records.iter().try_for_each(|r| write_json_line(w, r))
    })?;
    table(g, &records);
    Ok((tests, records))
}

fn cmd_filter(a: FilterArgs, g: &Global) -> Result<(), AppError> {
    let (tests, records) = run_scoring(&a.score, g, ScoreKind::Filter)?;
    let accepted = records.iter().filter(|r| r.decision == "acceptable").count();
    g.note(format!("{accepted} of {} tests acceptable at T={}", records.len(), a.score.threshold));
    if let Some(path) = &a.accepted {
        write_atomic(path, |w| {
            for (t, r) in tests.iter().zip(&records) {
                if r.decision == "acceptable" {
                    write_fasta(w, &t.name, &t.symbols).map_err(|e| AppError::io(path, e))?;
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn load_train(t: &TrainArgs, big_n: Option<u64>, g: &Global) -> Result<(SuffixIndex, Value), AppError> {
    let alphabet = parse_alphabet(t.alphabet.as_ref())?;
    let index = match (&t.index, &t.training) {
        (Some(p), _) => load_index(p, alphabet.as_ref())?,
        (None, Some(p)) => build_in_memory(p, t.lmax, big_n, alphabet.as_ref(), g)?,
        (None, None) => return Err(AppError::Usage("one of --index or --training is required".into())),
    };
    let desc = json!({
        "index": t.index.as_deref().map(path_str),
        "training": t.training.as_deref().map(path_str),
        "lmax": index.l_max(),
        "alphabet": String::from_utf8_lossy(index.alphabet().symbols()),
        "features": t.features.as_deref().map(path_str),
    });
    Ok((index, desc))
}

fn load_features_for(t: &TrainArgs, index: &SuffixIndex) -> Result<Option<FeatureSet>, AppError> {
    let Some(p) = &t.features else { return Ok(None) };
    let fs = load_manifest(p, index.alphabet())?;
    if fs.l_max() > index.l_max() {
        return Err(AppError::Usage(format!(
            "features up to length {} need an index with L_max >= {} (have {})",
            fs.l_max(),
            fs.l_max(),
            index.l_max()
        )));
    }
    Ok(Some(fs))
}

fn cmd_eval(a: EvalArgs, g: &Global) -> Result<bool, AppError> {
    let (index, desc) = load_train(&a.train, Some(a.big_n), g)?;
    let features = load_features_for(&a.train, &index)?;
    let f = a.features_budget.unwrap_or_else(|| match &features {
        Some(fs) => fs.len() as u64,
        None => index.alphabet().len() as u64,
    });
    let params = CompactionParams::new(a.epsilon, a.big_n, f)?;
    let tree = compact(&index, params);
    let y = index.training_sequence();
    let ep = EvalParams { compaction: params, threshold: a.threshold, avg_mode: g.avg() };
    let n = usize::try_from(a.big_n).unwrap_or(usize::MAX);
    let (report, mass, mode) = match &features {
        Some(fs) => {
            let kept = fs.restricted(|w| tree.contains(w));
            g.note(format!("feature mode: {} of {} features retained", kept.len(), fs.len()));
            (window_eval(fs, &kept, &y, &ep)?, pruned_mass(fs, &kept, &y, n)?, "features")
        }
        None => (window_eval(&index, &tree, &y, &ep)?, pruned_mass(&index, &tree, &y, n)?, "index"),
    };
    let ctx = EvalContext {
        mode,
        n: a.big_n,
        f,
        t: a.threshold,
        leaf_count: tree.leaf_count(),
        leaf_bound: params.leaf_bound(),
        min_count: tree.min_count(),
        pruned_mass: Some(mass),
        seed: g.seed,
    };
    let record = EvalRecord::new(&report, &ctx);
    let config = g.config(
        "eval",
        json!({ "train": desc, "epsilon": a.epsilon.to_string(), "bigN": a.big_n, "f": f, "T": a.threshold.to_string() }),
    );
    emit(a.out.as_deref(), |w| {
        write_json_line(w, &config_line(&config))?;
        write_json_line(w, &record)
    })?;
    if let Some(path) = &a.flips {
        write_atomic(path, |w| {
            write_json_line(w, &config_line(&config))
                .and_then(|_| report::flip_records(&report).iter().try_for_each(|r| write_json_line(w, r)))
                .map_err(|e| AppError::io(path, e))
        })?;
    }
    g.note(format!(
        "windows={} q={:.6} p_delta={:.6} bound={} pruned_mass={:.6} leaves={}/{} {}{}",
        report.windows,
        to_f64(&report.q),
        to_f64(&report.p_delta),
        report.bound.map_or("-".into(), |b| format!("{:.6}", to_f64(&b))),
        to_f64(&mass),
        tree.leaf_count(),
        params.leaf_bound(),
        if report.pass { "PASS" } else { "FAIL" },
        if report.vacuous { " (vacuous: q = 0)" } else { "" }
    ));
    Ok(report.pass)
}

fn cmd_gen(a: GenArgs, g: &Global) -> Result<(), AppError> {
    let seed = g.seed.unwrap_or(0);
    let alphabet = Alphabet::synthetic(a.alphabet_size).map_err(|e| AppError::Usage(format!("--alphabet-size: {e}")))?;
    let source = match &a.features {
        Some(list) => FeatureSource::Explicit(
            list.iter()
                .map(|s| alphabet.encode(s.as_bytes()))
                .collect::<Result<_, _>>()
                .map_err(|e| AppError::Usage(format!("--features: {e}")))?,
        ),
        None => FeatureSource::Random { count: a.feature_count, min_len: a.min_len, max_len: a.max_len },
    };
    let background = match a.background {
        BackgroundArg::Uniform => Background::Uniform,
        BackgroundArg::Mixing => {
            let num = u32::try_from(*a.copy_prob.numer()).ok();
            let den = u32::try_from(*a.copy_prob.denom()).ok();
            match (num, den) {
                (Some(copy_num), Some(copy_den)) => Background::Mixing { block_len: a.block_len, copy_num, copy_den },
                _ => return Err(AppError::Usage("--copy-prob must be a fraction in [0, 1]".into())),
            }
        }
    };
    let spec = SynthSpec {
        alphabet_size: a.alphabet_size,
        length: usize::try_from(a.length).map_err(|_| AppError::Usage("--length too large".into()))?,
        features: source,
        weights: a.weights.clone(),
        density: a.density,
        background,
        seed,
    };
    let synth = gen_synthetic(&spec)?;
    let prefix = resolve_out(a.out, g.out_dir.as_deref(), &format!("synthetic-{seed}"));
    let fasta = prefix.with_extension("fasta");
    let manifest = prefix.with_extension("features.tsv");
    let config = g.config(
        "gen",
        json!({
            "length": a.length,
            "alphabet_size": a.alphabet_size,
            "features": a.features,
            "feature_count": a.feature_count,
            "min_len": a.min_len,
            "max_len": a.max_len,
            "weights": a.weights,
            "density": a.density.to_string(),
            "background": format!("{:?}", a.background).to_lowercase(),
            "block_len": a.block_len,
            "copy_prob": a.copy_prob.to_string(),
            "seed": seed,
        }),
    );
    let symbols = synth.sequence.to_plain(&synth.alphabet);
    write_atomic(&fasta, |w| {
        write_fasta(w, &format!("synthetic seed={seed} config={config}"), &symbols).map_err(|e| AppError::io(&fasta, e))
    })?;
    write_atomic(&manifest, |w| {
        (|| -> io::Result<()> {
            writeln!(w, "# config {config}")?;
            writeln!(w, "# feature\tlength\tplanted")?;
            for (f, copies) in &synth.planted {
                w.write_all(&synth.alphabet.decode(f))?;
                writeln!(w, "\t{}\t{copies}", f.len())?;
            }
            Ok(())
        })()
        .map_err(|e| AppError::io(&manifest, e))
    })?;
    let planted: Vec<u64> = synth.planted.iter().map(|p| p.1).collect();
    g.note(format!("generated N'={} seed={seed} planted={planted:?} -> {}", a.length, fasta.display()));
    emit(None, |w| {
        write_json_line(
            w,
            &json!({ "fasta": path_str(&fasta), "features": path_str(&manifest), "seed": seed, "planted": planted }),
        )
    })
}

fn cmd_sweep(a: SweepArgs, g: &Global) -> Result<bool, AppError> {
    let max_n = a.big_n.iter().copied().max();
    let (index, desc) = load_train(&a.train, max_n, g)?;
    let features = load_features_for(&a.train, &index)?;
    let fs_budget = if a.features_budget.is_empty() {
        vec![features.as_ref().map_or(index.alphabet().len() as u64, |f| f.len() as u64)]
    } else {
        a.features_budget.clone()
    };
    let grid = SweepGrid { epsilons: a.epsilon.clone(), fs: fs_budget.clone(), ns: a.big_n.clone(), thresholds: a.threshold.clone() };
    let rows = sweep(&index, features.as_ref(), &grid, g.avg())?;
    let config = g.config(
        "sweep",
        json!({
            "train": desc,
            "epsilon": a.epsilon.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "f": fs_budget,
            "bigN": a.big_n,
            "T": a.threshold.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        }),
    );
    emit(a.out.as_deref(), |w| report::write_sweep_csv(w, &config, &rows, g.seed))?;
    let mode = if features.is_some() { "features" } else { "index" };
    if let Some(path) = &a.detail {
        write_atomic(path, |w| {
            (|| -> io::Result<()> {
                write_json_line(w, &config_line(&config))?;
                for row in &rows {
                    let value = match &row.result {
                        Ok(r) => serde_json::to_value(EvalRecord::new(
                            r,
                            &EvalContext {
                                mode,
                                n: row.n,
                                f: row.f,
                                t: row.t,
                                leaf_count: row.leaf_count,
                                leaf_bound: row.leaf_bound,
                                min_count: row.min_count,
                                pruned_mass: row.pruned_mass,
                                seed: g.seed,
                            },
                        ))?,
                        Err(e) => json!({
                            "epsilon": row.epsilon.to_string(), "N": row.n, "f": row.f, "T": row.t.to_string(),
                            "error": e.to_string(), "seed": g.seed,
                        }),
                    };
                    write_json_line(w, &value)?;
                }
                Ok(())
            })()
            .map_err(|e| AppError::io(path, e))
        })?;
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    let violations = rows.iter().filter(|r| matches!(&r.result, Ok(rep) if !rep.pass)).count();
    g.note(format!("{} cells, {violations} bound violations, {failed} failed cells", rows.len()));
    Ok(violations == 0)
}

fn dispatch(cli: Cli) -> Result<i32, AppError> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(usize::try_from(n).unwrap_or(usize::MAX))
            .build_global()
            .map_err(|e| AppError::Usage(format!("--threads: {e}")))?;
    }
    let ok = match cli.command {
        Command::Build(a) => cmd_build(a, g).map(|_| true)?,
        Command::Compact(a) => cmd_compact(a, g).map(|_| true)?,
        Command::Score(a) => run_scoring(&a, g, ScoreKind::Score).map(|_| true)?,
        Command::Filter(a) => cmd_filter(a, g).map(|_| true)?,
        Command::Sort(a) => run_scoring(&a, g, ScoreKind::Sort).map(|_| true)?,
        Command::Eval(a) => cmd_eval(a, g)?,
        Command::Gen(a) => cmd_gen(a, g).map(|_| true)?,
        Command::Sweep(a) => cmd_sweep(a, g)?,
    };
    Ok(if ok { 0 } else { crate::error::EXIT_DATA })
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
