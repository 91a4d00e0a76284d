//! Command-line front end: `train`, `classify`, `eval`, `sweep`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
//! violation.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use walkdir::WalkDir;

use rkmssl::corpus::{load_directory_corpus, mask_labels, Document, SplitManifest, SplitSpec};
use rkmssl::eval::{confusion_named, read_predictions_tsv, score};
use rkmssl::harness::{emit_results, run_sweep, LabelRatio, SweepConfig};
use rkmssl::pipeline::{Pipeline, TrainOptions};
use rkmssl::{Distance, Error, GroundTruth, RkmConfig, TokenizerConfig};

#[derive(Parser)]
#[command(
    name = "rkm",
    version,
    about = "Semi-supervised text categorization with recursive K-means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Preprocessing {
    /// Drop common English stopwords.
    #[arg(long)]
    stopwords: bool,
    /// Skip each file's header block (up to the first blank line).
    #[arg(long)]
    strip_headers: bool,
    #[arg(long, default_value_t = 2)]
    min_token_len: usize,
}

impl Preprocessing {
    fn config(&self) -> TokenizerConfig {
        TokenizerConfig {
            lowercase: true,
            remove_stopwords: self.stopwords,
            min_token_len: self.min_token_len,
            strip_headers: self.strip_headers,
        }
    }
}

#[derive(clap::Args)]
struct Clustering {
    /// Relative-percentage threshold for re-clustering impure clusters.
    #[arg(long, default_value_t = 5.0)]
    th: f64,
    #[arg(long, default_value = "euclidean")]
    distance: Distance,
    #[arg(long, default_value_t = 16)]
    max_depth: usize,
    /// Laplace smoothing of the term-class weights.
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
}

impl Clustering {
    fn rkm(&self, seed: u64) -> RkmConfig {
        let mut rkm = RkmConfig {
            th_percent: self.th,
            max_recursion_depth: self.max_depth,
            ..RkmConfig::default()
        };
        rkm.kmeans.distance = self.distance;
        rkm.kmeans.rng_seed = seed;
        rkm
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mask labels on a directory corpus, train, and save the model.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        labeled_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model_out: PathBuf,
        /// Cap on unlabeled documents entering training (default: all).
        #[arg(long)]
        unlabeled_pool: Option<usize>,
        /// Also write the labeled/unlabeled manifest here.
        #[arg(long)]
        manifest_out: Option<PathBuf>,
        #[command(flatten)]
        clustering: Clustering,
        #[command(flatten)]
        preprocessing: Preprocessing,
    },
    /// Label documents with a saved model: `doc_id<TAB>class<TAB>distance`.
    Classify {
        #[arg(long)]
        model: PathBuf,
        /// A single file or a directory searched recursively.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a predictions file against `doc_id<TAB>class` truth (or a corpus directory).
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Label-ratio sweep with repeated trials; writes CSVs and manifests.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated L:U ratios (default 1:49 through 20:30).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<LabelRatio>>,
        /// Let test documents join the unlabeled pool.
        #[arg(long)]
        transductive: bool,
        #[arg(long)]
        unlabeled_pool: Option<usize>,
        #[command(flatten)]
        clustering: Clustering,
        #[command(flatten)]
        preprocessing: Preprocessing,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

#[allow(clippy::too_many_arguments)]
fn train(
    corpus: &Path,
    labeled_frac: f64,
    seed: u64,
    model_out: &Path,
    unlabeled_pool: Option<usize>,
    manifest_out: Option<&Path>,
    clustering: &Clustering,
    preprocessing: &Preprocessing,
) -> Result<(), Error> {
    let tokenizer = preprocessing.config();
    let loaded = load_directory_corpus(corpus, &tokenizer)?;
    let spec = SplitSpec {
        labeled_fraction: labeled_frac,
        unlabeled_pool_size: unlabeled_pool,
        rng_seed: seed,
        ..SplitSpec::default()
    };
    let masked = mask_labels(&loaded.corpus, &spec)?;
    let options = TrainOptions {
        smoothing: clustering.smoothing,
        unlabeled_pool_size: unlabeled_pool,
        seed,
        rkm: clustering.rkm(seed),
    };
    let trained = Pipeline::train(&masked, &tokenizer, &options)?;
    trained.pipeline.save(model_out)?;

    if let Some(path) = manifest_out {
        let no_test = rkmssl::Corpus::new(loaded.corpus.classes().to_vec(), std::iter::empty())?;
        let manifest = SplitManifest::from_split(&loaded.corpus, &no_test, &masked)?;
        let mut out = create(path)?;
        manifest.write(&mut out).map_err(|e| io_error(path, e))?;
    }

    let model = &trained.pipeline.model;
    eprintln!(
        "trained on {} labeled + {} unlabeled documents ({} skipped); {} clusters, {} recursions, {} fallback acceptances",
        masked.labeled.len(),
        trained.training.len() - masked.labeled.len(),
        loaded.warnings(),
        model.len(),
        model.metadata.recursions,
        model.metadata.fallback_acceptances
    );
    Ok(())
}

fn classify(model: &Path, input: &Path, out: &Path) -> Result<(), Error> {
    let pipeline = Pipeline::load(model)?;
    let mut files = Vec::new();
    if input.is_dir() {
        for entry in WalkDir::new(input).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::Io {
                path: input.to_path_buf(),
                source: e.into(),
            })?;
            if entry.file_type().is_file() {
                let id = entry
                    .path()
                    .strip_prefix(input)
                    .expect("walk stays under root")
                    .to_string_lossy()
                    .replace(std::path::MAIN_SEPARATOR, "/");
                files.push((id, entry.into_path()));
            }
        }
    } else if input.is_file() {
        let id = input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        files.push((id, input.to_path_buf()));
    } else {
        return Err(Error::MissingCorpus(input.to_path_buf()));
    }

    let mut w = create(out)?;
    let mut skipped = 0;
    for (id, path) in files {
        let bytes = fs::read(&path).map_err(|e| io_error(&path, e))?;
        let doc = Document::from_text(
            id.as_str(),
            &String::from_utf8_lossy(&bytes),
            &pipeline.tokenizer,
        );
        if doc.tokens.is_empty() {
            skipped += 1;
            continue;
        }
        let vector = rkmssl::embed(&doc, &pipeline.weights)?;
        let nearest = rkmssl::classify(&vector, &pipeline.model)?;
        writeln!(
            w,
            "{}\t{}\t{}",
            id,
            pipeline.model.class_name(nearest.predicted),
            nearest.distance
        )
        .map_err(|e| io_error(out, e))?;
    }
    w.flush().map_err(|e| io_error(out, e))?;
    if skipped > 0 {
        eprintln!("skipped {skipped} document(s) with no tokens");
    }
    Ok(())
}

fn eval(predictions: &Path, truth: &Path) -> Result<(), Error> {
    let truth = if truth.is_dir() {
        load_directory_corpus(truth, &TokenizerConfig::default())?
            .corpus
            .ground_truth()
    } else {
        let file = File::open(truth).map_err(|e| io_error(truth, e))?;
        GroundTruth::read_tsv(BufReader::new(file))?
    };
    let file = File::open(predictions).map_err(|e| io_error(predictions, e))?;
    let predictions = read_predictions_tsv(BufReader::new(file))?;
    let report = score(&confusion_named(&predictions, &truth)?)?;
    print!("{}", report.to_kv());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    corpus: &Path,
    trials: usize,
    base_seed: u64,
    out: &Path,
    grid: Option<Vec<LabelRatio>>,
    transductive: bool,
    unlabeled_pool: Option<usize>,
    clustering: &Clustering,
    preprocessing: &Preprocessing,
) -> Result<(), Error> {
    let mut config = SweepConfig {
        trials_per_ratio: trials,
        base_seed,
        smoothing: clustering.smoothing,
        unlabeled_pool_size: unlabeled_pool,
        transductive,
        tokenizer: preprocessing.config(),
        rkm: clustering.rkm(base_seed),
        ..SweepConfig::default()
    };
    if let Some(grid) = grid {
        config.grid = grid;
    }
    let started = std::time::Instant::now();
    let table = run_sweep(&config, corpus)?;
    let files = emit_results(&table, out)?;
    let failed = table.failed_trials().count();
    eprintln!(
        "{} trials in {:.1}s ({failed} failed); aggregates in {}",
        table.trials.len(),
        started.elapsed().as_secs_f64(),
        files.aggregate_csv.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train {
            corpus,
            labeled_frac,
            seed,
            model_out,
            unlabeled_pool,
            manifest_out,
            clustering,
            preprocessing,
        } => train(
            &corpus,
            labeled_frac,
            seed,
            &model_out,
            unlabeled_pool,
            manifest_out.as_deref(),
            &clustering,
            &preprocessing,
        ),
        Command::Classify { model, input, out } => classify(&model, &input, &out),
        Command::Eval { predictions, truth } => eval(&predictions, &truth),
        Command::Sweep {
            corpus,
            trials,
            base_seed,
            out,
            grid,
            transductive,
            unlabeled_pool,
            clustering,
            preprocessing,
        } => sweep(
            &corpus,
            trials,
            base_seed,
            &out,
            grid,
            transductive,
            unlabeled_pool,
            &clustering,
            &preprocessing,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_invariant_violation() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
