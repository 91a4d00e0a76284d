//! Label-ratio sweeps: repeated random trials per labeled:unlabeled ratio,
//! aggregated to max/min/mean/std per metric.
//!
//! The corpus is split into a training and a test half once, with the base
//! seed. Trial `i` of every ratio then uses seed `base_seed + i` for label
//! masking, unlabeled-pool sampling and clustering, so any single trial can
//! be replayed from its manifest and seed alone.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    load_directory_corpus, mask_labels, split_train_test, Corpus, DocId, GroundTruth,
    ManifestEntry, MaskedSplit, Side, SplitManifest, SplitSpec, TokenizerConfig,
};
use crate::error::{Error, Result};
use crate::eval::{confusion, score, EvalReport};
use crate::pipeline::{Pipeline, TrainOptions};
use crate::rkmeans::{ClusterModel, RkmConfig};

/// `labeled:unlabeled` parts of the training half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelRatio {
    pub labeled: u32,
    pub unlabeled: u32,
}

impl LabelRatio {
    pub const fn new(labeled: u32, unlabeled: u32) -> Self {
        LabelRatio { labeled, unlabeled }
    }

    pub fn parts(self) -> u32 {
        self.labeled + self.unlabeled
    }

    pub fn labeled_fraction(self) -> f64 {
        f64::from(self.labeled) / f64::from(self.parts())
    }
}

impl fmt::Display for LabelRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.labeled, self.unlabeled)
    }
}

impl FromStr for LabelRatio {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (l, u) = s
            .split_once(':')
            .ok_or_else(|| format!("expected L:U, got `{s}`"))?;
        let labeled = l
            .trim()
            .parse()
            .map_err(|_| format!("bad labeled part in `{s}`"))?;
        let unlabeled = u
            .trim()
            .parse()
            .map_err(|_| format!("bad unlabeled part in `{s}`"))?;
        if labeled == 0 || unlabeled == 0 {
            return Err(format!("both parts of `{s}` must be positive"));
        }
        Ok(LabelRatio::new(labeled, unlabeled))
    }
}

/// 1:49, 2:48, ..., 20:30 over 50 parts.
pub fn default_grid() -> Vec<LabelRatio> {
    (1..=20).map(|l| LabelRatio::new(l, 50 - l)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MacroPrecision,
    MacroRecall,
    MacroF1,
    MicroF1,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Accuracy,
        Metric::MacroPrecision,
        Metric::MacroRecall,
        Metric::MacroF1,
        Metric::MicroF1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::MacroPrecision => "macro_precision",
            Metric::MacroRecall => "macro_recall",
            Metric::MacroF1 => "macro_f1",
            Metric::MicroF1 => "micro_f1",
        }
    }

    pub fn of(self, report: &EvalReport) -> f64 {
        match self {
            Metric::Accuracy => report.accuracy,
            Metric::MacroPrecision => report.macro_avg.precision,
            Metric::MacroRecall => report.macro_avg.recall,
            Metric::MacroF1 => report.macro_avg.f1,
            Metric::MicroF1 => report.micro_avg.f1,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: Vec<LabelRatio>,
    pub trials_per_ratio: usize,
    pub base_seed: u64,
    pub test_fraction: f64,
    pub smoothing: f64,
    /// N3 cap; `None` uses the whole unlabeled pool.
    pub unlabeled_pool_size: Option<usize>,
    /// Let test documents join the unlabeled pool (labels withheld).
    pub transductive: bool,
    pub tokenizer: TokenizerConfig,
    /// `rkm.kmeans.rng_seed` is overridden by each trial's seed.
    pub rkm: RkmConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: default_grid(),
            trials_per_ratio: 20,
            base_seed: 0,
            test_fraction: 0.5,
            smoothing: 1.0,
            unlabeled_pool_size: None,
            transductive: false,
            tokenizer: TokenizerConfig::default(),
            rkm: RkmConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.grid.first() else {
            return Err(Error::InvalidConfig("ratio grid is empty".into()));
        };
        if let Some(odd) = self.grid.iter().find(|r| r.parts() != first.parts()) {
            return Err(Error::InvalidConfig(format!(
                "ratio {odd} does not sum to {} parts like {first}",
                first.parts()
            )));
        }
        if self.grid.iter().any(|r| r.labeled == 0 || r.unlabeled == 0) {
            return Err(Error::InvalidConfig("ratio parts must be positive".into()));
        }
        if self.trials_per_ratio == 0 {
            return Err(Error::InvalidConfig("trials_per_ratio must be >= 1".into()));
        }
        self.rkm.validate()
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    pub fn split_spec(&self, labeled_fraction: f64, seed: u64) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            labeled_fraction,
            unlabeled_pool_size: self.unlabeled_pool_size,
            rng_seed: seed,
        }
    }

    pub fn train_options(&self, seed: u64) -> TrainOptions {
        let mut rkm = self.rkm;
        rkm.kmeans.rng_seed = seed;
        TrainOptions {
            smoothing: self.smoothing,
            unlabeled_pool_size: self.unlabeled_pool_size,
            seed,
            rkm,
        }
    }
}

/// Everything one trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub report: EvalReport,
    pub model: ClusterModel,
    pub manifest: SplitManifest,
    /// Labels of D^L, for recounting cluster statistics.
    pub labeled_truth: GroundTruth,
    pub n_labeled: usize,
    pub n_unlabeled_pool: usize,
}

/// One trial: mask `train` at `ratio`, fit, cluster, classify `test`, score.
pub fn run_trial(
    train: &Corpus,
    test: &Corpus,
    ratio: LabelRatio,
    trial_seed: u64,
    config: &SweepConfig,
) -> Result<TrialOutcome> {
    let masked = mask_labels(
        train,
        &config.split_spec(ratio.labeled_fraction(), trial_seed),
    )?;
    let manifest = SplitManifest::from_split(train, test, &masked)?;
    run_masked(&masked, test, manifest, trial_seed, config)
}

/// Re-runs a trial from its manifest and seed.
pub fn replay_trial(
    corpus: &Corpus,
    manifest: &SplitManifest,
    trial_seed: u64,
    config: &SweepConfig,
) -> Result<TrialOutcome> {
    let (_, test, masked) = manifest.apply(corpus)?;
    run_masked(&masked, &test, manifest.clone(), trial_seed, config)
}

fn run_masked(
    masked: &MaskedSplit,
    test: &Corpus,
    manifest: SplitManifest,
    seed: u64,
    config: &SweepConfig,
) -> Result<TrialOutcome> {
    let pool = if config.transductive {
        masked.unlabeled.concat(&test.without_labels())?
    } else {
        masked.unlabeled.clone()
    };
    let trained = Pipeline::train_from(
        &masked.labeled,
        &pool,
        &config.tokenizer,
        &config.train_options(seed),
    )?;
    let predictions = trained.pipeline.predict(test)?;
    let report = score(&confusion(&predictions, &test.ground_truth())?)?;
    Ok(TrialOutcome {
        report,
        model: trained.pipeline.model,
        manifest,
        labeled_truth: masked.labeled.ground_truth(),
        n_labeled: masked.labeled.len(),
        n_unlabeled_pool: trained.training.len() - masked.labeled.len(),
    })
}

/// Per-trial numbers kept in a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub values: Vec<(Metric, f64)>,
    pub clusters: usize,
    pub recursions: usize,
    pub max_depth: usize,
    pub fallback_acceptances: usize,
    pub orphan_clusters: usize,
}

impl TrialSummary {
    fn from_outcome(outcome: &TrialOutcome) -> Self {
        let meta = &outcome.model.metadata;
        TrialSummary {
            values: Metric::ALL
                .iter()
                .map(|&m| (m, m.of(&outcome.report)))
                .collect(),
            clusters: outcome.model.len(),
            recursions: meta.recursions,
            max_depth: meta.max_depth_reached,
            fallback_acceptances: meta.fallback_acceptances,
            orphan_clusters: meta.orphan_clusters,
        }
    }

    pub fn value(&self, metric: Metric) -> f64 {
        self.values
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub ratio: LabelRatio,
    pub trial: usize,
    pub seed: u64,
    /// Failed trials keep their error message.
    pub result: std::result::Result<TrialSummary, String>,
    /// Aligned with [`SweepTable::train_ids`]; empty when masking failed.
    labeled_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: LabelRatio,
    pub metric: Metric,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Population standard deviation over successful trials.
    pub std: f64,
    pub trials: usize,
    pub failed: usize,
    pub fallback_acceptances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialRecord>,
    train_ids: Vec<DocId>,
    test_ids: Vec<DocId>,
}

/// Context handed to sweep observers.
#[derive(Debug, Clone, Copy)]
pub struct TrialContext<'a> {
    pub ratio: LabelRatio,
    pub trial: usize,
    pub seed: u64,
    pub train: &'a Corpus,
    pub test: &'a Corpus,
}

/// Loads the corpus at `corpus_path` and runs the sweep on it.
pub fn run_sweep(config: &SweepConfig, corpus_path: &Path) -> Result<SweepTable> {
    let loaded = load_directory_corpus(corpus_path, &config.tokenizer)?;
    run_sweep_corpus(&loaded.corpus, config, |_, _| {})
}

/// Runs every (ratio, trial) pair, calling `observe` on each successful
/// outcome. Trials run in parallel; results are ordered by (ratio, trial).
pub fn run_sweep_corpus<F>(corpus: &Corpus, config: &SweepConfig, observe: F) -> Result<SweepTable>
where
    F: Fn(&TrialContext<'_>, &TrialOutcome) + Sync,
{
    config.validate()?;
    // labeled_fraction is unused by the split itself
    let (train, test) = split_train_test(corpus, &config.split_spec(0.5, config.base_seed))?;

    let jobs: Vec<(usize, LabelRatio, usize)> = config
        .grid
        .iter()
        .enumerate()
        .flat_map(|(ri, &ratio)| (0..config.trials_per_ratio).map(move |t| (ri, ratio, t)))
        .collect();

    let position: std::collections::HashMap<&DocId, usize> = train
        .documents()
        .iter()
        .enumerate()
        .map(|(i, d)| (&d.id, i))
        .collect();

    let mut records: Vec<(usize, TrialRecord)> = jobs
        .par_iter()
        .map(|&(ri, ratio, trial)| {
            let seed = config.trial_seed(trial);
            let outcome = run_trial(&train, &test, ratio, seed, config);
            let (result, labeled_mask) = match &outcome {
                Ok(outcome) => {
                    let ctx = TrialContext {
                        ratio,
                        trial,
                        seed,
                        train: &train,
                        test: &test,
                    };
                    observe(&ctx, outcome);
                    let mut mask = vec![false; train.len()];
                    for entry in outcome.manifest.entries.iter().filter(|e| e.labeled) {
                        mask[position[&entry.doc_id]] = true;
                    }
                    (Ok(TrialSummary::from_outcome(outcome)), mask)
                }
                Err(e) => (Err(e.to_string()), Vec::new()),
            };
            (
                ri,
                TrialRecord {
                    ratio,
                    trial,
                    seed,
                    result,
                    labeled_mask,
                },
            )
        })
        .collect();
    records.sort_by_key(|(ri, r)| (*ri, r.trial));
    let trials: Vec<TrialRecord> = records.into_iter().map(|(_, r)| r).collect();

    Ok(SweepTable {
        rows: aggregate(&config.grid, &trials),
        trials,
        train_ids: train.documents().iter().map(|d| d.id.clone()).collect(),
        test_ids: test.documents().iter().map(|d| d.id.clone()).collect(),
    })
}

/// max/min/mean/std rows per (ratio, metric), in grid then metric order.
pub fn aggregate(grid: &[LabelRatio], trials: &[TrialRecord]) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(grid.len() * Metric::ALL.len());
    for &ratio in grid {
        let of_ratio: Vec<&TrialRecord> = trials.iter().filter(|t| t.ratio == ratio).collect();
        let ok: Vec<&TrialSummary> = of_ratio
            .iter()
            .filter_map(|t| t.result.as_ref().ok())
            .collect();
        let failed = of_ratio.len() - ok.len();
        let fallback_acceptances = ok.iter().map(|s| s.fallback_acceptances).sum();
        for metric in Metric::ALL {
            let values: Vec<f64> = ok.iter().map(|s| s.value(metric)).collect();
            let (max, min, mean, std) = summarize(&values);
            rows.push(SweepRow {
                ratio,
                metric,
                max,
                min,
                mean,
                std,
                trials: values.len(),
                failed,
                fallback_acceptances,
            });
        }
    }
    rows
}

fn summarize(values: &[f64]) -> (f64, f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = (values.iter().sum::<f64>() / n).clamp(min, max);
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (max, min, mean, var.sqrt())
}

impl SweepTable {
    pub fn row(&self, ratio: LabelRatio, metric: Metric) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.ratio == ratio && r.metric == metric)
    }

    pub fn failed_trials(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|t| t.result.is_err())
    }

    /// Split manifest of one trial, `None` if its masking failed.
    pub fn manifest(&self, record: &TrialRecord) -> Option<SplitManifest> {
        if record.labeled_mask.len() != self.train_ids.len() {
            return None;
        }
        let train = self
            .train_ids
            .iter()
            .zip(&record.labeled_mask)
            .map(|(id, &labeled)| ManifestEntry {
                doc_id: id.clone(),
                side: Side::Train,
                labeled,
            });
        let test = self.test_ids.iter().map(|id| ManifestEntry {
            doc_id: id.clone(),
            side: Side::Test,
            labeled: false,
        });
        Some(SplitManifest {
            entries: train.chain(test).collect(),
        })
    }
}

/// Paths written by [`emit_results`].
#[derive(Debug, Clone)]
pub struct EmittedFiles {
    pub per_trial_csv: PathBuf,
    pub aggregate_csv: PathBuf,
    pub trials_csv: PathBuf,
    pub manifest_dir: PathBuf,
}

pub fn manifest_file_name(ratio: LabelRatio, trial: usize) -> String {
    format!(
        "ratio-{:02}-{:02}_trial-{:02}.tsv",
        ratio.labeled, ratio.unlabeled, trial
    )
}

/// Writes `per_trial.csv` (`ratio,trial,metric,value`), `aggregate.csv`
/// (`ratio,metric,max,min,mean,std`), `trials.csv` (run metadata and
/// failures) and one split manifest per trial under `manifests/`.
pub fn emit_results(table: &SweepTable, out_dir: &Path) -> Result<EmittedFiles> {
    let manifest_dir = out_dir.join("manifests");
    fs::create_dir_all(&manifest_dir).map_err(|e| Error::io(&manifest_dir, e))?;
    let files = EmittedFiles {
        per_trial_csv: out_dir.join("per_trial.csv"),
        aggregate_csv: out_dir.join("aggregate.csv"),
        trials_csv: out_dir.join("trials.csv"),
        manifest_dir,
    };

    let mut w = csv::Writer::from_path(&files.per_trial_csv)?;
    w.write_record(["ratio", "trial", "metric", "value"])?;
    for record in &table.trials {
        if let Ok(summary) = &record.result {
            for &(metric, value) in &summary.values {
                w.write_record([
                    record.ratio.to_string(),
                    record.trial.to_string(),
                    metric.to_string(),
                    value.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&files.per_trial_csv, e))?;

    let mut w = csv::Writer::from_path(&files.aggregate_csv)?;
    w.write_record(["ratio", "metric", "max", "min", "mean", "std"])?;
    for row in &table.rows {
        w.write_record([
            row.ratio.to_string(),
            row.metric.to_string(),
            row.max.to_string(),
            row.min.to_string(),
            row.mean.to_string(),
            row.std.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&files.aggregate_csv, e))?;

    let mut w = csv::Writer::from_path(&files.trials_csv)?;
    w.write_record([
        "ratio",
        "trial",
        "seed",
        "status",
        "clusters",
        "recursions",
        "max_depth",
        "fallback_acceptances",
        "orphan_clusters",
        "error",
    ])?;
    for record in &table.trials {
        let mut fields = vec![
            record.ratio.to_string(),
            record.trial.to_string(),
            record.seed.to_string(),
        ];
        match &record.result {
            Ok(s) => fields.extend([
                "ok".to_owned(),
                s.clusters.to_string(),
                s.recursions.to_string(),
                s.max_depth.to_string(),
                s.fallback_acceptances.to_string(),
                s.orphan_clusters.to_string(),
                String::new(),
            ]),
            Err(e) => {
                fields.push("failed".to_owned());
                fields.extend(std::iter::repeat_n(String::new(), 5));
                fields.push(e.clone());
            }
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io(&files.trials_csv, e))?;

    for record in &table.trials {
        if let Some(manifest) = table.manifest(record) {
            let path = files
                .manifest_dir
                .join(manifest_file_name(record.ratio, record.trial));
            fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(files)
}

/// One parsed line of `aggregate.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AggregateLine {
    pub ratio: String,
    pub metric: String,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateLine>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(rows)
}

/// One parsed line of `per_trial.csv`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PerTrialLine {
    pub ratio: String,
    pub trial: usize,
    pub metric: String,
    pub value: f64,
}

pub fn read_per_trial_csv(path: &Path) -> Result<Vec<PerTrialLine>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_spans_one_to_twenty_labeled_parts() {
        let grid = default_grid();
        assert_eq!(grid.len(), 20);
        assert_eq!(grid[0], LabelRatio::new(1, 49));
        assert_eq!(grid[19], LabelRatio::new(20, 30));
        assert!(grid.iter().all(|r| r.parts() == 50));
        assert_eq!(grid[0].labeled_fraction(), 0.02);
        assert_eq!(grid[19].labeled_fraction(), 0.4);
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(
            "3:47".parse::<LabelRatio>().unwrap(),
            LabelRatio::new(3, 47)
        );
        assert!("3-47".parse::<LabelRatio>().is_err());
        assert!("0:50".parse::<LabelRatio>().is_err());
        assert_eq!(LabelRatio::new(12, 38).to_string(), "12:38");
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig::default();
        assert!(c.validate().is_ok());
        c.grid.push(LabelRatio::new(1, 9));
        assert!(c.validate().is_err());
        let c = SweepConfig {
            trials_per_ratio: 0,
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SweepConfig {
            grid: vec![],
            ..SweepConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn summary_statistics() {
        let (max, min, mean, std) = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!((max, min, mean), (4.0, 1.0, 2.5));
        assert!((std - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(summarize(&[0.7]), (0.7, 0.7, 0.7, 0.0));
        assert!(summarize(&[]).0.is_nan());
    }

    #[test]
    fn manifest_names_sort_by_ratio_then_trial() {
        assert_eq!(
            manifest_file_name(LabelRatio::new(1, 49), 3),
            "ratio-01-49_trial-03.tsv"
        );
    }
}
