//! Repeated random trials over labeled:unlabeled ratios, with CSV output.
//!
//! `cargo run --release --example label_ratio_sweep -- [corpus_dir] [out_dir]`
//! Without a corpus directory a generated one is used.

use std::path::PathBuf;

use rkmssl::corpus::load_directory_corpus;
use rkmssl::harness::{emit_results, run_sweep_corpus, LabelRatio, Metric, SweepConfig};
use rkmssl::synthetic::{topic_corpus, TopicCorpusSpec};

fn main() -> rkmssl::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = SweepConfig::default();
    let corpus = match args.next() {
        Some(dir) => load_directory_corpus(dir.as_ref(), &config.tokenizer)?.corpus,
        None => {
            config.grid = [1, 2, 5, 10, 20]
                .map(|l| LabelRatio::new(l, 50 - l))
                .to_vec();
            config.trials_per_ratio = 10;
            topic_corpus(&TopicCorpusSpec::default(), 8)
        }
    };
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rkmssl-sweep"));

    let table = run_sweep_corpus(&corpus, &config, |_, _| {})?;
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "ratio", "mean", "std", "min", "max"
    );
    for &ratio in &config.grid {
        let row = table.row(ratio, Metric::Accuracy).expect("row per ratio");
        println!(
            "{:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            ratio.to_string(),
            row.mean,
            row.std,
            row.min,
            row.max
        );
    }
    let files = emit_results(&table, &out)?;
    println!(
        "wrote {} and {}",
        files.per_trial_csv.display(),
        files.aggregate_csv.display()
    );
    Ok(())
}
