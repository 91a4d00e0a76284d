//! Re-run a trial from its saved split manifest and seed, and reload a saved model.

use rkmssl::corpus::{split_train_test, SplitManifest};
use rkmssl::harness::{replay_trial, run_trial, LabelRatio, SweepConfig};
use rkmssl::synthetic::{topic_corpus, TopicCorpusSpec};
use rkmssl::ClusterModel;

fn main() -> rkmssl::Result<()> {
    let corpus = topic_corpus(&TopicCorpusSpec::default(), 3);
    let config = SweepConfig::default();
    let (train, test) = split_train_test(&corpus, &config.split_spec(0.5, config.base_seed))?;
    let seed = config.trial_seed(4);
    let first = run_trial(&train, &test, LabelRatio::new(3, 47), seed, &config)?;

    let dir = std::env::temp_dir().join("rkmssl-replay");
    std::fs::create_dir_all(&dir).map_err(|e| rkmssl::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let manifest_path = dir.join("manifest.tsv");
    std::fs::write(&manifest_path, first.manifest.to_text()).map_err(|e| rkmssl::Error::Io {
        path: manifest_path.clone(),
        source: e,
    })?;

    let text = std::fs::read_to_string(&manifest_path).map_err(|e| rkmssl::Error::Io {
        path: manifest_path.clone(),
        source: e,
    })?;
    let again = replay_trial(
        &corpus,
        &SplitManifest::read(text.as_bytes())?,
        seed,
        &config,
    )?;
    println!(
        "accuracy {} then {}; identical: {}",
        first.report.accuracy,
        again.report.accuracy,
        first.report == again.report
    );

    let model_path = dir.join("model.json");
    first.model.save_json(&model_path)?;
    let loaded = ClusterModel::load_json(&model_path)?;
    println!(
        "model with {} clusters reloaded; identical: {}",
        loaded.len(),
        loaded == first.model
    );
    Ok(())
}
