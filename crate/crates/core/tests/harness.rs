use std::collections::BTreeMap;

use rkmssl::corpus::{mask_labels, split_train_test, SplitSpec};
use rkmssl::harness::{
    emit_results, read_aggregate_csv, read_per_trial_csv, run_sweep, run_sweep_corpus, run_trial,
    LabelRatio, Metric, SweepConfig,
};
use rkmssl::synthetic::{topic_corpus, write_corpus_dir, TopicCorpusSpec};
use rkmssl::{ClassId, Corpus, Document, Pipeline, TokenizerConfig};

fn corpus(classes: usize, docs: usize, seed: u64) -> Corpus {
    topic_corpus(
        &TopicCorpusSpec {
            classes,
            docs_per_class: docs,
            ..TopicCorpusSpec::default()
        },
        seed,
    )
}

#[test]
fn full_grid_emits_every_trial_and_aggregates_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("corpus");
    write_corpus_dir(&corpus(3, 20, 1), &data).unwrap();
    let config = SweepConfig::default();
    let table = run_sweep(&config, &data).unwrap();
    assert_eq!(table.failed_trials().count(), 0);
    let files = emit_results(&table, &dir.path().join("out")).unwrap();

    let text = std::fs::read_to_string(&files.per_trial_csv).unwrap();
    assert_eq!(text.lines().count(), 20 * 20 * 5 + 1);
    assert_eq!(std::fs::read_dir(&files.manifest_dir).unwrap().count(), 400);

    let per_trial = read_per_trial_csv(&files.per_trial_csv).unwrap();
    let mut grouped: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for line in per_trial {
        grouped
            .entry((line.ratio, line.metric))
            .or_default()
            .push(line.value);
    }
    let aggregate = read_aggregate_csv(&files.aggregate_csv).unwrap();
    assert_eq!(aggregate.len(), 20 * 5);
    for row in aggregate {
        let values = &grouped[&(row.ratio.clone(), row.metric.clone())];
        assert_eq!(values.len(), 20);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        approx::assert_abs_diff_eq!(row.mean, mean, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(row.std, var.sqrt(), epsilon = 1e-12);
        assert_eq!(row.max, values.iter().cloned().fold(f64::MIN, f64::max));
        assert_eq!(row.min, values.iter().cloned().fold(f64::MAX, f64::min));
    }
}

#[test]
fn single_trial_has_zero_spread() {
    let config = SweepConfig {
        grid: vec![LabelRatio::new(5, 45)],
        trials_per_ratio: 1,
        ..SweepConfig::default()
    };
    let table = run_sweep_corpus(&corpus(3, 20, 2), &config, |_, _| {}).unwrap();
    for metric in Metric::ALL {
        let row = table.row(LabelRatio::new(5, 45), metric).unwrap();
        assert_eq!(row.std, 0.0);
        assert_eq!(row.max, row.min);
        assert_eq!(row.mean, row.max);
    }
}

#[test]
fn sweeps_are_deterministic_regardless_of_thread_schedule() {
    let config = SweepConfig {
        grid: vec![LabelRatio::new(1, 49), LabelRatio::new(10, 40)],
        trials_per_ratio: 4,
        base_seed: 9,
        ..SweepConfig::default()
    };
    let c = corpus(4, 20, 3);
    let a = run_sweep_corpus(&c, &config, |_, _| {}).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_sweep_corpus(&c, &config, |_, _| {}).unwrap());
    assert_eq!(a, b);
}

#[test]
fn more_labels_help_on_average() {
    let c = corpus(6, 50, 4);
    let config = SweepConfig {
        grid: vec![LabelRatio::new(1, 49), LabelRatio::new(20, 30)],
        trials_per_ratio: 20,
        ..SweepConfig::default()
    };
    let table = run_sweep_corpus(&c, &config, |_, _| {}).unwrap();
    let low = table
        .row(LabelRatio::new(1, 49), Metric::Accuracy)
        .unwrap()
        .mean;
    let high = table
        .row(LabelRatio::new(20, 30), Metric::Accuracy)
        .unwrap()
        .mean;
    assert!(high > low, "{high} <= {low}");
}

#[test]
fn duplicated_documents_are_classified_perfectly() {
    // each class has one distinct document repeated, so train and test coincide
    let mut entries = Vec::new();
    for c in 0..3 {
        for i in 0..10 {
            let tokens = (0..5).map(|w| format!("c{c}w{w}")).collect();
            entries.push((
                Document::new(format!("{c}-{i}"), tokens),
                Some(ClassId::new(c)),
            ));
        }
    }
    let c = Corpus::new(vec!["x".into(), "y".into(), "z".into()], entries).unwrap();
    let config = SweepConfig {
        grid: vec![LabelRatio::new(5, 45)],
        trials_per_ratio: 3,
        ..SweepConfig::default()
    };
    let table = run_sweep_corpus(&c, &config, |_, _| {}).unwrap();
    for t in &table.trials {
        assert_eq!(t.result.as_ref().unwrap().value(Metric::Accuracy), 1.0);
    }
}

#[test]
fn test_documents_never_reach_training_by_default() {
    let c = corpus(3, 20, 5);
    let config = SweepConfig::default();
    let (train, test) = split_train_test(&c, &config.split_spec(0.5, 0)).unwrap();
    let outcome = run_trial(&train, &test, LabelRatio::new(10, 40), 3, &config).unwrap();
    let test_ids: std::collections::BTreeSet<_> =
        test.documents().iter().map(|d| d.id.clone()).collect();
    for cluster in &outcome.model.clusters {
        assert!(cluster.members.iter().all(|m| !test_ids.contains(m)));
    }
    assert!(outcome
        .model
        .training_label_assignments
        .keys()
        .all(|k| !test_ids.contains(k)));

    let transductive = SweepConfig {
        transductive: true,
        ..config
    };
    let outcome = run_trial(&train, &test, LabelRatio::new(10, 40), 3, &transductive).unwrap();
    assert!(outcome
        .model
        .training_label_assignments
        .keys()
        .any(|k| test_ids.contains(k)));
    assert!(outcome
        .labeled_truth
        .iter()
        .all(|(id, _)| !test_ids.contains(id)));
}

#[test]
fn pipeline_round_trips_through_json() {
    let c = corpus(3, 20, 6);
    let masked = mask_labels(
        &c,
        &SplitSpec {
            labeled_fraction: 0.2,
            rng_seed: 1,
            ..SplitSpec::default()
        },
    )
    .unwrap();
    let trained =
        Pipeline::train(&masked, &TokenizerConfig::default(), &Default::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    trained.pipeline.save(&path).unwrap();
    let loaded = Pipeline::load(&path).unwrap();
    assert_eq!(loaded, trained.pipeline);
    let text = "t0w1 t0w2 bg3 t0w1";
    assert_eq!(
        loaded.predict_text("q", text).unwrap(),
        trained.pipeline.predict_text("q", text).unwrap()
    );
}
