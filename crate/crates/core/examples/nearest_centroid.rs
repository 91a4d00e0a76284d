//! Train the full pipeline on a few labeled documents plus an unlabeled pool,
//! then label unseen text by its nearest cluster centroid.

use rkmssl::corpus::{mask_labels, SplitSpec};
use rkmssl::synthetic::{topic_corpus, TopicCorpusSpec};
use rkmssl::{Pipeline, TokenizerConfig};

fn main() -> rkmssl::Result<()> {
    let corpus = topic_corpus(&TopicCorpusSpec::default(), 5);
    let masked = mask_labels(
        &corpus,
        &SplitSpec {
            labeled_fraction: 0.05,
            rng_seed: 2,
            ..SplitSpec::default()
        },
    )?;
    let trained = Pipeline::train(&masked, &TokenizerConfig::default(), &Default::default())?;
    let pipeline = &trained.pipeline;
    println!(
        "{} labeled + {} unlabeled documents -> {} clusters",
        masked.labeled.len(),
        trained.training.len() - masked.labeled.len(),
        pipeline.model.len()
    );

    // fresh documents from the same generator stand in for unseen text
    let unseen = topic_corpus(&TopicCorpusSpec::default(), 6);
    let mut correct = 0;
    for (i, (doc, truth)) in unseen.iter().enumerate() {
        let p = pipeline.predict_text(doc.id.as_str(), &doc.tokens.join(" "))?;
        correct += usize::from(Some(p.predicted) == truth);
        if i % 60 == 0 {
            println!(
                "{}: {} (cluster {}, distance {:.3e})",
                doc.id,
                pipeline.class_name(&p),
                p.winning_cluster,
                p.distance
            );
        }
    }
    println!(
        "{correct}/{} unseen documents labeled correctly",
        unseen.len()
    );
    Ok(())
}
