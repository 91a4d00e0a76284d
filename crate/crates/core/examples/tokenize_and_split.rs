//! Tokenize text, then split a corpus into train/test and mask most training labels.

use rkmssl::corpus::{mask_labels, split_train_test, tokenize, SplitManifest, SplitSpec};
use rkmssl::synthetic::{topic_corpus, TopicCorpusSpec};
use rkmssl::TokenizerConfig;

fn main() -> rkmssl::Result<()> {
    let config = TokenizerConfig {
        remove_stopwords: true,
        ..TokenizerConfig::default()
    };
    println!(
        "{:?}",
        tokenize("The quick-brown fox, and the LAZY dog (2x)!", &config)
    );

    let corpus = topic_corpus(&TopicCorpusSpec::default(), 1);
    let spec = SplitSpec {
        test_fraction: 0.5,
        labeled_fraction: 0.1,
        rng_seed: 7,
        ..SplitSpec::default()
    };
    let (train, test) = split_train_test(&corpus, &spec)?;
    let masked = mask_labels(&train, &spec)?;
    println!(
        "{} documents: {} train ({} labeled, {} unlabeled), {} test",
        corpus.len(),
        train.len(),
        masked.labeled.len(),
        masked.unlabeled.len(),
        test.len()
    );
    for (class, n) in corpus.classes().iter().zip(masked.labeled.class_counts()) {
        println!("  {class}: {n} labeled");
    }

    let manifest = SplitManifest::from_split(&train, &test, &masked)?;
    for line in manifest.to_text().lines().take(5) {
        println!("  {line}");
    }
    Ok(())
}
