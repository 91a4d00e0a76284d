//! Seeded toy data: Gaussian blobs and topic-word text corpora.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{ClassId, Corpus, Document};
use crate::error::{Error, Result};
use crate::representation::DocVector;
use crate::seeding::{stage_rng, Stage};

/// `n_per_class` isotropic Gaussian samples around each center, class by class.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    sigma: f64,
    n_per_class: usize,
    seed: u64,
) -> Vec<(DocVector, ClassId)> {
    let mut rng = stage_rng(seed, Stage::Synthetic);
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    let mut out = Vec::with_capacity(centers.len() * n_per_class);
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            let v = center.iter().map(|c| c + noise.sample(&mut rng)).collect();
            out.push((DocVector::new(v), ClassId::new(class)));
        }
    }
    out
}

/// `dim` axis-aligned centers scaled so every pair is `separation` apart.
pub fn simplex_centers(k: usize, dim: usize, separation: f64) -> Vec<Vec<f64>> {
    assert!(k <= dim, "need one axis per center");
    let scale = separation / std::f64::consts::SQRT_2;
    (0..k)
        .map(|c| (0..dim).map(|d| if d == c { scale } else { 0.0 }).collect())
        .collect()
}

/// Shape of a generated topic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicCorpusSpec {
    pub classes: usize,
    pub docs_per_class: usize,
    pub tokens_per_doc: usize,
    /// Words private to each class.
    pub topic_words: usize,
    /// Words shared by all classes.
    pub background_words: usize,
    /// Probability that a token is drawn from the document's topic words.
    pub topic_probability: f64,
}

impl Default for TopicCorpusSpec {
    fn default() -> Self {
        TopicCorpusSpec {
            classes: 4,
            docs_per_class: 60,
            tokens_per_doc: 40,
            topic_words: 30,
            background_words: 200,
            topic_probability: 0.3,
        }
    }
}

/// A fully labeled corpus of bag-of-words documents. Class `c` is named
/// `topic-c`; its documents mix its own words with a shared background.
pub fn topic_corpus(spec: &TopicCorpusSpec, seed: u64) -> Corpus {
    let mut rng = stage_rng(seed, Stage::Synthetic);
    let classes: Vec<String> = (0..spec.classes).map(|c| format!("topic-{c:02}")).collect();
    let mut entries = Vec::with_capacity(spec.classes * spec.docs_per_class);
    for (class, name) in classes.iter().enumerate() {
        for d in 0..spec.docs_per_class {
            let tokens = (0..spec.tokens_per_doc)
                .map(|_| {
                    if rng.random_bool(spec.topic_probability) {
                        format!("t{class}w{}", rng.random_range(0..spec.topic_words))
                    } else {
                        format!("bg{}", rng.random_range(0..spec.background_words))
                    }
                })
                .collect();
            let id = format!("{name}/{d:05}");
            entries.push((Document::new(id, tokens), Some(ClassId::new(class))));
        }
    }
    Corpus::new(classes, entries).expect("generated ids are unique")
}

/// Writes a labeled corpus as `<root>/<class>/<file>` plain text, the
/// layout [`crate::corpus::load_directory_corpus`] reads. Document ids
/// must already have that `class/file` form.
pub fn write_corpus_dir(corpus: &Corpus, root: &Path) -> Result<()> {
    for (doc, label) in corpus.iter() {
        let label = label.ok_or_else(|| Error::MissingLabel(doc.id.clone()))?;
        let file = doc
            .id
            .as_str()
            .rsplit('/')
            .next()
            .expect("split yields at least one piece");
        let dir = root.join(corpus.class_name(label));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(file);
        fs::write(&path, doc.tokens.join(" ")).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_directory_corpus, TokenizerConfig};
    use crate::rkmeans::squared_euclidean;

    #[test]
    fn simplex_centers_are_equidistant() {
        let centers = simplex_centers(4, 4, 6.0);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = squared_euclidean(&centers[i], &centers[j]).sqrt();
                assert!((d - 6.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blobs_are_deterministic() {
        let centers = simplex_centers(2, 2, 3.0);
        assert_eq!(
            gaussian_blobs(&centers, 1.0, 5, 1),
            gaussian_blobs(&centers, 1.0, 5, 1)
        );
        assert_ne!(
            gaussian_blobs(&centers, 1.0, 5, 1),
            gaussian_blobs(&centers, 1.0, 5, 2)
        );
    }

    #[test]
    fn topic_corpus_survives_a_disk_round_trip() {
        let spec = TopicCorpusSpec {
            classes: 3,
            docs_per_class: 4,
            ..TopicCorpusSpec::default()
        };
        let corpus = topic_corpus(&spec, 7);
        assert_eq!(corpus.len(), 12);
        let dir = tempfile::tempdir().unwrap();
        write_corpus_dir(&corpus, dir.path()).unwrap();
        let loaded = load_directory_corpus(dir.path(), &TokenizerConfig::default()).unwrap();
        assert_eq!(loaded.corpus, corpus);
    }
}
