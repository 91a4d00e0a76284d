//! Tokenizer, term weights and cluster model bundled for end-to-end use.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{classify_points, Prediction};
use crate::corpus::{make_training_collection, Corpus, Document, MaskedSplit, TokenizerConfig};
use crate::error::{Error, Result};
use crate::representation::{embed_corpus, fit_term_weights, EmbeddedCorpus, TermClassWeights};
use crate::rkmeans::{build_model, ClusterModel, RkmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub smoothing: f64,
    /// N3; `None` takes the whole unlabeled pool.
    pub unlabeled_pool_size: Option<usize>,
    /// Seeds the unlabeled-pool draw.
    pub seed: u64,
    pub rkm: RkmConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            smoothing: 1.0,
            unlabeled_pool_size: None,
            seed: 0,
            rkm: RkmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub tokenizer: TokenizerConfig,
    pub weights: TermClassWeights,
    pub model: ClusterModel,
}

/// Everything produced while training, for inspection.
#[derive(Debug, Clone)]
pub struct Trained {
    pub pipeline: Pipeline,
    pub training: EmbeddedCorpus,
}

impl Pipeline {
    /// Fits weights on D^L, embeds D^T = D^L + N3 sampled unlabeled
    /// documents, and runs the recursive clustering.
    pub fn train(
        masked: &MaskedSplit,
        tokenizer: &TokenizerConfig,
        options: &TrainOptions,
    ) -> Result<Trained> {
        Pipeline::train_from(&masked.labeled, &masked.unlabeled, tokenizer, options)
    }

    pub fn train_from(
        labeled: &Corpus,
        unlabeled: &Corpus,
        tokenizer: &TokenizerConfig,
        options: &TrainOptions,
    ) -> Result<Trained> {
        let weights = fit_term_weights(labeled, options.smoothing)?;
        let n3 = options.unlabeled_pool_size.unwrap_or(unlabeled.len());
        let collection = make_training_collection(labeled, unlabeled, n3, options.seed)?;
        let training = embed_corpus(&collection, &weights);
        let model = build_model(&training, &options.rkm)?;
        Ok(Trained {
            pipeline: Pipeline {
                tokenizer: tokenizer.clone(),
                weights,
                model,
            },
            training,
        })
    }

    /// Embeds and classifies `corpus`; documents without tokens are skipped.
    pub fn predict(&self, corpus: &Corpus) -> Result<Vec<Prediction>> {
        let embedded = embed_corpus(corpus, &self.weights);
        classify_points(&embedded.points, &self.model)
    }

    /// Tokenizes raw text with the stored tokenizer and classifies it.
    pub fn predict_text(&self, id: &str, text: &str) -> Result<Prediction> {
        let doc = Document::from_text(id, text, &self.tokenizer);
        let vector = crate::representation::embed(&doc, &self.weights)?;
        let n = crate::classifier::classify(&vector, &self.model)?;
        Ok(Prediction {
            doc_id: doc.id,
            predicted: n.predicted,
            winning_cluster: n.winning_cluster,
            distance: n.distance,
        })
    }

    pub fn class_name(&self, p: &Prediction) -> &str {
        self.model.class_name(p.predicted)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, self)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let pipeline: Pipeline = serde_json::from_reader(BufReader::new(file))?;
        pipeline.model.check()?;
        if pipeline.weights.num_classes() != pipeline.model.dimension {
            return Err(Error::Invariant(
                "weight matrix and cluster model disagree on dimension".into(),
            ));
        }
        Ok(pipeline)
    }
}
