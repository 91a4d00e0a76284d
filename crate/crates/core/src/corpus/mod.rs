//! Document collections and the labeled/unlabeled partitions built from them.

mod load;
mod manifest;
mod tokenize;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{stage_rng, Stage};

pub use load::{load_directory_corpus, LoadedCorpus, SkippedFile};
pub use manifest::{ManifestEntry, Side, SplitManifest};
pub use tokenize::{is_stopword, tokenize, TokenizerConfig};

/// Opaque document identifier. Directory corpora use `class/file`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Self {
        DocId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DocId {
    fn from(s: &str) -> Self {
        DocId::new(s)
    }
}

/// Dense class index in `[0, K)`. Names live in the owning [`Corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(usize);

impl ClassId {
    pub const fn new(index: usize) -> Self {
        ClassId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: DocId,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<DocId>, tokens: Vec<String>) -> Self {
        Document {
            id: id.into(),
            tokens,
        }
    }

    /// Tokenizes `text` with `config`.
    pub fn from_text(id: impl Into<DocId>, text: &str, config: &TokenizerConfig) -> Self {
        Document::new(id, tokenize(text, config))
    }
}

impl From<String> for DocId {
    fn from(s: String) -> Self {
        DocId(s)
    }
}

/// An immutable collection of documents with optional labels.
///
/// Sub-corpora produced by splitting share the class-name table.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    classes: Arc<Vec<String>>,
    documents: Vec<Document>,
    labels: Vec<Option<ClassId>>,
}

impl Corpus {
    pub fn new(
        classes: Vec<String>,
        entries: impl IntoIterator<Item = (Document, Option<ClassId>)>,
    ) -> Result<Self> {
        Corpus::with_classes(Arc::new(classes), entries)
    }

    fn with_classes(
        classes: Arc<Vec<String>>,
        entries: impl IntoIterator<Item = (Document, Option<ClassId>)>,
    ) -> Result<Self> {
        let mut seen_names = HashSet::new();
        for name in classes.iter() {
            if !seen_names.insert(name.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate class name `{name}`"
                )));
            }
        }
        let (documents, labels): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let mut ids = HashSet::with_capacity(documents.len());
        for (doc, label) in documents.iter().zip(&labels) {
            if !ids.insert(&doc.id) {
                return Err(Error::DuplicateDocument(doc.id.clone()));
            }
            if let Some(label) = label {
                if label.index() >= classes.len() {
                    return Err(Error::UnknownClass(label.to_string()));
                }
            }
        }
        Ok(Corpus {
            classes,
            documents,
            labels,
        })
    }

    /// Sub-corpus sharing this corpus' class table.
    fn derive(&self, entries: impl IntoIterator<Item = (Document, Option<ClassId>)>) -> Self {
        let (documents, labels) = entries.into_iter().unzip();
        Corpus {
            classes: Arc::clone(&self.classes),
            documents,
            labels,
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub(crate) fn shared_classes(&self) -> Arc<Vec<String>> {
        Arc::clone(&self.classes)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_name(&self, class: ClassId) -> &str {
        &self.classes[class.index()]
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c == name).map(ClassId)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn labels(&self) -> &[Option<ClassId>] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Document, Option<ClassId>)> {
        self.documents.iter().zip(self.labels.iter().copied())
    }

    /// N.
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// N1.
    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// N2.
    pub fn n_unlabeled(&self) -> usize {
        self.len() - self.n_labeled()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    /// Labeled document count per class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for label in self.labels.iter().flatten() {
            counts[label.index()] += 1;
        }
        counts
    }

    /// Labels of all labeled documents, keyed by id.
    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            classes: Arc::clone(&self.classes),
            labels: self
                .iter()
                .filter_map(|(doc, label)| label.map(|l| (doc.id.clone(), l)))
                .collect(),
        }
    }

    /// Same documents with every label removed.
    pub fn without_labels(&self) -> Corpus {
        self.derive(self.documents.iter().cloned().map(|d| (d, None)))
    }

    /// Concatenation of two corpora sharing a class table.
    pub fn concat(&self, other: &Corpus) -> Result<Corpus> {
        if self.classes != other.classes {
            return Err(Error::InvalidConfig(
                "cannot concatenate corpora with different class tables".into(),
            ));
        }
        Corpus::with_classes(
            Arc::clone(&self.classes),
            self.iter()
                .chain(other.iter())
                .map(|(doc, label)| (doc.clone(), label)),
        )
    }

    fn require_fully_labeled(&self) -> Result<()> {
        match self.iter().find(|(_, label)| label.is_none()) {
            Some((doc, _)) => Err(Error::MissingLabel(doc.id.clone())),
            None => Ok(()),
        }
    }

    /// Document positions per class, in corpus order.
    fn positions_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.num_classes()];
        for (pos, label) in self.labels.iter().enumerate() {
            if let Some(label) = label {
                by_class[label.index()].push(pos);
            }
        }
        by_class
    }
}

/// Labels withheld from the learner, visible to scoring only.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    classes: Arc<Vec<String>>,
    labels: BTreeMap<DocId, ClassId>,
}

impl GroundTruth {
    pub fn new(classes: Vec<String>, labels: BTreeMap<DocId, ClassId>) -> Result<Self> {
        if let Some((_, bad)) = labels.iter().find(|(_, c)| c.index() >= classes.len()) {
            return Err(Error::UnknownClass(bad.to_string()));
        }
        Ok(GroundTruth {
            classes: Arc::new(classes),
            labels,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn get(&self, id: &DocId) -> Option<ClassId> {
        self.labels.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DocId, ClassId)> {
        self.labels.iter().map(|(id, c)| (id, *c))
    }

    /// Writes `doc_id<TAB>class_name` lines.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, class) in &self.labels {
            writeln!(out, "{}\t{}", id, self.classes[class.index()])?;
        }
        Ok(())
    }

    /// Reads `doc_id<TAB>class_name` lines; the class table is the sorted set
    /// of names seen.
    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<truth>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(id), Some(class)) = (fields.next(), fields.next()) else {
                return Err(Error::parse(
                    "truth file",
                    n + 1,
                    "expected doc_id<TAB>class",
                ));
            };
            rows.push((DocId::new(id), class.to_owned()));
        }
        let mut classes: Vec<String> = rows.iter().map(|(_, c)| c.clone()).collect();
        classes.sort();
        classes.dedup();
        let mut labels = BTreeMap::new();
        for (id, class) in rows {
            let index = classes
                .binary_search(&class)
                .expect("class collected above");
            if labels.insert(id.clone(), ClassId(index)).is_some() {
                return Err(Error::DuplicateDocument(id));
            }
        }
        GroundTruth::new(classes, labels)
    }
}

/// Parameters of one train/test split plus label mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    /// Share of the training half that keeps its labels.
    pub labeled_fraction: f64,
    /// N3 cap on the unlabeled documents entering the training collection.
    pub unlabeled_pool_size: Option<usize>,
    pub rng_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.5,
            labeled_fraction: 0.1,
            unlabeled_pool_size: None,
            rng_seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("test_fraction", self.test_fraction),
            ("labeled_fraction", self.labeled_fraction),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie strictly inside (0, 1), got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Stratified random train/test split.
///
/// Each class contributes `round(n_c * test_fraction)` documents to the test
/// side, clamped so both sides keep at least one. Both outputs preserve the
/// input order.
pub fn split_train_test(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    corpus.require_fully_labeled()?;
    let mut rng = stage_rng(spec.rng_seed, Stage::TrainTestSplit);
    let mut is_test = vec![false; corpus.len()];

    for (class, mut positions) in corpus.positions_by_class().into_iter().enumerate() {
        let n = positions.len();
        if n < 2 {
            return Err(Error::ClassTooSmall {
                class: corpus.classes[class].clone(),
                count: n,
                needed: 2,
            });
        }
        let n_test = ((n as f64 * spec.test_fraction).round() as usize).clamp(1, n - 1);
        positions.shuffle(&mut rng);
        for &pos in &positions[..n_test] {
            is_test[pos] = true;
        }
    }

    let pick = |want_test: bool| {
        corpus.derive(
            corpus
                .iter()
                .zip(&is_test)
                .filter(|(_, &t)| t == want_test)
                .map(|((doc, label), _)| (doc.clone(), label)),
        )
    };
    Ok((pick(false), pick(true)))
}

/// D^L, D^U and the labels hidden from D^U.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedSplit {
    pub labeled: Corpus,
    pub unlabeled: Corpus,
    pub hidden: GroundTruth,
}

/// Per-class labeled quotas: largest-remainder apportionment of
/// `round(N * fraction)` across classes, then floored up to one per class.
fn labeled_quotas(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = class_sizes.iter().sum();
    let target = (total as f64 * fraction).round() as usize;
    let exact: Vec<f64> = class_sizes.iter().map(|&n| n as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();

    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    // stable sort keeps lowest class index first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra)
    });
    for &class in order.iter().take(target.saturating_sub(assigned)) {
        quotas[class] += 1;
    }
    for (quota, &size) in quotas.iter_mut().zip(class_sizes) {
        *quota = (*quota).max(1).min(size);
    }
    quotas
}

/// Hides the labels of all but a stratified `labeled_fraction` of `train`.
///
/// Every class keeps at least one labeled document; a class with no
/// documents at all is an error since no seed could be drawn for it.
pub fn mask_labels(train: &Corpus, spec: &SplitSpec) -> Result<MaskedSplit> {
    spec.validate()?;
    train.require_fully_labeled()?;
    let by_class = train.positions_by_class();
    if let Some(empty) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(train.classes[empty].clone()));
    }
    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let quotas = labeled_quotas(&sizes, spec.labeled_fraction);

    let mut rng = stage_rng(spec.rng_seed, Stage::LabelMask);
    let mut keep = vec![false; train.len()];
    for (mut positions, quota) in by_class.into_iter().zip(quotas) {
        positions.shuffle(&mut rng);
        for &pos in &positions[..quota] {
            keep[pos] = true;
        }
    }

    let labeled = train.derive(
        train
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|((doc, label), _)| (doc.clone(), label)),
    );
    let hidden_entries: Vec<_> = train
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| !k)
        .map(|((doc, label), _)| (doc, label.expect("train is fully labeled")))
        .collect();
    let unlabeled = train.derive(hidden_entries.iter().map(|(doc, _)| ((*doc).clone(), None)));
    let hidden = GroundTruth {
        classes: train.shared_classes(),
        labels: hidden_entries
            .iter()
            .map(|(doc, label)| (doc.id.clone(), *label))
            .collect(),
    };
    Ok(MaskedSplit {
        labeled,
        unlabeled,
        hidden,
    })
}

/// D^T: all of D^L plus `n3` unlabeled documents sampled uniformly from D^U.
pub fn make_training_collection(
    labeled: &Corpus,
    unlabeled: &Corpus,
    n3: usize,
    seed: u64,
) -> Result<Corpus> {
    if n3 > unlabeled.len() {
        return Err(Error::InvalidConfig(format!(
            "unlabeled pool size {n3} exceeds the {} available unlabeled documents",
            unlabeled.len()
        )));
    }
    if labeled.classes != unlabeled.classes {
        return Err(Error::InvalidConfig(
            "labeled and unlabeled class tables differ".into(),
        ));
    }
    let mut rng = stage_rng(seed, Stage::UnlabeledPool);
    let mut picked = index::sample(&mut rng, unlabeled.len(), n3).into_vec();
    picked.sort_unstable();

    Corpus::with_classes(
        labeled.shared_classes(),
        labeled
            .iter()
            .map(|(doc, label)| (doc.clone(), label))
            .chain(
                picked
                    .into_iter()
                    .map(|i| (unlabeled.documents[i].clone(), None)),
            ),
    )
}
