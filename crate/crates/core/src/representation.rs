//! Class-dimensional document representation.
//!
//! Each document becomes a vector with one component per class: the mean,
//! over its tokens, of a per-term relevance weight for that class. Weights
//! are fitted on labeled documents only. The weighting scheme is pluggable
//! through [`TermWeighting`]; the default, [`ClassConditionalFrequency`],
//! uses Laplace-smoothed class-conditional term frequencies, so every
//! column of the weight matrix is a probability distribution over the
//! vocabulary.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, Corpus, DocId, Document};
use crate::error::{Error, Result};
use crate::rkmeans::Point;

/// K-dimensional document vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocVector(Vec<f64>);

impl DocVector {
    pub fn new(values: Vec<f64>) -> Self {
        DocVector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        DocVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Componentwise mean of `vectors`; `None` when empty.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a [f64]>) -> Option<DocVector> {
        let mut iter = vectors.into_iter();
        let first = iter.next()?;
        let mut sum = first.to_vec();
        let mut n = 1usize;
        for v in iter {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
        for s in &mut sum {
            *s /= n as f64;
        }
        Some(DocVector(sum))
    }
}

impl From<Vec<f64>> for DocVector {
    fn from(values: Vec<f64>) -> Self {
        DocVector(values)
    }
}

impl AsRef<[f64]> for DocVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Raw term occurrence counts per class, gathered from labeled documents.
#[derive(Debug, Clone, PartialEq)]
pub struct TermClassStats {
    /// Vocabulary in lexicographic order.
    pub terms: Vec<String>,
    /// Row-major `|V| x K` occurrence counts.
    pub counts: Vec<u64>,
    /// Total token count per class.
    pub class_totals: Vec<u64>,
    /// Labeled document count per class.
    pub class_docs: Vec<usize>,
}

impl TermClassStats {
    /// Counts term occurrences over the labeled documents of `corpus`.
    /// Unlabeled documents are ignored.
    pub fn collect(corpus: &Corpus) -> Result<Self> {
        let k = corpus.num_classes();
        let mut per_term: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
        let mut class_totals = vec![0u64; k];
        let mut class_docs = vec![0usize; k];
        for (doc, label) in corpus.iter() {
            let Some(class) = label else { continue };
            class_docs[class.index()] += 1;
            for token in &doc.tokens {
                per_term.entry(token.as_str()).or_insert_with(|| vec![0; k])[class.index()] += 1;
                class_totals[class.index()] += 1;
            }
        }
        if per_term.is_empty() {
            return Err(Error::EmptyInput(
                "vocabulary: no tokens in labeled documents",
            ));
        }
        if let Some(empty) = class_docs.iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass(corpus.classes()[empty].clone()));
        }
        let mut terms = Vec::with_capacity(per_term.len());
        let mut counts = Vec::with_capacity(per_term.len() * k);
        for (term, row) in per_term {
            terms.push(term.to_owned());
            counts.extend(row);
        }
        Ok(TermClassStats {
            terms,
            counts,
            class_totals,
            class_docs,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_totals.len()
    }

    pub fn count(&self, term: usize, class: usize) -> u64 {
        self.counts[term * self.num_classes() + class]
    }
}

/// A term weighting scheme: per-class term statistics in, weight matrix out.
pub trait TermWeighting {
    fn weigh(&self, stats: &TermClassStats) -> Result<TermClassWeights>;
}

/// `weight(t, c) = (tf(t, c) + s) / (sum_t' tf(t', c) + s * |V|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassConditionalFrequency {
    pub smoothing: f64,
}

impl Default for ClassConditionalFrequency {
    fn default() -> Self {
        ClassConditionalFrequency { smoothing: 1.0 }
    }
}

impl TermWeighting for ClassConditionalFrequency {
    fn weigh(&self, stats: &TermClassStats) -> Result<TermClassWeights> {
        let s = self.smoothing;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "smoothing must be finite and >= 0, got {s}"
            )));
        }
        let k = stats.num_classes();
        let vocab = stats.terms.len() as f64;
        let denominators: Vec<f64> = stats
            .class_totals
            .iter()
            .map(|&mass| mass as f64 + s * vocab)
            .collect();
        if let Some(c) = denominators.iter().position(|&d| d <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "class {c} has no token mass and smoothing is zero"
            )));
        }
        let weights = stats
            .counts
            .chunks_exact(k)
            .flat_map(|row| {
                row.iter()
                    .zip(&denominators)
                    .map(move |(&tf, &denom)| (tf as f64 + s) / denom)
            })
            .collect();
        let oov = denominators.iter().map(|&denom| s / denom).collect();
        TermClassWeights::from_parts(stats.terms.clone(), k, weights, oov, s)
    }
}

/// Per-term, per-class relevance weights plus the out-of-vocabulary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct TermClassWeights {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    num_classes: usize,
    weights: Vec<f64>,
    oov: Vec<f64>,
    smoothing: f64,
}

#[derive(Serialize, Deserialize)]
struct RawWeights {
    num_classes: usize,
    smoothing: f64,
    terms: Vec<String>,
    weights: Vec<f64>,
    oov: Vec<f64>,
}

impl TryFrom<RawWeights> for TermClassWeights {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        TermClassWeights::from_parts(
            raw.terms,
            raw.num_classes,
            raw.weights,
            raw.oov,
            raw.smoothing,
        )
    }
}

impl From<TermClassWeights> for RawWeights {
    fn from(w: TermClassWeights) -> Self {
        RawWeights {
            num_classes: w.num_classes,
            smoothing: w.smoothing,
            terms: w.terms,
            weights: w.weights,
            oov: w.oov,
        }
    }
}

impl TermClassWeights {
    pub fn from_parts(
        terms: Vec<String>,
        num_classes: usize,
        weights: Vec<f64>,
        oov: Vec<f64>,
        smoothing: f64,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::InvalidConfig(
                "weight matrix needs at least one class".into(),
            ));
        }
        if weights.len() != terms.len() * num_classes || oov.len() != num_classes {
            return Err(Error::Invariant(format!(
                "weight matrix shape mismatch: {} terms x {num_classes} classes vs {} weights, {} oov",
                terms.len(),
                weights.len(),
                oov.len()
            )));
        }
        if let Some(bad) = weights
            .iter()
            .chain(&oov)
            .find(|w| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::Invariant(format!(
                "weight {bad} is not finite and non-negative"
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, term) in terms.iter().enumerate() {
            if index.insert(term.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate vocabulary term `{term}`"
                )));
            }
        }
        Ok(TermClassWeights {
            terms,
            index,
            num_classes,
            weights,
            oov,
            smoothing,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.terms
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Weight row for `term`, the OOV row if unknown.
    pub fn row(&self, term: &str) -> &[f64] {
        match self.term_index(term) {
            Some(i) => &self.weights[i * self.num_classes..(i + 1) * self.num_classes],
            None => &self.oov,
        }
    }

    pub fn oov_row(&self) -> &[f64] {
        &self.oov
    }

    pub fn weight(&self, term: usize, class: ClassId) -> f64 {
        self.weights[term * self.num_classes + class.index()]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.num_classes];
        for row in self.weights.chunks_exact(self.num_classes) {
            for (s, w) in sums.iter_mut().zip(row) {
                *s += w;
            }
        }
        sums
    }

    /// Text artifact: a header line, the OOV row, then one
    /// `term<TAB>w_1 ... w_K` row per vocabulary term. Reals use 17
    /// significant digits, which round-trips every `f64` exactly.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "term-class-weights v1 K={} V={} smoothing={:.16e}",
            self.num_classes,
            self.terms.len(),
            self.smoothing
        )?;
        write!(out, "<oov>")?;
        write_reals(&mut out, &self.oov)?;
        for (term, row) in self
            .terms
            .iter()
            .zip(self.weights.chunks_exact(self.num_classes))
        {
            write!(out, "{term}")?;
            write_reals(&mut out, row)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "weights file";
        let mut lines = input.lines().enumerate();
        let mut next_line = || -> Result<Option<(usize, String)>> {
            match lines.next() {
                Some((n, line)) => Ok(Some((n + 1, line.map_err(|e| Error::io("<weights>", e))?))),
                None => Ok(None),
            }
        };

        let (_, header) = next_line()?.ok_or_else(|| Error::parse(WHAT, 1, "missing header"))?;
        let mut fields = header.split(' ');
        if fields.next() != Some("term-class-weights") || fields.next() != Some("v1") {
            return Err(Error::parse(WHAT, 1, "unrecognized header"));
        }
        let mut field = |key: &str| -> Result<String> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(WHAT, 1, format!("missing {key}")))
        };
        let k: usize = field("K=")?
            .parse()
            .map_err(|_| Error::parse(WHAT, 1, "bad K"))?;
        let v: usize = field("V=")?
            .parse()
            .map_err(|_| Error::parse(WHAT, 1, "bad V"))?;
        let smoothing: f64 = field("smoothing=")?
            .parse()
            .map_err(|_| Error::parse(WHAT, 1, "bad smoothing"))?;

        let mut read_row = |expect_term: Option<&str>| -> Result<(String, Vec<f64>)> {
            let (n, line) = next_line()?.ok_or_else(|| Error::parse(WHAT, 0, "truncated file"))?;
            let mut parts = line.split('\t');
            let term = parts.next().unwrap_or_default().to_owned();
            if let Some(expected) = expect_term {
                if term != expected {
                    return Err(Error::parse(WHAT, n, format!("expected `{expected}` row")));
                }
            }
            let values = parts
                .next()
                .ok_or_else(|| Error::parse(WHAT, n, "missing weights"))?
                .split(' ')
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::parse(WHAT, n, "bad real"))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != k {
                return Err(Error::parse(WHAT, n, format!("expected {k} weights")));
            }
            Ok((term, values))
        };

        let (_, oov) = read_row(Some("<oov>"))?;
        let mut terms = Vec::with_capacity(v);
        let mut weights = Vec::with_capacity(v * k);
        for _ in 0..v {
            let (term, row) = read_row(None)?;
            terms.push(term);
            weights.extend(row);
        }
        TermClassWeights::from_parts(terms, k, weights, oov, smoothing)
    }
}

fn write_reals<W: Write>(out: &mut W, values: &[f64]) -> std::io::Result<()> {
    for (i, x) in values.iter().enumerate() {
        let sep = if i == 0 { '\t' } else { ' ' };
        write!(out, "{sep}{x:.16e}")?;
    }
    writeln!(out)
}

/// Fits the default smoothed class-conditional weights on the labeled part of `labeled`.
pub fn fit_term_weights(labeled: &Corpus, smoothing: f64) -> Result<TermClassWeights> {
    fit_with(labeled, &ClassConditionalFrequency { smoothing })
}

pub fn fit_with(labeled: &Corpus, scheme: &dyn TermWeighting) -> Result<TermClassWeights> {
    let stats = TermClassStats::collect(labeled)?;
    let weights = scheme.weigh(&stats)?;
    if weights.num_classes() != labeled.num_classes() {
        return Err(Error::Invariant(format!(
            "weighting produced {} columns for {} classes",
            weights.num_classes(),
            labeled.num_classes()
        )));
    }
    Ok(weights)
}

/// Component `j` is the mean over all tokens (OOV included) of `weight(t, C_j)`.
pub fn embed(doc: &Document, weights: &TermClassWeights) -> Result<DocVector> {
    if doc.tokens.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    let mut acc = vec![0.0; weights.num_classes()];
    for token in &doc.tokens {
        for (a, w) in acc.iter_mut().zip(weights.row(token)) {
            *a += w;
        }
    }
    let n = doc.tokens.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(DocVector(acc))
}

/// An embedded corpus, ready for clustering or classification.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedCorpus {
    classes: Arc<Vec<String>>,
    pub points: Vec<Point>,
    /// Documents with no tokens, left out of `points`.
    pub dropped: Vec<DocId>,
}

impl EmbeddedCorpus {
    pub fn new(classes: Vec<String>, points: Vec<Point>) -> Self {
        EmbeddedCorpus {
            classes: Arc::new(classes),
            points,
            dropped: Vec::new(),
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn vectors(&self) -> Vec<DocVector> {
        self.points.iter().map(|p| p.vector.clone()).collect()
    }
}

/// Embeds each document in order; empty documents are dropped and reported.
pub fn embed_corpus(corpus: &Corpus, weights: &TermClassWeights) -> EmbeddedCorpus {
    let mut points = Vec::with_capacity(corpus.len());
    let mut dropped = Vec::new();
    for (doc, label) in corpus.iter() {
        match embed(doc, weights) {
            Ok(vector) => points.push(Point {
                doc_id: doc.id.clone(),
                vector,
                label,
            }),
            Err(_) => dropped.push(doc.id.clone()),
        }
    }
    EmbeddedCorpus {
        classes: corpus.shared_classes(),
        points,
        dropped,
    }
}
