//! Accuracy and micro/macro-averaged precision, recall and F-measure.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::classifier::Prediction;
use crate::corpus::{ClassId, DocId, GroundTruth};
use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![0; k * k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidConfig(format!(
                "confusion matrix must be {k}x{k}"
            )));
        }
        Ok(ConfusionMatrix {
            classes,
            counts: counts.into_iter().flatten().collect(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn get(&self, truth: ClassId, predicted: ClassId) -> u64 {
        self.counts[truth.index() * self.num_classes() + predicted.index()]
    }

    pub fn record(&mut self, truth: ClassId, predicted: ClassId) -> Result<()> {
        let k = self.num_classes();
        for c in [truth, predicted] {
            if c.index() >= k {
                return Err(Error::UnknownClass(c.to_string()));
            }
        }
        self.counts[truth.index() * k + predicted.index()] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes())
            .map(|c| self.get(ClassId::new(c), ClassId::new(c)))
            .sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks_exact(self.num_classes().max(1))
    }
}

pub fn confusion(predictions: &[Prediction], truth: &GroundTruth) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(truth.classes().to_vec());
    for p in predictions {
        let actual = truth
            .get(&p.doc_id)
            .ok_or_else(|| Error::UnknownDocument(p.doc_id.clone()))?;
        cm.record(actual, p.predicted)?;
    }
    Ok(cm)
}

/// A prediction that names its class, as read from a predictions file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedPrediction {
    pub doc_id: DocId,
    pub class: String,
}

/// Parses `doc_id<TAB>class_name[<TAB>...]` lines; extra fields are ignored.
pub fn read_predictions_tsv<R: BufRead>(input: R) -> Result<Vec<NamedPrediction>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<predictions>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(id), Some(class)) = (fields.next(), fields.next()) else {
            return Err(Error::parse(
                "predictions file",
                n + 1,
                "expected doc_id<TAB>class",
            ));
        };
        out.push(NamedPrediction {
            doc_id: DocId::new(id),
            class: class.to_owned(),
        });
    }
    Ok(out)
}

/// Confusion matrix for predictions given by class name.
pub fn confusion_named(
    predictions: &[NamedPrediction],
    truth: &GroundTruth,
) -> Result<ConfusionMatrix> {
    let index: HashMap<&str, usize> = truth
        .classes()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut cm = ConfusionMatrix::new(truth.classes().to_vec());
    for p in predictions {
        let actual = truth
            .get(&p.doc_id)
            .ok_or_else(|| Error::UnknownDocument(p.doc_id.clone()))?;
        let predicted = index
            .get(p.class.as_str())
            .ok_or_else(|| Error::UnknownClass(p.class.clone()))?;
        cm.record(actual, ClassId::new(*predicted))?;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_pr(precision: f64, recall: f64) -> Self {
        Prf {
            precision,
            recall,
            f1: harmonic(precision, recall),
        }
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub name: String,
    pub scores: Prf,
    /// True documents of this class.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassScore>,
    /// Unweighted means of the per-class precision, recall and F.
    pub macro_avg: Prf,
    /// Pooled over all decisions.
    pub micro_avg: Prf,
    /// Classes without any true document; included in the macro means at 0.
    pub zero_support: Vec<ClassId>,
    pub total: u64,
}

/// Scores a confusion matrix.
///
/// Undefined ratios (0/0) count as 0. The macro F-measure is the mean of
/// per-class F values, not the harmonic mean of macro P and R.
pub fn score(cm: &ConfusionMatrix) -> Result<EvalReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("score: confusion matrix is empty"));
    }
    let k = cm.num_classes();
    let (mut tp_all, mut fp_all, mut fn_all) = (0u64, 0u64, 0u64);
    let mut per_class = Vec::with_capacity(k);
    let mut zero_support = Vec::new();
    for c in 0..k {
        let class = ClassId::new(c);
        let tp = cm.get(class, class);
        let predicted: u64 = (0..k).map(|t| cm.get(ClassId::new(t), class)).sum();
        let support: u64 = (0..k).map(|p| cm.get(class, ClassId::new(p))).sum();
        let (fp, fneg) = (predicted - tp, support - tp);
        tp_all += tp;
        fp_all += fp;
        fn_all += fneg;
        if support == 0 {
            zero_support.push(class);
        }
        per_class.push(ClassScore {
            name: cm.classes[c].clone(),
            scores: Prf::from_pr(ratio(tp, tp + fp), ratio(tp, tp + fneg)),
            support,
        });
    }
    let mean = |f: fn(&Prf) -> f64| per_class.iter().map(|s| f(&s.scores)).sum::<f64>() / k as f64;
    let macro_avg = Prf {
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1: mean(|s| s.f1),
    };
    let micro_avg = Prf::from_pr(
        ratio(tp_all, tp_all + fp_all),
        ratio(tp_all, tp_all + fn_all),
    );
    Ok(EvalReport {
        accuracy: ratio(cm.trace(), total),
        per_class,
        macro_avg,
        micro_avg,
        zero_support,
        total,
    })
}

impl EvalReport {
    /// `metric=value` lines with 6 decimals.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: f64| {
            let _ = writeln!(out, "{key}={value:.6}");
        };
        put("accuracy", self.accuracy);
        put("macro_precision", self.macro_avg.precision);
        put("macro_recall", self.macro_avg.recall);
        put("macro_f1", self.macro_avg.f1);
        put("micro_precision", self.micro_avg.precision);
        put("micro_recall", self.micro_avg.recall);
        put("micro_f1", self.micro_avg.f1);
        for class in &self.per_class {
            put(
                &format!("class.{}.precision", class.name),
                class.scores.precision,
            );
            put(&format!("class.{}.recall", class.name), class.scores.recall);
            put(&format!("class.{}.f1", class.name), class.scores.f1);
        }
        let _ = writeln!(out, "documents={}", self.total);
        if !self.zero_support.is_empty() {
            let names: Vec<&str> = self
                .zero_support
                .iter()
                .map(|c| self.per_class[c.index()].name.as_str())
                .collect();
            let _ = writeln!(out, "zero_support={}", names.join(","));
        }
        out
    }
}
