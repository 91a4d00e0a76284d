//! Nearest-centroid labeling against a [`ClusterModel`].

use rayon::prelude::*;

use crate::corpus::{ClassId, DocId};
use crate::error::{Error, Result};
use crate::representation::DocVector;
use crate::rkmeans::{ClusterModel, Point};

/// Outcome of classifying one vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub predicted: ClassId,
    /// Index into the model's final clusters.
    pub winning_cluster: usize,
    /// Distance to the winning centroid under the model's metric.
    pub distance: f64,
}

/// A labeled decision for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub doc_id: DocId,
    pub predicted: ClassId,
    pub winning_cluster: usize,
    pub distance: f64,
}

/// Label of the nearest centroid, under the metric the model was trained
/// with. Equal distances go to the lowest cluster index.
pub fn classify(vector: &DocVector, model: &ClusterModel) -> Result<Nearest> {
    if model.is_empty() {
        return Err(Error::EmptyInput("classify: model has no clusters"));
    }
    if vector.dim() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: vector.dim(),
        });
    }
    let (winning_cluster, distance) = model
        .distance
        .nearest(
            vector.as_slice(),
            model.centroids().map(DocVector::as_slice),
        )
        .expect("model is non-empty");
    Ok(Nearest {
        predicted: model.clusters[winning_cluster].label,
        winning_cluster,
        distance,
    })
}

/// [`classify`] over a batch, in input order.
pub fn classify_batch(vectors: &[DocVector], model: &ClusterModel) -> Result<Vec<Nearest>> {
    vectors.par_iter().map(|v| classify(v, model)).collect()
}

/// Classifies embedded documents, keeping their ids.
pub fn classify_points(points: &[Point], model: &ClusterModel) -> Result<Vec<Prediction>> {
    points
        .par_iter()
        .map(|p| {
            classify(&p.vector, model).map(|n| Prediction {
                doc_id: p.doc_id.clone(),
                predicted: n.predicted,
                winning_cluster: n.winning_cluster,
                distance: n.distance,
            })
        })
        .collect()
}
