use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};
use crate::representation::DocVector;

/// Dissimilarity used for assignment and classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    /// Squared Euclidean distance.
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`; 1 when either vector is zero.
    Cosine,
}

impl Distance {
    pub fn between(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => squared_euclidean(a, b),
            Distance::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
                }
            }
        }
    }

    /// Index and distance of the nearest of `centroids`; ties go to the lowest index.
    pub fn nearest<'a>(
        self,
        v: &[f64],
        centroids: impl IntoIterator<Item = &'a [f64]>,
    ) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in centroids.into_iter().enumerate() {
            let d = self.between(v, c);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Euclidean => "euclidean",
            Distance::Cosine => "cosine",
        })
    }
}

impl FromStr for Distance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Distance::Euclidean),
            "cosine" => Ok(Distance::Cosine),
            other => Err(format!(
                "unknown distance `{other}` (expected euclidean|cosine)"
            )),
        }
    }
}

pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// What to do when Lloyd's assignment step leaves a cluster without members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyClusterPolicy {
    /// Move the point farthest from its centroid (taken from a cluster with
    /// at least two members) into the empty cluster.
    #[default]
    ReseedFarthest,
    /// Remove the cluster.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub distance: Distance,
    pub max_iterations: usize,
    /// Stop once no centroid moves farther than this (Euclidean norm).
    pub centroid_shift_tolerance: f64,
    pub rng_seed: u64,
    pub empty_cluster_policy: EmptyClusterPolicy,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            distance: Distance::Euclidean,
            max_iterations: 100,
            centroid_shift_tolerance: 1e-6,
            rng_seed: 0,
            empty_cluster_policy: EmptyClusterPolicy::ReseedFarthest,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.centroid_shift_tolerance.is_nan() || self.centroid_shift_tolerance <= 0.0 {
            return Err(Error::InvalidConfig(
                "centroid_shift_tolerance must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// A K-means cluster: member positions in the input slice and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub centroid: DocVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub clusters: Vec<Cluster>,
    pub iterations: usize,
    pub converged: bool,
    /// Squared-Euclidean within-cluster SSE: entry 0 is the seed assignment
    /// measured against the seeds, entry `t` the state after iteration `t`.
    /// Non-increasing under [`Distance::Euclidean`].
    pub sse_history: Vec<f64>,
}

/// Lloyd's algorithm from explicit initial centroids.
///
/// Assignment ties go to the lowest cluster index. Every input point belongs
/// to exactly one returned cluster, and every returned centroid is the mean
/// of its members.
pub fn kmeans(points: &[Point], seeds: &[DocVector], config: &KMeansConfig) -> Result<KMeansRun> {
    let vectors: Vec<&[f64]> = points.iter().map(|p| p.vector.as_slice()).collect();
    let seeds: Vec<&[f64]> = seeds.iter().map(DocVector::as_slice).collect();
    lloyd(&vectors, &seeds, config)
}

pub(crate) fn lloyd(
    vectors: &[&[f64]],
    seeds: &[&[f64]],
    config: &KMeansConfig,
) -> Result<KMeansRun> {
    config.validate()?;
    if vectors.is_empty() {
        return Err(Error::EmptyInput("kmeans: no points"));
    }
    if seeds.is_empty() {
        return Err(Error::EmptyInput("kmeans: no initial seeds"));
    }
    let dim = seeds[0].len();
    for v in vectors.iter().chain(seeds) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }

    let metric = config.distance;
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|s| s.to_vec()).collect();
    let mut assignment = vec![0usize; vectors.len()];
    let mut sse_history = Vec::with_capacity(config.max_iterations + 1);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        iterations += 1;
        for (slot, v) in assignment.iter_mut().zip(vectors) {
            *slot = metric
                .nearest(v, centroids.iter().map(Vec::as_slice))
                .expect("at least one centroid")
                .0;
        }
        repair_empty(
            vectors,
            &mut assignment,
            &mut centroids,
            config.empty_cluster_policy,
        );
        if iterations == 1 {
            sse_history.push(sse(vectors, &assignment, &centroids));
        }

        let means = cluster_means(vectors, &assignment, centroids.len(), dim);
        let shift = centroids
            .iter()
            .zip(&means)
            .map(|(old, new)| squared_euclidean(old, new).sqrt())
            .fold(0.0, f64::max);
        centroids = means;
        sse_history.push(sse(vectors, &assignment, &centroids));
        if shift < config.centroid_shift_tolerance {
            converged = true;
            break;
        }
    }

    let mut members = vec![Vec::new(); centroids.len()];
    for (i, &c) in assignment.iter().enumerate() {
        members[c].push(i);
    }
    let clusters = members
        .into_iter()
        .zip(centroids)
        .map(|(members, centroid)| Cluster {
            members,
            centroid: DocVector::new(centroid),
        })
        .collect();
    Ok(KMeansRun {
        clusters,
        iterations,
        converged,
        sse_history,
    })
}

fn cluster_means(vectors: &[&[f64]], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (v, &c) in vectors.iter().zip(assignment) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(v.iter()) {
            *s += x;
        }
    }
    for (sum, n) in sums.iter_mut().zip(counts) {
        debug_assert!(n > 0, "empty clusters are repaired before the update step");
        for s in sum.iter_mut() {
            *s /= n as f64;
        }
    }
    sums
}

fn sse(vectors: &[&[f64]], assignment: &[usize], centroids: &[Vec<f64>]) -> f64 {
    vectors
        .iter()
        .zip(assignment)
        .map(|(v, &c)| squared_euclidean(v, &centroids[c]))
        .sum()
}

/// Ensures every cluster has at least one member, reseeding or dropping
/// empty ones according to `policy`.
fn repair_empty(
    vectors: &[&[f64]],
    assignment: &mut [usize],
    centroids: &mut Vec<Vec<f64>>,
    policy: EmptyClusterPolicy,
) {
    let mut counts = vec![0usize; centroids.len()];
    for &c in assignment.iter() {
        counts[c] += 1;
    }
    if counts.iter().all(|&n| n > 0) {
        return;
    }

    if policy == EmptyClusterPolicy::ReseedFarthest {
        for empty in 0..centroids.len() {
            if counts[empty] > 0 {
                continue;
            }
            let donor = assignment
                .iter()
                .enumerate()
                .filter(|(_, &c)| counts[c] >= 2)
                .map(|(i, &c)| (i, squared_euclidean(vectors[i], &centroids[c])))
                .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            if let Some((i, _)) = donor {
                counts[assignment[i]] -= 1;
                assignment[i] = empty;
                counts[empty] = 1;
                centroids[empty] = vectors[i].to_vec();
            }
        }
    }

    // whatever is still empty gets dropped
    if counts.contains(&0) {
        let mut remap = vec![usize::MAX; centroids.len()];
        let mut kept = Vec::with_capacity(centroids.len());
        for (old, centroid) in std::mem::take(centroids).into_iter().enumerate() {
            if counts[old] > 0 {
                remap[old] = kept.len();
                kept.push(centroid);
            }
        }
        *centroids = kept;
        for c in assignment.iter_mut() {
            *c = remap[*c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn run(values: &[f64], seeds: &[f64], config: &KMeansConfig) -> KMeansRun {
        let vectors: Vec<Vec<f64>> = values.iter().map(|&x| vec![x]).collect();
        let seeds: Vec<Vec<f64>> = seeds.iter().map(|&x| vec![x]).collect();
        let v: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
        let s: Vec<&[f64]> = seeds.iter().map(Vec::as_slice).collect();
        lloyd(&v, &s, config).unwrap()
    }

    #[test]
    fn separable_one_dimensional() {
        let out = run(&[0.0, 0.1, 0.9, 1.0], &[0.0, 1.0], &KMeansConfig::default());
        assert_eq!(out.clusters[0].members, vec![0, 1]);
        assert_eq!(out.clusters[1].members, vec![2, 3]);
        assert_relative_eq!(
            out.clusters[0].centroid.as_slice()[0],
            0.05,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            out.clusters[1].centroid.as_slice()[0],
            0.95,
            epsilon = 1e-12
        );
        assert!(out.converged);
    }

    #[test]
    fn single_seed_collects_everything() {
        let out = run(&[3.0, -1.0, 4.0, 2.0], &[100.0], &KMeansConfig::default());
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].members.len(), 4);
        assert_relative_eq!(out.clusters[0].centroid.as_slice()[0], 2.0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // 0.5 is equidistant from both seeds
        let config = KMeansConfig {
            max_iterations: 1,
            ..KMeansConfig::default()
        };
        let out = run(&[0.5, 0.0, 1.0], &[0.0, 1.0], &config);
        assert_eq!(out.clusters[0].members, vec![0, 1]);
    }

    #[test]
    fn empty_cluster_is_reseeded_from_farthest_point() {
        // seed 50 captures nothing
        let out = run(
            &[0.0, 0.2, 0.4, 10.0],
            &[0.0, 50.0, 60.0],
            &KMeansConfig::default(),
        );
        assert_eq!(out.clusters.len(), 3);
        assert!(out.clusters.iter().all(|c| !c.members.is_empty()));
    }

    #[test]
    fn empty_cluster_drop_policy() {
        let config = KMeansConfig {
            empty_cluster_policy: EmptyClusterPolicy::Drop,
            ..KMeansConfig::default()
        };
        let out = run(&[0.0, 0.2, 0.4], &[0.0, 50.0], &config);
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn more_seeds_than_points_drops_the_excess() {
        let out = run(&[1.0, 2.0], &[1.0, 2.0, 3.0], &KMeansConfig::default());
        assert_eq!(out.clusters.len(), 2);
    }

    #[test]
    fn errors() {
        let config = KMeansConfig::default();
        assert!(matches!(
            lloyd(&[], &[&[0.0][..]], &config),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            lloyd(&[&[0.0][..]], &[], &config),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            lloyd(&[&[0.0, 1.0][..]], &[&[0.0][..]], &config),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = KMeansConfig {
            max_iterations: 0,
            ..config
        };
        assert!(lloyd(&[&[0.0][..]], &[&[0.0][..]], &bad).is_err());
    }

    #[test]
    fn cosine_distance() {
        assert_relative_eq!(Distance::Cosine.between(&[1.0, 0.0], &[2.0, 0.0]), 0.0);
        assert_relative_eq!(Distance::Cosine.between(&[1.0, 0.0], &[0.0, 3.0]), 1.0);
        assert_eq!(Distance::Cosine.between(&[0.0, 0.0], &[0.0, 3.0]), 1.0);
        assert_eq!("cosine".parse::<Distance>().unwrap(), Distance::Cosine);
        assert!("manhattan".parse::<Distance>().is_err());
    }

    #[test]
    fn sse_never_increases() {
        let values = [0.3, 0.9, 0.1, 0.75, 0.5, 0.45, 0.05, 0.99, 0.62];
        let out = run(&values, &[0.3, 0.5, 0.62], &KMeansConfig::default());
        for pair in out.sse_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }
}
