//! Recursive K-means for semi-supervised learning.
//!
//! The training collection (a few labeled points, many unlabeled) is
//! clustered with K seeds, one labeled point per class present. A cluster
//! whose labeled members come from several classes is clustered again
//! whenever some minority class reaches more than `th_percent` percent of the
//! majority class count. Clusters that survive become final; each takes its
//! majority label and passes it on to its unlabeled members.

mod lloyd;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, DocId};
use crate::error::{Error, Result};
use crate::representation::{DocVector, EmbeddedCorpus};
use crate::seeding::{stage_rng, Stage};

pub use lloyd::{
    kmeans, squared_euclidean, Cluster, Distance, EmptyClusterPolicy, KMeansConfig, KMeansRun,
};

/// A document in the clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub doc_id: DocId,
    pub vector: DocVector,
    /// Present iff the document is in the labeled set.
    pub label: Option<ClassId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkmConfig {
    /// Relative-percentage threshold above which a minority class forces re-clustering.
    pub th_percent: f64,
    pub max_recursion_depth: usize,
    /// Clusters smaller than this are accepted without re-clustering.
    /// `None` means twice the number of classes present in the cluster.
    pub min_cluster_size_for_recursion: Option<usize>,
    pub kmeans: KMeansConfig,
}

impl Default for RkmConfig {
    fn default() -> Self {
        RkmConfig {
            th_percent: 5.0,
            max_recursion_depth: 16,
            min_cluster_size_for_recursion: None,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl RkmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.th_percent) {
            return Err(Error::InvalidConfig(format!(
                "th_percent must lie in [0, 100], got {}",
                self.th_percent
            )));
        }
        if self.max_recursion_depth == 0 {
            return Err(Error::InvalidConfig(
                "max_recursion_depth must be >= 1".into(),
            ));
        }
        self.kmeans.validate()
    }

    fn min_size(&self, ncp: usize) -> usize {
        self.min_cluster_size_for_recursion.unwrap_or(2 * ncp)
    }
}

/// NCP and LSP of a cluster: labeled-member counts per class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    counts: BTreeMap<ClassId, usize>,
}

impl ClassStats {
    pub fn from_labels(labels: impl IntoIterator<Item = Option<ClassId>>) -> Self {
        let mut counts = BTreeMap::new();
        for label in labels.into_iter().flatten() {
            *counts.entry(label).or_insert(0) += 1;
        }
        ClassStats { counts }
    }

    /// Number of distinct classes among labeled members.
    pub fn ncp(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, class: ClassId) -> usize {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn labeled(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, usize)> + '_ {
        self.counts.iter().map(|(c, n)| (*c, *n))
    }
}

pub fn cluster_class_stats(cluster: &Cluster, points: &[Point]) -> ClassStats {
    ClassStats::from_labels(cluster.members.iter().map(|&i| points[i].label))
}

/// Majority class; ties go to the lowest class index.
pub fn assign_cluster_label(stats: &ClassStats) -> Result<ClassId> {
    stats
        .iter()
        .fold(
            None,
            |best: Option<(ClassId, usize)>, (class, n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((class, n)),
            },
        )
        .map(|(class, _)| class)
        .ok_or(Error::NoLabeledPoints)
}

/// `100 * LSP[other] / LSP[majority]`.
pub fn relative_percentage(stats: &ClassStats, majority: ClassId, other: ClassId) -> Result<f64> {
    let base = stats.count(majority);
    if base == 0 {
        return Err(Error::InvalidConfig(format!(
            "majority class {majority} has no labeled samples"
        )));
    }
    Ok(stats.count(other) as f64 / base as f64 * 100.0)
}

/// One seed per class present among labeled points, drawn uniformly from
/// that class, ordered by class index.
pub fn choose_initial_seeds(points: &[Point], rng_seed: u64) -> Result<Vec<(ClassId, DocVector)>> {
    let refs: Vec<&Point> = points.iter().collect();
    let mut rng = stage_rng(rng_seed, Stage::Clustering);
    Ok(seeds_from(&refs, &mut rng)?
        .into_iter()
        .map(|(class, p)| (class, p.vector.clone()))
        .collect())
}

fn seeds_from<'a, R: Rng>(points: &[&'a Point], rng: &mut R) -> Result<Vec<(ClassId, &'a Point)>> {
    let mut by_class: BTreeMap<ClassId, Vec<&Point>> = BTreeMap::new();
    for p in points {
        if let Some(label) = p.label {
            by_class.entry(label).or_default().push(p);
        }
    }
    if by_class.is_empty() {
        return Err(Error::NoLabeledPoints);
    }
    Ok(by_class
        .into_iter()
        .map(|(class, members)| (class, *members.choose(rng).expect("non-empty")))
        .collect())
}

/// Why a cluster became final.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceptance {
    /// Labeled members from a single class.
    SingleClass,
    /// Several classes, every minority at or below the threshold.
    WithinThreshold,
    /// Would have been re-clustered, but the recursion depth limit was reached.
    DepthLimit,
    /// Would have been re-clustered, but is below the minimum size for recursion.
    BelowMinSize,
    /// No labeled members; labeled after the nearest labeled sibling.
    Orphan,
}

impl Acceptance {
    pub fn is_fallback(self) -> bool {
        matches!(self, Acceptance::DepthLimit | Acceptance::BelowMinSize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalCluster {
    pub label: ClassId,
    pub centroid: DocVector,
    pub members: Vec<DocId>,
    /// LSP at acceptance time.
    pub class_counts: ClassStats,
    pub depth: usize,
    pub acceptance: Acceptance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub th_percent: f64,
    pub rng_seed: u64,
    /// Deepest recursion level at which K-means ran (top level is 0).
    pub max_depth_reached: usize,
    /// Number of K-means calls, the top-level one included.
    pub kmeans_calls: usize,
    pub recursions: usize,
    pub fallback_acceptances: usize,
    pub orphan_clusters: usize,
}

/// The learned knowledgebase: final clusters, centroids and labels.
///
/// Serialized as a JSON document whose top level carries `format`, `k`,
/// `m`, `dimension`, `distance`, `th_percent` and `seed`, followed by the
/// class names, the clusters (label, centroid, member ids, labeled counts,
/// depth, acceptance reason), the training label map and run metadata.
/// Reals are written in shortest round-trip form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct ClusterModel {
    pub classes: Vec<String>,
    pub dimension: usize,
    pub distance: Distance,
    pub clusters: Vec<FinalCluster>,
    /// Label given to every unlabeled training document.
    pub training_label_assignments: BTreeMap<DocId, ClassId>,
    pub metadata: RunMetadata,
}

impl ClusterModel {
    /// M.
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn centroids(&self) -> impl Iterator<Item = &DocVector> {
        self.clusters.iter().map(|c| &c.centroid)
    }

    pub fn labels(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.clusters.iter().map(|c| c.label)
    }

    pub fn class_name(&self, class: ClassId) -> &str {
        &self.classes[class.index()]
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    /// Structural checks: table sizes, label ranges, centroid dimensions.
    pub fn check(&self) -> Result<()> {
        for (m, cluster) in self.clusters.iter().enumerate() {
            if cluster.label.index() >= self.classes.len() {
                return Err(Error::Invariant(format!(
                    "cluster {m} has out-of-range label"
                )));
            }
            if cluster.centroid.dim() != self.dimension {
                return Err(Error::Invariant(format!(
                    "cluster {m} centroid has wrong dimension"
                )));
            }
        }
        if let Some((id, _)) = self
            .training_label_assignments
            .iter()
            .find(|(_, c)| c.index() >= self.classes.len())
        {
            return Err(Error::Invariant(format!(
                "training label for `{id}` out of range"
            )));
        }
        Ok(())
    }
}

const MODEL_FORMAT: &str = "rkmssl-model/1";

/// On-disk layout of a [`ClusterModel`]: explicit K, M and run parameters
/// up front, then the clusters and training label map.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    k: usize,
    m: usize,
    dimension: usize,
    distance: Distance,
    th_percent: f64,
    seed: u64,
    classes: Vec<String>,
    clusters: Vec<FinalCluster>,
    training_label_assignments: BTreeMap<DocId, ClassId>,
    metadata: RunMetadata,
}

impl From<ClusterModel> for ModelFile {
    fn from(model: ClusterModel) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_owned(),
            k: model.classes.len(),
            m: model.clusters.len(),
            dimension: model.dimension,
            distance: model.distance,
            th_percent: model.metadata.th_percent,
            seed: model.metadata.rng_seed,
            classes: model.classes,
            clusters: model.clusters,
            training_label_assignments: model.training_label_assignments,
            metadata: model.metadata,
        }
    }
}

impl TryFrom<ModelFile> for ClusterModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        if file.format != MODEL_FORMAT {
            return Err(Error::parse(
                "model file",
                0,
                format!("unsupported format `{}`", file.format),
            ));
        }
        if file.k != file.classes.len() || file.m != file.clusters.len() {
            return Err(Error::parse(
                "model file",
                0,
                "header counts disagree with contents",
            ));
        }
        let model = ClusterModel {
            classes: file.classes,
            dimension: file.dimension,
            distance: file.distance,
            clusters: file.clusters,
            training_label_assignments: file.training_label_assignments,
            metadata: file.metadata,
        };
        model.check()?;
        Ok(model)
    }
}

struct Recursion<'a, R> {
    points: &'a [Point],
    config: &'a RkmConfig,
    rng: R,
    finals: Vec<(
        Vec<usize>,
        DocVector,
        ClassId,
        ClassStats,
        usize,
        Acceptance,
    )>,
    metadata: RunMetadata,
}

impl<R: Rng> Recursion<'_, R> {
    /// Clusters `subset` (positions into `points`) and recurses into impure
    /// clusters, appending final clusters in depth-first order.
    fn run(&mut self, subset: &[usize], depth: usize) -> Result<()> {
        let refs: Vec<&Point> = subset.iter().map(|&i| &self.points[i]).collect();
        let seeds = seeds_from(&refs, &mut self.rng)?;
        let vectors: Vec<&[f64]> = refs.iter().map(|p| p.vector.as_slice()).collect();
        let seed_vectors: Vec<&[f64]> = seeds.iter().map(|(_, p)| p.vector.as_slice()).collect();
        let run = lloyd::lloyd(&vectors, &seed_vectors, &self.config.kmeans)?;

        self.metadata.kmeans_calls += 1;
        self.metadata.max_depth_reached = self.metadata.max_depth_reached.max(depth);

        let partition: Vec<(Vec<usize>, DocVector, ClassStats)> = run
            .clusters
            .into_iter()
            .map(|c| {
                let members: Vec<usize> = c.members.iter().map(|&j| subset[j]).collect();
                let stats = ClassStats::from_labels(members.iter().map(|&i| self.points[i].label));
                (members, c.centroid, stats)
            })
            .collect();

        for (index, (members, centroid, stats)) in partition.iter().enumerate() {
            if stats.ncp() == 0 {
                let label = self.orphan_label(index, &partition)?;
                self.metadata.orphan_clusters += 1;
                self.accept(members, centroid, label, stats, depth, Acceptance::Orphan);
                continue;
            }
            let majority = assign_cluster_label(stats)?;
            if stats.ncp() == 1 {
                self.accept(
                    members,
                    centroid,
                    majority,
                    stats,
                    depth,
                    Acceptance::SingleClass,
                );
                continue;
            }

            // stop at the first minority class past the threshold
            let mut exceeds = false;
            for (class, _) in stats.iter().filter(|(c, _)| *c != majority) {
                if relative_percentage(stats, majority, class)? > self.config.th_percent {
                    exceeds = true;
                    break;
                }
            }
            if !exceeds {
                self.accept(
                    members,
                    centroid,
                    majority,
                    stats,
                    depth,
                    Acceptance::WithinThreshold,
                );
            } else if depth >= self.config.max_recursion_depth {
                self.accept(
                    members,
                    centroid,
                    majority,
                    stats,
                    depth,
                    Acceptance::DepthLimit,
                );
            } else if members.len() < self.config.min_size(stats.ncp()) {
                self.accept(
                    members,
                    centroid,
                    majority,
                    stats,
                    depth,
                    Acceptance::BelowMinSize,
                );
            } else {
                self.metadata.recursions += 1;
                self.run(members, depth + 1)?;
            }
        }
        Ok(())
    }

    fn orphan_label(
        &self,
        orphan: usize,
        partition: &[(Vec<usize>, DocVector, ClassStats)],
    ) -> Result<ClassId> {
        let metric = self.config.kmeans.distance;
        let origin = partition[orphan].1.as_slice();
        let mut best: Option<(f64, &ClassStats)> = None;
        for (_, centroid, stats) in partition.iter().filter(|(_, _, s)| s.ncp() > 0) {
            let d = metric.between(origin, centroid.as_slice());
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, stats));
            }
        }
        let (_, stats) = best.ok_or(Error::Invariant(
            "partition has no cluster with labeled members".into(),
        ))?;
        assign_cluster_label(stats)
    }

    fn accept(
        &mut self,
        members: &[usize],
        centroid: &DocVector,
        label: ClassId,
        stats: &ClassStats,
        depth: usize,
        acceptance: Acceptance,
    ) {
        if acceptance.is_fallback() {
            self.metadata.fallback_acceptances += 1;
        }
        self.finals.push((
            members.to_vec(),
            centroid.clone(),
            label,
            stats.clone(),
            depth,
            acceptance,
        ));
    }
}

/// Runs the recursive clustering on `points` starting at `depth` with the
/// given RNG, returning the final clusters (as positions into `points`)
/// and run metadata.
pub fn rkmssl<R: Rng>(
    points: &[Point],
    config: &RkmConfig,
    depth: usize,
    rng: R,
) -> Result<(Vec<FinalCluster>, RunMetadata)> {
    config.validate()?;
    if depth > config.max_recursion_depth {
        return Err(Error::InvalidConfig(format!(
            "start depth {depth} exceeds max_recursion_depth {}",
            config.max_recursion_depth
        )));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("rkmssl: no points"));
    }
    let mut recursion = Recursion {
        points,
        config,
        rng,
        finals: Vec::new(),
        metadata: RunMetadata {
            th_percent: config.th_percent,
            rng_seed: config.kmeans.rng_seed,
            ..RunMetadata::default()
        },
    };
    let all: Vec<usize> = (0..points.len()).collect();
    recursion.run(&all, depth)?;

    let clusters = recursion
        .finals
        .into_iter()
        .map(
            |(members, centroid, label, class_counts, depth, acceptance)| FinalCluster {
                label,
                centroid,
                members: members.iter().map(|&i| points[i].doc_id.clone()).collect(),
                class_counts,
                depth,
                acceptance,
            },
        )
        .collect();
    Ok((clusters, recursion.metadata))
}

/// Builds the knowledgebase from an embedded training collection.
///
/// Every class of `training` must have at least one labeled point. The RNG
/// is derived from `config.kmeans.rng_seed`.
pub fn build_model(training: &EmbeddedCorpus, config: &RkmConfig) -> Result<ClusterModel> {
    let points = &training.points;
    let classes = training.classes().to_vec();
    let present: BTreeSet<ClassId> = points.iter().filter_map(|p| p.label).collect();
    if present.is_empty() {
        return Err(Error::NoLabeledPoints);
    }
    if let Some(missing) = (0..classes.len())
        .map(ClassId::new)
        .find(|c| !present.contains(c))
    {
        return Err(Error::EmptyClass(classes[missing.index()].clone()));
    }
    if let Some(bad) = present.iter().find(|c| c.index() >= classes.len()) {
        return Err(Error::UnknownClass(bad.to_string()));
    }
    let mut ids = BTreeSet::new();
    if let Some(dup) = points.iter().find(|p| !ids.insert(&p.doc_id)) {
        return Err(Error::DuplicateDocument(dup.doc_id.clone()));
    }
    let dimension = points[0].vector.dim();
    if let Some(p) = points.iter().find(|p| p.vector.dim() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            found: p.vector.dim(),
        });
    }

    let rng = stage_rng(config.kmeans.rng_seed, Stage::Clustering);
    let (clusters, metadata) = rkmssl(points, config, 0, rng)?;

    let label_of: BTreeMap<&DocId, Option<ClassId>> =
        points.iter().map(|p| (&p.doc_id, p.label)).collect();
    let mut training_label_assignments = BTreeMap::new();
    for cluster in &clusters {
        for id in &cluster.members {
            if label_of[id].is_none()
                && training_label_assignments
                    .insert(id.clone(), cluster.label)
                    .is_some()
            {
                return Err(Error::Invariant(format!(
                    "document `{id}` in two final clusters"
                )));
            }
        }
    }

    let model = ClusterModel {
        classes,
        dimension,
        distance: config.kmeans.distance,
        clusters,
        training_label_assignments,
        metadata,
    };
    model.check()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(id: &str, x: &[f64], label: Option<usize>) -> Point {
        Point {
            doc_id: DocId::new(id),
            vector: DocVector::new(x.to_vec()),
            label: label.map(ClassId::new),
        }
    }

    fn embedded(k: usize, points: Vec<Point>) -> EmbeddedCorpus {
        EmbeddedCorpus::new((0..k).map(|c| format!("class{c}")).collect(), points)
    }

    fn stats(pairs: &[(usize, usize)]) -> ClassStats {
        ClassStats::from_labels(
            pairs
                .iter()
                .flat_map(|&(c, n)| std::iter::repeat_n(Some(ClassId::new(c)), n)),
        )
    }

    #[test]
    fn class_stats_ignore_unlabeled() {
        let s = ClassStats::from_labels([
            Some(ClassId::new(0)),
            Some(ClassId::new(0)),
            Some(ClassId::new(1)),
            None,
        ]);
        assert_eq!(s.ncp(), 2);
        assert_eq!(s.count(ClassId::new(0)), 2);
        assert_eq!(s.count(ClassId::new(1)), 1);
        let none = ClassStats::from_labels([None, None]);
        assert_eq!(none.ncp(), 0);
        assert_eq!(stats(&[(0, 1)]).ncp(), 1);
    }

    #[test]
    fn cluster_class_stats_recount_members() {
        let points = vec![
            point("a", &[0.0], Some(0)),
            point("b", &[0.0], None),
            point("c", &[0.0], Some(1)),
        ];
        let cluster = Cluster {
            members: vec![0, 1],
            centroid: DocVector::new(vec![0.0]),
        };
        assert_eq!(cluster_class_stats(&cluster, &points), stats(&[(0, 1)]));
    }

    #[test]
    fn majority_label_and_ties() {
        assert_eq!(
            assign_cluster_label(&stats(&[(0, 5), (1, 2)])).unwrap(),
            ClassId::new(0)
        );
        assert_eq!(
            assign_cluster_label(&stats(&[(1, 3), (2, 3)])).unwrap(),
            ClassId::new(1)
        );
        assert_eq!(
            assign_cluster_label(&stats(&[(1, 1)])).unwrap(),
            ClassId::new(1)
        );
        assert!(assign_cluster_label(&ClassStats::default()).is_err());
    }

    #[test]
    fn relative_percentage_formula() {
        let (a, b) = (ClassId::new(0), ClassId::new(1));
        assert_eq!(
            relative_percentage(&stats(&[(0, 10), (1, 1)]), a, b).unwrap(),
            10.0
        );
        assert_eq!(
            relative_percentage(&stats(&[(0, 4), (1, 4)]), a, b).unwrap(),
            100.0
        );
        assert_eq!(relative_percentage(&stats(&[(0, 7)]), a, b).unwrap(), 0.0);
        assert_eq!(
            relative_percentage(&stats(&[(0, 100), (1, 2)]), a, b).unwrap(),
            2.0
        );
        assert!(relative_percentage(&stats(&[(1, 3)]), a, b).is_err());
    }

    #[test]
    fn seeds_one_per_class() {
        let points = vec![
            point("a", &[0.0], Some(0)),
            point("u", &[0.5], None),
            point("b", &[1.0], Some(1)),
        ];
        let seeds = choose_initial_seeds(&points, 3).unwrap();
        assert_eq!(
            seeds,
            vec![
                (ClassId::new(0), DocVector::new(vec![0.0])),
                (ClassId::new(1), DocVector::new(vec![1.0]))
            ]
        );

        let many: Vec<Point> = (0..30)
            .map(|i| point(&format!("p{i}"), &[i as f64], Some(i % 3)))
            .collect();
        let a = choose_initial_seeds(&many, 9).unwrap();
        assert_eq!(a.len(), 3);
        let labels: BTreeSet<_> = a.iter().map(|(c, _)| *c).collect();
        assert_eq!(labels.len(), 3);
        for (class, v) in &a {
            assert_eq!(v.as_slice()[0] as usize % 3, class.index());
        }
        assert_eq!(a, choose_initial_seeds(&many, 9).unwrap());

        assert!(matches!(
            choose_initial_seeds(&[point("u", &[0.0], None)], 0),
            Err(Error::NoLabeledPoints)
        ));
    }

    #[test]
    fn two_separated_classes_label_their_neighbors() {
        let points = vec![
            point("a1", &[0.0], Some(0)),
            point("a2", &[0.1], Some(0)),
            point("b1", &[0.9], Some(1)),
            point("b2", &[1.0], Some(1)),
            point("u1", &[0.05], None),
            point("u2", &[0.95], None),
        ];
        let model = build_model(&embedded(2, points), &RkmConfig::default()).unwrap();
        assert_eq!(model.len(), 2);
        assert_eq!(
            model.training_label_assignments[&DocId::new("u1")],
            ClassId::new(0)
        );
        assert_eq!(
            model.training_label_assignments[&DocId::new("u2")],
            ClassId::new(1)
        );
        assert_eq!(model.metadata.recursions, 0);
    }

    #[test]
    fn single_class_gives_one_cluster() {
        let points = vec![
            point("a", &[0.0, 1.0], Some(0)),
            point("u1", &[5.0, 2.0], None),
            point("u2", &[-3.0, 0.0], None),
        ];
        let model = build_model(&embedded(1, points), &RkmConfig::default()).unwrap();
        assert_eq!(model.len(), 1);
        assert_eq!(model.training_label_assignments.len(), 2);
        assert!(model
            .training_label_assignments
            .values()
            .all(|c| c.index() == 0));
        assert_eq!(model.metadata.recursions, 0);
        assert_eq!(model.clusters[0].acceptance, Acceptance::SingleClass);
    }

    #[test]
    fn minority_below_threshold_is_absorbed() {
        // 100 A and 2 B sit together; 2% <= 5% so no recursion
        let mut points: Vec<Point> = (0..100)
            .map(|i| point(&format!("a{i}"), &[i as f64 * 1e-3], Some(0)))
            .collect();
        points.push(point("b0", &[0.01], Some(1)));
        points.push(point("b1", &[0.02], Some(1)));
        points.push(point("far", &[100.0], Some(1)));
        points.push(point("u", &[0.03], None));
        let model = build_model(&embedded(2, points), &RkmConfig::default()).unwrap();
        let near = model
            .clusters
            .iter()
            .find(|c| c.members.contains(&DocId::new("u")))
            .unwrap();
        assert_eq!(near.label, ClassId::new(0));
        assert_eq!(near.acceptance, Acceptance::WithinThreshold);
        assert_eq!(near.class_counts.count(ClassId::new(1)), 2);
        assert_eq!(model.metadata.recursions, 0);
    }

    #[test]
    fn interleaved_classes_fall_back_at_depth_limit() {
        // identical vectors cannot be split by any K-means run
        let mut points = Vec::new();
        for i in 0..6 {
            points.push(point(&format!("p{i}"), &[1.0, 1.0], Some(i % 2)));
        }
        points.push(point("u", &[1.0, 1.0], None));
        let config = RkmConfig {
            max_recursion_depth: 1,
            ..RkmConfig::default()
        };
        let model = build_model(&embedded(2, points), &config).unwrap();
        assert!(model.clusters.iter().any(|c| c.acceptance.is_fallback()));
        assert!(model.metadata.fallback_acceptances >= 1);
        assert_eq!(model.metadata.max_depth_reached, 1);
        assert!(model
            .training_label_assignments
            .contains_key(&DocId::new("u")));
    }

    #[test]
    fn small_impure_cluster_is_accepted_below_min_size() {
        // whichever class-0 seed is drawn, the split is {a, b} | {c, e}
        let points = vec![
            point("a", &[0.0], Some(0)),
            point("b", &[0.5], Some(1)),
            point("c", &[10.0], Some(0)),
            point("e", &[10.0], Some(0)),
        ];
        let model = build_model(&embedded(2, points), &RkmConfig::default()).unwrap();
        let mixed = model
            .clusters
            .iter()
            .find(|c| c.class_counts.ncp() == 2)
            .unwrap();
        assert_eq!(mixed.acceptance, Acceptance::BelowMinSize);
        assert_eq!(mixed.label, ClassId::new(0));
    }

    #[test]
    fn recursion_splits_impure_clusters() {
        // four classes in two well separated pairs; two seeds of the same
        // pair can both be drawn through the recursion
        let centers = [[0.0, 0.0], [0.0, 1.0], [20.0, 0.0], [20.0, 1.0]];
        let mut points = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for i in 0..5 {
                let jitter = i as f64 * 0.01;
                points.push(point(
                    &format!("c{c}-{i}"),
                    &[center[0] + jitter, center[1] - jitter],
                    Some(c),
                ));
                points.push(point(
                    &format!("u{c}-{i}"),
                    &[center[0] - jitter, center[1] + jitter],
                    None,
                ));
            }
        }
        for seed in 0..20 {
            let mut config = RkmConfig::default();
            config.kmeans.rng_seed = seed;
            let model = build_model(&embedded(4, points.clone()), &config).unwrap();
            assert!(model.len() >= 4);
            for (id, label) in &model.training_label_assignments {
                let expected: usize = id.as_str()[1..2].parse().unwrap();
                assert_eq!(label.index(), expected, "seed {seed}, doc {id}");
            }
        }
    }

    #[test]
    fn orphan_cluster_takes_nearest_labeled_sibling() {
        // both labeled points coincide, so one of the two clusters ends up
        // holding only unlabeled documents
        let points = vec![
            point("a", &[0.0], Some(0)),
            point("b", &[0.0], Some(1)),
            point("u1", &[50.0], None),
            point("u2", &[50.5], None),
            point("u3", &[-50.0], None),
        ];
        let config = RkmConfig {
            min_cluster_size_for_recursion: Some(100),
            ..RkmConfig::default()
        };
        let model = build_model(&embedded(2, points), &config).unwrap();
        let orphans: Vec<_> = model
            .clusters
            .iter()
            .filter(|c| c.acceptance == Acceptance::Orphan)
            .collect();
        assert!(!orphans.is_empty());
        assert_eq!(model.metadata.orphan_clusters, orphans.len());
        for orphan in orphans {
            assert_eq!(orphan.class_counts.ncp(), 0);
            assert!(orphan.label.index() < 2);
        }
    }

    #[test]
    fn no_unlabeled_points_gives_empty_label_map() {
        let points = vec![
            point("a1", &[0.0], Some(0)),
            point("a2", &[0.2], Some(0)),
            point("b1", &[5.0], Some(1)),
        ];
        let model = build_model(&embedded(2, points), &RkmConfig::default()).unwrap();
        assert!(model.training_label_assignments.is_empty());
        assert_eq!(model.len(), 2);
        assert_eq!(model.clusters[0].centroid.as_slice(), [0.1]);
    }

    #[test]
    fn build_model_errors() {
        let unlabeled = vec![point("u", &[0.0], None)];
        assert!(matches!(
            build_model(&embedded(1, unlabeled), &RkmConfig::default()),
            Err(Error::NoLabeledPoints)
        ));
        let missing = vec![point("a", &[0.0], Some(0))];
        assert!(matches!(
            build_model(&embedded(2, missing), &RkmConfig::default()),
            Err(Error::EmptyClass(_))
        ));
        let ragged = vec![point("a", &[0.0], Some(0)), point("b", &[0.0, 1.0], None)];
        assert!(matches!(
            build_model(&embedded(1, ragged), &RkmConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = RkmConfig {
            th_percent: 150.0,
            ..RkmConfig::default()
        };
        assert!(build_model(&embedded(1, vec![point("a", &[0.0], Some(0))]), &bad).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let points = vec![
            point("a1", &[0.1, 0.3], Some(0)),
            point("u1", &[0.2, 0.7], None),
            point("b1", &[0.9, 0.1], Some(1)),
            point("u2", &[1.0 / 3.0, 0.123456789012345], None),
        ];
        let model = build_model(&embedded(2, points), &RkmConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save_json(&path).unwrap();
        let back = ClusterModel::load_json(&path).unwrap();
        assert_eq!(back, model);

        let text = std::fs::read_to_string(&path).unwrap();
        let tampered = text.replacen("\"k\": 2", "\"k\": 3", 1);
        std::fs::write(&path, tampered).unwrap();
        assert!(ClusterModel::load_json(&path).is_err());
    }
}
