//! Cross-checks against brute-force reference computations.

use proptest::prelude::*;

use rkmssl::representation::EmbeddedCorpus;
use rkmssl::rkmeans::Acceptance;
use rkmssl::{build_model, kmeans, ClassId, DocId, DocVector, KMeansConfig, Point, RkmConfig};

fn point(id: &str, v: &[f64], label: Option<usize>) -> Point {
    Point {
        doc_id: DocId::new(id),
        vector: DocVector::new(v.to_vec()),
        label: label.map(ClassId::new),
    }
}

fn sse_of(points: &[Vec<f64>], assignment: &[usize], k: usize) -> f64 {
    let dim = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(assignment)
            .filter(|(_, &a)| a == c)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..dim)
            .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&mean)
                    .map(|(x, m)| (x - m) * (x - m))
                    .sum::<f64>()
            })
            .sum::<f64>();
    }
    total
}

#[test]
fn two_means_on_1d_reaches_the_best_contiguous_split() {
    // on a line the optimal 2-partition is contiguous; enumerate every cut
    let xs = [0.0, 0.3, 1.1, 1.2, 5.0, 5.4, 6.1, 9.0];
    let points: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let best = (1..xs.len())
        .map(|cut| {
            let assignment: Vec<usize> = (0..xs.len()).map(|i| usize::from(i >= cut)).collect();
            sse_of(&points, &assignment, 2)
        })
        .fold(f64::INFINITY, f64::min);

    let pts: Vec<Point> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| point(&format!("p{i}"), &[x], None))
        .collect();
    let run = kmeans(
        &pts,
        &[DocVector::new(vec![0.0]), DocVector::new(vec![9.0])],
        &KMeansConfig::default(),
    )
    .unwrap();
    assert!(run.converged);
    let final_sse = *run.sse_history.last().unwrap();
    approx::assert_relative_eq!(final_sse, best, epsilon = 1e-12);
}

#[test]
fn recursive_model_on_a_line_matches_hand_partition() {
    // classes 0 at {0, 1}, 1 at {10, 11}, 0 again at {20, 21}: two seeds cannot
    // separate three groups, so one impure cluster must be split again
    let pts = vec![
        point("a0", &[0.0], Some(0)),
        point("a1", &[1.0], Some(0)),
        point("b0", &[10.0], Some(1)),
        point("b1", &[11.0], Some(1)),
        point("c0", &[20.0], Some(0)),
        point("c1", &[21.0], Some(0)),
    ];
    for seed in 0..10 {
        let mut config = RkmConfig::default();
        config.kmeans.rng_seed = seed;
        let model = build_model(
            &EmbeddedCorpus::new(vec!["A".into(), "B".into()], pts.clone()),
            &config,
        )
        .unwrap();
        for c in &model.clusters {
            assert_eq!(c.class_counts.ncp(), 1, "seed {seed}: {:?}", model.clusters);
        }
        // every final cluster is a nearest-mean group of contiguous points
        let mut groups: Vec<Vec<String>> = model
            .clusters
            .iter()
            .map(|c| c.members.iter().map(|m| m.as_str().to_string()).collect())
            .collect();
        for g in &mut groups {
            g.sort();
        }
        groups.sort();
        assert!(
            groups.contains(&vec!["b0".to_string(), "b1".to_string()]),
            "seed {seed}: {groups:?}"
        );
        assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), 6);
    }
}

#[test]
fn one_hot_points_give_pure_clusters() {
    let mut pts = Vec::new();
    for c in 0..4 {
        let mut v = vec![0.0; 4];
        v[c] = 1.0;
        for i in 0..5 {
            pts.push(point(&format!("{c}-{i}"), &v, (i < 2).then_some(c)));
        }
    }
    let classes = (0..4).map(|c| format!("k{c}")).collect();
    let model = build_model(&EmbeddedCorpus::new(classes, pts), &RkmConfig::default()).unwrap();
    assert_eq!(model.len(), 4);
    for c in &model.clusters {
        assert_eq!(c.acceptance, Acceptance::SingleClass);
        assert_eq!(c.members.len(), 5);
        let prefix = format!("{}-", c.label.index());
        assert!(c.members.iter().all(|m| m.as_str().starts_with(&prefix)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn converged_kmeans_is_a_lloyd_fixed_point(
        xs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..12),
    ) {
        let pts: Vec<Point> = xs.iter().enumerate().map(|(i, &(x, y))| point(&format!("p{i}"), &[x, y], None)).collect();
        let seeds = vec![pts[0].vector.clone(), pts[1].vector.clone()];
        let config = KMeansConfig { centroid_shift_tolerance: 1e-12, max_iterations: 500, ..KMeansConfig::default() };
        let run = kmeans(&pts, &seeds, &config).unwrap();
        prop_assume!(run.converged);
        let d2 = |p: &[f64], c: &DocVector| -> f64 { p.iter().zip(c.as_slice()).map(|(x, m)| (x - m) * (x - m)).sum() };
        for (c, cluster) in run.clusters.iter().enumerate() {
            for d in 0..2 {
                let mean = cluster.members.iter().map(|&m| pts[m].vector.as_slice()[d]).sum::<f64>() / cluster.members.len() as f64;
                prop_assert!((mean - cluster.centroid.as_slice()[d]).abs() < 1e-12);
            }
            for &m in &cluster.members {
                let own = d2(pts[m].vector.as_slice(), &cluster.centroid);
                for other in &run.clusters {
                    prop_assert!(own <= d2(pts[m].vector.as_slice(), &other.centroid) + 1e-9, "point {m} in cluster {c}");
                }
            }
        }
    }
}
