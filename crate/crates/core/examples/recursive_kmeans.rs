//! Recursive seeded K-means on points where one class occupies two separate regions.

use rkmssl::representation::EmbeddedCorpus;
use rkmssl::synthetic::gaussian_blobs;
use rkmssl::{build_model, ClassId, DocId, Point, RkmConfig};

fn main() -> rkmssl::Result<()> {
    // class 0 lives at both ends, class 1 in the middle
    let centers = vec![vec![0.0, 0.0], vec![5.0, 0.0], vec![10.0, 0.0]];
    let owners = [0, 1, 0];
    let points: Vec<Point> = gaussian_blobs(&centers, 0.6, 40, 3)
        .into_iter()
        .enumerate()
        .map(|(i, (vector, region))| Point {
            doc_id: DocId::new(format!("p{i:03}")),
            vector,
            label: (i % 10 == 0).then(|| ClassId::new(owners[region.index()])),
        })
        .collect();

    let config = RkmConfig::default();
    let model = build_model(
        &EmbeddedCorpus::new(vec!["ends".into(), "middle".into()], points),
        &config,
    )?;
    println!(
        "{} final clusters, {} k-means runs, max depth {}, {} fallback acceptances",
        model.len(),
        model.metadata.kmeans_calls,
        model.metadata.max_depth_reached,
        model.metadata.fallback_acceptances
    );
    for c in &model.clusters {
        let counts: Vec<String> = c
            .class_counts
            .iter()
            .map(|(k, n)| format!("{}={n}", model.class_name(k)))
            .collect();
        println!(
            "  {:<7} depth {} {:?} members {:>3} labeled [{}] centroid ({:.2}, {:.2})",
            model.class_name(c.label),
            c.depth,
            c.acceptance,
            c.members.len(),
            counts.join(" "),
            c.centroid.as_slice()[0],
            c.centroid.as_slice()[1]
        );
    }
    Ok(())
}
