use std::collections::HashSet;

use adaptifont_core::analysis::{
    best_cluster, cluster_points, distance_report, optics, Cluster, ClusterOptions, LabeledPoint,
};
use adaptifont_core::fontgen::FontCoordinates;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blobs(seed: u64, centres: &[[f64; 4]], per: usize, sd: f64) -> Vec<LabeledPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut out = Vec::new();
    for c in centres {
        for _ in 0..per {
            let f: Vec<f64> = c.iter().map(|v| v + noise.sample(&mut rng)).collect();
            out.push(LabeledPoint {
                c: FontCoordinates::new(f[0], f[1], f[2]),
                wpm: f[3],
                trial: out.len() as u64,
            });
        }
    }
    out
}

fn rows(points: &[LabeledPoint]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| vec![p.c.0[0], p.c.0[1], p.c.0[2], p.wpm])
        .collect()
}

#[test]
fn ordering_is_a_permutation_and_reachability_dominates_core_of_predecessor() {
    let pts = rows(&blobs(1, &[[2.0, 2.0, 2.0, 2.0], [8.0, 8.0, 8.0, 8.0]], 30, 0.5));
    let o = optics(&pts, 5, f64::INFINITY).unwrap();
    let mut sorted = o.order.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..pts.len()).collect::<Vec<_>>());
    for i in 0..pts.len() {
        if let Some(p) = o.predecessor[i] {
            let d: f64 = pts[i]
                .iter()
                .zip(&pts[p])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((o.reachability[i] - d.max(o.core_distance[p])).abs() < 1e-12);
            assert!(o.reachability[i] >= o.core_distance[p]);
        }
    }
    assert!(o.reachability[o.order[0]].is_infinite());
}

#[test]
fn core_distance_matches_sorted_neighbours() {
    let pts = rows(&blobs(2, &[[0.0; 4]], 25, 1.0));
    let o = optics(&pts, 5, f64::INFINITY).unwrap();
    for (i, p) in pts.iter().enumerate() {
        let mut d: Vec<f64> = pts
            .iter()
            .map(|q| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .collect();
        d.sort_by(f64::total_cmp);
        assert!((o.core_distance[i] - d[4]).abs() < 1e-12);
    }
}

#[test]
fn separated_blobs_are_found() {
    let pts = blobs(
        3,
        &[[2.0, 2.0, 2.0, 100.0], [10.0, 2.0, 2.0, 100.0], [2.0, 10.0, 2.0, 250.0]],
        40,
        0.3,
    );
    let opts = ClusterOptions {
        standardize: false,
        ..ClusterOptions::default()
    };
    let c = cluster_points(&pts, &opts).unwrap();
    assert!(c.clusters.len() >= 3);
    let best = best_cluster(&c.clusters).unwrap();
    assert!((c.clusters[best].mean_wpm - 250.0).abs() < 1.0);
}

#[test]
fn translation_leaves_labels_unchanged() {
    let pts = blobs(4, &[[2.0, 2.0, 2.0, 120.0], [7.0, 6.0, 3.0, 220.0]], 30, 0.4);
    let shifted: Vec<LabeledPoint> = pts
        .iter()
        .map(|p| LabeledPoint {
            c: FontCoordinates(p.c.0.map(|v| v + 3.0)),
            wpm: p.wpm + 50.0,
            ..*p
        })
        .collect();
    for standardize in [false, true] {
        let opts = ClusterOptions {
            standardize,
            ..ClusterOptions::default()
        };
        let a = cluster_points(&pts, &opts).unwrap();
        let b = cluster_points(&shifted, &opts).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.ordering.order, b.ordering.order);
    }
}

#[test]
fn clustering_is_deterministic() {
    let pts = blobs(5, &[[1.0, 1.0, 1.0, 150.0], [5.0, 5.0, 5.0, 200.0]], 25, 0.5);
    let opts = ClusterOptions::default();
    assert_eq!(
        cluster_points(&pts, &opts).unwrap(),
        cluster_points(&pts, &opts).unwrap()
    );
}

#[test]
fn duplicates_form_one_cluster() {
    let p = LabeledPoint {
        c: FontCoordinates::new(3.0, 3.0, 3.0),
        wpm: 200.0,
        trial: 0,
    };
    let mut pts = vec![p; 12];
    pts.extend(blobs(6, &[[9.0, 9.0, 9.0, 100.0]], 12, 0.5));
    let opts = ClusterOptions {
        standardize: false,
        ..ClusterOptions::default()
    };
    let c = cluster_points(&pts, &opts).unwrap();
    let dup_labels: HashSet<_> = c.labels[..12].iter().collect();
    assert_eq!(dup_labels.len(), 1);
    assert!(c.labels[0].is_some());
}

#[test]
fn too_few_points_and_bad_parameters_are_errors() {
    let pts = blobs(7, &[[0.0; 4]], 4, 1.0);
    assert!(cluster_points(&pts, &ClusterOptions::default()).is_err());
    let pts = blobs(7, &[[0.0; 4]], 20, 1.0);
    assert!(cluster_points(
        &pts,
        &ClusterOptions {
            xi: 1.5,
            ..ClusterOptions::default()
        }
    )
    .is_err());
}

#[test]
fn distance_report_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let coords: Vec<FontCoordinates> = (0..9)
        .map(|_| {
            FontCoordinates::new(
                rng.random_range(0.0..13.0),
                rng.random_range(0.0..13.0),
                rng.random_range(0.0..13.0),
            )
        })
        .collect();
    let r = distance_report(&coords).unwrap();
    let (mut lo, mut hi, mut sum, mut count) = (f64::MAX, 0.0f64, 0.0, 0);
    for i in 0..coords.len() {
        for j in 0..coords.len() {
            let d = ((0..3).map(|k| (coords[i].0[k] - coords[j].0[k]).powi(2)).sum::<f64>()).sqrt();
            assert!((r.matrix[i][j] - d).abs() < 1e-12);
            if i < j {
                lo = lo.min(d);
                hi = hi.max(d);
                sum += d;
                count += 1;
            }
        }
    }
    assert!((r.min - lo).abs() < 1e-12 && (r.max - hi).abs() < 1e-12);
    assert!((r.mean - sum / count as f64).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn best_cluster_ignores_order_of_distinct_means(means in prop::collection::vec(0.0..400.0f64, 1..8), seed in any::<u64>()) {
        let clusters: Vec<Cluster> = means
            .iter()
            .map(|&m| Cluster { members: vec![0], centroid: [0.0, 0.0, 0.0, m], se_axes: [0.0; 3], mean_wpm: m })
            .collect();
        let best = clusters[best_cluster(&clusters).unwrap()].mean_wpm;
        let mut shuffled = clusters.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(shuffled[best_cluster(&shuffled).unwrap()].mean_wpm, best);
        prop_assert!(means.iter().all(|&m| m <= best));
    }

    #[test]
    fn reachability_is_invariant_to_input_permutation(seed in any::<u64>()) {
        let pts = rows(&blobs(seed, &[[0.0; 4], [4.0; 4]], 10, 0.7));
        let o = optics(&pts, 5, f64::INFINITY).unwrap();
        let rev: Vec<Vec<f64>> = pts.iter().rev().cloned().collect();
        let r = optics(&rev, 5, f64::INFINITY).unwrap();
        let n = pts.len();
        for i in 0..n {
            prop_assert!((o.core_distance[i] - r.core_distance[n - 1 - i]).abs() < 1e-12);
        }
    }
}
