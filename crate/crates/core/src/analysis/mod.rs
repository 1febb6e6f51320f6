//! Offline analysis of trial logs.
//!
//! Trial results are points in the 4-d space of font coordinates plus reading
//! speed. They are clustered with OPTICS and ξ extraction; the cluster with
//! the highest mean speed marks a preferred region of the font space.

mod optics;

pub use optics::{optics, xi_clusters, xi_labels, OrderedRange, ReachabilityOrdering};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fontgen::{build_font, BuildOptions, FontCoordinates, FontGenError, SynthFont};
use crate::fontspace::FontBasis;
use crate::session::{EventKind, LogEvent};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{n} points are too few for min_pts = {min_pts}")]
    TooFewPoints { n: usize, min_pts: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("no clusters")]
    NoClusters,
    #[error("empty cluster")]
    EmptyCluster,
    #[error(transparent)]
    FontGen(#[from] FontGenError),
}

/// One trial as a point for clustering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub c: FontCoordinates,
    pub wpm: f64,
    pub trial: u64,
}

impl LabeledPoint {
    fn features(&self) -> [f64; 4] {
        [self.c.0[0], self.c.0[1], self.c.0[2], self.wpm]
    }
}

/// Every recorded observation of a trial log, resets included at zero speed.
pub fn labeled_points(events: &[LogEvent]) -> Vec<LabeledPoint> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Result(r) => Some(LabeledPoint {
                c: r.coords,
                wpm: r.wpm,
                trial: r.trial_id,
            }),
            EventKind::Reset(r) => Some(LabeledPoint {
                c: r.coords,
                wpm: 0.0,
                trial: r.trial_id,
            }),
            _ => None,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterOptions {
    pub min_pts: usize,
    pub xi: f64,
    /// Neighbourhood radius in the clustering space; `None` is unbounded.
    pub max_eps: Option<f64>,
    /// z-score every dimension before clustering.
    pub standardize: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            min_pts: 5,
            xi: 0.05,
            max_eps: None,
            standardize: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Indices into the input points, ascending.
    pub members: Vec<usize>,
    /// Mean coordinates and mean speed, in raw units.
    pub centroid: [f64; 4],
    /// Standard error of the mean along each font dimension.
    pub se_axes: [f64; 3],
    pub mean_wpm: f64,
}

impl Cluster {
    pub fn from_members(points: &[LabeledPoint], mut members: Vec<usize>) -> Result<Self, AnalysisError> {
        if members.is_empty() {
            return Err(AnalysisError::EmptyCluster);
        }
        members.sort_unstable();
        let n = members.len() as f64;
        let mut centroid = [0.0; 4];
        for &m in &members {
            for (c, v) in centroid.iter_mut().zip(points[m].features()) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n);
        let mut se_axes = [0.0; 3];
        if members.len() > 1 {
            for (d, se) in se_axes.iter_mut().enumerate() {
                let ss: f64 = members.iter().map(|&m| (points[m].c.0[d] - centroid[d]).powi(2)).sum();
                *se = libm::sqrt(ss / (n - 1.0)) / libm::sqrt(n);
            }
        }
        Ok(Self {
            members,
            centroid,
            se_axes,
            mean_wpm: centroid[3],
        })
    }

    pub fn centroid_coords(&self) -> FontCoordinates {
        FontCoordinates::new(self.centroid[0], self.centroid[1], self.centroid[2])
    }
}

/// Clusters and per-point labels (`None` marks noise).
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub labels: Vec<Option<usize>>,
    pub ordering: ReachabilityOrdering,
}

fn zscore(rows: &mut [Vec<f64>]) {
    let n = rows.len() as f64;
    let dim = rows[0].len();
    for d in 0..dim {
        let mean = rows.iter().map(|r| r[d]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / n;
        let sd = libm::sqrt(var);
        let sd = if sd > 0.0 { sd } else { 1.0 };
        rows.iter_mut().for_each(|r| r[d] = (r[d] - mean) / sd);
    }
}

/// OPTICS with ξ extraction over `(c₁, c₂, c₃, wpm)`.
pub fn cluster_points(points: &[LabeledPoint], opts: &ClusterOptions) -> Result<Clustering, AnalysisError> {
    if !(opts.xi > 0.0 && opts.xi < 1.0) {
        return Err(AnalysisError::InvalidParameter("xi must lie in (0, 1)"));
    }
    let mut rows: Vec<Vec<f64>> = points.iter().map(|p| p.features().to_vec()).collect();
    if opts.standardize && !rows.is_empty() {
        zscore(&mut rows);
    }
    let ordering = optics(&rows, opts.min_pts, opts.max_eps.unwrap_or(f64::INFINITY))?;
    let ranges = xi_clusters(&ordering, opts.xi, opts.min_pts, opts.min_pts);
    let labels = xi_labels(&ordering, &ranges);
    let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let clusters = (0..n_clusters)
        .map(|k| {
            let members = (0..points.len()).filter(|&i| labels[i] == Some(k)).collect();
            Cluster::from_members(points, members)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Clustering {
        clusters,
        labels,
        ordering,
    })
}

/// Index of the cluster with the highest mean speed; ties go to the larger
/// cluster, then to the earlier one.
pub fn best_cluster(clusters: &[Cluster]) -> Result<usize, AnalysisError> {
    let mut best: Option<usize> = None;
    for (i, c) in clusters.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &clusters[b];
                c.mean_wpm > cur.mean_wpm || (c.mean_wpm == cur.mean_wpm && c.members.len() > cur.members.len())
            }
        };
        if better {
            best = Some(i);
        }
    }
    best.ok_or(AnalysisError::NoClusters)
}

/// Pairwise Euclidean distances in raw font units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub matrix: Vec<Vec<f64>>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn distance_report(coords: &[FontCoordinates]) -> Result<DistanceReport, AnalysisError> {
    let n = coords.len();
    if n < 2 {
        return Err(AnalysisError::TooFewPoints { n, min_pts: 2 });
    }
    let matrix: Vec<Vec<f64>> = coords
        .iter()
        .map(|a| coords.iter().map(|b| a.distance(b)).collect())
        .collect();
    let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for (i, row) in matrix.iter().enumerate() {
        for &d in &row[i + 1..] {
            min = min.min(d);
            max = max.max(d);
            sum += d;
        }
    }
    Ok(DistanceReport {
        matrix,
        min,
        max,
        mean: sum / (n * (n - 1) / 2) as f64,
    })
}

/// Font at the centroid of a cluster; infeasible centroids are built with
/// `force` and reported through [`SynthFont::forced`].
pub fn centroid_font(cluster: &Cluster, basis: &FontBasis, opts: &BuildOptions) -> Result<SynthFont, AnalysisError> {
    if cluster.members.is_empty() {
        return Err(AnalysisError::EmptyCluster);
    }
    let opts = BuildOptions {
        force: true,
        ..opts.clone()
    };
    Ok(build_font(&cluster.centroid_coords(), basis, &opts)?)
}

/// Clusters, the best cluster and the distances between cluster centroids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub clusters: Vec<Cluster>,
    pub best: Option<usize>,
    pub distances: Option<DistanceReport>,
    pub n_points: usize,
    pub n_noise: usize,
}

pub fn analyze(points: &[LabeledPoint], opts: &ClusterOptions) -> Result<AnalysisReport, AnalysisError> {
    let clustering = cluster_points(points, opts)?;
    let best = best_cluster(&clustering.clusters).ok();
    let centroids: Vec<FontCoordinates> = clustering.clusters.iter().map(Cluster::centroid_coords).collect();
    Ok(AnalysisReport {
        best,
        distances: distance_report(&centroids).ok(),
        n_points: points.len(),
        n_noise: clustering.labels.iter().filter(|l| l.is_none()).count(),
        clusters: clustering.clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cluster(mean_wpm: f64, size: usize) -> Cluster {
        Cluster {
            members: (0..size).collect(),
            centroid: [0.0, 0.0, 0.0, mean_wpm],
            se_axes: [0.0; 3],
            mean_wpm,
        }
    }

    #[test]
    fn best_cluster_rules() {
        assert_eq!(
            best_cluster(&[cluster(200.0, 5), cluster(250.0, 5), cluster(240.0, 5)]),
            Ok(1)
        );
        assert_eq!(best_cluster(&[cluster(250.0, 5), cluster(250.0, 9)]), Ok(1));
        assert_eq!(best_cluster(&[cluster(250.0, 9), cluster(250.0, 9)]), Ok(0));
        assert_eq!(best_cluster(&[cluster(1.0, 5)]), Ok(0));
        assert_eq!(best_cluster(&[]), Err(AnalysisError::NoClusters));
    }

    #[test]
    fn three_four_five() {
        let r = distance_report(&[FontCoordinates::new(0.0, 0.0, 0.0), FontCoordinates::new(3.0, 4.0, 0.0)]).unwrap();
        assert_eq!(r.mean, 5.0);
        let same = distance_report(&[FontCoordinates::new(1.0, 1.0, 1.0); 2]).unwrap();
        assert_eq!(same.max, 0.0);
    }

    #[test]
    fn cluster_statistics() {
        let pts: Vec<LabeledPoint> = [[1.0, 2.0, 3.0], [3.0, 2.0, 5.0]]
            .iter()
            .enumerate()
            .map(|(i, c)| LabeledPoint {
                c: FontCoordinates(*c),
                wpm: 100.0 * (i + 1) as f64,
                trial: i as u64,
            })
            .collect();
        let c = Cluster::from_members(&pts, vec![1, 0]).unwrap();
        assert_eq!(c.members, vec![0, 1]);
        assert_eq!(c.centroid, [2.0, 2.0, 4.0, 150.0]);
        // sd of {1, 3} is √2, over √2 gives 1
        assert!((c.se_axes[0] - 1.0).abs() < 1e-12);
        assert_eq!(c.se_axes[1], 0.0);
    }
}
