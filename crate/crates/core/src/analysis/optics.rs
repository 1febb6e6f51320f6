//! OPTICS ordering and ξ-steep cluster extraction.

use alloc::vec;
use alloc::vec::Vec;

use super::AnalysisError;
use crate::linalg::distance;

/// Points in cluster order with their reachability and core distances.
///
/// Distances are `f64::INFINITY` where undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachabilityOrdering {
    pub order: Vec<usize>,
    /// Indexed by point, not by position in `order`.
    pub reachability: Vec<f64>,
    pub core_distance: Vec<f64>,
    pub predecessor: Vec<Option<usize>>,
}

impl ReachabilityOrdering {
    /// Reachability values in cluster order.
    pub fn plot(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.reachability[i]).collect()
    }
}

/// Computes the OPTICS ordering of `points`.
///
/// The core distance counts the point itself, so it is the distance to the
/// `(min_pts − 1)`-th other point. Among unprocessed points the one with the
/// smallest reachability comes next; ties go to the lowest index.
pub fn optics(points: &[Vec<f64>], min_pts: usize, max_eps: f64) -> Result<ReachabilityOrdering, AnalysisError> {
    let n = points.len();
    if min_pts < 2 {
        return Err(AnalysisError::InvalidParameter("min_pts must be at least 2"));
    }
    if n < min_pts {
        return Err(AnalysisError::TooFewPoints { n, min_pts });
    }
    if max_eps.is_nan() || max_eps <= 0.0 {
        return Err(AnalysisError::InvalidParameter("max_eps must be positive"));
    }
    let dim = points[0].len();
    if points
        .iter()
        .any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite()))
    {
        return Err(AnalysisError::InvalidParameter(
            "points must be finite and of equal dimension",
        ));
    }

    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| distance(&points[i], &points[j])).collect())
        .collect();
    let core_distance: Vec<f64> = dist
        .iter()
        .map(|row| {
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            let d = sorted[min_pts - 1];
            if d > max_eps {
                f64::INFINITY
            } else {
                d
            }
        })
        .collect();

    let mut reachability = vec![f64::INFINITY; n];
    let mut predecessor = vec![None; n];
    let mut processed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut point = usize::MAX;
        for i in 0..n {
            if !processed[i] && (point == usize::MAX || reachability[i] < reachability[point]) {
                point = i;
            }
        }
        processed[point] = true;
        order.push(point);
        let core = core_distance[point];
        if core.is_infinite() {
            continue;
        }
        for j in 0..n {
            if processed[j] || dist[point][j] > max_eps {
                continue;
            }
            let r = dist[point][j].max(core);
            if r < reachability[j] {
                reachability[j] = r;
                predecessor[j] = Some(point);
            }
        }
    }
    Ok(ReachabilityOrdering {
        order,
        reachability,
        core_distance,
        predecessor,
    })
}

/// A candidate cluster as an inclusive range of positions in the ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderedRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug)]
struct SteepDownArea {
    start: usize,
    end: usize,
    mib: f64,
}

/// Extends a steep region from `start`: steep points extend it, points moving
/// the other way end it, and more than `min_pts` consecutive flat points
/// stop it.
fn extend_region(steep: &[bool], counter: &[bool], start: usize, min_pts: usize) -> usize {
    let mut flat = 0;
    let mut end = start;
    for i in start..steep.len() {
        if steep[i] {
            flat = 0;
            end = i;
        } else if !counter[i] {
            flat += 1;
            if flat > min_pts {
                break;
            }
        } else {
            return end;
        }
    }
    end
}

fn filter_sdas(sdas: &mut Vec<SteepDownArea>, mib: f64, keep: f64, plot: &[f64]) {
    if mib.is_infinite() {
        sdas.clear();
        return;
    }
    sdas.retain(|d| mib <= plot[d.start] * keep);
    for d in sdas.iter_mut() {
        d.mib = d.mib.max(mib);
    }
}

/// Shrinks `[s, e]` from the right until the end point's predecessor lies in
/// the range.
fn correct_predecessor(
    plot: &[f64],
    pred: &[Option<usize>],
    order: &[usize],
    s: usize,
    mut e: usize,
) -> Option<(usize, usize)> {
    while s < e {
        if plot[s] > plot[e] {
            return Some((s, e));
        }
        if let Some(p) = pred[e] {
            if order[s..e].contains(&p) {
                return Some((s, e));
            }
        }
        e -= 1;
    }
    None
}

/// ξ-steep extraction. Returns candidate ranges with nested clusters before
/// the clusters that enclose them.
pub fn xi_clusters(
    ordering: &ReachabilityOrdering,
    xi: f64,
    min_pts: usize,
    min_cluster_size: usize,
) -> Vec<OrderedRange> {
    let n = ordering.order.len();
    let mut plot = ordering.plot();
    plot.push(f64::INFINITY);
    let pred: Vec<Option<usize>> = ordering.order.iter().map(|&i| ordering.predecessor[i]).collect();
    let keep = 1.0 - xi;

    let ratio: Vec<f64> = (0..n).map(|i| plot[i] / plot[i + 1]).collect();
    let steep_up: Vec<bool> = ratio.iter().map(|&r| r <= keep).collect();
    let steep_down: Vec<bool> = ratio.iter().map(|&r| r >= 1.0 / keep).collect();
    let down: Vec<bool> = ratio.iter().map(|&r| r > 1.0).collect();
    let up: Vec<bool> = ratio.iter().map(|&r| r < 1.0).collect();

    let mut sdas: Vec<SteepDownArea> = Vec::new();
    let mut clusters = Vec::new();
    let mut index = 0;
    let mut mib = 0.0f64;
    for steep in 0..n {
        if !(steep_up[steep] || steep_down[steep]) || steep < index {
            continue;
        }
        mib = plot[index..=steep].iter().fold(mib, |m, &v| m.max(v));
        filter_sdas(&mut sdas, mib, keep, &plot);
        if steep_down[steep] {
            let end = extend_region(&steep_down, &up, steep, min_pts);
            sdas.push(SteepDownArea {
                start: steep,
                end,
                mib: 0.0,
            });
            index = end + 1;
            mib = plot[index];
            continue;
        }
        let u_start = steep;
        let u_end = extend_region(&steep_up, &down, u_start, min_pts);
        index = u_end + 1;
        mib = plot[index];
        let mut found = Vec::new();
        for d in &sdas {
            let mut c_start = d.start;
            let mut c_end = u_end;
            if plot[c_end + 1] * keep < d.mib {
                continue;
            }
            let d_max = plot[d.start];
            if d_max * keep >= plot[c_end + 1] {
                while plot[c_start + 1] > plot[c_end + 1] && c_start < d.end {
                    c_start += 1;
                }
            } else if plot[c_end + 1] * keep >= d_max {
                while plot[c_end - 1] > d_max && c_end > u_start {
                    c_end -= 1;
                }
            }
            let Some((s, e)) = correct_predecessor(&plot, &pred, &ordering.order, c_start, c_end) else {
                continue;
            };
            (c_start, c_end) = (s, e);
            if c_end - c_start + 1 < min_cluster_size || c_start > d.end || c_end < u_start {
                continue;
            }
            found.push(OrderedRange {
                start: c_start,
                end: c_end,
            });
        }
        found.reverse();
        clusters.extend(found);
    }
    clusters
}

/// Labels points by the first non-overlapping ranges; `None` is noise.
pub fn xi_labels(ordering: &ReachabilityOrdering, clusters: &[OrderedRange]) -> Vec<Option<usize>> {
    let n = ordering.order.len();
    let mut by_position: Vec<Option<usize>> = vec![None; n];
    let mut label = 0;
    for c in clusters {
        if by_position[c.start..=c.end].iter().all(Option::is_none) {
            by_position[c.start..=c.end].iter_mut().for_each(|l| *l = Some(label));
            label += 1;
        }
    }
    let mut labels = vec![None; n];
    for (pos, &point) in ordering.order.iter().enumerate() {
        labels[point] = by_position[pos];
    }
    labels
}
