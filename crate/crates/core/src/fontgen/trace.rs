//! Bitmap to outline tracing.
//!
//! Boundaries are followed along pixel edges (marching squares on the pixel
//! corner lattice) with ink kept on the left, which makes outer contours
//! counter-clockwise and holes clockwise in the y-up frame. Diagonal-only pixel
//! contacts are split, so ink is 4-connected. The staircase outlines are then
//! reduced with Douglas–Peucker.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::raster::Bitmask;

/// Default Douglas–Peucker tolerance in pixels.
pub const DEFAULT_SIMPLIFY_EPSILON: f64 = 0.35;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Closed polyline; the first point is repeated at the end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Point>,
}

impl Contour {
    /// Builds a closed contour from an open ring of vertices.
    pub fn from_ring(mut ring: Vec<Point>) -> Self {
        if let Some(&first) = ring.first() {
            if ring.last() != Some(&first) || ring.len() == 1 {
                ring.push(first);
            }
        }
        Self { points: ring }
    }

    pub fn is_closed(&self) -> bool {
        self.points.len() >= 4 && self.points.first() == self.points.last()
    }

    /// Shoelace area; positive for counter-clockwise contours (y up).
    pub fn signed_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|s| s[0].x * s[1].y - s[1].x * s[0].y)
            .sum::<f64>()
            / 2.0
    }

    pub fn is_counter_clockwise(&self) -> bool {
        self.signed_area() > 0.0
    }

    /// Vertices without the closing duplicate.
    pub fn ring(&self) -> &[Point] {
        &self.points[..self.points.len().saturating_sub(1)]
    }

    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.x.is_finite() && p.y.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Douglas–Peucker tolerance in pixels; 0 keeps the exact pixel outline.
    pub epsilon: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_SIMPLIFY_EPSILON,
        }
    }
}

/// Traces `mask` with the default options.
pub fn trace_glyph(mask: &Bitmask) -> Vec<Contour> {
    trace_glyph_with(mask, &TraceOptions::default())
}

/// Traces every ink region of `mask` into closed contours in pixel units:
/// `x` from the left edge, `y` up from the bottom edge.
pub fn trace_glyph_with(mask: &Bitmask, opts: &TraceOptions) -> Vec<Contour> {
    let rings = boundary_rings(mask);
    rings
        .into_iter()
        .map(|ring| {
            let ring = drop_collinear(&ring);
            let closed = Contour::from_ring(ring.clone());
            if opts.epsilon <= 0.0 || ring.len() <= 4 {
                return closed;
            }
            let simplified = Contour::from_ring(simplify_ring(&ring, opts.epsilon));
            let (a0, a1) = (closed.signed_area(), simplified.signed_area());
            if simplified.points.len() >= 4 && a0.signum() == a1.signum() && a1 != 0.0 {
                simplified
            } else {
                closed
            }
        })
        .collect()
}

/// Directed pixel-boundary edge; `dir` is 0..4 for east, north, west, south.
#[derive(Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    dir: u8,
}

fn boundary_rings(mask: &Bitmask) -> Vec<Vec<Point>> {
    let (w, h) = (mask.width, mask.height);
    let stride = w + 1;
    let vid = |x: usize, y: usize| y * stride + x;
    // ink test in y-up pixel coordinates
    let ink = |px: i64, py: i64| -> bool {
        if px < 0 || py < 0 || px >= w as i64 || py >= h as i64 {
            return false;
        }
        mask.get(px as usize, h - 1 - py as usize)
    };

    let mut edges: Vec<Edge> = Vec::new();
    let mut outgoing: Vec<[u32; 2]> = vec![[u32::MAX; 2]; stride * (h + 1)];
    let mut push = |edges: &mut Vec<Edge>, from: usize, to: usize, dir: u8| {
        let id = edges.len() as u32;
        edges.push(Edge { from, to, dir });
        let slot = &mut outgoing[from];
        if slot[0] == u32::MAX {
            slot[0] = id;
        } else {
            slot[1] = id;
        }
    };

    for py in 0..h {
        for px in 0..w {
            let (ix, iy) = (px as i64, py as i64);
            if !ink(ix, iy) {
                continue;
            }
            if !ink(ix, iy - 1) {
                push(&mut edges, vid(px, py), vid(px + 1, py), 0);
            }
            if !ink(ix + 1, iy) {
                push(&mut edges, vid(px + 1, py), vid(px + 1, py + 1), 1);
            }
            if !ink(ix, iy + 1) {
                push(&mut edges, vid(px + 1, py + 1), vid(px, py + 1), 2);
            }
            if !ink(ix - 1, iy) {
                push(&mut edges, vid(px, py + 1), vid(px, py), 3);
            }
        }
    }

    // Successor of an edge: the outgoing edge at its head turning most to the left.
    let successor = |e: &Edge| -> usize {
        let slot = outgoing[e.to];
        let preference = [(e.dir + 1) % 4, e.dir, (e.dir + 3) % 4];
        for want in preference {
            for &cand in &slot {
                if cand != u32::MAX && edges[cand as usize].dir == want {
                    return cand as usize;
                }
            }
        }
        unreachable!("pixel boundary edge without continuation")
    };

    let point = |v: usize| Point::new((v % stride) as f64, (v / stride) as f64);
    let mut used = vec![false; edges.len()];
    let mut rings = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            ring.push(point(edges[cur].from));
            cur = successor(&edges[cur]);
            if cur == start {
                break;
            }
        }
        rings.push(ring);
    }
    rings
}

/// Removes vertices lying on the straight line through their neighbours.
fn drop_collinear(ring: &[Point]) -> Vec<Point> {
    let n = ring.len();
    if n < 4 {
        return ring.to_vec();
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = ring[(i + n - 1) % n];
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let cross = (cur.x - prev.x) * (next.y - cur.y) - (cur.y - prev.y) * (next.x - cur.x);
        if cross != 0.0 {
            out.push(cur);
        }
    }
    out
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return libm::hypot(p.x - a.x, p.y - a.y);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    libm::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))
}

fn douglas_peucker(chain: &[Point], epsilon: f64, keep: &mut Vec<bool>, offset: usize) {
    let n = chain.len();
    if n < 3 {
        return;
    }
    let (a, b) = (chain[0], chain[n - 1]);
    let (mut far, mut far_d) = (0, -1.0);
    for (i, &p) in chain.iter().enumerate().take(n - 1).skip(1) {
        let d = segment_distance(p, a, b);
        if d > far_d {
            far = i;
            far_d = d;
        }
    }
    if far_d > epsilon {
        keep[offset + far] = true;
        douglas_peucker(&chain[..=far], epsilon, keep, offset);
        douglas_peucker(&chain[far..], epsilon, keep, offset + far);
    }
}

/// Douglas–Peucker on a closed ring, anchored at vertex 0 and the vertex
/// farthest from it.
fn simplify_ring(ring: &[Point], epsilon: f64) -> Vec<Point> {
    let n = ring.len();
    let anchor = ring[0];
    let split = (1..n)
        .max_by(|&i, &j| {
            let di = libm::hypot(ring[i].x - anchor.x, ring[i].y - anchor.y);
            let dj = libm::hypot(ring[j].x - anchor.x, ring[j].y - anchor.y);
            di.total_cmp(&dj).then(j.cmp(&i))
        })
        .unwrap_or(0);
    let mut closed: Vec<Point> = ring.to_vec();
    closed.push(anchor);
    let mut keep = vec![false; closed.len()];
    keep[0] = true;
    keep[split] = true;
    douglas_peucker(&closed[..=split], epsilon, &mut keep, 0);
    douglas_peucker(&closed[split..], epsilon, &mut keep, split);
    closed[..n]
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| *p)
        .collect()
}
