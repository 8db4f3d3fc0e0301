use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::extrapolate::polyfit;
use crate::error::{Error, Result};
use crate::lattice::{GlobalLabelling, GridIndex, Region};

/// v = intercept + slope u over the columns with x in `x_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLine {
    pub upper: bool,
    pub x_range: (f64, f64),
    pub intercept: f64,
    pub slope: f64,
}

impl EdgeLine {
    fn intersect(&self, o: &EdgeLine) -> Option<(f64, f64)> {
        let ds = self.slope - o.slope;
        if ds.abs() < MIN_TURN {
            return None;
        }
        let u = (o.intercept - self.intercept) / ds;
        Some((u, self.intercept + self.slope * u))
    }
}

const MIN_TURN: f64 = 0.2;
const MIN_EDGE_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonEstimate {
    /// hbar * global labels of the points kept.
    pub cloud: Vec<(f64, f64)>,
    pub edges: Vec<EdgeLine>,
    /// Edge intersections, sorted by the first coordinate.
    pub fitted_vertices: Vec<(f64, f64)>,
    /// The estimate is only defined up to a global translation.
    pub translation_freedom: bool,
}

/// Image of the labelled points under hbar * label, with the boundary
/// edges fitted per chain between consecutive breakpoints (in x).
pub fn polygon_recover(
    global: &GlobalLabelling,
    strip: (f64, f64),
    exclusion: &[Region],
    breakpoints: &[f64],
) -> Result<PolygonEstimate> {
    let h = 1.0 / global.k as f64;
    let kept: Vec<[f64; 4]> = global
        .phi_samples
        .iter()
        .copied()
        .filter(|s| s[0] >= strip.0 && s[0] <= strip.1)
        .filter(|s| !exclusion.iter().any(|r| r.contains((s[0], s[1]))))
        .collect();
    if kept.is_empty() {
        return Err(Error::EdgeFitFailure("no labelled points in the strip".into()));
    }
    // column extremes, keyed by rounded x
    let mut cols: BTreeMap<i64, (f64, f64, f64, f64)> = BTreeMap::new();
    for s in &kept {
        let e = cols.entry((s[0] / h).round() as i64).or_insert((s[0], s[2], f64::INFINITY, f64::NEG_INFINITY));
        e.2 = e.2.min(s[3]);
        e.3 = e.3.max(s[3]);
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|b| *b > strip.0 && *b < strip.1).collect();
    cuts.sort_by(f64::total_cmp);
    let mut bounds = vec![strip.0];
    bounds.extend(&cuts);
    bounds.push(strip.1);
    let margin = 2.0 * h;

    let mut edges = Vec::new();
    for upper in [false, true] {
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let inner_lo = if lo > strip.0 { lo + margin } else { lo };
            let inner_hi = if hi < strip.1 { hi - margin } else { hi };
            let (us, vs): (Vec<f64>, Vec<f64>) = cols
                .values()
                .filter(|c| c.0 >= inner_lo && c.0 <= inner_hi)
                .map(|c| (c.1, if upper { c.3 } else { c.2 }))
                .unzip();
            if us.len() < MIN_EDGE_POINTS {
                return Err(Error::EdgeFitFailure(format!(
                    "{} boundary point(s) on the {} edge over x in [{lo}, {hi}]",
                    us.len(),
                    if upper { "upper" } else { "lower" }
                )));
            }
            let c = polyfit(&us, &vs, 1)?;
            edges.push(EdgeLine { upper, x_range: (lo, hi), intercept: c[0], slope: c[1] });
        }
    }
    let (lower, upper): (Vec<EdgeLine>, Vec<EdgeLine>) = edges.iter().partition(|e| !e.upper);
    let mut vertices = Vec::new();
    for chain in [&lower, &upper] {
        for w in chain.windows(2) {
            vertices.extend(w[0].intersect(&w[1]));
        }
    }
    vertices.extend(lower[0].intersect(&upper[0]));
    vertices.extend(lower[lower.len() - 1].intersect(&upper[upper.len() - 1]));
    vertices.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PolygonEstimate {
        cloud: kept.iter().map(|s| (s[2], s[3])).collect(),
        edges,
        fitted_vertices: vertices,
        translation_freedom: true,
    })
}

/// Sutherland-Hodgman clip of a convex polygon to x in [a, b].
pub fn clip_to_strip(poly: &[(f64, f64)], (a, b): (f64, f64)) -> Vec<(f64, f64)> {
    let clip = |pts: Vec<(f64, f64)>, inside: &dyn Fn(f64) -> bool, edge: f64| -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 0..pts.len() {
            let p = pts[i];
            let q = pts[(i + 1) % pts.len()];
            if inside(p.0) {
                out.push(p);
            }
            if inside(p.0) != inside(q.0) {
                let t = (edge - p.0) / (q.0 - p.0);
                out.push((edge, p.1 + t * (q.1 - p.1)));
            }
        }
        out
    };
    let left = clip(poly.to_vec(), &|x| x >= a, a);
    clip(left, &|x| x <= b, b)
}

/// Second operand of a Hausdorff distance.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Points(Vec<(f64, f64)>),
    /// Convex polygon, vertices in counter-clockwise order.
    Polygon(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffResult {
    pub distance: f64,
    /// Translation applied to the first set.
    pub translation: (f64, f64),
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

fn poly_dist(poly: &[(f64, f64)], p: (f64, f64)) -> f64 {
    let n = poly.len();
    let inside = (0..n).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    });
    if inside {
        return 0.0;
    }
    (0..n).map(|i| seg_dist(p, poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

fn bbox(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    pts.iter().fold((f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY), |b, p| {
        (b.0.min(p.0), b.1.min(p.1), b.2.max(p.0), b.3.max(p.1))
    })
}

// Points covering the polygon: a fine grid of its interior plus its boundary.
fn sample_polygon(poly: &[(f64, f64)], step: f64) -> Vec<(f64, f64)> {
    let (x0, y0, x1, y1) = bbox(poly);
    let mut out = Vec::new();
    let nx = ((x1 - x0) / step).ceil() as usize;
    let ny = ((y1 - y0) / step).ceil() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let p = (x0 + i as f64 * step, y0 + j as f64 * step);
            if poly_dist(poly, p) == 0.0 {
                out.push(p);
            }
        }
    }
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let m = (seg_dist(b, a, a) / step).ceil().max(1.0) as usize;
        for s in 0..m {
            let t = s as f64 / m as f64;
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

struct Target {
    shape: Shape,
    samples: Vec<(f64, f64)>,
}

impl Target {
    fn dist(&self, p: (f64, f64), b_index: &GridIndex) -> f64 {
        match &self.shape {
            Shape::Polygon(poly) => poly_dist(poly, p),
            Shape::Points(pts) => b_index.nearest(pts, p).map_or(f64::INFINITY, |(_, d)| d),
        }
    }
}

fn directed_and_back(a: &[(f64, f64)], t: (f64, f64), target: &Target, b_index: &GridIndex, cell: f64) -> f64 {
    let moved: Vec<(f64, f64)> = a.iter().map(|p| (p.0 + t.0, p.1 + t.1)).collect();
    let forward = moved.iter().map(|&p| target.dist(p, b_index)).fold(0.0, f64::max);
    let a_index = GridIndex::new(&moved, cell);
    let back = target
        .samples
        .iter()
        .map(|&q| a_index.nearest(&moved, q).map_or(f64::INFINITY, |(_, d)| d))
        .fold(0.0, f64::max);
    forward.max(back)
}

/// Two-sided Hausdorff distance between the finite set `a` and `b`,
/// optionally minimised over translations of `a`.
pub fn hausdorff(a: &[(f64, f64)], b: &Shape, optimize_translation: bool) -> HausdorffResult {
    if a.is_empty() {
        return HausdorffResult { distance: f64::INFINITY, translation: (0.0, 0.0) };
    }
    let (samples, b_pts) = match b {
        Shape::Points(p) => (p.clone(), p.clone()),
        Shape::Polygon(poly) => {
            let (x0, y0, x1, y1) = bbox(poly);
            let diam = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
            (sample_polygon(poly, diam / 400.0), poly.clone())
        }
    };
    let (ax0, ay0, ax1, ay1) = bbox(a);
    let diam = ((ax1 - ax0).powi(2) + (ay1 - ay0).powi(2)).sqrt().max(1e-12);
    let cell = diam / 100.0;
    let b_index = GridIndex::new(&b_pts, cell);
    let target = Target { shape: b.clone(), samples };
    let eval = |t: (f64, f64)| directed_and_back(a, t, &target, &b_index, cell);
    if !optimize_translation {
        return HausdorffResult { distance: eval((0.0, 0.0)), translation: (0.0, 0.0) };
    }
    let mean = |p: &[(f64, f64)]| {
        let n = p.len() as f64;
        (p.iter().map(|q| q.0).sum::<f64>() / n, p.iter().map(|q| q.1).sum::<f64>() / n)
    };
    let (ca, cb) = (mean(a), mean(&target.samples));
    let mut best_t = (cb.0 - ca.0, cb.1 - ca.1);
    let mut best = eval(best_t);
    let coarse = diam / 40.0;
    let centre = best_t;
    for i in -4..=4 {
        for j in -4..=4 {
            let t = (centre.0 + i as f64 * coarse, centre.1 + j as f64 * coarse);
            let d = eval(t);
            if d < best {
                best = d;
                best_t = t;
            }
        }
    }
    let mut step = coarse / 2.0;
    while step > diam * 1e-5 {
        let mut moved = false;
        for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let t = (best_t.0 + dx * step, best_t.1 + dy * step);
            let d = eval(t);
            if d < best {
                best = d;
                best_t = t;
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    HausdorffResult { distance: best, translation: best_t }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_points(n: usize) -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                v.push((i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        v
    }

    #[test]
    fn identical_sets() {
        let a = square_points(10);
        assert_eq!(hausdorff(&a, &Shape::Points(a.clone()), false).distance, 0.0);
    }

    #[test]
    fn shifted_square() {
        let a = square_points(50);
        let sq = vec![(0.1, 0.0), (1.1, 0.0), (1.1, 1.0), (0.1, 1.0)];
        let d = hausdorff(&a, &Shape::Polygon(sq.clone()), false).distance;
        assert!((d - 0.1).abs() < 0.01, "{d}");
        let o = hausdorff(&a, &Shape::Polygon(sq), true);
        assert!(o.distance < 0.015, "{o:?}");
        assert!((o.translation.0 - 0.1).abs() < 0.01);
    }

    #[test]
    fn strip_clip() {
        let tri = vec![(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)];
        let c = clip_to_strip(&tri, (0.5, 1.0));
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|p| p.0 >= 0.5 - 1e-12 && p.0 <= 1.0 + 1e-12));
    }
}
