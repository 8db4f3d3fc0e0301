use std::collections::HashMap;

/// Uniform bucket grid over a point set for radius and nearest-point queries.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    lo: (i64, i64),
    hi: (i64, i64),
}

impl GridIndex {
    pub fn new(points: &[(f64, f64)], cell: f64) -> Self {
        let cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &p) in points.iter().enumerate() {
            buckets.entry(Self::key_of(cell, p)).or_default().push(i);
        }
        let lo = buckets.keys().fold((i64::MAX, i64::MAX), |a, k| (a.0.min(k.0), a.1.min(k.1)));
        let hi = buckets.keys().fold((i64::MIN, i64::MIN), |a, k| (a.0.max(k.0), a.1.max(k.1)));
        Self { cell, buckets, lo, hi }
    }

    fn key_of(cell: f64, p: (f64, f64)) -> (i64, i64) {
        ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64)
    }

    /// Indices within distance r of p, in increasing index order.
    pub fn within(&self, points: &[(f64, f64)], p: (f64, f64), r: f64) -> Vec<usize> {
        let (cx, cy) = Self::key_of(self.cell, p);
        let span = (r / self.cell).ceil() as i64;
        let mut out = Vec::new();
        for dx in -span..=span {
            for dy in -span..=span {
                if let Some(b) = self.buckets.get(&(cx + dx, cy + dy)) {
                    out.extend(b.iter().copied().filter(|&i| dist(points[i], p) <= r));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn nearest(&self, points: &[(f64, f64)], p: (f64, f64)) -> Option<(usize, f64)> {
        self.nearest_filtered(points, p, |_| true)
    }

    pub fn nearest_excluding(&self, points: &[(f64, f64)], p: (f64, f64), skip: usize) -> Option<(usize, f64)> {
        self.nearest_filtered(points, p, |i| i != skip)
    }

    /// Nearest accepted point; ties go to the smaller index.
    pub fn nearest_filtered(
        &self,
        points: &[(f64, f64)],
        p: (f64, f64),
        accept: impl Fn(usize) -> bool,
    ) -> Option<(usize, f64)> {
        if self.buckets.is_empty() {
            return None;
        }
        let (cx, cy) = Self::key_of(self.cell, p);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.max_ring(cx, cy);
        for ring in 0..=max_ring {
            if let Some((_, d)) = best {
                if d < (ring as f64 - 1.0) * self.cell {
                    break;
                }
            }
            for (dx, dy) in ring_cells(ring) {
                if let Some(b) = self.buckets.get(&(cx + dx, cy + dy)) {
                    for &i in b {
                        if !accept(i) {
                            continue;
                        }
                        let d = dist(points[i], p);
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d < bd || (d == bd && i < bi),
                        };
                        if better {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best
    }

    fn max_ring(&self, cx: i64, cy: i64) -> i64 {
        (cx - self.lo.0).abs()
            .max((self.hi.0 - cx).abs())
            .max((cy - self.lo.1).abs())
            .max((self.hi.1 - cy).abs())
    }
}

fn ring_cells(ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(0, 0)];
    }
    let mut out = Vec::with_capacity(8 * ring as usize);
    for d in -ring..=ring {
        out.push((d, -ring));
        out.push((d, ring));
    }
    for d in -ring + 1..ring {
        out.push((-ring, d));
        out.push((ring, d));
    }
    out
}

pub(crate) fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.731;
                ((t * 1.3).sin() * 3.0, (t * 0.7).cos() * 2.0 + t * 0.01)
            })
            .collect();
        let g = GridIndex::new(&pts, 0.1);
        for q in [(0.0, 0.0), (5.0, -3.0), (1.2, 0.4)] {
            let (i, d) = g.nearest(&pts, q).unwrap();
            let bd = pts.iter().map(|&p| dist(p, q)).fold(f64::INFINITY, f64::min);
            assert_eq!(d, bd);
            assert_eq!(dist(pts[i], q), bd);
            let w = g.within(&pts, q, 0.5);
            let bw: Vec<usize> = (0..pts.len()).filter(|&j| dist(pts[j], q) <= 0.5).collect();
            assert_eq!(w, bw);
        }
    }
}
