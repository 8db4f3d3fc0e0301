use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::lattice::{label_columns, ColumnOrigin, GridIndex, Labelling, PointCloud};
use crate::models::JointSpectrum;

/// Joint eigenvalues indexed by their quantum numbers (j, l).
#[derive(Debug, Clone)]
pub struct LabelledSpectrum {
    pub k: u32,
    pub points: HashMap<(i64, i64), (f64, f64)>,
    order: Vec<(i64, i64)>,
    /// (l, x, y) along each line j = const, by increasing l.
    lines: BTreeMap<i64, Vec<(i64, f64, f64)>>,
    grid: GridIndex,
    xy: Vec<(f64, f64)>,
}

const STENCIL: usize = 4;

impl LabelledSpectrum {
    pub fn new(cloud: &PointCloud, lab: &Labelling) -> Self {
        let mut order: Vec<(i64, i64)> = lab.assignment.values().copied().collect();
        order.sort_unstable();
        let points: HashMap<(i64, i64), (f64, f64)> =
            lab.assignment.iter().map(|(&i, &l)| (l, cloud.points[i])).collect();
        let xy: Vec<(f64, f64)> = order.iter().map(|l| points[l]).collect();
        let grid = GridIndex::new(&xy, cloud.hbar());
        let mut lines: BTreeMap<i64, Vec<(i64, f64, f64)>> = BTreeMap::new();
        for (&(j, l), &(x, y)) in order.iter().zip(&xy) {
            lines.entry(j).or_default().push((l, x, y));
        }
        Self { k: cloud.k, points, order, lines, grid, xy }
    }

    /// Column labelling of a block spectrum.
    pub fn from_spectrum(spectrum: &JointSpectrum, origin: ColumnOrigin) -> Self {
        let (cloud, lab) = label_columns(spectrum, origin);
        Self::new(&cloud, &lab)
    }

    pub fn hbar(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn get(&self, l: (i64, i64)) -> Result<(f64, f64)> {
        self.points.get(&l).copied().ok_or(Error::MissingNeighbor(l.0, l.1))
    }

    pub fn labels(&self) -> &[(i64, i64)] {
        &self.order
    }

    /// Label of the point nearest c.
    pub fn nearest_label(&self, c: (f64, f64)) -> Option<(i64, i64)> {
        self.grid.nearest(&self.xy, c).map(|(i, _)| self.order[i])
    }

    /// Relabels by lambda'_{j,l} = lambda_{j, l + n j}.
    pub fn sheared(&self, n: i64) -> Self {
        let mut cloud = PointCloud::new(self.k, Vec::with_capacity(self.points.len()));
        let mut lab = Labelling::new(crate::lattice::LabellingKind::Regular);
        for &(j, l) in &self.order {
            lab.assignment.insert(cloud.points.len(), (j, l - n * j));
            cloud.points.push(self.points[&(j, l)]);
        }
        Self::new(&cloud, &lab)
    }

    /// Forward-difference a1, a2 at the anchor (j, l).
    pub fn forward_a1a2(&self, (j, l): (i64, i64)) -> Result<(f64, f64)> {
        let e00 = self.get((j, l))?.1;
        let e10 = self.get((j + 1, l))?.1;
        let e01 = self.get((j, l + 1))?.1;
        let dy = e01 - e00;
        if dy == 0.0 {
            return Err(Error::NumericalFailure(format!("zero vertical spacing at ({j}, {l})")));
        }
        Ok(((e00 - e10) / dy, self.hbar() / dy))
    }

    /// Centred-difference a1, a2 at the vertex (j, l).
    pub fn centred_a1a2(&self, (j, l): (i64, i64)) -> Result<(f64, f64)> {
        let left = self.get((j - 1, l))?.1;
        let right = self.get((j + 1, l))?.1;
        let dy = self.get((j, l + 1))?.1 - self.get((j, l - 1))?.1;
        if dy == 0.0 {
            return Err(Error::NumericalFailure(format!("zero vertical spacing at ({j}, {l})")));
        }
        Ok(((left - right) / dy, 2.0 * self.hbar() / dy))
    }

    /// a1, a2 at an arbitrary regular value c. Centred vertex values are
    /// interpolated in y along four label lines j = const (cubic Lagrange),
    /// then across the lines in x.
    pub fn probe_a1a2(&self, c: (f64, f64)) -> Result<(f64, f64)> {
        let js: Vec<i64> = self.lines.keys().copied().collect();
        let at_cy: Vec<f64> = js
            .iter()
            .map(|&j| self.line_x(j, c.1))
            .collect::<Result<_>>()?;
        let p = at_cy.iter().position(|&x| x >= c.0 - 1e-12).ok_or(Error::MissingNeighbor(js[js.len() - 1] + 1, 0))?;
        if p < 2 || p + 2 > js.len() {
            return Err(Error::MissingNeighbor(js[p.saturating_sub(2)], 0));
        }
        let sel = p - 2..p + 2;
        let mut xs = Vec::with_capacity(4);
        let mut v1 = Vec::with_capacity(4);
        let mut v2 = Vec::with_capacity(4);
        for i in sel {
            let (a1, a2) = self.line_values(js[i], c.1)?;
            xs.push(at_cy[i]);
            v1.push(a1);
            v2.push(a2);
        }
        Ok((lagrange(&xs, &v1, c.0), lagrange(&xs, &v2, c.0)))
    }

    // Four consecutive points of line j around height y.
    fn line_stencil(&self, j: i64, y: f64) -> Result<&[(i64, f64, f64)]> {
        let line = self.lines.get(&j).ok_or(Error::MissingNeighbor(j, 0))?;
        if line.len() < STENCIL {
            return Err(Error::MissingNeighbor(j, line.first().map_or(0, |p| p.0)));
        }
        let i = line.partition_point(|p| p.2 < y);
        let lo = i.saturating_sub(STENCIL / 2).min(line.len() - STENCIL);
        Ok(&line[lo..lo + STENCIL])
    }

    fn line_x(&self, j: i64, y: f64) -> Result<f64> {
        let st = self.line_stencil(j, y)?;
        let ys: Vec<f64> = st.iter().map(|p| p.2).collect();
        let xs: Vec<f64> = st.iter().map(|p| p.1).collect();
        Ok(lagrange(&ys, &xs, y))
    }

    fn line_values(&self, j: i64, y: f64) -> Result<(f64, f64)> {
        let st = self.line_stencil(j, y)?;
        let ys: Vec<f64> = st.iter().map(|p| p.2).collect();
        let mut v1 = Vec::with_capacity(STENCIL);
        let mut v2 = Vec::with_capacity(STENCIL);
        for p in st {
            let (a1, a2) = self.centred_a1a2((j, p.0))?;
            v1.push(a1);
            v2.push(a2);
        }
        Ok((lagrange(&ys, &v1, y), lagrange(&ys, &v2, y)))
    }
}

fn lagrange(nodes: &[f64], vals: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for (i, (&xi, &vi)) in nodes.iter().zip(vals).enumerate() {
        let mut w = 1.0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m != i {
                w *= (t - xm) / (xi - xm);
            }
        }
        s += w * vi;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LabellingKind;

    fn chart_cloud(alpha: f64, beta: f64, k: u32) -> LabelledSpectrum {
        // G0(xi) = (xi1, alpha xi1 + beta xi2): the lattice of a linear chart
        let h = 1.0 / k as f64;
        let mut cloud = PointCloud::new(k, Vec::new());
        let mut lab = Labelling::new(LabellingKind::Regular);
        for j in -10..=10 {
            for l in -10..=10 {
                lab.assignment.insert(cloud.points.len(), (j, l));
                cloud.points.push((j as f64 * h, alpha * j as f64 * h + beta * l as f64 * h));
            }
        }
        LabelledSpectrum::new(&cloud, &lab)
    }

    #[test]
    fn linear_chart_spacings() {
        let s = chart_cloud(0.3, 0.5, 50);
        let (a1, a2) = s.forward_a1a2((0, 0)).unwrap();
        assert!((a1 + 0.3 / 0.5).abs() < 1e-12);
        assert!((a2 - 1.0 / 0.5).abs() < 1e-12);
        let (p1, p2) = s.probe_a1a2((0.0123, 0.0071)).unwrap();
        assert!((p1 - a1).abs() < 1e-10 && (p2 - a2).abs() < 1e-10);
    }

    #[test]
    fn identity_chart_spacings() {
        let s = chart_cloud(0.0, 1.0, 20);
        let (a1, a2) = s.forward_a1a2((1, 2)).unwrap();
        assert!(a1.abs() < 1e-12 && (a2 - 1.0).abs() < 1e-12);
        assert!(matches!(s.forward_a1a2((10, 0)), Err(Error::MissingNeighbor(11, 0))));
    }
}
