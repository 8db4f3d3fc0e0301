use serde::{Deserialize, Serialize};

use super::{PointCloud, Region};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// g(xi) = b + A xi + (q11 xi1^2 + q12 xi1 xi2 + q22 xi2^2) per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMap {
    pub b: [f64; 2],
    pub a: [[f64; 2]; 2],
    pub q: [[f64; 3]; 2],
}

impl QuadraticMap {
    pub fn identity() -> Self {
        Self::linear([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    }

    pub fn zero() -> Self {
        Self::constant([0.0, 0.0])
    }

    pub fn constant(b: [f64; 2]) -> Self {
        Self { b, a: [[0.0; 2]; 2], q: [[0.0; 3]; 2] }
    }

    pub fn linear(a: [[f64; 2]; 2], b: [f64; 2]) -> Self {
        Self { b, a, q: [[0.0; 3]; 2] }
    }

    pub fn eval(&self, xi: (f64, f64)) -> (f64, f64) {
        let c = |i: usize| {
            self.b[i]
                + self.a[i][0] * xi.0
                + self.a[i][1] * xi.1
                + self.q[i][0] * xi.0 * xi.0
                + self.q[i][1] * xi.0 * xi.1
                + self.q[i][2] * xi.1 * xi.1
        };
        (c(0), c(1))
    }

    pub fn jacobian(&self, xi: (f64, f64)) -> [[f64; 2]; 2] {
        let row = |i: usize| {
            [
                self.a[i][0] + 2.0 * self.q[i][0] * xi.0 + self.q[i][1] * xi.1,
                self.a[i][1] + self.q[i][1] * xi.0 + 2.0 * self.q[i][2] * xi.1,
            ]
        };
        [row(0), row(1)]
    }
}

/// Ground-truth chart G_hbar = g0 + hbar g1 on a rectangle of the xi plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub g0: QuadraticMap,
    pub g1: QuadraticMap,
    pub domain: Region,
    pub half: bool,
}

impl ChartSpec {
    pub fn new(g0: QuadraticMap, g1: QuadraticMap, domain: Region, half: bool) -> Result<Self> {
        let spec = Self { g0, g1, domain, half };
        spec.check_injective()?;
        Ok(spec)
    }

    fn bounds(&self) -> Result<((f64, f64), (f64, f64))> {
        match self.domain {
            Region::Rect { x, y } if x.0 < x.1 && y.0 < y.1 => Ok((x, y)),
            _ => Err(Error::InvalidInput("chart domain must be a nonempty rectangle".into())),
        }
    }

    /// Orientation and injectivity of g0, tested on a 41 x 41 grid.
    pub fn check_injective(&self) -> Result<()> {
        let (x, y) = self.bounds()?;
        let n = 41;
        let mut images = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let xi = (
                    x.0 + (x.1 - x.0) * i as f64 / (n - 1) as f64,
                    y.0 + (y.1 - y.0) * j as f64 / (n - 1) as f64,
                );
                let jac = self.g0.jacobian(xi);
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                if det <= 0.0 {
                    return Err(Error::InjectivityFailure(format!(
                        "dg0 has determinant {det} at {xi:?}"
                    )));
                }
                images.push(self.g0.eval(xi));
            }
        }
        let cloud = PointCloud::new(1, images);
        let sep = cloud.min_separation();
        if sep <= 1e-12 {
            return Err(Error::InjectivityFailure("g0 folds the domain".into()));
        }
        Ok(())
    }

    pub fn eval(&self, hbar: f64, xi: (f64, f64)) -> (f64, f64) {
        let a = self.g0.eval(xi);
        let b = self.g1.eval(xi);
        (a.0 + hbar * b.0, a.1 + hbar * b.1)
    }
}

/// A synthetic cloud together with the integer labels it was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthLattice {
    pub cloud: PointCloud,
    pub truth: Vec<(i64, i64)>,
}

pub fn synth_lattice(chart: &ChartSpec, k: u32) -> Result<SynthLattice> {
    synth_lattice_with(chart, k, &Tolerances::default())
}

pub fn synth_lattice_with(chart: &ChartSpec, k: u32, tol: &Tolerances) -> Result<SynthLattice> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let (x, y) = chart.bounds()?;
    let kf = k as f64;
    let hbar = 1.0 / kf;
    // a hair of slack so that grid points on the boundary are kept
    let eps = 1e-9;
    let mut y_lo = (y.0 * kf - eps).ceil() as i64;
    if chart.half {
        y_lo = y_lo.max(0);
    }
    let mut points = Vec::new();
    let mut truth = Vec::new();
    for i in (x.0 * kf - eps).ceil() as i64..=(x.1 * kf + eps).floor() as i64 {
        for j in y_lo..=(y.1 * kf + eps).floor() as i64 {
            points.push(chart.eval(hbar, (i as f64 * hbar, j as f64 * hbar)));
            truth.push((i, j));
        }
    }
    let cloud = PointCloud::new(k, points);
    if cloud.len() > 1 && cloud.min_separation() < tol.collision {
        return Err(Error::InjectivityFailure(format!("two points of the k = {k} lattice collide")));
    }
    Ok(SynthLattice { cloud, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_chart_is_the_grid() {
        let c = ChartSpec::new(
            QuadraticMap::identity(),
            QuadraticMap::zero(),
            Region::rect((0.0, 1.0), (0.0, 1.0)),
            false,
        )
        .unwrap();
        let s = synth_lattice(&c, 10).unwrap();
        assert_eq!(s.cloud.len(), 121);
        for (p, t) in s.cloud.points.iter().zip(&s.truth) {
            assert!((p.0 - t.0 as f64 / 10.0).abs() < 1e-15);
            assert!((p.1 - t.1 as f64 / 10.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shear_chart() {
        let c = ChartSpec::new(
            QuadraticMap::linear([[1.0, 0.0], [1.0, 1.0]], [0.0, 0.0]),
            QuadraticMap::zero(),
            Region::rect((0.0, 1.0), (0.0, 1.0)),
            false,
        )
        .unwrap();
        let s = synth_lattice(&c, 4).unwrap();
        for (p, t) in s.cloud.points.iter().zip(&s.truth) {
            assert!((p.1 - (t.0 + t.1) as f64 / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn folding_chart_rejected() {
        let fold = QuadraticMap::linear([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]);
        let r = ChartSpec::new(fold, QuadraticMap::zero(), Region::rect((0.0, 1.0), (0.0, 1.0)), false);
        assert!(matches!(r, Err(Error::InjectivityFailure(_))));
    }

    #[test]
    fn half_lattice_keeps_nonnegative_rows() {
        let c = ChartSpec::new(
            QuadraticMap::identity(),
            QuadraticMap::zero(),
            Region::rect((0.0, 1.0), (-0.5, 1.0)),
            true,
        )
        .unwrap();
        let s = synth_lattice(&c, 10).unwrap();
        assert!(s.truth.iter().all(|t| t.1 >= 0));
    }
}
