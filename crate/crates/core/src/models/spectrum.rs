use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_blocks_with, ModelSpec, TridiagonalBlock};
use crate::config::Tolerances;
use crate::eigen::{eigs_with, EigenMethod};
use crate::error::{Error, Result};

/// Closed rectangle in the (x, y) plane; infinite bounds are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Window {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x, y }
    }

    pub fn all() -> Self {
        let inf = (f64::NEG_INFINITY, f64::INFINITY);
        Self { x: inf, y: inf }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub x: f64,
    pub y: f64,
    pub block_id: i64,
    pub index_in_block: usize,
}

/// Joint eigenvalues for one k, sorted by (block_id, index_in_block).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpectrum {
    pub k: u32,
    pub points: Vec<JointPoint>,
    pub window: Option<Window>,
}

/// The joint eigenvalues of one block, bottom to top.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub block_id: i64,
    pub x: f64,
    pub ys: Vec<f64>,
    /// index_in_block of ys[0]; nonzero when the window cut the bottom off.
    pub first_index: usize,
}

impl JointSpectrum {
    pub fn hbar(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.x, p.y)).collect()
    }

    /// Groups the points by block, in increasing block order.
    pub fn columns(&self) -> Vec<Column> {
        let mut out: Vec<Column> = Vec::new();
        for p in &self.points {
            match out.last_mut() {
                Some(c) if c.block_id == p.block_id => c.ys.push(p.y),
                _ => out.push(Column {
                    block_id: p.block_id,
                    x: p.x,
                    ys: vec![p.y],
                    first_index: p.index_in_block,
                }),
            }
        }
        out
    }

    /// Keeps only the points inside `window`.
    pub fn restrict(&self, window: Window) -> JointSpectrum {
        JointSpectrum {
            k: self.k,
            points: self.points.iter().copied().filter(|p| window.contains(p.x, p.y)).collect(),
            window: Some(window),
        }
    }

    pub(crate) fn from_blocks(k: u32, solved: Vec<(i64, f64, Vec<f64>)>, window: Option<Window>) -> Self {
        let mut points = Vec::new();
        for (block_id, x, ys) in solved {
            for (index_in_block, y) in ys.into_iter().enumerate() {
                if window.map_or(true, |w| w.contains(x, y)) {
                    points.push(JointPoint { x, y, block_id, index_in_block });
                }
            }
        }
        points.sort_by(|a, b| (a.block_id, a.index_in_block).cmp(&(b.block_id, b.index_in_block)));
        Self { k, points, window }
    }
}

pub fn joint_spectrum(model: &ModelSpec, k: u32, window: Window) -> Result<JointSpectrum> {
    joint_spectrum_with(model, k, window, &Tolerances::default(), EigenMethod::default())
}

pub fn joint_spectrum_with(
    model: &ModelSpec,
    k: u32,
    window: Window,
    tol: &Tolerances,
    method: EigenMethod,
) -> Result<JointSpectrum> {
    let blocks = build_blocks_with(model, k, window.x, tol)?;
    let solved = blocks
        .par_iter()
        .map(|b| solve_block(b, tol, method).map(|ys| (b.block_id, b.j_value, ys)))
        .collect::<Result<Vec<_>>>()?;
    Ok(JointSpectrum::from_blocks(k, solved, Some(window)))
}

fn solve_block(b: &TridiagonalBlock, tol: &Tolerances, method: EigenMethod) -> Result<Vec<f64>> {
    let ys = eigs_with(&b.diag, &b.offdiag, method, tol.eigen_rel, tol.ql_max_iter)?;
    if ys.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NumericalFailure(format!(
            "block {} has a repeated eigenvalue",
            b.block_id
        )));
    }
    Ok(ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupled_points_inside_image() {
        let s = joint_spectrum(&ModelSpec::coupled_default(), 10, Window::all()).unwrap();
        assert_eq!(s.len(), 1000);
        for p in &s.points {
            assert!(p.x.abs() <= 3.5 + 1e-12);
            assert!(p.y.abs() <= 1.0 + 1.0 / 10.0);
        }
    }

    #[test]
    fn spin_window_filter() {
        let w = Window::new((-1.0, 2.0), (-1.2, 1.2));
        let s = joint_spectrum(&ModelSpec::spin_oscillator(), 15, w).unwrap();
        assert!(!s.is_empty());
        assert!(s.points.iter().all(|p| w.contains(p.x, p.y)));
        let cols = s.columns();
        assert!(cols.windows(2).all(|c| c[0].x < c[1].x));
        assert!(cols.iter().all(|c| c.ys.windows(2).all(|v| v[0] < v[1])));
    }

    #[test]
    fn methods_agree() {
        let tol = Tolerances::default();
        let w = Window::new((0.0, 2.0), (f64::NEG_INFINITY, f64::INFINITY));
        let m = ModelSpec::spin_oscillator();
        let a = joint_spectrum_with(&m, 20, w, &tol, EigenMethod::Bisection).unwrap();
        let b = joint_spectrum_with(&m, 20, w, &tol, EigenMethod::ImplicitQl).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!((p.block_id, p.index_in_block), (q.block_id, q.index_in_block));
            assert!((p.y - q.y).abs() < 1e-12);
        }
    }
}
