use serde::{Deserialize, Serialize};

use super::{alpha, beta, ModelKind, ModelSpec};
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Restriction of H to one eigenspace of J, in a basis where it is tridiagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalBlock {
    pub block_id: i64,
    pub j_value: f64,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TridiagonalBlock {
    fn new(block_id: i64, j_value: f64, diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch(format!(
                "block {block_id}: {} diagonal vs {} off-diagonal entries",
                diag.len(),
                offdiag.len()
            )));
        }
        if !j_value.is_finite() || diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!("block {block_id} has non-finite entries")));
        }
        Ok(Self { block_id, j_value, diag, offdiag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

pub fn build_blocks(model: &ModelSpec, k: u32, j_window: (f64, f64)) -> Result<Vec<TridiagonalBlock>> {
    build_blocks_with(model, k, j_window, &Tolerances::default())
}

pub fn build_blocks_with(
    model: &ModelSpec,
    k: u32,
    j_window: (f64, f64),
    tol: &Tolerances,
) -> Result<Vec<TridiagonalBlock>> {
    model.validate()?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let (lo, hi) = j_window;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let blocks = match model.kind {
        ModelKind::SpinOscillator => spin_blocks(k, lo, hi, tol)?,
        ModelKind::CoupledAngularMomenta => coupled_blocks(model, k, lo, hi, tol)?,
    };
    if blocks.is_empty() {
        return Err(Error::EmptyWindow(lo, hi));
    }
    Ok(blocks)
}

fn check_constant_j(block_id: i64, values: impl Iterator<Item = f64>, j: f64, rel: f64) -> Result<()> {
    for v in values {
        if (v - j).abs() > rel * j.abs().max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "block {block_id}: J eigenvalue {v} differs from {j}"
            )));
        }
    }
    Ok(())
}

// Basis f_n (x) e_l with n - l = m fixed; J = 1 + m/k.
fn spin_blocks(k: u32, lo: f64, hi: f64, tol: &Tolerances) -> Result<Vec<TridiagonalBlock>> {
    if !hi.is_finite() {
        return Err(Error::InvalidInput(
            "the spin-oscillator has infinitely many blocks; give a bounded J window".into(),
        ));
    }
    let kf = k as f64;
    let dim = 2 * k as usize;
    let m_min = -(dim as i64 - 1);
    let m_lo = (((lo - 1.0) * kf).ceil() as i64).max(m_min);
    let m_hi = ((hi - 1.0) * kf).floor() as i64;
    let pref = 1.0 / (2.0 * std::f64::consts::SQRT_2 * kf);
    let mut out = Vec::new();
    for m in m_lo..=m_hi {
        let l0 = (-m).max(0) as usize;
        let j = 1.0 + m as f64 / kf;
        check_constant_j(
            m,
            (l0..dim).map(|l| {
                let n = (l as i64 + m) as f64;
                (n + 0.5) / kf + (2.0 * (kf - l as f64) - 1.0) / (2.0 * kf)
            }),
            j,
            tol.block_j_rel,
        )?;
        let diag = vec![0.0; dim - l0];
        let offdiag = (l0..dim - 1)
            .map(|l| {
                let n = (l as i64 + m) as f64;
                pref * ((n + 1.0) / kf).sqrt() * beta(l, dim)
            })
            .collect();
        out.push(TridiagonalBlock::new(m, j, diag, offdiag)?);
    }
    Ok(out)
}

// Basis e_l (x) e_m with s = l + m fixed, ordered by l.
fn coupled_blocks(
    model: &ModelSpec,
    k: u32,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<Vec<TridiagonalBlock>> {
    let (n1, n2) = model.sphere_dims(k)?;
    let kf = k as f64;
    let t = model.t;
    let top = (n1 + n2 - 2) as i64;
    let z = |l: usize, n: usize| (n as f64 - 1.0 - 2.0 * l as f64) / n as f64;
    let mut out = Vec::new();
    for s in (0..=top as usize).rev() {
        let block_id = top - s as i64;
        let j = (top as f64 - 2.0 * s as f64) / (2.0 * kf);
        if j < lo || j > hi {
            continue;
        }
        let l_min = s.saturating_sub(n2 - 1);
        let l_max = s.min(n1 - 1);
        check_constant_j(
            block_id,
            (l_min..=l_max).map(|l| model.r1 * z(l, n1) + model.r2 * z(s - l, n2)),
            j,
            tol.block_j_rel,
        )?;
        let diag = (l_min..=l_max)
            .map(|l| {
                let z1 = z(l, n1);
                (1.0 - t) * z1 + t * z1 * z(s - l, n2)
            })
            .collect();
        let offdiag = (l_min..l_max)
            .map(|l| {
                let m = s - l;
                0.5 * t * beta(l, n1) / (kf * model.r1) * alpha(m, n2) / (kf * model.r2)
            })
            .collect();
        out.push(TridiagonalBlock::new(block_id, j, diag, offdiag)?);
    }
    Ok(out)
}
