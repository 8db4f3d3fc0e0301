//! Eigenvalues of real symmetric tridiagonal matrices.
//!
//! Two independent routes share one contract: Sturm-sequence bisection
//! (per-eigenvalue accuracy control) and the implicit-shift QL sweep
//! (faster, used by default for large blocks).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Bisection,
    #[default]
    ImplicitQl,
}

fn check_shape(diag: &[f64], offdiag: &[f64]) -> Result<()> {
    if diag.is_empty() {
        return Err(Error::DimensionMismatch("empty tridiagonal matrix".into()));
    }
    if offdiag.len() + 1 != diag.len() {
        return Err(Error::DimensionMismatch(format!(
            "offdiag has length {}, expected {}",
            offdiag.len(),
            diag.len() - 1
        )));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    Ok(())
}

/// All eigenvalues of the symmetric tridiagonal matrix, ascending.
pub fn eigs_sym_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    eigs_with(diag, offdiag, EigenMethod::default(), 1e-12, 60)
}

pub fn eigs_with(
    diag: &[f64],
    offdiag: &[f64],
    method: EigenMethod,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    check_shape(diag, offdiag)?;
    match method {
        EigenMethod::Bisection => Ok(bisection_all(diag, offdiag, rel_tol)),
        EigenMethod::ImplicitQl => implicit_ql(diag, offdiag, max_iter),
    }
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin_bounds(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { offdiag[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Number of eigenvalues strictly below `x` (Sturm sign count of the LDLᵀ pivots).
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * (offdiag[i - 1].abs() + f64::MIN_POSITIVE) } else { q };
        q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisection_all(diag: &[f64], offdiag: &[f64], rel_tol: f64) -> Vec<f64> {
    let n = diag.len();
    let (lo0, hi0) = gershgorin_bounds(diag, offdiag);
    let radius = lo0.abs().max(hi0.abs()).max(f64::MIN_POSITIVE);
    let tol = (rel_tol * radius).max(4.0 * f64::EPSILON * radius);
    let mut out = Vec::with_capacity(n);
    let mut lower = lo0;
    for idx in 0..n {
        // eigenvalue idx is the smallest x with count(x) > idx
        let mut lo = lower;
        let mut hi = hi0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(diag, offdiag, mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        lower = lo;
    }
    out
}

fn implicit_ql(diag: &[f64], offdiag: &[f64], max_iter: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::NumericalFailure(format!(
                    "implicit QL did not converge for eigenvalue {l} after {max_iter} sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}
