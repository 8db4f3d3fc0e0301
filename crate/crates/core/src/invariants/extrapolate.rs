use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A semiclassical limit together with the per-k values it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limit {
    pub value: f64,
    /// Slope of log|v_k - value| against log k, when the errors are resolvable.
    pub slope: Option<f64>,
    pub samples: Vec<(u32, f64)>,
}

/// Least-squares fit of v(hbar) = c0 + c1 hbar + ... + c_d hbar^d.
pub fn extrapolate_hbar(ks: &[u32], vals: &[f64], degree: usize) -> Result<Limit> {
    if ks.len() != vals.len() {
        return Err(Error::DimensionMismatch(format!("{} k values, {} samples", ks.len(), vals.len())));
    }
    if ks.len() <= degree {
        return Err(Error::TooSparse(format!("{} samples for a degree {degree} fit", ks.len())));
    }
    let hs: Vec<f64> = ks.iter().map(|&k| 1.0 / k as f64).collect();
    let coef = polyfit(&hs, vals, degree)?;
    let value = coef[0];
    let errs: Vec<f64> = vals.iter().map(|v| (v - value).abs()).collect();
    Ok(Limit {
        value,
        slope: loglog_slope(ks, &errs),
        samples: ks.iter().copied().zip(vals.iter().copied()).collect(),
    })
}

/// Limit taken as the value at the largest k.
pub fn last_value(ks: &[u32], vals: &[f64], reference: Option<f64>) -> Limit {
    let value = *vals.last().unwrap_or(&f64::NAN);
    let r = reference.unwrap_or(value);
    let errs: Vec<f64> = vals.iter().map(|v| (v - r).abs()).collect();
    Limit {
        value,
        slope: loglog_slope(ks, &errs),
        samples: ks.iter().copied().zip(vals.iter().copied()).collect(),
    }
}

/// Regression slope of log err against log k; None if any error is
/// below 1e-13 or fewer than two samples exist.
pub fn loglog_slope(ks: &[u32], errs: &[f64]) -> Option<f64> {
    if ks.len() < 2 || errs.iter().any(|e| !(e.abs() > 1e-13)) {
        return None;
    }
    let lx: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.abs().ln()).collect();
    polyfit(&lx, &ly, 1).ok().map(|c| c[1])
}

pub(crate) fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    lstsq(a, b).map(|(c, _)| c)
}

/// SVD least squares; returns the solution and the condition number.
pub(crate) fn lstsq(a: DMatrix<f64>, b: DVector<f64>) -> Result<(Vec<f64>, f64)> {
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd
        .solve(&b, smax * 1e-15)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    Ok((x.iter().copied().collect(), cond))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_fit_is_exact_on_quadratics() {
        let ks = [100, 200, 300, 400];
        let v: Vec<f64> = ks.iter().map(|&k| {
            let h = 1.0 / k as f64;
            1.5 + 2.0 * h - 40.0 * h * h
        }).collect();
        let l = extrapolate_hbar(&ks, &v, 2).unwrap();
        assert!((l.value - 1.5).abs() < 1e-10);
    }

    #[test]
    fn slope_of_power_law() {
        let ks = [10, 20, 40, 80];
        let e: Vec<f64> = ks.iter().map(|&k| 3.0 * (k as f64).powf(-1.5)).collect();
        assert!((loglog_slope(&ks, &e).unwrap() + 1.5).abs() < 1e-10);
        assert!(loglog_slope(&ks, &[0.0; 4]).is_none());
    }
}
