use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::extrapolate::lstsq;
use crate::error::{Error, Result};

/// Partial derivatives d_x^i d_y^j f_r(0), keyed by (i, j); absent entries read as 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrJet {
    pub derivs: BTreeMap<(usize, usize), f64>,
}

impl FrJet {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.derivs.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.derivs.insert((i, j), v);
    }
}

/// Taylor coefficients S_{l,m} of the singular part of the action; absent entries read as 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaylorInvariant {
    pub coeffs: BTreeMap<(usize, usize), f64>,
}

impl TaylorInvariant {
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.coeffs.get(&(l, m)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, l: usize, m: usize, v: f64) {
        self.coeffs.insert((l, m), v);
    }
}

/// g_mu samples and the coefficients of g_mu(x) ~ sum x^n (c_n + d_n ln x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMuExpansion {
    pub mu: f64,
    pub x_samples: Vec<(f64, f64)>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

// Truncated power series in x.

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

fn div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut q = vec![0.0; n];
    for k in 0..n {
        let s: f64 = (1..=k).map(|i| b[i] * q[k - i]).sum();
        q[k] = (a[k] - s) / b[0];
    }
    q
}

fn deriv(a: &[f64]) -> Vec<f64> {
    (1..a.len()).map(|i| i as f64 * a[i]).collect()
}

fn integrate(a: &[f64], c: f64) -> Vec<f64> {
    std::iter::once(c).chain(a.iter().enumerate().map(|(i, v)| v / (i + 1) as f64)).collect()
}

fn atan_series(f: &[f64]) -> Vec<f64> {
    let mut g = mul(f, f);
    g[0] += 1.0;
    integrate(&div(&deriv(f), &g), f[0].atan())
}

fn log_series(g: &[f64]) -> Vec<f64> {
    integrate(&div(&deriv(g), g), g[0].ln())
}

/// Series of f_r(x, mu x) and of d_x f_r, d_y f_r along the same line, to x^len-1.
fn jet_series(jet: &FrJet, mu: f64, len: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let term = |m: usize, di: usize, dj: usize| -> f64 {
        (0..=m)
            .map(|i| {
                let j = m - i;
                jet.get(i + di, j + dj) * mu.powi(j as i32) / (factorial(i) * factorial(j))
            })
            .sum()
    };
    let f = (0..len + 1).map(|m| term(m, 0, 0)).collect();
    let q = (0..len).map(|m| term(m, 1, 0)).collect();
    let p = (0..len).map(|m| term(m, 0, 1)).collect();
    (f, q, p)
}

/// Coefficients (c_n, d_n), n = 0..=order, of g_mu for a given jet (to
/// order + 1) and Taylor series (to order + 1).
pub fn log_expansion_coefficients(jet: &FrJet, s: &TaylorInvariant, mu: f64, order: usize) -> Vec<(f64, f64)> {
    let len = order + 1;
    let (fser, q, p) = jet_series(jet, mu, len);
    let big_f: Vec<f64> = fser[1..=len].to_vec();
    let qmp: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a + mu * b).collect();
    let sigma = |which: usize| -> Vec<f64> {
        (0..len)
            .map(|deg| {
                (0..=deg + 1)
                    .map(|l| {
                        let m = deg + 1 - l;
                        match which {
                            1 if l > 0 => l as f64 * s.get(l, m) * mu.powi(m as i32),
                            2 if m > 0 => m as f64 * s.get(l, m) * mu.powi(m as i32 - 1),
                            _ => 0.0,
                        }
                    })
                    .sum()
            })
            .collect()
    };
    let s1 = sigma(1);
    let s2 = sigma(2);
    let at = atan_series(&big_f);
    let mut g = mul(&big_f, &big_f);
    g[0] += 1.0;
    let lg = log_series(&g);
    let bracket: Vec<f64> = s2.iter().zip(&lg).map(|(a, b)| a - b / (4.0 * PI)).collect();
    let prod = mul(&bracket, &qmp);
    (0..len)
        .map(|n| (s1[n] - at[n] / (2.0 * PI) + prod[n], -qmp[n] / (2.0 * PI)))
        .collect()
}

/// Solution of one linear inversion step with its determinant diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearStep {
    pub values: Vec<f64>,
    pub det: f64,
    pub det_formula: f64,
    pub condition: f64,
}

fn check_mus(mus: &[f64], need: usize) -> Result<()> {
    if mus.len() != need {
        return Err(Error::DimensionMismatch(format!("need {need} mu values, got {}", mus.len())));
    }
    for (i, a) in mus.iter().enumerate() {
        if !(*a > 0.0) {
            return Err(Error::InvalidInput(format!("mu must be positive, got {a}")));
        }
        if mus[..i].iter().any(|b| b == a) {
            return Err(Error::DuplicateMu(*a));
        }
    }
    Ok(())
}

/// prod_{i<j} (mu_i - mu_j)
fn vandermonde(mus: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..mus.len() {
        for j in i + 1..mus.len() {
            v *= mus[i] - mus[j];
        }
    }
    v
}

fn solve_square(a: DMatrix<f64>, b: DVector<f64>, det_formula: f64, max_cond: f64) -> Result<LinearStep> {
    let det = a.determinant();
    let (values, condition) = lstsq(a, b)?;
    if condition > max_cond {
        return Err(Error::IllConditioned(condition));
    }
    Ok(LinearStep { values, det, det_formula, condition })
}

/// The order n+1 jet from d_n at n+2 distinct mu values; values are
/// d_x^j d_y^{n+1-j} f_r(0) for j = 0..=n+1.
pub fn solve_jet_order(n: usize, mus: &[f64], d_values: &[f64], max_cond: f64) -> Result<LinearStep> {
    check_mus(mus, n + 2)?;
    if d_values.len() != mus.len() {
        return Err(Error::DimensionMismatch("one d_n value per mu".into()));
    }
    let a = DMatrix::from_fn(n + 2, n + 2, |i, j| binom(n + 1, j) * mus[i].powi((n + 1 - j) as i32));
    let scale = -2.0 * PI * factorial(n);
    let b = DVector::from_iterator(n + 2, d_values.iter().map(|d| scale * d));
    let formula = (0..=n + 1).map(|j| binom(n + 1, j)).product::<f64>() * vandermonde(mus);
    solve_square(a, b, formula, max_cond)
}

fn taylor_entry(n: usize, q: usize, mu: f64, jet: &FrJet) -> f64 {
    let r = (n + 1 - q) as f64;
    mu.powi((n + 1 - q) as i32) * (q as f64 + r * jet.get(0, 1)) + r * jet.get(1, 0) * mu.powi(n as i32 - q as i32)
}

/// The Taylor coefficients S_{q, n+1-q}, q = 0..=n+1, from c_n at n+2 distinct mu.
/// `known` must hold the coefficients of total order <= n; entries of order n+1 are ignored.
pub fn solve_taylor_order(
    n: usize,
    mus: &[f64],
    c_values: &[f64],
    jet: &FrJet,
    known: &TaylorInvariant,
    max_cond: f64,
) -> Result<LinearStep> {
    check_mus(mus, n + 2)?;
    if c_values.len() != mus.len() {
        return Err(Error::DimensionMismatch("one c_n value per mu".into()));
    }
    let mut lower = known.clone();
    lower.coeffs.retain(|&(l, m), _| l + m <= n);
    let a = DMatrix::from_fn(n + 2, n + 2, |i, q| taylor_entry(n, q, mus[i], jet));
    let b = DVector::from_iterator(
        n + 2,
        mus.iter().zip(c_values).map(|(&mu, &c)| c - log_expansion_coefficients(jet, &lower, mu, n)[n].0),
    );
    let diag: f64 = (0..=n + 1).map(|q| q as f64 + (n + 1 - q) as f64 * jet.get(0, 1)).product();
    solve_square(a, b, diag * vandermonde(mus), max_cond)
}

/// One coefficient S_{q, n+1-q} from c_n at a single mu, all other
/// order n+1 coefficients taken from `known`.
pub fn solve_taylor_single(n: usize, q: usize, mu: f64, c_n: f64, jet: &FrJet, known: &TaylorInvariant) -> f64 {
    let mut rest = known.clone();
    rest.coeffs.remove(&(q, n + 1 - q));
    let base = log_expansion_coefficients(jet, &rest, mu, n)[n].0;
    (c_n - base) / taylor_entry(n, q, mu, jet)
}

/// The matrix as printed in the determinant lemma, with entries
/// mu_i^{n-q} (mu_i (n+1) d_y f + (n-q+1) d_x f).
pub fn lemma_a_matrix(n: usize, mus: &[f64], dxf: f64, dyf: f64) -> DMatrix<f64> {
    DMatrix::from_fn(mus.len(), n + 2, |i, q| {
        let mu = mus[i];
        mu.powi((n + 1 - q) as i32) * (n + 1) as f64 * dyf + (n + 1 - q) as f64 * dxf * mu.powi(n as i32 - q as i32)
    })
}

/// (n+1)^{n+2} (d_y f)^{n+2} prod_{i<j} (mu_i - mu_j)
pub fn lemma_det_formula(n: usize, mus: &[f64], dyf: f64) -> f64 {
    (((n + 1) as f64) * dyf).powi(n as i32 + 2) * vandermonde(mus)
}

/// Result of a weighted log-basis fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub c: f64,
    pub d: f64,
    pub condition: f64,
}

/// Fits x^n (c_n + d_n ln x) plus `extra` higher orders to g minus the known
/// lower-order terms; rows are weighted by x^-n and columns normalised.
pub fn fit_log_expansion(
    samples: &[(f64, f64)],
    n: usize,
    known: &[(f64, f64)],
    extra: usize,
    max_cond: f64,
) -> Result<LogFit> {
    if known.len() < n {
        return Err(Error::InvalidInput(format!("orders below {n} must be known")));
    }
    let cols = 2 * (extra + 1);
    if samples.len() < cols {
        return Err(Error::TooSparse(format!("{} samples for {cols} unknowns", samples.len())));
    }
    let mut a = DMatrix::from_fn(samples.len(), cols, |i, c| {
        let x = samples[i].0;
        let p = x.powi((n + c / 2) as i32 - n as i32);
        if c % 2 == 0 { p } else { p * x.ln() }
    });
    let b = DVector::from_iterator(
        samples.len(),
        samples.iter().map(|&(x, g)| {
            let lower: f64 = known[..n].iter().enumerate().map(|(l, (c, d))| x.powi(l as i32) * (c + d * x.ln())).sum();
            (g - lower) / x.powi(n as i32)
        }),
    );
    let norms: Vec<f64> = (0..cols).map(|c| a.column(c).norm()).collect();
    for (c, nm) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / nm);
    }
    let (sol, condition) = lstsq(a, b)?;
    if condition > max_cond {
        return Err(Error::IllConditioned(condition));
    }
    Ok(LogFit { c: sol[0] / norms[0], d: sol[1] / norms[1], condition })
}

/// d_x d_y f_r(0) from g_mu(x) when d_x^2 f = d_y^2 f = 0, given the
/// order-0 coefficients c0, d0 = -(d_x f + mu d_y f) / 2 pi.
pub fn dxdy_from_g(g: f64, x: f64, mu: f64, c0: f64, d0: f64) -> f64 {
    -PI * (g - c0 - d0 * x.ln()) / (mu * x * x.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin_jet() -> FrJet {
        let mut j = FrJet::default();
        j.set(1, 0, 0.0);
        j.set(0, 1, 2.0);
        j.set(2, 0, 0.0);
        j.set(1, 1, -0.25);
        j.set(0, 2, 0.0);
        j
    }

    fn spin_s() -> TaylorInvariant {
        let mut s = TaylorInvariant::default();
        s.set(0, 1, 5.0 * 2f64.ln() / (2.0 * PI));
        s.set(1, 1, 1.0 / (8.0 * PI));
        s
    }

    #[test]
    fn series_helpers() {
        let f = [0.5, 1.0, 0.0, 0.0];
        let a = atan_series(&f);
        // d/dx atan(0.5 + x) at 0 is 1 / 1.25
        assert!((a[0] - 0.5f64.atan()).abs() < 1e-15);
        assert!((a[1] - 0.8).abs() < 1e-15);
        let l = log_series(&[2.0, 1.0, 0.0]);
        assert!((l[1] - 0.5).abs() < 1e-15 && (l[2] + 0.125).abs() < 1e-15);
    }

    #[test]
    fn spin_zeroth_order() {
        for mu in [0.5, 1.0, 2.0] {
            let (c0, d0) = log_expansion_coefficients(&spin_jet(), &spin_s(), mu, 0)[0];
            let want = -(2.0 * mu).atan() / (2.0 * PI) + 5.0 * mu * 2f64.ln() / PI
                - mu / (2.0 * PI) * (1.0 + 4.0 * mu * mu).ln();
            assert!((c0 - want).abs() < 1e-14);
            assert!((d0 + mu / PI).abs() < 1e-14);
        }
    }

    #[test]
    fn spin_first_order_matches_closed_form() {
        let jet = spin_jet();
        for mu in [0.5, 1.0, 2.0] {
            let (c1, d1) = log_expansion_coefficients(&jet, &spin_s(), mu, 1)[1];
            assert!((d1 - mu / (4.0 * PI)).abs() < 1e-14);
            let k = 5.0 * 2f64.ln() / PI - 1.0 / (2.0 * PI) - (1.0 + 4.0 * mu * mu).ln() / (2.0 * PI);
            let s11 = (c1 / mu - jet.get(1, 1) * k) / 3.0;
            assert!((s11 - 1.0 / (8.0 * PI)).abs() < 1e-14, "{s11}");
            let single = solve_taylor_single(1, 1, mu, c1, &jet, &spin_s());
            assert!((single - 1.0 / (8.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn jet_round_trip() {
        let mut jet = FrJet::default();
        for (i, j, v) in [(1, 0, -0.3), (0, 1, 1.7), (2, 0, 0.2), (1, 1, -0.4), (0, 2, 0.9), (3, 0, 0.1), (2, 1, 0.05), (1, 2, -0.2), (0, 3, 0.3)] {
            jet.set(i, j, v);
        }
        let s = TaylorInvariant::default();
        for n in 0..=2 {
            let mus: Vec<f64> = (0..n + 2).map(|i| 0.5 + 0.7 * i as f64).collect();
            let d: Vec<f64> = mus.iter().map(|&m| log_expansion_coefficients(&jet, &s, m, n)[n].1).collect();
            let out = solve_jet_order(n, &mus, &d, 1e12).unwrap();
            for j in 0..=n + 1 {
                assert!((out.values[j] - jet.get(j, n + 1 - j)).abs() < 1e-10);
            }
            assert!((out.det - out.det_formula).abs() < 1e-9 * out.det.abs());
        }
        assert!(matches!(solve_jet_order(0, &[1.0, 1.0], &[0.0, 0.0], 1e12), Err(Error::DuplicateMu(_))));
    }

    #[test]
    fn taylor_round_trip() {
        let mut jet = FrJet::default();
        for (i, j, v) in [(1, 0, -0.3), (0, 1, 1.7), (2, 0, 0.2), (1, 1, -0.4), (0, 2, 0.9), (3, 0, 0.1), (2, 1, 0.05), (1, 2, -0.2), (0, 3, 0.3)] {
            jet.set(i, j, v);
        }
        let mut s = TaylorInvariant::default();
        for (l, m, v) in [(1, 0, 0.15), (0, 1, 0.5), (2, 0, 0.03), (1, 1, -0.07), (0, 2, 0.11)] {
            s.set(l, m, v);
        }
        let mus = [0.6, 1.1, 1.9];
        let c: Vec<f64> = mus.iter().map(|&m| log_expansion_coefficients(&jet, &s, m, 1)[1].0).collect();
        let out = solve_taylor_order(1, &mus, &c, &jet, &s, 1e12).unwrap();
        for (q, want) in [0.11, -0.07, 0.03].iter().enumerate() {
            assert!((out.values[q] - want).abs() < 1e-10);
        }
        assert!((out.det - out.det_formula).abs() < 1e-9 * out.det.abs());
    }

    #[test]
    fn lemma_determinant() {
        let mus = [1.0, 2.0, 3.0];
        let a = lemma_a_matrix(1, &mus, -1.0 / 3.0, 10.0 / 3.0);
        let f = lemma_det_formula(1, &mus, 10.0 / 3.0);
        assert!((a.determinant() - f).abs() < 1e-9 * f.abs());
    }

    #[test]
    fn log_fit_manufactured() {
        let (c0, d0, c1, d1) = (0.4, -0.6, 1.3, 0.25);
        let xs: Vec<f64> = (0..30).map(|i| 1e-3 * (100f64).powf(i as f64 / 29.0)).collect();
        let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x, c0 + d0 * x.ln() + x * (c1 + d1 * x.ln()))).collect();
        let f0 = fit_log_expansion(&samples, 0, &[], 1, 1e12).unwrap();
        assert!((f0.c - c0).abs() < 1e-3 && (f0.d - d0).abs() < 1e-3);
        let f1 = fit_log_expansion(&samples, 1, &[(c0, d0)], 0, 1e12).unwrap();
        assert!((f1.c - c1).abs() < 1e-3 && (f1.d - d1).abs() < 1e-3);
        let poly: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1.0 + 2.0 * x)).collect();
        assert!(fit_log_expansion(&poly, 0, &[], 1, 1e12).unwrap().d.abs() < 1e-9);
    }
}
