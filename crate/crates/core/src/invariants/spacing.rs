use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extrapolate::{extrapolate_hbar, polyfit, Limit};
use super::labelled::LabelledSpectrum;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lattice::Labelling;

/// Iterated limit: hbar -> 0 at each x, then x -> 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleLimit {
    pub value: f64,
    pub per_x: Vec<(f64, Limit)>,
}

impl DoubleLimit {
    pub fn slope(&self) -> Option<f64> {
        self.per_x.first().and_then(|(_, l)| l.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrGradient {
    pub dx: DoubleLimit,
    pub dy: DoubleLimit,
    /// Slope of the approximate radial line through the focus-focus value.
    pub s0: f64,
}

fn ks_of(family: &[LabelledSpectrum]) -> Vec<u32> {
    family.iter().map(|s| s.k).collect()
}

/// a1, a2 at c for every member of the family.
pub fn probe_family(family: &[LabelledSpectrum], c: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    family.par_iter().map(|s| s.probe_a1a2(c)).collect()
}

/// x -> 0 limit from per-x values, fitting A + B x ln x.
fn x_limit(xs: &[f64], vals: &[f64]) -> Result<f64> {
    if xs.len() == 1 {
        return Ok(vals[0]);
    }
    let t: Vec<f64> = xs.iter().map(|x| x * x.ln()).collect();
    Ok(polyfit(&t, vals, 1)?[0])
}

fn double_limit(
    family: &[LabelledSpectrum],
    xs: &[f64],
    degree: usize,
    per_k: impl Fn(f64, &[(f64, f64)]) -> Vec<f64>,
    probe_at: impl Fn(f64) -> (f64, f64),
) -> Result<DoubleLimit> {
    if xs.is_empty() {
        return Err(Error::InvalidInput("empty x schedule".into()));
    }
    let ks = ks_of(family);
    let mut per_x = Vec::with_capacity(xs.len());
    for &x in xs {
        let samples = probe_family(family, probe_at(x))?;
        per_x.push((x, extrapolate_hbar(&ks, &per_k(x, &samples), degree)?));
    }
    let vals: Vec<f64> = per_x.iter().map(|(_, l)| l.value).collect();
    Ok(DoubleLimit { value: x_limit(xs, &vals)?, per_x })
}

/// Gradient of f_r at the origin from a1, a2 sampled at offsets x and mu x
/// to the right of the focus-focus value.
pub fn recover_fr_gradient(
    family: &[LabelledSpectrum],
    ff: (f64, f64),
    xs: &[f64],
    mu: f64,
    degree: usize,
) -> Result<FrGradient> {
    if !(mu > 1.0) {
        return Err(Error::InvalidInput(format!("mu must exceed 1, got {mu}")));
    }
    let ks = ks_of(family);
    let scale = 2.0 * std::f64::consts::PI / mu.ln();
    let (mut dx_x, mut dy_x) = (Vec::new(), Vec::new());
    for &x in xs {
        let near = probe_family(family, (ff.0 + x, ff.1))?;
        let far = probe_family(family, (ff.0 + mu * x, ff.1))?;
        let d1: Vec<f64> = near.iter().zip(&far).map(|(a, b)| scale * (a.0 - b.0)).collect();
        let d2: Vec<f64> = near.iter().zip(&far).map(|(a, b)| scale * (a.1 - b.1)).collect();
        dx_x.push((x, extrapolate_hbar(&ks, &d1, degree)?));
        dy_x.push((x, extrapolate_hbar(&ks, &d2, degree)?));
    }
    let lim = |v: &Vec<(f64, Limit)>| -> Result<DoubleLimit> {
        let vals: Vec<f64> = v.iter().map(|(_, l)| l.value).collect();
        Ok(DoubleLimit { value: x_limit(xs, &vals)?, per_x: v.clone() })
    };
    let dx = lim(&dx_x)?;
    let dy = lim(&dy_x)?;
    if !(dy.value > 0.0) {
        return Err(Error::SignError(dy.value));
    }
    let s0 = -dx.value / dy.value;
    Ok(FrGradient { dx, dy, s0 })
}

/// sigma_1(0) from a1 + s0 a2 along c = ff + (x, s0 x).
///
/// A jump by an integer between successive x is a change of action
/// basis; it is undone and the value reported in the first x's labelling.
pub fn recover_sigma1(
    family: &[LabelledSpectrum],
    ff: (f64, f64),
    s0: f64,
    xs: &[f64],
    degree: usize,
) -> Result<DoubleLimit> {
    let mut out = double_limit(
        family,
        xs,
        degree,
        |_, s| s.iter().map(|(a1, a2)| a1 + s0 * a2).collect(),
        |x| (ff.0 + x, ff.1 + s0 * x),
    )?;
    let mut shift = 0.0;
    for i in 1..out.per_x.len() {
        let jump = out.per_x[i].1.value + shift - out.per_x[i - 1].1.value;
        if jump.abs() > 0.5 {
            let n = jump.round();
            if (jump - n).abs() > 0.25 {
                return Err(Error::ActionDiscontinuity(n as i64));
            }
            shift -= n;
        }
        out.per_x[i].1.value += shift;
    }
    if out.per_x.len() > 1 {
        let xs: Vec<f64> = out.per_x.iter().map(|(x, _)| *x).collect();
        let vals: Vec<f64> = out.per_x.iter().map(|(_, l)| l.value).collect();
        out.value = x_limit(&xs, &vals)?;
    }
    Ok(out)
}

/// Twisting number p and the privileged labelling lambda^p_{j,l} = lambda_{j, l + p j}.
pub fn twisting_and_privileged(sigma1_0: f64, labelling: &Labelling, tol: &Tolerances) -> (i64, Labelling) {
    let p = (sigma1_0 + tol.twisting_snap).floor() as i64;
    let mut out = labelling.clone();
    for l in out.assignment.values_mut() {
        l.1 -= p * l.0;
    }
    (p, out)
}

/// Fractional part sigma_1(0) - p, with the snap window clamped to 0.
pub fn privileged_sigma1(sigma1_0: f64, p: i64) -> f64 {
    (sigma1_0 - p as f64).max(0.0)
}

/// S_{0,1} from a2 / d_y f_r + ln x / 2 pi along c = ff + (x, s0 x).
pub fn recover_s01(
    family: &[LabelledSpectrum],
    ff: (f64, f64),
    s0: f64,
    dy_fr: f64,
    xs: &[f64],
    degree: usize,
) -> Result<DoubleLimit> {
    if !(dy_fr > 0.0) {
        return Err(Error::SignError(dy_fr));
    }
    double_limit(
        family,
        xs,
        degree,
        |x, s| s.iter().map(|(_, a2)| a2 / dy_fr + x.ln() / (2.0 * std::f64::consts::PI)).collect(),
        |x| (ff.0 + x, ff.1 + s0 * x),
    )
}

/// Samples of g_mu(x) = a1 + mu a2 at ff + (x, mu x) after the hbar limit.
pub fn g_mu_sample(
    family: &[LabelledSpectrum],
    ff: (f64, f64),
    mu: f64,
    xs: &[f64],
    degree: usize,
) -> Result<Vec<(f64, Limit)>> {
    let ks = ks_of(family);
    xs.iter()
        .map(|&x| {
            let s = probe_family(family, (ff.0 + x, ff.1 + mu * x))?;
            let g: Vec<f64> = s.iter().map(|(a1, a2)| a1 + mu * a2).collect();
            Ok((x, extrapolate_hbar(&ks, &g, degree)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LabellingKind;

    #[test]
    fn twisting_floor() {
        let mut lab = Labelling::new(LabellingKind::Regular);
        lab.assignment.insert(0, (3, 1));
        let tol = Tolerances::default();
        let (p, l) = twisting_and_privileged(2.3, &lab, &tol);
        assert_eq!(p, 2);
        assert_eq!(l.get(0), Some((3, -5)));
        assert_eq!(twisting_and_privileged(0.1536, &lab, &tol).0, 0);
        let (p, _) = twisting_and_privileged(-0.4, &lab, &tol);
        assert_eq!(p, -1);
        assert!((privileged_sigma1(-0.4, p) - 0.6).abs() < 1e-12);
        assert_eq!(twisting_and_privileged(-1e-12, &lab, &tol).0, 0);
    }
}
