use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use super::extrapolate::{extrapolate_hbar, lstsq, Limit};
use crate::error::{Error, Result};
use crate::models::JointSpectrum;

/// Which half of the strip is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSide {
    Below,
    Above,
}

/// Scaled count (hbar^{2-delta} / 2c) N over |x - x0| <= c hbar^delta.
pub fn strip_count(spectrum: &JointSpectrum, delta: f64, c: f64, x0: f64, cut: Option<(f64, CountSide)>) -> (usize, f64) {
    let h = spectrum.hbar();
    let w = c * h.powf(delta);
    let n = spectrum
        .points
        .iter()
        .filter(|p| (p.x - x0).abs() <= w)
        .filter(|p| match cut {
            None => true,
            Some((y0, CountSide::Below)) => p.y <= y0,
            Some((y0, CountSide::Above)) => p.y > y0,
        })
        .count();
    (n, h.powf(2.0 - delta) / (2.0 * c) * n as f64)
}

/// Height S_{0,0} (or its complement above y0) from strip counts,
/// extrapolated in hbar with a polynomial of the given degree.
pub fn height_invariant(
    spectra: &[JointSpectrum],
    delta: f64,
    c: f64,
    ff: (f64, f64),
    side: CountSide,
    degree: usize,
) -> Result<Limit> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let mut ks = Vec::new();
    let mut vals = Vec::new();
    for s in spectra {
        let (n, v) = strip_count(s, delta, c, ff.0, Some((ff.1, side)));
        if n < 10 {
            return Err(Error::WindowTooNarrow(n));
        }
        ks.push(s.k);
        vals.push(v);
    }
    extrapolate_hbar(&ks, &vals, degree)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DHProfile {
    pub delta: f64,
    pub c_width: f64,
    pub samples: Vec<(f64, f64)>,
    /// Abscissae where the slope changes, inside the support.
    pub kinks: Vec<f64>,
}

/// Duistermaat-Heckman density estimate on x_grid (assumed uniform and increasing).
pub fn dh_profile(spectrum: &JointSpectrum, delta: f64, c: f64, x_grid: &[f64]) -> DHProfile {
    let samples: Vec<(f64, f64)> = x_grid.iter().map(|&x| (x, strip_count(spectrum, delta, c, x, None).1)).collect();
    let w = c * spectrum.hbar().powf(delta);
    let kinks = detect_kinks(&samples, w);
    DHProfile { delta, c_width: c, samples, kinks }
}

/// Second differences at stride 2w; each run of same-sign values above
/// 0.3 w is one kink, located at its weighted centroid.
pub fn detect_kinks(samples: &[(f64, f64)], w: f64) -> Vec<f64> {
    if samples.len() < 3 {
        return Vec::new();
    }
    let step = samples[1].0 - samples[0].0;
    let s = ((2.0 * w / step).round() as usize).max(1);
    if samples.len() <= 2 * s {
        return Vec::new();
    }
    let tau = 0.3 * w;
    let rho_at = |x: f64| -> f64 {
        let i = ((x - samples[0].0) / step).round();
        if i < 0.0 || i as usize >= samples.len() {
            0.0
        } else {
            samples[i as usize].1
        }
    };
    let mut kinks = Vec::new();
    let mut run: Vec<(f64, f64)> = Vec::new();
    let mut flush = |run: &mut Vec<(f64, f64)>| {
        if !run.is_empty() {
            let wsum: f64 = run.iter().map(|r| r.1.abs()).sum();
            let xc = run.iter().map(|r| r.0 * r.1.abs()).sum::<f64>() / wsum;
            if rho_at(xc - 2.0 * w) > tau && rho_at(xc + 2.0 * w) > tau {
                kinks.push(xc);
            }
            run.clear();
        }
    };
    for i in s..samples.len() - s {
        let d = samples[i + s].1 - 2.0 * samples[i].1 + samples[i - s].1;
        let same = run.last().map_or(true, |r: &(f64, f64)| r.1.signum() == d.signum());
        if d.abs() > tau && same {
            run.push((samples[i].0, d));
        } else {
            flush(&mut run);
            if d.abs() > tau {
                run.push((samples[i].0, d));
            }
        }
    }
    flush(&mut run);
    kinks
}

/// Location and strength of a logarithmic peak of the inverse spacings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusFocus {
    pub x0: f64,
    pub y0: f64,
    /// Peak inverse spacing over the column median.
    pub contrast: f64,
    /// Coefficient C of the fit hbar/dE ~ C ln|y - y0| + D (negative at a peak).
    pub log_coefficient: f64,
}

const END_SKIP: usize = 3;
const MIN_CONTRAST: f64 = 1.25;

fn gap_profile(ys: &[f64], hbar: f64) -> Vec<(f64, f64)> {
    ys.windows(2).map(|w| ((w[0] + w[1]) / 2.0, hbar / (w[1] - w[0]))).collect()
}

/// (gap midpoint, hbar / gap) along the column nearest `x`.
pub fn inverse_spacings(spectrum: &JointSpectrum, x: f64) -> Vec<(f64, f64)> {
    let h = spectrum.hbar();
    spectrum
        .columns()
        .iter()
        .min_by(|a, b| (a.x - x).abs().total_cmp(&(b.x - x).abs()))
        .map_or_else(Vec::new, |c| gap_profile(&c.ys, h))
}

fn column_peak(x: f64, ys: &[f64], hbar: f64) -> Option<FocusFocus> {
    if ys.len() < 2 * END_SKIP + 4 {
        return None;
    }
    let inv = gap_profile(ys, hbar);
    let (imax, peak) = inv.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(i, v)| (i, v.1))?;
    if imax < END_SKIP || imax + END_SKIP >= inv.len() {
        return None;
    }
    let mut sorted: Vec<f64> = inv.iter().map(|v| v.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let (y0, log_coefficient) = log_peak_fit(&inv, imax)?;
    Some(FocusFocus { x0: x, y0, contrast: peak / median, log_coefficient })
}

// Fits hbar/dE = C ln|y - y0| + D + E (y - y0) to the inverse spacings
// 3..=30 gaps away from the largest one, minimising the residual over y0.
fn log_peak_fit(inv: &[(f64, f64)], imax: usize) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = inv
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let d = i.abs_diff(imax);
            (3..=30).contains(&d)
        })
        .map(|(_, v)| *v)
        .collect();
    if pts.len() < 6 {
        return None;
    }
    let fit = |y0: f64| -> Option<(f64, f64)> {
        let a = DMatrix::from_fn(pts.len(), 3, |i, c| match c {
            0 => (pts[i].0 - y0).abs().ln(),
            1 => 1.0,
            _ => pts[i].0 - y0,
        });
        let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
        let (coef, _) = lstsq(a.clone(), b.clone()).ok()?;
        let r = &b - &a * DVector::from_column_slice(&coef);
        Some((r.norm_squared(), coef[0]))
    };
    let gap_lo = inv[imax].0 - inv[imax.saturating_sub(1)].0;
    let gap_hi = inv[(imax + 1).min(inv.len() - 1)].0 - inv[imax].0;
    let (mut lo, mut hi) = (inv[imax].0 - gap_lo, inv[imax].0 + gap_hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if fit(m1)?.0 < fit(m2)?.0 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let y0 = (lo + hi) / 2.0;
    Some((y0, fit(y0)?.1))
}

/// Searches the columns within `radius` of x_c for an interior logarithmic
/// peak; NoPeak means the candidate is elliptic-elliptic.
pub fn classify_candidate(spectrum: &JointSpectrum, x_c: f64, radius: f64) -> Result<FocusFocus> {
    let h = spectrum.hbar();
    spectrum
        .columns()
        .iter()
        .filter(|c| (c.x - x_c).abs() <= radius)
        .filter_map(|c| column_peak(c.x, &c.ys, h))
        .filter(|p| p.contrast >= MIN_CONTRAST && p.log_coefficient < 0.0)
        .max_by(|a, b| a.contrast.total_cmp(&b.contrast))
        .ok_or(Error::NoPeak(x_c))
}

/// The strongest focus-focus peak among the candidate abscissae.
pub fn locate_focus_focus(spectrum: &JointSpectrum, candidates: &[f64], radius: f64) -> Result<FocusFocus> {
    let mut best: Option<FocusFocus> = None;
    for &x in candidates {
        if let Ok(p) = classify_candidate(spectrum, x, radius) {
            if best.map_or(true, |b| p.contrast > b.contrast) {
                best = Some(p);
            }
        }
    }
    best.ok_or_else(|| Error::NoPeak(candidates.first().copied().unwrap_or(f64::NAN)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::JointPoint;

    fn rect_spectrum(k: u32) -> JointSpectrum {
        let h = 1.0 / k as f64;
        let mut points = Vec::new();
        for j in 0..(2 * k as i64) {
            for l in 0..k as usize {
                points.push(JointPoint { x: j as f64 * h, y: l as f64 * h, block_id: j, index_in_block: l });
            }
        }
        JointSpectrum { k, points, window: None }
    }

    #[test]
    fn flat_profile_and_no_peak() {
        let s = rect_spectrum(100);
        let grid: Vec<f64> = (0..=20).map(|i| 0.5 + 0.05 * i as f64).collect();
        let p = dh_profile(&s, 0.25, 1.0, &grid);
        // columns are on the lattice, so counts only fluctuate by one column
        for (_, r) in &p.samples {
            assert!((r - 1.0).abs() < 0.05, "{r}");
        }
        assert!(p.kinks.is_empty());
        assert!(matches!(classify_candidate(&s, 1.0, 0.2), Err(Error::NoPeak(_))));
    }

    #[test]
    fn window_too_narrow() {
        let s = rect_spectrum(10);
        let r = height_invariant(&[s], 0.4, 0.01, (1.0, 0.5), CountSide::Below, 0);
        assert!(matches!(r, Err(Error::WindowTooNarrow(_))));
    }
}
