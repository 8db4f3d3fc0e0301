use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counting::{
    classify_candidate, dh_profile, height_invariant, inverse_spacings, locate_focus_focus, CountSide, DHProfile, FocusFocus,
};
use super::extrapolate::{extrapolate_hbar, Limit};
use super::labelled::LabelledSpectrum;
use super::polygon::{polygon_recover, PolygonEstimate};
use super::spacing::{
    g_mu_sample, privileged_sigma1, recover_fr_gradient, recover_s01, recover_sigma1, DoubleLimit, FrGradient,
};
use super::taylor::{dxdy_from_g, log_expansion_coefficients, solve_taylor_single, FrJet, TaylorInvariant};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lattice::{glue_global, label_columns, ColumnOrigin, Domain, GlobalLabelling, Labelling, Region};
use crate::models::{joint_spectrum_with, JointSpectrum, ModelKind, ModelSpec, Window};
use crate::eigen::EigenMethod;

/// Knobs of the end-to-end invariant recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// k schedule for the hbar -> 0 limits.
    pub ks: Vec<u32>,
    /// Probe offsets x from the focus-focus value.
    pub xs: Vec<f64>,
    /// Ratio of the two gradient probes.
    pub mu: f64,
    /// Slope of the probe line used for the mixed derivative.
    pub dxdy_mu: f64,
    pub delta: f64,
    pub c_width: f64,
    /// Polynomial degree in hbar for probe-based limits.
    pub probe_degree: usize,
    /// Polynomial degree in hbar for counting limits.
    pub height_degree: usize,
    /// k used to locate the focus-focus value.
    pub locate_k: u32,
    pub dh_delta: f64,
    /// Columns searched around each kink candidate.
    pub ff_radius: f64,
    /// Cap on the half-width of the J window kept around the focus-focus value.
    pub window: f64,
    /// Cap on J for models with unbounded image.
    pub j_cap: f64,
    pub tolerances: Tolerances,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ks: (200..=500).step_by(50).collect(),
            xs: vec![0.01],
            mu: 2.0,
            dxdy_mu: 1.0,
            delta: 0.4,
            c_width: 1.0,
            probe_degree: 2,
            height_degree: 1,
            locate_k: 200,
            dh_delta: 0.25,
            ff_radius: 0.25,
            window: 0.3,
            j_cap: 3.0,
            tolerances: Tolerances::default(),
        }
    }
}

/// J window of the whole (capped) image.
pub fn full_window(model: &ModelSpec, j_cap: f64) -> Window {
    let (lo, hi) = model.j_range();
    let hi = if hi.is_finite() { hi } else { j_cap };
    Window::new((lo, hi), (f64::NEG_INFINITY, f64::INFINITY))
}

fn spectrum(model: &ModelSpec, k: u32, w: Window, tol: &Tolerances) -> Result<JointSpectrum> {
    joint_spectrum_with(model, k, w, tol, EigenMethod::default())
}

/// Grid of abscissae on the columns of level k, every `stride` columns.
pub fn column_grid(model: &ModelSpec, k: u32, range: (f64, f64), stride: usize) -> Vec<f64> {
    let h = 1.0 / k as f64;
    let origin = model.focus_focus().0;
    let first = ((range.0 - origin) / h).ceil() as i64;
    let last = ((range.1 - origin) / h).floor() as i64;
    (first..=last).step_by(stride.max(1)).map(|i| origin + i as f64 * h).collect()
}

/// DH profile of the full image at k, with kinks as focus-focus candidates,
/// then the strongest logarithmic peak among them.
pub fn locate_stage(model: &ModelSpec, cfg: &PipelineConfig) -> Result<(DHProfile, FocusFocus)> {
    let w = full_window(model, cfg.j_cap);
    let s = spectrum(model, cfg.locate_k, w, &cfg.tolerances)?;
    let stride = ((0.02 * cfg.locate_k as f64).round() as usize).max(1);
    // a capped window is not the end of the support: stop one strip short of it
    let strip = cfg.c_width * (1.0 / cfg.locate_k as f64).powf(cfg.dh_delta);
    let top = if model.j_range().1.is_finite() { w.x.1 } else { w.x.1 - strip };
    let grid = column_grid(model, cfg.locate_k, (w.x.0, top), stride);
    let profile = dh_profile(&s, cfg.dh_delta, cfg.c_width, &grid);
    let ff = locate_focus_focus(&s, &profile.kinks, cfg.ff_radius)?;
    Ok((profile, ff))
}

/// Bottom-counted column labellings over a window around x0, one per k.
pub fn local_family(
    model: &ModelSpec,
    ks: &[u32],
    x0: f64,
    half_width: impl Fn(u32) -> f64 + Sync,
    tol: &Tolerances,
) -> Result<(Vec<JointSpectrum>, Vec<LabelledSpectrum>)> {
    let spectra: Vec<JointSpectrum> = ks
        .par_iter()
        .map(|&k| {
            let hw = half_width(k);
            spectrum(model, k, Window::new((x0 - hw, x0 + hw), (f64::NEG_INFINITY, f64::INFINITY)), tol)
        })
        .collect::<Result<_>>()?;
    let labelled = spectra.iter().map(|s| LabelledSpectrum::from_spectrum(s, ColumnOrigin::Bottom)).collect();
    Ok((spectra, labelled))
}

/// Global labelling of a column spectrum: counted from the bottom left of
/// `switch`, from the top right of `cut`, glued on the overlap.
pub fn column_global(spectrum: &JointSpectrum, split: Option<(f64, f64)>) -> Result<GlobalLabelling> {
    let (cloud, bottom) = label_columns(spectrum, ColumnOrigin::Bottom);
    let Some((cut, switch)) = split else {
        let d = Domain::from(Region::All);
        return glue_global(&cloud, &[(d, bottom)]);
    };
    let (_, top) = label_columns(spectrum, ColumnOrigin::Top);
    let inf = f64::INFINITY;
    let h = cloud.hbar();
    let left = Region::rect((-inf, switch - h / 2.0), (-inf, inf));
    let right = Region::rect((cut + h / 2.0, inf), (-inf, inf));
    let restrict = |lab: &Labelling, r: &Region| -> Labelling {
        let mut out = lab.clone();
        out.assignment.retain(|&i, _| r.contains(cloud.points[i]));
        out
    };
    glue_global(
        &cloud,
        &[(Domain::from(left), restrict(&bottom, &left)), (Domain::from(right), restrict(&top, &right))],
    )
}

/// Polygon of a model at level k over an x strip, using the column charts.
pub fn polygon_stage(model: &ModelSpec, k: u32, strip: (f64, f64), breakpoints: &[f64], tol: &Tolerances) -> Result<PolygonEstimate> {
    let w = Window::new(strip, (f64::NEG_INFINITY, f64::INFINITY));
    let s = spectrum(model, k, w, tol)?;
    let split = match model.kind {
        ModelKind::SpinOscillator => None,
        ModelKind::CoupledAngularMomenta => Some((model.r1 - model.r2, model.r2 - model.r1)),
    };
    let global = column_global(&s, split)?;
    polygon_recover(&global, strip, &[], breakpoints)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub convergence_slopes: BTreeMap<String, Option<f64>>,
    pub condition_numbers: BTreeMap<String, f64>,
}

/// JSON report of the recovered invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub model: String,
    pub focus_focus: [f64; 2],
    pub fr_jet: BTreeMap<String, f64>,
    pub sigma1_0: f64,
    pub twisting_p: i64,
    #[serde(rename = "S")]
    pub s: BTreeMap<String, f64>,
    pub diagnostics: Diagnostics,
}

/// Per-figure plot data: (abscissa, estimate, theory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub name: String,
    pub rows: Vec<(f64, f64, Option<f64>)>,
}

pub fn write_figure_csv<W: Write>(fig: &Figure, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["abscissa", "estimate", "theory"])?;
    for (a, e, t) in &fig.rows {
        w.write_record([
            crate::models::fmt17(*a),
            crate::models::fmt17(*e),
            t.map(crate::models::fmt17).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Everything the recovery produced, beyond the report.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: InvariantReport,
    pub focus_focus: FocusFocus,
    pub dh: DHProfile,
    pub gradient: FrGradient,
    pub sigma1: DoubleLimit,
    pub s01: DoubleLimit,
    pub height: Limit,
    pub height_above: Limit,
    pub dxdy: Option<Limit>,
    pub figures: Vec<Figure>,
}

fn per_k_figure(name: &str, l: &Limit, theory: Option<f64>) -> Figure {
    Figure { name: name.into(), rows: l.samples.iter().map(|&(k, v)| (k as f64, v, theory)).collect() }
}

/// Full recovery for one model: focus-focus value, gradient of f_r,
/// sigma_1(0) and twisting, S_{0,1}, height and, for the spin-oscillator,
/// the mixed derivative and S_{1,1}.
pub fn run_invariants(model: &ModelSpec, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    model.validate()?;
    if cfg.ks.len() <= cfg.probe_degree || cfg.xs.is_empty() {
        return Err(Error::InvalidInput("k schedule too short for the extrapolation degree".into()));
    }
    let tol = &cfg.tolerances;
    let (dh, coarse) = locate_stage(model, cfg)?;
    let reach = |k: u32| {
        let h = 1.0 / k as f64;
        let probes = cfg.xs.iter().fold(0.0f64, |a, &x| a.max(cfg.mu.max(cfg.dxdy_mu) * x));
        (probes + 6.0 * h).max(cfg.c_width * h.powf(cfg.delta) + 2.0 * h).min(cfg.window)
    };
    let (spectra, family) = local_family(model, &cfg.ks, coarse.x0, reach, tol)?;
    // the finest level pins y0 down best
    let finest = spectra.iter().max_by_key(|s| s.k).expect("nonempty schedule");
    let ff = classify_candidate(finest, coarse.x0, 0.5 * finest.hbar())?;
    let c = (ff.x0, ff.y0);

    let gradient = recover_fr_gradient(&family, c, &cfg.xs, cfg.mu, cfg.probe_degree)?;
    let sigma1 = recover_sigma1(&family, c, gradient.s0, &cfg.xs, cfg.probe_degree)?;
    let p = (sigma1.value + tol.twisting_snap).floor() as i64;
    let s10 = privileged_sigma1(sigma1.value, p);
    let s01 = recover_s01(&family, c, gradient.s0, gradient.dy.value, &cfg.xs, cfg.probe_degree)?;
    let height = height_invariant(&spectra, cfg.delta, cfg.c_width, c, CountSide::Below, cfg.height_degree)?;
    let height_above = height_invariant(&spectra, cfg.delta, cfg.c_width, c, CountSide::Above, cfg.height_degree)?;

    let mut report_jet = FrJet::default();
    report_jet.set(1, 0, gradient.dx.value);
    report_jet.set(0, 1, gradient.dy.value);
    let mut report_s = TaylorInvariant::default();
    report_s.set(0, 0, height.value);
    report_s.set(1, 0, s10);
    report_s.set(0, 1, s01.value);

    let mut diag = Diagnostics::default();
    diag.convergence_slopes.insert("dx_fr".into(), gradient.dx.slope());
    diag.convergence_slopes.insert("dy_fr".into(), gradient.dy.slope());
    diag.convergence_slopes.insert("sigma1".into(), sigma1.slope());
    diag.convergence_slopes.insert("S01".into(), s01.slope());
    diag.convergence_slopes.insert("S00".into(), height.slope);

    let mut dxdy = None;
    let mut s11_rows = Vec::new();
    if model.kind == ModelKind::SpinOscillator {
        let mixed = spinosc_dxdy(&family, c, cfg.dxdy_mu, cfg.xs[0], cfg.probe_degree)?;
        let (l, s11) = (mixed.dxdy, mixed.s11);
        s11_rows = mixed.s11_samples;
        report_jet.set(1, 1, l.value);
        report_s.set(1, 1, s11);
        diag.convergence_slopes.insert("dxdy_fr".into(), l.slope);
        dxdy = Some(l);
    }

    let theory = Theory::of(model);
    let mut figures = vec![
        per_k_figure("dx_fr", &gradient.dx.per_x[0].1, theory.dx),
        per_k_figure("dy_fr", &gradient.dy.per_x[0].1, theory.dy),
        per_k_figure("sigma1", &sigma1.per_x[0].1, theory.sigma1),
        per_k_figure("S01", &s01.per_x[0].1, theory.s01),
        per_k_figure("S00", &height, theory.s00),
        Figure {
            name: "dh".into(),
            rows: dh.samples.iter().map(|&(x, r)| (x, r, Some(model.dh_density(x)))).collect(),
        },
    ];
    if let Some(l) = &dxdy {
        figures.push(per_k_figure("dxdy_fr", l, theory.dxdy));
        figures.push(Figure {
            name: "S11".into(),
            rows: s11_rows.iter().map(|&(k, v)| (k as f64, v, theory.s11)).collect(),
        });
    }
    figures.push(Figure {
        name: "spacing_peak".into(),
        rows: inverse_spacings(finest, ff.x0).into_iter().map(|(y, v)| (y, v, None)).collect(),
    });

    let fr_jet = report_jet
        .derivs
        .iter()
        .map(|(&(i, j), &v)| (format!("{}{}", "x".repeat(i), "y".repeat(j)), v))
        .collect();
    let report = InvariantReport {
        model: model.name().into(),
        focus_focus: [ff.x0, ff.y0],
        fr_jet,
        sigma1_0: sigma1.value,
        twisting_p: p,
        s: report_s.coeffs.iter().map(|(&(l, m), &v)| (format!("{l},{m}"), v)).collect(),
        diagnostics: diag,
    };
    Ok(PipelineOutput { report, focus_focus: ff, dh, gradient, sigma1, s01, height, height_above, dxdy, figures })
}

/// Mixed derivative of f_r and S_{1,1} for the spin-oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMixed {
    pub dxdy: Limit,
    pub s11: f64,
    /// S_{1,1} from the data of each k alone.
    pub s11_samples: Vec<(u32, f64)>,
    /// g_mu at the probe after the hbar limit.
    pub g: Limit,
}

/// Fast path for the spin-oscillator: the lower orders are the closed-form
/// ones and the pure second derivatives of f_r vanish.
pub fn spinosc_dxdy(family: &[LabelledSpectrum], ff: (f64, f64), mu: f64, x: f64, degree: usize) -> Result<SpinMixed> {
    let (jet, s) = spin_lower_orders();
    let (c0, d0) = log_expansion_coefficients(&jet, &s, mu, 0)[0];
    let ks: Vec<u32> = family.iter().map(|f| f.k).collect();
    let g = g_mu_sample(family, ff, mu, &[x], degree)?.remove(0).1;
    let per_k: Vec<f64> = g.samples.iter().map(|&(_, v)| dxdy_from_g(v, x, mu, c0, d0)).collect();
    let dxdy = extrapolate_hbar(&ks, &per_k, degree)?;
    let s11_at = |g: f64, dxdy: f64| {
        let (mut jet, mut s) = (jet.clone(), s.clone());
        jet.set(2, 0, 0.0);
        jet.set(0, 2, 0.0);
        jet.set(1, 1, dxdy);
        let (_, d1) = log_expansion_coefficients(&jet, &s, mu, 1)[1];
        let c1 = (g - c0 - d0 * x.ln() - d1 * x * x.ln()) / x;
        s.set(2, 0, 0.0);
        s.set(0, 2, 0.0);
        solve_taylor_single(1, 1, mu, c1, &jet, &s)
    };
    let s11 = s11_at(g.value, dxdy.value);
    let s11_samples = g.samples.iter().zip(&per_k).map(|(&(k, gv), &m)| (k, s11_at(gv, m))).collect();
    Ok(SpinMixed { dxdy, s11, s11_samples, g })
}

/// Spin-oscillator jet to order one and Taylor series to order one, in closed form.
pub fn spin_lower_orders() -> (FrJet, TaylorInvariant) {
    let mut jet = FrJet::default();
    jet.set(1, 0, 0.0);
    jet.set(0, 1, 2.0);
    let mut s = TaylorInvariant::default();
    s.set(1, 0, 0.0);
    s.set(0, 1, 5.0 * 2f64.ln() / (2.0 * PI));
    (jet, s)
}

/// Closed-form values known for the two reference systems.
#[derive(Debug, Clone, Copy, Default)]
pub struct Theory {
    pub dx: Option<f64>,
    pub dy: Option<f64>,
    pub sigma1: Option<f64>,
    pub s01: Option<f64>,
    pub s00: Option<f64>,
    pub dxdy: Option<f64>,
    pub s11: Option<f64>,
}

impl Theory {
    pub fn of(model: &ModelSpec) -> Self {
        match model.kind {
            ModelKind::SpinOscillator => Self {
                dx: Some(0.0),
                dy: Some(2.0),
                sigma1: Some(0.0),
                s01: Some(5.0 * 2f64.ln() / (2.0 * PI)),
                s00: Some(1.0),
                dxdy: Some(-0.25),
                s11: Some(1.0 / (8.0 * PI)),
            },
            ModelKind::CoupledAngularMomenta if *model == ModelSpec::coupled_default() => Self {
                dx: Some(-1.0 / 3.0),
                dy: Some(10.0 / 3.0),
                sigma1: Some((13.0f64 / 9.0).atan() / (2.0 * PI)),
                s01: Some((3.5 * 2f64.ln() + 3.0 * 3f64.ln() - 1.5 * 5f64.ln()) / (2.0 * PI)),
                s00: Some(2.0 + (3.0 - 5.0 * 0.75f64.atan() - 2.0 * 3f64.atan()) / PI),
                dxdy: None,
                s11: None,
            },
            _ => Self::default(),
        }
    }
}
