//! Recovery of semitoric invariants from labelled joint spectra: level
//! spacings, counting functions, the Taylor series machinery and the polygon.

mod counting;
mod extrapolate;
mod labelled;
mod pipeline;
mod polygon;
mod spacing;
mod taylor;

pub use counting::{
    classify_candidate, detect_kinks, dh_profile, height_invariant, inverse_spacings, locate_focus_focus, strip_count, CountSide,
    DHProfile, FocusFocus,
};
pub use extrapolate::{extrapolate_hbar, last_value, loglog_slope, Limit};
pub use labelled::LabelledSpectrum;
pub use pipeline::{
    column_global, column_grid, full_window, local_family, locate_stage, polygon_stage, run_invariants,
    spin_lower_orders, spinosc_dxdy, SpinMixed,
    write_figure_csv, Diagnostics, Figure, InvariantReport, PipelineConfig, PipelineOutput, Theory,
};
pub use polygon::{clip_to_strip, hausdorff, polygon_recover, EdgeLine, HausdorffResult, PolygonEstimate, Shape};
pub use spacing::{
    g_mu_sample, privileged_sigma1, probe_family, recover_fr_gradient, recover_s01, recover_sigma1,
    twisting_and_privileged, DoubleLimit, FrGradient,
};
pub use taylor::{
    dxdy_from_g, fit_log_expansion, lemma_a_matrix, lemma_det_formula, log_expansion_coefficients,
    solve_jet_order, solve_taylor_order, solve_taylor_single, FrJet, GMuExpansion, LinearStep, LogFit,
    TaylorInvariant,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Spacing data at one anchor label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A1A2Sample {
    pub c: (f64, f64),
    pub anchor: (i64, i64),
    pub ratio_a1_a2: f64,
    pub a1: f64,
    pub a2: f64,
}

/// a1, a2 from forward differences at the anchor.
pub fn spacings_to_a1a2(labelled: &LabelledSpectrum, anchor: (i64, i64)) -> Result<A1A2Sample> {
    let (a1, a2) = labelled.forward_a1a2(anchor)?;
    Ok(A1A2Sample { c: labelled.get(anchor)?, anchor, ratio_a1_a2: a1 / a2, a1, a2 })
}
