//! The two example systems: the spin-oscillator on R^2 x S^2 and coupled
//! angular momenta on S^2 x S^2, block-diagonalised by the circle action.

mod blocks;
mod io;
mod oracle;
mod spectrum;

pub use blocks::{build_blocks, build_blocks_with, TridiagonalBlock};
pub use io::{fmt17, read_spectrum_csv, write_spectrum_csv, write_spectrum_json};
pub use oracle::{dense_commutator_norm, dense_oracle_spectrum};
pub use spectrum::{joint_spectrum, joint_spectrum_with, Column, JointPoint, JointSpectrum, Window};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SpinOscillator,
    CoupledAngularMomenta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub r1: f64,
    pub r2: f64,
    pub t: f64,
}

impl ModelSpec {
    pub fn spin_oscillator() -> Self {
        Self { kind: ModelKind::SpinOscillator, r1: 0.0, r2: 0.0, t: 0.0 }
    }

    pub fn coupled(r1: f64, r2: f64, t: f64) -> Result<Self> {
        let spec = Self { kind: ModelKind::CoupledAngularMomenta, r1, r2, t };
        spec.validate()?;
        Ok(spec)
    }

    /// R1 = 1, R2 = 5/2, t = 1/2.
    pub fn coupled_default() -> Self {
        Self { kind: ModelKind::CoupledAngularMomenta, r1: 1.0, r2: 2.5, t: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ModelKind::SpinOscillator {
            return Ok(());
        }
        if !(self.r1 > 0.0 && self.r2 > self.r1) {
            return Err(Error::InvalidInput(format!(
                "coupled angular momenta need r2 > r1 > 0, got r1 = {}, r2 = {}",
                self.r1, self.r2
            )));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::InvalidInput(format!("t = {} outside [0, 1]", self.t)));
        }
        Ok(())
    }

    /// Sphere dimensions 2kR1, 2kR2 for the coupled model.
    pub fn sphere_dims(&self, k: u32) -> Result<(usize, usize)> {
        let dim = |r: f64| -> Result<usize> {
            let n = 2.0 * k as f64 * r;
            if (n - n.round()).abs() > 1e-9 || n < 1.0 {
                return Err(Error::DimensionMismatch(format!("2kr = {n} is not a positive integer")));
            }
            Ok(n.round() as usize)
        };
        Ok((dim(self.r1)?, dim(self.r2)?))
    }

    /// Theoretical focus-focus value, for reference and tests.
    pub fn focus_focus(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::SpinOscillator => (1.0, 0.0),
            ModelKind::CoupledAngularMomenta => (self.r1 - self.r2, 0.0),
        }
    }

    /// Image of J; the spin-oscillator is unbounded above.
    pub fn j_range(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::SpinOscillator => (-1.0, f64::INFINITY),
            ModelKind::CoupledAngularMomenta => (-(self.r1 + self.r2), self.r1 + self.r2),
        }
    }

    /// Duistermaat-Heckman density of J read off the polygon, for reference.
    pub fn dh_density(&self, x: f64) -> f64 {
        let (lo, hi) = self.j_range();
        if x < lo || x > hi {
            return 0.0;
        }
        match self.kind {
            ModelKind::SpinOscillator => (x + 1.0).min(2.0),
            ModelKind::CoupledAngularMomenta => (x - lo).min(2.0 * self.r1).min(hi - x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::SpinOscillator => "spin-oscillator",
            ModelKind::CoupledAngularMomenta => "coupled-angular-momenta",
        }
    }
}

/// Raising coefficient sqrt((l+1)(n-1-l)) of a spin of dimension n.
pub(crate) fn beta(l: usize, n: usize) -> f64 {
    (((l + 1) * (n - 1 - l)) as f64).sqrt()
}

/// Lowering coefficient sqrt(l(n-l)) of a spin of dimension n.
pub(crate) fn alpha(l: usize, n: usize) -> f64 {
    ((l * (n - l)) as f64).sqrt()
}
