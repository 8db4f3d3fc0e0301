use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semitoric::models::ModelSpec;

use crate::{CliError, Command, Opts};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Probes {
    pub x_schedule: Vec<f64>,
    pub mu_list: Vec<f64>,
    pub delta: Option<f64>,
    pub c_width: Option<f64>,
}

/// Contents of the optional JSON config file; flags override it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelSpec>,
    pub k_list: Option<Vec<u32>>,
    pub probes: Probes,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// J window for `spectrum` and `label`.
    pub window: Option<(f64, f64)>,
    /// x strip for `polygon`.
    pub strip: Option<(f64, f64)>,
    /// Columns where the polygon changes slope, for `polygon`.
    pub breakpoints: Option<Vec<f64>>,
    /// `synth` only: generate a half-lattice chart.
    pub half: Option<bool>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub k_list: Vec<u32>,
    pub probes: ResolvedProbes,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub window: Option<(f64, f64)>,
    pub strip: Option<(f64, f64)>,
    pub breakpoints: Option<Vec<f64>>,
    pub half: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedProbes {
    pub x_schedule: Vec<f64>,
    pub mu_list: Vec<f64>,
    pub delta: f64,
    pub c_width: f64,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn default_ks(cmd: &Command, model: &ModelSpec) -> Vec<u32> {
    let spin = model.kind == semitoric::models::ModelKind::SpinOscillator;
    match cmd {
        Command::Spectrum => vec![if spin { 15 } else { 10 }],
        Command::Label => vec![50],
        Command::Invariants => (200..=500).step_by(50).collect(),
        Command::Polygon => vec![if spin { 25 } else { 20 }],
        Command::Dh => vec![200],
        Command::Synth => vec![20, 50, 100],
    }
}

fn parse_model(name: &str, opts: &Opts, base: Option<ModelSpec>) -> Result<ModelSpec, CliError> {
    let coupled = |base: Option<ModelSpec>| -> Result<ModelSpec, CliError> {
        let d = match base {
            Some(m) if m.kind == semitoric::models::ModelKind::CoupledAngularMomenta => m,
            _ => ModelSpec::coupled_default(),
        };
        ModelSpec::coupled(opts.r1.unwrap_or(d.r1), opts.r2.unwrap_or(d.r2), opts.t.unwrap_or(d.t))
            .map_err(|e| CliError::Config(e.to_string()))
    };
    match name {
        "spin" | "spin-oscillator" | "spin_oscillator" => Ok(ModelSpec::spin_oscillator()),
        "coupled" | "coupled-angular-momenta" | "coupled_angular_momenta" => coupled(base),
        other => Err(CliError::Config(format!("unknown model '{other}' (use spin or coupled)"))),
    }
}

pub fn resolve(cmd: &Command, opts: &Opts) -> Result<RunConfig, CliError> {
    let file = match &opts.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let model = match (&opts.model, file.model) {
        (Some(name), base) => parse_model(name, opts, base)?,
        (None, Some(m)) if m.kind == semitoric::models::ModelKind::CoupledAngularMomenta => {
            parse_model("coupled", opts, Some(m))?
        }
        (None, Some(m)) => m,
        (None, None) => parse_model("spin", opts, None)?,
    };

    let mut k_list = if !opts.k.is_empty() {
        opts.k.clone()
    } else {
        file.k_list.unwrap_or_else(|| default_ks(cmd, &model))
    };
    if let Some(k_max) = opts.k_max {
        let step = *k_list.first().ok_or_else(|| CliError::Config("--k-max needs a starting --k".into()))?;
        if step == 0 || k_max < step {
            return Err(CliError::Config(format!("--k-max {k_max} is below --k {step}")));
        }
        k_list = (step..=k_max).step_by(step as usize).collect();
    }
    if k_list.is_empty() {
        return Err(CliError::Config("k_list is empty".into()));
    }
    if k_list.contains(&0) || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!("k_list {k_list:?} must be positive and strictly ascending")));
    }

    let x_schedule = if !opts.x.is_empty() {
        opts.x.clone()
    } else if !file.probes.x_schedule.is_empty() {
        file.probes.x_schedule
    } else {
        vec![0.01]
    };
    if x_schedule.iter().any(|&x| !(x > 0.0)) || x_schedule.windows(2).any(|w| w[0] <= w[1]) {
        return Err(CliError::Config(format!("x schedule {x_schedule:?} must be positive and strictly decreasing")));
    }
    let mu_list = if !opts.mu.is_empty() {
        opts.mu.clone()
    } else if !file.probes.mu_list.is_empty() {
        file.probes.mu_list
    } else {
        vec![2.0]
    };
    if mu_list.iter().any(|&m| !(m > 0.0)) {
        return Err(CliError::Config(format!("mu values {mu_list:?} must be positive")));
    }
    let default_delta = if matches!(cmd, Command::Dh) { 0.25 } else { 0.4 };
    let delta = opts.delta.or(file.probes.delta).unwrap_or(default_delta);
    if !(delta > 0.0 && delta < 0.5) {
        return Err(CliError::Config(format!("delta = {delta} outside (0, 1/2)")));
    }
    let c_width = file.probes.c_width.unwrap_or(1.0);

    Ok(RunConfig {
        model,
        k_list,
        probes: ResolvedProbes { x_schedule, mu_list, delta, c_width },
        output_dir: opts.out.clone().or(file.output_dir).unwrap_or_else(|| PathBuf::from("out")),
        seed: opts.seed.or(file.seed).unwrap_or(0),
        window: file.window,
        strip: file.strip,
        breakpoints: file.breakpoints,
        half: opts.half || file.half.unwrap_or(false),
    })
}
