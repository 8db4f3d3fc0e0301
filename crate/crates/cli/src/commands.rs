use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use semitoric::invariants::{
    clip_to_strip, column_global, column_grid, dh_profile, hausdorff, polygon_stage, run_invariants, write_figure_csv,
    Figure, PipelineConfig, Shape,
};
use semitoric::lattice::{
    label_half_lattice, label_regular, select_affine_basis, synth_lattice, transition, write_global_json,
    write_labelled_csv, ChartSpec, Domain, Labelling, LabellingKind, QuadraticMap, Region,
};
use semitoric::models::{joint_spectrum, write_spectrum_csv, ModelKind, ModelSpec, Window};
use semitoric::Result;

use crate::config::RunConfig;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn default_window(model: &ModelSpec) -> (f64, f64) {
    let (lo, hi) = model.j_range();
    (lo, if hi.is_finite() { hi } else { 2.0 })
}

// Columns where the boundary of the image changes slope.
fn default_breakpoints(model: &ModelSpec) -> Vec<f64> {
    match model.kind {
        ModelKind::SpinOscillator => vec![1.0],
        ModelKind::CoupledAngularMomenta => vec![model.r1 - model.r2, model.r2 - model.r1],
    }
}

fn theory_polygon(model: &ModelSpec) -> Vec<(f64, f64)> {
    match model.kind {
        ModelKind::SpinOscillator => vec![(-1.0, -1.0), (5.0, -1.0), (5.0, 1.0), (1.0, 1.0)],
        ModelKind::CoupledAngularMomenta => {
            let (a, b) = (model.r1, model.r2);
            vec![(-(a + b), -a), (b - a, -a), (a + b, a), (a - b, a)]
        }
    }
}

pub fn spectrum(cfg: &RunConfig) -> Result<()> {
    let x = cfg.window.unwrap_or_else(|| default_window(&cfg.model));
    for &k in &cfg.k_list {
        let s = joint_spectrum(&cfg.model, k, Window::new(x, (f64::NEG_INFINITY, f64::INFINITY)))?;
        let mut w = create(&cfg.output_dir, &format!("spectrum_k{k}.csv"))?;
        write_spectrum_csv(std::slice::from_ref(&s), &mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn label(cfg: &RunConfig) -> Result<()> {
    let x = cfg.window.unwrap_or_else(|| default_window(&cfg.model));
    let split = match cfg.model.kind {
        ModelKind::SpinOscillator => None,
        ModelKind::CoupledAngularMomenta => Some((cfg.model.r1 - cfg.model.r2, cfg.model.r2 - cfg.model.r1)),
    };
    for &k in &cfg.k_list {
        let s = joint_spectrum(&cfg.model, k, Window::new(x, (f64::NEG_INFINITY, f64::INFINITY)))?;
        let g = column_global(&s, split)?;
        let cloud = semitoric::lattice::PointCloud::new(k, s.xy());
        let mut w = create(&cfg.output_dir, &format!("labelled_k{k}.csv"))?;
        write_labelled_csv(&[(&cloud, &g.global)], &mut w)?;
        w.flush()?;
        let mut w = create(&cfg.output_dir, &format!("global_k{k}.json"))?;
        write_global_json(&g, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn invariants(cfg: &RunConfig) -> Result<()> {
    let p = &cfg.probes;
    let pipeline = PipelineConfig {
        ks: cfg.k_list.clone(),
        xs: p.x_schedule.clone(),
        mu: p.mu_list[0],
        dxdy_mu: p.mu_list.get(1).copied().unwrap_or(1.0),
        delta: p.delta,
        c_width: p.c_width,
        ..PipelineConfig::default()
    };
    let out = run_invariants(&cfg.model, &pipeline)?;
    write_json(&cfg.output_dir, "report.json", &out.report)?;
    for fig in &out.figures {
        let mut w = create(&cfg.output_dir, &format!("{}.csv", fig.name))?;
        write_figure_csv(fig, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn polygon(cfg: &RunConfig) -> Result<()> {
    let m = &cfg.model;
    let strip = cfg.strip.unwrap_or(match m.kind {
        ModelKind::SpinOscillator => (-0.8, 2.0),
        ModelKind::CoupledAngularMomenta => (-(m.r1 + m.r2) + 0.2, m.r1 + m.r2 - 0.4),
    });
    let breaks = cfg.breakpoints.clone().unwrap_or_else(|| default_breakpoints(m));
    let theory = theory_polygon(m);
    let clipped = clip_to_strip(&theory, strip);
    let mut reports = Vec::new();
    for &k in &cfg.k_list {
        let est = polygon_stage(m, k, strip, &breaks, &semitoric::Tolerances::default())?;
        let h = hausdorff(&est.cloud, &Shape::Polygon(clipped.clone()), true);
        let fig = Figure { name: format!("polygon_k{k}"), rows: est.cloud.iter().map(|&(u, v)| (u, v, None)).collect() };
        let mut w = create(&cfg.output_dir, &format!("polygon_k{k}.csv"))?;
        write_figure_csv(&fig, &mut w)?;
        w.flush()?;
        reports.push(json!({
            "k": k,
            "strip": strip,
            "edges": est.edges,
            "fitted_vertices": est.fitted_vertices,
            "hausdorff": h.distance,
            "hausdorff_over_hbar": h.distance * k as f64,
            "translation": h.translation,
            "theory": clipped,
        }));
    }
    write_json(&cfg.output_dir, "polygon.json", &reports)
}

pub fn dh(cfg: &RunConfig) -> Result<()> {
    let m = &cfg.model;
    let (lo, hi) = m.j_range();
    let mut summary = Vec::new();
    for &k in &cfg.k_list {
        let strip = cfg.probes.c_width * (1.0 / k as f64).powf(cfg.probes.delta);
        // an unbounded image is cut off at x = 3, one strip short of the cap
        let (cap, top) = if hi.is_finite() { (hi, hi) } else { (3.0, 3.0 - strip) };
        let s = joint_spectrum(m, k, Window::new((lo, cap), (f64::NEG_INFINITY, f64::INFINITY)))?;
        let stride = ((0.02 * k as f64).round() as usize).max(1);
        let grid = column_grid(m, k, (lo, top), stride);
        let profile = dh_profile(&s, cfg.probes.delta, cfg.probes.c_width, &grid);
        let fig = Figure {
            name: format!("dh_k{k}"),
            rows: profile.samples.iter().map(|&(x, r)| (x, r, Some(m.dh_density(x)))).collect(),
        };
        let mut w = create(&cfg.output_dir, &format!("dh_k{k}.csv"))?;
        write_figure_csv(&fig, &mut w)?;
        w.flush()?;
        summary.push(json!({ "k": k, "delta": profile.delta, "c_width": profile.c_width, "kinks": profile.kinks }));
    }
    write_json(&cfg.output_dir, "dh.json", &summary)
}

fn random_chart(rng: &mut ChaCha8Rng, half: bool) -> ChartSpec {
    let unit = Region::rect((0.0, 1.0), (0.0, 1.0));
    loop {
        let mut r = |s: f64| rng.gen_range(-s..s);
        let (g0, g1) = if half {
            let g0 = QuadraticMap {
                b: [r(1.0), r(1.0)],
                a: [[1.0, 0.0], [r(0.3), 1.0 + r(0.2)]],
                q: [[0.0; 3], [r(0.08), r(0.08), r(0.08)]],
            };
            (g0, QuadraticMap::linear([[0.0, 0.0], [r(0.2), r(0.2)]], [r(0.3), r(0.3)]))
        } else {
            let g0 = QuadraticMap {
                b: [r(1.0), r(1.0)],
                a: [[1.0 + r(0.15), r(0.2)], [r(0.2), 1.0 + r(0.15)]],
                q: [[r(0.08), r(0.08), r(0.08)], [r(0.08), r(0.08), r(0.08)]],
            };
            (g0, QuadraticMap::linear([[r(0.2), r(0.2)], [r(0.2), r(0.2)]], [r(0.3), r(0.3)]))
        };
        if let Ok(c) = ChartSpec::new(g0, g1, unit, half) {
            return c;
        }
    }
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chart = random_chart(&mut rng, cfg.half);
    let all = Domain::from(Region::All);
    let mut runs = Vec::new();
    for &k in &cfg.k_list {
        let syn = synth_lattice(&chart, k)?;
        let kind = if chart.half { LabellingKind::HalfLattice } else { LabellingKind::Regular };
        let mut truth = Labelling::new(kind);
        truth.assignment = syn.truth.iter().copied().enumerate().collect();
        let h = 1.0 / k as f64;
        let lab = if chart.half {
            label_half_lattice(&syn.cloud, chart.eval(h, (0.5, 0.0)), &all)?
        } else {
            let basis = select_affine_basis(&syn.cloud, chart.eval(h, (0.5, 0.5)))?;
            label_regular(&syn.cloud, basis, &all)?
        };
        let t = transition(&syn.cloud, &truth, &lab, &all)?;
        let mut w = create(&cfg.output_dir, &format!("synth_k{k}.csv"))?;
        write_labelled_csv(&[(&syn.cloud, &truth)], &mut w)?;
        w.flush()?;
        let mut w = create(&cfg.output_dir, &format!("labelled_k{k}.csv"))?;
        write_labelled_csv(&[(&syn.cloud, &lab)], &mut w)?;
        w.flush()?;
        runs.push(json!({
            "k": k,
            "points": syn.cloud.len(),
            "labelled": lab.len(),
            "A": t.a_matrix,
            "kappa": t.kappa,
        }));
    }
    write_json(&cfg.output_dir, "synth.json", &json!({ "chart": chart, "runs": runs }))
}
