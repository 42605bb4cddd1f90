//! The experiment runners. Each writes CSV tables (and optionally SVG
//! plots) into the output directory and returns the written paths.

use std::path::{Path, PathBuf};

use phdd::assembly::{FunctionSpace, MeshRef};
use phdd::diagnostics::{
    beam_convergence, cumulative_trapezoid, curl_norm, interface_mismatch, wave_convergence,
    ConvergenceRecord, PowerResiduals, WeakCurl,
};
use phdd::linalg::Complex;
use phdd::mesh::BoundaryTag;
use phdd::models::{Block, Problem};
use phdd::spectral::{beam_analytical_freqs, solve_modes, wave_analytical_freqs, ModeSet};
use phdd::timeint::{coupling_step_limit, simulate_staggered, RunOptions, Trajectory};

use crate::config::{Experiment, ExperimentConfig};
use crate::csv::{number, Table};
use crate::error::CliError;
use crate::plot::{Plot, Series};

// sample points per subdomain for beam fields
const BEAM_SAMPLES: usize = 20;

struct Output<'a> {
    dir: &'a Path,
    plots: bool,
    provenance: String,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        let path = self.dir.join(name);
        t.write(&path, &self.provenance)?;
        self.written.push(path);
        Ok(())
    }

    fn plot(&mut self, name: &str, p: Plot) -> Result<(), CliError> {
        if !self.plots {
            return Ok(());
        }
        let path = self.dir.join(name);
        p.write(&path)?;
        self.written.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

/// Runs the configured experiment into `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path, plots: bool) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Output {
        dir,
        plots,
        provenance: format!("phdd {} config-sha256={}", cfg.experiment.name(), cfg.hash),
        written: Vec::new(),
    };
    match cfg.experiment {
        Experiment::BeamSim => beam_sim(cfg, &mut out)?,
        Experiment::BeamSpectrum => beam_spectrum(cfg, &mut out)?,
        Experiment::BeamConvergence => {
            let rec = beam_convergence(&cfg.beam, &cfg.sizes)?;
            convergence(&rec, "beam", &mut out)?
        }
        Experiment::WaveSim => wave_sim(cfg, &mut out, false)?,
        Experiment::WaveSpectrum => wave_spectrum(cfg, &mut out)?,
        Experiment::WaveConvergence => {
            let rec = wave_convergence(cfg.wave.k, &cfg.sizes, cfg.wave.t_end)?;
            convergence(&rec, "wave", &mut out)?
        }
        Experiment::Conservation => wave_sim(cfg, &mut out, true)?,
    }
    Ok(out.written)
}

fn check_step(p: &Problem, dt: f64) -> Result<(), CliError> {
    let limit = coupling_step_limit(p.system())?;
    if dt >= limit {
        return Err(CliError::Numerical(format!(
            "dt = {dt} is not below the coupling stability limit {limit:.6e}"
        )));
    }
    Ok(())
}

fn simulate(
    p: &Problem,
    dt: f64,
    t_end: f64,
    cfg: &ExperimentConfig,
    stride: usize,
) -> Result<Trajectory, CliError> {
    check_step(p, dt)?;
    let (e1, e2) = p.initial_state(0.0);
    let opts = RunOptions {
        dt,
        t_end,
        bootstrap: cfg.bootstrap,
        stride,
    };
    Ok(simulate_staggered(p.system(), opts, &p.inputs(), e1, e2)?)
}

fn residual_table(tr: &Trajectory) -> (Table, PowerResiduals) {
    let res = PowerResiduals::from_trajectory(tr);
    let mut t = Table::new(&["step", "residual_omega1", "residual_omega2"]);
    for (k, (r1, r2)) in res.omega1.iter().zip(&res.omega2).enumerate() {
        t.push(vec![
            k.to_string(),
            number(*r1),
            r2.map(number).unwrap_or_default(),
        ]);
    }
    (t, res)
}

fn residual_plot(res: &PowerResiduals) -> Plot {
    let steps: Vec<f64> = (0..res.len()).map(|k| k as f64).collect();
    let (s2, r2): (Vec<f64>, Vec<f64>) = res
        .omega2
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.map(|r| (k as f64, r)))
        .unzip();
    Plot::new("Power balance residuals", "step", "residual")
        .series(Series::line("Omega1", &steps, &res.omega1))
        .series(Series::line("Omega2", &s2, &r2))
}

fn energy_table(tr: &Trajectory, dt: f64) -> Table {
    let mut t = Table::new(&["t", "h_omega1", "h_omega2_half_step_later"]);
    for (k, h2) in tr.h2.iter().enumerate() {
        t.push_numbers(&[k as f64 * dt, tr.h1[k], *h2]);
    }
    t
}

/// Cells of a 1D space and the local points sampling it uniformly.
fn beam_points(space: &FunctionSpace) -> Result<Vec<(usize, f64)>, CliError> {
    let MeshRef::Interval(mesh) = space.mesh() else {
        return Err(CliError::Numerical("beam space on a 2D mesh".into()));
    };
    let bounds: Vec<(f64, f64)> = (0..space.num_cells())
        .map(|c| mesh.cell_bounds(space.cell(c)))
        .collect();
    let lo = bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let hi = bounds.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let mut pts = Vec::with_capacity(BEAM_SAMPLES + 1);
    for i in 0..=BEAM_SAMPLES {
        let x = lo + (hi - lo) * i as f64 / BEAM_SAMPLES as f64;
        let c = bounds
            .iter()
            .position(|&(a, b)| x >= a - 1e-14 && x <= b + 1e-14)
            .ok_or_else(|| CliError::Numerical(format!("no cell contains x = {x}")))?;
        pts.push((c, x));
    }
    Ok(pts)
}

fn beam_sim(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let b = cfg.beam;
    let p = Problem::beam(&b, cfg.sigma)?;
    // every state is kept so the displacement integral stays accurate
    let tr = simulate(&p, b.dt, b.t_end, cfg, 1)?;
    let [na1, _, na2, _] = p.system().block_sizes();
    let (s1, s2) = (p.space(Block::Alpha1), p.space(Block::Alpha2));

    // free end x = 0 lives on Ω₂ and is sampled at half steps
    let (_, free_cell) = s2.facets(BoundaryTag::Gamma2)[0];
    let v: Vec<f64> = tr
        .e2
        .iter()
        .map(|e| s2.evaluate(&e[..na2], free_cell, [0.0, 0.0])[0])
        .collect();
    let w0 = b.exact(0.0, tr.t2.first().copied().unwrap_or(0.0)).w;
    let w = cumulative_trapezoid(&tr.t2, &v, w0)?;
    let mut free = Table::new(&[
        "t",
        "velocity",
        "velocity_exact",
        "displacement",
        "displacement_exact",
    ]);
    let mut plot_t = Vec::new();
    let mut plot_v = [Vec::new(), Vec::new()];
    let mut plot_w = [Vec::new(), Vec::new()];
    for (k, &t) in tr.t2.iter().enumerate() {
        if k % cfg.stride != 0 && k + 1 != tr.t2.len() {
            continue;
        }
        let ex = b.exact(0.0, t);
        free.push_numbers(&[t, v[k], ex.w_t, w[k], ex.w]);
        plot_t.push(t);
        plot_v[0].push(v[k]);
        plot_v[1].push(ex.w_t);
        plot_w[0].push(w[k]);
        plot_w[1].push(ex.w);
    }
    out.table("free_end.csv", &free)?;

    out.table("energy.csv", &energy_table(&tr, b.dt))?;
    let (res_table, res) = residual_table(&tr);
    out.table("residuals.csv", &res_table)?;

    // displacement along the beam: each subdomain's velocity integrated at
    // its own sample times
    let snaps = 10usize;
    let steps = tr.t2.len();
    let mut field = Table::new(&["t", "x", "displacement", "displacement_exact"]);
    let mut final_x = Vec::new();
    let mut final_w = [Vec::new(), Vec::new()];
    for (space, states, times, na) in [
        (s2, &tr.e2, &tr.t2, na2),
        (s1, &tr.e1, &tr.t1, na1),
    ] {
        for (c, x) in beam_points(space)? {
            let vel: Vec<f64> = states
                .iter()
                .map(|e| space.evaluate(&e[..na], c, [x, 0.0])[0])
                .collect();
            let disp = cumulative_trapezoid(times, &vel, b.exact(x, times[0]).w)?;
            for s in 0..=snaps {
                let k = (s * (times.len() - 1)) / snaps;
                field.push_numbers(&[times[k], x, disp[k], b.exact(x, times[k]).w]);
            }
            final_x.push(x);
            final_w[0].push(disp[times.len() - 1]);
            final_w[1].push(b.exact(x, times[times.len() - 1]).w);
        }
    }
    out.table("displacement.csv", &field)?;

    if steps > 0 {
        out.plot(
            "free_end_velocity.svg",
            Plot::new("Free end velocity", "t", "w_t(0, t)")
                .series(Series::line("numerical", &plot_t, &plot_v[0]))
                .series(Series::line("exact", &plot_t, &plot_v[1])),
        )?;
        out.plot(
            "free_end_displacement.svg",
            Plot::new("Free end displacement", "t", "w(0, t)")
                .series(Series::line("numerical", &plot_t, &plot_w[0]))
                .series(Series::line("exact", &plot_t, &plot_w[1])),
        )?;
        out.plot("residuals.svg", residual_plot(&res))?;
    }
    out.plot(
        "displacement_final.svg",
        Plot::new("Displacement at final time", "x", "w")
            .series(Series::line("numerical", &final_x, &final_w[0]).with_markers())
            .series(Series::line("exact", &final_x, &final_w[1])),
    )?;
    Ok(())
}

/// Real field of a complex mode, rotated so the largest α entry is real
/// and positive.
fn real_mode(v: &[Complex], alpha: &[std::ops::Range<usize>]) -> Vec<f64> {
    let mut best = Complex::new(1.0, 0.0);
    let mut big = -1.0;
    for r in alpha {
        for z in &v[r.clone()] {
            if z.norm() > big {
                big = z.norm();
                best = *z;
            }
        }
    }
    let phase = if big > 0.0 { best.conj() / big } else { Complex::new(1.0, 0.0) };
    v.iter().map(|z| (z * phase).re).collect()
}

fn spectrum_outputs(
    p: &Problem,
    modes: &ModeSet,
    ana: &[f64],
    out: &mut Output,
) -> Result<Vec<Vec<f64>>, CliError> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut freqs = Table::new(&[
        "mode",
        "omega_num",
        "omega_ana",
        "rel_err_pct",
        "hz_num",
        "hz_ana",
        "interface_mismatch",
    ]);
    for (i, (&w, &a)) in modes.omegas.iter().zip(ana).enumerate() {
        let mismatch = interface_mismatch(p, &modes.vectors[i])?;
        freqs.push_labeled(
            i + 1,
            &[w, a, 100.0 * (w - a).abs() / a, w / two_pi, a / two_pi, mismatch],
        );
    }
    out.table("spectrum.csv", &freqs)?;

    let [a1, b1, a2, _] = p.system().block_sizes();
    let alpha = [0..a1, a1 + b1..a1 + b1 + a2];
    let mut vecs = Table::new(&["mode", "dof", "re", "im"]);
    let mut real = Vec::with_capacity(modes.len());
    for (i, v) in modes.vectors.iter().enumerate() {
        let v: Vec<Complex> = v.iter().copied().collect();
        for (d, z) in v.iter().enumerate() {
            vecs.push(vec![
                (i + 1).to_string(),
                d.to_string(),
                number(z.re),
                number(z.im),
            ]);
        }
        real.push(real_mode(&v, &alpha));
    }
    out.table("eigenvectors.csv", &vecs)?;

    let idx: Vec<f64> = (1..=modes.len()).map(|i| i as f64).collect();
    out.plot(
        "spectrum.svg",
        Plot::new("Eigenfrequencies", "mode", "omega (rad/s)")
            .series(Series::line("numerical", &idx, &modes.omegas).with_markers())
            .series(Series::line("analytical", &idx, &ana[..modes.len()]).with_markers()),
    )?;
    Ok(real)
}

fn mode_header(n: usize, lead: &[&str]) -> Vec<String> {
    lead.iter()
        .map(|s| s.to_string())
        .chain((1..=n).map(|i| format!("mode_{i}")))
        .collect()
}

fn beam_spectrum(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let b = cfg.beam;
    let p = Problem::beam(&b, cfg.sigma)?;
    let modes = solve_modes(p.system(), cfg.modes)?;
    let ana = beam_analytical_freqs(modes.len(), b.ei, b.rho_a, b.length)?;
    let real = spectrum_outputs(&p, &modes, &ana, out)?;

    // velocity mode shapes along the beam
    let [a1, b1, a2, _] = p.system().block_sizes();
    let header = mode_header(real.len(), &["x"]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut shapes = Table::new(&header);
    let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
    for (block, off, len) in [(Block::Alpha2, a1 + b1, a2), (Block::Alpha1, 0, a1)] {
        let s = p.space(block);
        for (c, x) in beam_points(s)? {
            let vals = real
                .iter()
                .map(|m| s.evaluate(&m[off..off + len], c, [x, 0.0])[0])
                .collect();
            rows.push((x, vals));
        }
    }
    let scale: Vec<f64> = (0..real.len())
        .map(|m| rows.iter().fold(0.0f64, |a, r| a.max(r.1[m].abs())).max(1e-300))
        .collect();
    let mut plot = Plot::new("Velocity mode shapes", "x", "normalized velocity");
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    for m in 0..real.len() {
        let ys: Vec<f64> = rows.iter().map(|r| r.1[m] / scale[m]).collect();
        if m < 4 {
            plot = plot.series(Series::line(&format!("mode {}", m + 1), &xs, &ys));
        }
    }
    for (x, vals) in &rows {
        let mut row = vec![*x];
        row.extend(vals.iter().zip(&scale).map(|(v, s)| v / s));
        shapes.push_numbers(&row);
    }
    out.table("mode_shapes.csv", &shapes)?;
    out.plot("mode_shapes.svg", plot)?;
    Ok(())
}

fn wave_spectrum(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let p = Problem::wave(&cfg.wave, cfg.sigma)?;
    let modes = solve_modes(p.system(), cfg.modes)?;
    let ana = wave_analytical_freqs(modes.len(), 1.0)?;
    let real = spectrum_outputs(&p, &modes, &ana, out)?;

    // α field of each mode at triangle centroids
    let [a1, b1, a2, _] = p.system().block_sizes();
    let header = mode_header(real.len(), &["triangle", "x", "y"]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(&header);
    let mut rows: Vec<(usize, [f64; 2], Vec<f64>)> = Vec::new();
    for (block, off, len) in [(Block::Alpha1, 0, a1), (Block::Alpha2, a1 + b1, a2)] {
        let s = p.space(block);
        let MeshRef::Triangle(mesh) = s.mesh() else {
            return Err(CliError::Numerical("wave space on a 1D mesh".into()));
        };
        for c in 0..s.num_cells() {
            let t = s.cell(c);
            let v = mesh.triangle_coords(t);
            let x = [
                (v[0][0] + v[1][0] + v[2][0]) / 3.0,
                (v[0][1] + v[1][1] + v[2][1]) / 3.0,
            ];
            let vals = real
                .iter()
                .map(|m| s.evaluate(&m[off..off + len], c, x)[0])
                .collect();
            rows.push((t, x, vals));
        }
    }
    rows.sort_by_key(|r| r.0);
    for (t, x, vals) in rows {
        let mut row = vec![t.to_string(), number(x[0]), number(x[1])];
        row.extend(vals.into_iter().map(number));
        table.push(row);
    }
    out.table("mode_centroids.csv", &table)?;
    Ok(())
}

fn convergence(rec: &ConvergenceRecord, model: &str, out: &mut Output) -> Result<(), CliError> {
    let mut t = Table::new(&["h", "err_alpha_1", "err_beta_1", "err_alpha_2", "err_beta_2"]);
    for (h, e) in rec.h.iter().zip(&rec.errors) {
        t.push_numbers(&[*h, e[0], e[1], e[2], e[3]]);
    }
    out.table("convergence.csv", &t)?;
    let rates = rec.rates()?;
    let mut r = Table::new(&["block", "rate"]);
    for (b, rate) in Block::ALL.iter().zip(rates) {
        r.push(vec![b.name().to_string(), number(rate)]);
    }
    out.table("rates.csv", &r)?;
    let mut plot = Plot::new(&format!("{model} L2 errors"), "h", "error").log_log();
    for b in Block::ALL {
        plot = plot.series(Series::line(b.name(), &rec.h, &rec.column(b)).with_markers());
    }
    out.plot("convergence.svg", plot.slope_triangle(rates[0]))?;
    Ok(())
}

fn wave_sim(cfg: &ExperimentConfig, out: &mut Output, conservation: bool) -> Result<(), CliError> {
    let w = cfg.wave;
    let p = Problem::wave(&w, cfg.sigma)?;
    let stride = if conservation { 1 } else { cfg.stride };
    let tr = simulate(&p, w.dt, w.t_end, cfg, stride)?;
    let [a1, _, a2, _] = p.system().block_sizes();

    let (res_table, res) = residual_table(&tr);
    out.table("residuals.csv", &res_table)?;
    out.table("energy.csv", &energy_table(&tr, w.dt))?;

    // strong curl on Ω₂ from the initial state on, weak curl on Ω₁ per step
    let ned = p.space(Block::Beta2);
    let init = p.initial_state(0.0).1;
    let mut curl = Table::new(&["t", "curl_omega2"]);
    let mut curl_t = Vec::new();
    let mut curl_v = Vec::new();
    for (t, e) in std::iter::once(&0.0).chain(&tr.t2).zip(std::iter::once(&init).chain(&tr.e2)) {
        let c = curl_norm(ned, &e[a2..])?;
        curl.push_numbers(&[*t, c]);
        curl_t.push(*t);
        curl_v.push(c);
    }
    out.table("curl.csv", &curl)?;
    if stride == 1 {
        let wc = WeakCurl::new(&p)?;
        let mut weak = Table::new(&["t", "weak_curl_omega1"]);
        for (t, pair) in tr.t1[1..].iter().zip(tr.e1.windows(2)) {
            weak.push_numbers(&[*t, wc.residual(&pair[0][a1..], &pair[1][a1..], w.dt)?]);
        }
        out.table("weak_curl.csv", &weak)?;
    }

    if !conservation {
        let mut errs = Table::new(&[
            "t",
            "err_alpha_1",
            "err_beta_1",
            "err_alpha_2",
            "err_beta_2",
        ]);
        for k in 0..tr.e2.len().min(tr.e1.len()) {
            let e = p.l2_errors(&tr.e1[k], tr.t1[k], &tr.e2[k], tr.t2[k])?;
            errs.push_numbers(&[tr.t1[k], e[0], e[1], e[2], e[3]]);
        }
        out.table("errors.csv", &errs)?;
        if let MeshRef::Triangle(mesh) = p.space(Block::Alpha1).mesh() {
            out.text("mesh.txt", &mesh.to_text())?;
        }
        let t: Vec<f64> = (0..tr.h2.len()).map(|k| k as f64 * w.dt).collect();
        if !t.is_empty() {
            out.plot(
                "energy.svg",
                Plot::new("Subdomain energies", "t", "H")
                    .series(Series::line("Omega1", &t, &tr.h1[..t.len()]))
                    .series(Series::line("Omega2", &t, &tr.h2)),
            )?;
        }
    }
    if !res.is_empty() {
        out.plot("residuals.svg", residual_plot(&res))?;
    }
    out.plot(
        "curl.svg",
        Plot::new("Curl of the Omega2 vector field", "t", "L2 norm of curl")
            .series(Series::line("curl", &curl_t, &curl_v)),
    )?;
    Ok(())
}
