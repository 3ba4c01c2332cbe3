//! Experiment drivers: one function per command.

use std::path::Path;

use floquet_core::bloch::DiracBasis;
use floquet_core::dirac::DiracPreset;
use floquet_core::*;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig, FgrMethod, ModelKind};
use crate::error::{HarnessError, Result};
use crate::output::{Cell, RunDir};

/// Worker pool bounded by `FLOQUET_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("FLOQUET_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(HarnessError::field("FLOQUET_THREADS", format!("'{s}' is not a positive integer"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Output(format!("thread pool: {e}")))
}

/// Runs one experiment into `out` and returns its summary.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Value> {
    cfg.validate()?;
    let mut dir = RunDir::create(out, cfg)?;
    let summary = match cfg.command {
        Command::Bands => bands(cfg, &mut dir)?,
        Command::Mode => mode(cfg, &mut dir)?,
        Command::Evolve => evolve(cfg, &mut dir)?,
        Command::Sweep => sweep(cfg, &mut dir)?,
        Command::Fgr => fgr(cfg, &mut dir)?,
        Command::Envelope => envelope(cfg, &mut dir)?,
    };
    dir.finish(cfg)?;
    if let Some(msg) = summary.get("failure").and_then(Value::as_str) {
        return Err(HarnessError::Numerical(FloquetError::Numerical(msg.to_string())));
    }
    Ok(summary)
}

/// Potential, Dirac data and fast grid of the Schrödinger model.
pub struct Physical {
    pub spec: PotentialSpec,
    pub params: DiracParameters,
    pub basis: DiracBasis,
    pub grid: GridSpec,
}

pub fn physical(cfg: &ExperimentConfig) -> Result<Physical> {
    let spec = cfg.potential_spec()?;
    let ppp = cfg.points_per_period();
    let (params, basis) = extract_dirac_parameters(&spec, ppp)?;
    let grid = GridSpec::new(cfg.half_length(), ppp, cfg.grid.boundary)?;
    Ok(Physical { spec, params, basis, grid })
}

pub fn defect_mode(ph: &Physical) -> Result<MidgapSearch> {
    let h = assemble_dw_hamiltonian(&ph.spec, &ph.grid)?;
    Ok(midgap_mode(&h, ph.params.e_d, ph.params.gap_half_width())?)
}

pub fn dirac_model(cfg: &ExperimentConfig) -> Result<DiracModel> {
    let spec = cfg.potential_spec()?;
    Ok(match cfg.dirac.preset {
        DiracPreset::Normalized => DiracModel { wall: spec.wall, ..DiracModel::normalized() },
        DiracPreset::Physical => {
            let (params, _) = extract_dirac_parameters(&spec, cfg.points_per_period())?;
            DiracModel::physical(&params, spec.wall)
        }
    })
}

/// Operator on the configured slow grid (scaled by `box_factor`) with its zero mode.
pub fn dirac_setup(cfg: &ExperimentConfig, box_factor: f64) -> Result<(DiracOperator, SpinorField, f64)> {
    let model = dirac_model(cfg)?;
    let grid = SlowGrid::covering(cfg.dirac.half_length * box_factor, cfg.dirac.dx)?;
    let op = assemble_dirac_operator(&model, &grid)?;
    let (zm, sigma) = dirac_zero_mode_numeric(&op)?;
    Ok((op, zm, sigma))
}

fn forcing(cfg: &ExperimentConfig, beta: f64) -> Result<ForcingSpec> {
    Ok(ForcingSpec::new(beta, cfg.forcing.omega)?)
}

fn evolve_options(cfg: &ExperimentConfig) -> EvolveOptions {
    let mut o = EvolveOptions::new(cfg.dt(), cfg.t_end(), cfg.stride());
    o.snapshot_times = cfg.snapshot_times();
    o
}

fn fit_window(cfg: &ExperimentConfig) -> FitWindow {
    let scale = cfg.clock_scale();
    FitWindow {
        t_min: cfg.analysis.fit_t_min.unwrap_or(5.0 / cfg.forcing.omega * scale),
        t_max: cfg.analysis.fit_t_max.unwrap_or(cfg.t_end()),
        floor: cfg.analysis.fit_floor,
    }
}

fn preset_name(p: DiracPreset) -> &'static str {
    match p {
        DiracPreset::Physical => "physical",
        DiracPreset::Normalized => "normalized",
    }
}

fn bands(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Value> {
    let spec = cfg.potential_spec()?;
    let ppp = cfg.points_per_period();
    let (params, _) = extract_dirac_parameters(&spec, ppp)?;
    let (v, _) = spec.sample_cell(ppp);
    let nk = cfg.bands.k_points;
    let ks: Vec<f64> = (0..nk).map(|i| 2.0 * std::f64::consts::PI * i as f64 / (nk - 1) as f64).collect();
    let bs = band_structure(&v, &ks, cfg.bands.n_bands)?;
    let names: Vec<String> = (1..=cfg.bands.n_bands).map(|b| format!("E_{b}")).collect();
    let header: Vec<&str> = std::iter::once("k").chain(names.iter().map(String::as_str)).collect();
    let mut w = dir.csv("bands.csv", &header)?;
    for (k, e) in bs.k.iter().zip(&bs.energies) {
        w.row(std::iter::once(*k).chain(e.iter().copied()))?;
    }
    w.finish()?;
    let out = json!({
        "family": cfg.family,
        "eps": cfg.eps,
        "points_per_period": ppp,
        "k_d": params.k_d,
        "E_D": params.e_d,
        "band": params.band,
        "v_D": params.v_d,
        "theta": params.theta,
        "kappa_inf": params.kappa_inf,
        "gap_half_width": params.gap_half_width(),
        "gap_estimate": 2.0 * params.gap_half_width(),
    });
    dir.json("dirac_params.json", &out)?;
    Ok(out)
}

fn keep_x(x: f64, j: usize, cfg: &ExperimentConfig) -> bool {
    j % cfg.output.x_stride == 0 && cfg.output.x_max.is_none_or(|m| x.abs() <= m)
}

fn mode(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Value> {
    let ph = physical(cfg)?;
    let search = defect_mode(&ph)?;
    let m = search.primary();
    let mut w = dir.csv("mode.csv", &["x", "re_psi", "im_psi", "abs_psi"])?;
    for (j, z) in m.psi.iter().enumerate() {
        let x = ph.grid.x(j);
        if keep_x(x, j, cfg) {
            w.row([x, z.re, z.im, z.norm()])?;
        }
    }
    w.finish()?;
    let env = envelope_from_wavepacket(&m.psi, &ph.basis, cfg.eps, &ph.grid)?;
    let mut w = dir.csv("mode_envelope.csv", &["X", "abs_alpha1", "abs_alpha2"])?;
    for (j, (a, b)) in env.abs1().iter().zip(env.abs2()).enumerate() {
        w.row([env.grid.x(j), *a, b])?;
    }
    w.finish()?;
    let out = json!({
        "family": cfg.family,
        "eps": cfg.eps,
        "energy": m.energy,
        "E_D": ph.params.e_d,
        "offset": m.energy - ph.params.e_d,
        "gap_half_width": ph.params.gap_half_width(),
        "residual": m.residual,
        "central_mass": m.central_mass,
        "localized_count": search.modes.len(),
        "localized_energies": search.modes.iter().map(|m| m.energy).collect::<Vec<_>>(),
        "delocalized_energies": search.delocalized,
    });
    dir.json("mode.json", &out)?;
    Ok(out)
}

struct TraceNames {
    trace: [&'static str; 5],
    snap: [&'static str; 3],
}

const SCHRODINGER_NAMES: TraceNames = TraceNames {
    trace: ["t", "norm", "re_proj", "im_proj", "abs_proj"],
    snap: ["t", "x", "abs_psi"],
};

const DIRAC_NAMES: TraceNames = TraceNames {
    trace: ["T", "norm", "re_g", "im_g", "abs_g"],
    snap: ["T", "X", "abs_alpha"],
};

fn write_trace(dir: &mut RunDir, name: &str, tr: &EvolutionTrace, names: &TraceNames) -> Result<()> {
    let proj = tr.projections.as_ref().ok_or_else(|| HarnessError::Output("trace has no projection".into()))?;
    let mut w = dir.csv(name, &names.trace)?;
    for ((t, n), p) in tr.times.iter().zip(&tr.norms).zip(proj) {
        w.row([*t, *n, p.re, p.im, p.norm()])?;
    }
    w.finish()
}

fn write_snapshots(dir: &mut RunDir, tr: &EvolutionTrace, names: &TraceNames, cfg: &ExperimentConfig) -> Result<()> {
    if tr.snapshots.is_empty() {
        return Ok(());
    }
    let mut w = dir.csv("snapshots.csv", &names.snap)?;
    for s in &tr.snapshots {
        for (j, (x, a)) in tr.x.iter().zip(&s.abs).enumerate() {
            if keep_x(*x, j, cfg) {
                w.row([s.t, *x, *a])?;
            }
        }
    }
    w.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    /// Rate on the model's own clock.
    pub rate: f64,
    /// Rate in slow time `T`.
    pub rate_slow: f64,
    pub amplitude: f64,
    pub residual: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub shrunk: bool,
    pub clamped: bool,
}

fn fit_report(cfg: &ExperimentConfig, t: &[f64], y: &[f64]) -> Result<FitReport> {
    let f = fit_exponential_decay(t, y, &fit_window(cfg))
        .map_err(|e| HarnessError::Numerical(FloquetError::Numerical(format!("fit: {e}"))))?;
    Ok(FitReport {
        rate: f.rate,
        rate_slow: f.rate * cfg.clock_scale(),
        amplitude: f.amplitude,
        residual: f.residual,
        t_min: f.t_min,
        t_max: f.t_max,
        samples: f.samples,
        shrunk: f.shrunk,
        clamped: f.clamped,
    })
}

/// Trace of one forced run of the configured model.
pub fn run_model(cfg: &ExperimentConfig, beta: f64, opts: &EvolveOptions) -> Result<EvolutionTrace> {
    let f = forcing(cfg, beta)?;
    match cfg.model {
        ModelKind::Schrodinger => {
            let ph = physical(cfg)?;
            let search = defect_mode(&ph)?;
            let psi = &search.primary().psi;
            Ok(evolve_schrodinger(&ph.spec, &f, &ph.grid, psi, Some(psi), opts)?)
        }
        ModelKind::Dirac => {
            let (op, zm, _) = dirac_setup(cfg, 1.0)?;
            Ok(evolve_dirac(&op, &f, &zm, Some(&zm), opts)?)
        }
        ModelKind::Synthetic => {
            let rate = cfg.analysis.synthetic_gamma0 * beta * beta;
            let every = opts.dt * opts.stride as f64;
            let n = (opts.t_end / every + 1e-9).floor() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * every).collect();
            let projections = times.iter().map(|t| Complex64::new((-rate * t).exp(), 0.0)).collect();
            Ok(EvolutionTrace { norms: vec![1.0; times.len()], times, projections: Some(projections), ..Default::default() })
        }
    }
}

fn evolve(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Value> {
    let names = if cfg.model == ModelKind::Dirac { &DIRAC_NAMES } else { &SCHRODINGER_NAMES };
    let tr = run_model(cfg, cfg.forcing.beta, &evolve_options(cfg))?;
    write_trace(dir, "trace.csv", &tr, names)?;
    write_snapshots(dir, &tr, names, cfg)?;
    let abs = tr.abs_projection()?;
    let max_dev = abs.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
    let drift = tr.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    let fit = fit_report(cfg, &tr.times, &abs);
    let mut out = json!({
        "model": cfg.model,
        "family": cfg.family,
        "beta": cfg.forcing.beta,
        "omega": cfg.forcing.omega,
        "t_end": tr.times.last().copied().unwrap_or(0.0),
        "final_abs_projection": abs.last().copied().unwrap_or(f64::NAN),
        "max_projection_deviation": max_dev,
        "max_norm_drift": drift,
    });
    match fit {
        Ok(f) => out["fit"] = serde_json::to_value(f)?,
        Err(e) => out["fit_error"] = Value::String(e.to_string()),
    }
    if cfg.model == ModelKind::Dirac {
        out["preset"] = Value::String(preset_name(cfg.dirac.preset).into());
        let (op, zm, _) = dirac_setup(cfg, 1.0)?;
        let absorber = Absorber { width: cfg.analysis.absorber_width, strength: cfg.analysis.absorber_strength };
        if absorber.width < op.grid.half_length() {
            let (g0, l0) = fgr_resolvent(&op, &zm, cfg.forcing.omega, &absorber)?;
            let b = cfg.forcing.beta;
            out["gamma0"] = json!(g0);
            out["lambda0"] = json!(l0);
            out["predicted_rate"] = json!(b * b * g0);
            let t_end = tr.times.last().copied().unwrap_or(0.0);
            let g = predicted_g(g0, l0, eta_a(&zm, &forcing(cfg, b)?, t_end), b, t_end);
            out["predicted_final_abs_g"] = json!(g.norm());
        }
    }
    dir.json("fit.json", &out)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub status: String,
    /// Slow-time rate.
    pub gamma_fit: f64,
    pub residual: f64,
    pub fit: Option<FitReport>,
}

fn sweep(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Value> {
    let mut betas = cfg.sweep.betas.clone();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let opts = EvolveOptions::new(cfg.dt(), cfg.t_end(), cfg.stride());
    let names = if cfg.model == ModelKind::Dirac { &DIRAC_NAMES } else { &SCHRODINGER_NAMES };
    let pool = worker_pool()?;
    let runs: Vec<Result<EvolutionTrace>> =
        pool.install(|| betas.par_iter().map(|&b| run_model(cfg, b, &opts)).collect());
    let runs_dir = if cfg.output.sweep_traces { Some(dir.subdir("runs")?) } else { None };
    let mut rows = Vec::with_capacity(betas.len());
    for (i, (beta, run)) in betas.iter().zip(runs).enumerate() {
        let row = match run.and_then(|tr| {
            if runs_dir.is_some() {
                write_trace(dir, &format!("runs/beta_{i:02}.csv"), &tr, names)?;
            }
            fit_report(cfg, &tr.times, &tr.abs_projection()?)
        }) {
            Ok(f) if f.clamped => SweepRow { beta: *beta, status: "no decay".into(), gamma_fit: f.rate_slow, residual: f.residual, fit: Some(f) },
            Ok(f) => SweepRow { beta: *beta, status: "ok".into(), gamma_fit: f.rate_slow, residual: f.residual, fit: Some(f) },
            Err(HarnessError::Config(m)) => return Err(HarnessError::Config(m)),
            Err(HarnessError::Model(e)) => return Err(HarnessError::Model(e)),
            Err(e) => SweepRow { beta: *beta, status: format!("failed: {e}"), gamma_fit: f64::NAN, residual: f64::NAN, fit: None },
        };
        rows.push(row);
    }
    let mut w = dir.csv("sweep.csv", &["family", "omega", "beta", "gamma_fit", "residual"])?;
    for r in &rows {
        w.row([Cell::from(cfg.family), cfg.forcing.omega.into(), r.beta.into(), r.gamma_fit.into(), r.residual.into()])?;
    }
    w.finish()?;
    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.status == "ok" && r.gamma_fit > 0.0).collect();
    let partial = good.len() < rows.len();
    let b: Vec<f64> = good.iter().map(|r| r.beta).collect();
    let g: Vec<f64> = good.iter().map(|r| r.gamma_fit).collect();
    let law = fit_power_law(&b, &g);
    let (exponent, prefactor) = law.as_ref().map(|p| (p.exponent, p.prefactor)).unwrap_or((f64::NAN, f64::NAN));
    let mut w = dir.csv("powerlaw.csv", &["family", "omega", "exponent", "prefactor"])?;
    w.row([Cell::from(cfg.family), cfg.forcing.omega.into(), exponent.into(), prefactor.into()])?;
    w.finish()?;
    let mut out = json!({
        "model": cfg.model,
        "family": cfg.family,
        "omega": cfg.forcing.omega,
        "exponent": exponent,
        "prefactor": prefactor,
        "log_residual": law.as_ref().map(|p| p.residual).unwrap_or(f64::NAN),
        "used": good.len(),
        "partial": partial,
        "rows": rows,
    });
    if let Err(e) = law {
        out["failure"] = Value::String(format!("power law: {e}"));
    }
    if cfg.model == ModelKind::Dirac {
        out["preset"] = Value::String(preset_name(cfg.dirac.preset).into());
    }
    dir.json("sweep.json", &out)?;
    Ok(out)
}

fn fgr(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Value> {
    let bf = cfg.fgr.box_factor;
    let (op, zm, sigma) = dirac_setup(cfg, bf)?;
    let omegas = cfg.fgr.omegas.clone();
    let rows: Vec<(f64, f64, f64, f64)> = match cfg.fgr.method {
        FgrMethod::Resolvent => {
            let absorber = Absorber { width: cfg.analysis.absorber_width, strength: cfg.analysis.absorber_strength };
            let pool = worker_pool()?;
            let res: Vec<floquet_core::Result<(f64, f64)>> =
                pool.install(|| omegas.par_iter().map(|&w| fgr_resolvent(&op, &zm, w, &absorber)).collect());
            omegas
                .iter()
                .zip(res)
                .map(|(&w, r)| r.map(|(g, l)| (w, g, l, 0.0)))
                .collect::<floquet_core::Result<_>>()?
        }
        FgrMethod::Lorentzian => {
            let s = SpectralData::compute(&op, &zm)?;
            omegas
                .iter()
                .map(|&w| {
                    let eta = cfg.analysis.eta.map(|e| e / bf).unwrap_or_else(|| s.default_broadening(w));
                    let pv = cfg.analysis.pv_cutoff.unwrap_or(eta);
                    Ok((w, gamma0(&s, w, eta)?, lambda0(&s, w, pv), eta))
                })
                .collect::<floquet_core::Result<_>>()?
        }
    };
    let mut w = dir.csv("fgr.csv", &["omega", "gamma0", "lambda0", "eta_broadening"])?;
    for r in &rows {
        w.row([r.0, r.1, r.2, r.3])?;
    }
    w.finish()?;
    let out = json!({
        "family": cfg.family,
        "preset": preset_name(cfg.dirac.preset),
        "method": cfg.fgr.method,
        "half_length": op.grid.half_length(),
        "dx": op.grid.h,
        "threshold": op.gap(),
        "zero_mode_sigma": sigma,
        "omega": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        "gamma0": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
        "lambda0": rows.iter().map(|r| r.2).collect::<Vec<_>>(),
    });
    dir.json("fgr.json", &out)?;
    Ok(out)
}

fn envelope(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Value> {
    let ph = physical(cfg)?;
    let model = DiracModel::physical(&ph.params, ph.spec.wall);
    let slow = SlowGrid::commensurate(&ph.grid, cfg.eps, cfg.dirac.dx)?;
    let op = assemble_dirac_operator(&model, &slow)?;
    let (zm, _) = dirac_zero_mode_numeric(&op)?;
    let psi0 = wavepacket_from_envelope(&zm, &ph.basis, cfg.eps, &ph.grid)?;
    let f = forcing(cfg, cfg.forcing.beta)?;
    let mut times = cfg.envelope.times.clone();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let t_end = *times.last().unwrap_or(&0.0);

    let mut so = EvolveOptions::new(cfg.time.dt.unwrap_or(0.01), t_end, cfg.stride());
    so.snapshot_times = times.clone();
    so.keep_states = true;
    let str_ = evolve_schrodinger(&ph.spec, &f, &ph.grid, &psi0, Some(&psi0), &so)?;

    let mut dopt = EvolveOptions::new(0.05 * cfg.eps, cfg.eps * t_end, cfg.stride());
    dopt.snapshot_times = times.iter().map(|t| cfg.eps * t).collect();
    dopt.keep_states = true;
    let dtr = evolve_dirac(&op, &f, &zm, Some(&zm), &dopt)?;

    let n0 = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut w = dir.csv("envelope.csv", &["t", "discrepancy_envelope", "discrepancy_wavepacket"])?;
    let mut snaps = dir.csv(
        "envelope_snapshots.csv",
        &["t", "X", "abs_alpha1_schrodinger", "abs_alpha2_schrodinger", "abs_alpha1_dirac", "abs_alpha2_dirac"],
    )?;
    let mut report = Vec::new();
    for (s, d) in str_.snapshots.iter().zip(&dtr.snapshots) {
        let psi = s.state.as_ref().expect("states kept");
        let alpha = SpinorField::from_interleaved(slow, d.state.as_ref().expect("states kept"));
        let phase = Complex64::from_polar(1.0, ph.params.e_d * s.t);
        let demod: Vec<Complex64> = psi.iter().map(|z| z * phase).collect();
        let env = envelope_from_wavepacket(&demod, &ph.basis, cfg.eps, &ph.grid)?;
        let de = relative_discrepancy(&alpha, &env);
        let packet = wavepacket_from_envelope(&alpha, &ph.basis, cfg.eps, &ph.grid)?;
        let dw = phase_min_distance(&demod, &packet) / n0;
        w.row([s.t, de, dw])?;
        let on_slow = env.resample(slow);
        for j in 0..slow.len() {
            let x = slow.x(j);
            if keep_x(x, j, cfg) {
                snaps.row([s.t, x, on_slow.a1[j].norm(), on_slow.a2[j].norm(), alpha.a1[j].norm(), alpha.a2[j].norm()])?;
            }
        }
        report.push(json!({ "t": s.t, "envelope": de, "wavepacket": dw }));
    }
    w.finish()?;
    snaps.finish()?;
    let out = json!({
        "family": cfg.family,
        "eps": cfg.eps,
        "beta": cfg.forcing.beta,
        "omega": cfg.forcing.omega,
        "slow_dx": slow.h,
        "discrepancy": report,
    });
    dir.json("envelope.json", &out)?;
    Ok(out)
}

/// `min_θ ‖a - e^{iθ}b‖`, unweighted.
fn phase_min_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let cross: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (na + nb - 2.0 * cross.norm()).max(0.0).sqrt()
}
