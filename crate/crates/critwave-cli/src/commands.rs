use std::path::{Path, PathBuf};

use critwave::blowup_law::{dichotomy_demo, integrate_reduced_system, DichotomyConfig, ReducedConfig, ReducedMode};
use critwave::coercivity::{bessel_scale, run_coercivity, tau_to_r, CoercivityConfig};
use critwave::groundstate::{compute_gamma, eval_ground_family, LAUNCH_Y0};
use critwave::numerics::{bessel_order1_with_derivs, RadialGrid};
use critwave::profile::{
    assemble_pb1, b0, b1, dbp_envelope, envelope_ratios, flux_integral, psi_envelope, t1_envelope, ProfileConfig,
};
use critwave::report::{run_report, ReportOptions};
use critwave::spectral::{solve_eigenpair, Normalization, ShootingConfig};
use critwave::wave_sim::{
    run_and_bisect, run_trajectory, DPlus, Envelopes, ExitInfo, GrowthFit, SimConfig, SimContext, Trajectory,
};
use serde::Serialize;

use crate::io::{emit_json, Table};
use crate::Invalid;

pub fn tabulate(rmax: f64, nodes: usize, out: Option<&Path>) -> anyhow::Result<()> {
    if !(rmax > 1.0 && rmax <= 1e5) {
        return Err(Invalid(format!("--rmax must lie in (1, 1e5], got {rmax}")).into());
    }
    let grid = RadialGrid::geometric(LAUNCH_Y0, rmax, nodes)?;
    let gamma = compute_gamma(&grid)?;
    let mut t = Table::new(&["y", "Q", "LambdaQ", "Phi", "V", "W", "Gamma"]);
    for (&y, &g) in grid.nodes().iter().zip(gamma.gamma.values()) {
        let f = eval_ground_family(y);
        t.push(&[y, f.q[0], f.lambda_q[0], f.phi[0], f.v[0], f.w[0], g]);
    }
    t.emit(out)
}

#[derive(Serialize)]
struct ProfileHeader {
    b: f64,
    big_b0: f64,
    big_b1: f64,
    m: f64,
    c_b: f64,
    c_b_normalized: f64,
    c: f64,
    projection_rel: f64,
    flux_ratio: f64,
    /// Largest `|T₁|/envelope` at `y = 5, B₀/4, B₀`.
    fitted_t1: f64,
    /// Largest `|Ψ - c_b b²χΛQ|/envelope` at `y = 5, B₀/4, B₀, 1.5B₁`.
    fitted_psi: f64,
    /// Largest `|∂_b P|/envelope` at the same radii.
    fitted_dbp: f64,
}

pub fn profile(b: f64, m: f64, nodes: usize, out: &Path, json: Option<&Path>) -> anyhow::Result<()> {
    if !(2.0..=100.0).contains(&m) {
        return Err(Invalid(format!("--M must lie in [2, 100], got {m}")).into());
    }
    let cfg = ProfileConfig { m, nodes, ..ProfileConfig::default() };
    let bu = assemble_pb1(b, &cfg)?;
    let probes = [5.0, b0(b) / 4.0, b0(b), 1.5 * b1(b)];
    let ratios: Vec<[f64; 3]> = probes.iter().map(|&y| envelope_ratios(&bu, y)).collect();
    let header = ProfileHeader {
        b,
        big_b0: b0(b),
        big_b1: b1(b),
        m,
        c_b: bu.t1.cb,
        c_b_normalized: bu.cb.normalized,
        c: bu.t1.shift,
        projection_rel: bu.t1.projection_rel,
        flux_ratio: flux_integral(&bu).ratio,
        fitted_t1: ratios[..3].iter().map(|r| r[0]).fold(0.0, f64::max),
        fitted_psi: ratios.iter().map(|r| r[1]).fold(0.0, f64::max),
        fitted_dbp: ratios.iter().map(|r| r[2]).fold(0.0, f64::max),
    };
    let mut t = Table::new(&["y", "T1", "P", "Psi", "env_T1", "env_Psi", "env_dbP"]);
    for (i, &y) in bu.nodes().iter().enumerate() {
        t.push(&[
            y,
            bu.t1_at(y)[0],
            bu.p[i],
            bu.psi[i],
            t1_envelope(y, b, m),
            psi_envelope(y, b, m),
            dbp_envelope(y, b, m),
        ]);
    }
    t.emit(Some(out))?;
    emit_json(&header, json)
}

#[derive(Serialize)]
struct SpectrumSummary {
    zeta: f64,
    zeta_raw_sign: f64,
    residual_rel: f64,
    residual_max: f64,
    match_jump: f64,
    decay_slope: f64,
    l2_norm: f64,
    interior_zeros: usize,
}

pub fn spectrum(out: &Path, json: Option<&Path>) -> anyhow::Result<()> {
    let ep = solve_eigenpair::<f64>(&ShootingConfig::default())?.normalized(Normalization::Origin);
    let k = ep.zeta.sqrt();
    let mut t = Table::new(&["r", "psi", "psi_exp"]);
    for (&r, &p) in ep.psi.nodes().iter().zip(ep.psi.values()) {
        t.push(&[r, p, p * (k * r).exp()]);
    }
    t.emit(Some(out))?;
    let s = SpectrumSummary {
        zeta: ep.zeta,
        zeta_raw_sign: ep.zeta_raw_sign,
        residual_rel: ep.residual_rel,
        residual_max: ep.residual.max,
        match_jump: ep.match_jump,
        decay_slope: ep.decay_slope,
        l2_norm: ep.l2_norm,
        interior_zeros: ep.interior_zeros(),
    };
    emit_json(&s, json)
}

pub fn coercivity(out: &Path, tables: Option<&Path>) -> anyhow::Result<()> {
    let (rep, tabs) = run_coercivity::<f64>(&CoercivityConfig::default())?;
    emit_json(&rep, Some(out))?;
    let Some(path) = tables else { return Ok(()) };
    let mut t = Table::new(&["table", "r", "value", "tail"]);
    for (&r, &u) in tabs.u_direct.nodes().iter().zip(tabs.u_direct.values()) {
        t.push_labeled("U", &[r, u, u]);
    }
    // Ũ(τ) = C1 J1(aτ) + C2 Y1(aτ) at r(τ), with τŨ as the origin diagnostic.
    if let (Some(c1), Some(c2)) = (rep.index_bessel.c1, rep.index_bessel.c2) {
        let a: f64 = bessel_scale();
        for i in 1..=2000 {
            let tau = i as f64 / 2000.0;
            let [j, y, _, _] = bessel_order1_with_derivs(a * tau)?;
            let v = c1 * j + c2 * y;
            t.push_labeled("U_tilde", &[tau_to_r(tau), v, tau * v]);
        }
    }
    for (&r, &u) in tabs.inv_psi.u.nodes().iter().zip(tabs.inv_psi.u.values()) {
        t.push_labeled("Binv_psi", &[r, u, r * r * u]);
    }
    for (&r, &u) in tabs.inv_phi.u.nodes().iter().zip(tabs.inv_phi.u.values()) {
        let tail = if r > 1.0 { r * r * u / r.ln() } else { f64::NAN };
        t.push_labeled("Binv_phi", &[r, u, tail]);
    }
    t.emit(Some(path))
}

#[derive(Serialize)]
struct BlowupSummary {
    mode: ReducedMode,
    b0: f64,
    s_max: f64,
    b_law_ratio: f64,
    lambda_law_ratio: f64,
    speed_slope: f64,
    lambda_over_remaining: f64,
    reparam_error: f64,
    t_star: f64,
    floor_reached: bool,
}

pub fn blowup(b0: f64, mode: ReducedMode, s_max: f64, out: &Path, json: Option<&Path>) -> anyhow::Result<()> {
    let tr = integrate_reduced_system(&ReducedConfig { b0, mode, s_max, ..ReducedConfig::default() })?;
    let mut t = Table::new(&["s", "t", "b", "lambda", "remaining", "j"]);
    for i in 0..tr.s.len() {
        t.push(&[tr.s[i], tr.t[i], tr.b[i], tr.lambda[i], tr.remaining[i], tr.j[i]]);
    }
    t.emit(Some(out))?;
    let s = BlowupSummary {
        mode,
        b0,
        s_max,
        b_law_ratio: tr.b_law_ratio,
        lambda_law_ratio: tr.lambda_law_ratio,
        speed_slope: tr.speed_slope,
        lambda_over_remaining: tr.lambda_over_remaining,
        reparam_error: tr.reparam_error,
        t_star: tr.t_star,
        floor_reached: tr.floor_reached,
    };
    emit_json(&s, json)
}

pub fn dichotomy(b0: f64, out: Option<&Path>) -> anyhow::Result<()> {
    let r = dichotomy_demo(b0, &DichotomyConfig::default())?;
    emit_json(&r, out)
}

/// Flags of `simulate`; each overrides the configuration file.
pub struct SimulateArgs {
    pub b0: Option<String>,
    pub dplus: Option<String>,
    pub config: Option<PathBuf>,
    pub overrides: Vec<(String, String)>,
    pub out: PathBuf,
    pub json: Option<PathBuf>,
}

#[derive(Serialize)]
struct TrajectorySummary {
    dplus: f64,
    intended_kappa_plus: f64,
    rows: usize,
    exit: ExitInfo,
}

impl From<&Trajectory> for TrajectorySummary {
    fn from(t: &Trajectory) -> Self {
        Self { dplus: t.dplus, intended_kappa_plus: t.intended_kappa_plus, rows: t.rows.len(), exit: t.exit }
    }
}

#[derive(Serialize)]
struct BisectionSummary {
    config: SimConfig,
    dplus_star: f64,
    bracket: (f64, f64),
    sweep: Vec<(f64, i32)>,
    monotone: bool,
    legs: usize,
    critical: TrajectorySummary,
    perturbed: Vec<TrajectorySummary>,
    growth: Vec<GrowthFit>,
    envelopes: Envelopes,
}

#[derive(Serialize)]
struct SingleSummary {
    config: SimConfig,
    trajectory: TrajectorySummary,
}

pub fn simulate_config(args: &SimulateArgs) -> anyhow::Result<SimConfig> {
    let mut cfg = SimConfig::default();
    if let Some(path) = &args.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| Invalid(format!("cannot read {}: {e}", path.display())))?;
        cfg.merge_text(&text)?;
    }
    if let Some(v) = &args.b0 {
        cfg.set("b0", v)?;
    }
    if let Some(v) = &args.dplus {
        cfg.set("dplus", v)?;
    }
    for (k, v) in &args.overrides {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn trace_table(tr: &Trajectory) -> Table {
    let mut t = Table::new(&["t", "s", "lambda", "b", "b_s", "kappa_plus", "kappa_minus", "calE", "energy"]);
    for r in &tr.rows {
        t.push(&[r.t, r.s, r.lambda, r.b, r.b_s, r.kappa_plus, r.kappa_minus, r.cal_e, r.energy]);
    }
    t
}

pub fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let cfg = simulate_config(args)?;
    let ctx = SimContext::new(cfg)?;
    match cfg.dplus {
        DPlus::Value(d) => {
            let tr = run_trajectory(&ctx, d)?;
            trace_table(&tr).emit(Some(&args.out))?;
            emit_json(&SingleSummary { config: cfg, trajectory: (&tr).into() }, args.json.as_deref())
        }
        DPlus::Auto => {
            let bi = run_and_bisect(&ctx)?;
            trace_table(&bi.critical).emit(Some(&args.out))?;
            let s = BisectionSummary {
                config: cfg,
                dplus_star: bi.dplus_star,
                bracket: bi.bracket,
                sweep: bi.sweep.clone(),
                monotone: bi.monotone,
                legs: bi.legs,
                critical: (&bi.critical).into(),
                perturbed: bi.perturbed.iter().map(Into::into).collect(),
                growth: bi.growth.clone(),
                envelopes: bi.envelopes,
            };
            emit_json(&s, args.json.as_deref())
        }
    }
}

pub fn report(out: Option<&Path>, skip_simulation: bool) -> anyhow::Result<()> {
    let ledger = run_report(&ReportOptions { include_simulation: !skip_simulation, ..ReportOptions::default() })?;
    for e in &ledger.entries {
        println!(
            "{} {:>2} {} = {} (target {}, tolerance {}) [{}]",
            if e.pass { "PASS" } else { "FAIL" },
            e.criterion,
            e.check,
            crate::io::sci(e.value),
            e.target,
            e.tolerance,
            e.anchor
        );
    }
    println!("status: {} ({} passed, {} failed)", ledger.status, ledger.passed, ledger.failed);
    if let Some(p) = out {
        crate::io::write_atomic(p, &crate::io::json_bytes(&ledger)?)?;
    }
    Ok(())
}
