use std::sync::Arc;

use rayon::prelude::*;

use super::config::SimConfig;
use super::modulation::{cal_e, extract_modulation, modes_from, Modulation, ModulationConfig, ProfileFamily};
use super::solver::{WaveGrid, WaveState};
use crate::error::{Error, Result};
use crate::numerics::RadialFunction;
use crate::profile::{b1, ProfileConfig};
use crate::spectral::{solve_eigenpair, Normalization, ShootingConfig};

/// Gaussian bump `a exp(-((r - c)/w)²)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn eval(&self, r: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * (-((r - self.center) / self.width).powi(2)).exp()
    }
}

/// `(η₀, η₁)` added to position and velocity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Perturbation {
    pub eta0: Bump,
    pub eta1: Bump,
}

impl Perturbation {
    pub fn from_config(cfg: &SimConfig) -> Self {
        let bump = |a| Bump { amplitude: a, center: cfg.eta_center, width: cfg.eta_width };
        Self { eta0: bump(cfg.eta0_amplitude), eta1: bump(cfg.eta1_amplitude) }
    }
}

/// Shared, read-only inputs of every trajectory: the unstable eigenpair and
/// the profile family.
pub struct SimContext {
    pub cfg: SimConfig,
    pub zeta: f64,
    pub psi: RadialFunction<f64>,
    /// `(ψ, ψ)` with `ψ(0) = 1`.
    pub psi_norm2: f64,
    pub family: Arc<ProfileFamily>,
    pub modulation: ModulationConfig,
}

impl SimContext {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let pair = solve_eigenpair::<f64>(&ShootingConfig::default())?.normalized(Normalization::Origin);
        let pcfg = ProfileConfig { m: cfg.m, nodes: cfg.profile_nodes, ..ProfileConfig::default() };
        Ok(Self {
            cfg,
            zeta: pair.zeta,
            psi_norm2: pair.l2_norm * pair.l2_norm,
            psi: pair.psi,
            family: Arc::new(ProfileFamily::new(pcfg, cfg.lattice_spacing)),
            modulation: ModulationConfig { m: cfg.m, ..ModulationConfig::default() },
        })
    }

    /// Horizon in `s`.
    pub fn s_horizon(&self) -> f64 {
        self.cfg.horizon_efolds / self.zeta.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub state: WaveState<f64>,
    pub dplus: f64,
    /// `½ d₊ (ψ, ψ)`: the `κ₊(0)` the data are built to carry.
    pub intended_kappa_plus: f64,
}

/// `u₀ = P_{B₁(b0)} + d₊ψ + η₀`, `u₁ = b0 ΛP_{B₁(b0)} + η₁` on the physical grid.
pub fn init_data(ctx: &SimContext, b0: f64, dplus: f64, eta: &Perturbation) -> Result<InitialData> {
    let cfg = &ctx.cfg;
    if !(1e-3..=5e-2).contains(&b0) {
        return Err(Error::InvalidInput(format!("b0 must lie in [1e-3, 5e-2], got {b0}")));
    }
    let small = b0 * b0 / b0.ln().abs();
    if eta.eta0.amplitude.abs() > small || eta.eta1.amplitude.abs() > small {
        return Err(Error::InvalidInput(format!("perturbation amplitude exceeds b0²/|log b0| = {small:e}")));
    }
    let big = b1(b0);
    let r_max = cfg.r_max_factor * big;
    let needed = 2.0 * big + ctx.s_horizon();
    if r_max < needed {
        return Err(Error::GridTooShort { r_max, needed });
    }
    let grid = WaveGrid::with_stencil(r_max, cfg.nodes, cfg.stencil)?;
    let r = grid.r.clone();
    let p = ctx.family.p(b0, &r)?;
    let lp = ctx.family.lambda_p(b0, &r)?;
    let trust = ctx.psi.nodes()[ctx.psi.nodes().len() - 1];
    let u: Vec<f64> = r
        .iter()
        .zip(&p)
        .map(|(&x, &p)| p + if x <= trust { dplus * ctx.psi.eval(x) } else { 0.0 } + eta.eta0.eval(x))
        .collect();
    let ut: Vec<f64> = r.iter().zip(&lp).map(|(&x, &l)| b0 * l + eta.eta1.eval(x)).collect();
    let state = WaveState::new(grid, u, ut, cfg.cfl, cfg.integrator)?;
    Ok(InitialData { state, dplus, intended_kappa_plus: 0.5 * dplus * ctx.psi_norm2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExitReason {
    /// `|κ₊| ≥ 2b²/|log b|`.
    UnstableMode,
    /// `b` left `(0, 5 b0)`.
    Trap,
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExitInfo {
    pub sign: i32,
    pub reason: ExitReason,
    pub s: f64,
    pub t: f64,
}

impl ExitInfo {
    pub fn exited(&self) -> bool {
        self.reason != ExitReason::Horizon
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub s: f64,
    pub lambda: f64,
    pub b: f64,
    pub b_s: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub cal_e: f64,
    pub energy: f64,
    /// `-λ_t` by centered differences, to compare with `b`.
    pub b_from_lambda: f64,
    pub constraint_rel: f64,
    pub newton_iterations: usize,
    #[serde(skip)]
    pub modulation: Modulation,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ModulationTrace {
    pub dplus: f64,
    pub intended_kappa_plus: f64,
    pub rows: Vec<TraceRow>,
    pub exit: ExitInfo,
}

pub type Trajectory = ModulationTrace;

/// Reduced-law `b_s` used before a difference is available.
fn b_s_law(b: f64) -> f64 {
    -b * b / (2.0 * b.ln().abs())
}

/// Evolve one datum until `κ₊` exits, `b` leaves the trap, or the horizon.
pub fn run_trajectory(ctx: &SimContext, dplus: f64) -> Result<Trajectory> {
    let cfg = &ctx.cfg;
    let init = init_data(ctx, cfg.b0, dplus, &Perturbation::from_config(cfg))?;
    let mut st = init.state;
    let dt = st.dt_max();
    let horizon = ctx.s_horizon();
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut lambda_guess = 1.0;
    let exit = loop {
        let (m, eps) = extract_modulation(&st, &ctx.family, &ctx.psi, &ctx.modulation, lambda_guess)?;
        lambda_guess = m.lambda;
        let s = match rows.last() {
            None => 0.0,
            Some(p) => p.s + (st.t - p.t) * 0.5 * (1.0 / p.lambda + 1.0 / m.lambda),
        };
        let b_s = match rows.last() {
            None => b_s_law(m.b),
            Some(p) => (m.b - p.b) / (s - p.s),
        };
        let modes = modes_from(&m, b_s, ctx.zeta, cfg.kappa_correction);
        let ce = cal_e(&st, &eps, &m, b_s, &ctx.family)?;
        rows.push(TraceRow {
            t: st.t,
            s,
            lambda: m.lambda,
            b: m.b,
            b_s,
            kappa_plus: modes.kappa_plus,
            kappa_minus: modes.kappa_minus,
            cal_e: ce,
            energy: st.energy().total,
            b_from_lambda: f64::NAN,
            constraint_rel: m.constraint_rel,
            newton_iterations: m.iterations,
            modulation: m,
        });
        let sign = if modes.kappa_plus >= 0.0 { 1 } else { -1 };
        let bound = 2.0 * m.b * m.b / m.b.ln().abs();
        let info = |reason| ExitInfo { sign, reason, s, t: st.t };
        if !(m.b > 0.0 && m.b < 5.0 * cfg.b0) {
            break info(ExitReason::Trap);
        }
        if modes.kappa_plus.abs() >= bound {
            break info(ExitReason::UnstableMode);
        }
        if s >= horizon {
            break info(ExitReason::Horizon);
        }
        for _ in 0..cfg.cadence {
            st.advance(dt)?;
        }
    };
    finish_trace(&mut rows, ctx.zeta, cfg.kappa_correction);
    Ok(ModulationTrace { dplus, intended_kappa_plus: init.intended_kappa_plus, rows, exit })
}

/// Centered `b_s` and `-λ_t`, and `κ±` recomputed with the centered `b_s`.
fn finish_trace(rows: &mut [TraceRow], zeta: f64, correct: bool) {
    let n = rows.len();
    if n < 2 {
        return;
    }
    let (bs, bl): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let (a, c) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let (ra, rc) = (&rows[a], &rows[c]);
            ((rc.b - ra.b) / (rc.s - ra.s), -(rc.lambda - ra.lambda) / (rc.t - ra.t))
        })
        .unzip();
    for (i, row) in rows.iter_mut().enumerate() {
        row.b_s = bs[i];
        row.b_from_lambda = bl[i];
        let modes = modes_from(&row.modulation, bs[i], zeta, correct);
        row.kappa_plus = modes.kappa_plus;
        row.kappa_minus = modes.kappa_minus;
    }
}

/// Least-squares growth rate of `log|κ₊|` in `s`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GrowthFit {
    pub delta: f64,
    /// Slope of `log|κ₊^δ - κ₊^*|` against `s`, where the deviation has
    /// grown tenfold and up to the exit.
    pub slope_deviation: f64,
    /// Slope of `log|κ₊^δ|` over the last stretch where `|κ₊|` exceeds a
    /// twentieth of the exit bound.
    pub slope_raw: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub points: usize,
    pub exit_sign: i32,
    pub exit_s: f64,
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    num / den
}

/// Growth of the deviation of `pert` from `crit`, compared with `√ζ`.
pub fn growth_rate(pert: &Trajectory, crit: &Trajectory, zeta: f64) -> GrowthFit {
    let n = pert.rows.len().min(crit.rows.len());
    let dev: Vec<(f64, f64)> =
        (0..n).map(|j| (pert.rows[j].s, pert.rows[j].kappa_plus - crit.rows[j].kappa_plus)).collect();
    let d0 = dev.first().map(|d| d.1.abs()).unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = dev
        .iter()
        .skip_while(|d| d.1.abs() < 10.0 * d0)
        .filter(|d| d.1 != 0.0)
        .map(|d| (d.0, d.1.abs().ln()))
        .collect();
    let raw: Vec<(f64, f64)> = pert
        .rows
        .iter()
        .filter(|r| r.kappa_plus.abs() >= 0.1 * r.b * r.b / r.b.ln().abs())
        .map(|r| (r.s, r.kappa_plus.abs().ln()))
        .collect();
    let expected = zeta.sqrt();
    let slope_deviation = if pts.len() >= 3 { fit_slope(&pts) } else { f64::NAN };
    let slope_raw = if raw.len() >= 3 { fit_slope(&raw) } else { f64::NAN };
    GrowthFit {
        delta: pert.dplus - crit.dplus,
        slope_deviation,
        slope_raw,
        expected,
        rel_error: (slope_deviation / expected - 1.0).abs(),
        points: pts.len(),
        exit_sign: pert.exit.sign,
        exit_s: pert.exit.s,
    }
}

/// Fitted trapped-regime constants along the critical trajectory.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Envelopes {
    /// `max ℰ |log b|² / b⁴` over the run and over its first half.
    pub k_cal_e: f64,
    pub k_cal_e_first_half: f64,
    /// `max |κ₋| |log b| / b²`.
    pub k_minus: f64,
    /// `max |κ₊| |log b| / b²` (the exit threshold is 2).
    pub k_plus: f64,
    pub b_max_over_b0: f64,
    pub b_min_over_b0: f64,
    pub b_decreasing: bool,
    pub lambda_decreasing: bool,
    pub max_constraint_rel: f64,
    /// `max |b + λ_t| / b` over interior rows.
    pub b_lambda_mismatch: f64,
    pub energy_drift_rel: f64,
}

pub fn envelopes(tr: &Trajectory, b0: f64) -> Envelopes {
    let rows = &tr.rows;
    let lg = |b: f64| b.ln().abs();
    let ratio = |f: &dyn Fn(&TraceRow) -> f64, upto: usize| rows[..upto].iter().map(f).fold(0.0, f64::max);
    let n = rows.len();
    let ke = |r: &TraceRow| r.cal_e * lg(r.b).powi(2) / r.b.powi(4);
    let first = rows.first().expect("non-empty trace");
    let last = rows.last().expect("non-empty trace");
    let mismatch = if n > 2 {
        rows[1..n - 1].iter().map(|r| (r.b - r.b_from_lambda).abs() / r.b).fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    Envelopes {
        k_cal_e: ratio(&ke, n),
        k_cal_e_first_half: ratio(&ke, n.div_ceil(2)),
        k_minus: ratio(&|r: &TraceRow| r.kappa_minus.abs() * lg(r.b) / (r.b * r.b), n),
        k_plus: ratio(&|r: &TraceRow| r.kappa_plus.abs() * lg(r.b) / (r.b * r.b), n),
        b_max_over_b0: rows.iter().map(|r| r.b).fold(0.0, f64::max) / b0,
        b_min_over_b0: rows.iter().map(|r| r.b).fold(f64::INFINITY, f64::min) / b0,
        b_decreasing: last.b < first.b,
        lambda_decreasing: last.lambda < first.lambda,
        max_constraint_rel: rows.iter().map(|r| r.constraint_rel).fold(0.0, f64::max),
        b_lambda_mismatch: mismatch,
        energy_drift_rel: (last.energy - first.energy).abs() / first.energy.abs(),
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Bisection {
    pub dplus_star: f64,
    pub bracket: (f64, f64),
    /// Coarse sweep `(d₊, exit sign)` run before bisecting.
    pub sweep: Vec<(f64, i32)>,
    /// Exactly one sign change in the sweep.
    pub monotone: bool,
    pub legs: usize,
    pub lo: Trajectory,
    pub hi: Trajectory,
    pub critical: Trajectory,
    pub perturbed: Vec<Trajectory>,
    pub growth: Vec<GrowthFit>,
    pub envelopes: Envelopes,
}

fn sign_changes(s: &[(f64, i32)]) -> usize {
    s.windows(2).filter(|w| w[0].1 != w[1].1).count()
}

/// Sweep, then bisect `d₊` on the exit sign of `κ₊`.
pub fn run_and_bisect(ctx: &SimContext) -> Result<Bisection> {
    let cfg = &ctx.cfg;
    let b2 = cfg.b0 * cfg.b0;
    let n = cfg.sweep_points;
    let mut scale = cfg.sweep_scale;
    let mut sweep: Vec<(f64, i32)> = Vec::new();
    for _ in 0..4 {
        let ds: Vec<f64> = (0..n).map(|i| scale * b2 * (-1.0 + 2.0 * i as f64 / (n - 1) as f64)).collect();
        let exits: Vec<Result<Trajectory>> = ds.par_iter().map(|&d| run_trajectory(ctx, d)).collect();
        sweep = Vec::with_capacity(n);
        for (d, e) in ds.iter().zip(exits) {
            sweep.push((*d, e?.exit.sign));
        }
        if sign_changes(&sweep) > 0 {
            break;
        }
        scale *= 4.0;
    }
    if sign_changes(&sweep) == 0 {
        return Err(Error::NoDichotomy { sign: sweep[0].1 });
    }
    let monotone = sign_changes(&sweep) == 1;
    let i = sweep.windows(2).position(|w| w[0].1 != w[1].1).expect("sign change");
    let (mut lo, mut hi) = (sweep[i].0, sweep[i + 1].0);
    let lo_sign = sweep[i].1;
    let mut lo_tr = run_trajectory(ctx, lo)?;
    let mut hi_tr = run_trajectory(ctx, hi)?;
    let mut legs = 0;
    while hi - lo > cfg.bisect_tol * b2 {
        let mid = 0.5 * (lo + hi);
        let tr = run_trajectory(ctx, mid)?;
        if tr.exit.sign == lo_sign {
            lo = mid;
            lo_tr = tr;
        } else {
            hi = mid;
            hi_tr = tr;
        }
        legs += 1;
        if legs > 200 {
            return Err(Error::MaxIterations(legs));
        }
    }
    let star = 0.5 * (lo + hi);
    let delta = cfg.perturbation;
    let (critical, perturbed) = rayon::join(
        || run_trajectory(ctx, star),
        || [star + delta, star - delta].par_iter().map(|&d| run_trajectory(ctx, d)).collect::<Result<Vec<_>>>(),
    );
    let critical = critical?;
    let perturbed = perturbed?;
    let growth = perturbed.iter().map(|p| growth_rate(p, &critical, ctx.zeta)).collect();
    let envelopes = envelopes(&critical, cfg.b0);
    Ok(Bisection {
        dplus_star: star,
        bracket: (lo, hi),
        sweep,
        monotone,
        legs,
        lo: lo_tr,
        hi: hi_tr,
        critical,
        perturbed,
        growth,
        envelopes,
    })
}
