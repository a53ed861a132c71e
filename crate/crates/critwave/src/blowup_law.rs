//! Reduced dynamics: the functional `G(b)`, the ODE laws for `b(s)` and
//! `λ(s)`, and the linear unstable/stable mode system with its shooting
//! dichotomy.

use crate::error::{Error, Result};
use crate::groundstate::Q;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quad::{gauss_legendre, integrate_panels, log_edges, radial_edges};
use crate::numerics::{find_root, RootMethod};
use crate::profile::{lambda_p_tilde, Cutoff, Smoothstep};
use crate::scalar::Real;

/// Smallest `b` the integrators accept before stopping.
pub const B_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GValue {
    pub b: f64,
    pub g: f64,
    /// `b ‖ΛP̃‖²`.
    pub leading: f64,
    /// `∫_0^b b̃ (∂_b P̃, ΛP̃) db̃`.
    pub integral: f64,
    /// `g / (64 b |log b|)`.
    pub ratio: f64,
    /// `leading / (64 b log(B₀/4))`.
    pub leading_ratio: f64,
}

fn lambda_p_norm2<T: Real>(b: T, step: Smoothstep) -> T {
    let top = T::one() / b;
    let mut edges = radial_edges(top, 24);
    edges.push(top / T::lit(2.0));
    edges.sort_by(|a, c| a.partial_cmp(c).unwrap());
    integrate_panels(&|s: T| lambda_p_tilde(b, step, s).powi(2) * s * s * s, &edges)
}

/// `b̃ (∂_b P̃, ΛP̃) = (ρ(2b̃y) Q, ΛP̃)`, supported on `1/(2b̃) ≤ y ≤ 1/b̃`.
fn flux_density<T: Real>(b: T, step: Smoothstep) -> T {
    let chi = Cutoff::new(T::one() / (T::lit(2.0) * b), step);
    let (lo, hi) = (chi.scale, T::lit(2.0) * chi.scale);
    let edges = log_edges(lo, hi, 16);
    integrate_panels(&|s: T| chi.rho(s) * Q.eval(s)[0] * lambda_p_tilde(b, step, s) * s * s * s, &edges)
}

/// `G(b) = b‖ΛP̃‖² + ∫_0^b b̃ (∂_b P̃, ΛP̃) db̃` with `P̃ = χ_{B₀/4} Q`.
pub fn g_functional<T: Real>(b: T, step: Smoothstep) -> Result<GValue> {
    if !(b > T::zero() && b <= T::lit(0.1)) {
        return Err(Error::InvalidInput(format!("G needs b in (0, 0.1], got {b}")));
    }
    let leading = b * lambda_p_norm2(b, step);
    // The density tends to a constant as b̃ → 0, so the first segment is a rectangle.
    let start = b * T::lit(1e-8);
    let edges = log_edges(start, b, 48);
    let integral = start * flux_density(start, step)
        + edges.windows(2).map(|w| gauss_legendre(&|x: T| flux_density(x, step), w[0], w[1])).sum::<T>();
    let g = leading + integral;
    let bf = b.f64();
    let lb = bf.ln().abs();
    Ok(GValue {
        b: bf,
        g: g.f64(),
        leading: leading.f64(),
        integral: integral.f64(),
        ratio: g.f64() / (64.0 * bf * lb),
        leading_ratio: leading.f64() / (64.0 * bf * (0.5 / bf).ln()),
    })
}

/// Which reduced law drives `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ReducedMode {
    /// `𝓙_s = -𝓙² / (128 log² 𝓙)`, `b = 𝓙 / (64 |log 𝓙|)`.
    J,
    /// `b_s = -b² / (2 |log b|)`.
    B,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ReducedConfig {
    pub b0: f64,
    pub mode: ReducedMode,
    pub s_max: f64,
    /// Output stations, log-spaced in `1 + s`.
    pub stations: usize,
}

impl Default for ReducedConfig {
    fn default() -> Self {
        Self { b0: 0.01, mode: ReducedMode::B, s_max: 1e6, stations: 2000 }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BlowupTrajectory {
    pub mode: ReducedMode,
    pub s: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: Vec<f64>,
    pub t: Vec<f64>,
    /// `𝓙` in J-mode, `G`-proxy `64 b |log b|` in b-mode.
    pub j: Vec<f64>,
    /// Blow-up time `t(∞)`, from the λ increments plus the tail `λ_end / b_end`.
    pub t_star: f64,
    /// `T - t` at each station.
    pub remaining: Vec<f64>,
    /// `b s / (2 log s)` at the last station.
    pub b_law_ratio: f64,
    /// `-log λ / (log s)²` at the last station.
    pub lambda_law_ratio: f64,
    /// Least-squares slope of `log λ` against `log[(T-t) exp(-√|log(T-t)|)]` over the second half.
    pub speed_slope: f64,
    /// `max λ / (T - t)` along the run.
    pub lambda_over_remaining: f64,
    /// Relative error of `s` recomputed as `∫ dt/λ` over stations with `λ > 1e-9 t`.
    pub reparam_error: f64,
    /// True if the run stopped at the `b` floor.
    pub floor_reached: bool,
}

/// `𝓙 ∈ (0, 1)` with `𝓙 / (64 |log 𝓙|) = b`; the map is increasing there.
pub fn j_from_b(b: f64) -> Result<f64> {
    // Solve in x = log 𝓙 for relative accuracy.
    let g = |x: f64| x - (64.0 * x.abs()).ln() - b.ln();
    find_root(g, -700.0, -1e-9, 1e-14, RootMethod::Secant).map(f64::exp)
}

/// Integrate the reduced law together with `(log λ)_s = -b` and `t_s = λ`.
pub fn integrate_reduced_system(cfg: &ReducedConfig) -> Result<BlowupTrajectory> {
    if !(cfg.b0 > 1e-6 && cfg.b0 <= 0.05) {
        return Err(Error::InvalidInput(format!("b0 must lie in (1e-6, 0.05], got {}", cfg.b0)));
    }
    if !(cfg.s_max > 1.0) || cfg.stations < 16 {
        return Err(Error::InvalidInput("need s_max > 1 and at least 16 stations".into()));
    }
    let n = cfg.stations;
    let stations: Vec<f64> = (1..n).map(|i| ((1.0 + cfg.s_max).ln() * i as f64 / (n - 1) as f64).exp() - 1.0).collect();
    // Primary variable: b or 𝓙.
    let x0 = match cfg.mode {
        ReducedMode::B => cfg.b0,
        ReducedMode::J => j_from_b(cfg.b0)?,
    };
    let to_b = |x: f64| match cfg.mode {
        ReducedMode::B => x,
        ReducedMode::J => x / (64.0 * x.ln().abs()),
    };
    let rhs = |_s: f64, y: &[f64; 3]| {
        let x = y[0].max(B_FLOOR * 1e-3);
        let dx = match cfg.mode {
            ReducedMode::B => -x * x / (2.0 * x.ln().abs()),
            ReducedMode::J => -x * x / (128.0 * x.ln().powi(2)),
        };
        let b = to_b(x);
        [dx, -b, y[1].exp()]
    };
    let opts = OdeOptions { max_steps: 2_000_000, ..OdeOptions::with_tol(1e-11, 1e-300) };
    let out = integrate(rhs, 0.0, [x0, 0.0, 0.0], &stations, &opts)?;

    let mut s = vec![0.0];
    let mut b = vec![cfg.b0];
    let mut lambda = vec![1.0];
    let mut t = vec![0.0];
    let mut j = vec![match cfg.mode {
        ReducedMode::B => 64.0 * cfg.b0 * cfg.b0.ln().abs(),
        ReducedMode::J => x0,
    }];
    let mut floor_reached = false;
    for (k, y) in out.iter().enumerate() {
        let bk = to_b(y[0]);
        if bk < B_FLOOR {
            floor_reached = true;
            break;
        }
        if bk > *b.last().unwrap() {
            return Err(Error::NonMonotoneB { s: stations[k] });
        }
        s.push(stations[k]);
        b.push(bk);
        lambda.push(y[1].exp());
        t.push(y[2]);
        j.push(match cfg.mode {
            ReducedMode::B => 64.0 * bk * bk.ln().abs(),
            ReducedMode::J => y[0],
        });
    }
    let m = s.len() - 1;
    // Time increments from λ alone (log-linear between stations); the
    // integrated t loses them to rounding once λ ≪ eps · t.
    let dt: Vec<f64> = (1..=m)
        .map(|i| {
            let ld = (lambda[i - 1] / lambda[i]).ln();
            let ds = s[i] - s[i - 1];
            if ld.abs() < 1e-12 {
                lambda[i] * ds
            } else {
                (lambda[i - 1] - lambda[i]) * ds / ld
            }
        })
        .collect();
    let mut remaining = vec![0.0; m + 1];
    remaining[m] = lambda[m] / b[m];
    for i in (0..m).rev() {
        remaining[i] = remaining[i + 1] + dt[i];
    }
    let t_star = remaining[0];
    let ls = s[m].ln();
    let b_law_ratio = b[m] * s[m] / (2.0 * ls);
    let lambda_law_ratio = -lambda[m].ln() / (ls * ls);

    let lambda_over_remaining = (0..=m).map(|i| lambda[i] / remaining[i]).fold(0.0, f64::max);

    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in m / 2..=m {
        let rem = remaining[i];
        let x = rem.ln() - rem.ln().abs().sqrt();
        let yv = lambda[i].ln();
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        cnt += 1.0;
    }
    let speed_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);

    // s recomputed from the integrated t as ∫ dt/λ, while t increments are resolvable.
    let mut s_re = 0.0;
    let mut reparam_error: f64 = 0.0;
    for i in 1..=m {
        if lambda[i] < 1e-9 * t[i] {
            break;
        }
        let ld = (lambda[i - 1] / lambda[i]).ln();
        let d = t[i] - t[i - 1];
        s_re += if ld.abs() < 1e-12 { d / lambda[i] } else { d * ld / (lambda[i - 1] - lambda[i]) };
        if s[i] > 1.0 {
            reparam_error = reparam_error.max((s_re - s[i]).abs() / s[i]);
        }
    }

    Ok(BlowupTrajectory {
        mode: cfg.mode,
        s,
        b,
        lambda,
        t,
        j,
        t_star,
        remaining,
        b_law_ratio,
        lambda_law_ratio,
        speed_slope,
        lambda_over_remaining,
        reparam_error,
        floor_reached,
    })
}

/// Relative disagreement of `b(s)` between the two reduced laws.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ModeAgreement {
    pub max_rel: f64,
    /// `max_rel > 5%`.
    pub tension: bool,
}

pub fn compare_modes(a: &BlowupTrajectory, b: &BlowupTrajectory) -> ModeAgreement {
    let max_rel =
        a.s.iter()
            .zip(&a.b)
            .zip(b.s.iter().zip(&b.b))
            .map(|((_, x), (_, y))| (x - y).abs() / x.abs().max(y.abs()))
            .fold(0.0, f64::max);
    ModeAgreement { max_rel, tension: max_rel > 0.05 }
}

/// Unstable/stable mode amplitudes `κ± = ½(y₁ ± y₂/√ζ)` of `Y = (y₁, y₂)`,
/// where `y₁' = y₂`, `y₂' = ζ y₁ + forcing`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModeState {
    pub kappa_plus: f64,
    pub kappa_minus: f64,
}

impl ModeState {
    pub fn from_raw(y1: f64, y2: f64, zeta: f64) -> Self {
        let k = zeta.sqrt();
        Self { kappa_plus: 0.5 * (y1 + y2 / k), kappa_minus: 0.5 * (y1 - y2 / k) }
    }

    /// `Y = κ₊ V₊ + κ₋ V₋` with `V± = (1, ±√ζ)`.
    pub fn to_raw(self, zeta: f64) -> (f64, f64) {
        let k = zeta.sqrt();
        (self.kappa_plus + self.kappa_minus, k * (self.kappa_plus - self.kappa_minus))
    }
}

/// Eigenvectors `V± = (1, ±√ζ)` of `[[0, 1], [ζ, 0]]`.
pub fn mode_directions(zeta: f64) -> [[f64; 2]; 2] {
    let k = zeta.sqrt();
    [[1.0, k], [1.0, -k]]
}

/// Exact step of `κ₊' = √ζ κ₊ + E₊/(2√ζ)`, `κ₋' = -√ζ κ₋ - E₋/(2√ζ)` with
/// the forcing held constant over the step.
pub fn linear_mode_step(state: ModeState, zeta: f64, ds: f64, forcing: (f64, f64)) -> Result<ModeState> {
    if !(ds > 0.0) {
        return Err(Error::InvalidInput("mode step needs ds > 0".into()));
    }
    let k = zeta.sqrt();
    let grow = (k * ds).exp();
    let decay = (-k * ds).exp();
    Ok(ModeState {
        kappa_plus: state.kappa_plus * grow + forcing.0 / (2.0 * zeta) * (grow - 1.0),
        kappa_minus: state.kappa_minus * decay - forcing.1 / (2.0 * zeta) * (1.0 - decay),
    })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DichotomyConfig {
    pub zeta: f64,
    pub s_max: f64,
    pub ds: f64,
    /// Frequency of the sinusoidal forcing.
    pub omega: f64,
    /// Bisection stops when the bracket is below `tol · b0²`.
    pub tol: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self { zeta: 0.586_080_892_248_1, s_max: 40.0, ds: 1e-2, omega: 1.0, tol: 1e-12 }
    }
}

/// Outcome of one toy trajectory.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExitEvent {
    /// `+1` or `-1` by the sign of `κ₊` at exit; sign at the horizon if no exit.
    pub sign: i32,
    pub exited: bool,
    pub s: f64,
    /// `max |κ₋| |log b| / b²` before exit.
    pub kminus_envelope: f64,
}

/// Forcing `E±/(2√ζ) = √b b²/|log b| sin(ωs)`, the full allowed envelope.
fn forcing_scaled(b: f64, s: f64, omega: f64) -> f64 {
    b.sqrt() * b * b / b.ln().abs() * (omega * s).sin()
}

/// Run the coupled `(b, κ₊, κ₋)` toy from `κ₊(0) = a`, `κ₋(0) = 0`.
pub fn run_toy(b0: f64, a: f64, cfg: &DichotomyConfig) -> ExitEvent {
    let k = cfg.zeta.sqrt();
    let mut b = b0;
    let mut st = ModeState { kappa_plus: a, kappa_minus: 0.0 };
    let steps = (cfg.s_max / cfg.ds).round() as usize;
    let mut env: f64 = 0.0;
    for i in 0..steps {
        let s = i as f64 * cfg.ds;
        let mid = s + 0.5 * cfg.ds;
        // Midpoint b for the forcing, then advance b by RK2 on b_s = -b²/(2|log b|).
        let fb = |b: f64| -b * b / (2.0 * b.ln().abs());
        let bm = b + 0.5 * cfg.ds * fb(b);
        let e = 2.0 * k * forcing_scaled(bm, mid, cfg.omega);
        st = linear_mode_step(st, cfg.zeta, cfg.ds, (e, e)).expect("positive step");
        b += cfg.ds * fb(bm);
        let bound = 2.0 * b * b / b.ln().abs();
        env = env.max(st.kappa_minus.abs() * b.ln().abs() / (b * b));
        if st.kappa_plus.abs() >= bound {
            return ExitEvent {
                sign: st.kappa_plus.signum() as i32,
                exited: true,
                s: s + cfg.ds,
                kminus_envelope: env,
            };
        }
    }
    ExitEvent { sign: if st.kappa_plus >= 0.0 { 1 } else { -1 }, exited: false, s: cfg.s_max, kminus_envelope: env }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DichotomyResult {
    pub b0: f64,
    pub a_star: f64,
    pub bracket_width: f64,
    /// `a* |log b0| / b0²`.
    pub a_star_scaled: f64,
    pub critical: ExitEvent,
    /// Exits of `a* ± 10⁻⁶ b0²`, with the predicted exit time `log(bound/δ)/√ζ`.
    pub perturbed: Vec<(f64, ExitEvent, f64)>,
    pub bisection_steps: usize,
}

/// Bisect `κ₊(0)` over `[-b0²/|log b0|, b0²/|log b0|]` for the trajectory that does not exit.
pub fn dichotomy_demo(b0: f64, cfg: &DichotomyConfig) -> Result<DichotomyResult> {
    if !(b0 > 1e-6 && b0 <= 0.05) {
        return Err(Error::InvalidInput(format!("b0 must lie in (1e-6, 0.05], got {b0}")));
    }
    let lb = b0.ln().abs();
    let box_ = b0 * b0 / lb;
    let (mut lo, mut hi) = (-box_, box_);
    let (elo, ehi) = rayon::join(|| run_toy(b0, lo, cfg), || run_toy(b0, hi, cfg));
    if elo.sign == ehi.sign {
        return Err(Error::NoDichotomy { sign: elo.sign });
    }
    let lo_sign = elo.sign;
    let mut steps = 0;
    while hi - lo > cfg.tol * b0 * b0 {
        let mid = 0.5 * (lo + hi);
        if run_toy(b0, mid, cfg).sign == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
        if steps > 200 {
            return Err(Error::MaxIterations(steps));
        }
    }
    let a_star = 0.5 * (lo + hi);
    let critical = run_toy(b0, a_star, cfg);
    let delta = 1e-6 * b0 * b0;
    let predicted = (2.0 * box_ / delta).ln() / cfg.zeta.sqrt();
    let perturbed = [delta, -delta].iter().map(|&d| (d, run_toy(b0, a_star + d, cfg), predicted)).collect();
    Ok(DichotomyResult {
        b0,
        a_star,
        bracket_width: hi - lo,
        a_star_scaled: a_star / box_,
        critical,
        perturbed,
        bisection_steps: steps,
    })
}
