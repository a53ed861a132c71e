use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use super::solver::{WaveGrid, WaveState};
use crate::blowup_law::ModeState;
use crate::error::{Error, Result};
use crate::groundstate::PHI;
use crate::numerics::RadialFunction;
use crate::profile::{assemble_pb1, Cutoff, ProfileBundle, ProfileConfig, Smoothstep};

/// Profiles `P_{B₁(b)}` on a lattice in `log b`, built on demand and shared
/// between threads. Values at arbitrary `b` come from four-point Lagrange
/// interpolation in `log b`.
pub struct ProfileFamily {
    cfg: ProfileConfig,
    spacing: f64,
    cache: Mutex<BTreeMap<i64, Arc<ProfileBundle<f64>>>>,
}

impl ProfileFamily {
    pub fn new(cfg: ProfileConfig, spacing: f64) -> Self {
        Self { cfg, spacing, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn step(&self) -> Smoothstep {
        self.cfg.step
    }

    /// Number of lattice profiles built so far.
    pub fn cached(&self) -> usize {
        self.cache.lock().expect("profile cache poisoned").len()
    }

    fn bundle(&self, k: i64) -> Result<Arc<ProfileBundle<f64>>> {
        if let Some(b) = self.cache.lock().expect("profile cache poisoned").get(&k) {
            return Ok(b.clone());
        }
        let built = Arc::new(assemble_pb1((k as f64 * self.spacing).exp(), &self.cfg)?);
        let mut map = self.cache.lock().expect("profile cache poisoned");
        Ok(map.entry(k).or_insert(built).clone())
    }

    fn stencil(&self, b: f64) -> Result<[(Arc<ProfileBundle<f64>>, f64); 4]> {
        if !(b > 0.0 && b < 0.2) {
            return Err(Error::NewtonDiverged(format!("b = {b:e} left the profile range")));
        }
        let x = b.ln() / self.spacing;
        let k0 = x.floor() as i64;
        let ks = [k0 - 1, k0, k0 + 1, k0 + 2];
        let mut out = Vec::with_capacity(4);
        for &k in &ks {
            let w = ks.iter().filter(|&&j| j != k).map(|&j| (x - j as f64) / (k - j) as f64).product::<f64>();
            out.push((self.bundle(k)?, w));
        }
        out.try_into().map_err(|_| Error::InvalidInput("stencil".into()))
    }

    fn interpolate(&self, b: f64, ys: &[f64], f: impl Fn(&ProfileBundle<f64>, f64) -> f64) -> Result<Vec<f64>> {
        let st = self.stencil(b)?;
        Ok(ys.iter().map(|&y| st.iter().map(|(p, w)| w * f(p, y)).sum()).collect())
    }

    /// `P_{B₁(b)}` at each `y`.
    pub fn p(&self, b: f64, ys: &[f64]) -> Result<Vec<f64>> {
        self.interpolate(b, ys, |p, y| p.p_at(y))
    }

    /// `ΛP_{B₁(b)}` at each `y`.
    pub fn lambda_p(&self, b: f64, ys: &[f64]) -> Result<Vec<f64>> {
        self.interpolate(b, ys, |p, y| p.lambda_p_at(y))
    }

    /// `∂_b P_{B₁(b)}` at each `y`.
    pub fn dbp(&self, b: f64, ys: &[f64]) -> Result<Vec<f64>> {
        self.interpolate(b, ys, |p, y| p.dbp_at(y))
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ModulationConfig {
    /// Localization radius of `χ_M Φ`.
    pub m: f64,
    /// Newton stops at `|(ε, χ_MΦ)| ≤ tol · (|v|, |χ_MΦ|)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self { m: 20.0, tol: 1e-13, max_iter: 60 }
    }
}

/// Result of one extraction, with all inner products in the rescaled variable `y = r/λ`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Modulation {
    pub lambda: f64,
    pub b: f64,
    pub iterations: usize,
    /// `|(ε, χ_MΦ)| / (‖ε‖ ‖χ_MΦ‖)`.
    pub constraint_rel: f64,
    pub eps_norm: f64,
    /// `(ε, ψ)`.
    pub eps_psi: f64,
    /// `(∂_s v, ψ)` with `v = u_{1/λ}`, i.e. `∂_s ε` without the `b_s ∂_b P` term.
    pub vs_psi: f64,
    /// `(∂_b P, ψ)`.
    pub dbp_psi: f64,
}

/// `χ_M Φ` and `(Λ + 2)(χ_M Φ) = 3g + y g'`.
fn direction(m: f64, step: Smoothstep, y: f64) -> (f64, f64) {
    let c = Cutoff::new(m, step).eval(y);
    let p = PHI.eval(y);
    let g = c[0] * p[0];
    (g, 3.0 * g + y * (c[1] * p[0] + c[0] * p[1]))
}

/// Everything the extraction samples at `y_i = r_i / λ`.
struct Sampled {
    ys: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

fn sample(state: &WaveState<f64>, lambda: f64, upto: usize) -> Sampled {
    let r = &state.grid.r[..upto];
    Sampled {
        ys: r.iter().map(|&x| x / lambda).collect(),
        v: state.u[..upto].iter().map(|&x| lambda * x).collect(),
        w: state.ut[..upto].iter().map(|&x| lambda * lambda * x).collect(),
    }
}

/// Index one past the last node with `r ≤ radius`.
fn nodes_within(grid: &WaveGrid<f64>, radius: f64) -> usize {
    ((radius / grid.h).floor() as usize + 2).min(grid.len())
}

/// `b` from the quotient `(λ² u_t(λ·), χ_MΦ) / (Λ u_{1/λ}, χ_MΦ)`, the
/// denominator taken by parts as `-(v, (Λ+2) χ_MΦ)`.
fn b_quotient(grid: &WaveGrid<f64>, s: &Sampled, g: &[f64], g2: &[f64]) -> f64 {
    -grid.inner(&s.w, g) / grid.inner(&s.v, g2)
}

/// Solve `(u_{1/λ} - P_{B₁(b)}, χ_MΦ) = 0` jointly with the `b` quotient by
/// safeguarded secant-Newton in `λ`, warm-started at `guess`.
pub fn extract_modulation(
    state: &WaveState<f64>,
    family: &ProfileFamily,
    psi: &RadialFunction<f64>,
    cfg: &ModulationConfig,
    guess: f64,
) -> Result<(Modulation, Vec<f64>)> {
    let grid = &state.grid;
    let step = family.step();
    let residual = |lambda: f64| -> Result<(f64, f64, f64)> {
        let upto = nodes_within(grid, 2.0 * cfg.m * lambda);
        let s = sample(state, lambda, upto);
        let (g, g2): (Vec<f64>, Vec<f64>) = s.ys.iter().map(|&y| direction(cfg.m, step, y)).unzip();
        let b = b_quotient(grid, &s, &g, &g2);
        let p = family.p(b, &s.ys)?;
        let e: Vec<f64> = s.v.iter().zip(&p).map(|(v, p)| v - p).collect();
        let av: Vec<f64> = s.v.iter().map(|x| x.abs()).collect();
        let ag: Vec<f64> = g.iter().map(|x| x.abs()).collect();
        let scale = grid.inner(&av, &ag);
        Ok((grid.inner(&e, &g), b, scale))
    };
    if !(guess > 0.0 && guess.is_finite()) {
        return Err(Error::NewtonDiverged(format!("invalid starting scale {guess:e}")));
    }
    let mut lambda = guess;
    let mut iterations = 0;
    let b = loop {
        let (f, b, scale) = residual(lambda)?;
        if f.abs() <= cfg.tol * scale {
            break b;
        }
        if iterations >= cfg.max_iter {
            return Err(Error::NewtonDiverged(format!("no convergence after {iterations} iterations")));
        }
        let dl = 1e-6 * lambda;
        let (f2, _, _) = residual(lambda + dl)?;
        let slope = (f2 - f) / dl;
        if !(slope.is_finite() && slope != 0.0) {
            return Err(Error::NewtonDiverged("flat constraint".into()));
        }
        let step_l = (-f / slope).clamp(-0.2 * lambda, 0.2 * lambda);
        lambda += step_l;
        iterations += 1;
        if !(lambda > guess / 4.0 && lambda < guess * 4.0) {
            return Err(Error::NewtonDiverged(format!("scale ran to {lambda:e} from {guess:e}")));
        }
        if step_l.abs() <= 1e-15 * lambda {
            let (f, b, scale) = residual(lambda)?;
            if f.abs() <= 1e3 * cfg.tol * scale {
                break b;
            }
        }
    };

    // Full-grid ε and the projections.
    let n = grid.len();
    let s = sample(state, lambda, n);
    let p = family.p(b, &s.ys)?;
    let eps: Vec<f64> = s.v.iter().zip(&p).map(|(v, p)| v - p).collect();
    let (g, _): (Vec<f64>, Vec<f64>) = s.ys.iter().map(|&y| direction(cfg.m, step, y)).unzip();
    let l4 = lambda.powi(4);
    let eps_norm = (grid.inner(&eps, &eps) / l4).sqrt();
    let g_norm = (grid.inner(&g, &g) / l4).sqrt();
    let con = grid.inner(&eps, &g) / l4;
    let constraint_rel = if eps_norm > 0.0 { con.abs() / (eps_norm * g_norm) } else { 0.0 };

    let trust = psi.nodes()[psi.nodes().len() - 1];
    let upto = nodes_within(grid, trust * lambda);
    let (pv, pl): (Vec<f64>, Vec<f64>) = s.ys[..upto]
        .iter()
        .map(|&y| {
            if y > trust {
                return (0.0, 0.0);
            }
            let (f, d) = psi.eval_both(y);
            (f, 3.0 * f + y * d)
        })
        .unzip();
    let dbp = family.dbp(b, &s.ys[..upto])?;
    let eps_psi = grid.inner(&eps[..upto], &pv) / l4;
    let vs_psi = (grid.inner(&s.w[..upto], &pv) + b * grid.inner(&s.v[..upto], &pl)) / l4;
    let dbp_psi = grid.inner(&dbp, &pv) / l4;
    Ok((Modulation { lambda, b, iterations, constraint_rel, eps_norm, eps_psi, vs_psi, dbp_psi }, eps))
}

/// `ã± = ½[(ε, ψ) ± (∂_s ε, ψ)/√ζ]`.
pub fn project_modes(eps_psi: f64, eps_s_psi: f64, zeta: f64) -> ModeState {
    ModeState::from_raw(eps_psi, eps_s_psi, zeta)
}

/// Mode amplitudes from an extraction. `ã±` uses `∂_s ε = ∂_s v - b_s ∂_b P`;
/// with `correct` set, `κ± = ã± ± b_s (∂_b P, ψ)/(2√ζ)`, otherwise `ã±`.
pub fn modes_from(m: &Modulation, b_s: f64, zeta: f64, correct: bool) -> ModeState {
    let raw = project_modes(m.eps_psi, m.vs_psi - b_s * m.dbp_psi, zeta);
    if !correct {
        return raw;
    }
    let shift = b_s * m.dbp_psi / (2.0 * zeta.sqrt());
    ModeState { kappa_plus: raw.kappa_plus + shift, kappa_minus: raw.kappa_minus - shift }
}

/// `ℰ = ‖Δε‖² + ‖∂_y ∂_s ε‖²` in `y`, using the solver's Laplacian.
pub fn cal_e(state: &WaveState<f64>, eps: &[f64], m: &Modulation, b_s: f64, family: &ProfileFamily) -> Result<f64> {
    let grid = &state.grid;
    let n = grid.len();
    let (lambda, b) = (m.lambda, m.b);
    let mut lap = vec![0.0; n];
    grid.laplacian(eps, &mut lap);
    let h = grid.h;
    let ur: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 0.0,
            i if i == n - 1 => (state.u[i] - state.u[i - 1]) / h,
            i => (state.u[i + 1] - state.u[i - 1]) / (2.0 * h),
        })
        .collect();
    let ys: Vec<f64> = grid.r.iter().map(|&r| r / lambda).collect();
    let dbp = family.dbp(b, &ys)?;
    let es: Vec<f64> = (0..n)
        .map(|i| {
            let lv = lambda * (state.u[i] + grid.r[i] * ur[i]);
            lambda * lambda * state.ut[i] - b * lv - b_s * dbp[i]
        })
        .collect();
    let des: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 0.0,
            i if i == n - 1 => lambda * (es[i] - es[i - 1]) / h,
            i => lambda * (es[i + 1] - es[i - 1]) / (2.0 * h),
        })
        .collect();
    // Δ_y ε = λ² Δ_r ε and dy y³ = λ⁻⁴ dr r³.
    Ok(grid.inner(&lap, &lap) + grid.inner(&des, &des) / lambda.powi(4))
}
