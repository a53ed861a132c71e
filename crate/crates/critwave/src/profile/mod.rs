//! The deformed ground state `P = Q + χ_{B₁} b² T₁`, its self-similar
//! residual `Ψ`, the derivative `∂_b P`, and the outgoing flux.
//!
//! Scales: `B₀ = 2/b`, `B₁ = |log b|/b`. `T₁` solves
//! `H T₁ = -Φ + c_b χ_{B₀/4} ΛQ` with `(T₁, χ_M Φ) = 0`.

mod cutoff;
mod green;

pub use cutoff::{Cutoff, Smoothstep};
pub use green::{solve_h, GreenSolution};

use crate::error::{Error, Result};
use crate::groundstate::{compute_gamma, pohozaev_constant, GammaFunction, LAMBDA_Q, LAUNCH_Y0, PHI, Q};
use crate::numerics::quad::{gauss_legendre, integrate_panels, radial_edges};
use crate::numerics::{RadialFunction, RadialGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ProfileConfig {
    /// Localization radius of the orthogonality direction `χ_M Φ`.
    pub m: f64,
    pub nodes: usize,
    /// Table end as a multiple of `B₁`; must be at least 4.
    pub r_max_factor: f64,
    pub step: Smoothstep,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { m: 20.0, nodes: 6000, r_max_factor: 4.0, step: Smoothstep::Septic }
    }
}

/// `B₀ = 2/b`.
pub fn b0<T: Real>(b: T) -> T {
    T::lit(2.0) / b
}

/// `B₁ = |log b| / b`.
pub fn b1<T: Real>(b: T) -> T {
    b.ln().abs() / b
}

fn check_b<T: Real>(b: T) -> Result<()> {
    if !(b > T::zero() && b <= T::lit(0.2)) {
        return Err(Error::InvalidInput(format!("b must lie in (0, 0.2], got {b}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CbValue {
    pub b: f64,
    pub cb: f64,
    /// `(Φ, ΛQ)`.
    pub numerator: f64,
    /// `(χ_{B₀/4} ΛQ, ΛQ)`.
    pub denominator: f64,
    /// `c_b · 2|log b|`.
    pub normalized: f64,
    /// `denominator - 64 log(B₀/4)`.
    pub log_constant: f64,
}

fn cutoff_edges<T: Real>(b: T, extra: &[T]) -> Vec<T> {
    let r = T::one() / b;
    let mut e = radial_edges(r, 24);
    e.extend_from_slice(extra);
    e.sort_by(|a, c| a.partial_cmp(c).unwrap());
    e.dedup();
    e.retain(|&x| x <= r);
    e
}

/// `c_b = (Φ, ΛQ) / (χ_{B₀/4} ΛQ, ΛQ)`.
pub fn compute_cb<T: Real>(b: T, step: Smoothstep) -> Result<CbValue> {
    check_b(b)?;
    let chi = Cutoff::new(b0(b) / T::lit(4.0), step);
    let edges = cutoff_edges(b, &[chi.scale]);
    let den = integrate_panels(&|s: T| chi.value(s) * LAMBDA_Q.eval(s)[0].powi(2) * s * s * s, &edges);
    let num = pohozaev_constant::<T>().value;
    let cb = num / den.f64();
    let bf = b.f64();
    Ok(CbValue {
        b: bf,
        cb,
        numerator: num,
        denominator: den.f64(),
        normalized: cb * 2.0 * bf.ln().abs(),
        log_constant: den.f64() - 64.0 * (b0(bf) / 4.0).ln(),
    })
}

/// `∂_b c_b = -c_b ∂_b D / D` with `∂_b χ_{B₀/4}(y) = ρ(2by)/b`.
fn cb_derivative<T: Real>(b: T, cb: T, den: T, step: Smoothstep) -> T {
    let chi = Cutoff::new(b0(b) / T::lit(4.0), step);
    let edges = cutoff_edges(b, &[chi.scale]);
    let dd = integrate_panels(&|s: T| chi.rho(s) / b * LAMBDA_Q.eval(s)[0].powi(2) * s * s * s, &edges);
    -cb * dd / den
}

/// Profile grid: geometric from the launch radius to `r_max_factor · B₁`,
/// with the cutoff seams inserted as nodes.
pub fn profile_grid<T: Real>(b: T, cfg: &ProfileConfig) -> Result<RadialGrid<T>> {
    let big = b1(b);
    let r_max = T::lit(cfg.r_max_factor) * big;
    let needed = T::lit(4.0) * big;
    if r_max < needed * (T::one() - T::lit(1e-12)) {
        return Err(Error::GridTooShort { r_max: r_max.f64(), needed: needed.f64() });
    }
    let base = RadialGrid::geometric(T::lit(LAUNCH_Y0), r_max, cfg.nodes)?;
    let m = T::lit(cfg.m);
    let q = b0(b) / T::lit(4.0);
    let mut nodes = base.nodes().to_vec();
    for s in [T::one(), m, T::lit(2.0) * m, q, T::lit(2.0) * q, big / T::lit(2.0), big, T::lit(2.0) * big] {
        if s > nodes[0] && s < r_max {
            nodes.push(s);
        }
    }
    nodes.sort_by(|a, c| a.partial_cmp(c).unwrap());
    // Drop near-duplicates created by the inserted seams.
    let mut out: Vec<T> = Vec::with_capacity(nodes.len());
    for s in nodes {
        match out.last() {
            Some(&p) if s - p <= p * T::lit(1e-6) => {
                *out.last_mut().unwrap() = s.max(p);
            }
            _ => out.push(s),
        }
    }
    RadialGrid::from_nodes(out)
}

/// `T₁` with its shift `c` and derivatives.
#[derive(Debug, Clone)]
pub struct T1Solution<T> {
    pub b: T,
    pub cb: T,
    /// Shift `c` in `T₁ = T̃₁ - cΛQ`.
    pub shift: T,
    pub t1: RadialFunction<T>,
    pub t1_second: Vec<T>,
    /// `(T₁, χ_M Φ)` relative to `‖T₁ χ_M Φ‖`-scale, after the shift.
    pub projection_rel: f64,
    /// `(F, ΛQ)`, zero up to quadrature error.
    pub source_total: f64,
}

fn orthogonalize<T: Real>(
    sol: &GreenSolution<T>,
    m: T,
    step: Smoothstep,
) -> Result<(RadialFunction<T>, Vec<T>, T, f64)> {
    let chi_m = Cutoff::new(m, step);
    let w = &sol.w;
    let y = w.nodes();
    let top = T::lit(2.0) * m;
    let mut num = T::zero();
    let mut num_abs = T::zero();
    let mut den = T::zero();
    for i in 0..y.len() - 1 {
        if y[i] >= top {
            break;
        }
        let (a, c) = (y[i], y[i + 1].min(top));
        let weight = |s: T| chi_m.value(s) * PHI.eval(s)[0] * s * s * s;
        num += gauss_legendre(&|s| w.eval(s) * weight(s), a, c);
        num_abs += gauss_legendre(&|s| (w.eval(s) * weight(s)).abs(), a, c);
        den += gauss_legendre(&|s| LAMBDA_Q.eval(s)[0] * weight(s), a, c);
    }
    let shift = num / den;
    let values: Vec<T> = y.iter().zip(w.values()).map(|(&s, &u)| u - shift * LAMBDA_Q.eval(s)[0]).collect();
    let derivs: Vec<T> = y.iter().zip(w.derivs()).map(|(&s, &u)| u - shift * LAMBDA_Q.eval(s)[1]).collect();
    let second: Vec<T> = y.iter().zip(&sol.second).map(|(&s, &u)| u - shift * LAMBDA_Q.eval(s)[2]).collect();
    let t = RadialFunction::new(w.grid().clone(), values, derivs)?;
    let mut after = T::zero();
    for i in 0..y.len() - 1 {
        if y[i] >= top {
            break;
        }
        let (a, c) = (y[i], y[i + 1].min(top));
        after += gauss_legendre(&|s| t.eval(s) * chi_m.value(s) * PHI.eval(s)[0] * s * s * s, a, c);
    }
    let rel = (after / num_abs.max(T::min_positive_value())).abs().f64();
    Ok((t, second, shift, rel))
}

struct Shared<T> {
    gamma: GammaFunction<T>,
    cb: CbValue,
}

fn shared<T: Real>(b: T, cfg: &ProfileConfig) -> Result<Shared<T>> {
    check_b(b)?;
    let grid = profile_grid(b, cfg)?;
    let gamma = compute_gamma(&grid)?;
    let cb = compute_cb(b, cfg.step)?;
    Ok(Shared { gamma, cb })
}

fn t1_from<T: Real>(b: T, cfg: &ProfileConfig, sh: &Shared<T>) -> Result<T1Solution<T>> {
    let cb = T::lit(sh.cb.cb);
    let chi = Cutoff::new(b0(b) / T::lit(4.0), cfg.step);
    let f = |s: T| -PHI.eval(s)[0] + cb * chi.value(s) * LAMBDA_Q.eval(s)[0];
    let sol = solve_h(&f, &sh.gamma)?;
    let (t1, t1_second, shift, rel) = orthogonalize(&sol, T::lit(cfg.m), cfg.step)?;
    if !(rel <= 1e-6) {
        return Err(Error::OrthogonalityFailure { rel });
    }
    Ok(T1Solution { b, cb, shift, t1, t1_second, projection_rel: rel, source_total: sol.total.f64() })
}

/// Solve for `T₁` at scale `b`.
pub fn build_t1<T: Real>(b: T, cfg: &ProfileConfig) -> Result<T1Solution<T>> {
    let sh = shared(b, cfg)?;
    t1_from(b, cfg, &sh)
}

/// Everything built from `T₁` at one `b`.
#[derive(Debug, Clone)]
pub struct ProfileBundle<T> {
    pub b: T,
    pub b0: T,
    pub b1: T,
    pub m: T,
    pub step: Smoothstep,
    pub cb: CbValue,
    pub t1: T1Solution<T>,
    /// `∂_b T₁`, tabulated with its second derivative.
    pub dbt1: RadialFunction<T>,
    pub dbt1_second: Vec<T>,
    /// `P`, `Ψ`, `∂_b P` on the profile grid.
    pub p: Vec<T>,
    pub psi: Vec<T>,
    pub dbp: Vec<T>,
}

/// Pointwise `[f, f', f'']` of a tabulated function whose `f''` is recovered from `Hf = F`.
fn with_second<T: Real>(f: &RadialFunction<T>, source: impl Fn(T) -> T, y: T) -> [T; 3] {
    let (u, du) = f.eval_both(y);
    let dd = if y == T::zero() {
        // Regular origin: Δf = 4f''.
        -(crate::groundstate::v(y) * u + source(y)) / T::lit(4.0)
    } else {
        -T::lit(3.0) * du / y - crate::groundstate::v(y) * u - source(y)
    };
    [u, du, dd]
}

impl<T: Real> ProfileBundle<T> {
    fn chi0(&self) -> Cutoff<T> {
        Cutoff::new(self.b0 / T::lit(4.0), self.step)
    }
    fn chi1(&self) -> Cutoff<T> {
        Cutoff::new(self.b1, self.step)
    }

    /// Source `F` of the `T₁` equation.
    pub fn source(&self, y: T) -> T {
        -PHI.eval(y)[0] + self.t1.cb * self.chi0().value(y) * LAMBDA_Q.eval(y)[0]
    }

    /// `[T₁, T₁', T₁'']` at any `y`.
    pub fn t1_at(&self, y: T) -> [T; 3] {
        with_second(&self.t1.t1, |s| self.source(s), y)
    }

    /// `P(y) = Q + χ_{B₁} b² T₁`.
    pub fn p_at(&self, y: T) -> T {
        Q.eval(y)[0] + self.chi1().value(y) * self.b * self.b * self.t1.t1.eval(y)
    }

    /// `ΛP = P + y P'`.
    pub fn lambda_p_at(&self, y: T) -> T {
        let b2 = self.b * self.b;
        let (t, dt) = self.t1.t1.eval_both(y);
        let c = self.chi1().eval(y);
        let dq = Q.eval(y)[1];
        self.p_at(y) + y * (dq + b2 * (c[1] * t + c[0] * dt))
    }

    /// `Ψ(y)`, assembled from the closed-form cutoff derivatives and the `T₁` equation.
    pub fn psi_at(&self, y: T) -> T {
        let b2 = self.b * self.b;
        let t = self.t1_at(y);
        let c1 = self.chi1().eval(y);
        let lap_chi = self.chi1().laplacian(y);
        let phi = PHI.eval(y)[0];
        let lq = LAMBDA_Q.eval(y)[0];
        let g = [c1[0] * t[0], c1[1] * t[0] + c1[0] * t[1], c1[2] * t[0] + T::lit(2.0) * c1[1] * t[1] + c1[0] * t[2]];
        let dlg = T::lit(2.0) * g[0] + T::lit(4.0) * y * g[1] + y * y * g[2];
        let delta = b2 * g[0];
        let qv = Q.eval(y)[0];
        b2 * self.t1.cb * self.chi0().value(y) * lq
            + b2 * ((T::one() - c1[0]) * phi - T::lit(2.0) * c1[1] * t[1] - t[0] * lap_chi)
            + b2 * b2 * dlg
            - T::lit(3.0) * qv * delta * delta
            - delta * delta * delta
    }

    /// `∂_b P = 2bχT₁ - b² ∂_b(log B₁) ρ(y/B₁) T₁ + b² χ ∂_b T₁`.
    pub fn dbp_at(&self, y: T) -> T {
        let b = self.b;
        let chi = self.chi1();
        let t = self.t1.t1.eval(y);
        let dlog_b1 = T::one() / (b * b.ln()) - T::one() / b;
        T::lit(2.0) * b * chi.value(y) * t - b * b * dlog_b1 * chi.rho(y) * t + b * b * chi.value(y) * self.dbt1.eval(y)
    }

    pub fn nodes(&self) -> &[T] {
        self.t1.t1.nodes()
    }
}

/// Build `T₁`, `∂_b T₁`, `P`, `Ψ` and `∂_b P` at scale `b`.
pub fn assemble_pb1<T: Real>(b: T, cfg: &ProfileConfig) -> Result<ProfileBundle<T>> {
    let sh = shared(b, cfg)?;
    let t1 = t1_from(b, cfg, &sh)?;
    let cb = T::lit(sh.cb.cb);
    let den = T::lit(sh.cb.denominator);
    let dcb = cb_derivative(b, cb, den, cfg.step);
    let chi = Cutoff::new(b0(b) / T::lit(4.0), cfg.step);
    let df = |s: T| (dcb * chi.value(s) + cb * chi.rho(s) / b) * LAMBDA_Q.eval(s)[0];
    let dsol = solve_h(&df, &sh.gamma)?;
    let (dbt1, dbt1_second, _, _) = orthogonalize(&dsol, T::lit(cfg.m), cfg.step)?;

    let mut bundle = ProfileBundle {
        b,
        b0: b0(b),
        b1: b1(b),
        m: T::lit(cfg.m),
        step: cfg.step,
        cb: sh.cb,
        t1,
        dbt1,
        dbt1_second,
        p: Vec::new(),
        psi: Vec::new(),
        dbp: Vec::new(),
    };
    let y = bundle.nodes().to_vec();
    bundle.p = y.iter().map(|&s| bundle.p_at(s)).collect();
    bundle.psi = y.iter().map(|&s| bundle.psi_at(s)).collect();
    bundle.dbp = y.iter().map(|&s| bundle.dbp_at(s)).collect();
    Ok(bundle)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Flux {
    pub b: f64,
    /// `(Ψ, ΛP̃)` with `P̃ = χ_{B₀/4} Q`.
    pub value: f64,
    /// `value / (32 b²)`.
    pub ratio: f64,
    /// Same ratio with `Ψ` replaced by `c_b b² χ_{B₀/4} ΛQ`.
    pub leading_ratio: f64,
}

/// `ΛP̃ = χ_{B₀/4} ΛQ + ρ(y/(B₀/4)) Q`.
pub fn lambda_p_tilde<T: Real>(b: T, step: Smoothstep, y: T) -> T {
    let chi = Cutoff::new(b0(b) / T::lit(4.0), step);
    chi.value(y) * LAMBDA_Q.eval(y)[0] + chi.rho(y) * Q.eval(y)[0]
}

/// Outgoing flux `(Ψ, ΛP̃)` against `32 b²`.
pub fn flux_integral<T: Real>(bundle: &ProfileBundle<T>) -> Flux {
    let b = bundle.b;
    let q4 = bundle.b0 / T::lit(4.0);
    let edges = cutoff_edges(b, &[q4, T::lit(2.0)]);
    let lp = |s: T| lambda_p_tilde(b, bundle.step, s);
    let value = integrate_panels(&|s: T| bundle.psi_at(s) * lp(s) * s * s * s, &edges);
    let chi = Cutoff::new(q4, bundle.step);
    let cb = bundle.t1.cb;
    let lead = integrate_panels(&|s: T| b * b * cb * chi.value(s) * LAMBDA_Q.eval(s)[0] * lp(s) * s * s * s, &edges);
    let norm = T::lit(32.0) * b * b;
    Flux { b: b.f64(), value: value.f64(), ratio: (value / norm).f64(), leading_ratio: (lead / norm).f64() }
}

/// Bracket shared by the `T₁` and `∂_b P` envelopes.
fn core_bracket(y: f64, b: f64, m: f64) -> f64 {
    let lb = b.ln().abs();
    let half_b0 = 1.0 / b;
    let mut e = (m.ln() + (1.0 + y).ln()) / (1.0 + y * y);
    if (2.0..=half_b0).contains(&y) {
        e += (1.0 + (b * y).ln().abs()) / lb;
    }
    if y >= half_b0 {
        e += 1.0 / (b * b * y * y * lb);
    }
    e
}

/// Zeroth-order bound for `|T₁|`.
pub fn t1_envelope(y: f64, b: f64, m: f64) -> f64 {
    core_bracket(y, b, m)
}

/// Zeroth-order bound for `|∂_b P|`.
pub fn dbp_envelope(y: f64, b: f64, m: f64) -> f64 {
    if y <= 2.0 * b1(b) {
        b * core_bracket(y, b, m)
    } else {
        0.0
    }
}

/// Zeroth-order bound for `|Ψ - c_b b² χ_{B₀/4} ΛQ|`.
pub fn psi_envelope(y: f64, b: f64, m: f64) -> f64 {
    let lb = b.ln().abs();
    let (half_b0, big) = (1.0 / b, b1(b));
    let mut inner = 0.0;
    if (2.0..=half_b0).contains(&y) {
        inner += (1.0 + (b * y).ln().abs()) / lb;
    }
    if y >= half_b0 && y <= 2.0 * big {
        inner += 1.0 / (b * b * y * y * lb);
    }
    if y <= 2.0 * big {
        inner += (m.ln() + (1.0 + y).ln()) / (1.0 + y * y);
    }
    let mut e = b.powi(4) * inner;
    if y >= big / 2.0 {
        e += b * b / (1.0 + y.powi(4));
    }
    e
}

/// Ratios `|T₁|/env`, `|Ψ - c_b b²χΛQ|/env`, `|∂_b P|/env` at `y`.
pub fn envelope_ratios<T: Real>(bundle: &ProfileBundle<T>, y: f64) -> [f64; 3] {
    let (b, m) = (bundle.b.f64(), bundle.m.f64());
    let yt = T::lit(y);
    let t1 = bundle.t1.t1.eval(yt).f64();
    let lead = (bundle.b * bundle.b * bundle.t1.cb * bundle.chi0().value(yt) * LAMBDA_Q.eval(yt)[0]).f64();
    let psi = bundle.psi_at(yt).f64() - lead;
    let dbp = bundle.dbp_at(yt).f64();
    let ratio = |v: f64, e: f64| {
        if e > 0.0 {
            v.abs() / e
        } else if v == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    [ratio(t1, t1_envelope(y, b, m)), ratio(psi, psi_envelope(y, b, m)), ratio(dbp, dbp_envelope(y, b, m))]
}
