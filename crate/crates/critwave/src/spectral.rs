//! The linearized operator `H = -Δ - 3Q²` and its single bound state
//! `Hψ = -ζψ`, found by shooting.

use crate::error::{Error, Result};
use crate::groundstate::{lambda_q, residual_norms, v, Residual};
use crate::numerics::fd::derivatives;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quad::{quadrature, Rule};
use crate::numerics::{bessel_k01_scaled, find_root_with, RadialFunction, RadialGrid, RootMethod, TailLaw};
use crate::scalar::Real;

/// `Hu` on the nodes of `u`, using the tabulated `u'` and a five-point
/// derivative of it for `u''`. At `y = 0` the regular limit `-4u''(0) - V u` is used.
pub fn apply_h<T: Real>(u: &RadialFunction<T>) -> Result<RadialFunction<T>> {
    apply_with_potential(u, |y| -v(y))
}

/// `-Δu + P u` for a potential `P`.
pub fn apply_with_potential<T: Real>(u: &RadialFunction<T>, pot: impl Fn(T) -> T) -> Result<RadialFunction<T>> {
    let y = u.nodes();
    let (d2, _) = derivatives(y, u.derivs(), 5);
    let three = T::lit(3.0);
    let out: Vec<T> = y
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let lap = if r == T::zero() { T::lit(4.0) * d2[i] } else { d2[i] + three * u.derivs()[i] / r };
            -lap + pot(r) * u.values()[i]
        })
        .collect();
    let (dout, _) = derivatives(y, &out, 5);
    RadialFunction::new(u.grid().clone(), out, dout)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Normalization {
    /// `ψ(0) = 1`.
    Origin,
    /// `(ψ, ψ) = 1`.
    UnitL2,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ShootingConfig {
    pub bracket: (f64, f64),
    /// Radius where the decaying boundary condition is imposed while shooting.
    pub r_shoot: f64,
    /// Outward/inward matching radius of the tabulation.
    pub r_match: f64,
    /// Trust radius; ψ is set to zero beyond it.
    pub r_trust: f64,
    pub zeta_tol: f64,
    pub nodes: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self { bracket: (0.3, 0.9), r_shoot: 18.0, r_match: 10.0, r_trust: 30.0, zeta_tol: 1e-12, nodes: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub zeta: T,
    pub psi: RadialFunction<T>,
    pub normalization: Normalization,
    /// `‖Hψ + ζψ‖ / ‖ψ‖` and the max residual on the trust region.
    pub residual: Residual,
    pub residual_rel: f64,
    /// Jump of `ψ'` at the matching radius after scaling the inward branch.
    pub match_jump: f64,
    /// Max relative slope of `ψ e^{√ζ r}` on [10, 15].
    pub decay_slope_plain: f64,
    /// Same with the algebraic prefactor: `ψ r^{3/2} e^{√ζ r}`.
    pub decay_slope: f64,
    /// Eigenvalue from bisection on the raw sign of ψ at the shooting radius.
    pub zeta_raw_sign: f64,
    pub l2_norm: f64,
}

fn launch<T: Real>(zeta: T, y0: T) -> [T; 2] {
    // ψ = 1 + a2 y² + a4 y⁴ with V = 3 - 3y²/4 + ...
    let a2 = (zeta - T::lit(3.0)) / T::lit(8.0);
    let a4 = ((zeta - T::lit(3.0)) * a2 + T::lit(0.75)) / T::lit(24.0);
    let y2 = y0 * y0;
    [T::one() + a2 * y2 + a4 * y2 * y2, T::lit(2.0) * a2 * y0 + T::lit(4.0) * a4 * y2 * y0]
}

fn rhs<T: Real>(zeta: T) -> impl Fn(T, &[T; 2]) -> [T; 2] {
    move |y, s| [s[1], -T::lit(3.0) * s[1] / y + (zeta - v(y)) * s[0]]
}

fn opts<T: Real>() -> OdeOptions<T> {
    OdeOptions::with_tol(T::lit(1e-12).max(T::epsilon() * T::lit(100.0)), T::lit(1e-40).max(T::min_positive_value()))
}

/// Log-derivative of the decaying solution `K1(√ζ y)/y` at `r`.
pub fn decaying_log_derivative<T: Real>(zeta: T, r: T) -> Result<T> {
    let k = zeta.sqrt();
    let (k0, k1) = bessel_k01_scaled(k * r)?;
    Ok(-k * k0 / k1 - T::lit(2.0) / r)
}

/// Wronskian-type mismatch `ψ'(R) - ℓ ψ(R)` against the decaying branch.
pub fn shooting_mismatch<T: Real>(zeta: T, r: T) -> Result<T> {
    let y0 = T::lit(crate::groundstate::LAUNCH_Y0);
    let out = integrate(rhs(zeta), y0, launch(zeta, y0), &[r], &opts())?;
    let s = out[0];
    let l = decaying_log_derivative(zeta, r)?;
    let scale = s[0].abs().max(s[1].abs());
    Ok((s[1] - l * s[0]) / scale)
}

fn raw_sign<T: Real>(zeta: T, r: T) -> Result<T> {
    let y0 = T::lit(crate::groundstate::LAUNCH_Y0);
    let out = integrate(rhs(zeta), y0, launch(zeta, y0), &[r], &opts())?;
    Ok(out[0][0].signum())
}

pub fn solve_eigenvalue<T: Real>(cfg: &ShootingConfig) -> Result<T> {
    let r = T::lit(cfg.r_shoot);
    find_root_with(
        |z| shooting_mismatch(z, r),
        T::lit(cfg.bracket.0),
        T::lit(cfg.bracket.1),
        T::lit(cfg.zeta_tol).max(T::epsilon() * T::lit(4.0)),
        RootMethod::Bisection,
    )
}

pub fn solve_eigenpair<T: Real>(cfg: &ShootingConfig) -> Result<EigenPair<T>> {
    if !(cfg.r_match < cfg.r_shoot && cfg.r_shoot <= cfg.r_trust) {
        return Err(Error::InvalidInput("need r_match < r_shoot <= r_trust".into()));
    }
    let zeta: T = solve_eigenvalue(cfg)?;
    let y0 = T::lit(crate::groundstate::LAUNCH_Y0);
    let grid = RadialGrid::geometric(y0, T::lit(cfg.r_trust), cfg.nodes)?;
    let nodes = grid.nodes();
    let rm = T::lit(cfg.r_match);
    let split = nodes.partition_point(|&y| y < rm);
    let mut inner: Vec<T> = nodes[..split].to_vec();
    inner.push(rm);
    let out = integrate(rhs(zeta), y0, launch(zeta, y0), &inner, &opts())?;
    let (u_m, d_m) = (out[split][0], out[split][1]);

    let rt = T::lit(cfg.r_trust);
    let l = decaying_log_derivative(zeta, rt)?;
    let k = zeta.sqrt();
    let (_, k1) = bessel_k01_scaled(k * rt)?;
    let end = k1 / rt;
    let mut outer: Vec<T> = nodes[split..].iter().rev().copied().collect();
    outer.push(rm);
    let back = integrate(rhs(zeta), rt, [end, l * end], &outer, &opts())?;
    let (b_m, bd_m) = back[back.len() - 1].into();
    let scale = u_m / b_m;
    let match_jump = ((d_m - scale * bd_m) / d_m).abs();

    let mut values = Vec::with_capacity(nodes.len());
    let mut derivs = Vec::with_capacity(nodes.len());
    for s in &out[..split] {
        values.push(s[0]);
        derivs.push(s[1]);
    }
    for s in back[..back.len() - 1].iter().rev() {
        values.push(scale * s[0]);
        derivs.push(scale * s[1]);
    }
    let psi = RadialFunction::new(grid.clone(), values, derivs)?.with_tail(TailLaw::Zero);

    // Decay diagnostics on [10, 15].
    let mut slope_plain = T::zero();
    let mut slope = T::zero();
    for i in 0..=50 {
        let r = T::lit(10.0) + T::lit(0.1) * T::from_usize_(i);
        let (p, dp) = psi.eval_both(r);
        let lp = dp / p;
        slope_plain = slope_plain.max((lp + k).abs());
        slope = slope.max((lp + k + T::lit(1.5) / r).abs());
    }
    if !(slope <= T::lit(1e-2)) {
        return Err(Error::DecayNotEntered { slope: slope.f64() });
    }

    let hp = apply_h(&psi)?;
    let res: Vec<T> = hp.values().iter().zip(psi.values()).map(|(&h, &p)| h + zeta * p).collect();
    // Skip the end nodes where stencils are one-sided.
    let m = nodes.len();
    let residual = residual_norms(&nodes[2..m - 2], &res[2..m - 2]);
    let sq: Vec<T> = psi.values().iter().map(|&p| p * p).collect();
    let norm = quadrature(nodes, &sq, true, Rule::Trapezoid)?.sqrt();

    let zr = find_root_with(
        |z| raw_sign(z, T::lit(cfg.r_shoot)),
        T::lit(cfg.bracket.0),
        T::lit(cfg.bracket.1),
        T::lit(1e-12).max(T::epsilon() * T::lit(4.0)),
        RootMethod::Bisection,
    )
    .map(|z| z.f64())
    .unwrap_or(f64::NAN);

    Ok(EigenPair {
        zeta,
        psi,
        normalization: Normalization::Origin,
        residual,
        residual_rel: residual.l2 / norm.f64(),
        match_jump: match_jump.f64(),
        decay_slope_plain: slope_plain.f64(),
        decay_slope: slope.f64(),
        zeta_raw_sign: zr,
        l2_norm: norm.f64(),
    })
}

impl<T: Real> EigenPair<T> {
    pub fn normalized(&self, n: Normalization) -> Self {
        let c = match n {
            Normalization::Origin => T::one() / self.psi.eval(T::zero()),
            Normalization::UnitL2 => T::one() / T::lit(self.l2_norm),
        };
        self.rescaled(c, n)
    }

    /// `cψ`, keeping the normalization tag given.
    pub fn rescaled(&self, c: T, n: Normalization) -> Self {
        let mut out = self.clone();
        out.psi = self.psi.scaled(c);
        out.l2_norm = self.l2_norm * c.abs().f64();
        out.normalization = n;
        out
    }

    /// `(ψ, ΛQ)` over the trust region and the bound `‖ψ‖‖ΛQ‖_loc` it is compared to.
    pub fn resonance_overlap(&self) -> (f64, f64) {
        let y = self.psi.nodes();
        let f: Vec<T> = y.iter().zip(self.psi.values()).map(|(&r, &p)| p * lambda_q(r)).collect();
        let l: Vec<T> = y.iter().map(|&r| lambda_q(r) * lambda_q(r)).collect();
        let ov = quadrature(y, &f, true, Rule::Simpson).unwrap_or(T::nan());
        let ln = quadrature(y, &l, true, Rule::Simpson).unwrap_or(T::nan()).sqrt();
        (ov.f64(), self.l2_norm * ln.f64())
    }

    /// Number of sign changes of ψ on the tabulated region.
    pub fn interior_zeros(&self) -> usize {
        self.psi.values().windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }
}
