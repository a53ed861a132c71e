//! The ground state `Q(y) = 1/(1 + y²/8)` of `ΔQ + Q³ = 0` in four dimensions
//! and the objects built from it: `ΛQ`, `Φ = DΛQ`, the potentials `V = 3Q²`
//! and `W = 2V + (3/2) y V'`, and the second zero mode `Γ` of
//! `H = -Δ - V`.
//!
//! Inner products are `(f, g) = ∫_0^∞ f g y³ dy` with no sphere factor.

use crate::error::{Error, Result};
use crate::numerics::fd::derivatives;
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quad::{integrate_panels, integrate_tail, quadrature, radial_edges, Rule};
use crate::numerics::{RadialFunction, RadialGrid, SeriesLaunch, TailLaw};
use crate::scalar::Real;

/// Radius of the launch series at the origin.
pub const LAUNCH_Y0: f64 = 1e-3;

/// `g(y) = Σ a_k q^{-k}` with `q = 1 + y²/8`; every closed form here has this shape.
#[derive(Debug, Clone, Copy)]
pub struct InvPoly<const K: usize>(pub [f64; K]);

impl<const K: usize> InvPoly<K> {
    /// Value, first and second derivative at `y`.
    pub fn eval<T: Real>(&self, y: T) -> [T; 3] {
        let q = T::one() + y * y / T::lit(8.0);
        let p = T::one() / q;
        let mut v = T::zero();
        let mut s1 = T::zero();
        let mut s2 = T::zero();
        let mut pk = T::one();
        for (k, &a) in self.0.iter().enumerate() {
            let a = T::lit(a);
            let kt = T::from_usize_(k);
            v += a * pk;
            s1 -= kt * a * pk * p;
            s2 += kt * (kt + T::one()) * a * pk * p * p;
            pk *= p;
        }
        let quarter = T::lit(0.25);
        [v, y * quarter * s1, quarter * s1 + y * y / T::lit(16.0) * s2]
    }

    /// Coefficients `(g0, g2)` of `g = g0 + g2 y² + O(y⁴)`.
    pub fn taylor2(&self) -> (f64, f64) {
        let mut g0 = 0.0;
        let mut g2 = 0.0;
        for (k, &a) in self.0.iter().enumerate() {
            g0 += a;
            g2 -= a * k as f64 / 8.0;
        }
        (g0, g2)
    }
}

pub const Q: InvPoly<2> = InvPoly([0.0, 1.0]);
pub const LAMBDA_Q: InvPoly<3> = InvPoly([0.0, -1.0, 2.0]);
pub const PHI: InvPoly<4> = InvPoly([0.0, 0.0, -6.0, 8.0]);
pub const V: InvPoly<3> = InvPoly([0.0, 0.0, 3.0]);
pub const W: InvPoly<4> = InvPoly([0.0, 0.0, -12.0, 18.0]);
/// Comparison potential `-(3/2) y² q^{-3}`.
pub const W_HAT: InvPoly<4> = InvPoly([0.0, 0.0, -12.0, 12.0]);
/// `2V + y V'`, so that `HΦ = (2V + yV') ΛQ`.
pub const TWO_V_PLUS_YV: InvPoly<4> = InvPoly([0.0, 0.0, -6.0, 12.0]);

#[inline]
pub fn q<T: Real>(y: T) -> T {
    T::one() / (T::one() + y * y / T::lit(8.0))
}
#[inline]
pub fn lambda_q<T: Real>(y: T) -> T {
    LAMBDA_Q.eval(y)[0]
}
#[inline]
pub fn phi<T: Real>(y: T) -> T {
    PHI.eval(y)[0]
}
#[inline]
pub fn v<T: Real>(y: T) -> T {
    let p = q(y);
    T::lit(3.0) * p * p
}
#[inline]
pub fn w<T: Real>(y: T) -> T {
    W.eval(y)[0]
}
#[inline]
pub fn w_hat<T: Real>(y: T) -> T {
    W_HAT.eval(y)[0]
}

/// Closed forms with derivatives up to second order; index 0 is the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateValue<T> {
    pub y: T,
    pub q: [T; 3],
    pub lambda_q: [T; 3],
    pub phi: [T; 3],
    pub v: [T; 3],
    pub w: [T; 3],
}

pub fn eval_ground_family<T: Real>(y: T) -> GroundStateValue<T> {
    GroundStateValue { y, q: Q.eval(y), lambda_q: LAMBDA_Q.eval(y), phi: PHI.eval(y), v: V.eval(y), w: W.eval(y) }
}

/// Solution of `HΓ = 0` with `Γ ~ 1/(2y²)` at the origin and `Γ(1) = 0`.
#[derive(Debug, Clone)]
pub struct GammaFunction<T> {
    pub gamma: RadialFunction<T>,
    /// Largest relative deviation of `Γ'ΛQ - ΓΛQ'` from `-1/y³`.
    pub wronskian_max_rel: T,
}

/// Frobenius start: `Γ = y⁻²/2 - (3/4) log(y) ΛQ(y) - (21/128) y² + …`.
pub fn gamma_launch<T: Real>() -> SeriesLaunch<T> {
    let kappa = -0.75;
    SeriesLaunch {
        y0: T::lit(LAUNCH_Y0),
        lowest_power: -2,
        coeffs: [0.5, 0.0, 0.0, 0.0, -21.0 / 128.0].map(T::lit).to_vec(),
        log_coeffs: [0.0, 0.0, kappa, 0.0, -3.0 / 8.0 * kappa, 0.0, 5.0 / 64.0 * kappa].map(T::lit).to_vec(),
    }
}

fn h_rhs<T: Real>(y: T, s: &[T; 2]) -> [T; 2] {
    [s[1], -T::lit(3.0) * s[1] / y - v(y) * s[0]]
}

pub fn compute_gamma<T: Real>(grid: &RadialGrid<T>) -> Result<GammaFunction<T>> {
    let launch = gamma_launch::<T>();
    let y0 = launch.y0;
    if grid.r_min() < y0 {
        return Err(Error::InvalidInput(format!("Γ grid must start at or beyond the launch radius {}", y0)));
    }
    let one = T::one();
    let nodes = grid.nodes();
    let mut stations: Vec<T> = nodes.to_vec();
    let ins = stations.partition_point(|&y| y < one);
    let has_one = stations.get(ins) == Some(&one);
    if !has_one {
        stations.insert(ins, one);
    }
    let (g0, d0) = launch.eval(y0);
    let opts = OdeOptions::with_tol(
        T::lit(1e-12).max(T::epsilon() * T::lit(100.0)),
        T::lit(1e-30).max(T::min_positive_value()),
    );
    let out = integrate(h_rhs, y0, [g0, d0], &stations, &opts)?;
    // Remove the ΛQ component so that Γ(1) = 0.
    let g1 = out[ins][0];
    let c = g1 / lambda_q(one);
    let mut values = Vec::with_capacity(nodes.len());
    let mut derivs = Vec::with_capacity(nodes.len());
    for (k, s) in out.iter().enumerate() {
        if k == ins && !has_one {
            continue;
        }
        let y = stations[k];
        let lq = LAMBDA_Q.eval(y);
        values.push(s[0] - c * lq[0]);
        derivs.push(s[1] - c * lq[1]);
    }
    let mut worst = T::zero();
    for (i, &y) in nodes.iter().enumerate() {
        let lq = LAMBDA_Q.eval(y);
        let wr = derivs[i] * lq[0] - values[i] * lq[1];
        let rel = (wr * y * y * y + one).abs();
        worst = worst.max(rel);
    }
    let tol = T::lit(1e-7).max(T::epsilon() * T::lit(1e3));
    if !(worst <= tol) {
        return Err(Error::WronskianDrift { max_rel: worst.f64() });
    }
    let gamma = RadialFunction::new(grid.clone(), values, derivs)?.with_tail(TailLaw::Unspecified);
    Ok(GammaFunction { gamma, wronskian_max_rel: worst })
}

/// `(Φ, ΛQ)` with the integral beyond the cut evaluated from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Pohozaev {
    pub value: f64,
    pub error_bar: f64,
    /// Truncated integral over `[0, R]`.
    pub raw: f64,
    /// Contribution of `[R, ∞)`.
    pub tail: f64,
    pub cut: f64,
    pub finite: bool,
}

fn phi_lq_density<T: Real>(y: T) -> T {
    phi(y) * lambda_q(y) * y * y * y
}

/// Truncated `∫_0^R ΦΛQ y³` and the same corrected by the leading tail `1536/R²`.
pub fn pohozaev_truncated<T: Real>(r: T) -> (T, T) {
    let raw = integrate_panels(&phi_lq_density::<T>, &radial_edges(r, 40));
    (raw, raw + T::lit(1536.0) / (r * r))
}

pub fn pohozaev_constant<T: Real>() -> Pohozaev {
    let cut = T::lit(1e3);
    let (raw, _) = pohozaev_truncated(cut);
    let tail = integrate_tail(&phi_lq_density::<T>, cut, 8);
    let value = raw + tail;
    let (raw_half, _) = pohozaev_truncated(cut * T::lit(0.5));
    let tail_half = integrate_tail(&phi_lq_density::<T>, cut * T::lit(0.5), 8);
    let err = (value - raw_half - tail_half).abs().max(T::epsilon() * value.abs() * T::lit(10.0));
    Pohozaev {
        value: value.f64(),
        error_bar: err.f64(),
        raw: raw.f64(),
        tail: tail.f64(),
        cut: cut.f64(),
        finite: value.is_finite(),
    }
}

/// Max and `L²(y³dy)` norms of a residual on a grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Residual {
    pub max: f64,
    pub l2: f64,
}

pub fn residual_norms<T: Real>(nodes: &[T], r: &[T]) -> Residual {
    let sq: Vec<T> = r.iter().map(|&x| x * x).collect();
    let l2 = quadrature(nodes, &sq, true, Rule::Trapezoid).map(|v| v.sqrt()).unwrap_or(T::nan());
    let max = r.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    Residual { max: max.f64(), l2: l2.f64() }
}

/// Five-point finite-difference `H u = -u'' - 3u'/y - V u` from nodal values.
pub fn apply_h_values<T: Real>(nodes: &[T], values: &[T]) -> Vec<T> {
    let (d1, d2) = derivatives(nodes, values, 5);
    nodes.iter().enumerate().map(|(i, &y)| -d2[i] - T::lit(3.0) * d1[i] / y - v(y) * values[i]).collect()
}

/// Residuals of `HΛQ = 0` and of `HΦ = (2V + yV')ΛQ` on the interior nodes.
pub fn check_resonance<T: Real>(grid: &RadialGrid<T>) -> (Residual, Residual) {
    let y = grid.nodes();
    let n = y.len();
    let lq: Vec<T> = y.iter().map(|&s| lambda_q(s)).collect();
    let ph: Vec<T> = y.iter().map(|&s| phi(s)).collect();
    let hl = apply_h_values(y, &lq);
    let hp = apply_h_values(y, &ph);
    let inner = &y[1..n - 1];
    let r1: Vec<T> = hl[1..n - 1].to_vec();
    let r2: Vec<T> = (1..n - 1).map(|i| hp[i] - TWO_V_PLUS_YV.eval(y[i])[0] * lq[i]).collect();
    (residual_norms(inner, &r1), residual_norms(inner, &r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let g = eval_ground_family(0.0f64);
        assert_eq!(g.q[0], 1.0);
        assert_eq!(g.lambda_q[0], 1.0);
        assert_eq!(g.v[0], 3.0);
        assert_eq!(g.w[0], 6.0);
        assert_eq!(g.phi[0], 2.0);
    }

    #[test]
    fn zero_of_lambda_q() {
        let g = eval_ground_family(8f64.sqrt());
        assert!(g.lambda_q[0].abs() < 1e-15);
        assert!((g.q[0] - 0.5).abs() < 1e-15);
        assert!((w(8f64.sqrt()) + 0.75).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_definitions() {
        for &y in &[0.0f64, 0.3, 1.0, 2.5, 7.0, 40.0] {
            let g = eval_ground_family(y);
            let qq = 1.0 / (1.0 + y * y / 8.0);
            assert!((g.q[0] - qq).abs() < 1e-15);
            assert!((g.lambda_q[0] - (g.q[0] + y * g.q[1])).abs() < 1e-14);
            assert!((g.phi[0] - (2.0 * g.lambda_q[0] + y * g.lambda_q[1])).abs() < 1e-14);
            assert!((g.v[0] - 3.0 * qq * qq).abs() < 1e-15);
            assert!((g.w[0] - (2.0 * g.v[0] + 1.5 * y * g.v[1])).abs() < 1e-13);
            // ΔQ + Q³ = 0 exactly.
            if y > 0.0 {
                assert!((g.q[2] + 3.0 * g.q[1] / y + qq.powi(3)).abs() < 1e-14);
                let hlq = -g.lambda_q[2] - 3.0 * g.lambda_q[1] / y - g.v[0] * g.lambda_q[0];
                assert!(hlq.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn far_field_limit() {
        let y = 1e3f64;
        let l = lambda_q(y);
        assert!((y.powi(4) * l * l / 2.0 - 32.0).abs() <= 0.01);
    }

    #[test]
    fn f32_closed_forms() {
        let g = eval_ground_family(8f32.sqrt());
        assert!(g.lambda_q[0].abs() < 1e-6);
        assert!((g.q[0] - 0.5).abs() < 1e-6);
    }
}
