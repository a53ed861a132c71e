use crate::error::{Error, Result};
use crate::groundstate::{residual_norms, LAUNCH_Y0, W};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::{find_root, RadialFunction, RadialGrid, RootMethod, TailLaw};
use crate::scalar::Real;

use super::apply_b;

/// Far-field law the inverse must obey.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Decay {
    /// `U ~ c / r²` (exponentially decaying source).
    InverseSquare,
    /// `U ~ α log r / r²` for a source `f ~ source_r4 / r⁴`; then `α = source_r4 / 2`.
    LogOverSquare { source_r4: f64 },
}

impl Decay {
    /// The source `Φ ~ -384 r⁻⁴`.
    pub const PHI: Decay = Decay::LogOverSquare { source_r4: -384.0 };

    /// Coefficient of `log r / r²` forced by the source.
    pub fn log_coefficient(self) -> f64 {
        match self {
            Decay::InverseSquare => 0.0,
            Decay::LogOverSquare { source_r4 } => 0.5 * source_r4,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct InversionConfig {
    /// Outer end of the table; the decay condition is imposed here.
    pub r_match: f64,
    pub nodes: usize,
    /// Initial bracket for `U(0)`; widened geometrically if needed.
    pub u0_bracket: (f64, f64),
    /// Window on which the tail diagnostic is measured.
    pub flat_window: (f64, f64),
}

impl InversionConfig {
    pub fn psi() -> Self {
        Self { r_match: 400.0, nodes: 6000, u0_bracket: (-1.0, 1.0), flat_window: (100.0, 300.0) }
    }
    pub fn phi() -> Self {
        Self { r_match: 4000.0, nodes: 9000, u0_bracket: (-1.0, 1.0), flat_window: (200.0, 1000.0) }
    }
}

#[derive(Debug, Clone)]
pub struct Inversion<T> {
    pub u: RadialFunction<T>,
    pub u0: T,
    pub decay: Decay,
    /// Far constant `U + rU'/2 - α/(2r²)` at `r_match` after the solve.
    pub far_constant: f64,
    /// Relative spread `(max - min)/|mean|` of `r²U` (inverse-square) or
    /// `r²U/log r` (log case) over the flat window.
    pub flatness: f64,
    /// Least-squares fit `r²U ≈ slope·log r + intercept` over the flat window.
    pub log_fit: (f64, f64),
    /// `‖BU - f‖ / ‖f‖` in `L²(r³dr)` on interior nodes.
    pub residual_rel: f64,
}

fn opts<T: Real>() -> OdeOptions<T> {
    OdeOptions::with_tol(T::lit(1e-12).max(T::epsilon() * T::lit(100.0)), T::lit(1e-30).max(T::min_positive_value()))
}

/// Solve `BU = f`, `U'(0) = 0`, choosing `U(0)` so that the solution has the
/// prescribed decay at `r_match`.
///
/// The solution is affine in `U(0)`, so one particular and one homogeneous
/// shot suffice; the tail condition is then solved by a bracketed root search.
pub fn invert_b<T: Real>(f: &RadialFunction<T>, decay: Decay, cfg: &InversionConfig) -> Result<Inversion<T>> {
    if !(cfg.r_match > cfg.flat_window.1 && cfg.flat_window.0 < cfg.flat_window.1) {
        return Err(Error::InvalidInput("flat window must lie inside r_match".into()));
    }
    let y0 = T::lit(LAUNCH_Y0);
    let grid = RadialGrid::geometric(y0, T::lit(cfg.r_match), cfg.nodes)?;
    let (w0, w2) = W.taylor2();
    let f0 = f.eval(T::zero());
    let y2 = y0 * y0;
    // Homogeneous: U = 1 + a2 y² + a4 y⁴. Particular: U = -f0 y²/8.
    let a2 = T::lit(w0 / 8.0);
    let a4 = T::lit((w0 * w0 / 8.0 + w2) / 24.0);
    let launch = [
        T::one() + a2 * y2 + a4 * y2 * y2,
        T::lit(2.0) * a2 * y0 + T::lit(4.0) * a4 * y2 * y0,
        -f0 * y2 / T::lit(8.0),
        -f0 * y0 / T::lit(4.0),
    ];
    let three = T::lit(3.0);
    let out = integrate(
        |y, s: &[T; 4]| {
            let wy = W.eval(y)[0];
            [s[1], -three * s[1] / y + wy * s[0], s[3], -three * s[3] / y + wy * s[2] - f.eval(y)]
        },
        y0,
        launch,
        grid.nodes(),
        &opts(),
    )?;
    let n = out.len();
    let alpha = T::lit(decay.log_coefficient());
    let rm = grid.r_max();
    let est = |u: T, du: T, forced: bool| {
        let corr = if forced { alpha / (T::lit(2.0) * rm * rm) } else { T::zero() };
        u + rm * du / T::lit(2.0) - corr
    };
    let a_h = est(out[n - 1][0], out[n - 1][1], false);
    let a_p = est(out[n - 1][2], out[n - 1][3], true);
    if !(a_h.is_finite() && a_p.is_finite()) {
        return Err(Error::NonFiniteState { at: rm.f64() });
    }
    let tail = |u0: T| a_p + u0 * a_h;

    let (mut lo, mut hi) = (T::lit(cfg.u0_bracket.0), T::lit(cfg.u0_bracket.1));
    let mut widened = 0;
    while tail(lo).signum() == tail(hi).signum() {
        widened += 1;
        if widened > 60 || a_h == T::zero() {
            return Err(Error::TailMismatch);
        }
        lo *= T::lit(2.0);
        hi *= T::lit(2.0);
    }
    let scale = lo.abs().max(hi.abs());
    let u0 = find_root(tail, lo, hi, scale * T::lit(1e-15).max(T::epsilon() * T::lit(4.0)), RootMethod::Secant)?;

    let values: Vec<T> = out.iter().map(|s| s[2] + u0 * s[0]).collect();
    let derivs: Vec<T> = out.iter().map(|s| s[3] + u0 * s[1]).collect();
    let tail_law = match decay {
        Decay::InverseSquare => TailLaw::Power { exponent: -2.0 },
        Decay::LogOverSquare { .. } => TailLaw::PowerLog { exponent: -2.0, log_exponent: 1.0 },
    };
    let u = RadialFunction::new(grid.clone(), values, derivs)?.with_tail(tail_law);
    let far_constant = est(u.values()[n - 1], u.derivs()[n - 1], true).f64();

    let (flatness, log_fit) = tail_diagnostics(&u, decay, cfg.flat_window);

    let bu = apply_b(&u)?;
    let y = grid.nodes();
    let res: Vec<T> = y.iter().zip(bu.values()).map(|(&r, &b)| b - f.eval(r)).collect();
    let fv: Vec<T> = y.iter().map(|&r| f.eval(r)).collect();
    let m = y.len();
    let rn = residual_norms(&y[2..m - 2], &res[2..m - 2]);
    let fnorm = residual_norms(&y[2..m - 2], &fv[2..m - 2]);

    Ok(Inversion { u, u0, decay, far_constant, flatness, log_fit, residual_rel: rn.l2 / fnorm.l2 })
}

fn tail_diagnostics<T: Real>(u: &RadialFunction<T>, decay: Decay, window: (f64, f64)) -> (f64, (f64, f64)) {
    let pts: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let r = window.0 * (window.1 / window.0).powf(i as f64 / 200.0);
            (r, r * r * u.eval(T::lit(r)).f64())
        })
        .collect();
    let diag: Vec<f64> = pts
        .iter()
        .map(|&(r, v)| match decay {
            Decay::InverseSquare => v,
            Decay::LogOverSquare { .. } => v / r.ln(),
        })
        .collect();
    let (mn, mx) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mean = diag.iter().sum::<f64>() / diag.len() as f64;
    let flat = (mx - mn) / mean.abs();

    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(r, v)| (a + r.ln(), b + v));
    let (mx_, my_) = (sx / n, sy / n);
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), &(r, v)| {
        let dx = r.ln() - mx_;
        (a + dx * dx, b + dx * (v - my_))
    });
    let slope = sxy / sxx;
    (flat, (slope, my_ - slope * mx_))
}

/// `Φ` tabulated on `grid` with its `r⁻⁴` tail, as a source for [`invert_b`].
pub fn phi_source<T: Real>(grid: RadialGrid<T>) -> RadialFunction<T> {
    RadialFunction::from_fn(grid, |y| {
        let e = crate::groundstate::PHI.eval(y);
        (e[0], e[1])
    })
    .with_tail(TailLaw::Power { exponent: -4.0 })
}
