//! Variation of parameters for `H w = F` with the zero modes `ΛQ` and `Γ`.

use crate::error::{Error, Result};
use crate::groundstate::{v, GammaFunction, LAMBDA_Q};
use crate::numerics::quad::{gauss_legendre, integrate_tail};
use crate::numerics::RadialFunction;
use crate::scalar::Real;

/// Regular solution of `Hw = F` with `w(0) = 0`, tabulated with `w'` and `w''`.
#[derive(Debug, Clone)]
pub struct GreenSolution<T> {
    pub w: RadialFunction<T>,
    pub second: Vec<T>,
    /// `∫_0^∞ F ΛQ y³`, which must vanish for the solution to stay bounded.
    pub total: T,
}

/// `w = Γ ∫_0^y FΛQ s³ - ΛQ ∫_0^y FΓ s³`.
///
/// For `y ≥ 1` the first integral is replaced by `-∫_y^∞ FΛQ s³`, which is
/// the same quantity when `(F, ΛQ) = 0` and avoids cancellation. Both forms
/// agree in value at `y = 1` because `Γ(1) = 0`. `F` must be a closed form
/// valid on all of `[0, ∞)` and decay at least like `y⁻⁶` far out.
pub fn solve_h<T: Real, F: Fn(T) -> T>(f: &F, gamma: &GammaFunction<T>) -> Result<GreenSolution<T>> {
    let g = &gamma.gamma;
    let y = g.nodes();
    let n = y.len();
    let y0 = y[0];
    let f0 = f(T::zero());
    let quarter = T::lit(0.25);

    let fl = |s: T| f(s) * LAMBDA_Q.eval(s)[0] * s * s * s;
    let fg = |s: T| f(s) * g.eval(s) * s * s * s;

    let mut fwd_l = vec![T::zero(); n];
    let mut fwd_g = vec![T::zero(); n];
    let mut panel_l = vec![T::zero(); n];
    fwd_l[0] = f0 * y0.powi(4) * quarter;
    fwd_g[0] = f0 * y0 * y0 * quarter;
    for i in 0..n - 1 {
        panel_l[i] = gauss_legendre(&fl, y[i], y[i + 1]);
        fwd_l[i + 1] = fwd_l[i] + panel_l[i];
        fwd_g[i + 1] = fwd_g[i] + gauss_legendre(&fg, y[i], y[i + 1]);
    }
    let mut back_l = vec![T::zero(); n];
    back_l[n - 1] = integrate_tail(&fl, y[n - 1], 64);
    for i in (0..n - 1).rev() {
        back_l[i] = back_l[i + 1] + panel_l[i];
    }
    let total = fwd_l[n - 1] + back_l[n - 1];

    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for i in 0..n {
        let s = y[i];
        let lq = LAMBDA_Q.eval(s);
        let (gv, gd) = (g.values()[i], g.derivs()[i]);
        let a = if s < T::one() { fwd_l[i] } else { -back_l[i] };
        let w = gv * a - lq[0] * fwd_g[i];
        let dw = gd * a - lq[1] * fwd_g[i];
        if !(w.is_finite() && dw.is_finite()) {
            return Err(Error::NonFiniteState { at: s.f64() });
        }
        values.push(w);
        derivs.push(dw);
        second.push(-T::lit(3.0) * dw / s - v(s) * w - f(s));
    }
    let w = RadialFunction::new(g.grid().clone(), values, derivs)?;
    Ok(GreenSolution { w, second, total })
}
