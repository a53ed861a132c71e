//! Bessel functions of order 0 and 1 by ascending series on (0, 12].
//!
//! Term magnitudes peak near k = x/2, so at x = 12 the cancellation costs
//! about four digits; the whole range stays below 1e-12 absolute in f64.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SERIES_MAX_X: f64 = 12.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check<T: Real>(x: T) -> Result<()> {
    if !(x > T::zero()) || x > T::lit(SERIES_MAX_X) || !x.is_finite() {
        return Err(Error::DomainError(x.f64()));
    }
    Ok(())
}

/// Series state shared by the four functions: returns (J0, J1, S0, S1) where
/// S0 = Σ_{k≥1} (-1)^{k+1} H_k (x²/4)^k/(k!)² and
/// S1 = Σ_{k≥0} (-1)^k (H_k + H_{k+1}) (x/2)^{2k+1}/(k!(k+1)!).
fn series<T: Real>(x: T) -> (T, T, T, T) {
    let q = x * x / T::lit(4.0);
    let half = x / T::lit(2.0);
    let eps = T::epsilon() * T::lit(0.01);
    let mut t0 = T::one(); // (-1)^k q^k/(k!)^2
    let mut t1 = half; // (-1)^k (x/2)^{2k+1}/(k!(k+1)!)
    let mut j0 = t0;
    let mut j1 = t1;
    let mut s0 = T::zero();
    let mut s1 = t1; // H_0 + H_1 = 1
    let mut h = T::zero();
    let mut k = 0usize;
    loop {
        k += 1;
        let kt = T::from_usize_(k);
        t0 = -t0 * q / (kt * kt);
        t1 = -t1 * q / (kt * (kt + T::one()));
        h += T::one() / kt;
        let h_next = h + T::one() / (kt + T::one());
        j0 += t0;
        j1 += t1;
        s0 -= h * t0;
        s1 += (h + h_next) * t1;
        let scale = j0.abs().max(j1.abs()).max(T::lit(1e-3));
        if k as f64 > x.f64() && t0.abs().max(t1.abs()) * (h_next + T::one()) < eps * scale {
            break;
        }
        if k > 200 {
            break;
        }
    }
    (j0, j1, s0, s1)
}

/// `(J0(x), Y0(x))` for `0 < x <= 12`.
pub fn bessel_j0_y0<T: Real>(x: T) -> Result<(T, T)> {
    check(x)?;
    let (j0, _, s0, _) = series(x);
    let two_pi = T::lit(2.0) / T::PI();
    let y0 = two_pi * (((x / T::lit(2.0)).ln() + T::lit(EULER_GAMMA)) * j0 + s0);
    Ok((j0, y0))
}

/// `(J1(x), Y1(x))` for `0 < x <= 12`.
pub fn bessel_j1_y1<T: Real>(x: T) -> Result<(T, T)> {
    check(x)?;
    let (_, j1, _, s1) = series(x);
    let pi = T::PI();
    let two = T::lit(2.0);
    // ψ(k+1)+ψ(k+2) = H_k + H_{k+1} - 2γ
    let s1_full = s1 - two * T::lit(EULER_GAMMA) * j1;
    let y1 = -two / (pi * x) + two / pi * (x / two).ln() * j1 - s1_full / pi;
    Ok((j1, y1))
}

/// `(J1, Y1, J1', Y1')` using `Z1' = Z0 - Z1/x`.
pub fn bessel_order1_with_derivs<T: Real>(x: T) -> Result<[T; 4]> {
    let (j0, y0) = bessel_j0_y0(x)?;
    let (j1, y1) = bessel_j1_y1(x)?;
    Ok([j1, y1, j0 - j1 / x, y0 - y1 / x])
}

/// Exponentially scaled `(e^z K0(z), e^z K1(z))` from the large-argument
/// asymptotic series, intended for `z >= 8`.
pub fn bessel_k01_scaled<T: Real>(z: T) -> Result<(T, T)> {
    if !(z >= T::lit(2.0)) || !z.is_finite() {
        return Err(Error::DomainError(z.f64()));
    }
    let one_side = |mu: T| {
        let mut term = T::one();
        let mut sum = T::one();
        let mut k = 1usize;
        loop {
            let kt = T::from_usize_(2 * k - 1);
            let next = term * (mu - kt * kt) / (T::from_usize_(k) * T::lit(8.0) * z);
            if next.abs() >= term.abs() || next.abs() < T::epsilon() * T::lit(0.01) || k > 60 {
                if next.abs() < term.abs() {
                    sum += next;
                }
                break;
            }
            sum += next;
            term = next;
            k += 1;
        }
        sum * (T::PI() / (T::lit(2.0) * z)).sqrt()
    };
    Ok((one_side(T::zero()), one_side(T::lit(4.0))))
}
