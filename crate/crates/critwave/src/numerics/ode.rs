//! Adaptive Dormand-Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// First trial step; `None` picks one from the span.
    pub h0: Option<T>,
    /// Smallest admissible step relative to `max(|x|, 1)`.
    pub h_min_rel: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            rtol: T::lit(1e-11).max(eps * T::lit(100.0)),
            atol: T::lit(1e-14).max(eps * T::lit(10.0)),
            h0: None,
            h_min_rel: eps * T::lit(4.0),
            max_steps: 2_000_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(rtol: T, atol: T) -> Self {
        Self { rtol, atol, ..Self::default() }
    }
}

// Dormand-Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrate `y' = f(x, y)` from `(x0, y0)` and return the state at every station.
///
/// Stations must be monotone and lie on one side of `x0`; integration may run
/// in either direction. A station equal to `x0` returns `y0`.
pub fn integrate<T, const N: usize, F>(
    mut f: F,
    x0: T,
    y0: [T; N],
    stations: &[T],
    opts: &OdeOptions<T>,
) -> Result<Vec<[T; N]>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let mut out = Vec::with_capacity(stations.len());
    if stations.is_empty() {
        return Ok(out);
    }
    let last = stations[stations.len() - 1];
    let dir = if last >= x0 { T::one() } else { -T::one() };
    if stations.windows(2).any(|w| (w[1] - w[0]) * dir < T::zero()) || (stations[0] - x0) * dir < T::zero() {
        return Err(Error::InvalidInput("stations must be monotone away from x0".into()));
    }
    let span = (last - x0).abs();
    let mut h = match opts.h0 {
        Some(h) => h.abs(),
        None => {
            let scale = x0.abs().max(span * T::lit(1e-3));
            (scale * T::lit(1e-3)).max(T::min_positive_value())
        }
    };
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut steps = 0usize;
    let c: [T; 7] = C.map(T::lit);
    let a: [[T; 6]; 7] = A.map(|r| r.map(T::lit));
    let b5: [T; 7] = B5.map(T::lit);
    let b4: [T; 7] = B4.map(T::lit);

    for &xs in stations {
        while (xs - x) * dir > T::zero() {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepSizeUnderflow { at: x.f64() });
            }
            let remaining = (xs - x).abs();
            let clipped = h >= remaining;
            let hs = if clipped { remaining } else { h };
            let hmin = opts.h_min_rel * x.abs().max(T::one());
            if hs < hmin && !clipped {
                return Err(Error::StepSizeUnderflow { at: x.f64() });
            }
            let hd = hs * dir;
            let mut k = [[T::zero(); N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for j in 0..s {
                        acc += a[s][j] * k[j][i];
                    }
                    *v += hd * acc;
                }
                k[s] = f(x + c[s] * hd, &ys);
            }
            let mut y_new = y;
            let mut err = T::zero();
            for i in 0..N {
                let mut s5 = T::zero();
                let mut s4 = T::zero();
                for s in 0..7 {
                    s5 += b5[s] * k[s][i];
                    s4 += b4[s] * k[s][i];
                }
                y_new[i] = y[i] + hd * s5;
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let e = hd * (s5 - s4) / sc;
                err += e * e;
            }
            err = (err / T::from_usize_(N)).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if hs <= hmin {
                    return Err(Error::NonFiniteState { at: x.f64() });
                }
                h = hs * T::lit(0.1);
                if h < hmin {
                    return Err(Error::NonFiniteState { at: x.f64() });
                }
                continue;
            }
            if err <= T::one() {
                x = if clipped { xs } else { x + hd };
                y = y_new;
                k1 = k[6];
                let fac = if err == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                };
                // A clipped step says nothing about the natural step size.
                h = if clipped { h.max(hs * fac) } else { hs * fac };
            } else {
                let fac = (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.1));
                h = hs * fac;
                if h < hmin {
                    return Err(Error::StepSizeUnderflow { at: x.f64() });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let st: Vec<f64> = (1..=30).map(|i| i as f64 * 0.1).collect();
        let out = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], &st, &OdeOptions::default()).unwrap();
        assert!((out[29][0] - 3f64.sin()).abs() < 1e-9);
        assert!((out[29][1] - 3f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn backward_direction() {
        let out = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], &[0.5, 0.0], &OdeOptions::default()).unwrap();
        assert!((out[1][0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn blowup_is_reported() {
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], &[2.0], &OdeOptions::default());
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. }) | Err(Error::NonFiniteState { .. })));
    }
}
