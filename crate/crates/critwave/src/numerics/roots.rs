use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootMethod {
    #[default]
    Bisection,
    /// Regula falsi with the Illinois modification; keeps the bracket.
    Secant,
}

pub const MAX_ITER: usize = 400;

/// Root of `f` on `[lo, hi]` to absolute tolerance `tol`.
pub fn find_root<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T, method: RootMethod) -> Result<T> {
    find_root_with(|x| Ok(f(x)), lo, hi, tol, method)
}

/// Like [`find_root`] for fallible functions (e.g. shooting runs).
pub fn find_root_with<T, F>(mut f: F, lo: T, hi: T, tol: T, method: RootMethod) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange { lo: a.f64(), hi: b.f64() });
    }
    let half = T::lit(0.5);
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        if (b - a).abs() <= tol {
            return Ok(half * (a + b));
        }
        let x = match method {
            RootMethod::Bisection => half * (a + b),
            RootMethod::Secant => {
                let x = (a * fb - b * fa) / (fb - fa);
                if x > a && x < b {
                    x
                } else {
                    half * (a + b)
                }
            }
        };
        let fx = f(x)?;
        if fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= half;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= half;
            }
            side = 1;
        }
        if method == RootMethod::Secant {
            // Terminate once the last update lands within tol of the other end.
            let w = (b - a).abs();
            if w <= tol {
                return Ok(x);
            }
            let xs = [a, b];
            if xs.iter().any(|&e| (e - x).abs() <= tol * half) {
                let probe = if side == -1 { x + tol } else { x - tol };
                if probe > a && probe < b {
                    let fp = f(probe)?;
                    if fp.signum() != fx.signum() {
                        return Ok(x);
                    }
                }
            }
        }
    }
    Err(Error::MaxIterations(MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2() {
        for m in [RootMethod::Bisection, RootMethod::Secant] {
            let r = find_root(|x: f64| x * x - 2.0, 1.0, 2.0, 1e-12, m).unwrap();
            assert!((r - 2f64.sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn no_sign_change() {
        let e = find_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10, RootMethod::Bisection);
        assert!(matches!(e, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn too_tight_tolerance_hits_iteration_cap() {
        let e = find_root(|x: f64| x - 0.3, 0.0, 1.0, 0.0, RootMethod::Bisection);
        assert!(matches!(e, Err(Error::MaxIterations(_)) | Ok(_)));
    }
}
