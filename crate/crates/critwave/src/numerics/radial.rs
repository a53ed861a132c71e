use super::grid::RadialGrid;
use super::ode::{integrate, OdeOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Asymptotic law used to extend a tabulated function beyond its last node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailLaw {
    /// Hold the last value.
    Unspecified,
    /// `y^exponent`.
    Power { exponent: f64 },
    /// `y^exponent (log y)^log_exponent`.
    PowerLog { exponent: f64, log_exponent: f64 },
    /// `exp(-rate y)`.
    Exponential { rate: f64 },
    /// Identically zero beyond the table.
    Zero,
}

/// Values and first derivatives on a radial grid, interpolated by cubic Hermite.
#[derive(Debug, Clone)]
pub struct RadialFunction<T> {
    grid: RadialGrid<T>,
    values: Vec<T>,
    derivs: Vec<T>,
    tail: TailLaw,
}

impl<T: Real> RadialFunction<T> {
    pub fn new(grid: RadialGrid<T>, values: Vec<T>, derivs: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() || derivs.len() != grid.len() {
            return Err(Error::InvalidInput("value/derivative length mismatch".into()));
        }
        Ok(Self { grid, values, derivs, tail: TailLaw::Unspecified })
    }

    /// Tabulate closed forms `f -> (value, derivative)`.
    pub fn from_fn(grid: RadialGrid<T>, f: impl Fn(T) -> (T, T)) -> Self {
        let (values, derivs) = grid.nodes().iter().map(|&y| f(y)).unzip();
        Self { grid, values, derivs, tail: TailLaw::Unspecified }
    }

    pub fn with_tail(mut self, tail: TailLaw) -> Self {
        self.tail = tail;
        self
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }
    pub fn nodes(&self) -> &[T] {
        self.grid.nodes()
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn derivs(&self) -> &[T] {
        &self.derivs
    }
    pub fn tail(&self) -> TailLaw {
        self.tail
    }

    /// Linear combination `a*self + c*other` on the same grid.
    pub fn axpy(&self, a: T, other: &Self, c: T) -> Result<Self> {
        if other.grid.len() != self.grid.len() {
            return Err(Error::InvalidInput("grid mismatch".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&u, &v)| a * u + c * v).collect();
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(&u, &v)| a * u + c * v).collect();
        Ok(Self { grid: self.grid.clone(), values, derivs, tail: self.tail })
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| a * v).collect(),
            derivs: self.derivs.iter().map(|&v| a * v).collect(),
            tail: self.tail,
        }
    }

    /// Value at `y`. Below the first node an even (regular) continuation is used.
    pub fn eval(&self, y: T) -> T {
        self.eval_both(y).0
    }

    pub fn eval_deriv(&self, y: T) -> T {
        self.eval_both(y).1
    }

    pub fn eval_both(&self, y: T) -> (T, T) {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let y0 = nodes[0];
        let two = T::lit(2.0);
        if y < y0 {
            let (u0, d0) = (self.values[0], self.derivs[0]);
            if y0 == T::zero() {
                return (u0, d0);
            }
            let a = d0 / (two * y0);
            return (u0 + a * (y * y - y0 * y0), two * a * y);
        }
        let r = nodes[n - 1];
        if y > r {
            let v = self.values[n - 1];
            return match self.tail {
                TailLaw::Unspecified => (v, T::zero()),
                TailLaw::Zero => (T::zero(), T::zero()),
                TailLaw::Power { exponent } => {
                    let p = T::lit(exponent);
                    let f = (y / r).powf(p);
                    (v * f, v * f * p / y)
                }
                TailLaw::PowerLog { exponent, log_exponent } => {
                    let p = T::lit(exponent);
                    let q = T::lit(log_exponent);
                    let f = (y / r).powf(p) * (y.ln() / r.ln()).powf(q);
                    (v * f, v * f * (p + q / y.ln()) / y)
                }
                TailLaw::Exponential { rate } => {
                    let k = T::lit(rate);
                    let f = (-(k * (y - r))).exp();
                    (v * f, -k * v * f)
                }
            };
        }
        let i = self.grid.locate(y);
        hermite(nodes[i], nodes[i + 1], self.values[i], self.values[i + 1], self.derivs[i], self.derivs[i + 1], y)
    }
}

/// Cubic Hermite interpolation on `[x0, x1]`, returning value and derivative.
pub fn hermite<T: Real>(x0: T, x1: T, u0: T, u1: T, d0: T, d1: T, x: T) -> (T, T) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + t;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    let v = h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1;
    let six = T::lit(6.0);
    let dh00 = six * t2 - six * t;
    let dh10 = three * t2 - T::lit(4.0) * t + T::one();
    let dh01 = six * t - six * t2;
    let dh11 = three * t2 - two * t;
    let dv = (dh00 * u0 + dh01 * u1) / h + dh10 * d0 + dh11 * d1;
    (v, dv)
}

/// Generalized Frobenius start `u = sum c_k y^(p+k) + log(y) sum d_k y^(p+k)`.
#[derive(Debug, Clone)]
pub struct SeriesLaunch<T> {
    pub y0: T,
    pub lowest_power: i32,
    pub coeffs: Vec<T>,
    pub log_coeffs: Vec<T>,
}

impl<T: Real> SeriesLaunch<T> {
    /// Regular power series `sum c_k y^k`.
    pub fn regular(y0: T, coeffs: Vec<T>) -> Self {
        Self { y0, lowest_power: 0, coeffs, log_coeffs: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().max(self.log_coeffs.len()).saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y0 > T::zero()) || !self.y0.is_finite() {
            return Err(Error::InvalidInput("launch radius must be positive".into()));
        }
        if self.order() < 2 {
            return Err(Error::InvalidInput("series launch needs order >= 2".into()));
        }
        if self.coeffs.iter().chain(&self.log_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite launch coefficient".into()));
        }
        Ok(())
    }

    /// Value and derivative of the truncated expansion at `y > 0`.
    pub fn eval(&self, y: T) -> (T, T) {
        let ly = y.ln();
        let mut u = T::zero();
        let mut du = T::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            let p = self.lowest_power + k as i32;
            u += c * y.powi(p);
            du += c * T::lit(p as f64) * y.powi(p - 1);
        }
        for (k, &d) in self.log_coeffs.iter().enumerate() {
            let p = self.lowest_power + k as i32;
            u += d * ly * y.powi(p);
            du += d * (T::lit(p as f64) * ly + T::one()) * y.powi(p - 1);
        }
        (u, du)
    }
}

/// Integrate `u'' = rhs(y, u, u')` from a series launch across all grid nodes.
///
/// Nodes below the launch radius take values from the series itself, which
/// requires a regular expansion there.
pub fn integrate_radial_ode<T, F>(
    mut rhs: F,
    launch: &SeriesLaunch<T>,
    grid: &RadialGrid<T>,
    opts: &OdeOptions<T>,
) -> Result<RadialFunction<T>>
where
    T: Real,
    F: FnMut(T, T, T) -> T,
{
    launch.validate()?;
    let nodes = grid.nodes();
    let split = nodes.partition_point(|&y| y < launch.y0);
    let mut values = Vec::with_capacity(nodes.len());
    let mut derivs = Vec::with_capacity(nodes.len());
    for &y in &nodes[..split] {
        if launch.lowest_power < 0 || !launch.log_coeffs.is_empty() {
            return Err(Error::InvalidInput("singular launch cannot fill nodes below y0".into()));
        }
        let (u, du) = if y == T::zero() {
            (launch.coeffs[0], if launch.coeffs.len() > 1 { launch.coeffs[1] } else { T::zero() })
        } else {
            launch.eval(y)
        };
        values.push(u);
        derivs.push(du);
    }
    let (u0, d0) = launch.eval(launch.y0);
    let out = integrate(|y, s: &[T; 2]| [s[1], rhs(y, s[0], s[1])], launch.y0, [u0, d0], &nodes[split..], opts)?;
    for s in out {
        values.push(s[0]);
        derivs.push(s[1]);
    }
    RadialFunction::new(grid.clone(), values, derivs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution() {
        let g = RadialGrid::<f64>::geometric(1e-3, 50.0, 200).unwrap();
        let l = SeriesLaunch::regular(1e-3, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let u = integrate_radial_ode(|y, _, du| -3.0 * du / y, &l, &g, &OdeOptions::default()).unwrap();
        assert!(u.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn sine_solution() {
        let g = RadialGrid::<f64>::uniform(0.0, 3.0, 301).unwrap();
        let l = SeriesLaunch::regular(1e-3, vec![0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0]);
        let u = integrate_radial_ode(|_, u, _| -u, &l, &g, &OdeOptions::default()).unwrap();
        assert!((u.values()[300] - 3f64.sin()).abs() < 1e-9);
        assert!((u.eval(1.2345) - 1.2345f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| (x * x * x - 2.0 * x, 3.0 * x * x - 2.0);
        let (a, b) = (0.5, 1.5);
        let (v, d) = hermite(a, b, f(a).0, f(b).0, f(a).1, f(b).1, 0.8);
        assert!((v - f(0.8).0).abs() < 1e-14 && (d - f(0.8).1).abs() < 1e-13);
    }
}
