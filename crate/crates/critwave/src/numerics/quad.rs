//! Composite quadrature on tabulated data and Gauss-Legendre panels for closed forms.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    #[default]
    Trapezoid,
    Simpson,
}

/// `∫ f(y) [y^3] dy` over the span of `nodes` from tabulated values.
pub fn quadrature<T: Real>(nodes: &[T], f: &[T], weighted: bool, rule: Rule) -> Result<T> {
    if nodes.len() != f.len() || nodes.len() < 2 {
        return Err(Error::InvalidInput("quadrature needs matching arrays of length >= 2".into()));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite integrand".into()));
    }
    let g: Vec<T> = if weighted { nodes.iter().zip(f).map(|(&y, &v)| v * y * y * y).collect() } else { f.to_vec() };
    Ok(match rule {
        Rule::Trapezoid => trapezoid(nodes, &g),
        Rule::Simpson => simpson(nodes, &g),
    })
}

fn trapezoid<T: Real>(x: &[T], g: &[T]) -> T {
    let half = T::lit(0.5);
    x.windows(2).zip(g.windows(2)).map(|(x, g)| half * (x[1] - x[0]) * (g[0] + g[1])).sum()
}

/// Nonuniform composite Simpson; an odd trailing interval uses the quadratic
/// through the last three nodes.
fn simpson<T: Real>(x: &[T], g: &[T]) -> T {
    let n = x.len();
    if n == 2 {
        return trapezoid(x, g);
    }
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let mut s = T::zero();
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        s += hs / six * ((two - h1 / h0) * g[i] + hs * hs / (h0 * h1) * g[i + 1] + (two - h0 / h1) * g[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
        let h0 = x1 - x0;
        let h1 = x2 - x1;
        let three = T::lit(3.0);
        s += g[n - 1] * (two * h1 * h1 + three * h0 * h1) / (six * (h0 + h1))
            + g[n - 2] * (h1 * h1 + three * h0 * h1) / (six * h0)
            - g[n - 3] * h1 * h1 * h1 / (six * h0 * (h0 + h1));
    }
    s
}

/// Running trapezoid integral `∫_{x_0}^{x_i} g`.
pub fn cumulative_trapezoid<T: Real>(x: &[T], g: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = T::zero();
    out.push(acc);
    for i in 1..x.len() {
        acc += T::lit(0.5) * (x[i] - x[i - 1]) * (g[i] + g[i - 1]);
        out.push(acc);
    }
    out
}

const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Ten-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let m = T::lit(0.5) * (a + b);
    let r = T::lit(0.5) * (b - a);
    let mut s = T::zero();
    for k in 0..5 {
        let dx = r * T::lit(GL_X[k]);
        s += T::lit(GL_W[k]) * (f(m - dx) + f(m + dx));
    }
    s * r
}

/// Sum of Gauss-Legendre panels over consecutive `edges`.
pub fn integrate_panels<T: Real, F: Fn(T) -> T>(f: &F, edges: &[T]) -> T {
    edges.windows(2).map(|w| gauss_legendre(f, w[0], w[1])).sum()
}

/// `∫_R^∞ f` for integrands decaying at least like `s^{-2}`, via `s = R/u`.
pub fn integrate_tail<T: Real, F: Fn(T) -> T>(f: &F, r: T, panels: usize) -> T {
    let g = |u: T| {
        if u <= T::zero() {
            T::zero()
        } else {
            f(r / u) * r / (u * u)
        }
    };
    let edges: Vec<T> = (0..=panels).map(|i| T::from_usize_(i) / T::from_usize_(panels)).collect();
    integrate_panels(&g, &edges)
}

/// Panel edges on `[0, b]`: uniform panels on `[0, min(1, b)]` then geometric.
pub fn radial_edges<T: Real>(b: T, per_decade: usize) -> Vec<T> {
    let one = T::one();
    let mut e = vec![T::zero()];
    let first = one.min(b);
    for i in 1..=8 {
        e.push(first * T::from_usize_(i) / T::lit(8.0));
    }
    if b > one {
        let decades = b.log10();
        let n = (decades * T::from_usize_(per_decade)).ceil().to_usize().unwrap_or(1).max(1);
        let step = decades / T::from_usize_(n);
        for i in 1..=n {
            e.push(T::lit(10.0).powf(step * T::from_usize_(i)));
        }
        let last = e.len() - 1;
        e[last] = b;
    }
    e
}

/// Geometric edges between `a > 0` and `b`.
pub fn log_edges<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let r = (b / a).ln() / T::from_usize_(n);
    let mut e: Vec<T> = (0..=n).map(|i| a * (r * T::from_usize_(i)).exp()).collect();
    e[0] = a;
    e[n] = b;
    e
}
