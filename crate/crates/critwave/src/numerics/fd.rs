//! Finite-difference derivatives on nonuniform grids.

use crate::scalar::Real;

/// Fornberg weights: `w[d][j]` approximates the `d`-th derivative at `x0`
/// from samples at `xs[j]`, for `d = 0..=m`.
pub fn fornberg_weights<T: Real>(x0: T, xs: &[T], m: usize) -> Vec<Vec<T>> {
    let n = xs.len();
    let mut c = vec![vec![T::zero(); n]; m + 1];
    c[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kt = T::from_usize_(k);
                    c[k][i] = c1 * (kt * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                let kt = T::from_usize_(k);
                c[k][j] = (c4 * c[k][j] - kt * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First and second derivatives at every node from a `width`-point stencil,
/// centred where possible and shifted inwards at the ends.
pub fn derivatives<T: Real>(nodes: &[T], values: &[T], width: usize) -> (Vec<T>, Vec<T>) {
    let n = nodes.len();
    let w = width.min(n).max(3);
    let half = w / 2;
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n {
        let start = i.saturating_sub(half).min(n - w);
        let xs = &nodes[start..start + w];
        let c = fornberg_weights(nodes[i], xs, 2);
        let mut a = T::zero();
        let mut b = T::zero();
        for j in 0..w {
            a += c[1][j] * values[start + j];
            b += c[2][j] * values[start + j];
        }
        d1.push(a);
        d2.push(b);
    }
    (d1, d2)
}
