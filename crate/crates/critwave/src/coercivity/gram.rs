use crate::error::{Error, Result};
use crate::groundstate::{phi, LAUNCH_Y0};
use crate::numerics::quad::{quadrature, Rule};
use crate::numerics::RadialGrid;
use crate::scalar::Real;
use crate::spectral::{EigenPair, Normalization};

use super::Inversion;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GramConfig {
    /// Truncation radius of ψ-weighted products.
    pub psi_cut: f64,
    /// Base radius `M` of the two-point tail fit for `(B⁻¹Φ, Φ)`.
    pub tail_m: f64,
    /// Nodes per product grid.
    pub product_nodes: usize,
    /// Allowed relative disagreement between `K(M, 2M)` and `K(2M, 4M)`.
    pub tail_tolerance: f64,
}

impl Default for GramConfig {
    fn default() -> Self {
        Self { psi_cut: 18.0, tail_m: 500.0, product_nodes: 20_000, tail_tolerance: 0.2 }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GramMatrix {
    /// `(B⁻¹ψ, ψ)`.
    pub b11: f64,
    /// `(B⁻¹Φ, ψ)`.
    pub b12: f64,
    /// `(B⁻¹ψ, Φ)` with its `r⁻²` tail added; equals `b12` up to discretization.
    pub b21: f64,
    /// `(B⁻¹Φ, Φ)` after removing `K ln M / M²`.
    pub b22: f64,
    pub det: f64,
    /// `K` from `I(M)`, `I(2M)` and the check value from `I(2M)`, `I(4M)`.
    pub k_tail: f64,
    pub k_tail_check: f64,
    /// Three-point fit `I(M) = I∞ + K ln M/M² + L/M²`.
    pub b22_richardson: f64,
    pub k_richardson: f64,
    /// `b12² / (b11 b22)`, independent of the scale of ψ.
    pub ratio: f64,
    /// `|b12 - b21| / |b12|`.
    pub symmetry_rel: f64,
    pub normalization: Normalization,
}

fn product<T: Real>(a: impl Fn(T) -> T, b: impl Fn(T) -> T, r: f64, n: usize) -> Result<f64> {
    let grid = RadialGrid::geometric(T::lit(LAUNCH_Y0), T::lit(r), n)?;
    let y = grid.nodes();
    let f: Vec<T> = y.iter().map(|&s| a(s) * b(s)).collect();
    // The launch segment [0, y0] contributes O(y0⁴).
    let head = f[0] * y[0].powi(4) / T::lit(4.0);
    Ok((quadrature(y, &f, true, Rule::Trapezoid)? + head).f64())
}

/// Assemble the 2×2 matrix of `B⁻¹` on `span{ψ, Φ}`.
pub fn gram_matrix<T: Real>(
    psi: &EigenPair<T>,
    inv_psi: &Inversion<T>,
    inv_phi: &Inversion<T>,
    cfg: &GramConfig,
) -> Result<GramMatrix> {
    let m = cfg.tail_m;
    let phi_table = inv_phi.u.grid().r_max().f64();
    if phi_table < 4.0 * m {
        return Err(Error::GridTooShort { r_max: phi_table, needed: 4.0 * m });
    }
    let n = cfg.product_nodes;
    let ps = |y: T| psi.psi.eval(y);
    let up = |y: T| inv_psi.u.eval(y);
    let uf = |y: T| inv_phi.u.eval(y);

    let b11 = product(up, ps, cfg.psi_cut, n)?;
    let b12 = product(uf, ps, cfg.psi_cut, n)?;

    let rp = inv_psi.u.grid().r_max();
    let c = (rp * rp * inv_psi.u.eval(rp)).f64();
    let rpf = rp.f64();
    // ∫_R^∞ (c/r²)(-384/r⁴) r³ dr
    let b21 = product(up, phi, rpf, n)? - 384.0 * c / (2.0 * rpf * rpf);

    let i1 = product(uf, phi, m, n)?;
    let i2 = product(uf, phi, 2.0 * m, n)?;
    let i4 = product(uf, phi, 4.0 * m, n)?;
    let g = |x: f64| x.ln() / (x * x);
    let k_tail = (i2 - i1) / (g(2.0 * m) - g(m));
    let k_tail_check = (i4 - i2) / (g(4.0 * m) - g(2.0 * m));
    // Disagreement is measured against the larger estimate.
    if !((k_tail - k_tail_check).abs() <= cfg.tail_tolerance * k_tail.abs().max(k_tail_check.abs())) {
        return Err(Error::TailFitUnstable { k_m: k_tail, k_2m: k_tail_check });
    }
    let b22 = i1 - k_tail * g(m);

    let (b22_richardson, k_richardson) = richardson(m, [i1, i2, i4]);

    let det = b11 * b22 - b12 * b12;
    Ok(GramMatrix {
        b11,
        b12,
        b21,
        b22,
        det,
        k_tail,
        k_tail_check,
        b22_richardson,
        k_richardson,
        ratio: b12 * b12 / (b11 * b22),
        symmetry_rel: (b12 - b21).abs() / b12.abs(),
        normalization: psi.normalization,
    })
}

/// Solve `I(M_j) = I∞ + K ln M_j / M_j² + L / M_j²` for `M_j = M, 2M, 4M`.
fn richardson(m: f64, i: [f64; 3]) -> (f64, f64) {
    let ms = [m, 2.0 * m, 4.0 * m];
    let a: Vec<[f64; 3]> = ms.iter().map(|&x| [1.0, x.ln() / (x * x), 1.0 / (x * x)]).collect();
    let det3 = |c: [[f64; 3]; 3]| {
        c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
    };
    let base = [a[0], a[1], a[2]];
    let d = det3(base);
    let col = |k: usize| {
        let mut c = base;
        for r in 0..3 {
            c[r][k] = i[r];
        }
        det3(c) / d
    };
    (col(0), col(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_exact_model() {
        let (inf, k, l) = (-574.0, -36864.0, 1234.0);
        let f = |x: f64| inf + k * x.ln() / (x * x) + l / (x * x);
        let (a, b) = richardson(500.0, [f(500.0), f(1000.0), f(2000.0)]);
        assert!((a - inf).abs() < 1e-9);
        assert!((b - k).abs() < 1e-4 * k.abs());
    }
}
