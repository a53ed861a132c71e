//! The quadratic form `B = -Δ + W` with `W = 2V + (3/2) r V'`: index
//! counting, decay-selected inversions, the 2×2 Gram matrix and Hardy-type
//! spot checks.

mod gram;
mod hardy;
mod invert;

pub use gram::{gram_matrix, GramConfig, GramMatrix};
pub use hardy::{hardy_spot_check, test_family, HardyReport, HardyRow, TestFunction};
pub use invert::{invert_b, phi_source, Decay, Inversion, InversionConfig};

use crate::error::{Error, Result};
use crate::groundstate::{InvPoly, LAUNCH_Y0, W, W_HAT};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::{bessel_order1_with_derivs, find_root, RadialFunction, RadialGrid, RootMethod};
use crate::scalar::Real;
use crate::spectral::apply_with_potential;

/// `Bu = -Δu + W u`.
pub fn apply_b<T: Real>(u: &RadialFunction<T>) -> Result<RadialFunction<T>> {
    apply_with_potential(u, crate::groundstate::w)
}

/// Potential used by the direct zero count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Potential {
    W,
    /// `Ŵ = -(3/2) r² (1 + r²/8)^{-3}`, which differs from `W` by `6 (1 + r²/8)^{-3} > 0`.
    WHat,
    Zero,
}

impl Potential {
    fn poly(self) -> InvPoly<4> {
        match self {
            Potential::W => W,
            Potential::WHat => W_HAT,
            Potential::Zero => InvPoly([0.0; 4]),
        }
    }
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct IndexReport {
    pub zero_count: usize,
    /// Zero locations in `r`.
    pub zeros: Vec<f64>,
    /// Direct route: value of `U` at the end of the grid.
    pub far_value: Option<f64>,
    /// Bessel route: coefficients of `Ũ = C1 J1(aτ) + C2 Y1(aτ)`.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// `τ Ũ(τ)` at `τ = 1e-3` and `τ = 5e-4`.
    pub k_origin: Option<f64>,
    pub k_origin_half: Option<f64>,
    /// `-2 C2 / (π a)`, the exact limit of `τ Ũ(τ)`.
    pub k_exact: Option<f64>,
    pub k_nonzero: bool,
    /// `(Ũ(1), Ũ'(1))` after the solve.
    pub boundary: Option<(f64, f64)>,
    /// Zeros of `Ũ` in `τ`.
    pub zeros_tau: Vec<f64>,
}

fn zeros_of<T: Real>(u: &RadialFunction<T>) -> Vec<f64> {
    let y = u.nodes();
    let v = u.values();
    let mut out = Vec::new();
    for i in 0..y.len() - 1 {
        if v[i] == T::zero() {
            out.push(y[i].f64());
        } else if v[i].signum() != v[i + 1].signum() && v[i + 1] != T::zero() {
            let tol = (y[i + 1] - y[i]) * T::lit(1e-10);
            let z = find_root(|x| u.eval(x), y[i], y[i + 1], tol, RootMethod::Secant).unwrap_or(y[i]);
            out.push(z.f64());
        }
    }
    out
}

/// Integrate `BU = 0` (with the chosen potential), `U(0) = 1`, `U'(0) = 0`, and count sign changes.
pub fn count_index_direct<T: Real>(grid: &RadialGrid<T>, pot: Potential) -> Result<IndexReport> {
    let p = pot.poly();
    let (p0, p2) = p.taylor2();
    let a2 = p0 / 8.0;
    let a4 = (p0 * a2 + p2) / 24.0;
    let y0 = T::lit(LAUNCH_Y0);
    if grid.r_min() < y0 {
        return Err(Error::InvalidInput("index grid must start at the launch radius".into()));
    }
    let y2 = y0 * y0;
    let u0 = T::one() + T::lit(a2) * y2 + T::lit(a4) * y2 * y2;
    let d0 = T::lit(2.0 * a2) * y0 + T::lit(4.0 * a4) * y2 * y0;
    let opts = OdeOptions::with_tol(
        T::lit(1e-12).max(T::epsilon() * T::lit(100.0)),
        T::lit(1e-30).max(T::min_positive_value()),
    );
    let out = integrate(
        |y, s: &[T; 2]| [s[1], -T::lit(3.0) * s[1] / y + p.eval(y)[0] * s[0]],
        y0,
        [u0, d0],
        grid.nodes(),
        &opts,
    )?;
    let (values, derivs): (Vec<T>, Vec<T>) = out.iter().map(|s| (s[0], s[1])).unzip();
    let u = RadialFunction::new(grid.clone(), values, derivs)?;
    let zeros = zeros_of(&u);
    Ok(IndexReport {
        zero_count: zeros.len(),
        zeros,
        far_value: Some(u.values()[u.values().len() - 1].f64()),
        ..Default::default()
    })
}

/// Tabulated `U` from the direct route (for CSV output).
pub fn direct_solution<T: Real>(grid: &RadialGrid<T>, pot: Potential) -> Result<RadialFunction<T>> {
    let p = pot.poly();
    let (p0, p2) = p.taylor2();
    let a2 = p0 / 8.0;
    let a4 = (p0 * a2 + p2) / 24.0;
    let launch =
        crate::numerics::SeriesLaunch::regular(T::lit(LAUNCH_Y0), [1.0, 0.0, a2, 0.0, a4].map(T::lit).to_vec());
    crate::numerics::integrate_radial_ode(
        |y, u, du| -T::lit(3.0) * du / y + p.eval(y)[0] * u,
        &launch,
        grid,
        &OdeOptions::with_tol(
            T::lit(1e-12).max(T::epsilon() * T::lit(100.0)),
            T::lit(1e-30).max(T::min_positive_value()),
        ),
    )
}

/// `a = 4√6`, the Bessel argument scale of the reduced equation.
pub fn bessel_scale<T: Real>() -> T {
    T::lit(4.0) * T::lit(6.0).sqrt()
}

/// Map `τ ∈ (0, 1]` to `r = √(8(τ⁻² - 1))`.
pub fn tau_to_r(tau: f64) -> f64 {
    (8.0 * (1.0 / (tau * tau) - 1.0)).sqrt()
}

/// Solve `Ũ(1) = 0`, `Ũ'(1) = -8` in the Bessel basis and count zeros of `Ũ` on `(0, 1)`.
pub fn count_index_bessel<T: Real>() -> Result<IndexReport> {
    let a = bessel_scale::<T>();
    let [j1, y1, dj1, dy1] = bessel_order1_with_derivs(a)?;
    // [J1   Y1 ] [C1]   [ 0]
    // [aJ1' aY1'] [C2] = [-8]
    let det = a * (j1 * dy1 - dj1 * y1);
    if !(det.abs() > T::epsilon() * T::lit(1e3)) {
        return Err(Error::SingularBesselSystem { det: det.f64() });
    }
    let rhs = -T::lit(8.0);
    let c1 = -y1 * rhs / det;
    let c2 = j1 * rhs / det;
    let ut = |tau: T| -> Result<(T, T)> {
        let [j, y, dj, dy] = bessel_order1_with_derivs(a * tau)?;
        Ok((c1 * j + c2 * y, a * (c1 * dj + c2 * dy)))
    };
    let (b0, b1) = ut(T::one())?;
    let n = 20_000usize;
    let lo = T::lit(1e-4);
    let hi = T::one() - T::lit(1e-6);
    let mut zeros_tau = Vec::new();
    let mut prev_t = lo;
    let mut prev = ut(lo)?.0;
    for i in 1..=n {
        let t = lo + (hi - lo) * T::from_usize_(i) / T::from_usize_(n);
        let v = ut(t)?.0;
        if v.signum() != prev.signum() {
            let z = crate::numerics::find_root_with(|x| Ok(ut(x)?.0), prev_t, t, T::lit(1e-13), RootMethod::Secant)?;
            zeros_tau.push(z.f64());
        }
        prev = v;
        prev_t = t;
    }
    let k1 = T::lit(1e-3) * ut(T::lit(1e-3))?.0;
    let k2 = T::lit(5e-4) * ut(T::lit(5e-4))?.0;
    let k_exact = -T::lit(2.0) * c2 / (T::PI() * a);
    let mut zeros: Vec<f64> = zeros_tau.iter().map(|&t| tau_to_r(t)).collect();
    zeros.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(IndexReport {
        zero_count: zeros_tau.len(),
        zeros,
        far_value: None,
        c1: Some(c1.f64()),
        c2: Some(c2.f64()),
        k_origin: Some(k1.f64()),
        k_origin_half: Some(k2.f64()),
        k_exact: Some(k_exact.f64()),
        k_nonzero: k1 != T::zero() && k_exact.abs() > T::epsilon(),
        boundary: Some((b0.f64(), b1.f64())),
        zeros_tau,
    })
}

/// Settings of the full pipeline.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CoercivityConfig {
    pub shooting: crate::spectral::ShootingConfig,
    pub normalization: crate::spectral::Normalization,
    /// Outer radius and node count of the direct index grid.
    pub index_r_max: f64,
    pub index_nodes: usize,
    pub psi_inversion: InversionConfig,
    pub phi_inversion: InversionConfig,
    pub gram: GramConfig,
    pub hardy_radius: f64,
}

impl Default for CoercivityConfig {
    fn default() -> Self {
        Self {
            shooting: Default::default(),
            normalization: crate::spectral::Normalization::Origin,
            index_r_max: 1000.0,
            index_nodes: 6000,
            psi_inversion: InversionConfig::psi(),
            phi_inversion: InversionConfig::phi(),
            gram: Default::default(),
            hardy_radius: 10.0,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CoercivityReport {
    pub zeta: f64,
    /// Direct count with `W`.
    pub index_w: IndexReport,
    /// Direct count with `Ŵ`.
    pub index_w_hat: IndexReport,
    pub index_bessel: IndexReport,
    pub gram: GramMatrix,
    pub psi_inversion: InversionSummary,
    pub phi_inversion: InversionSummary,
    pub hardy: HardyReport,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct InversionSummary {
    pub u0: f64,
    pub far_constant: f64,
    pub flatness: f64,
    pub log_slope: f64,
    pub log_intercept: f64,
    pub residual_rel: f64,
}

impl<T: Real> From<&Inversion<T>> for InversionSummary {
    fn from(i: &Inversion<T>) -> Self {
        Self {
            u0: i.u0.f64(),
            far_constant: i.far_constant,
            flatness: i.flatness,
            log_slope: i.log_fit.0,
            log_intercept: i.log_fit.1,
            residual_rel: i.residual_rel,
        }
    }
}

/// Tabulated outputs kept alongside the report.
pub struct CoercivityTables<T> {
    pub u_direct: RadialFunction<T>,
    pub inv_psi: Inversion<T>,
    pub inv_phi: Inversion<T>,
}

/// Run eigenpair, index counts, both inversions, the Gram matrix and the Hardy checks.
/// The independent solves run on the current rayon pool.
pub fn run_coercivity<T: Real>(cfg: &CoercivityConfig) -> Result<(CoercivityReport, CoercivityTables<T>)> {
    let index_grid = RadialGrid::geometric(T::lit(LAUNCH_Y0), T::lit(cfg.index_r_max), cfg.index_nodes)?;
    let ((psi_side, phi_side), (index, hardy)) = rayon::join(
        || {
            rayon::join(
                || -> Result<_> {
                    let ep = crate::spectral::solve_eigenpair::<T>(&cfg.shooting)?.normalized(cfg.normalization);
                    let inv = invert_b(&ep.psi, Decay::InverseSquare, &cfg.psi_inversion)?;
                    Ok((ep, inv))
                },
                || -> Result<_> {
                    let c = &cfg.phi_inversion;
                    let grid = RadialGrid::geometric(T::lit(LAUNCH_Y0), T::lit(c.r_match), c.nodes)?;
                    invert_b(&phi_source(grid), Decay::PHI, c)
                },
            )
        },
        || {
            rayon::join(
                || -> Result<_> {
                    Ok((
                        count_index_direct(&index_grid, Potential::W)?,
                        count_index_direct(&index_grid, Potential::WHat)?,
                        count_index_bessel::<T>()?,
                        direct_solution(&index_grid, Potential::W)?,
                    ))
                },
                || hardy_spot_check(&test_family(), &[0.5, 1.0, 2.0], cfg.hardy_radius),
            )
        },
    );
    let (ep, inv_psi) = psi_side?;
    let inv_phi = phi_side?;
    let (index_w, index_w_hat, index_bessel, u_direct) = index?;
    let gram = gram_matrix(&ep, &inv_psi, &inv_phi, &cfg.gram)?;
    let report = CoercivityReport {
        zeta: ep.zeta.f64(),
        index_w,
        index_w_hat,
        index_bessel,
        gram,
        psi_inversion: (&inv_psi).into(),
        phi_inversion: (&inv_phi).into(),
        hardy,
    };
    Ok((report, CoercivityTables { u_direct, inv_psi, inv_phi }))
}
