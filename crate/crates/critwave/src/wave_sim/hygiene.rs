use super::solver::{Integrator, Stencil, WaveGrid, WaveState};
use crate::error::Result;

/// Smooth bump `a (1 - x²)⁶`, `x = (r - c)/w`, supported in `[c - w, c + w]`.
pub fn compact_bump(r: f64, a: f64, c: f64, w: f64) -> f64 {
    let x = (r - c) / w;
    if x.abs() >= 1.0 {
        0.0
    } else {
        a * (1.0 - x * x).powi(6)
    }
}

fn ground(r: f64) -> f64 {
    1.0 / (1.0 + r * r / 8.0)
}

/// Diagnostics of the discretization on problems with known answers.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Hygiene {
    /// `sup |u - Q|` over `t ∈ [0, 1]` from static `Q` on `[0, 40]`, with 200 and 400 intervals.
    pub static_drift_coarse: f64,
    pub static_drift_fine: f64,
    /// `log₂` of their ratio; the stencil order is 4.
    pub static_order: f64,
    /// Relative energy change of a `10⁻³` pulse after `10⁴` RK4 steps at `h = 0.05`.
    pub energy_drift_rel: f64,
    /// `max |u|` beyond `R₀ + t` for data supported in `r ≤ R₀`.
    pub leak: f64,
}

pub fn static_drift(n: usize, stencil: Stencil) -> Result<f64> {
    let grid = WaveGrid::with_stencil(40.0, n, stencil)?;
    let mut st = WaveState::sample(grid, |r| (ground(r), 0.0), 0.5, Integrator::Rk4)?;
    let dt = 1.0 / st.dt_max().recip().ceil();
    let mut worst: f64 = 0.0;
    while st.t < 1.0 - 1e-12 {
        st.advance(dt)?;
        let d = st.grid.r.iter().zip(&st.u).map(|(&r, &u)| (u - ground(r)).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok(worst)
}

pub fn energy_drift(stencil: Stencil) -> Result<f64> {
    let grid = WaveGrid::with_stencil(300.0, 6000, stencil)?;
    let mut st = WaveState::sample(grid, |r| (compact_bump(r, 1e-3, 10.0, 6.0), 0.0), 0.5, Integrator::Rk4)?;
    let e0 = st.energy().total;
    let dt = st.dt_max();
    for _ in 0..10_000 {
        st.advance(dt)?;
    }
    Ok(((st.energy().total - e0) / e0).abs())
}

pub fn finite_speed_leak(stencil: Stencil) -> Result<f64> {
    let (r0, t_end) = (8.0, 6.0);
    let grid = WaveGrid::with_stencil(30.0, 2400, stencil)?;
    let mut st = WaveState::sample(grid, |r| (compact_bump(r, 0.1, 4.0, r0 - 4.0), 0.0), 0.5, Integrator::Rk4)?;
    let dt = st.dt_max();
    for _ in 0..(t_end / dt).round() as usize {
        st.advance(dt)?;
    }
    Ok(st.grid.r.iter().zip(&st.u).filter(|(&r, _)| r > r0 + st.t).map(|(_, u)| u.abs()).fold(0.0, f64::max))
}

/// All three checks for the default stencil, run concurrently.
pub fn solver_hygiene() -> Result<Hygiene> {
    let s = Stencil::Central4;
    let ((coarse, fine), (energy, leak)) = rayon::join(
        || rayon::join(|| static_drift(200, s), || static_drift(400, s)),
        || rayon::join(|| energy_drift(s), || finite_speed_leak(s)),
    );
    let (coarse, fine) = (coarse?, fine?);
    Ok(Hygiene {
        static_drift_coarse: coarse,
        static_drift_fine: fine,
        static_order: (coarse / fine).log2(),
        energy_drift_rel: energy?,
        leak: leak?,
    })
}
