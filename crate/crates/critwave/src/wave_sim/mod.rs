//! Method-of-lines solver for the radial equation `u_tt = Δu + u³` in four
//! dimensions, started from the deformed ground state plus a multiple of the
//! unstable eigenfunction, with live extraction of `(λ, b)` and of the mode
//! amplitudes `κ±`, and bisection on the unstable-mode amplitude `d₊`.

mod config;
mod hygiene;
mod modulation;
mod shoot;
mod solver;

pub use config::{DPlus, SimConfig};
pub use hygiene::{compact_bump, energy_drift, finite_speed_leak, solver_hygiene, static_drift, Hygiene};
pub use modulation::{
    cal_e, extract_modulation, modes_from, project_modes, Modulation, ModulationConfig, ProfileFamily,
};
pub use shoot::{
    envelopes, growth_rate, init_data, run_and_bisect, run_trajectory, Bisection, Bump, Envelopes, ExitInfo,
    ExitReason, GrowthFit, InitialData, ModulationTrace, Perturbation, SimContext, TraceRow, Trajectory,
};
pub use solver::{Energy, Integrator, Stencil, WaveGrid, WaveState, CFL_MAX};
