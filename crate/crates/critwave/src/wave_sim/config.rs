use std::str::FromStr;

use super::solver::{Integrator, Stencil, CFL_MAX};
use crate::error::{Error, Result};

/// Unstable-mode amplitude: fixed, or found by bisection.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum DPlus {
    Auto,
    Value(f64),
}

impl FromStr for DPlus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(DPlus::Auto),
            v => v
                .parse()
                .map(DPlus::Value)
                .map_err(|_| Error::InvalidInput(format!("dplus: expected a number or 'auto', got '{v}'"))),
        }
    }
}

/// Simulation parameters. Text form: one `key = value` per line, `#` comments.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SimConfig {
    pub b0: f64,
    pub dplus: DPlus,
    /// Number of grid intervals.
    pub nodes: usize,
    /// `r_max` in units of `B₁(b0)`.
    pub r_max_factor: f64,
    pub cfl: f64,
    pub integrator: Integrator,
    pub stencil: Stencil,
    pub m: f64,
    /// Steps between extractions.
    pub cadence: usize,
    /// Horizon in e-foldings of `√ζ` in `s`.
    pub horizon_efolds: f64,
    /// Include the `b_s (∂_b P, ψ)` correction in `κ±`.
    pub kappa_correction: bool,
    pub sweep_points: usize,
    /// Initial sweep covers `d₊ ∈ [-scale b0², scale b0²]`.
    pub sweep_scale: f64,
    /// Bisection stops below `bisect_tol · b0²`.
    pub bisect_tol: f64,
    /// Off-critical shift `± perturbation` in `d₊` for the growth-rate runs.
    pub perturbation: f64,
    pub profile_nodes: usize,
    /// Lattice spacing in `log b` of the interpolated profile family.
    pub lattice_spacing: f64,
    pub eta0_amplitude: f64,
    pub eta1_amplitude: f64,
    pub eta_center: f64,
    pub eta_width: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            b0: 0.02,
            dplus: DPlus::Auto,
            nodes: 8000,
            r_max_factor: 4.0,
            cfl: 0.5,
            integrator: Integrator::Rk4,
            stencil: Stencil::Central4,
            m: 20.0,
            cadence: 10,
            horizon_efolds: 20.0,
            kappa_correction: true,
            sweep_points: 9,
            sweep_scale: 1.0,
            bisect_tol: 1e-9,
            perturbation: 1e-6,
            profile_nodes: 6000,
            lattice_spacing: 0.01,
            eta0_amplitude: 0.0,
            eta1_amplitude: 0.0,
            eta_center: 5.0,
            eta_width: 1.0,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{v}'")))
}

impl SimConfig {
    /// Set one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "b0" => self.b0 = num(key, v)?,
            "dplus" => self.dplus = v.parse()?,
            "nodes" => self.nodes = num(key, v)?,
            "r_max_factor" => self.r_max_factor = num(key, v)?,
            "cfl" => self.cfl = num(key, v)?,
            "integrator" => {
                self.integrator = match v {
                    "rk4" => Integrator::Rk4,
                    "leapfrog" => Integrator::Leapfrog,
                    _ => return Err(Error::InvalidInput(format!("integrator: expected rk4 or leapfrog, got '{v}'"))),
                }
            }
            "stencil" => {
                self.stencil = match v {
                    "central4" => Stencil::Central4,
                    "conservative" => Stencil::Conservative,
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "stencil: expected central4 or conservative, got '{v}'"
                        )))
                    }
                }
            }
            "m" => self.m = num(key, v)?,
            "cadence" => self.cadence = num(key, v)?,
            "horizon_efolds" => self.horizon_efolds = num(key, v)?,
            "kappa_correction" => self.kappa_correction = num(key, v)?,
            "sweep_points" => self.sweep_points = num(key, v)?,
            "sweep_scale" => self.sweep_scale = num(key, v)?,
            "bisect_tol" => self.bisect_tol = num(key, v)?,
            "perturbation" => self.perturbation = num(key, v)?,
            "profile_nodes" => self.profile_nodes = num(key, v)?,
            "lattice_spacing" => self.lattice_spacing = num(key, v)?,
            "eta0_amplitude" => self.eta0_amplitude = num(key, v)?,
            "eta1_amplitude" => self.eta1_amplitude = num(key, v)?,
            "eta_center" => self.eta_center = num(key, v)?,
            "eta_width" => self.eta_width = num(key, v)?,
            other => return Err(Error::InvalidInput(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Apply every `key = value` line of `text` on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(1e-3..=5e-2).contains(&self.b0) {
            return bad(format!("b0 must lie in [1e-3, 5e-2], got {}", self.b0));
        }
        if self.nodes < 100 {
            return bad(format!("nodes must be at least 100, got {}", self.nodes));
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_MAX) {
            return bad(format!("cfl must lie in (0, {CFL_MAX}], got {}", self.cfl));
        }
        if !(self.m >= 2.0 && self.m <= 100.0) {
            return bad(format!("m must lie in [2, 100], got {}", self.m));
        }
        if self.cadence == 0 {
            return bad("cadence must be positive".into());
        }
        if !(self.horizon_efolds > 0.0 && self.horizon_efolds <= 60.0) {
            return bad(format!("horizon_efolds must lie in (0, 60], got {}", self.horizon_efolds));
        }
        if self.sweep_points < 3 || !(self.sweep_scale > 0.0) {
            return bad("need sweep_points >= 3 and sweep_scale > 0".into());
        }
        if !(self.bisect_tol > 0.0 && self.perturbation > 0.0) {
            return bad("bisect_tol and perturbation must be positive".into());
        }
        if !(self.lattice_spacing > 0.0 && self.lattice_spacing <= 0.1) {
            return bad(format!("lattice_spacing must lie in (0, 0.1], got {}", self.lattice_spacing));
        }
        if !(self.eta_width > 0.0 && self.eta_center >= 0.0) {
            return bad("eta_width must be positive and eta_center non-negative".into());
        }
        if let DPlus::Value(d) = self.dplus {
            if !d.is_finite() {
                return bad("dplus must be finite".into());
            }
        }
        Ok(())
    }
}
