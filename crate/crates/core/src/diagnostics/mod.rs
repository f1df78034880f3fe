//! Free energy, dissipation and runtime certification of the energy
//! inequality, density bounds and the nonlinear Poincaré–Wirtinger bound.

mod bounds;
mod energy;
mod inequality;
mod norms;
mod poincare;

pub use bounds::{boundedness_monitor, l53_norm, BoundednessMonitor, BoundednessReport, Breach};
pub use energy::{dissipation, energy_report, free_energy, free_energy_terms, EnergyReport, EnergyTerms, Extrema};
pub use inequality::{
    check_energy_inequality, EnergyTracker, GronwallConstants, InequalityMode, InequalityReport, StepVerdict,
};
pub use norms::{monitor_norms, MonitorNorms, SOBOLEV_EXPONENT};
pub use poincare::{poincare_check, poincare_check_with, spectral_gap_constant, PoincareError, PoincareResult};
