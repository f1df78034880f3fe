//! Carrier statistics and the thermodynamic functions built on them.

mod blakemore;
mod fermi_dirac;
mod gamma;
mod inverse;
mod thermo;

pub use blakemore::{blakemore_h, blakemore_h_prime};
pub use fermi_dirac::{
    fermi_dirac, fermi_dirac_quadrature, logistic, FermiDiracOrder, ORACLE_TOL,
};
pub use gamma::gamma_fn;
pub use inverse::{g_prime, inverse_fd_half};
pub use thermo::{
    antideriv_g, antideriv_h, fd_half_at_zero, g_tilde, h_tilde, relative_energy,
    relative_energy_potentials, vacancy_entropy,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StatisticsError {
    #[error("{function}: argument {value} outside the admissible domain")]
    Domain { function: &'static str, value: f64 },
    #[error("Fermi-Dirac order {0} is not admissible (need j > -1 or j = -1)")]
    InvalidOrder(f64),
    #[error("invalid envelope constants: {0}")]
    InvalidEnvelope(&'static str),
}

/// Statistics relating a density to its chemical potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CarrierStatistics {
    /// `ρ = F_{1/2}(y)`, densities in `(0, ∞)`.
    FermiDiracHalf,
    /// `ρ = F_{-1}(y) = 1/(1 + e^{-y})`, densities in `(0, 1)`.
    Blakemore,
}

impl CarrierStatistics {
    /// Open interval of admissible densities.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Self::FermiDiracHalf => (0.0, f64::INFINITY),
            Self::Blakemore => (0.0, 1.0),
        }
    }

    pub fn contains(self, rho: f64) -> bool {
        let (lo, hi) = self.domain();
        rho > lo && rho < hi
    }

    /// Density as a function of the chemical potential.
    pub fn forward(self, y: f64) -> f64 {
        match self {
            Self::FermiDiracHalf => fermi_dirac(FermiDiracOrder::HALF, y),
            Self::Blakemore => logistic(y),
        }
    }

    /// `dρ/dy`.
    pub fn forward_derivative(self, y: f64) -> f64 {
        match self {
            Self::FermiDiracHalf => fermi_dirac(FermiDiracOrder::MINUS_HALF, y),
            Self::Blakemore => {
                let d = logistic(y);
                // d (1 - d) with 1 - d evaluated as logistic(-y)
                d * logistic(-y)
            }
        }
    }

    /// Chemical potential of a density (`g` or `h`).
    pub fn inverse(self, rho: f64) -> Result<f64, StatisticsError> {
        match self {
            Self::FermiDiracHalf => inverse_fd_half(rho),
            Self::Blakemore => blakemore_h(rho),
        }
    }

    /// Derivative of the inverse map (`g'` or `h'`).
    pub fn inverse_derivative(self, rho: f64) -> Result<f64, StatisticsError> {
        match self {
            Self::FermiDiracHalf => g_prime(rho),
            Self::Blakemore => blakemore_h_prime(rho),
        }
    }

    /// Anti-derivative of the inverse map (`G` or `H`).
    pub fn antiderivative(self, rho: f64) -> Result<f64, StatisticsError> {
        match self {
            Self::FermiDiracHalf => antideriv_g(rho),
            Self::Blakemore => antideriv_h(rho),
        }
    }
}

/// Two-sided bracket `lower·B ≤ A ≤ upper·B` valid on `valid_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    lower: f64,
    upper: f64,
    valid_range: (f64, f64),
}

impl EnvelopeConstants {
    pub fn new(lower: f64, upper: f64, valid_range: (f64, f64)) -> Result<Self, StatisticsError> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(StatisticsError::InvalidEnvelope("constants must be finite"));
        }
        if !(lower > 0.0 && upper > 0.0) {
            return Err(StatisticsError::InvalidEnvelope("constants must be positive"));
        }
        if lower > upper {
            return Err(StatisticsError::InvalidEnvelope("lower exceeds upper"));
        }
        if !(valid_range.0 < valid_range.1) {
            return Err(StatisticsError::InvalidEnvelope("empty range"));
        }
        Ok(Self {
            lower,
            upper,
            valid_range,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn valid_range(&self) -> (f64, f64) {
        self.valid_range
    }

    /// Whether `ratio = A/B` lies inside the bracket.
    pub fn contains_ratio(&self, ratio: f64) -> bool {
        ratio >= self.lower && ratio <= self.upper
    }
}
