//! Geometry, boundary data, parameters and the state of the device.

mod boundary;
mod initial;
mod mesh;
mod profile;

pub use boundary::{lambda_const, BoundaryData, BoundaryError, ExtensionValues};
pub use initial::{validate_initial_data, InitialDataError, Violation, DENSITY_FLOOR};
pub use mesh::{
    BoundaryEdge, BoundaryTag, Cell, ContactSpec, DeviceMesh, Geometry, InteriorEdge, MeshError,
    MeshSpec, Side,
};
pub use profile::{Profile, ProfileError};

use crate::statistics::{fermi_dirac, logistic, FermiDiracOrder};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParameterError {
    #[error("`lambda` must be finite and positive, found {0}")]
    Lambda(f64),
    #[error("`final_time` must be finite and non-negative, found {0}")]
    FinalTime(f64),
    #[error("doping must be bounded (assumption A2): {0}")]
    Doping(String),
}

/// Scaled model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    /// Scaled Debye length.
    pub lambda: f64,
    /// Doping `A` per cell.
    pub doping: Vec<f64>,
    pub final_time: f64,
}

impl ModelParameters {
    pub fn new(lambda: f64, doping: &Profile, mesh: &DeviceMesh, final_time: f64) -> Result<Self, ParameterError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ParameterError::Lambda(lambda));
        }
        if !(final_time.is_finite() && final_time >= 0.0) {
            return Err(ParameterError::FinalTime(final_time));
        }
        doping
            .validate("doping")
            .map_err(|e| ParameterError::Doping(e.to_string()))?;
        let doping = mesh.cells().iter().map(|c| doping.eval(c.centroid)).collect();
        Ok(Self {
            lambda,
            doping,
            final_time,
        })
    }
}

/// Cell fields at one time. The chemical potentials are the primal unknowns;
/// densities are kept alongside and always satisfy
/// `n = F_{1/2}(φ_n + V)`, `p = F_{1/2}(φ_p - V)`, `D = F_{-1}(φ_D - V)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub phi_n: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub phi_d: Vec<f64>,
}

impl SystemState {
    /// Builds a state from potentials, evaluating the densities.
    pub fn from_potentials(t: f64, v: Vec<f64>, phi_n: Vec<f64>, phi_p: Vec<f64>, phi_d: Vec<f64>) -> Self {
        let half = |y: f64| fermi_dirac(FermiDiracOrder::HALF, y);
        let n = phi_n.iter().zip(&v).map(|(f, v)| half(f + v)).collect();
        let p = phi_p.iter().zip(&v).map(|(f, v)| half(f - v)).collect();
        let d = phi_d.iter().zip(&v).map(|(f, v)| logistic(f - v)).collect();
        Self {
            t,
            n,
            p,
            d,
            v,
            phi_n,
            phi_p,
            phi_d,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.v.len()
    }

    /// Largest relative mismatch between stored densities and the densities
    /// implied by the stored potentials.
    pub fn consistency_error(&self) -> f64 {
        let fresh = Self::from_potentials(
            self.t,
            self.v.clone(),
            self.phi_n.clone(),
            self.phi_p.clone(),
            self.phi_d.clone(),
        );
        let rel = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        rel(&self.n, &fresh.n)
            .max(rel(&self.p, &fresh.p))
            .max(rel(&self.d, &fresh.d))
    }

    /// Largest absolute difference over all fields.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        let pairs = [
            (&self.n, &other.n),
            (&self.p, &other.p),
            (&self.d, &other.d),
            (&self.v, &other.v),
            (&self.phi_n, &other.phi_n),
            (&self.phi_p, &other.phi_p),
            (&self.phi_d, &other.phi_d),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}
