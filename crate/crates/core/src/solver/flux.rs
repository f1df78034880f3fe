use super::{SolverConfig, SolverError};
use crate::device::{BoundaryData, DeviceMesh, SystemState};
use crate::statistics::{fermi_dirac, logistic, FermiDiracOrder};
use serde::{Deserialize, Serialize};

/// Mobile species of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Electrons,
    Holes,
    Vacancies,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::Electrons, Species::Holes, Species::Vacancies];

    /// Density as a function of the chemical potential at fixed `V`.
    #[inline]
    pub fn density(self, phi: f64, v: f64) -> f64 {
        match self {
            Self::Electrons => fermi_dirac(FermiDiracOrder::HALF, phi + v),
            Self::Holes => fermi_dirac(FermiDiracOrder::HALF, phi - v),
            Self::Vacancies => logistic(phi - v),
        }
    }

    /// `∂ρ/∂φ` at fixed `V`.
    #[inline]
    pub fn density_derivative(self, phi: f64, v: f64) -> f64 {
        match self {
            Self::Electrons => fermi_dirac(FermiDiracOrder::MINUS_HALF, phi + v),
            Self::Holes => fermi_dirac(FermiDiracOrder::MINUS_HALF, phi - v),
            Self::Vacancies => logistic(phi - v) * logistic(v - phi),
        }
    }

    /// Vacancies never cross the boundary.
    pub fn has_contacts(self) -> bool {
        !matches!(self, Self::Vacancies)
    }

    /// Ghost chemical potential and density on boundary face `face`.
    pub fn ghost(self, bc: &BoundaryData, face: usize) -> (f64, f64) {
        let f = bc.faces();
        match self {
            Self::Electrons => (f.psi_n[face], f.n[face]),
            Self::Holes => (f.psi_p[face], f.p[face]),
            Self::Vacancies => unreachable!("vacancies have no contacts"),
        }
    }

    pub fn fields(self, state: &SystemState) -> (&[f64], &[f64]) {
        match self {
            Self::Electrons => (&state.n, &state.phi_n),
            Self::Holes => (&state.p, &state.phi_p),
            Self::Vacancies => (&state.d, &state.phi_d),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Electrons => "electrons",
            Self::Holes => "holes",
            Self::Vacancies => "vacancies",
        }
    }
}

/// Edge density `a_σ` multiplying `Δφ` in the two-point flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDensity {
    /// `(ρ_K + ρ_L) / 2`
    #[default]
    Mean,
    /// Density of the upstream cell, i.e. the one with larger `φ`.
    Upwind,
}

#[inline]
pub fn edge_density(rule: EdgeDensity, rho_k: f64, rho_l: f64, phi_k: f64, phi_l: f64) -> f64 {
    match rule {
        EdgeDensity::Mean => 0.5 * (rho_k + rho_l),
        EdgeDensity::Upwind => {
            if phi_k >= phi_l {
                rho_k
            } else {
                rho_l
            }
        }
    }
}

/// Fluxes of one species. `interior[e]` is the transfer from
/// `cells[0]` to `cells[1]` of interior edge `e`; `boundary[b]` the outflow
/// through boundary face `b`. Both are already multiplied by `m(σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesFlux {
    pub interior: Vec<f64>,
    pub boundary: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlux {
    pub n: SpeciesFlux,
    pub p: SpeciesFlux,
    pub d: SpeciesFlux,
}

impl EdgeFlux {
    pub fn species(&self, s: Species) -> &SpeciesFlux {
        match s {
            Species::Electrons => &self.n,
            Species::Holes => &self.p,
            Species::Vacancies => &self.d,
        }
    }
}

/// `J_σ = m(σ)/d_σ · a_σ · (φ_K - φ_L)` for every edge, with Dirichlet ghost
/// values on contact faces and zero flux elsewhere on the boundary.
pub fn species_flux(
    species: Species,
    rho: &[f64],
    phi: &[f64],
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    rule: EdgeDensity,
) -> SpeciesFlux {
    let interior = mesh
        .interior_edges()
        .iter()
        .map(|e| {
            let [k, l] = e.cells;
            let a = edge_density(rule, rho[k], rho[l], phi[k], phi[l]);
            e.transmissibility() * a * (phi[k] - phi[l])
        })
        .collect();
    let boundary = mesh
        .boundary_edges()
        .iter()
        .enumerate()
        .map(|(b, e)| {
            if !(species.has_contacts() && e.is_dirichlet()) {
                return 0.0;
            }
            let (phi_bar, rho_bar) = species.ghost(bc, b);
            let k = e.cell;
            let a = edge_density(rule, rho[k], rho_bar, phi[k], phi_bar);
            e.transmissibility() * a * (phi[k] - phi_bar)
        })
        .collect();
    SpeciesFlux { interior, boundary }
}

/// Fluxes of all three species for `state`.
///
/// Fails with `StepRejected` when a vacancy density is within
/// `saturation_eps / 2` of 1.
pub fn assemble_fluxes(
    state: &SystemState,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    config: &SolverConfig,
) -> Result<EdgeFlux, SolverError> {
    check_saturation(&state.d, config.saturation_eps)?;
    let f = |s: Species| {
        let (rho, phi) = s.fields(state);
        species_flux(s, rho, phi, mesh, bc, config.edge_density)
    };
    Ok(EdgeFlux {
        n: f(Species::Electrons),
        p: f(Species::Holes),
        d: f(Species::Vacancies),
    })
}

pub(crate) fn check_saturation(d: &[f64], eps: f64) -> Result<(), SolverError> {
    let limit = 1.0 - 0.5 * eps;
    if let Some(k) = d.iter().position(|&x| !(x < limit)) {
        return Err(SolverError::StepRejected(format!(
            "vacancy density {} in cell {k} breaches the saturation guard 1 - {}",
            d[k],
            0.5 * eps
        )));
    }
    Ok(())
}
