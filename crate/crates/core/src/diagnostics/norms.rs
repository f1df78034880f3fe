use crate::device::{BoundaryData, DeviceMesh, SystemState};
use crate::solver::{species_flux, EdgeDensity, Species};
use serde::{Deserialize, Serialize};

/// Exponent used for the discrete `W^{1,r}` norm of `V`; any `r > 3` would do.
pub const SOBOLEV_EXPONENT: f64 = 4.0;

/// Norms logged for inspection only; nothing is asserted about them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorNorms {
    pub t: f64,
    /// Discrete `L²` norms of the edge fluxes of n, p and D.
    pub flux_n: f64,
    pub flux_p: f64,
    pub flux_d: f64,
    /// `‖V‖_{L^r} + ‖∇V‖_{L^r}` with two-point gradients.
    pub v_w1r: f64,
}

/// `(Σ_σ m(σ) d_σ |J_σ / m(σ)|²)^{1/2}` over interior edges and contacts.
fn flux_norm(species: Species, state: &SystemState, mesh: &DeviceMesh, bc: &BoundaryData, rule: EdgeDensity) -> f64 {
    let (rho, phi) = species.fields(state);
    let f = species_flux(species, rho, phi, mesh, bc, rule);
    let interior: f64 = mesh
        .interior_edges()
        .iter()
        .zip(&f.interior)
        .map(|(e, j)| e.distance * j * j / e.measure)
        .sum();
    let boundary: f64 = mesh
        .boundary_edges()
        .iter()
        .zip(&f.boundary)
        .map(|(e, j)| e.distance * j * j / e.measure)
        .sum();
    (interior + boundary).sqrt()
}

pub fn monitor_norms(state: &SystemState, mesh: &DeviceMesh, bc: &BoundaryData, rule: EdgeDensity) -> MonitorNorms {
    let r = SOBOLEV_EXPONENT;
    let lr: f64 = mesh
        .cells()
        .iter()
        .zip(&state.v)
        .map(|(c, v)| c.measure * v.abs().powf(r))
        .sum::<f64>()
        .powf(1.0 / r);
    let v_bar = &bc.faces().v;
    let mut grad: f64 = mesh
        .interior_edges()
        .iter()
        .map(|e| e.measure * e.distance * ((state.v[e.cells[0]] - state.v[e.cells[1]]) / e.distance).abs().powf(r))
        .sum();
    for (b, e) in mesh.dirichlet_edges() {
        grad += e.measure * e.distance * ((state.v[e.cell] - v_bar[b]) / e.distance).abs().powf(r);
    }
    MonitorNorms {
        t: state.t,
        flux_n: flux_norm(Species::Electrons, state, mesh, bc, rule),
        flux_p: flux_norm(Species::Holes, state, mesh, bc, rule),
        flux_d: flux_norm(Species::Vacancies, state, mesh, bc, rule),
        v_w1r: lr + grad.powf(1.0 / r),
    }
}
