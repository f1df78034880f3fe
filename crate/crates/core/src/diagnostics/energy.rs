use crate::device::{BoundaryData, DeviceMesh, ModelParameters, SystemState};
use crate::solver::{species_flux, EdgeDensity, Species};
use super::StepVerdict;
use crate::statistics::{relative_energy_potentials, vacancy_entropy};
use serde::{Deserialize, Serialize};

/// Contributions to the free energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    /// `Σ m(K) 𝒢(n_K | n̄_K)`
    pub electrons: f64,
    /// `Σ m(K) 𝒢(p_K | p̄_K)`
    pub holes: f64,
    /// `Σ m(K) (H(D_K) + D_K V̄_K)`
    pub vacancies: f64,
    /// `λ²/2 · Σ_σ m(σ)/d_σ |D_σ(V - V̄)|²`
    pub electrostatic: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.electrons + self.holes + self.vacancies + self.electrostatic
    }
}

/// Term-by-term free energy.
///
/// Relative energies are evaluated from the chemical potentials
/// `g(n) = φ_n + V` and `g(p) = φ_p - V` of the state, so no density is
/// inverted. `H(0) = H(1) = log 2` by continuity. The field energy uses
/// two-point quotients of `V - V̄` on interior edges and `V_K - V̄_K` on
/// contact faces; insulating faces contribute nothing.
pub fn free_energy_terms(state: &SystemState, bc: &BoundaryData, mesh: &DeviceMesh, params: &ModelParameters) -> EnergyTerms {
    let ext = bc.cells();
    let mut t = EnergyTerms {
        electrons: 0.0,
        holes: 0.0,
        vacancies: 0.0,
        electrostatic: 0.0,
    };
    for (k, c) in mesh.cells().iter().enumerate() {
        let gn_bar = ext.psi_n[k] + ext.v[k];
        let gp_bar = ext.psi_p[k] - ext.v[k];
        t.electrons += c.measure * relative_energy_potentials(state.phi_n[k] + state.v[k], gn_bar);
        t.holes += c.measure * relative_energy_potentials(state.phi_p[k] - state.v[k], gp_bar);
        t.vacancies += c.measure * (vacancy_entropy(state.d[k]) + state.d[k] * ext.v[k]);
    }
    let w: Vec<f64> = state.v.iter().zip(&ext.v).map(|(v, vb)| v - vb).collect();
    let mut field = 0.0;
    for e in mesh.interior_edges() {
        let [k, l] = e.cells;
        field += e.transmissibility() * (w[k] - w[l]).powi(2);
    }
    for (_, e) in mesh.dirichlet_edges() {
        field += e.transmissibility() * w[e.cell].powi(2);
    }
    t.electrostatic = 0.5 * params.lambda * params.lambda * field;
    t
}

/// Discrete free energy `E(n, p, D, V)`.
pub fn free_energy(state: &SystemState, bc: &BoundaryData, mesh: &DeviceMesh, params: &ModelParameters) -> f64 {
    free_energy_terms(state, bc, mesh, params).total()
}

/// `Σ_species Σ_σ J_σ Δφ_σ = Σ m(σ)/d_σ a_σ |Δφ_σ|²`, built from the same
/// fluxes the solver uses.
pub fn dissipation(state: &SystemState, mesh: &DeviceMesh, bc: &BoundaryData, rule: EdgeDensity) -> f64 {
    Species::ALL
        .iter()
        .map(|&s| {
            let (rho, phi) = s.fields(state);
            let flux = species_flux(s, rho, phi, mesh, bc, rule);
            let interior: f64 = mesh
                .interior_edges()
                .iter()
                .zip(&flux.interior)
                .map(|(e, j)| j * (phi[e.cells[0]] - phi[e.cells[1]]))
                .sum();
            let boundary: f64 = if s.has_contacts() {
                mesh.dirichlet_edges()
                    .map(|(b, e)| flux.boundary[b] * (phi[e.cell] - s.ghost(bc, b).0))
                    .sum()
            } else {
                0.0
            };
            interior + boundary
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
}

impl Extrema {
    pub fn of(v: &[f64]) -> Self {
        v.iter().fold(
            Self {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |e, &x| Self {
                min: e.min.min(x),
                max: e.max.max(x),
            },
        )
    }
}

/// Energy, dissipation and field summaries of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub lambda: f64,
    pub mass_n: f64,
    pub mass_p: f64,
    pub mass_d: f64,
    pub n: Extrema,
    pub p: Extrema,
    pub d: Extrema,
    pub v: Extrema,
    /// Verdict of the energy inequality for the step ending here, if any.
    pub inequality: Option<StepVerdict>,
}

pub fn energy_report(
    state: &SystemState,
    bc: &BoundaryData,
    mesh: &DeviceMesh,
    params: &ModelParameters,
    rule: EdgeDensity,
    lambda: f64,
) -> EnergyReport {
    EnergyReport {
        t: state.t,
        energy: free_energy(state, bc, mesh, params),
        dissipation: dissipation(state, mesh, bc, rule),
        lambda,
        mass_n: mesh.integrate(&state.n),
        mass_p: mesh.integrate(&state.p),
        mass_d: mesh.integrate(&state.d),
        n: Extrema::of(&state.n),
        p: Extrema::of(&state.p),
        d: Extrema::of(&state.d),
        v: Extrema::of(&state.v),
        inequality: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ContactSpec, Geometry, MeshSpec, Profile, Side};
    use crate::quadrature::tanh_sinh;
    use crate::solver::{assemble_fluxes, SolverConfig};
    use crate::statistics::inverse_fd_half;
    use proptest::prelude::*;

    fn mesh_1d(cells: usize) -> DeviceMesh {
        DeviceMesh::build(&MeshSpec {
            geometry: Geometry::Interval {
                length: 1.0,
                cells,
                grading: None,
            },
            contacts: vec![
                ContactSpec {
                    side: Side::Left,
                    range: None,
                },
                ContactSpec {
                    side: Side::Right,
                    range: None,
                },
            ],
        })
        .unwrap()
    }

    fn equilibrium_state(mesh: &DeviceMesh, bc: &BoundaryData) -> SystemState {
        let k = mesh.num_cells();
        SystemState::from_potentials(
            0.0,
            vec![0.0; k],
            bc.cells().psi_n.clone(),
            bc.cells().psi_p.clone(),
            vec![0.0; k],
        )
    }

    #[test]
    fn equilibrium_extension_has_zero_energy() {
        let m = mesh_1d(16);
        let bc = BoundaryData::equilibrium(0.9, &m).unwrap();
        let params = ModelParameters::new(0.5, &Profile::constant(0.5), &m, 1.0).unwrap();
        let s = equilibrium_state(&m, &bc);
        assert!(s.d.iter().all(|d| *d == 0.5));
        assert!(free_energy(&s, &bc, &m, &params).abs() < 1e-15);
        assert_eq!(dissipation(&s, &m, &bc, EdgeDensity::Mean), 0.0);
    }

    #[test]
    fn perturbing_one_density_raises_energy() {
        let m = mesh_1d(16);
        let bc = BoundaryData::equilibrium(0.9, &m).unwrap();
        let params = ModelParameters::new(0.5, &Profile::constant(0.5), &m, 1.0).unwrap();
        let mut s = equilibrium_state(&m, &bc);
        let e0 = free_energy(&s, &bc, &m, &params);
        s.n[3] *= 1.1;
        s.phi_n[3] = inverse_fd_half(s.n[3]).unwrap() - s.v[3];
        assert!(free_energy(&s, &bc, &m, &params) > e0);
    }

    fn biased_snapshot(cells: usize) -> (DeviceMesh, BoundaryData, ModelParameters, SystemState) {
        let m = mesh_1d(cells);
        let bc = BoundaryData::new(
            Profile::constant(0.8),
            Profile::constant(0.4),
            Profile::Linear {
                value: 0.0,
                gradient: [2.0, 0.0],
            },
            &m,
        )
        .unwrap();
        let params = ModelParameters::new(0.3, &Profile::constant(0.1), &m, 1.0).unwrap();
        let x: Vec<f64> = m.cells().iter().map(|c| c.centroid[0]).collect();
        let v: Vec<f64> = x.iter().map(|x| 2.0 * x + 0.3 * (3.0 * x).sin()).collect();
        let phi_n: Vec<f64> = x.iter().map(|x| (5.0 * x).cos() - 0.5).collect();
        let phi_p: Vec<f64> = x.iter().map(|x| 0.3 * x - 1.0).collect();
        let phi_d: Vec<f64> = x.iter().map(|x| 2.0 * x - 0.7).collect();
        let s = SystemState::from_potentials(0.0, v, phi_n, phi_p, phi_d);
        (m, bc, params, s)
    }

    #[test]
    fn energy_matches_quadrature_evaluation() {
        // independent path: relative energy by quadrature of ∫(s - z) g'(z),
        // H by quadrature of h, field energy from the piecewise-linear
        // reconstruction written out per edge
        let (m, bc, params, s) = biased_snapshot(64);
        let rel = |x: f64, xb: f64| {
            tanh_sinh(
                |z, _| (x - z) * crate::statistics::g_prime(z).unwrap(),
                xb,
                x,
                1e-14,
            )
            .value
        };
        let mut reference = 0.0;
        let h = 1.0 / 64.0;
        for k in 0..64 {
            let xk = m.cells()[k].centroid[0];
            reference += h * rel(s.n[k], 0.8) + h * rel(s.p[k], 0.4);
            let hq = tanh_sinh(|z, _| z.ln() - (1.0 - z).ln(), 0.5, s.d[k], 1e-14).value;
            reference += h * (hq + s.d[k] * 2.0 * xk);
        }
        let w: Vec<f64> = (0..64).map(|k| s.v[k] - 2.0 * m.cells()[k].centroid[0]).collect();
        let mut grad = w[0] * w[0] / (0.5 * h) + w[63] * w[63] / (0.5 * h);
        for k in 0..63 {
            grad += (w[k + 1] - w[k]).powi(2) / h;
        }
        reference += 0.5 * 0.09 * grad;
        let e = free_energy(&s, &bc, &m, &params);
        assert!((e - reference).abs() <= 1e-12 * reference.abs().max(1.0), "{e} vs {reference}");
    }

    #[test]
    fn biased_snapshot_dissipates() {
        let (m, bc, _, s) = biased_snapshot(32);
        assert!(dissipation(&s, &m, &bc, EdgeDensity::Mean) > 0.0);
    }

    proptest! {
        #[test]
        fn dissipation_equals_flux_times_potential_jump(
            phi_n in proptest::collection::vec(-4.0f64..4.0, 12),
            phi_p in proptest::collection::vec(-4.0f64..4.0, 12),
            phi_d in proptest::collection::vec(-4.0f64..4.0, 12),
            v in proptest::collection::vec(-2.0f64..2.0, 12),
            upwind in any::<bool>(),
        ) {
            let m = mesh_1d(12);
            let bc = BoundaryData::new(Profile::constant(0.6), Profile::constant(1.2), Profile::Linear { value: 0.1, gradient: [1.0, 0.0] }, &m).unwrap();
            let s = SystemState::from_potentials(0.0, v, phi_n, phi_p, phi_d);
            let rule = if upwind { EdgeDensity::Upwind } else { EdgeDensity::Mean };
            let config = SolverConfig { edge_density: rule, ..SolverConfig::default() };
            let flux = assemble_fluxes(&s, &m, &bc, &config).unwrap();
            // Σ J Δφ from the assembled fluxes, and Σ τ a Δφ² written out
            let mut from_flux = 0.0;
            let mut squares = 0.0;
            for sp in Species::ALL {
                let (rho, phi) = sp.fields(&s);
                let f = flux.species(sp);
                for (i, e) in m.interior_edges().iter().enumerate() {
                    let [k, l] = e.cells;
                    let dphi = phi[k] - phi[l];
                    from_flux += f.interior[i] * dphi;
                    let a = crate::solver::edge_density(rule, rho[k], rho[l], phi[k], phi[l]);
                    squares += e.transmissibility() * a * dphi * dphi;
                }
                if sp.has_contacts() {
                    for (b, e) in m.dirichlet_edges() {
                        let (pb, rb) = sp.ghost(&bc, b);
                        let dphi = phi[e.cell] - pb;
                        from_flux += f.boundary[b] * dphi;
                        let a = crate::solver::edge_density(rule, rho[e.cell], rb, phi[e.cell], pb);
                        squares += e.transmissibility() * a * dphi * dphi;
                    }
                }
            }
            let diss = dissipation(&s, &m, &bc, rule);
            prop_assert!(diss >= 0.0);
            prop_assert!((diss - from_flux).abs() <= 1e-14 * diss.max(1e-300));
            prop_assert!((diss - squares).abs() <= 1e-13 * diss.max(1e-300));
        }
    }

    #[test]
    fn extrema() {
        let e = Extrema::of(&[3.0, -1.0, 2.0]);
        assert_eq!((e.min, e.max), (-1.0, 3.0));
    }
}
