use super::linalg::BandMatrix;
use super::{damped_newton, edge_density, EdgeDensity, NewtonStats, SolverConfig, SolverError, Species};
use crate::device::{BoundaryData, DeviceMesh};

/// Backward-Euler residual of one species at fixed `V`:
/// `m(K)(ρ_K - ρ_K^old)/dt + Σ_σ J_σ`.
#[allow(clippy::too_many_arguments)]
pub fn species_residual(
    species: Species,
    phi: &[f64],
    v: &[f64],
    rho_old: &[f64],
    dt: f64,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    rule: EdgeDensity,
) -> Vec<f64> {
    let rho: Vec<f64> = phi.iter().zip(v).map(|(f, v)| species.density(*f, *v)).collect();
    let mut r: Vec<f64> = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(k, c)| c.measure * (rho[k] - rho_old[k]) / dt)
        .collect();
    for e in mesh.interior_edges() {
        let [k, l] = e.cells;
        let a = edge_density(rule, rho[k], rho[l], phi[k], phi[l]);
        let j = e.transmissibility() * a * (phi[k] - phi[l]);
        r[k] += j;
        r[l] -= j;
    }
    if species.has_contacts() {
        for (b, e) in mesh.dirichlet_edges() {
            let (phi_bar, rho_bar) = species.ghost(bc, b);
            let k = e.cell;
            let a = edge_density(rule, rho[k], rho_bar, phi[k], phi_bar);
            r[k] += e.transmissibility() * a * (phi[k] - phi_bar);
        }
    }
    r
}

#[inline]
fn edge_density_derivatives(rule: EdgeDensity, drho_k: f64, drho_l: f64, phi_k: f64, phi_l: f64) -> (f64, f64) {
    match rule {
        EdgeDensity::Mean => (0.5 * drho_k, 0.5 * drho_l),
        EdgeDensity::Upwind => {
            if phi_k >= phi_l {
                (drho_k, 0.0)
            } else {
                (0.0, drho_l)
            }
        }
    }
}

/// Analytic Jacobian `∂R/∂φ` of [`species_residual`].
#[allow(clippy::too_many_arguments)]
pub fn species_jacobian(
    species: Species,
    phi: &[f64],
    v: &[f64],
    dt: f64,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    rule: EdgeDensity,
) -> BandMatrix {
    let bw = mesh.bandwidth();
    let n = mesh.num_cells();
    let rho: Vec<f64> = phi.iter().zip(v).map(|(f, v)| species.density(*f, *v)).collect();
    let drho: Vec<f64> = phi
        .iter()
        .zip(v)
        .map(|(f, v)| species.density_derivative(*f, *v))
        .collect();
    let mut jac = BandMatrix::zeros(n, bw, bw);
    for (k, c) in mesh.cells().iter().enumerate() {
        jac.add(k, k, c.measure * drho[k] / dt);
    }
    for e in mesh.interior_edges() {
        let [k, l] = e.cells;
        let t = e.transmissibility();
        let delta = phi[k] - phi[l];
        let a = edge_density(rule, rho[k], rho[l], phi[k], phi[l]);
        let (da_k, da_l) = edge_density_derivatives(rule, drho[k], drho[l], phi[k], phi[l]);
        let dj_k = t * (a + delta * da_k);
        let dj_l = t * (-a + delta * da_l);
        jac.add(k, k, dj_k);
        jac.add(k, l, dj_l);
        jac.add(l, k, -dj_k);
        jac.add(l, l, -dj_l);
    }
    if species.has_contacts() {
        for (b, e) in mesh.dirichlet_edges() {
            let (phi_bar, rho_bar) = species.ghost(bc, b);
            let k = e.cell;
            let a = edge_density(rule, rho[k], rho_bar, phi[k], phi_bar);
            let (da_k, _) = edge_density_derivatives(rule, drho[k], 0.0, phi[k], phi_bar);
            jac.add(k, k, e.transmissibility() * (a + (phi[k] - phi_bar) * da_k));
        }
    }
    jac
}

/// Damped Newton solve of the backward-Euler equation of one species at
/// fixed `V`. Residuals are scaled by `dt / m(K)`, i.e. measured as density
/// changes.
#[allow(clippy::too_many_arguments)]
pub fn solve_species(
    species: Species,
    phi0: &[f64],
    v: &[f64],
    rho_old: &[f64],
    dt: f64,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    config: &SolverConfig,
) -> Result<(Vec<f64>, NewtonStats), SolverError> {
    let scale: Vec<f64> = mesh.cells().iter().map(|c| dt / c.measure).collect();
    let rule = config.edge_density;
    let mut phi = phi0.to_vec();
    let stats = damped_newton(
        species.name(),
        &mut phi,
        |phi| {
            species_residual(species, phi, v, rho_old, dt, mesh, bc, rule)
                .iter()
                .zip(&scale)
                .map(|(r, s)| r * s)
                .collect()
        },
        |phi, r| {
            let jac = species_jacobian(species, phi, v, dt, mesh, bc, rule);
            let rhs: Vec<f64> = r.iter().zip(&scale).map(|(r, s)| -r / s).collect();
            jac.solve(&rhs).map_err(|source| SolverError::Singular {
                stage: species.name(),
                source,
            })
        },
        config,
    )?;
    Ok((phi, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ContactSpec, Geometry, MeshSpec, Profile, Side};
    use proptest::prelude::*;

    fn small_mesh(two_d: bool) -> DeviceMesh {
        let geometry = if two_d {
            Geometry::Rectangle {
                width: 1.0,
                height: 0.5,
                nx: 4,
                ny: 2,
            }
        } else {
            Geometry::Interval {
                length: 1.0,
                cells: 8,
                grading: Some(1.2),
            }
        };
        DeviceMesh::build(&MeshSpec {
            geometry,
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

    fn bias(mesh: &DeviceMesh) -> BoundaryData {
        BoundaryData::new(
            Profile::constant(0.8),
            Profile::constant(0.3),
            Profile::Linear {
                value: -0.5,
                gradient: [1.0, 0.0],
            },
            mesh,
        )
        .unwrap()
    }

    fn check_jacobian(species: Species, rule: EdgeDensity, two_d: bool, phi: &[f64], v: &[f64]) -> Result<(), TestCaseError> {
        let mesh = small_mesh(two_d);
        let bc = bias(&mesh);
        let dt = 0.1;
        let old = vec![0.4; 8];
        let jac = species_jacobian(species, phi, v, dt, &mesh, &bc, rule);
        for j in 0..8 {
            let h = 1e-6 * (1.0 + phi[j].abs());
            let mut plus = phi.to_vec();
            let mut minus = phi.to_vec();
            plus[j] += h;
            minus[j] -= h;
            let rp = species_residual(species, &plus, v, &old, dt, &mesh, &bc, rule);
            let rm = species_residual(species, &minus, v, &old, dt, &mesh, &bc, rule);
            for i in 0..8 {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                let an = jac.get(i, j);
                let scale = an.abs().max(fd.abs()).max(1e-3);
                prop_assert!((fd - an).abs() <= 1e-5 * scale, "{species:?} {rule:?} ({i},{j}): fd {fd} vs {an}");
            }
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn jacobian_matches_finite_differences(
            phi in proptest::collection::vec(-3.0f64..3.0, 8),
            v in proptest::collection::vec(-1.0f64..1.0, 8),
            two_d in any::<bool>(),
        ) {
            for species in Species::ALL {
                check_jacobian(species, EdgeDensity::Mean, two_d, &phi, &v)?;
            }
        }

        #[test]
        fn upwind_jacobian_away_from_ties(
            base in proptest::collection::vec(-3.0f64..3.0, 8),
            v in proptest::collection::vec(-1.0f64..1.0, 8),
        ) {
            // separate neighbouring potentials so no edge sits at the kink
            let phi: Vec<f64> = base.iter().enumerate().map(|(i, x)| x + 10.0 * i as f64).collect();
            for species in Species::ALL {
                check_jacobian(species, EdgeDensity::Upwind, false, &phi, &v)?;
            }
        }
    }

    #[test]
    fn vacancy_solve_conserves_mass() {
        let mesh = small_mesh(false);
        let bc = bias(&mesh);
        let v: Vec<f64> = (0..8).map(|i| 0.3 * i as f64).collect();
        let old: Vec<f64> = (0..8).map(|i| 0.1 + 0.1 * i as f64).collect();
        let phi0: Vec<f64> = old.iter().zip(&v).map(|(d, v)| crate::statistics::blakemore_h(*d).unwrap() + v).collect();
        let (phi, _) = solve_species(Species::Vacancies, &phi0, &v, &old, 0.5, &mesh, &bc, &SolverConfig::default()).unwrap();
        let new: Vec<f64> = phi.iter().zip(&v).map(|(f, v)| Species::Vacancies.density(*f, *v)).collect();
        let before = mesh.integrate(&old);
        let after = mesh.integrate(&new);
        assert!((after - before).abs() <= 1e-14 * before);
    }
}
