use super::linalg::BandMatrix;
use super::{damped_newton, NewtonStats, SolverConfig, SolverError, Species};
use crate::device::{BoundaryData, DeviceMesh, ModelParameters};

/// `scale · Σ_σ m(σ)/d_σ (V_K - V_L)` as a band matrix, contact faces
/// contributing to the diagonal only.
pub(crate) fn laplacian(mesh: &DeviceMesh, scale: f64) -> BandMatrix {
    let bw = mesh.bandwidth();
    let mut a = BandMatrix::zeros(mesh.num_cells(), bw, bw);
    for e in mesh.interior_edges() {
        let [k, l] = e.cells;
        let t = scale * e.transmissibility();
        a.add(k, k, t);
        a.add(l, l, t);
        a.add(k, l, -t);
        a.add(l, k, -t);
    }
    for (_, e) in mesh.dirichlet_edges() {
        a.add(e.cell, e.cell, scale * e.transmissibility());
    }
    a
}

/// `Σ_σ m(σ)/d_σ (V_K - V_L)` with `V_L = V̄_σ` on contact faces.
pub(crate) fn apply_laplacian(mesh: &DeviceMesh, bc: &BoundaryData, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for e in mesh.interior_edges() {
        let [k, l] = e.cells;
        let j = e.transmissibility() * (v[k] - v[l]);
        out[k] += j;
        out[l] -= j;
    }
    let v_bar = &bc.faces().v;
    for (b, e) in mesh.dirichlet_edges() {
        out[e.cell] += e.transmissibility() * (v[e.cell] - v_bar[b]);
    }
    out
}

/// Linear Poisson problem `λ² ΔV = n - p - D + A` for given densities,
/// `V = V̄` on contacts and zero normal field elsewhere.
pub fn solve_poisson(
    n: &[f64],
    p: &[f64],
    d: &[f64],
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
) -> Result<Vec<f64>, SolverError> {
    let l2 = params.lambda * params.lambda;
    let a = laplacian(mesh, l2);
    let v_bar = &bc.faces().v;
    let mut b: Vec<f64> = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(k, c)| -c.measure * (n[k] - p[k] - d[k] + params.doping[k]))
        .collect();
    for (f, e) in mesh.dirichlet_edges() {
        b[e.cell] += l2 * e.transmissibility() * v_bar[f];
    }
    let singular = |source| SolverError::Singular {
        stage: "poisson",
        source,
    };
    let mut v = a.clone().solve(&b).map_err(singular)?;
    // one round of iterative refinement
    let av = a.mul_vec(&v);
    let r: Vec<f64> = b.iter().zip(&av).map(|(b, x)| b - x).collect();
    let dv = a.solve(&r).map_err(singular)?;
    v.iter_mut().zip(&dv).for_each(|(v, d)| *v += d);
    Ok(v)
}

/// Residual of the discrete Poisson equation with densities given by the
/// chemical potentials, `λ² Σ τ (V_K - V_L) + m(K) (n - p - D + A)_K`.
pub fn poisson_residual(
    v: &[f64],
    phi_n: &[f64],
    phi_p: &[f64],
    phi_d: &[f64],
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
) -> Vec<f64> {
    let l2 = params.lambda * params.lambda;
    let lap = apply_laplacian(mesh, bc, v);
    mesh.cells()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let charge = Species::Electrons.density(phi_n[k], v[k])
                - Species::Holes.density(phi_p[k], v[k])
                - Species::Vacancies.density(phi_d[k], v[k])
                + params.doping[k];
            l2 * lap[k] + c.measure * charge
        })
        .collect()
}

/// Nonlinear Poisson problem at fixed chemical potentials (the Gummel
/// potential update). The Jacobian `λ² L + diag(m(K) ∂ρ/∂V)` is symmetric
/// positive definite.
#[allow(clippy::too_many_arguments)]
pub fn solve_poisson_nonlinear(
    v0: &[f64],
    phi_n: &[f64],
    phi_p: &[f64],
    phi_d: &[f64],
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
    config: &SolverConfig,
) -> Result<(Vec<f64>, NewtonStats), SolverError> {
    let l2 = params.lambda * params.lambda;
    let base = laplacian(mesh, l2);
    let measures: Vec<f64> = mesh.cells().iter().map(|c| c.measure).collect();
    let mut v = v0.to_vec();
    let stats = damped_newton(
        "poisson",
        &mut v,
        |v| {
            poisson_residual(v, phi_n, phi_p, phi_d, mesh, bc, params)
                .iter()
                .zip(&measures)
                .map(|(r, m)| r / m)
                .collect()
        },
        |v, r| {
            let mut j = base.clone();
            for k in 0..v.len() {
                let dc = Species::Electrons.density_derivative(phi_n[k], v[k])
                    + Species::Holes.density_derivative(phi_p[k], v[k])
                    + Species::Vacancies.density_derivative(phi_d[k], v[k]);
                j.add(k, k, measures[k] * dc);
            }
            let rhs: Vec<f64> = r.iter().zip(&measures).map(|(r, m)| -r * m).collect();
            j.solve(&rhs).map_err(|source| SolverError::Singular {
                stage: "poisson",
                source,
            })
        },
        config,
    )?;
    Ok((v, stats))
}
