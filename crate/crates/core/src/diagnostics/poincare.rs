use crate::device::DeviceMesh;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoincareError {
    #[error("hypothesis violated: need mean(u) = {mean} < u_hat = {u_hat} < 1")]
    Hypothesis { mean: f64, u_hat: f64 },
    #[error("u[{cell}] = {value} is outside [0, 1)")]
    Range { cell: usize, value: f64 },
    #[error("field has {found} values for {expected} cells")]
    Length { expected: usize, found: usize },
    #[error("mesh has a single cell, no spectral gap")]
    NoGap,
}

/// Outcome of the nonlinear Poincaré–Wirtinger check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareResult {
    /// `‖f(u)‖²`
    pub value: f64,
    /// `2 m(Ω) f(û)² + 4 C_P (1 + û/(û - u_Ω)) ‖∇f(u)‖²`
    pub bound: f64,
    pub slack: f64,
    pub c_p: f64,
}

/// Inverse of the smallest nonzero eigenvalue of the discrete Neumann
/// Laplacian, i.e. of `L x = λ M x` with `L` the two-point stencil over
/// interior edges and `M = diag(m(K))`. This is the sharp constant in
/// `‖u - u_Ω‖² ≤ C_P ‖∇u‖²` on the mesh.
pub fn spectral_gap_constant(mesh: &DeviceMesh) -> Result<f64, PoincareError> {
    let n = mesh.num_cells();
    if n < 2 {
        return Err(PoincareError::NoGap);
    }
    let s: Vec<f64> = mesh.cells().iter().map(|c| c.measure.sqrt().recip()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for e in mesh.interior_edges() {
        let [k, l] = e.cells;
        let t = e.transmissibility();
        a[(k, k)] += t * s[k] * s[k];
        a[(l, l)] += t * s[l] * s[l];
        a[(k, l)] -= t * s[k] * s[l];
        a[(l, k)] -= t * s[k] * s[l];
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(1.0 / eig[1])
}

fn f(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// Slack of the nonlinear Poincaré–Wirtinger inequality for
/// `f(u) = -log(1 - u)`, computing `C_P` for the mesh.
pub fn poincare_check(u: &[f64], mesh: &DeviceMesh, u_hat: f64) -> Result<PoincareResult, PoincareError> {
    let c_p = spectral_gap_constant(mesh)?;
    poincare_check_with(u, mesh, u_hat, c_p)
}

/// As [`poincare_check`] with a precomputed `C_P`.
pub fn poincare_check_with(u: &[f64], mesh: &DeviceMesh, u_hat: f64, c_p: f64) -> Result<PoincareResult, PoincareError> {
    if u.len() != mesh.num_cells() {
        return Err(PoincareError::Length {
            expected: mesh.num_cells(),
            found: u.len(),
        });
    }
    if let Some(cell) = u.iter().position(|x| !(*x >= 0.0 && *x < 1.0)) {
        return Err(PoincareError::Range { cell, value: u[cell] });
    }
    let mean = mesh.mean(u);
    if !(mean < u_hat && u_hat < 1.0) {
        return Err(PoincareError::Hypothesis { mean, u_hat });
    }
    let fu: Vec<f64> = u.iter().map(|&x| f(x)).collect();
    let value: f64 = mesh.cells().iter().zip(&fu).map(|(c, x)| c.measure * x * x).sum();
    let grad: f64 = mesh
        .interior_edges()
        .iter()
        .map(|e| e.transmissibility() * (fu[e.cells[0]] - fu[e.cells[1]]).powi(2))
        .sum();
    let bound = 2.0 * mesh.total_measure() * f(u_hat).powi(2) + 4.0 * c_p * (1.0 + u_hat / (u_hat - mean)) * grad;
    Ok(PoincareResult {
        value,
        bound,
        slack: bound - value,
        c_p,
    })
}
