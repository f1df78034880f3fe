use super::flux::check_saturation;
use super::{max_abs, poisson_residual, solve_poisson_nonlinear, solve_species, SolverConfig, SolverError, Species};
use crate::device::{BoundaryData, DeviceMesh, ModelParameters, SystemState};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Iteration counts and final residuals of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub gummel_iters: usize,
    /// Newton iterations summed over every inner solve.
    pub newton_iters: usize,
    /// Largest scaled transport residual at the end of the step.
    pub residual: f64,
    /// Largest Poisson residual per unit cell measure at the new state.
    pub poisson_residual: f64,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Anderson mixing for the fixed-point map `V ↦ P(S(V))`, with `S` the
/// species solves and `P` the nonlinear Poisson solve.
struct Anderson {
    depth: usize,
    dv: Vec<Vec<f64>>,
    df: Vec<Vec<f64>>,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Self {
            depth,
            dv: Vec::new(),
            df: Vec::new(),
            last: None,
        }
    }

    /// Next iterate from the current one and its fixed-point residual
    /// `f = P(S(v)) - v`.
    fn next(&mut self, v: &[f64], f: &[f64]) -> Vec<f64> {
        if self.depth == 0 {
            return v.iter().zip(f).map(|(a, b)| a + b).collect();
        }
        if let Some((v0, f0)) = self.last.take() {
            self.dv.push(v.iter().zip(&v0).map(|(a, b)| a - b).collect());
            self.df.push(f.iter().zip(&f0).map(|(a, b)| a - b).collect());
            if self.dv.len() > self.depth {
                self.dv.remove(0);
                self.df.remove(0);
            }
        }
        self.last = Some((v.to_vec(), f.to_vec()));
        let mut out: Vec<f64> = v.iter().zip(f).map(|(a, b)| a + b).collect();
        let m = self.df.len();
        if m == 0 {
            return out;
        }
        let a = DMatrix::from_fn(f.len(), m, |i, j| self.df[j][i]);
        let b = DVector::from_column_slice(f);
        let svd = a.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let Ok(gamma) = svd.solve(&b, cutoff) else {
            return out;
        };
        for (j, g) in gamma.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o -= g * (self.dv[j][i] + self.df[j][i]);
            }
        }
        out
    }
}

/// One backward-Euler step of length `dt`.
///
/// Gummel loop: nonlinear Poisson at frozen chemical potentials, then one
/// Newton solve per species at frozen `V`, with Anderson acceleration of the
/// potential update. The loop stops once neither `V` nor any chemical
/// potential moves by more than `gummel_tol`. Each pass ends with the species
/// solves, so the returned state carries an exactly conservative vacancy
/// update.
pub fn advance(
    state: &SystemState,
    dt: f64,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
    config: &SolverConfig,
) -> Result<(SystemState, StepReport), SolverError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SolverError::InvalidConfig {
            field: "dt",
            reason: format!("step length must be finite and positive, found {dt}"),
        });
    }
    check_saturation(&state.d, config.saturation_eps)?;

    let mut v = state.v.clone();
    let mut phi = [state.phi_n.clone(), state.phi_p.clone(), state.phi_d.clone()];
    let old = [&state.n, &state.p, &state.d];
    let mut anderson = Anderson::new(config.anderson_depth);
    let mut newton_iters = 0;
    let mut change = f64::INFINITY;

    for iter in 1..=config.gummel_max_iter {
        let (v_poisson, stats) = solve_poisson_nonlinear(&v, &phi[0], &phi[1], &phi[2], mesh, bc, params, config)?;
        newton_iters += stats.iterations;
        let f: Vec<f64> = v_poisson.iter().zip(&v).map(|(a, b)| a - b).collect();
        change = max_abs(&f);
        // the first pass starts from the old potentials, not from S(v)
        v = if iter == 1 { v_poisson } else { anderson.next(&v, &f) };

        let mut residual: f64 = 0.0;
        for (i, species) in Species::ALL.into_iter().enumerate() {
            let (next, stats) = solve_species(species, &phi[i], &v, old[i], dt, mesh, bc, config)?;
            newton_iters += stats.iterations;
            residual = f64::max(residual, stats.residual);
            change = change.max(max_diff(&next, &phi[i]));
            phi[i] = next;
        }

        if change <= config.gummel_tol {
            let [phi_n, phi_p, phi_d] = phi;
            let next = SystemState::from_potentials(state.t + dt, v, phi_n, phi_p, phi_d);
            check_admissible(&next, config)?;
            let poisson = poisson_residual(&next.v, &next.phi_n, &next.phi_p, &next.phi_d, mesh, bc, params)
                .iter()
                .zip(mesh.cells())
                .map(|(r, c)| r / c.measure)
                .collect::<Vec<_>>();
            let report = StepReport {
                gummel_iters: iter,
                newton_iters,
                residual,
                poisson_residual: max_abs(&poisson),
            };
            return Ok((next, report));
        }
    }
    Err(SolverError::NonConvergence {
        stage: "gummel",
        iterations: config.gummel_max_iter,
        residual: change,
    })
}

/// Densities are non-negative and `D` stays below `1 - saturation_eps` by
/// construction; checked anyway so a broken invariant cannot go unnoticed.
fn check_admissible(state: &SystemState, config: &SolverConfig) -> Result<(), SolverError> {
    let bad = |name: &str, k: usize, x: f64| Err(SolverError::StepRejected(format!("{name} = {x} in cell {k}")));
    for (name, field) in [("n", &state.n), ("p", &state.p), ("D", &state.d)] {
        if let Some(k) = field.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad(name, k, field[k]);
        }
    }
    if let Some(k) = state.d.iter().position(|&x| x > 1.0 - config.saturation_eps) {
        return bad("D", k, state.d[k]);
    }
    Ok(())
}
