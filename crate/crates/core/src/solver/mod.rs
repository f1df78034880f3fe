//! Implicit finite-volume time stepping in chemical-potential variables.

mod flux;
pub mod linalg;
mod poisson;
mod step;
mod transient;
mod transport;

pub use flux::{assemble_fluxes, edge_density, species_flux, EdgeDensity, EdgeFlux, Species, SpeciesFlux};
pub use poisson::{poisson_residual, solve_poisson, solve_poisson_nonlinear};
pub use step::{advance, StepReport};
pub use transient::{run_transient, run_transient_with, Schedule, StepRecord, Trajectory};
pub use transport::{species_jacobian, species_residual, solve_species};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("{stage} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("singular linear system in {stage}: {source}")]
    Singular {
        stage: &'static str,
        source: linalg::LinalgError,
    },
    #[error("time step {dt:.3e} fell below dt_min = {dt_min:.3e} at t = {t}: {cause}")]
    TimeStepTooSmall {
        t: f64,
        dt: f64,
        dt_min: f64,
        cause: Box<SolverError>,
    },
    #[error("invalid solver configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

/// Numerical controls. Defaults: Newton tolerance 1e-10 (residuals scaled by
/// `dt / m(K)`), Gummel tolerance 1e-9 on potential updates, backtracking
/// factor 0.5, step growth 1.2 after easy steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub gummel_tol: f64,
    pub gummel_max_iter: usize,
    /// Line-search backtracking factor.
    pub damping: f64,
    /// Guard distance of `D` from 1.
    pub saturation_eps: f64,
    pub edge_density: EdgeDensity,
    /// Largest Newton update (max norm) before the line search.
    pub max_newton_step: f64,
    pub dt_growth: f64,
    pub dt_shrink: f64,
    /// Steps that converge within this many Gummel iterations grow `dt`.
    pub easy_gummel_iters: usize,
    /// History length of the Anderson acceleration of the Gummel potential
    /// update; 0 gives the plain Gummel iteration.
    pub anderson_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            dt_min: 1e-8,
            dt_max: 1e-1,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            gummel_tol: 1e-9,
            gummel_max_iter: 100,
            damping: 0.5,
            saturation_eps: 1e-12,
            edge_density: EdgeDensity::Mean,
            max_newton_step: 10.0,
            dt_growth: 1.2,
            dt_shrink: 0.5,
            easy_gummel_iters: 12,
            anderson_depth: 5,
        }
    }
}

impl SolverConfig {
    /// Fixed step size: `dt_min = dt = dt_max`.
    pub fn fixed_step(dt: f64) -> Self {
        Self {
            dt,
            dt_min: dt,
            dt_max: dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SolverError::InvalidConfig {
                    field,
                    reason: format!("must be finite and positive, found {v}"),
                })
            }
        };
        positive("dt", self.dt)?;
        positive("dt_min", self.dt_min)?;
        positive("dt_max", self.dt_max)?;
        positive("newton_tol", self.newton_tol)?;
        positive("gummel_tol", self.gummel_tol)?;
        positive("saturation_eps", self.saturation_eps)?;
        positive("max_newton_step", self.max_newton_step)?;
        if !(self.dt_min <= self.dt && self.dt <= self.dt_max) {
            return Err(SolverError::InvalidConfig {
                field: "dt",
                reason: format!(
                    "must satisfy dt_min <= dt <= dt_max ({} <= {} <= {})",
                    self.dt_min, self.dt, self.dt_max
                ),
            });
        }
        for (field, v) in [("damping", self.damping), ("dt_shrink", self.dt_shrink)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(SolverError::InvalidConfig {
                    field,
                    reason: format!("must lie in (0, 1), found {v}"),
                });
            }
        }
        if !(self.dt_growth >= 1.0 && self.dt_growth.is_finite()) {
            return Err(SolverError::InvalidConfig {
                field: "dt_growth",
                reason: format!("must be >= 1, found {}", self.dt_growth),
            });
        }
        if !(self.saturation_eps < 0.5) {
            return Err(SolverError::InvalidConfig {
                field: "saturation_eps",
                reason: "must be below 1/2".into(),
            });
        }
        for (field, v) in [
            ("newton_max_iter", self.newton_max_iter),
            ("gummel_max_iter", self.gummel_max_iter),
        ] {
            if v == 0 {
                return Err(SolverError::InvalidConfig {
                    field,
                    reason: "must be at least 1".into(),
                });
            }
        }
        Ok(())
    }
}

/// Outcome of a damped Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on `F(x) = 0` with a residual-norm line search.
///
/// `residual` returns the scaled residual, `step` the Newton direction for
/// the current iterate. After the scaled residual drops below `tol`, one
/// further full step is taken when it does not increase the residual; this
/// drives conservation errors down to round-off.
pub(crate) fn damped_newton<R, S>(
    stage: &'static str,
    x: &mut Vec<f64>,
    mut residual: R,
    mut step: S,
    config: &SolverConfig,
) -> Result<NewtonStats, SolverError>
where
    R: FnMut(&[f64]) -> Vec<f64>,
    S: FnMut(&[f64], &[f64]) -> Result<Vec<f64>, SolverError>,
{
    let mut r = residual(x);
    let mut norm = l2(&r);
    let mut iterations = 0;
    loop {
        if max_abs(&r) <= config.newton_tol && norm.is_finite() {
            // polish
            if let Ok(dx) = step(x, &r) {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
                let rt = residual(&trial);
                let nt = l2(&rt);
                if nt.is_finite() && nt <= norm {
                    *x = trial;
                    r = rt;
                }
            }
            return Ok(NewtonStats {
                iterations,
                residual: max_abs(&r),
            });
        }
        if iterations >= config.newton_max_iter || !norm.is_finite() {
            return Err(SolverError::NonConvergence {
                stage,
                iterations,
                residual: max_abs(&r),
            });
        }
        iterations += 1;
        let mut dx = step(x, &r)?;
        let big = max_abs(&dx);
        if big > config.max_newton_step {
            let s = config.max_newton_step / big;
            dx.iter_mut().for_each(|v| *v *= s);
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + alpha * b).collect();
            let rt = residual(&trial);
            let nt = l2(&rt);
            if nt.is_finite() && (nt <= (1.0 - 1e-4 * alpha) * norm || max_abs(&rt) <= config.newton_tol) {
                *x = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            alpha *= config.damping;
        }
        if !accepted {
            return Err(SolverError::NonConvergence {
                stage,
                iterations,
                residual: max_abs(&r),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
        SolverConfig::fixed_step(0.05).validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        let mut c = SolverConfig::default();
        c.dt = 1.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.damping = 1.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::default();
        c.newton_tol = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn newton_solves_scalar_equation() {
        let mut x = vec![10.0];
        let stats = damped_newton(
            "test",
            &mut x,
            |x| vec![x[0].exp() - 2.0],
            |x, r| Ok(vec![-r[0] / x[0].exp()]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((x[0] - 2f64.ln()).abs() < 1e-14);
        assert!(stats.iterations > 1);
    }

    #[test]
    fn newton_reports_failure() {
        let mut x = vec![1.0];
        let err = damped_newton(
            "test",
            &mut x,
            |x| vec![x[0] * x[0] + 1.0],
            |x, r| Ok(vec![-r[0] / (2.0 * x[0])]),
            &SolverConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NonConvergence { stage: "test", .. }));
    }
}
