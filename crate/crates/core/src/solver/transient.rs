use super::{advance, SolverConfig, SolverError};
use crate::device::{lambda_const, BoundaryData, DeviceMesh, ModelParameters, SystemState};
use crate::diagnostics::{
    dissipation, free_energy, BoundednessMonitor, BoundednessReport, EnergyTracker, GronwallConstants,
};
use serde::{Deserialize, Serialize};

/// What to keep from a transient run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub final_time: f64,
    /// Times at which full states are stored; steps are shortened to land on
    /// them exactly.
    pub dump_times: Vec<f64>,
    /// Keep every accepted state, not only the first, last and dumps.
    pub keep_states: bool,
    /// Blow-up ceiling as a multiple of the largest initial or boundary
    /// density.
    pub ceiling_factor: f64,
}

impl Schedule {
    pub fn until(final_time: f64) -> Self {
        Self {
            final_time,
            dump_times: Vec::new(),
            keep_states: false,
            ceiling_factor: 10.0,
        }
    }
}

/// One row of the step log. Step 0 describes the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub gummel_iters: usize,
    pub newton_iters: usize,
    pub residual: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub dissipation: f64,
    #[serde(rename = "mass_D")]
    pub mass_d: f64,
    pub min_n: f64,
    pub max_n: f64,
    pub min_p: f64,
    pub max_p: f64,
    #[serde(rename = "min_D")]
    pub min_d: f64,
    #[serde(rename = "max_D")]
    pub max_d: f64,
    pub energy_decay_ok: bool,
}

impl StepRecord {
    fn new(step: usize, dt: f64, state: &SystemState, energy: f64, dissipation: f64, mesh: &DeviceMesh) -> Self {
        let (min_n, max_n) = extrema(&state.n);
        let (min_p, max_p) = extrema(&state.p);
        let (min_d, max_d) = extrema(&state.d);
        Self {
            step,
            t: state.t,
            dt,
            gummel_iters: 0,
            newton_iters: 0,
            residual: 0.0,
            energy,
            dissipation,
            mass_d: mesh.integrate(&state.d),
            min_n,
            max_n,
            min_p,
            max_p,
            min_d,
            max_d,
            energy_decay_ok: true,
        }
    }
}

fn extrema(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Initial state, then either every accepted state or only the last one.
    pub states: Vec<SystemState>,
    pub records: Vec<StepRecord>,
    pub dumps: Vec<SystemState>,
    pub lambda: f64,
    pub rejected_steps: usize,
    pub bounds: BoundednessReport,
}

impl Trajectory {
    pub fn final_state(&self) -> &SystemState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn recoverable(e: &SolverError) -> bool {
    matches!(
        e,
        SolverError::NonConvergence { .. } | SolverError::StepRejected(_) | SolverError::Singular { .. }
    )
}

/// Runs [`run_transient_with`] without an observer.
pub fn run_transient(
    initial: &SystemState,
    schedule: &Schedule,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
    config: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    run_transient_with(initial, schedule, mesh, bc, params, config, |_, _| {})
}

/// Adaptive backward-Euler integration from `initial.t` to
/// `schedule.final_time`.
///
/// Failed steps are retried with `dt · dt_shrink`; once that would fall
/// below `dt_min` the run stops with `TimeStepTooSmall`. Steps converging in
/// at most `easy_gummel_iters` Gummel iterations grow `dt` by `dt_growth`,
/// capped at `dt_max`. `observe` sees every accepted state with its log
/// record, so callers can stream output and keep it on failure.
#[allow(clippy::too_many_arguments)]
pub fn run_transient_with<F>(
    initial: &SystemState,
    schedule: &Schedule,
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
    config: &SolverConfig,
    mut observe: F,
) -> Result<Trajectory, SolverError>
where
    F: FnMut(&SystemState, &StepRecord),
{
    config.validate()?;
    let lambda = lambda_const(bc, mesh);
    let rule = config.edge_density;
    let tolerance = 10.0 * config.newton_tol;
    let end = schedule.final_time;
    let eps_t = 1e-12 * end.abs().max(1.0);

    let energy0 = free_energy(initial, bc, mesh, params);
    let mut tracker = EnergyTracker::new(lambda, energy0, tolerance, GronwallConstants::derived(bc, mesh));
    let ceiling = schedule.ceiling_factor * BoundednessMonitor::reference_max(initial, bc);
    let mut monitor = BoundednessMonitor::new(ceiling);
    monitor.observe(0, initial, mesh);

    let first = StepRecord::new(0, 0.0, initial, energy0, dissipation(initial, mesh, bc, rule), mesh);
    observe(initial, &first);
    let mut records = vec![first];
    let mut states = vec![initial.clone()];
    let mut dumps = Vec::new();
    let mut pending: Vec<f64> = schedule
        .dump_times
        .iter()
        .copied()
        .filter(|&t| t >= initial.t - eps_t && t <= end + eps_t)
        .collect();
    pending.sort_by(f64::total_cmp);
    pending.dedup_by(|a, b| (*a - *b).abs() <= eps_t);
    while pending.first().is_some_and(|&t| (t - initial.t).abs() <= eps_t) {
        dumps.push(initial.clone());
        pending.remove(0);
    }

    let mut state = initial.clone();
    let mut dt = config.dt;
    let mut rejected = 0;
    let mut step = 0;
    while state.t < end - eps_t {
        let target = pending.first().copied().unwrap_or(end).min(end);
        let remaining = target - state.t;
        let truncated = remaining < dt * (1.0 + 1e-12);
        let h = if truncated { remaining } else { dt };
        match advance(&state, h, mesh, bc, params, config) {
            Ok((mut next, report)) => {
                if truncated {
                    next.t = target;
                }
                step += 1;
                let energy = free_energy(&next, bc, mesh, params);
                let diss = dissipation(&next, mesh, bc, rule);
                let mut record = StepRecord::new(step, h, &next, energy, diss, mesh);
                record.gummel_iters = report.gummel_iters;
                record.newton_iters = report.newton_iters;
                record.residual = report.residual;
                record.energy_decay_ok = tracker.push(next.t - initial.t, h, energy, diss).pass;
                monitor.observe(step, &next, mesh);
                observe(&next, &record);
                records.push(record);
                if truncated && pending.first().is_some_and(|&t| (t - next.t).abs() <= eps_t) {
                    dumps.push(next.clone());
                    pending.remove(0);
                }
                if schedule.keep_states {
                    states.push(next.clone());
                }
                if report.gummel_iters <= config.easy_gummel_iters && !truncated {
                    dt = (dt * config.dt_growth).min(config.dt_max);
                }
                state = next;
            }
            Err(e) if recoverable(&e) => {
                rejected += 1;
                let smaller = h * config.dt_shrink;
                if smaller < config.dt_min * (1.0 - 1e-12) {
                    return Err(SolverError::TimeStepTooSmall {
                        t: state.t,
                        dt: smaller,
                        dt_min: config.dt_min,
                        cause: Box::new(e),
                    });
                }
                dt = smaller;
            }
            Err(e) => return Err(e),
        }
    }
    if !schedule.keep_states && step > 0 {
        states.push(state);
    }
    Ok(Trajectory {
        states,
        records,
        dumps,
        lambda,
        rejected_steps: rejected,
        bounds: monitor.report(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{validate_initial_data, ContactSpec, Geometry, MeshSpec, Profile, Side};

    fn setup(cells: usize, bias: f64) -> (DeviceMesh, BoundaryData, ModelParameters) {
        let m = DeviceMesh::build(&MeshSpec {
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
        .unwrap();
        let bc = BoundaryData::new(
            Profile::constant(0.5),
            Profile::constant(0.5),
            Profile::Linear {
                value: 0.0,
                gradient: [bias, 0.0],
            },
            &m,
        )
        .unwrap();
        let params = ModelParameters::new(0.3, &Profile::constant(0.5), &m, 1.0).unwrap();
        (m, bc, params)
    }

    #[test]
    fn zero_final_time_keeps_only_the_initial_state() {
        let (m, bc, params) = setup(8, 0.0);
        let s0 = validate_initial_data(&[0.5; 8], &[0.5; 8], &[0.5; 8], &m, &bc, &params, 1e-12).unwrap();
        let tr = run_transient(&s0, &Schedule::until(0.0), &m, &bc, &params, &SolverConfig::default()).unwrap();
        assert_eq!(tr.states.len(), 1);
        assert_eq!(tr.records.len(), 1);
    }

    #[test]
    fn lands_on_dump_and_final_times() {
        let (m, bc, params) = setup(16, 1.0);
        let d0: Vec<f64> = (0..16).map(|i| 0.2 + 0.02 * i as f64).collect();
        let s0 = validate_initial_data(&[0.5; 16], &[0.5; 16], &d0, &m, &bc, &params, 1e-12).unwrap();
        let schedule = Schedule {
            final_time: 0.3,
            dump_times: vec![0.0, 0.125, 0.3],
            keep_states: true,
            ceiling_factor: 10.0,
        };
        let config = SolverConfig {
            dt: 0.04,
            dt_max: 0.05,
            ..SolverConfig::default()
        };
        let tr = run_transient(&s0, &schedule, &m, &bc, &params, &config).unwrap();
        let times: Vec<f64> = tr.dumps.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.125, 0.3]);
        assert_eq!(tr.final_state().t, 0.3);
        assert_eq!(tr.states.len(), tr.records.len());
        assert!(tr.records.iter().skip(1).all(|r| r.dt <= 0.05 * (1.0 + 1e-12)));
        let mass0 = tr.records[0].mass_d;
        assert!(tr.records.iter().all(|r| (r.mass_d - mass0).abs() <= 1e-12 * mass0));
    }

    #[test]
    fn fixed_step_failure_is_reported() {
        let (m, bc, params) = setup(8, 0.0);
        let d0: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 + 0.1).collect();
        let s0 = validate_initial_data(&[0.5; 8], &[0.5; 8], &d0, &m, &bc, &params, 1e-12).unwrap();
        let config = SolverConfig {
            gummel_max_iter: 1,
            gummel_tol: 1e-300,
            ..SolverConfig::fixed_step(0.1)
        };
        let err = run_transient(&s0, &Schedule::until(1.0), &m, &bc, &params, &config).unwrap_err();
        match err {
            SolverError::TimeStepTooSmall { cause, .. } => {
                assert!(matches!(*cause, SolverError::NonConvergence { stage: "gummel", .. }))
            }
            other => panic!("unexpected {other}"),
        }
    }
}
