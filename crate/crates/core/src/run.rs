//! Running a resolved scenario through all of its boundary stages.

use crate::config::Scenario;
use crate::device::{lambda_const, SystemState};
use crate::diagnostics::{
    check_energy_inequality, monitor_norms, BoundednessReport, GronwallConstants, InequalityMode, InequalityReport,
    MonitorNorms,
};
use crate::solver::{run_transient_with, Schedule, SolverError, StepRecord};
use serde::{Deserialize, Serialize};

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    /// Step log; step 0 is the initial state.
    pub records: Vec<StepRecord>,
    pub norms: Vec<MonitorNorms>,
    pub dumps: Vec<SystemState>,
    pub final_state: SystemState,
    /// Largest `Λ` over the boundary stages.
    pub lambda: f64,
    pub inequality: InequalityReport,
    pub bounds: Vec<BoundednessReport>,
    pub rejected_steps: usize,
}

impl RunOutput {
    fn new(initial: &SystemState) -> Self {
        Self {
            records: Vec::new(),
            norms: Vec::new(),
            dumps: Vec::new(),
            final_state: initial.clone(),
            lambda: 0.0,
            inequality: InequalityReport {
                lambda: 0.0,
                mode: InequalityMode::Decay,
                tolerance: 0.0,
                verdicts: Vec::new(),
                passed: 0,
                failed: 0,
                min_slack: f64::INFINITY,
            },
            bounds: Vec::new(),
            rejected_steps: 0,
        }
    }

    pub fn bounds_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass())
    }

    /// `Σ dt · Diss` over the accepted steps.
    pub fn total_dissipation(&self) -> f64 {
        0.0 + self.records.iter().skip(1).map(|r| r.dt * r.dissipation).sum::<f64>()
    }

    /// `|∫D(T) - ∫D(0)| / ∫D(0)`.
    pub fn mass_drift(&self) -> f64 {
        let first = self.records.first().map_or(0.0, |r| r.mass_d);
        let last = self.records.last().map_or(0.0, |r| r.mass_d);
        if first == 0.0 {
            0.0
        } else {
            (last - first).abs() / first
        }
    }
}

/// A failed run with everything produced before the failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: SolverError,
    pub partial: Box<RunOutput>,
}

/// Runs every stage of `scenario` in turn. Stage boundaries are forced
/// step ends; the log continues across them with consecutive step numbers.
/// Each stage is checked for the energy inequality against its own
/// boundary data.
pub fn simulate(scenario: &Scenario) -> Result<RunOutput, RunFailure> {
    let mut out = RunOutput::new(&scenario.initial);
    let mut state = scenario.initial.clone();
    let tolerance = 10.0 * scenario.solver.newton_tol;
    let rule = scenario.solver.edge_density;
    for (i, stage) in scenario.stages.iter().enumerate() {
        let schedule = Schedule {
            final_time: stage.end,
            dump_times: scenario
                .output
                .dump_times
                .iter()
                .copied()
                .filter(|&t| if i == 0 { t <= stage.end } else { t > state.t && t <= stage.end })
                .collect(),
            keep_states: false,
            ceiling_factor: scenario.output.ceiling_factor,
        };
        let offset = out.records.last().map_or(0, |r| r.step);
        let mut records = Vec::new();
        let mut norms = Vec::new();
        let result = run_transient_with(
            &state,
            &schedule,
            &scenario.mesh,
            &stage.bc,
            &scenario.params,
            &scenario.solver,
            |s, r| {
                let mut r = r.clone();
                r.step += offset;
                records.push(r);
                norms.push(monitor_norms(s, &scenario.mesh, &stage.bc, rule));
            },
        );
        let constants = GronwallConstants::derived(&stage.bc, &scenario.mesh);
        let skip = usize::from(i > 0);
        let lambda = lambda_const(&stage.bc, &scenario.mesh);
        out.lambda = out.lambda.max(lambda);
        let check = check_energy_inequality(&records, lambda, tolerance, constants);
        merge(&mut out.inequality, check);
        out.records.extend(records.into_iter().skip(skip));
        out.norms.extend(norms.into_iter().skip(skip));
        match result {
            Ok(tr) => {
                out.rejected_steps += tr.rejected_steps;
                out.dumps.extend(tr.dumps.into_iter().skip_while(|d| i > 0 && d.t <= state.t));
                out.bounds.push(tr.bounds);
                state = tr.states.last().expect("initial state is kept").clone();
                out.final_state = state.clone();
            }
            Err(error) => {
                return Err(RunFailure {
                    error,
                    partial: Box::new(out),
                })
            }
        }
    }
    Ok(out)
}

fn merge(into: &mut InequalityReport, stage: InequalityReport) {
    if stage.lambda > into.lambda {
        into.lambda = stage.lambda;
    }
    if stage.mode == InequalityMode::Gronwall {
        into.mode = InequalityMode::Gronwall;
    }
    into.tolerance = stage.tolerance;
    into.passed += stage.passed;
    into.failed += stage.failed;
    into.min_slack = into.min_slack.min(stage.min_slack);
    into.verdicts.extend(stage.verdicts);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioFile;
    use std::path::Path;

    fn scenario(mode: &str) -> Scenario {
        let text = format!(
            r#"
name = "t"
[device]
geometry = {{ kind = "interval", length = 1.0, cells = 12 }}
contacts = [{{ side = "left" }}, {{ side = "right" }}]
lambda = 0.3
final_time = 0.2
doping = {{ kind = "constant", value = 0.5 }}
[device.initial]
d = {{ kind = "linear", value = 0.3, gradient = [0.4, 0.0] }}
[boundary]
{mode}
[solver]
dt = 0.02
dt_max = 0.02
[output]
directory = "out"
dump_times = [0.0, 0.1, 0.2]
"#
        );
        Scenario::resolve(ScenarioFile::from_toml(&text).unwrap(), Path::new(".")).unwrap()
    }

    #[test]
    fn equilibrium_boundary_decays() {
        let out = simulate(&scenario("mode = \"equilibrium\"")).unwrap();
        assert_eq!(out.lambda, 0.0);
        assert!(out.inequality.all_pass());
        assert_eq!(out.dumps.len(), 3);
        assert_eq!(out.records.len(), out.norms.len());
        assert!(out.mass_drift() < 1e-12);
    }

    #[test]
    fn ramp_log_is_continuous() {
        let out = simulate(&scenario("mode = \"ramp\"\nvoltage = 1.0\nramp_time = 0.1")).unwrap();
        let steps: Vec<usize> = out.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, (0..steps.len()).collect::<Vec<_>>());
        assert!(out.records.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(out.dumps.iter().map(|d| d.t).collect::<Vec<_>>(), vec![0.0, 0.1, 0.2]);
        assert!(out.lambda > 0.0);
        assert_eq!(out.bounds.len(), crate::config::RAMP_STAGES + 1);
        assert!(out.mass_drift() < 1e-12);
    }
}
