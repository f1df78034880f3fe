//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Built without the libtest harness so the table always reaches stdout.

use memtrans_core::config::{Overrides, Scenario};
use memtrans_core::constants;
use memtrans_core::device::{
    validate_initial_data, BoundaryData, ContactSpec, DeviceMesh, Geometry, MeshSpec, ModelParameters, Profile, Side,
};
use memtrans_core::run::{simulate, RunOutput};
use memtrans_core::solver::{run_transient, Schedule, SolverConfig, StepRecord};
use memtrans_core::verify::{
    gprime_ratios, gprime_vs_second_difference, h_tilde_prime_ratios, lemma_2_4_ratios, lemma_2_6_power_ratios,
    lemma_2_6_tilde_power_ratios, lemma_2_6_tilde_ratios, negative_sandwich, poincare_trials, positive_sandwich,
    roundtrip_errors, zgprime_slope_ratios, POINCARE_SEED,
};
use memtrans_core::statistics::FermiDiracOrder;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name), &Overrides::default()).expect("shipped scenario is valid")
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn min(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) })
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn statistics_round_trip() -> Verdict {
    let start = Instant::now();
    let errors = roundtrip_errors();
    let worst = max(errors.iter().copied());
    let t = start.elapsed();
    verdict(
        errors.len() == 500 && worst <= 1e-8 && within(t, 5.0),
        format!("500 points, max |g(F(y)) - y| = {worst:.2e} (<= 1e-8), {:.2} s (< 5 s)", t.as_secs_f64()),
    )
}

fn sandwiches() -> Verdict {
    let sets = [
        ("F_-1/2, z <= 0", negative_sandwich(FermiDiracOrder::MINUS_HALF)),
        ("F_1/2, z <= 0", negative_sandwich(FermiDiracOrder::HALF)),
        ("F_1/2, z > 0", positive_sandwich()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, ratios) in &sets {
        let bad = ratios.iter().filter(|r| !(**r >= 1.0)).count();
        pass &= bad == 0 && ratios.len() == 400;
        parts.push(format!("{name}: {bad}/{} violations", ratios.len()));
    }
    verdict(pass, parts.join("; "))
}

fn envelopes() -> Verdict {
    let c = constants::frozen();
    let gp = gprime_ratios();
    let slope = zgprime_slope_ratios();
    let gp_bad = gp
        .iter()
        .filter(|(_, r)| !(c.gprime_lower..=c.gprime_upper).contains(r))
        .count();
    let slope_bad = slope.iter().filter(|(_, r)| !(*r <= c.zgprime_slope)).count();
    verdict(
        gp_bad == 0 && slope_bad == 0,
        format!(
            "g' ratio in [{:.4}, {:.4}] vs frozen [{:.4}, {:.4}], {gp_bad} violations; (zg')' ratio max {:.4} vs {:.4}, {slope_bad} violations",
            min(gp.iter().map(|p| p.1)),
            max(gp.iter().map(|p| p.1)),
            c.gprime_lower,
            c.gprime_upper,
            max(slope.iter().map(|p| p.1)),
            c.zgprime_slope
        ),
    )
}

fn truncation_lattice() -> Verdict {
    let c = constants::frozen();
    let start = Instant::now();
    let upper = [
        ("T_k^5/3 vs G", lemma_2_4_ratios(), c.lemma_2_4),
        ("s^5/3", lemma_2_6_power_ratios(), c.lemma_2_6_power),
        ("T^7/6", lemma_2_6_tilde_ratios(), c.lemma_2_6_tilde),
        ("g~^10/7", lemma_2_6_tilde_power_ratios(), c.lemma_2_6_tilde_power),
        ("g' <= G''", gprime_vs_second_difference(), 1.0 + 1e-9),
    ];
    let lower = h_tilde_prime_ratios();
    let t = start.elapsed();
    let mut pass = within(t, 60.0);
    let mut parts = Vec::new();
    for (name, ratios, bound) in &upper {
        let bad = ratios.iter().filter(|r| !(**r <= *bound)).count();
        pass &= bad == 0 && ratios.len() >= 125;
        parts.push(format!("{name}: {}pts/{bad}", ratios.len()));
    }
    let bad = lower.iter().filter(|r| !(**r >= 1.0)).count();
    pass &= bad == 0 && lower.len() >= 125;
    parts.push(format!("h~': {}pts/{bad}", lower.len()));
    verdict(pass, format!("{} (points/violations), {:.2} s (< 60 s)", parts.join(", "), t.as_secs_f64()))
}

fn equilibrium(all: &mut Vec<StepRecord>) -> Verdict {
    let s = load("equilibrium.toml");
    let out = simulate(&s).expect("equilibrium run");
    let diff = out.final_state.max_abs_difference(&s.initial);
    let e0 = out.records[0].energy;
    let drift = max(out.records.iter().map(|r| (r.energy - e0).abs()));
    let t = out.final_state.t;
    all.extend(out.records);
    verdict(
        diff <= 1e-8 && drift <= 1e-8 && (t - 1.0).abs() < 1e-12,
        format!("T = {t}, |state(T) - state(0)|_inf = {diff:.2e} (<= 1e-8), max |E(t) - E(0)| = {drift:.2e} (<= 1e-8)"),
    )
}

fn energy_decay(all: &mut Vec<StepRecord>) -> Verdict {
    let s = load("perturbed.toml");
    let start = Instant::now();
    let out = simulate(&s).expect("perturbed run");
    let t = start.elapsed();
    let steps = out.records.len() - 1;
    let worst = max(out.records.windows(2).map(|w| w[1].energy - w[0].energy));
    let lambda = out.lambda;
    all.extend(out.records);
    verdict(
        lambda == 0.0 && steps == 200 && worst <= 1e-8 && within(t, 30.0),
        format!(
            "Lambda = {lambda}, {steps} steps, max E(m+1) - E(m) = {worst:.2e} (<= 1e-8), {:.2} s (< 30 s)",
            t.as_secs_f64()
        ),
    )
}

fn mass_conservation(all: &mut Vec<StepRecord>) -> Verdict {
    let mut s = load("biased.toml");
    s.solver = SolverConfig {
        anderson_depth: s.solver.anderson_depth,
        ..SolverConfig::fixed_step(1e-3)
    };
    let out: RunOutput = simulate(&s).expect("1000-step biased run");
    let steps = out.records.len() - 1;
    let m0 = out.records[0].mass_d;
    let worst = max(out.records.iter().map(|r| (r.mass_d - m0).abs() / m0));
    all.extend(out.records);
    verdict(
        steps >= 1000 && worst <= 1e-10,
        format!("biased 1D, {steps} steps, max relative drift of the D mass = {worst:.2e} (<= 1e-10)"),
    )
}

fn bounds(all: &mut Vec<StepRecord>) -> Verdict {
    let s = load("biased_2d.toml");
    let start = Instant::now();
    let out = simulate(&s).expect("2D biased run");
    let t = start.elapsed();
    let report = &out.bounds[0];
    all.extend(out.records.iter().cloned());
    let min_n = min(all.iter().map(|r| r.min_n));
    let min_p = min(all.iter().map(|r| r.min_p));
    let min_d = min(all.iter().map(|r| r.min_d));
    let max_d = max(all.iter().map(|r| r.max_d));
    let ok = min_n >= 0.0 && min_p >= 0.0 && min_d >= 0.0 && max_d <= 1.0 - 1e-12;
    verdict(
        ok && out.bounds_pass() && within(t, 300.0),
        format!(
            "{} records over all runs: min n {min_n:.3e}, min p {min_p:.3e}, D in [{min_d:.4}, {max_d:.6}]; \
             2D U=5 T={}: max n {:.4}, max p {:.4} vs ceiling {:.4}, {:.1} s (< 300 s)",
            all.len(),
            out.final_state.t,
            max(report.running_max_n.iter().copied()),
            max(report.running_max_p.iter().copied()),
            report.ceiling,
            t.as_secs_f64()
        ),
    )
}

fn poincare() -> Verdict {
    let start = Instant::now();
    let trials = poincare_trials(POINCARE_SEED, 100, 32);
    let t = start.elapsed();
    let worst = min(trials.iter().map(|t| t.result.slack));
    let bad = trials.iter().filter(|t| !(t.result.slack >= 0.0)).count();
    verdict(
        trials.len() == 100 && bad == 0 && within(t, 10.0),
        format!("100 fields on 32 cells, min slack {worst:.3e}, {bad} negative, {:.2} s (< 10 s)", t.as_secs_f64()),
    )
}

fn self_convergence(all: &mut Vec<StepRecord>) -> Verdict {
    let mesh = DeviceMesh::build(&MeshSpec {
        geometry: Geometry::Interval {
            length: 1.0,
            cells: 16,
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
            gradient: [5.0, 0.0],
        },
        &mesh,
    )
    .unwrap();
    let params = ModelParameters::new(0.3, &Profile::constant(0.5), &mesh, 0.1).unwrap();
    let ext = bc.cells();
    let d0: Vec<f64> = mesh.cells().iter().map(|c| 0.5 + 0.3 * (3.0 * c.centroid[0]).cos()).collect();
    let s0 = validate_initial_data(&ext.n, &ext.p, &d0, &mesh, &bc, &params, 1e-12).unwrap();
    let finals: Vec<_> = [0.01, 0.005, 0.0025, 0.00125]
        .iter()
        .map(|&dt| {
            let config = SolverConfig {
                newton_tol: 1e-12,
                gummel_tol: 1e-12,
                ..SolverConfig::fixed_step(dt)
            };
            let tr = run_transient(&s0, &Schedule::until(0.1), &mesh, &bc, &params, &config).expect("refinement run");
            all.extend(tr.records.iter().cloned());
            tr.final_state().clone()
        })
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| w[0].max_abs_difference(&w[1])).collect();
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    verdict(
        orders.iter().all(|p| (0.8..=1.2).contains(p)),
        format!(
            "biased 1D, T = 0.1, dt 0.01 halved 3 times: successive differences {:.3e}, {:.3e}, {:.3e}; observed orders {:.4}, {:.4} (in [0.8, 1.2])",
            diffs[0], diffs[1], diffs[2], orders[0], orders[1]
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario_path("perturbed.toml");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_memtrans"))
            .args(["run", "--seed", "5", "--tend", "0.25", "--out"])
            .arg(&out)
            .arg(&config)
            .output()
            .expect("binary runs");
        (status.status.success(), out)
    };
    let (ok_a, a) = run("a");
    let (ok_b, b) = run("b");
    let files = ["steps.csv", "norms.csv", "state_t0.000000.csv", "state_t0.100000.csv"];
    let same = files.iter().all(|f| match (std::fs::read(a.join(f)), std::fs::read(b.join(f))) {
        (Ok(x), Ok(y)) => x == y && !x.is_empty(),
        _ => false,
    });
    verdict(ok_a && ok_b && same, format!("two `memtrans run --seed 5` runs: {} byte-identical", files.join(", ")))
}

/// A criterion; runs that produce step records append them for the
/// boundedness check.
type Criterion = Box<dyn FnOnce(&mut Vec<StepRecord>) -> Verdict>;

fn main() -> ExitCode {
    let mut all = Vec::new();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("statistics round-trip", Box::new(|_| statistics_round_trip())),
        ("Fermi-Dirac sandwiches", Box::new(|_| sandwiches())),
        ("g' envelopes", Box::new(|_| envelopes())),
        ("truncation inequality lattice", Box::new(|_| truncation_lattice())),
        ("equilibrium fixed point", Box::new(equilibrium)),
        ("free-energy decay", Box::new(energy_decay)),
        ("vacancy mass conservation", Box::new(mass_conservation)),
        ("self-convergence", Box::new(self_convergence)),
        ("Poincare-Wirtinger", Box::new(|_| poincare())),
        ("determinism", Box::new(|_| determinism())),
        // last, so the sign and range checks cover every run above
        ("boundedness", Box::new(bounds)),
    ];
    // printed in criterion order
    let order = [1, 2, 3, 4, 5, 6, 7, 10, 9, 11, 8];
    let mut results = Vec::new();
    for ((name, check), id) in criteria.into_iter().zip(order) {
        let start = Instant::now();
        let v = check(&mut all);
        results.push((id, name, v, start.elapsed()));
    }
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    println!("acceptance criteria");
    for (id, name, v, t) in &results {
        if !v.pass {
            failed += 1;
        }
        println!(
            "[{}] {id:>2} {name}: {} ({:.2} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.as_secs_f64()
        );
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
