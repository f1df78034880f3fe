//! Property suites behind `memtrans verify`: the Fermi–Dirac sandwiches,
//! the `g'` envelopes, the truncation inequalities and the nonlinear
//! Poincaré–Wirtinger check. The lattices here are also what
//! `examples/scan_constants.rs` scans to produce the frozen constants.

use crate::constants::{self, ConstantRow, DerivedConstants, SAFETY_FACTOR};
use crate::device::{ContactSpec, DeviceMesh, Geometry, MeshSpec, Side};
use crate::diagnostics::{poincare_check_with, spectral_gap_constant, PoincareResult};
use crate::regularization::{
    antideriv_g_k_delta, g_k_delta_second_difference, g_tilde_k_delta, h_tilde_k_delta_prime, trunc_t,
    TruncationLevel,
};
use crate::statistics::{fd_half_at_zero, fermi_dirac, g_prime, gamma_fn, inverse_fd_half, FermiDiracOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

pub const TRUNCATION_LEVELS: [u32; 5] = [1, 2, 5, 10, 50];
pub const DELTAS: [f64; 3] = [0.01, 0.1, 0.5];
/// Points per lattice axis in `s`.
pub const S_POINTS: usize = 25;
/// Points of the `z` grids.
pub const Z_POINTS: usize = 400;
pub const Z_RANGE: (f64, f64) = (1e-8, 1e8);
pub const POINCARE_TRIALS: usize = 100;
pub const POINCARE_CELLS: usize = 32;
pub const POINCARE_SEED: u64 = 20_240_601;

/// `n` points spaced evenly in `log10` from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn s_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, S_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    AppendixA,
    Lemma24,
    Lemma26,
    Poincare,
    StatisticsRoundtrip,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = [
        "appendix-a",
        "lemma-2-4",
        "lemma-2-6",
        "poincare",
        "statistics-roundtrip",
        "all",
    ];

    fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::StatisticsRoundtrip,
                Suite::AppendixA,
                Suite::Lemma24,
                Suite::Lemma26,
                Suite::Poincare,
            ],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "appendix-a" => Suite::AppendixA,
            "lemma-2-4" => Suite::Lemma24,
            "lemma-2-6" => Suite::Lemma26,
            "poincare" => Suite::Poincare,
            "statistics-roundtrip" => Suite::StatisticsRoundtrip,
            "all" => Suite::All,
            _ => {
                return Err(format!(
                    "unknown suite `{s}`; expected one of {}",
                    Suite::NAMES.join(", ")
                ))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [
            Suite::AppendixA,
            Suite::Lemma24,
            Suite::Lemma26,
            Suite::Poincare,
            Suite::StatisticsRoundtrip,
            Suite::All,
        ]
        .iter()
        .position(|s| s == self)
        .expect("listed");
        f.write_str(Suite::NAMES[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One property evaluated over a point set. `observed` is the extreme of the
/// checked quantity and `bound` what it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub points: usize,
    pub violations: usize,
    pub relation: Relation,
    pub observed: f64,
    pub bound: f64,
    /// Where `bound` comes from: `exact`, `proof` or `frozen:<name>`.
    pub source: String,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.points > 0
    }

    fn collect(suite: Suite, name: &str, relation: Relation, bound: f64, source: &str, values: &[f64]) -> Self {
        let violations = values
            .iter()
            .filter(|&&v| match relation {
                Relation::AtMost => !(v <= bound),
                Relation::AtLeast => !(v >= bound),
            })
            .count();
        let observed = match relation {
            Relation::AtMost => values.iter().copied().fold(f64::NEG_INFINITY, nan_max),
            Relation::AtLeast => values.iter().copied().fold(f64::INFINITY, nan_min),
        };
        Self {
            suite,
            name: name.to_string(),
            points: values.len(),
            violations,
            relation,
            observed,
            bound,
            source: source.to_string(),
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub provenance: Vec<String>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<22} {:<44} {:>6} {:>5} {:>13}    {:<12} {:<24} verdict",
            "suite", "check", "points", "viol", "observed", "bound", "source"
        )?;
        for c in &self.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            writeln!(
                f,
                "{:<22} {:<44} {:>6} {:>5} {:>13.6e} {} {:<12.6e} {:<24} {}",
                c.suite.to_string(),
                c.name,
                c.points,
                c.violations,
                c.observed,
                rel,
                c.bound,
                c.source,
                if c.pass() { "PASS" } else { "FAIL" }
            )?;
        }
        writeln!(f, "derived constants:")?;
        for line in &self.provenance {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Runs `suite` against the frozen constants.
pub fn run_suite(suite: Suite) -> VerifyReport {
    run_suite_with(suite, constants::frozen())
}

pub fn run_suite_with(suite: Suite, c: &DerivedConstants) -> VerifyReport {
    let mut checks = Vec::new();
    for part in suite.parts() {
        match part {
            Suite::StatisticsRoundtrip => checks.extend(statistics_roundtrip()),
            Suite::AppendixA => checks.extend(appendix_a(c)),
            Suite::Lemma24 => checks.push(lemma_2_4(c)),
            Suite::Lemma26 => checks.extend(lemma_2_6(c)),
            Suite::Poincare => checks.push(poincare(POINCARE_SEED)),
            Suite::All => unreachable!("expanded by parts"),
        }
    }
    let mut provenance = c.provenance.clone();
    provenance.extend(
        c.rows
            .iter()
            .map(|r| format!("{} = {} (observed {}, lattice {})", r.name, r.value, r.observed, r.lattice)),
    );
    VerifyReport { checks, provenance }
}

// --- statistics ----------------------------------------------------------

/// `|g(F_{1/2}(y)) - y|` on 500 points of `[-30, 50]`.
pub fn roundtrip_errors() -> Vec<f64> {
    (0..500)
        .map(|i| {
            let y = -30.0 + 80.0 * i as f64 / 499.0;
            match inverse_fd_half(fermi_dirac(FermiDiracOrder::HALF, y)) {
                Ok(x) => (x - y).abs(),
                Err(_) => f64::NAN,
            }
        })
        .collect()
}

fn statistics_roundtrip() -> Vec<Check> {
    let s = Suite::StatisticsRoundtrip;
    let derivative: Vec<f64> = (0..50)
        .map(|i| {
            let z = -20.0 + 70.0 * i as f64 / 49.0;
            let h = 1e-4;
            let fd = (fermi_dirac(FermiDiracOrder::HALF, z + h) - fermi_dirac(FermiDiracOrder::HALF, z - h)) / (2.0 * h);
            let exact = fermi_dirac(FermiDiracOrder::MINUS_HALF, z);
            (fd - exact).abs() / exact
        })
        .collect();
    vec![
        Check::collect(s, "inverse(F_1/2(y)) = y, y in [-30,50]", Relation::AtMost, 1e-8, "exact", &roundtrip_errors()),
        Check::collect(s, "dF_1/2/dz = F_-1/2 (rel. error)", Relation::AtMost, 1e-6, "exact", &derivative),
    ]
}

// --- Fermi-Dirac sandwiches and envelopes --------------------------------

/// `min(F/lower, upper/F)` for the `z ≤ 0` sandwich `e^z/2 ≤ F_j ≤ e^z`;
/// the sandwich holds iff this is at least 1. Below `z = -30` the gap to
/// `e^z` falls under double rounding, so the grid stops there.
pub fn negative_sandwich(order: FermiDiracOrder) -> Vec<f64> {
    let mut z: Vec<f64> = log_grid(1e-8, 30.0, Z_POINTS - 1).into_iter().map(|t| -t).collect();
    z.push(0.0);
    z.into_iter()
        .map(|z| {
            let f = fermi_dirac(order, z);
            let e = z.exp();
            f64::min(f / (0.5 * e), e / f)
        })
        .collect()
}

/// Same ratio for the `z > 0`, `j = 1/2` envelope from the proof.
pub fn positive_sandwich() -> Vec<f64> {
    let j = 0.5;
    let g2 = gamma_fn(j + 2.0).expect("positive");
    let g1 = gamma_fn(j + 1.0).expect("positive");
    log_grid(1e-8, 100.0, Z_POINTS)
        .into_iter()
        .map(|z| {
            let f = fermi_dirac(FermiDiracOrder::HALF, z);
            let lower = z.powf(j + 1.0) / (2.0 * g2) + 0.5;
            let upper = z.powf(j + 1.0) / g2 + (2.0 * z).powf(j) / g1 + 2f64.powf(j);
            f64::min(f / lower, upper / f)
        })
        .collect()
}

pub fn z_grid() -> Vec<f64> {
    log_grid(Z_RANGE.0, Z_RANGE.1, Z_POINTS)
}

/// `g'(z) / (z⁻¹ + z^{-1/3})` on the `z` grid.
pub fn gprime_ratios() -> Vec<(f64, f64)> {
    z_grid()
        .into_iter()
        .map(|z| (z, g_prime(z).unwrap_or(f64::NAN) / (1.0 / z + z.powf(-1.0 / 3.0))))
        .collect()
}

fn z_gprime(z: f64) -> f64 {
    z * g_prime(z).unwrap_or(f64::NAN)
}

/// Central difference of `z g'(z)` divided by the weight
/// `1_{z<F(0)} + z^{-1/3} 1_{z≥F(0)}`, on the `z` grid.
pub fn zgprime_slope_ratios() -> Vec<(f64, f64)> {
    let knot = fd_half_at_zero();
    z_grid()
        .into_iter()
        .map(|z| {
            let h = 1e-4 * z;
            let slope = (z_gprime(z + h) - z_gprime(z - h)) / (2.0 * h);
            let weight = if z < knot { 1.0 } else { z.powf(-1.0 / 3.0) };
            (z, slope / weight)
        })
        .collect()
}

fn appendix_a(c: &DerivedConstants) -> Vec<Check> {
    let s = Suite::AppendixA;
    let gp: Vec<f64> = gprime_ratios().into_iter().map(|(_, r)| r).collect();
    let slope: Vec<f64> = zgprime_slope_ratios().into_iter().map(|(_, r)| r).collect();
    vec![
        Check::collect(
            s,
            "e^z/2 <= F_-1/2(z) <= e^z, z <= 0",
            Relation::AtLeast,
            1.0,
            "proof",
            &negative_sandwich(FermiDiracOrder::MINUS_HALF),
        ),
        Check::collect(
            s,
            "e^z/2 <= F_1/2(z) <= e^z, z <= 0",
            Relation::AtLeast,
            1.0,
            "proof",
            &negative_sandwich(FermiDiracOrder::HALF),
        ),
        Check::collect(s, "F_1/2 polynomial envelope, z in (0,100]", Relation::AtLeast, 1.0, "proof", &positive_sandwich()),
        Check::collect(s, "g'(z)/(1/z + z^-1/3) lower", Relation::AtLeast, c.gprime_lower, "frozen:gprime_lower", &gp),
        Check::collect(s, "g'(z)/(1/z + z^-1/3) upper", Relation::AtMost, c.gprime_upper, "frozen:gprime_upper", &gp),
        Check::collect(s, "(z g'(z))' / weight", Relation::AtMost, c.zgprime_slope, "frozen:zgprime_slope", &slope),
    ]
}

// --- truncation inequalities --------------------------------------------

fn level(k: u32, delta: f64) -> TruncationLevel {
    TruncationLevel::new(k, delta).expect("lattice levels are valid")
}

fn lattice(deltas: &[f64]) -> Vec<(TruncationLevel, f64)> {
    let s = s_grid();
    let mut out = Vec::new();
    for &k in &TRUNCATION_LEVELS {
        for &d in deltas {
            for &x in &s {
                out.push((level(k, d), x));
            }
        }
    }
    out
}

fn big_g(l: TruncationLevel, s: f64) -> f64 {
    antideriv_g_k_delta(l, s).unwrap_or(f64::NAN)
}

fn small_g_tilde(l: TruncationLevel, s: f64) -> f64 {
    g_tilde_k_delta(l, s).unwrap_or(f64::NAN)
}

/// `T_k(s)^{5/3} / (1 + G_{k,δ}(s))` over `k × δ × s`.
pub fn lemma_2_4_ratios() -> Vec<f64> {
    lattice(&DELTAS)
        .into_par_iter()
        .map(|(l, s)| trunc_t(l.k() as f64, s).powf(5.0 / 3.0) / (1.0 + big_g(l, s)))
        .collect()
}

/// `s^{5/3} / (G_k(s) + 1)` with `δ = 0`.
pub fn lemma_2_6_power_ratios() -> Vec<f64> {
    lattice(&[0.0])
        .into_par_iter()
        .map(|(l, s)| s.powf(5.0 / 3.0) / (big_g(l, s) + 1.0))
        .collect()
}

/// `T_k(s)^{7/6} / g̃_k(s)` with `δ = 0`.
pub fn lemma_2_6_tilde_ratios() -> Vec<f64> {
    lattice(&[0.0])
        .into_par_iter()
        .map(|(l, s)| trunc_t(l.k() as f64, s).powf(7.0 / 6.0) / small_g_tilde(l, s))
        .collect()
}

/// `g̃_k(s)^{10/7} / (G_k(s) + 1)` with `δ = 0`.
pub fn lemma_2_6_tilde_power_ratios() -> Vec<f64> {
    lattice(&[0.0])
        .into_par_iter()
        .map(|(l, s)| small_g_tilde(l, s).powf(10.0 / 7.0) / (big_g(l, s) + 1.0))
        .collect()
}

/// `g'(s)` over the centered second difference of `G_k` with step `s/1000`.
pub fn gprime_vs_second_difference() -> Vec<f64> {
    lattice(&[0.0])
        .into_par_iter()
        .map(|(l, s)| g_prime(s).unwrap_or(f64::NAN) / g_k_delta_second_difference(l, s, 1e-3 * s))
        .collect()
}

/// `h̃'_k(s) / max(s^{-1/2}, 1)` on `s ∈ [1e-3, 0.999]`.
pub fn h_tilde_prime_ratios() -> Vec<f64> {
    let s = log_grid(1e-3, 0.999, S_POINTS);
    TRUNCATION_LEVELS
        .iter()
        .flat_map(|&k| s.iter().map(move |&x| (k, x)))
        .map(|(k, s)| h_tilde_k_delta_prime(level(k, 0.0), s) / s.powf(-0.5).max(1.0))
        .collect()
}

fn lemma_2_4(c: &DerivedConstants) -> Check {
    Check::collect(
        Suite::Lemma24,
        "T_k(s)^5/3 / (1 + G_k,d(s))",
        Relation::AtMost,
        c.lemma_2_4,
        "frozen:lemma_2_4",
        &lemma_2_4_ratios(),
    )
}

fn lemma_2_6(c: &DerivedConstants) -> Vec<Check> {
    let s = Suite::Lemma26;
    vec![
        // equality below the knot up to the second-difference error
        Check::collect(s, "g'(s) / G_k''(s) (second difference)", Relation::AtMost, 1.0 + 1e-9, "exact", &gprime_vs_second_difference()),
        Check::collect(s, "s^5/3 / (G_k(s) + 1)", Relation::AtMost, c.lemma_2_6_power, "frozen:lemma_2_6_power", &lemma_2_6_power_ratios()),
        Check::collect(s, "T_k(s)^7/6 / g~_k(s)", Relation::AtMost, c.lemma_2_6_tilde, "frozen:lemma_2_6_tilde", &lemma_2_6_tilde_ratios()),
        Check::collect(
            s,
            "g~_k(s)^10/7 / (G_k(s) + 1)",
            Relation::AtMost,
            c.lemma_2_6_tilde_power,
            "frozen:lemma_2_6_tilde_power",
            &lemma_2_6_tilde_power_ratios(),
        ),
        Check::collect(s, "h~'_k(s) / max(s^-1/2, 1)", Relation::AtLeast, 1.0, "exact", &h_tilde_prime_ratios()),
    ]
}

// --- Poincaré–Wirtinger --------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareTrial {
    pub trial: usize,
    pub mean: f64,
    pub u_hat: f64,
    pub max_u: f64,
    pub result: PoincareResult,
}

pub fn unit_interval(cells: usize) -> DeviceMesh {
    DeviceMesh::build(&MeshSpec {
        geometry: Geometry::Interval {
            length: 1.0,
            cells,
            grading: None,
        },
        contacts: vec![ContactSpec {
            side: Side::Left,
            range: None,
        }],
    })
    .expect("valid interval")
}

/// Random fields in `[0, 1)`: a random level plus four random cosine modes
/// and a few spikes towards 1, clipped; `û` drawn between the mean and 1.
pub fn poincare_trials(seed: u64, trials: usize, cells: usize) -> Vec<PoincareTrial> {
    let mesh = unit_interval(cells);
    let c_p = spectral_gap_constant(&mesh).expect("more than one cell");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|trial| {
            let base: f64 = rng.gen_range(0.0..0.9);
            let modes: Vec<(f64, f64)> = (1..=4).map(|m| (rng.gen_range(-0.3..0.3), m as f64)).collect();
            let mut u: Vec<f64> = mesh
                .cells()
                .iter()
                .map(|c| {
                    let x = c.centroid[0];
                    let wave: f64 = modes.iter().map(|(a, m)| a * (m * std::f64::consts::PI * x).cos()).sum();
                    base + wave
                })
                .collect();
            for _ in 0..rng.gen_range(0..3) {
                let k = rng.gen_range(0..cells);
                u[k] = 1.0 - 10f64.powf(-rng.gen_range(1.0..9.0));
            }
            for x in &mut u {
                *x = x.clamp(0.0, 1.0 - 1e-9);
            }
            let mean = mesh.mean(&u);
            let u_hat = mean + rng.gen_range(0.01..0.99) * (1.0 - mean);
            let result = poincare_check_with(&u, &mesh, u_hat, c_p).expect("hypotheses hold by construction");
            PoincareTrial {
                trial,
                mean,
                u_hat,
                max_u: u.iter().copied().fold(0.0, f64::max),
                result,
            }
        })
        .collect()
}

fn poincare(seed: u64) -> Check {
    let slack: Vec<f64> = poincare_trials(seed, POINCARE_TRIALS, POINCARE_CELLS)
        .iter()
        .map(|t| t.result.slack)
        .collect();
    Check::collect(Suite::Poincare, "nonlinear Poincare-Wirtinger slack", Relation::AtLeast, 0.0, "spectral gap", &slack)
}

// --- constant scan --------------------------------------------------------

/// Observed extremes over the lattices, widened by [`SAFETY_FACTOR`].
pub fn scan_constants() -> Vec<ConstantRow> {
    let z_lattice = format!("z: {Z_POINTS} log points in [{:e}, {:e}]", Z_RANGE.0, Z_RANGE.1);
    let s_lattice = format!("k {:?}, s: {S_POINTS} log points in [1e-3, 1e3]", TRUNCATION_LEVELS);
    let d_lattice = format!("{s_lattice}, delta {:?}", DELTAS);
    let k_lattice = format!("{s_lattice}, delta 0");
    let gp: Vec<f64> = gprime_ratios().into_iter().map(|(_, r)| r).collect();
    let slope: Vec<f64> = zgprime_slope_ratios().into_iter().map(|(_, r)| r).collect();
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, nan_max);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, nan_min);
    let upper = |name: &str, observed: f64, lattice: &str| ConstantRow {
        name: name.into(),
        value: observed * SAFETY_FACTOR,
        observed,
        lattice: lattice.into(),
    };
    vec![
        ConstantRow {
            name: "gprime_lower".into(),
            value: min(&gp) / SAFETY_FACTOR,
            observed: min(&gp),
            lattice: z_lattice.clone(),
        },
        upper("gprime_upper", max(&gp), &z_lattice),
        upper("zgprime_slope", max(&slope), &z_lattice),
        upper("lemma_2_4", max(&lemma_2_4_ratios()), &d_lattice),
        upper("lemma_2_6_power", max(&lemma_2_6_power_ratios()), &k_lattice),
        upper("lemma_2_6_tilde", max(&lemma_2_6_tilde_ratios()), &k_lattice),
        upper("lemma_2_6_tilde_power", max(&lemma_2_6_tilde_power_ratios()), &k_lattice),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("bogus".parse::<Suite>().unwrap_err().contains("appendix-a"));
    }

    #[test]
    fn log_grid_hits_both_ends() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violations_are_counted() {
        let c = Check::collect(Suite::Poincare, "x", Relation::AtLeast, 0.0, "exact", &[1.0, -1.0, f64::NAN]);
        assert_eq!(c.violations, 2);
        assert!(!c.pass());
        let c = Check::collect(Suite::Poincare, "x", Relation::AtMost, 2.0, "exact", &[1.0, 2.0]);
        assert!(c.pass());
        assert_eq!(c.observed, 2.0);
    }

    #[test]
    fn frozen_constants_bracket_a_fresh_scan() {
        let c = constants::frozen();
        let gp: Vec<f64> = gprime_ratios().into_iter().map(|(_, r)| r).collect();
        assert!(gp.iter().all(|r| (c.gprime_lower..=c.gprime_upper).contains(r)));
    }

    #[test]
    fn poincare_trials_are_reproducible() {
        let a = poincare_trials(7, 5, 16);
        let b = poincare_trials(7, 5, 16);
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.u_hat > t.mean && t.u_hat < 1.0));
    }
}
