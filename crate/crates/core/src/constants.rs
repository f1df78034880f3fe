//! Envelope and inequality constants that are only known to exist. Each is
//! the extreme ratio observed over a fixed test lattice, widened by a safety
//! factor, and frozen into `fixtures/derived_constants.csv` by the
//! `scan_constants` example.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Widening applied to observed suprema (divided into observed infima).
pub const SAFETY_FACTOR: f64 = 1.5;

pub const FIXTURE: &str = include_str!("../fixtures/derived_constants.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub name: String,
    pub value: f64,
    pub observed: f64,
    pub lattice: String,
}

/// The frozen constants, by inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `c₁ ≤ g'(z) / (z⁻¹ + z^{-1/3}) ≤ c₂` on `[1e-8, 1e8]`.
    pub gprime_lower: f64,
    pub gprime_upper: f64,
    /// `(z g'(z))' ≤ C (1_{z<F(0)} + z^{-1/3} 1_{z≥F(0)})`.
    pub zgprime_slope: f64,
    /// `T_k(s)^{5/3} ≤ C (1 + G_{k,δ}(s))`.
    pub lemma_2_4: f64,
    /// `s^{5/3} ≤ C (G_k(s) + 1)`.
    pub lemma_2_6_power: f64,
    /// `T_k(s)^{7/6} ≤ C g̃_k(s)`.
    pub lemma_2_6_tilde: f64,
    /// `g̃_k(s)^{10/7} ≤ C (G_k(s) + 1)`.
    pub lemma_2_6_tilde_power: f64,
    pub rows: Vec<ConstantRow>,
    /// `#` comment lines of the fixture.
    pub provenance: Vec<String>,
}

pub fn parse(text: &str) -> Result<DerivedConstants, String> {
    let provenance = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let rows: Vec<ConstantRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let get = |name: &str| {
        rows.iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
            .filter(|v| v.is_finite() && *v > 0.0)
            .ok_or_else(|| format!("constant `{name}` missing or not positive"))
    };
    Ok(DerivedConstants {
        gprime_lower: get("gprime_lower")?,
        gprime_upper: get("gprime_upper")?,
        zgprime_slope: get("zgprime_slope")?,
        lemma_2_4: get("lemma_2_4")?,
        lemma_2_6_power: get("lemma_2_6_power")?,
        lemma_2_6_tilde: get("lemma_2_6_tilde")?,
        lemma_2_6_tilde_power: get("lemma_2_6_tilde_power")?,
        rows,
        provenance,
    })
}

/// Constants shipped with the crate.
pub fn frozen() -> &'static DerivedConstants {
    static CELL: OnceLock<DerivedConstants> = OnceLock::new();
    CELL.get_or_init(|| parse(FIXTURE).expect("bundled constants fixture is valid"))
}
