//! Regenerates `fixtures/derived_constants.csv` and the `g'` envelope table
//! `fixtures/gprime_envelope.csv` from the verification lattices.
//!
//!     cargo run --release --example scan_constants

use memtrans_core::constants::{self, SAFETY_FACTOR};
use memtrans_core::statistics::ORACLE_TOL;
use memtrans_core::verify::{gprime_ratios, scan_constants};
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let rows = scan_constants();

    let mut text = String::new();
    text.push_str(&format!("# generated {} by examples/scan_constants.rs\n", chrono::Utc::now().date_naive()));
    text.push_str(&format!(
        "# value = observed extreme x {SAFETY_FACTOR} (lower bounds: / {SAFETY_FACTOR}); oracle tolerance {ORACLE_TOL:e}\n"
    ));
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    text.push_str(&String::from_utf8(w.into_inner()?)?);
    let parsed = constants::parse(&text)?;
    std::fs::write(dir.join("derived_constants.csv"), &text)?;

    let mut env = csv::Writer::from_path(dir.join("gprime_envelope.csv"))?;
    env.write_record(["z", "value", "verdict"])?;
    for (z, r) in gprime_ratios() {
        let inside = (parsed.gprime_lower..=parsed.gprime_upper).contains(&r);
        env.write_record([z.to_string(), r.to_string(), if inside { "inside" } else { "outside" }.to_string()])?;
    }
    env.flush()?;
    for r in &rows {
        println!("{:<24} observed {:<24e} frozen {:e}", r.name, r.observed, r.value);
    }
    Ok(())
}
