//! Static SVG figures from a run directory.

use crate::io::{read_records, read_state, IoError, StateTable, STEP_LOG};
use plotters::prelude::*;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const ENERGY_PLOT: &str = "energy.svg";
pub const MASS_PLOT: &str = "mass_D.svg";
pub const PROFILE_PLOT: &str = "profiles.svg";

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("{0} has no step log ({STEP_LOG})")]
    Missing(PathBuf),
    #[error("{0}: step log is empty")]
    Empty(PathBuf),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {message}")]
    Draw { path: PathBuf, message: String },
}

fn draw_err<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> PlotError + '_ {
    move |e| PlotError::Draw {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Pads a degenerate range so flat curves still get an axis.
fn padded(lo: f64, hi: f64) -> std::ops::Range<f64> {
    let span = hi - lo;
    let pad = if span > 1e-12 * hi.abs().max(1.0) { 0.05 * span } else { 1e-3 * hi.abs().max(1.0) };
    (lo - pad)..(hi + pad)
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// Dumps in `dir`, ordered by time.
fn dumps(dir: &Path) -> Result<Vec<(String, StateTable)>, PlotError> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|source| IoError::Fs {
        path: dir.to_path_buf(),
        source,
    })?;
    for e in entries.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        if let Some(t) = name.strip_prefix("state_t").and_then(|s| s.strip_suffix(".csv")) {
            if let Ok(time) = t.parse::<f64>() {
                out.insert(time.to_bits(), (t.to_string(), read_state(&e.path())?));
            }
        }
    }
    Ok(out.into_values().collect())
}

/// Averages a field over cells sharing the same `x`, so 2D dumps plot as
/// lateral means.
fn profile(table: &StateTable, field: &str) -> Vec<(f64, f64)> {
    let (Some(x), Some(v)) = (table.column("x"), table.column(field)) else {
        return Vec::new();
    };
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for (x, v) in x.into_iter().zip(v) {
        let e = acc.entry(x.to_bits()).or_insert((x, 0.0, 0));
        e.1 += v;
        e.2 += 1;
    }
    let mut pts: Vec<(f64, f64)> = acc.into_values().map(|(x, s, n)| (x, s / n as f64)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Writes `energy.svg`, `mass_D.svg` and, when dumps exist,
/// `profiles.svg` into `dir`. Returns the written paths.
pub fn plot_run(dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let log = dir.join(STEP_LOG);
    if !log.is_file() {
        return Err(PlotError::Missing(dir.to_path_buf()));
    }
    let records = read_records(&log)?;
    if records.is_empty() {
        return Err(PlotError::Empty(log));
    }
    let mut written = Vec::new();

    // E(t) with the dissipation on a secondary axis
    let path = dir.join(ENERGY_PLOT);
    {
        let monotone = records.iter().all(|r| r.energy_decay_ok);
        let caption = format!("free energy E(t) [decay check: {}]", if monotone { "ok" } else { "violated" });
        let (t0, t1) = extent(records.iter().map(|r| r.t));
        let (e0, e1) = extent(records.iter().map(|r| r.energy));
        let (d0, d1) = extent(records.iter().map(|r| r.dissipation));
        let root = SVGBackend::new(&path, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err(&path))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(caption, ("sans-serif", 20))
            .margin(10)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .right_y_label_area_size(70)
            .build_cartesian_2d(padded(t0, t1), padded(e0, e1))
            .map_err(draw_err(&path))?
            .set_secondary_coord(padded(t0, t1), padded(d0.min(0.0), d1));
        chart
            .configure_mesh()
            .x_desc("t")
            .y_desc("E")
            .draw()
            .map_err(draw_err(&path))?;
        chart
            .configure_secondary_axes()
            .y_desc("dissipation")
            .draw()
            .map_err(draw_err(&path))?;
        chart
            .draw_series(LineSeries::new(records.iter().map(|r| (r.t, r.energy)), &BLUE))
            .map_err(draw_err(&path))?
            .label("E")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLUE));
        chart
            .draw_secondary_series(LineSeries::new(
                records.iter().skip(1).map(|r| (r.t, r.dissipation)),
                &RED,
            ))
            .map_err(draw_err(&path))?
            .label("dissipation")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], RED));
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(draw_err(&path))?;
        root.present().map_err(draw_err(&path))?;
    }
    written.push(path);

    let path = dir.join(MASS_PLOT);
    {
        let (t0, t1) = extent(records.iter().map(|r| r.t));
        let (m0, m1) = extent(records.iter().map(|r| r.mass_d));
        let root = SVGBackend::new(&path, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err(&path))?;
        let mut chart = ChartBuilder::on(&root)
            .caption("vacancy mass", ("sans-serif", 20))
            .margin(10)
            .x_label_area_size(40)
            .y_label_area_size(90)
            .build_cartesian_2d(padded(t0, t1), padded(m0, m1))
            .map_err(draw_err(&path))?;
        chart
            .configure_mesh()
            .x_desc("t")
            .y_desc("integral of D")
            .draw()
            .map_err(draw_err(&path))?;
        chart
            .draw_series(LineSeries::new(records.iter().map(|r| (r.t, r.mass_d)), &BLUE))
            .map_err(draw_err(&path))?;
        root.present().map_err(draw_err(&path))?;
    }
    written.push(path);

    let states = dumps(dir)?;
    if !states.is_empty() {
        let path = dir.join(PROFILE_PLOT);
        let fields = ["n", "p", "D"];
        let root = SVGBackend::new(&path, (900, 300 * fields.len() as u32)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err(&path))?;
        for (area, field) in root.split_evenly((fields.len(), 1)).iter().zip(fields) {
            let curves: Vec<(String, Vec<(f64, f64)>)> =
                states.iter().map(|(t, s)| (t.clone(), profile(s, field))).collect();
            let (x0, x1) = extent(curves.iter().flat_map(|(_, c)| c.iter().map(|p| p.0)));
            let (y0, y1) = extent(curves.iter().flat_map(|(_, c)| c.iter().map(|p| p.1)));
            let mut chart = ChartBuilder::on(area)
                .caption(format!("{field} at dump times"), ("sans-serif", 18))
                .margin(10)
                .x_label_area_size(35)
                .y_label_area_size(70)
                .build_cartesian_2d(padded(x0, x1), padded(y0, y1))
                .map_err(draw_err(&path))?;
            chart
                .configure_mesh()
                .x_desc("x")
                .y_desc(field)
                .draw()
                .map_err(draw_err(&path))?;
            for (i, (t, c)) in curves.into_iter().enumerate() {
                let color = Palette99::pick(i).to_rgba();
                chart
                    .draw_series(LineSeries::new(c, color))
                    .map_err(draw_err(&path))?
                    .label(format!("t = {t}"))
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(draw_err(&path))?;
        }
        root.present().map_err(draw_err(&path))?;
        drop(root);
        written.push(path);
    }
    Ok(written)
}
