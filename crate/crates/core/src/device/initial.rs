use super::{BoundaryData, DeviceMesh, ModelParameters, SystemState};
use crate::solver::solve_poisson;
use crate::statistics::{blakemore_h, inverse_fd_half};
use std::fmt;

/// Zero densities are lifted to this value so that their chemical potential
/// is finite.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// One violated standing assumption.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Length {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NotFinite {
        field: &'static str,
        cells: Vec<usize>,
    },
    Negative {
        field: &'static str,
        cells: Vec<usize>,
    },
    VacancyAboveOne {
        cells: Vec<usize>,
    },
    VacancyMeanNotBelowOne {
        mean: f64,
    },
}

fn list(cells: &[usize]) -> String {
    const SHOWN: usize = 10;
    let mut s: Vec<String> = cells.iter().take(SHOWN).map(|c| c.to_string()).collect();
    if cells.len() > SHOWN {
        s.push(format!("... ({} total)", cells.len()));
    }
    s.join(", ")
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Length {
                field,
                expected,
                found,
            } => write!(f, "`{field}` has {found} values, mesh has {expected} cells"),
            Self::NotFinite { field, cells } => {
                write!(f, "`{field}` is not finite at cells [{}]", list(cells))
            }
            Self::Negative { field, cells } => write!(
                f,
                "`{field}` is negative at cells [{}] (assumption A4 requires non-negative initial densities)",
                list(cells)
            ),
            Self::VacancyAboveOne { cells } => write!(
                f,
                "`D0` exceeds 1 at cells [{}] (assumption A4: sup D0 <= 1)",
                list(cells)
            ),
            Self::VacancyMeanNotBelowOne { mean } => write!(
                f,
                "`D0` has mean {mean} (assumption A4 requires the mean of D0 to be < 1)"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitialDataError {
    #[error("initial data rejected:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Assumptions(Vec<Violation>),
    #[error("initial Poisson solve failed: {0}")]
    Poisson(String),
}

impl InitialDataError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            Self::Assumptions(v) => v,
            Self::Poisson(_) => &[],
        }
    }
}

fn scan(field: &'static str, values: &[f64], expected: usize, out: &mut Vec<Violation>) -> bool {
    if values.len() != expected {
        out.push(Violation::Length {
            field,
            expected,
            found: values.len(),
        });
        return false;
    }
    let bad: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_finite()).collect();
    if !bad.is_empty() {
        out.push(Violation::NotFinite { field, cells: bad });
        return false;
    }
    let negative: Vec<usize> = (0..values.len()).filter(|&i| values[i] < 0.0).collect();
    if !negative.is_empty() {
        out.push(Violation::Negative {
            field,
            cells: negative,
        });
        return false;
    }
    true
}

/// Checks the initial data against the standing assumptions and builds the
/// initial state, with `V⁰` from the Poisson problem.
///
/// Zero densities are lifted to [`DENSITY_FLOOR`] and saturated vacancy
/// cells (`D⁰ = 1`, allowed as long as the mean stays below one) to
/// `1 - saturation_eps`, so that every chemical potential is finite. The
/// lifted densities are stored as given, which makes the operation
/// idempotent.
pub fn validate_initial_data(
    n0: &[f64],
    p0: &[f64],
    d0: &[f64],
    mesh: &DeviceMesh,
    bc: &BoundaryData,
    params: &ModelParameters,
    saturation_eps: f64,
) -> Result<SystemState, InitialDataError> {
    let cells = mesh.num_cells();
    let mut violations = Vec::new();
    let n_ok = scan("n0", n0, cells, &mut violations);
    let p_ok = scan("p0", p0, cells, &mut violations);
    let d_ok = scan("D0", d0, cells, &mut violations);
    if d_ok {
        let above: Vec<usize> = (0..cells).filter(|&i| d0[i] > 1.0).collect();
        if !above.is_empty() {
            violations.push(Violation::VacancyAboveOne { cells: above });
        }
        let mean = mesh.mean(d0);
        if !(mean < 1.0) {
            violations.push(Violation::VacancyMeanNotBelowOne { mean });
        }
    }
    if !violations.is_empty() || !(n_ok && p_ok && d_ok) {
        return Err(InitialDataError::Assumptions(violations));
    }

    let lift = |x: f64| x.max(DENSITY_FLOOR);
    let n: Vec<f64> = n0.iter().map(|&x| lift(x)).collect();
    let p: Vec<f64> = p0.iter().map(|&x| lift(x)).collect();
    let d: Vec<f64> = d0.iter().map(|&x| lift(x).min(1.0 - saturation_eps)).collect();

    let v = solve_poisson(&n, &p, &d, mesh, bc, params).map_err(|e| InitialDataError::Poisson(e.to_string()))?;
    let phi_n = n.iter().zip(&v).map(|(&x, v)| inverse_fd_half(x).expect("lifted") - v).collect();
    let phi_p = p.iter().zip(&v).map(|(&x, v)| inverse_fd_half(x).expect("lifted") + v).collect();
    let phi_d = d.iter().zip(&v).map(|(&x, v)| blakemore_h(x).expect("lifted") + v).collect();
    Ok(SystemState {
        t: 0.0,
        n,
        p,
        d,
        v,
        phi_n,
        phi_p,
        phi_d,
    })
}
