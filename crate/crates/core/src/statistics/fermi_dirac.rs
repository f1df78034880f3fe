//! Complete Fermi–Dirac integrals
//!
//! `F_j(z) = 1/Γ(j+1) ∫_0^∞ s^j / (1 + exp(s - z)) ds`, extended to `j = -1`
//! by the logistic function (Blakemore statistics).
//!
//! Two evaluation routes exist. [`fermi_dirac_quadrature`] integrates the
//! definition directly and is the reference. [`fermi_dirac`] is the fast
//! path: for the orders `-1/2`, `1/2`, `3/2` it combines the alternating
//! exponential series (`z < -4`), piecewise Chebyshev tables fitted to the
//! reference (`-4 ≤ z ≤ 40`) and the Sommerfeld expansion (`z > 40`).

use super::gamma::gamma_fn;
use super::StatisticsError;
use crate::quadrature::{exp_sinh, tanh_sinh};
use std::sync::OnceLock;

/// Order `j` of a Fermi–Dirac integral. Valid orders satisfy `j > -1`, plus
/// the Blakemore limit `j = -1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FermiDiracOrder(f64);

impl FermiDiracOrder {
    pub const BLAKEMORE: Self = Self(-1.0);
    pub const MINUS_HALF: Self = Self(-0.5);
    pub const ZERO: Self = Self(0.0);
    pub const HALF: Self = Self(0.5);
    pub const THREE_HALVES: Self = Self(1.5);

    pub fn new(j: f64) -> Result<Self, StatisticsError> {
        if j.is_finite() && (j > -1.0 || j == -1.0) {
            Ok(Self(j))
        } else {
            Err(StatisticsError::InvalidOrder(j))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `F_j' = F_{j-1}`; `None` when `j - 1` is not an admissible order.
    pub fn derivative_order(self) -> Option<Self> {
        Self::new(self.0 - 1.0).ok()
    }
}

/// Relative tolerance requested from the quadrature reference.
pub const ORACLE_TOL: f64 = 1e-13;

const SERIES_BELOW: f64 = -4.0;
const ASYMPTOTIC_ABOVE: f64 = 40.0;
const TABLE_PIECE_WIDTH: f64 = 2.0;
const TABLE_DEGREE: usize = 24;

/// Logistic function `1 / (1 + e^{-y})` without overflow.
#[inline]
pub fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// Fermi occupation `1 / (1 + e^{t})`.
#[inline]
fn occupation(t: f64) -> f64 {
    logistic(-t)
}

/// Reference evaluation by quadrature of the defining integral, split at
/// `s = max(z, 0)` with an exp-sinh rule on the tail.
pub fn fermi_dirac_quadrature(order: FermiDiracOrder, z: f64, rel_tol: f64) -> f64 {
    let j = order.value();
    if j == -1.0 {
        return logistic(z);
    }
    let split = z.max(0.0);
    let head = if split > 0.0 {
        tanh_sinh(|s, _| s.powf(j) * occupation(s - z), 0.0, split, rel_tol).value
    } else {
        0.0
    };
    let tail = exp_sinh(
        |s, offset| {
            // s - z = offset when split = z; keep the exact difference
            let t = if split == z { offset } else { s - z };
            s.powf(j) * occupation(t)
        },
        split,
        rel_tol,
    )
    .value;
    let norm = gamma_fn(j + 1.0).expect("order > -1");
    (head + tail) / norm
}

/// `F_j(z)` for any admissible order; the fast path is used for the orders
/// the model needs, the quadrature reference otherwise.
pub fn fermi_dirac(order: FermiDiracOrder, z: f64) -> f64 {
    let j = order.value();
    if z.is_nan() {
        return f64::NAN;
    }
    if j == -1.0 {
        return logistic(z);
    }
    if j == 0.0 {
        return z.max(0.0) + (-z.abs()).exp().ln_1p();
    }
    match table_for(order) {
        Some(table) => {
            if z < SERIES_BELOW {
                exponential_series(j, z)
            } else if z > ASYMPTOTIC_ABOVE {
                sommerfeld(j, z)
            } else {
                table.eval(z)
            }
        }
        None => fermi_dirac_quadrature(order, z, ORACLE_TOL),
    }
}

/// `Σ_{k≥1} (-1)^{k+1} e^{kz} / k^{j+1}`, convergent for `z < 0`.
pub(crate) fn exponential_series(j: f64, z: f64) -> f64 {
    let x = z.exp();
    let mut power = x;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = power / kf.powf(j + 1.0);
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term <= 1e-17 * sum.abs() {
            break;
        }
        power *= x;
    }
    sum
}

// ζ(2n) for n = 1..=10
const ZETA_EVEN: [f64; 10] = [
    1.644_934_066_848_226_4,
    1.082_323_233_711_138_2,
    1.017_343_061_984_449_1,
    1.004_077_356_197_944_3,
    1.000_994_575_127_818_1,
    1.000_246_086_553_308_0,
    1.000_061_248_135_058_7,
    1.000_015_282_259_408_7,
    1.000_003_817_293_265_0,
    1.000_000_953_962_033_9,
];

/// Sommerfeld expansion for large positive `z`.
fn sommerfeld(j: f64, z: f64) -> f64 {
    let lead = z.powf(j + 1.0) / gamma_fn(j + 2.0).expect("order > -1");
    let inv_z2 = 1.0 / (z * z);
    let mut falling = 1.0;
    let mut zpow = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for (i, zeta) in ZETA_EVEN.iter().enumerate() {
        let n = (i + 1) as f64;
        falling *= (j + 3.0 - 2.0 * n) * (j + 2.0 - 2.0 * n);
        zpow *= inv_z2;
        let term = 2.0 * (1.0 - 2f64.powf(1.0 - 2.0 * n)) * zeta * falling * zpow;
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-18 {
            break;
        }
    }
    let reflected = (std::f64::consts::PI * j).cos();
    let correction = if reflected.abs() > 1e-15 {
        reflected * exponential_series(j, -z)
    } else {
        0.0
    };
    lead * sum + correction
}

/// Piecewise Chebyshev interpolant of the reference on `[-4, 40]`.
#[derive(Debug)]
pub struct ChebyshevTable {
    start: f64,
    width: f64,
    pieces: Vec<[f64; TABLE_DEGREE + 1]>,
}

impl ChebyshevTable {
    fn build(order: FermiDiracOrder) -> Self {
        let start = SERIES_BELOW;
        let count = ((ASYMPTOTIC_ABOVE - SERIES_BELOW) / TABLE_PIECE_WIDTH).round() as usize;
        let n = TABLE_DEGREE + 1;
        let pieces = (0..count)
            .map(|p| {
                let a = start + p as f64 * TABLE_PIECE_WIDTH;
                let mid = a + 0.5 * TABLE_PIECE_WIDTH;
                let half = 0.5 * TABLE_PIECE_WIDTH;
                let samples: Vec<f64> = (0..n)
                    .map(|k| {
                        let x = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                        fermi_dirac_quadrature(order, mid + half * x, 1e-15)
                    })
                    .collect();
                let mut coef = [0.0; TABLE_DEGREE + 1];
                for (m, c) in coef.iter_mut().enumerate() {
                    let s: f64 = samples
                        .iter()
                        .enumerate()
                        .map(|(k, f)| {
                            f * (std::f64::consts::PI * m as f64 * (k as f64 + 0.5) / n as f64)
                                .cos()
                        })
                        .sum();
                    *c = 2.0 * s / n as f64;
                }
                coef[0] *= 0.5;
                coef
            })
            .collect();
        Self {
            start,
            width: TABLE_PIECE_WIDTH,
            pieces,
        }
    }

    fn eval(&self, z: f64) -> f64 {
        let idx = (((z - self.start) / self.width).floor() as usize).min(self.pieces.len() - 1);
        let a = self.start + idx as f64 * self.width;
        let x = 2.0 * (z - a) / self.width - 1.0;
        let c = &self.pieces[idx];
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + c[0]
    }
}

fn table_for(order: FermiDiracOrder) -> Option<&'static ChebyshevTable> {
    static MINUS_HALF: OnceLock<ChebyshevTable> = OnceLock::new();
    static HALF: OnceLock<ChebyshevTable> = OnceLock::new();
    static THREE_HALVES: OnceLock<ChebyshevTable> = OnceLock::new();
    let cell = match order.value() {
        j if j == -0.5 => &MINUS_HALF,
        j if j == 0.5 => &HALF,
        j if j == 1.5 => &THREE_HALVES,
        _ => return None,
    };
    Some(cell.get_or_init(|| ChebyshevTable::build(order)))
}
