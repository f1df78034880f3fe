use super::StatisticsError;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive arguments.
///
/// Integers and half-integers (the orders that occur in Fermi–Dirac
/// normalisations) are computed by exact recurrences; other arguments use a
/// Lanczos approximation. Overflows to `+inf` above roughly 171.6.
pub fn gamma_fn(x: f64) -> Result<f64, StatisticsError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(StatisticsError::Domain {
            function: "gamma",
            value: x,
        });
    }
    if x <= 200.0 && (2.0 * x).fract() == 0.0 {
        return Ok(half_integer_gamma(x));
    }
    Ok(lanczos(x))
}

fn half_integer_gamma(x: f64) -> f64 {
    // Γ(x) = (x-1)(x-2)...·Γ(x0) with x0 ∈ {1, 1/2}
    let (mut acc, mut y) = if x.fract() == 0.0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while y < x {
        acc *= y;
        y += 1.0;
    }
    acc
}

fn lanczos(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power to postpone overflow
    let p = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * p * (p * (-t).exp()) * a
}
