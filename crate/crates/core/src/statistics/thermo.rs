//! Thermodynamic functions derived from the statistics: anti-derivatives,
//! relative energy and the "tilde" functions that appear in the flux
//! chain rules.

use super::fermi_dirac::{fermi_dirac, FermiDiracOrder};
use super::inverse::{g_prime, inverse_fd_half};
use super::StatisticsError;
use crate::quadrature::{gauss_legendre, tanh_sinh};
use std::sync::OnceLock;

/// `F_{1/2}(0)`, the reference density of the electron/hole anti-derivative.
pub fn fd_half_at_zero() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| fermi_dirac(FermiDiracOrder::HALF, 0.0))
}

fn positive(function: &'static str, s: f64) -> Result<(), StatisticsError> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(StatisticsError::Domain { function, value: s })
    }
}

fn unit(function: &'static str, s: f64) -> Result<(), StatisticsError> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(StatisticsError::Domain { function, value: s })
    }
}

/// `G(s) = ∫_{F_{1/2}(0)}^s g(z) dz` by quadrature.
pub fn antideriv_g(s: f64) -> Result<f64, StatisticsError> {
    positive("antideriv_G", s)?;
    let a = fd_half_at_zero();
    let q = tanh_sinh(
        |z, _| inverse_fd_half(z).unwrap_or(f64::NAN),
        a,
        s,
        1e-12,
    );
    Ok(q.value)
}

/// `H(s) = ∫_{1/2}^s h(z) dz = s log s + (1 - s) log(1 - s) + log 2`.
pub fn antideriv_h(s: f64) -> Result<f64, StatisticsError> {
    unit("antideriv_H", s)?;
    Ok(vacancy_entropy(s))
}

/// Closed form of `H` on the closed interval `[0, 1]`, using `0 log 0 = 0`.
pub fn vacancy_entropy(s: f64) -> f64 {
    xlogx(s) + xlogx(1.0 - s) + std::f64::consts::LN_2
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Relative energy `𝒢(s|s̄) = G(s) - G(s̄) - g(s̄)(s - s̄)`.
///
/// Written in chemical-potential variables `y = g(s)`, `ȳ = g(s̄)` it reads
/// `∫_ȳ^y (t - ȳ) F_{-1/2}(t) dt`. Close pairs use Gauss–Legendre on that
/// form (no cancellation, strictly positive for `s ≠ s̄`); distant pairs use
/// the Legendre-transform identity `G(s) = s g(s) - F_{3/2}(g(s)) + const`.
/// `s = 0` is accepted as the limit `𝒢(0|s̄) = F_{3/2}(g(s̄))`.
pub fn relative_energy(s: f64, s_bar: f64) -> Result<f64, StatisticsError> {
    positive("relative_energy", s_bar)?;
    if s == 0.0 {
        let y_bar = inverse_fd_half(s_bar)?;
        return Ok(fermi_dirac(FermiDiracOrder::THREE_HALVES, y_bar));
    }
    positive("relative_energy", s)?;
    let y = inverse_fd_half(s)?;
    let y_bar = inverse_fd_half(s_bar)?;
    Ok(relative_energy_potentials(y, y_bar))
}

/// [`relative_energy`] for densities given through their chemical potentials
/// `y = g(s)` and `ȳ = g(s̄)`.
pub fn relative_energy_potentials(y: f64, y_bar: f64) -> f64 {
    let d = y - y_bar;
    if d == 0.0 {
        return 0.0;
    }
    if d.abs() <= 1.0 {
        let (nodes, weights) = gl_rule();
        let half = 0.5 * d;
        let mid = y_bar + half;
        let sum: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| {
                let t = mid + half * x;
                w * (half * (1.0 + x)) * fermi_dirac(FermiDiracOrder::MINUS_HALF, t)
            })
            .sum();
        sum * half
    } else {
        let s = fermi_dirac(FermiDiracOrder::HALF, y);
        let value = s * d
            - (fermi_dirac(FermiDiracOrder::THREE_HALVES, y)
                - fermi_dirac(FermiDiracOrder::THREE_HALVES, y_bar));
        value.max(0.0)
    }
}

fn gl_rule() -> (&'static [f64], &'static [f64]) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = RULE.get_or_init(|| gauss_legendre(16));
    (x, w)
}

/// `g̃(s) = ∫_{F_{1/2}(0)}^s √z g'(z) dz` by quadrature.
pub fn g_tilde(s: f64) -> Result<f64, StatisticsError> {
    positive("g_tilde", s)?;
    let q = tanh_sinh(
        |z, _| z.sqrt() * g_prime(z).unwrap_or(f64::NAN),
        fd_half_at_zero(),
        s,
        1e-11,
    );
    Ok(q.value)
}

/// `h̃(s) = ∫_{1/2}^s √z h'(z) dz = 2 atanh(√s) - 2 atanh(1/√2)`.
pub fn h_tilde(s: f64) -> Result<f64, StatisticsError> {
    unit("h_tilde", s)?;
    Ok(2.0 * s.sqrt().atanh() - 2.0 * std::f64::consts::FRAC_1_SQRT_2.atanh())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_vanish() {
        let f0 = fd_half_at_zero();
        assert_eq!(antideriv_g(f0).unwrap(), 0.0);
        assert!(antideriv_h(0.5).unwrap().abs() < 1e-16);
        assert_eq!(g_tilde(f0).unwrap(), 0.0);
        assert!(h_tilde(0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn h_tilde_closed_form() {
        let expected = 2.0 * 0.9f64.sqrt().atanh() - 2.0 * (1.0 / 2f64.sqrt()).atanh();
        assert!((h_tilde(0.9).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn relative_energy_basics() {
        assert_eq!(relative_energy(0.3, 0.3).unwrap(), 0.0);
        assert!(relative_energy(0.6, 0.3).unwrap() > 0.0);
        assert!(relative_energy(0.3 * (1.0 + 1e-9), 0.3).unwrap() > 0.0);
        assert!(relative_energy(-1.0, 0.3).is_err());
        assert!(relative_energy(0.3, 0.0).is_err());
    }

    #[test]
    fn relative_energy_branches_agree() {
        // |y - ȳ| just below and above 1 use different formulas
        let y_bar = 0.2;
        for &d in &[0.999_999, 1.000_001] {
            let a = relative_energy_potentials(y_bar + d, y_bar);
            let b = relative_energy_potentials(y_bar + 1.0, y_bar);
            assert!((a - b).abs() < 1e-5 * b);
        }
        let gl = relative_energy_potentials(1.2, 0.2);
        let s = fermi_dirac(FermiDiracOrder::HALF, 1.2);
        let closed = s - (fermi_dirac(FermiDiracOrder::THREE_HALVES, 1.2)
            - fermi_dirac(FermiDiracOrder::THREE_HALVES, 0.2));
        assert!((gl - closed).abs() < 1e-13 * closed);
    }

    #[test]
    fn vacancy_entropy_limits() {
        assert!((vacancy_entropy(0.0) - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((vacancy_entropy(1.0) - std::f64::consts::LN_2).abs() < 1e-16);
        assert!(antideriv_h(1.0).is_err());
    }
}
