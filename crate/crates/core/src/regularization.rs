//! Truncated coefficients and regularized energy densities.
//!
//! `G_{k,δ}` and `H_{k,δ}` are twice-iterated integrals of
//! `q(z) = S(z) / (T(z) + δ)` starting at the reference densities. They are
//! evaluated through the Cauchy formula for repeated integration,
//! `∫_a^s ∫_a^y q(z) dz dy = ∫_a^s (s - z) q(z) dz`, split at the truncation
//! knot where `q` has a kink.

use crate::quadrature::piecewise;
use crate::statistics::{fd_half_at_zero, g_prime};
use serde::{Deserialize, Serialize};

const QUAD_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RegularizationError {
    #[error("truncation level k must be at least 1")]
    InvalidLevel,
    #[error("regularization delta = {0} must lie in [0, F_1/2(0))")]
    InvalidDelta(f64),
    #[error("{function}: argument {value} outside the admissible domain")]
    Domain { function: &'static str, value: f64 },
}

/// Truncation parameters `(k, δ)`; `δ = 0` selects the `G_k`, `H_k` family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationLevel {
    k: u32,
    delta: f64,
}

impl TruncationLevel {
    pub fn new(k: u32, delta: f64) -> Result<Self, RegularizationError> {
        if k < 1 {
            return Err(RegularizationError::InvalidLevel);
        }
        if !(delta >= 0.0 && delta < fd_half_at_zero()) {
            return Err(RegularizationError::InvalidDelta(delta));
        }
        Ok(Self { k, delta })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Knot of the vacancy truncation, `k / (k + 1)`.
    pub fn vacancy_knot(&self) -> f64 {
        vacancy_knot(self.k)
    }
}

fn vacancy_knot(k: u32) -> f64 {
    let k = k as f64;
    k / (k + 1.0)
}

/// `T_k(z) = max(0, min(k, z))`.
pub fn trunc_t(k: f64, z: f64) -> f64 {
    z.min(k).max(0.0)
}

/// Truncated carrier diffusion coefficient `S_k^1`.
pub fn s_k1(k: u32, z: f64) -> f64 {
    let kf = k as f64;
    if z <= 0.0 {
        1.0
    } else if z <= kf {
        z * g_prime(z).expect("z > 0")
    } else {
        kf.powf(2.0 / 3.0) * z.cbrt() * g_prime(z).expect("z > 0")
    }
}

/// Truncated vacancy diffusion coefficient `S_k^2`.
pub fn s_k2(k: u32, z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else if z <= vacancy_knot(k) {
        1.0 / (1.0 - z)
    } else {
        1.0 + k as f64
    }
}

/// Regularization of `L(s) = -log(1 - s)`: exact up to `k/(k+1)`, then
/// continued linearly with slope `k + 1`.
pub fn l_k(k: u32, s: f64) -> Result<f64, RegularizationError> {
    if !(0.0..1.0).contains(&s) {
        return Err(RegularizationError::Domain {
            function: "L_k",
            value: s,
        });
    }
    let kf = k as f64;
    if s <= vacancy_knot(k) {
        Ok(-(-s).ln_1p())
    } else {
        Ok((kf + 1.0) * s - kf + (kf + 1.0).ln())
    }
}

/// `G''_{k,δ}(z) = S_k^1(z) / (T_k(z) + δ)`.
pub fn g_k_delta_second_derivative(level: TruncationLevel, z: f64) -> f64 {
    let kf = level.k as f64;
    if level.delta == 0.0 && z > 0.0 && z <= kf {
        // S/T = g' exactly; skip the z/z round-off
        return g_prime(z).expect("z > 0");
    }
    s_k1(level.k, z) / (trunc_t(kf, z) + level.delta)
}

/// `H''_{k,δ}(z) = S_k^2(z) / (T_{k/(k+1)}(z) + δ)`.
pub fn h_k_delta_second_derivative(level: TruncationLevel, z: f64) -> f64 {
    s_k2(level.k, z) / (trunc_t(level.vacancy_knot(), z) + level.delta)
}

/// `g̃'_{k,δ}(z) = S_k^1(z) / √(T_k(z) + δ)`.
pub fn g_tilde_k_delta_prime(level: TruncationLevel, z: f64) -> f64 {
    s_k1(level.k, z) / (trunc_t(level.k as f64, z) + level.delta).sqrt()
}

/// `h̃'_{k,δ}(z) = S_k^2(z) / √(T_{k/(k+1)}(z) + δ)`.
pub fn h_tilde_k_delta_prime(level: TruncationLevel, z: f64) -> f64 {
    s_k2(level.k, z) / (trunc_t(level.vacancy_knot(), z) + level.delta).sqrt()
}

fn nonnegative(function: &'static str, s: f64) -> Result<(), RegularizationError> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(RegularizationError::Domain { function, value: s })
    }
}

fn below_one(function: &'static str, s: f64) -> Result<(), RegularizationError> {
    if (0.0..1.0).contains(&s) {
        Ok(())
    } else {
        Err(RegularizationError::Domain { function, value: s })
    }
}

fn repeated_integral(q: impl Fn(f64) -> f64, anchor: f64, s: f64, knot: f64) -> f64 {
    piecewise(|z| (s - z) * q(z), anchor, s, &[knot], QUAD_TOL)
}

/// `G_{k,δ}(s)`, anchored at `F_{1/2}(0)` with zero value and slope.
pub fn antideriv_g_k_delta(level: TruncationLevel, s: f64) -> Result<f64, RegularizationError> {
    nonnegative("G_k_delta", s)?;
    Ok(repeated_integral(
        |z| g_k_delta_second_derivative(level, z),
        fd_half_at_zero(),
        s,
        level.k as f64,
    ))
}

/// `H_{k,δ}(s)`, anchored at `1/2`. Defined on `[0, 1)`.
pub fn antideriv_h_k_delta(level: TruncationLevel, s: f64) -> Result<f64, RegularizationError> {
    below_one("H_k_delta", s)?;
    Ok(repeated_integral(
        |z| h_k_delta_second_derivative(level, z),
        0.5,
        s,
        level.vacancy_knot(),
    ))
}

/// `g̃_{k,δ}(s) = ∫_0^s g̃'_{k,δ}`.
pub fn g_tilde_k_delta(level: TruncationLevel, s: f64) -> Result<f64, RegularizationError> {
    nonnegative("g_tilde_k_delta", s)?;
    Ok(piecewise(
        |z| g_tilde_k_delta_prime(level, z),
        0.0,
        s,
        &[level.k as f64],
        QUAD_TOL,
    ))
}

/// `h̃_{k,δ}(s) = ∫_0^s h̃'_{k,δ}`. Note the lower limit is 0, so for `δ = 0`
/// below the knot this equals `h̃(s) + 2 atanh(1/√2)`, not `h̃(s)`.
pub fn h_tilde_k_delta(level: TruncationLevel, s: f64) -> Result<f64, RegularizationError> {
    below_one("h_tilde_k_delta", s)?;
    Ok(piecewise(
        |z| h_tilde_k_delta_prime(level, z),
        0.0,
        s,
        &[level.vacancy_knot()],
        QUAD_TOL,
    ))
}

/// Centered second difference `(G(s+h) - 2G(s) + G(s-h)) / h²` of `G_{k,δ}`,
/// evaluated as the tent-weighted average `∫ (h - |z-s|) G'' dz / h²` so that
/// it carries no cancellation error.
pub fn g_k_delta_second_difference(level: TruncationLevel, s: f64, h: f64) -> f64 {
    assert!(h > 0.0 && s - h >= 0.0);
    let q = |z: f64| (h - (z - s).abs()) * g_k_delta_second_derivative(level, z);
    piecewise(q, s - h, s + h, &[s, level.k as f64], QUAD_TOL) / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::tanh_sinh;
    use crate::statistics::{antideriv_g, antideriv_h, h_tilde};
    use proptest::prelude::*;

    fn level(k: u32, delta: f64) -> TruncationLevel {
        TruncationLevel::new(k, delta).unwrap()
    }

    /// Nested evaluation of the double integral: inner antiderivative
    /// tabulated once on the outer nodes, then integrated.
    fn nested_oracle(q: impl Fn(f64) -> f64, anchor: f64, s: f64, knot: f64) -> f64 {
        let inner = |y: f64| crate::quadrature::piecewise(&q, anchor, y, &[knot], 1e-12);
        let mut memo = std::collections::BTreeMap::new();
        let (lo, hi) = if anchor <= s { (anchor, s) } else { (s, anchor) };
        let sign = if anchor <= s { 1.0 } else { -1.0 };
        let mut total = 0.0;
        let mut points = vec![lo];
        if knot > lo && knot < hi {
            points.push(knot);
        }
        points.push(hi);
        for w in points.windows(2) {
            total += tanh_sinh(
                |y, _| {
                    *memo
                        .entry(y.to_bits())
                        .or_insert_with(|| inner(y))
                },
                w[0],
                w[1],
                1e-10,
            )
            .value;
        }
        sign * total
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(trunc_t(3.0, -1.0), 0.0);
        assert_eq!(trunc_t(3.0, 2.0), 2.0);
        assert_eq!(trunc_t(3.0, 10.0), 3.0);
        assert_eq!(s_k1(4, -1.0), 1.0);
        assert_eq!(s_k2(3, 0.5), 2.0);
        assert_eq!(s_k2(2, 0.999), 3.0);
    }

    #[test]
    fn l_k_examples() {
        assert_eq!(l_k(4, 0.0).unwrap(), 0.0);
        let knot = l_k(4, 0.8).unwrap();
        assert!((knot - 5f64.ln()).abs() < 1e-15);
        assert!((l_k(4, 0.8 + 1e-13).unwrap() - 5f64.ln()).abs() < 1e-11);
        assert!((l_k(4, 0.9).unwrap() - (5.0 * 0.9 - 4.0 + 5f64.ln())).abs() < 1e-15);
        assert!(l_k(4, 1.0).is_err());
        assert!(l_k(4, -0.1).is_err());
    }

    #[test]
    fn level_validation() {
        assert!(TruncationLevel::new(0, 0.1).is_err());
        assert!(TruncationLevel::new(3, -0.1).is_err());
        assert!(TruncationLevel::new(3, 0.8).is_err());
        assert!(TruncationLevel::new(3, 0.0).is_ok());
    }

    #[test]
    fn continuity_of_coefficients_at_knots() {
        for k in [1, 2, 5, 10] {
            let kf = k as f64;
            let a = s_k1(k, kf);
            let b = s_k1(k, kf * (1.0 + 1e-12));
            assert!((a - b).abs() < 1e-9 * a);
            let knot = vacancy_knot(k);
            assert!((s_k2(k, knot) - (1.0 + kf)).abs() < 1e-12);
        }
        // S_k^1(z) = z g'(z) tends to 1 as z -> 0+
        assert!((s_k1(3, 1e-12) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn anchors_vanish() {
        let f0 = fd_half_at_zero();
        for lv in [level(1, 0.0), level(10, 0.1)] {
            assert_eq!(antideriv_g_k_delta(lv, f0).unwrap(), 0.0);
            assert_eq!(antideriv_h_k_delta(lv, 0.5).unwrap(), 0.0);
            assert_eq!(g_tilde_k_delta(lv, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn untruncated_below_knot() {
        // δ = 0 and s below the knot reproduce the untruncated functions
        let lv = level(50, 0.0);
        for &s in &[0.05, 0.765, 3.0, 20.0] {
            let a = antideriv_g_k_delta(lv, s).unwrap();
            let b = antideriv_g(s).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "s = {s}: {a} vs {b}");
        }
        for &s in &[0.1, 0.5, 0.9] {
            let a = antideriv_h_k_delta(lv, s).unwrap();
            assert!((a - antideriv_h(s).unwrap()).abs() < 1e-10);
        }
        // h̃_{k,0} starts at 0, h̃ at 1/2
        let offset = 2.0 * std::f64::consts::FRAC_1_SQRT_2.atanh();
        let at_half = h_tilde_k_delta(lv, 0.5).unwrap();
        assert!((at_half - offset).abs() < 1e-10);
        assert!((at_half - offset - h_tilde(0.5).unwrap()).abs() < 1e-10);
        let at_09 = h_tilde_k_delta(lv, 0.9).unwrap();
        assert!((at_09 - offset - h_tilde(0.9).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn cauchy_formula_matches_nested_oracle() {
        for (lv, s) in [
            (level(2, 0.1), 5.0),
            (level(10, 0.01), 0.2),
            (level(1, 0.5), 30.0),
            (level(5, 0.0), 12.0),
        ] {
            let fast = antideriv_g_k_delta(lv, s).unwrap();
            let q = |z: f64| g_k_delta_second_derivative(lv, z);
            let slow = nested_oracle(q, fd_half_at_zero(), s, lv.k() as f64);
            assert!((fast - slow).abs() < 1e-8 * (1.0 + fast.abs()), "{lv:?} s={s}: {fast} vs {slow}");
        }
        for (lv, s) in [(level(2, 0.1), 0.9), (level(3, 0.0), 0.05)] {
            let fast = antideriv_h_k_delta(lv, s).unwrap();
            let q = |z: f64| h_k_delta_second_derivative(lv, z);
            let slow = nested_oracle(q, 0.5, s, lv.vacancy_knot());
            assert!((fast - slow).abs() < 1e-8 * (1.0 + fast.abs()));
        }
    }

    #[test]
    fn second_difference_matches_direct_formula() {
        let lv = level(2, 0.1);
        let h = 1e-2;
        for &s in &[0.5, 1.9, 2.0, 4.0] {
            let g = |x: f64| antideriv_g_k_delta(lv, x).unwrap();
            let direct = (g(s + h) - 2.0 * g(s) + g(s - h)) / (h * h);
            let tent = g_k_delta_second_difference(lv, s, h);
            assert!((direct - tent).abs() < 1e-5 * tent, "s = {s}");
        }
    }

    #[test]
    fn l_k_converges_on_compacts() {
        let ks = [1u32, 10, 100, 1000];
        let mut prev = f64::INFINITY;
        for k in ks {
            let err = (0..=90)
                .map(|i| i as f64 / 100.0)
                .map(|s| (l_k(k, s).unwrap() + (-s).ln_1p()).abs())
                .fold(0.0, f64::max);
            assert!(err <= prev);
            prev = err;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn coefficients_converge_pointwise() {
        for &z in &[0.3, 2.0, 40.0] {
            let limit = z * g_prime(z).unwrap();
            assert_eq!(s_k1(100, z), limit);
        }
        for &z in &[0.3, 0.9, 0.99] {
            let limit = 1.0 / (1.0 - z);
            assert!((s_k2(1000, z) - limit).abs() < 1e-12 * limit);
        }
    }

    proptest! {
        #[test]
        fn l_k_monotone_in_k(k in 1u32..200, s in 0.0f64..0.999_999) {
            prop_assert!(l_k(k, s).unwrap() <= l_k(k + 1, s).unwrap() + 1e-14);
        }

        #[test]
        fn l_k_nondecreasing_in_s(k in 1u32..200, a in 0.0f64..0.999_999, b in 0.0f64..0.999_999) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(l_k(k, lo).unwrap() <= l_k(k, hi).unwrap());
        }

        #[test]
        fn coefficients_positive_and_bounded(k in 1u32..50, z in -10.0f64..1e4) {
            let a = s_k1(k, z);
            let b = s_k2(k, z);
            prop_assert!(a > 0.0 && a.is_finite());
            prop_assert!(b >= 1.0 && b <= 1.0 + k as f64);
        }

        #[test]
        fn regularized_g_is_nonnegative(k in 1u32..20, delta in 0.0f64..0.7, s in 0.0f64..50.0) {
            let lv = level(k, delta);
            prop_assert!(antideriv_g_k_delta(lv, s).unwrap() >= -1e-12);
        }
    }
}
