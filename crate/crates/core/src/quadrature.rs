//! Double-exponential quadrature.
//!
//! Two rules are provided: tanh-sinh on a finite interval and exp-sinh on a
//! half line. Both refine by halving the step size until two successive
//! levels agree to the requested relative tolerance. Integrable algebraic or
//! logarithmic endpoint singularities are handled without special care from
//! the caller, because the abscissae are generated as distances from the
//! nearest endpoint and never land on it.

use std::f64::consts::FRAC_PI_2;

/// Outcome of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const MAX_LEVEL: u32 = 12;
const MIN_LEVEL: u32 = 3;
/// Abscissa parameter range. At |t| = 4 the tanh-sinh node sits about
/// 1e-37 (relative) from the endpoint and its weight is negligible.
const T_MAX_FINITE: f64 = 4.0;
const T_MIN_HALF_LINE: f64 = -4.5;
const T_MAX_HALF_LINE: f64 = 3.5;

/// Integrates `f` over `[a, b]` with the tanh-sinh rule.
///
/// `a > b` is allowed and flips the sign. The integrand receives the abscissa
/// `x` together with the distance from `x` to the nearest endpoint, which lets
/// callers evaluate endpoint singularities without cancellation.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Quadrature
where
    F: FnMut(f64, f64) -> f64,
{
    if a == b {
        return Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        };
    }
    if a > b {
        let q = tanh_sinh(f, b, a, rel_tol);
        return Quadrature {
            value: -q.value,
            ..q
        };
    }
    let half = 0.5 * (b - a);
    let mut evals = 0usize;
    // Contribution of the node at parameter t (weight included, h excluded).
    let mut node = |t: f64, evals: &mut usize| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        // distance from the closer endpoint: half * (1 - tanh|u|)
        let dist = half * 2.0 / (1.0 + (2.0 * u.abs()).exp());
        if dist <= 0.0 {
            return 0.0;
        }
        let w = half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        let x = if u < 0.0 { a + dist } else { b - dist };
        *evals += 1;
        let fx = f(x, dist);
        if fx.is_finite() {
            w * fx
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let n0 = (T_MAX_FINITE / h) as i64;
    let mut sum = 0.0;
    for k in -n0..=n0 {
        sum += node(k as f64 * h, &mut evals);
    }
    let mut estimate = sum * h;
    let mut err = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let n = (T_MAX_FINITE / h) as i64;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        // only the new (odd) nodes of this level
        while k <= n {
            if k % 2 != 0 {
                sum += node(k as f64 * h, &mut evals);
            }
            k += 1;
        }
        let next = sum * h;
        err = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && err <= rel_tol * estimate.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if level >= MIN_LEVEL && err == 0.0 {
            break;
        }
    }
    Quadrature {
        value: estimate,
        error_estimate: err,
        evaluations: evals,
    }
}

/// Integrates `f` over `[a, ∞)` with the exp-sinh rule.
///
/// The integrand receives `x` and the offset `x - a`, so a singularity at the
/// left endpoint can be evaluated from the offset directly. The integrand must
/// decay at least exponentially; contributions that overflow are dropped.
pub fn exp_sinh<F>(mut f: F, a: f64, rel_tol: f64) -> Quadrature
where
    F: FnMut(f64, f64) -> f64,
{
    let mut evals = 0usize;
    let mut node = |t: f64, evals: &mut usize| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let offset = u.exp();
        if !offset.is_finite() || offset == 0.0 {
            return 0.0;
        }
        let w = FRAC_PI_2 * t.cosh() * offset;
        *evals += 1;
        let fx = f(a + offset, offset);
        let c = w * fx;
        if c.is_finite() {
            c
        } else {
            0.0
        }
    };

    let mut h = 1.0;
    let lo = (T_MIN_HALF_LINE / h).ceil() as i64;
    let hi = (T_MAX_HALF_LINE / h).floor() as i64;
    let mut sum = 0.0;
    for k in lo..=hi {
        sum += node(k as f64 * h, &mut evals);
    }
    let mut estimate = sum * h;
    let mut err = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let lo = (T_MIN_HALF_LINE / h).ceil() as i64;
        let hi = (T_MAX_HALF_LINE / h).floor() as i64;
        for k in lo..=hi {
            if k % 2 != 0 {
                sum += node(k as f64 * h, &mut evals);
            }
        }
        let next = sum * h;
        err = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && err <= rel_tol * estimate.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if level >= MIN_LEVEL && err == 0.0 {
            break;
        }
    }
    Quadrature {
        value: estimate,
        error_estimate: err,
        evaluations: evals,
    }
}

/// Integrates a smooth-ish function over `[a, b]`, splitting at interior
/// break points where the integrand has kinks.
pub fn piecewise<F>(mut f: F, a: f64, b: f64, breaks: &[f64], rel_tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&c| c > lo && c < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    points.extend(inner);
    points.push(hi);
    let total: f64 = points
        .windows(2)
        .map(|w| tanh_sinh(|x, _| f(x), w[0], w[1], rel_tol).value)
        .sum();
    sign * total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = tanh_sinh(|x, _| 3.0 * x * x, 0.0, 2.0, 1e-14);
        assert!((q.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = tanh_sinh(|x, _| x.exp(), 1.0, 0.0, 1e-14);
        assert!((q.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn inverse_sqrt_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2, evaluated through the endpoint distance
        let q = tanh_sinh(|x, d| if x < 0.5 { 1.0 / d.sqrt() } else { 1.0 / x.sqrt() }, 0.0, 1.0, 1e-13);
        assert!((q.value - 2.0).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn log_singularity() {
        let q = tanh_sinh(|x, _| x.ln(), 0.0, 1.0, 1e-13);
        assert!((q.value + 1.0).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn half_line_gamma() {
        // Γ(3/2) = √π / 2
        let q = exp_sinh(|x, _| x.sqrt() * (-x).exp(), 0.0, 1e-14);
        assert!((q.value - PI.sqrt() / 2.0).abs() < 1e-13, "{}", q.value);
        let q = exp_sinh(|_, d| (-d).exp() / d.sqrt(), 0.0, 1e-14);
        assert!((q.value - PI.sqrt()).abs() < 1e-12, "{}", q.value);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let m22: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((m22 - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn piecewise_kink() {
        let v = piecewise(|x: f64| (x - 1.0).abs(), 0.0, 3.0, &[1.0], 1e-14);
        assert!((v - 2.5).abs() < 1e-13);
    }
}
