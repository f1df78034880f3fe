use super::fermi_dirac::{fermi_dirac, FermiDiracOrder};
use super::gamma::gamma_fn;
use super::StatisticsError;

/// `g(z) = F_{1/2}^{-1}(z)` for `z > 0`.
///
/// The root is bracketed from the exponential/power-law asymptotics and then
/// refined by Newton steps that fall back to bisection whenever they leave the
/// bracket.
pub fn inverse_fd_half(z: f64) -> Result<f64, StatisticsError> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(StatisticsError::Domain {
            function: "inverse_fd_half",
            value: z,
        });
    }
    let f = |y: f64| fermi_dirac(FermiDiracOrder::HALF, y);
    let df = |y: f64| fermi_dirac(FermiDiracOrder::MINUS_HALF, y);

    // F ≤ e^y gives y ≥ ln z; F ≥ e^y/2 (y ≤ 0) and F ≥ y^{3/2}/(2Γ(5/2))
    // (y > 0) give the upper end.
    let gamma52 = gamma_fn(2.5).expect("positive");
    let mut lo = z.ln() - 1.0;
    let mut hi = (2.0 * z).ln().max((2.0 * gamma52 * z).powf(2.0 / 3.0)) + 1.0;
    while f(lo) > z {
        lo -= 2.0 * (1.0 + lo.abs());
    }
    while f(hi) < z {
        hi += 2.0 * (1.0 + hi.abs());
    }

    let mut y = if z < 1.0 {
        // F(y) ≈ e^y - e^{2y}/2^{3/2}
        z.ln() + z / 8f64.sqrt()
    } else {
        (gamma52 * z).powf(2.0 / 3.0)
    };
    if !(y > lo && y < hi) {
        y = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let r = f(y) - z;
        if r == 0.0 {
            return Ok(y);
        }
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = df(y);
        let mut next = y - r / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - y).abs();
        y = next;
        if step <= 4.0 * f64::EPSILON * (1.0 + y.abs()) || hi - lo <= 4.0 * f64::EPSILON * (1.0 + y.abs()) {
            return Ok(y);
        }
    }
    Ok(y)
}

/// `g'(z) = 1 / F_{-1/2}(g(z))`.
pub fn g_prime(z: f64) -> Result<f64, StatisticsError> {
    let y = inverse_fd_half(z).map_err(|_| StatisticsError::Domain {
        function: "g_prime",
        value: z,
    })?;
    Ok(1.0 / fermi_dirac(FermiDiracOrder::MINUS_HALF, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_at_zero() {
        let z = fermi_dirac(FermiDiracOrder::HALF, 0.0);
        assert!(inverse_fd_half(z).unwrap().abs() < 1e-14);
    }

    #[test]
    fn round_trip_moderate() {
        let z = fermi_dirac(FermiDiracOrder::HALF, 7.3);
        assert!((inverse_fd_half(z).unwrap() - 7.3).abs() < 1e-8);
    }

    #[test]
    fn forward_of_inverse() {
        for &z in &[1e-12, 1e-3, 0.5, 0.765, 2.0, 1e3, 1e8] {
            let y = inverse_fd_half(z).unwrap();
            let back = fermi_dirac(FermiDiracOrder::HALF, y);
            assert!((back - z).abs() <= 1e-10 * z, "z = {z}");
        }
    }

    #[test]
    fn g_prime_at_reference_point() {
        let z = fermi_dirac(FermiDiracOrder::HALF, 0.0);
        let expected = 1.0 / fermi_dirac(FermiDiracOrder::MINUS_HALF, 0.0);
        assert!((g_prime(z).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        assert!(inverse_fd_half(0.0).is_err());
        assert!(inverse_fd_half(-1.0).is_err());
        assert!(g_prime(0.0).is_err());
    }
}
