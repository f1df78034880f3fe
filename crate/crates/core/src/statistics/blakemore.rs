use super::StatisticsError;

fn check_unit(function: &'static str, z: f64) -> Result<(), StatisticsError> {
    if z > 0.0 && z < 1.0 {
        Ok(())
    } else {
        Err(StatisticsError::Domain { function, value: z })
    }
}

/// Inverse Blakemore statistics `h(z) = log z - log(1 - z)`.
///
/// Fails outside `(0, 1)`; the saturation limit is never clamped here.
pub fn blakemore_h(z: f64) -> Result<f64, StatisticsError> {
    check_unit("blakemore_h", z)?;
    Ok(z.ln() - (-z).ln_1p())
}

/// `h'(z) = 1 / (z (1 - z))`.
pub fn blakemore_h_prime(z: f64) -> Result<f64, StatisticsError> {
    check_unit("blakemore_h_prime", z)?;
    Ok(1.0 / (z * (1.0 - z)))
}
