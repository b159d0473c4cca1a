//! Gamma-function helpers.

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// Rising product `(a + 1)(a + 2) ... (a + n)` as a double.
pub fn rising(a: f64, n: u32) -> f64 {
    (1..=n).map(|k| a + k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-13);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert_eq!(rising(0.0, 3), 6.0);
    }

    #[test]
    fn large_arguments_stay_finite() {
        let v = ln_gamma(1e4 + 1.0);
        assert!(v.is_finite() && v > 8e4);
    }
}
