use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest Fock index accepted by the basis-function routines.
pub const MAX_FOCK_INDEX: usize = 100;
/// Largest `|x|` accepted by [`hermite_poly`].
pub const HERMITE_SAFE_ABS_X: f64 = 20.0;

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite_poly(n: usize, x: f64) -> Result<f64> {
    if n > MAX_FOCK_INDEX || !(x.abs() <= HERMITE_SAFE_ABS_X) {
        return Err(Error::Overflow {
            func: "hermite_poly",
            detail: format!("n = {n}, x = {x}; safe range is n <= {MAX_FOCK_INDEX}, |x| <= {HERMITE_SAFE_ABS_X}"),
        });
    }
    let mut h0 = 1.0;
    if n == 0 {
        return Ok(h0);
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    if !h1.is_finite() {
        return Err(Error::Overflow { func: "hermite_poly", detail: format!("H_{n}({x}) is not finite") });
    }
    Ok(h1)
}

/// Normalized oscillator eigenfunction `u_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}`.
pub fn oscillator_eigenfunction(n: usize, x: f64) -> Result<f64> {
    if n > MAX_FOCK_INDEX {
        return Err(Error::domain("oscillator_eigenfunction", format!("n = {n} exceeds {MAX_FOCK_INDEX}")));
    }
    let mut out = vec![0.0; n + 1];
    oscillator_functions(x, &mut out);
    Ok(out[n])
}

/// Fills `out[k] = u_k(x)` for `k = 0..out.len()`.
///
/// Uses the normalized recurrence
/// `u_{k+1} = sqrt(2/(k+1)) x u_k - sqrt(k/(k+1)) u_{k-1}` started from an
/// unscaled seed; the Gaussian factor is carried as a separate log-scale and
/// only applied on output, so nothing overflows or underflows prematurely.
pub fn oscillator_functions(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    const RESCALE: f64 = 1e150;
    let mut log_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = factor;
    for k in 1..out.len() {
        let kf = (k - 1) as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
            factor = log_scale.exp();
        }
        out[k] = if log_scale > -700.0 || cur == 0.0 {
            cur * factor
        } else {
            cur.signum() * (cur.abs().ln() + log_scale).exp()
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_real, QuadConfig};

    /// Explicit expansion H_n(x) = n! Σ_m (-1)^m (2x)^{n-2m} / (m! (n-2m)!).
    fn hermite_by_coefficients(n: usize, x: f64) -> f64 {
        let fact = |k: usize| (1..=k).fold(1.0f64, |a, j| a * j as f64);
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(n) / (fact(m) * fact(n - 2 * m)) * (2.0 * x).powi((n - 2 * m) as i32)
            })
            .sum()
    }

    #[test]
    fn low_order_values() {
        assert_eq!(hermite_poly(0, 1.7).unwrap(), 1.0);
        assert_eq!(hermite_poly(3, 1.0).unwrap(), -4.0);
    }

    #[test]
    fn recurrence_matches_coefficient_expansion() {
        let direct = hermite_by_coefficients(10, 0.3);
        let rec = hermite_poly(10, 0.3).unwrap();
        assert!((rec - direct).abs() <= 1e-12 * direct.abs(), "{rec} vs {direct}");
    }

    #[test]
    fn out_of_range_is_reported() {
        assert!(matches!(hermite_poly(101, 0.5), Err(Error::Overflow { .. })));
        assert!(matches!(hermite_poly(5, 20.5), Err(Error::Overflow { .. })));
        assert!(hermite_poly(100, 20.0).unwrap().is_finite());
    }

    #[test]
    fn eigenfunction_special_values() {
        let u00 = oscillator_eigenfunction(0, 0.0).unwrap();
        assert!((u00 - PI.powf(-0.25)).abs() < 1e-16);
        assert_eq!(oscillator_eigenfunction(1, 0.0).unwrap(), 0.0);
        assert!(oscillator_eigenfunction(101, 0.0).is_err());
    }

    #[test]
    fn eigenfunction_matches_hermite_definition() {
        for n in [0usize, 3, 10, 25] {
            for x in [-2.3, 0.4, 3.1] {
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                let norm = 1.0 / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt();
                let expect = norm * hermite_poly(n, x).unwrap() * (-0.5 * x * x).exp();
                let got = oscillator_eigenfunction(n, x).unwrap();
                assert!((got - expect).abs() <= 1e-13 * expect.abs().max(1e-3), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn large_index_does_not_overflow() {
        let mut u = vec![0.0; 101];
        for x in [0.0, 5.0, 13.9, 20.0, 35.0] {
            oscillator_functions(x, &mut u);
            assert!(u.iter().all(|v| v.is_finite() && v.abs() < 1.0), "x = {x}");
        }
    }

    #[test]
    fn u7_is_normalized() {
        let cfg = QuadConfig::absolute(1e-13);
        let norm = integrate_real(|x| oscillator_eigenfunction(7, x).unwrap().powi(2), -20.0, 20.0, cfg).unwrap();
        assert!((norm - 1.0).abs() < 1e-10, "{norm}");
    }
}
