use super::gamma::{ln_factorial, log_gamma};
use super::lauricella::{fa2_dyadic, Dyadic};
use super::{SignedLog, MAX_FOCK_INDEX};
use crate::error::{Error, Result};

/// `∫₀^∞ e^{-x²} H_μ(x) H_ν(x) x^ε dx` as sign and log-magnitude.
///
/// With `H_{2r}(x) = (-1)^r (2r)!/r! ₁F₁(-r; 1/2; x²)` and
/// `H_{2r+1}(x) = (-1)^r (2r+1)!/r! 2x ₁F₁(-r; 3/2; x²)`, term-by-term
/// integration against `e^{-x²} x^ε` gives, for `κ ∈ {1/2, 1, 2}`,
///
/// `κ (-1)^{r+s} (μ! ν! / (r! s!)) Γ(a) F_A(a; -r, -s; c_μ, c_ν; 1, 1)`
///
/// where `a = (ε + 1 + μ̃ + ν̃)/2`, `c = 1/2` for even and `3/2` for odd
/// indices, and `μ̃` is the parity bit.
pub fn erdelyi_halfline_scaled(mu: usize, nu: usize, eps: f64) -> Result<SignedLog> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain("erdelyi_halfline", format!("eps = {eps} must be positive")));
    }
    if mu > MAX_FOCK_INDEX || nu > MAX_FOCK_INDEX {
        return Err(Error::domain("erdelyi_halfline", format!("indices ({mu}, {nu}) exceed {MAX_FOCK_INDEX}")));
    }
    let (r, s) = ((mu / 2) as u32, (nu / 2) as u32);
    let parity_sum = (mu % 2 + nu % 2) as i64;
    let ln_kappa = match parity_sum {
        0 => -std::f64::consts::LN_2,
        1 => 0.0,
        _ => std::f64::consts::LN_2,
    };
    let lower = |index: usize| Dyadic::from_f64(if index.is_multiple_of(2) { 0.5 } else { 1.5 });
    let a = Dyadic::from_f64(eps).add_int(1 + parity_sum).halve();
    let a_f64 = 0.5 * (eps + 1.0 + parity_sum as f64);

    let series = fa2_dyadic(&a, r, s, &lower(mu), &lower(nu));
    let ln_prefactor = ln_kappa + ln_factorial(mu as u32) + ln_factorial(nu as u32) - ln_factorial(r) - ln_factorial(s)
        + log_gamma(a_f64)?;
    let sign = if (r + s) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(series.scale(sign, ln_prefactor))
}

/// `∫₀^∞ e^{-x²} H_μ(x) H_ν(x) x^ε dx`.
pub fn erdelyi_halfline(mu: usize, nu: usize, eps: f64) -> Result<f64> {
    erdelyi_halfline_scaled(mu, nu, eps).map(|v| v.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_real, QuadConfig};
    use crate::specfun::hermite_poly;
    use std::f64::consts::PI;

    /// Adaptive quadrature oracle on [0, X], X = 12 + sqrt(μ + ν).
    fn quad_oracle(mu: usize, nu: usize, eps: f64) -> f64 {
        let upper = 12.0 + ((mu + nu) as f64).sqrt();
        let f = |x: f64| (-x * x).exp() * hermite_poly(mu, x).unwrap() * hermite_poly(nu, x).unwrap() * x.powf(eps);
        let rough = QuadConfig { abs_tol: 0.0, rel_tol: 1e-6, max_intervals: 20000 };
        let l1 = integrate_real(|x| f(x).abs(), 0.0, upper, rough).unwrap();
        let cfg = QuadConfig { abs_tol: 1e-13 * l1, rel_tol: 1e-13, max_intervals: 20000 };
        integrate_real(f, 0.0, upper, cfg).unwrap()
    }

    #[test]
    fn ground_state_second_moment() {
        let v = erdelyi_halfline(0, 0, 2.0).unwrap();
        assert!((v - PI.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_parity_first_moment() {
        // ∫₀^∞ 2x · x e^{-x²} dx = √π / 2
        let v = erdelyi_halfline(0, 1, 1.0).unwrap();
        let oracle = quad_oracle(0, 1, 1.0);
        assert!((oracle - PI.sqrt() / 2.0).abs() < 1e-12);
        assert!((v - oracle).abs() < 1e-13, "{v} vs {oracle}");
    }

    #[test]
    fn agrees_with_quadrature_near_exceptional_point() {
        let v = erdelyi_halfline(4, 2, 1.42207).unwrap();
        let oracle = quad_oracle(4, 2, 1.42207);
        assert!((v - oracle).abs() <= 1e-10 * oracle.abs(), "{v} vs {oracle}");
    }

    #[test]
    fn agrees_with_quadrature_across_parities() {
        for &(mu, nu) in &[(7usize, 3usize), (10, 5), (12, 12), (9, 14), (20, 19)] {
            for eps in [0.5, 1.7, 3.0] {
                let v = erdelyi_halfline(mu, nu, eps).unwrap();
                let oracle = quad_oracle(mu, nu, eps);
                let scale = oracle.abs().max(
                    (erdelyi_halfline(mu, mu, eps).unwrap() * erdelyi_halfline(nu, nu, eps).unwrap()).abs().sqrt(),
                );
                assert!((v - oracle).abs() <= 1e-10 * scale, "({mu},{nu}) eps={eps}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn symmetric_in_indices() {
        for &(mu, nu) in &[(3usize, 8usize), (0, 5), (40, 33)] {
            let a = erdelyi_halfline(mu, nu, 1.3).unwrap();
            let b = erdelyi_halfline(nu, mu, 1.3).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_non_positive_eps() {
        assert!(matches!(erdelyi_halfline(1, 1, 0.0), Err(Error::Domain { .. })));
        assert!(erdelyi_halfline(1, 1, -0.5).is_err());
    }
}
