//! Terminating two-variable Lauricella `F_A` at unit arguments,
//!
//! `F_A(a; -r, -s; c1, c2; 1, 1) = Σ_{i=0}^{r} Σ_{j=0}^{s}
//!     (a)_{i+j} (-r)_i (-s)_j / ((c1)_i (c2)_j i! j!)`.
//!
//! The terms alternate in sign and grow far beyond the final value (around
//! 1e44 against O(1) results for `r = s = 50`), so a floating-point sum,
//! even with log-magnitude terms, loses every significant digit. Every `f64`
//! is a dyadic rational, so the sum is instead evaluated exactly with big
//! integers and rounded once at the end.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SignedLog;
use crate::error::{Error, Result};

/// Largest terminating order accepted for `r` and `s`.
pub const MAX_TERMINATING_ORDER: u32 = 60;

/// Parameters of `F_A(a; -r, -s; c1, c2; 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LauricellaArgs {
    pub a: f64,
    pub r: u32,
    pub s: u32,
    pub c1: f64,
    pub c2: f64,
}

impl LauricellaArgs {
    pub fn new(a: f64, r: u32, s: u32, c1: f64, c2: f64) -> Self {
        Self { a, r, s, c1, c2 }
    }

    fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::domain("lauricella_fa2", format!("a = {} is not finite", self.a)));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return Err(Error::domain(
                "lauricella_fa2",
                format!("lower parameters must be positive, got c1 = {}, c2 = {}", self.c1, self.c2),
            ));
        }
        if self.r > MAX_TERMINATING_ORDER || self.s > MAX_TERMINATING_ORDER {
            return Err(Error::domain(
                "lauricella_fa2",
                format!("orders r = {}, s = {} exceed {MAX_TERMINATING_ORDER}", self.r, self.s),
            ));
        }
        Ok(())
    }
}

/// An exact binary fraction `num / 2^shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Dyadic {
    num: BigInt,
    shift: u32,
}

impl Dyadic {
    pub(crate) fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "dyadic expansion of non-finite value");
        if x == 0.0 {
            return Self { num: BigInt::zero(), shift: 0 };
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut mantissa, mut exp) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
        let tz = mantissa.trailing_zeros() as i64;
        mantissa >>= tz;
        exp += tz;
        let mut num = BigInt::from(mantissa);
        if negative {
            num = -num;
        }
        if exp >= 0 {
            Self { num: num << (exp as usize), shift: 0 }
        } else {
            Self { num, shift: (-exp) as u32 }
        }
    }

    /// `self + k` for an integer `k`.
    pub(crate) fn add_int(&self, k: i64) -> Self {
        Self { num: &self.num + (BigInt::from(k) << self.shift as usize), shift: self.shift }
    }

    /// `self / 2`.
    pub(crate) fn halve(&self) -> Self {
        Self { num: self.num.clone(), shift: self.shift + 1 }
    }

    fn is_positive(&self) -> bool {
        self.num.is_positive()
    }
}

/// Integer numerators `B_i` and common denominator `D` with
/// `(-order)_i / ((c)_i i!) = B_i / D`.
fn parameter_series(order: u32, c: &Dyadic) -> (Vec<BigInt>, BigInt) {
    let q = c.shift as usize;
    let step = BigInt::one() << q;
    let n = order as usize;
    // (c)_i 2^{q i} = Π_{j<i} (C + j 2^q); suffix[i] = Π_{j=i}^{n-1} (C + j 2^q)
    let mut suffix = vec![BigInt::one(); n + 1];
    for i in (0..n).rev() {
        let factor = &c.num + &step * BigInt::from(i);
        suffix[i] = &suffix[i + 1] * factor;
    }
    let mut numerators = Vec::with_capacity(n + 1);
    let mut binom = BigInt::one();
    for i in 0..=n {
        let mut term = (&binom << (q * i)) * &suffix[i];
        if i % 2 == 1 {
            term = -term;
        }
        numerators.push(term);
        if i < n {
            binom = binom * BigInt::from(n - i) / BigInt::from(i + 1);
        }
    }
    let denominator = suffix[0].clone();
    (numerators, denominator)
}

/// Exact evaluation with dyadic parameters.
pub(crate) fn fa2_dyadic(a: &Dyadic, r: u32, s: u32, c1: &Dyadic, c2: &Dyadic) -> SignedLog {
    debug_assert!(c1.is_positive() && c2.is_positive());
    let (b, db) = parameter_series(r, c1);
    let (d, dd) = parameter_series(s, c2);
    let total = (r + s) as usize;

    // coefficients of the rising factorials: Σ_k K_k (a)_k
    let mut k_coeffs = vec![BigInt::zero(); total + 1];
    for (i, bi) in b.iter().enumerate() {
        for (j, dj) in d.iter().enumerate() {
            k_coeffs[i + j] += bi * dj;
        }
    }

    // Horner in rising-factorial form, scaled by 2^{t (total - k)}:
    // V_k = K_k 2^{t(total-k)} + (A + k 2^t) V_{k+1}
    let t = a.shift as usize;
    let step = BigInt::one() << t;
    let mut acc = k_coeffs[total].clone();
    for k in (0..total).rev() {
        let factor = &a.num + &step * BigInt::from(k);
        acc = (&k_coeffs[k] << (t * (total - k))) + factor * acc;
    }
    ratio_to_signed_log(&acc, &(db * dd), (t * total) as u64)
}

/// `num / (den 2^extra_shift)` rounded to a sign and natural-log magnitude.
fn ratio_to_signed_log(num: &BigInt, den: &BigInt, extra_shift: u64) -> SignedLog {
    if num.is_zero() {
        return SignedLog::ZERO;
    }
    let sign = if num.is_negative() { -1.0 } else { 1.0 };
    let mag = num.abs();
    let shift = 64 + den.bits() as i64 - mag.bits() as i64;
    let quotient = if shift >= 0 { (mag << shift as usize) / den } else { mag / (den << (-shift) as usize) };
    let q = quotient.to_f64().expect("quotient has about 64 bits");
    let exp2 = -shift - extra_shift as i64;
    SignedLog { sign, ln_abs: q.ln() + exp2 as f64 * std::f64::consts::LN_2 }
}

/// Terminating `F_A(a; -r, -s; c1, c2; 1, 1)` as sign and log-magnitude.
pub fn lauricella_fa2_scaled(args: &LauricellaArgs) -> Result<SignedLog> {
    args.validate()?;
    Ok(fa2_dyadic(&Dyadic::from_f64(args.a), args.r, args.s, &Dyadic::from_f64(args.c1), &Dyadic::from_f64(args.c2)))
}

/// Terminating `F_A(a; -r, -s; c1, c2; 1, 1)`.
pub fn lauricella_fa2(args: &LauricellaArgs) -> Result<f64> {
    lauricella_fa2_scaled(args).map(|v| v.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poch(a: &BigRational, k: u32) -> BigRational {
        (0..k).fold(BigRational::one(), |acc, j| acc * (a + rat(j as i64, 1)))
    }

    fn fact(k: u32) -> BigRational {
        (1..=k).fold(BigRational::one(), |acc, j| acc * rat(j as i64, 1))
    }

    /// Literal double sum in exact rational arithmetic.
    fn fa2_rational(a: &BigRational, r: u32, s: u32, c1: &BigRational, c2: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..=r {
            for j in 0..=s {
                let num = poch(a, i + j) * poch(&rat(-(r as i64), 1), i) * poch(&rat(-(s as i64), 1), j);
                let den = poch(c1, i) * poch(c2, j) * fact(i) * fact(j);
                acc += num / den;
            }
        }
        acc
    }

    fn to_f64(x: &BigRational) -> f64 {
        x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
    }

    #[test]
    fn only_leading_term_when_orders_vanish() {
        for (a, c1, c2) in [(0.3, 0.5, 0.5), (7.25, 1.5, 0.5), (-2.5, 3.0, 0.1)] {
            assert_eq!(lauricella_fa2(&LauricellaArgs::new(a, 0, 0, c1, c2)).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_first_order_term() {
        let v = lauricella_fa2(&LauricellaArgs::new(1.5, 1, 0, 0.5, 0.5)).unwrap();
        assert!((v + 2.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn matches_rational_double_sum_at_eps_1_3() {
        // a = (1.3 + 1) / 2 = 23/20
        let exact = fa2_rational(&rat(23, 20), 2, 1, &rat(1, 2), &rat(1, 2));
        let expect = to_f64(&exact);
        let got = lauricella_fa2(&LauricellaArgs::new(2.3 / 2.0, 2, 1, 0.5, 0.5)).unwrap();
        assert!((got - expect).abs() <= 1e-14 * expect.abs().max(1.0), "{got} vs {expect}");
    }

    #[test]
    fn matches_rational_sum_with_cancellation() {
        // integer-valued 2a: the float path is compared against the literal sum
        for (two_a, r, s, c1, c2) in [(5i64, 12u32, 9u32, rat(1, 2), rat(3, 2)), (7, 25, 20, rat(3, 2), rat(3, 2))] {
            let exact = fa2_rational(&rat(two_a, 2), r, s, &c1, &c2);
            let expect = to_f64(&exact);
            let c1f = to_f64(&c1);
            let c2f = to_f64(&c2);
            let got = lauricella_fa2(&LauricellaArgs::new(two_a as f64 / 2.0, r, s, c1f, c2f)).unwrap();
            assert!((got - expect).abs() <= 1e-14 * expect.abs(), "r={r} s={s}: {got} vs {expect}");
        }
    }

    #[test]
    fn rejects_invalid_lower_parameters() {
        assert!(lauricella_fa2(&LauricellaArgs::new(1.0, 2, 2, 0.0, 0.5)).is_err());
        assert!(lauricella_fa2(&LauricellaArgs::new(1.0, 61, 2, 0.5, 0.5)).is_err());
    }

    #[test]
    fn dyadic_expansion_is_exact() {
        for x in [1.42207, 0.1, 3.0, 1e-300, 12345.678] {
            let d = Dyadic::from_f64(x);
            let back = d.num.to_f64().unwrap() / 2f64.powi(d.shift as i32);
            if d.shift < 1000 {
                assert_eq!(back, x);
            }
        }
        assert_eq!(Dyadic::from_f64(0.75).add_int(1).halve(), Dyadic { num: BigInt::from(7), shift: 3 });
    }
}
