use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Γ(z)|`. Poles at the non-positive integers are a domain error.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain("log_gamma", format!("non-finite argument {z}")));
    }
    if z <= 0.0 && z == z.floor() {
        return Err(Error::domain("log_gamma", format!("pole of Gamma at {z}")));
    }
    if z < 0.5 {
        // reflection: Γ(z) Γ(1 - z) = π / sin(πz)
        let s = (PI * z).sin().abs();
        return Ok(PI.ln() - s.ln() - lanczos_ln(1.0 - z));
    }
    Ok(lanczos_ln(z))
}

fn lanczos_ln(z: f64) -> f64 {
    let z = z - 1.0;
    let mut series = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `Γ(z)` for arguments where it is representable.
pub fn gamma(z: f64) -> Result<f64> {
    let ln = log_gamma(z)?;
    let sign = if z > 0.0 || (z.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln.exp())
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`, exactly 1 for `k = 0`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// `k!!` for `k >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(k: i64) -> Result<f64> {
    if k < -1 {
        return Err(Error::domain("double_factorial", format!("argument {k} < -1")));
    }
    let mut acc = 1.0;
    let mut j = k;
    while j > 1 {
        acc *= j as f64;
        j -= 2;
    }
    Ok(acc)
}

/// `ln n!`, accurate to a few ulps for every `n` (exact product below 171).
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 170 {
        let f = (2..=n).fold(1.0f64, |acc, k| acc * k as f64);
        f.ln()
    } else {
        lanczos_ln(n as f64 + 1.0)
    }
}
