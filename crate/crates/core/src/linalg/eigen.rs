//! Complex Schur decomposition by Householder reduction to upper Hessenberg
//! form followed by single-shift QR sweeps (Wilkinson shifts, Givens bulge
//! chasing), and eigenvectors by back-substitution on the triangular factor.

use num_complex::Complex64;

use super::{norm2, CMatrix};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ITERATIONS_PER_EIGENVALUE: usize = 60;

/// `A = Z T Zᴴ` with `T` upper triangular and `Z` unitary.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub t: CMatrix,
    pub z: CMatrix,
}

/// Unsorted eigenvalues and unit-norm right eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
}

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = CMatrix::identity(n);
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let alpha = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let len = n - k - 1;
        for (idx, i) in (k + 1..n).enumerate() {
            v[idx] = h[(i, k)];
        }
        v[0] += phase * alpha;
        let vnorm2: f64 = v[..len].iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // left: H <- (I - tau v vᴴ) H on rows k+1..n
        for j in k..n {
            let mut w = ZERO;
            for (idx, i) in (k + 1..n).enumerate() {
                w += v[idx].conj() * h[(i, j)];
            }
            let w = w * tau;
            for (idx, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= v[idx] * w;
            }
        }
        // right: H <- H (I - tau v vᴴ), Z <- Z (I - tau v vᴴ)
        for m in [&mut h, &mut z] {
            for i in 0..n {
                let mut w = ZERO;
                for (idx, j) in (k + 1..n).enumerate() {
                    w += m[(i, j)] * v[idx];
                }
                let w = w * tau;
                for (idx, j) in (k + 1..n).enumerate() {
                    m[(i, j)] -= w * v[idx].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, z)
}

/// Unitary `G = [[c, s], [-s̄, c]]` with `G [x; y] = [r; 0]`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, (y.conj()) / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    if bc == ZERO {
        return d;
    }
    let disc = (p * p + bc).sqrt();
    let denom = if (p + disc).norm() >= (p - disc).norm() { p + disc } else { p - disc };
    if denom == ZERO {
        d
    } else {
        d - bc / denom
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur(a: &CMatrix) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("matrix is {}x{}, not square", a.rows(), a.cols())));
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a);
    if n < 2 {
        return Ok(SchurForm { t: h, z });
    }
    let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut its = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == 0.0 {
                s = norm;
            }
            if abs1(h[(l, l - 1)]) <= f64::EPSILON * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        if its >= ITERATIONS_PER_EIGENVALUE {
            return Err(Error::no_convergence(
                "complex QR iteration",
                format!("eigenvalue {hi} of {n} not deflated after {its} sweeps"),
            ));
        }
        let mu = if its > 0 && its.is_multiple_of(10) {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs() + Complex64::new(0.0, 0.5 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        its += 1;

        for k in l..hi {
            let (x, y) = if k == l { (h[(l, l)] - mu, h[(l + 1, l)]) } else { (h[(k, k - 1)], h[(k + 1, k - 1)]) };
            let (c, s) = givens(x, y);
            let start = if k == l { l } else { k - 1 };
            for j in start..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(SchurForm { t: h, z })
}

/// All eigenvalues and unit-norm right eigenvectors of a square matrix.
pub fn eigen_decompose(a: &CMatrix) -> Result<EigenDecomposition> {
    let SchurForm { t, z } = schur(a)?;
    let n = t.rows();
    let tnorm = t.frobenius_norm();
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut y = vec![ZERO; n];
    for k in 0..n {
        let lambda = t[(k, k)];
        y.iter_mut().for_each(|c| *c = ZERO);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for i in j + 1..=k {
                s += t[(j, i)] * y[i];
            }
            let mut d = t[(j, j)] - lambda;
            if abs1(d) < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[j] = -s / d;
            if y[j].norm() > 1e100 {
                for c in y[..=k].iter_mut() {
                    *c *= 1e-100;
                }
            }
        }
        let mut v = vec![ZERO; n];
        for (i, vi) in v.iter_mut().enumerate() {
            let mut acc = ZERO;
            for j in 0..=k {
                acc += z[(i, j)] * y[j];
            }
            *vi = acc;
        }
        let nv = norm2(&v);
        v.iter_mut().for_each(|c| *c /= nv);
        values.push(lambda);
        vectors.push(v);
    }
    Ok(EigenDecomposition { values, vectors })
}
