//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7/15),
//! composite Simpson weights and Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::summation::ComplexNeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights belong to XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 0.0, max_intervals: 2000 }
    }
}

impl QuadConfig {
    pub fn absolute(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod_panel<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut values = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    for (j, &node) in XGK[..7].iter().enumerate() {
        let dx = half * node;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for (j, (f1, f2)) in values.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let diff = ((kronrod - gauss) * half).norm();
    let resasc = resasc * half.abs();
    let mut error = diff;
    if resasc != 0.0 && diff != 0.0 {
        error = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
    }
    let value = kronrod * half;
    let floor = 50.0 * f64::EPSILON * value.norm();
    Panel { a, b, value, error: error.max(floor) }
}

/// Globally adaptive Gauss–Kronrod integration of a complex integrand on
/// `[a, b]`. Panels are bisected in order of decreasing error estimate until
/// the summed estimate meets `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, intervals: 0 });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod_panel(&mut f, a, b);
    // running sums drive the stopping test; the reported value is re-summed
    // in sorted order so it does not depend on the heap layout
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if error <= target || heap.len() >= cfg.max_intervals {
            let (v, e) = totals(&heap);
            let target = cfg.abs_tol.max(cfg.rel_tol * v.norm());
            if e <= target {
                return Ok(QuadResult { value: v, error: e, intervals: heap.len() });
            }
            if heap.len() >= cfg.max_intervals {
                return Err(Error::no_convergence(
                    "adaptive Gauss-Kronrod",
                    format!(
                        "error estimate {e:.3e} above target {target:.3e} after {} panels on [{a}, {b}]",
                        heap.len()
                    ),
                ));
            }
            value = v;
            error = e;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // panel cannot be split any further in floating point
            error -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let left = kronrod_panel(&mut f, worst.a, mid);
        let right = kronrod_panel(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64) {
    // sorted traversal keeps the result independent of heap layout
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut acc = ComplexNeumaierSum::new();
    let mut err = 0.0;
    for p in panels {
        acc.add(p.value);
        err += p.error;
    }
    (acc.value(), err)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, cfg).map(|r| r.value.re)
}

/// Integrates over consecutive breakpoints, summing the pieces. Breakpoints
/// must be sorted ascending.
pub fn integrate_pieces<F>(mut f: F, breakpoints: &[f64], cfg: QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Complex64,
{
    let mut acc = ComplexNeumaierSum::new();
    let mut error = 0.0;
    let mut intervals = 0;
    let pieces = breakpoints.len().saturating_sub(1).max(1) as f64;
    let piece_cfg = QuadConfig { abs_tol: cfg.abs_tol / pieces, ..cfg };
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate(&mut f, w[0], w[1], piece_cfg)?;
        acc.add(r.value);
        error += r.error;
        intervals += r.intervals;
    }
    Ok(QuadResult { value: acc.value(), error, intervals })
}

struct VecPanel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

impl PartialEq for VecPanel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for VecPanel {}
impl PartialOrd for VecPanel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for VecPanel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod_vec_panel<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Vec<Complex64>; 15]) -> VecPanel
where
    F: FnMut(f64, &mut [Complex64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    f(center, &mut buf[14]);
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, &mut buf[2 * j]);
        f(center + dx, &mut buf[2 * j + 1]);
    }
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut error: f64 = 0.0;
    for (c, out) in value.iter_mut().enumerate() {
        let fc = buf[14][c];
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        for j in 0..7 {
            let pair = buf[2 * j][c] + buf[2 * j + 1][c];
            kronrod += pair * WGK[j];
            if j % 2 == 1 {
                gauss += pair * WG[j / 2];
            }
        }
        let mean = kronrod * 0.5;
        let mut resasc = WGK[7] * (fc - mean).norm();
        for j in 0..7 {
            resasc += WGK[j] * ((buf[2 * j][c] - mean).norm() + (buf[2 * j + 1][c] - mean).norm());
        }
        let diff = ((kronrod - gauss) * half).norm();
        let resasc = resasc * half.abs();
        let mut e = diff;
        if resasc != 0.0 && diff != 0.0 {
            e = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
        }
        *out = kronrod * half;
        error = error.max(e.max(50.0 * f64::EPSILON * out.norm()));
    }
    VecPanel { a, b, value, error }
}

/// Adaptive Gauss–Kronrod for a vector-valued integrand `f(x, out)` with
/// `out.len() == dim`, over consecutive sorted breakpoints. A panel's error
/// is the largest component error; refinement stops when the panel errors
/// sum to at most `cfg.abs_tol`.
pub fn integrate_vec<F>(mut f: F, breakpoints: &[f64], dim: usize, cfg: QuadConfig) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &mut [Complex64]),
{
    if breakpoints.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidInput("integration breakpoints must be finite".into()));
    }
    let mut buf: [Vec<Complex64>; 15] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); dim]);
    let mut heap = BinaryHeap::new();
    let mut error = 0.0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let panel = kronrod_vec_panel(&mut f, w[0], w[1], dim, &mut buf);
            error += panel.error;
            heap.push(panel);
        }
    }
    while error > cfg.abs_tol {
        if heap.len() >= cfg.max_intervals {
            let exact: f64 = heap.iter().map(|p| p.error).sum();
            if exact <= cfg.abs_tol {
                break;
            }
            return Err(Error::no_convergence(
                "vector Gauss-Kronrod",
                format!("error estimate {exact:.3e} above {:.3e} after {} panels", cfg.abs_tol, heap.len()),
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            error -= worst.error;
            heap.push(VecPanel { error: 0.0, ..worst });
            continue;
        }
        let left = kronrod_vec_panel(&mut f, worst.a, mid, dim, &mut buf);
        let right = kronrod_vec_panel(&mut f, mid, worst.b, dim, &mut buf);
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut panels: Vec<VecPanel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut acc: Vec<ComplexNeumaierSum> = (0..dim).map(|_| ComplexNeumaierSum::new()).collect();
    for p in &panels {
        for (s, v) in acc.iter_mut().zip(&p.value) {
            s.add(*v);
        }
    }
    Ok(acc.iter().map(|s| s.value()).collect())
}

/// Composite Simpson weights for `n` equally spaced nodes with spacing `h`.
/// `n` must be odd and at least 3.
pub fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("Simpson rule needs an odd node count >= 3, got {n}")));
    }
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == n - 1 {
            h / 3.0
        } else if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    Ok(w)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` via Newton iteration on
/// the Legendre three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let r = integrate_real(|x| x * x, 0.0, 3.0, QuadConfig::default()).unwrap();
        assert!((r - 9.0).abs() < 1e-13);
        let g = integrate_real(|x| (-x * x).exp(), -12.0, 12.0, QuadConfig::absolute(1e-13)).unwrap();
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn vector_integrand_matches_scalar_components() {
        // ∫ e^{-x²} cos(kx) dx = √π e^{-k²/4}
        let ks = [0.0, 0.5, 1.0, 3.0];
        let v = integrate_vec(
            |x, out: &mut [Complex64]| {
                for (o, k) in out.iter_mut().zip(ks) {
                    *o = Complex64::new(0.0, k * x).exp() * (-x * x).exp();
                }
            },
            &[-10.0, -1.0, 0.0, 10.0],
            ks.len(),
            QuadConfig::absolute(1e-13),
        )
        .unwrap();
        for (r, k) in v.iter().zip(ks) {
            let exact = std::f64::consts::PI.sqrt() * (-k * k / 4.0).exp();
            assert!((r.re - exact).abs() < 1e-12 && r.im.abs() < 1e-13, "k={k}: {r}");
        }
    }

    #[test]
    fn handles_algebraic_endpoint_singularity() {
        // integral of x^-0.5 over [0, 1] is 2
        let r = integrate_real(|x| x.powf(-0.5), 0.0, 1.0, QuadConfig::absolute(1e-10)).unwrap();
        assert!((r - 2.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 0.0, max_intervals: 4 };
        let err = integrate_real(|x| (50.0 * x).sin() / x.sqrt(), 1e-30, 10.0, cfg).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn simpson_rejects_even_counts() {
        assert!(simpson_weights(4, 0.1).is_err());
        let w = simpson_weights(5, 0.5).unwrap();
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }
}
