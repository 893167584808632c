//! Eigenpairs of the truncated Hamiltonian, their classification into real
//! levels and complex-conjugate pairs, branch tracking along `ε` sweeps and
//! exceptional-point bisection.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, HamiltonianMatrix};
use crate::linalg::{eigen_decompose, norm2, CMatrix};

pub const DEFAULT_TOL_REAL: f64 = 1e-8;
pub const PAIR_TOL: f64 = 1e-6;
pub const RESIDUAL_BOUND: f64 = 1e-10;
pub const BRANCH_BREAK_DISTANCE: f64 = 0.5;
pub const DRIFT_FLAG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Real,
    /// Index of the conjugate partner within the same spectrum.
    PairMember(usize),
    Unclassified,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Real => "real",
            Classification::PairMember(_) => "pair",
            Classification::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit-norm Fock coefficients, phase fixed so the largest one is real
    /// and positive.
    pub coeffs: Vec<Complex64>,
    pub classification: Classification,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub epsilon: f64,
    pub n_max: usize,
    /// Levels in ascending `|E|`, then ascending imaginary part, then real
    /// part. Ranking by
    /// modulus keeps far-off-axis truncation artifacts with small real
    /// parts from displacing the physical low-lying levels.
    pub pairs: Vec<EigenPair>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn count_real(&self, lowest: usize) -> usize {
        self.pairs.iter().take(lowest).filter(|p| p.classification == Classification::Real).count()
    }
}

fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let lead = v.iter().position(|c| c.norm() >= max * (1.0 - 1e-12)).expect("maximum exists");
    let phase = v[lead].conj() / v[lead].norm();
    v.iter_mut().for_each(|c| *c *= phase);
    v[lead] = Complex64::new(v[lead].re, 0.0);
}

fn residual(m: &CMatrix, value: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.mul_vec(v);
    norm2(&mv.iter().zip(v).map(|(a, b)| a - value * b).collect::<Vec<_>>())
}

/// Eigenpairs of an arbitrary square matrix, classified with
/// [`DEFAULT_TOL_REAL`] and sorted.
pub fn spectrum_of(entries: &CMatrix, epsilon: f64) -> Result<Spectrum> {
    let eig = eigen_decompose(entries)?;
    let bound = RESIDUAL_BOUND * entries.frobenius_norm();
    let mut pairs = Vec::with_capacity(eig.values.len());
    for (value, mut coeffs) in eig.values.into_iter().zip(eig.vectors) {
        fix_phase(&mut coeffs);
        let r = residual(entries, value, &coeffs);
        if !(r <= bound) {
            return Err(Error::no_convergence(
                "eigendecomposition",
                format!("residual {r:.3e} above {bound:.3e} for eigenvalue {value}"),
            ));
        }
        pairs.push(EigenPair { value, coeffs, classification: Classification::Unclassified });
    }
    Ok(classify(Spectrum { epsilon, n_max: entries.rows(), pairs }, DEFAULT_TOL_REAL))
}

/// All eigenpairs of the assembled Hamiltonian.
pub fn eigendecompose(matrix: &HamiltonianMatrix) -> Result<Spectrum> {
    spectrum_of(&matrix.entries, matrix.epsilon)
}

fn is_real(value: Complex64, tol_real: f64) -> bool {
    value.im.abs() <= tol_real * value.norm().max(1.0)
}

/// Marks real values, pairs the rest greedily with their best conjugate
/// match, and re-sorts. Pair members share the pair's mean modulus as
/// their sort key so partners stay adjacent with negative imaginary part
/// first.
pub fn classify(spectrum: Spectrum, tol_real: f64) -> Spectrum {
    let Spectrum { epsilon, n_max, pairs } = spectrum;
    let n = pairs.len();
    let values: Vec<Complex64> = pairs.iter().map(|p| p.value).collect();
    let mut class = vec![Classification::Unclassified; n];
    for (i, v) in values.iter().enumerate() {
        if is_real(*v, tol_real) {
            class[i] = Classification::Real;
        }
    }
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if class[i] != Classification::Unclassified || class[j] != Classification::Unclassified {
                continue;
            }
            let d = (values[i] - values[j].conj()).norm();
            if d <= PAIR_TOL * values[i].norm().max(1.0) {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for (_, i, j) in candidates {
        if partner[i].is_none() && partner[j].is_none() {
            partner[i] = Some(j);
            partner[j] = Some(i);
        }
    }
    let key: Vec<f64> = (0..n)
        .map(|i| match partner[i] {
            Some(j) => 0.5 * (values[i].norm() + values[j].norm()),
            None => values[i].norm(),
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        key[a]
            .total_cmp(&key[b])
            .then(values[a].im.total_cmp(&values[b].im))
            .then(values[a].re.total_cmp(&values[b].re))
            .then(a.cmp(&b))
    });
    let mut position = vec![0; n];
    for (pos, &old) in order.iter().enumerate() {
        position[old] = pos;
    }
    let mut old_pairs: Vec<Option<EigenPair>> = pairs.into_iter().map(Some).collect();
    let sorted = order
        .iter()
        .map(|&old| {
            let mut p = old_pairs[old].take().expect("each index used once");
            p.classification = match partner[old] {
                Some(j) => Classification::PairMember(position[j]),
                None => class[old],
            };
            p
        })
        .collect();
    Spectrum { epsilon, n_max, pairs: sorted }
}

/// Level correspondence between consecutive spectra of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchAssignment {
    /// `previous_of[i]` is the level of the previous spectrum matched to
    /// level `i` of the current one.
    pub previous_of: Vec<Option<usize>>,
    /// Current levels whose match is farther than [`BRANCH_BREAK_DISTANCE`]
    /// or that found no partner.
    pub breaks: Vec<usize>,
}

/// Greedy minimal-distance matching of eigenvalues in the complex plane.
pub fn track_branches(previous: &Spectrum, current: &Spectrum) -> Result<BranchAssignment> {
    if previous.n_max != current.n_max {
        return Err(Error::Precondition(format!(
            "spectra have different basis sizes {} and {}",
            previous.n_max, current.n_max
        )));
    }
    let (a, b) = (previous.values(), current.values());
    let mut edges = Vec::with_capacity(a.len() * b.len());
    for (i, vb) in b.iter().enumerate() {
        for (j, va) in a.iter().enumerate() {
            edges.push(((vb - va).norm(), i, j));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut previous_of = vec![None; b.len()];
    let mut taken = vec![false; a.len()];
    let mut distance = vec![f64::INFINITY; b.len()];
    for (d, i, j) in edges {
        if previous_of[i].is_none() && !taken[j] {
            previous_of[i] = Some(j);
            taken[j] = true;
            distance[i] = d;
        }
    }
    let breaks = (0..b.len()).filter(|&i| !(distance[i] <= BRANCH_BREAK_DISTANCE)).collect();
    Ok(BranchAssignment { previous_of, breaks })
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub spectrum: Spectrum,
    /// Branch identifier per level; a break starts a new branch.
    pub branch_ids: Vec<usize>,
    pub breaks: Vec<usize>,
}

fn validate_eps_list(eps_values: &[f64]) -> Result<()> {
    if eps_values.is_empty() {
        return Err(Error::InvalidInput("empty epsilon list".into()));
    }
    if eps_values.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidInput("epsilon values must be positive and finite".into()));
    }
    if eps_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("epsilon values must be strictly ascending".into()));
    }
    Ok(())
}

/// Spectrum at `eps` with basis size `n_max`, tagging failures with `ε`.
pub fn spectrum_at(eps: f64, n_max: usize) -> Result<Spectrum> {
    let tag = |e: Error| match e {
        Error::NoConvergence { what, detail } => {
            Error::NoConvergence { what, detail: format!("{detail} (epsilon = {eps})") }
        }
        other => other,
    };
    assemble(eps, n_max).and_then(|m| eigendecompose(&m)).map_err(tag)
}

/// Spectra along an ascending `ε` list with branch identities carried
/// over from each point to the next.
pub fn sweep(eps_values: &[f64], n_max: usize) -> Result<Vec<SweepRecord>> {
    validate_eps_list(eps_values)?;
    let spectra: Vec<Spectrum> = eps_values.par_iter().map(|&e| spectrum_at(e, n_max)).collect::<Result<_>>()?;
    link_branches(spectra)
}

/// Branch identities for already computed spectra, in the given order.
/// All spectra must share one basis size.
pub fn link_branches(spectra: Vec<Spectrum>) -> Result<Vec<SweepRecord>> {
    let n_max = match spectra.first() {
        Some(s) => s.n_max,
        None => return Ok(Vec::new()),
    };
    let mut records: Vec<SweepRecord> = Vec::with_capacity(spectra.len());
    let mut next_id = n_max;
    for spectrum in spectra {
        let (branch_ids, breaks) = match records.last() {
            None => ((0..n_max).collect(), Vec::new()),
            Some(prev) => {
                let assignment = track_branches(&prev.spectrum, &spectrum)?;
                let ids = (0..n_max)
                    .map(|i| match assignment.previous_of[i] {
                        Some(j) if !assignment.breaks.contains(&i) => prev.branch_ids[j],
                        _ => {
                            next_id += 1;
                            next_id - 1
                        }
                    })
                    .collect();
                (ids, assignment.breaks)
            }
        };
        records.push(SweepRecord { epsilon: spectrum.epsilon, spectrum, branch_ids, breaks });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpResult {
    pub eps_ep: f64,
    pub bracket: (f64, f64),
    pub branch_pair: (usize, usize),
    pub n_max: usize,
    pub bisection_steps: usize,
}

fn pair_is_complex(spectrum: &Spectrum, (a, b): (usize, usize)) -> Result<bool> {
    let get =
        |k: usize| {
            spectrum.pairs.get(k).map(|p| p.value).ok_or_else(|| {
                Error::InvalidInput(format!("level {k} outside spectrum of size {}", spectrum.pairs.len()))
            })
        };
    let (ea, eb) = (get(a)?, get(b)?);
    let threshold = 10.0 * DEFAULT_TOL_REAL;
    Ok(!is_real(ea, threshold) && !is_real(eb, threshold))
}

fn describe(spectrum: &Spectrum, (a, b): (usize, usize)) -> String {
    let show = |k: usize| {
        let p = &spectrum.pairs[k];
        format!("E_{k} = {} ({})", p.value, p.classification.label())
    };
    format!("at epsilon = {}: {}, {}", spectrum.epsilon, show(a), show(b))
}

/// Bisects on "both levels of `branch_pair` have non-negligible imaginary
/// parts" until the bracket is narrower than `tol`.
pub fn find_ep(branch_pair: (usize, usize), bracket: (f64, f64), n_max: usize, tol: f64) -> Result<EpResult> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!("bracket ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    if !(tol >= 1e-7) {
        return Err(Error::InvalidInput(format!("tolerance {tol} below 1e-7")));
    }
    let s_lo = spectrum_at(lo, n_max)?;
    let s_hi = spectrum_at(hi, n_max)?;
    let (c_lo, c_hi) = (pair_is_complex(&s_lo, branch_pair)?, pair_is_complex(&s_hi, branch_pair)?);
    if !c_lo || c_hi {
        return Err(Error::Precondition(format!(
            "bracket must have a conjugate pair at its lower end and real levels at its upper end; {}; {}",
            describe(&s_lo, branch_pair),
            describe(&s_hi, branch_pair)
        )));
    }
    let mut steps = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pair_is_complex(&spectrum_at(mid, n_max)?, branch_pair)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(EpResult { eps_ep: 0.5 * (lo + hi), bracket: (lo, hi), branch_pair, n_max, bisection_steps: steps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub level: usize,
    pub n_max: usize,
    pub value: (f64, f64),
    /// `|E(n_max) - E(largest n_max)|`.
    pub drift: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub epsilon: f64,
    pub n_max_list: Vec<usize>,
    pub rows: Vec<DriftRow>,
}

/// Drift of the lowest six levels with basis size, relative to the last
/// entry of `n_max_list`.
pub fn convergence_check(eps: f64, n_max_list: &[usize]) -> Result<ConvergenceReport> {
    const LEVELS: usize = 6;
    if n_max_list.is_empty() || n_max_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("n_max list must be non-empty and strictly ascending".into()));
    }
    let spectra: Vec<Spectrum> = n_max_list.par_iter().map(|&n| spectrum_at(eps, n)).collect::<Result<_>>()?;
    let reference = spectra.last().expect("non-empty").values();
    let mut rows = Vec::new();
    for level in 0..LEVELS.min(n_max_list[0]) {
        for (s, &n) in spectra.iter().zip(n_max_list) {
            let v = s.pairs[level].value;
            let drift = (v - reference[level]).norm();
            rows.push(DriftRow { level, n_max: n, value: (v.re, v.im), drift, flagged: drift > DRIFT_FLAG });
        }
    }
    Ok(ConvergenceReport { epsilon: eps, n_max_list: n_max_list.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn synthetic(values: &[Complex64]) -> Spectrum {
        let pairs = values
            .iter()
            .map(|&value| EigenPair { value, coeffs: vec![], classification: Classification::Unclassified })
            .collect();
        Spectrum { epsilon: 1.0, n_max: values.len(), pairs }
    }

    #[test]
    fn two_by_two_conjugate_pair() {
        let m = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]);
        let s = spectrum_of(&m, 0.0).unwrap();
        assert!((s.pairs[0].value - c(0.0, -1.0)).norm() < 1e-14);
        assert!((s.pairs[1].value - c(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(s.pairs[0].classification, Classification::PairMember(1));
        assert_eq!(s.pairs[1].classification, Classification::PairMember(0));
    }

    #[test]
    fn tolerance_classification() {
        let s = classify(synthetic(&[c(2.0, 3e-9), c(1.0, 0.0)]), 1e-8);
        assert!(s.pairs.iter().all(|p| p.classification == Classification::Real));
        assert_eq!(s.pairs[0].value, c(1.0, 0.0));
        let s = classify(synthetic(&[c(4.0, 0.5), c(3.0, 0.0), c(4.0, -0.5), c(9.0, 2.0)]), 1e-8);
        let labels: Vec<_> = s.pairs.iter().map(|p| p.classification).collect();
        assert_eq!(
            labels,
            vec![
                Classification::Real,
                Classification::PairMember(2),
                Classification::PairMember(1),
                Classification::Unclassified
            ]
        );
    }

    #[test]
    fn oscillator_spectrum() {
        let s = spectrum_at(2.0, 31).unwrap();
        for (k, p) in s.pairs.iter().enumerate() {
            assert!((p.value - c(k as f64 + 0.5, 0.0)).norm() < 1e-10);
            assert_eq!(p.classification, Classification::Real);
            assert!((norm2(&p.coeffs) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn branch_tracking_identity_and_shift() {
        let s = synthetic(&[c(0.5, 0.0), c(1.5, 0.2), c(1.5, -0.2), c(3.0, 0.0)]);
        let a = track_branches(&s, &s).unwrap();
        assert_eq!(a.previous_of, vec![Some(0), Some(1), Some(2), Some(3)]);
        assert!(a.breaks.is_empty());
        let shifted = synthetic(&s.values().iter().map(|v| v + 1e-3).collect::<Vec<_>>());
        assert_eq!(track_branches(&s, &shifted).unwrap().previous_of, a.previous_of);
        let far = synthetic(&[c(0.5, 0.0), c(1.5, 0.2), c(1.5, -0.2), c(9.0, 0.0)]);
        assert_eq!(track_branches(&s, &far).unwrap().breaks, vec![3]);
    }

    #[test]
    fn invalid_bracket_is_rejected() {
        let err = find_ep((1, 2), (1.43, 1.45), 31, 1e-5).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn sweep_rejects_bad_lists() {
        assert!(sweep(&[], 31).is_err());
        assert!(sweep(&[1.0, 1.0], 31).is_err());
        assert!(sweep(&[-1.0], 31).is_err());
    }

    #[test]
    fn oscillator_has_no_drift() {
        let r = convergence_check(2.0, &[31, 51]).unwrap();
        assert!(r.rows.iter().all(|row| row.drift < 1e-12 && !row.flagged));
    }
}
