use num_complex::Complex64;
use proptest::prelude::*;
use ptwigner_core::hamiltonian::{assemble, potential_element_closed, PotentialSpec};
use ptwigner_core::spectrum::{spectrum_at, Classification, PAIR_TOL};
use ptwigner_core::wigner::{wigner_at, wigner_from_coeffs, PhaseGrid};

fn normalized(raw: &[(f64, f64)]) -> Vec<Complex64> {
    let v: Vec<Complex64> = raw.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_is_pt_symmetric(eps in 0.1f64..4.0, x in -20.0f64..20.0) {
        let v = PotentialSpec::new(eps).unwrap();
        let (a, b) = (v.eval(-x), v.eval(x).conj());
        prop_assert!((a - b).norm() <= 1e-15 * a.norm().max(1.0));
    }

    #[test]
    fn potential_elements_follow_parity(eps in 0.3f64..3.5, n in 0usize..40, m in 0usize..40) {
        let v = potential_element_closed(n, m, eps).unwrap();
        let w = potential_element_closed(m, n, eps).unwrap();
        let scale = v.norm().max(1e-300);
        prop_assert!((v - w).norm() <= 1e-13 * scale);
        if (n + m) % 2 == 0 {
            prop_assert!(v.im.abs() <= 1e-15 * scale);
        } else {
            prop_assert!(v.re.abs() <= 1e-15 * scale);
        }
    }

    #[test]
    fn low_fock_superpositions_have_real_unit_mass_wigner(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
        prop_assume!(raw.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
        let c = normalized(&raw);
        let grid = PhaseGrid::square(7.0, 141).unwrap();
        let w = wigner_from_coeffs(&c, Complex64::new(0.0, 0.0), &grid).unwrap();
        prop_assert!(w.imag_residue <= 1e-12);
        prop_assert!((w.integral() - 1.0).abs() <= 1e-9);
        prop_assert!(w.max_abs() <= 1.0 / std::f64::consts::PI + 1e-12);
    }

    #[test]
    fn wigner_value_is_real_pointwise(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..12), x in -6.0f64..6.0, p in -6.0f64..6.0) {
        prop_assume!(raw.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
        let c = normalized(&raw);
        prop_assert!(wigner_at(&c, x, p).im.abs() <= 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_invariants(eps in 1.0f64..3.0, n_max in 20usize..40) {
        let m = assemble(eps, n_max).unwrap();
        let s = spectrum_at(eps, n_max).unwrap();
        let values = s.values();

        // trace is invariant under similarity
        let trace: Complex64 = values.iter().sum();
        prop_assert!((trace - m.entries.trace()).norm() <= 1e-9 * m.entries.frobenius_norm());

        // the lowest levels are closed under conjugation
        for v in values.iter().take(10) {
            let partner = values.iter().map(|u| (u - v.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner <= 1e-8 * v.norm().max(1.0), "{} has no conjugate partner", v);
        }

        // pair labels are mutual and conjugate
        for (i, p) in s.pairs.iter().enumerate() {
            if let Classification::PairMember(k) = p.classification {
                prop_assert_eq!(s.pairs[k].classification, Classification::PairMember(i));
                prop_assert!((p.value - s.pairs[k].value.conj()).norm() <= PAIR_TOL * p.value.norm().max(1.0));
            }
        }

        // phase convention: largest coefficient is real and positive
        for p in s.pairs.iter().take(6) {
            let lead = p.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let first = p.coeffs.iter().find(|c| c.norm() >= lead * (1.0 - 1e-12)).unwrap();
            prop_assert!(first.im == 0.0 && first.re > 0.0);
        }

        // keys are non-decreasing
        let key = |k: usize| match s.pairs[k].classification {
            Classification::PairMember(j) => 0.5 * (s.pairs[k].value.norm() + s.pairs[j].value.norm()),
            _ => s.pairs[k].value.norm(),
        };
        for k in 1..values.len() {
            prop_assert!(key(k) >= key(k - 1));
        }

        // identical inputs reproduce bit for bit
        let again = spectrum_at(eps, n_max).unwrap();
        prop_assert_eq!(again.values(), values);
        prop_assert_eq!(&again.pairs[0].coeffs, &s.pairs[0].coeffs);
    }
}

#[test]
fn grid_nodes_mirror_exactly() {
    for grid in [
        PhaseGrid::default_grid(),
        PhaseGrid::square(13.5, 97).unwrap(),
        PhaseGrid::new(-3.0, 3.0, -7.0, 7.0, 35, 71).unwrap(),
    ] {
        for i in 0..grid.nx {
            assert_eq!(grid.x(i), -grid.x(grid.nx - 1 - i));
        }
        for j in 0..grid.np {
            assert_eq!(grid.p(j), -grid.p(grid.np - 1 - j));
        }
    }
}
