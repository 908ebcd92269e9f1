use difftd::counterexample::build_family;
use difftd::polyalg::{char_poly, hurwitz_determinants_with_scales, RealMatrix};
use difftd::random::random_instance;
use difftd::stability::{
    build_a, eta_star, g_eval, is_positive_stable, lemma_spectrum_check, nonsingularity_check, stability_region,
    zero_eig_derivative, EtaStarOptions, LemmaTolerances, StabilityInstance,
};
use difftd::Tolerances;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random chains; half of them get a log-uniform `d_μ` over three decades,
/// which makes unstable `η` common.
fn instance(max_n: usize) -> impl Strategy<Value = StabilityInstance> {
    (any::<u64>(), 1..=max_n, 0.0f64..0.7, prop::bool::ANY).prop_map(|(seed, n, density, skew)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, density);
        if !skew {
            return inst;
        }
        let d: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-3.0..0.0))).collect();
        let s: f64 = d.iter().sum();
        StabilityInstance::new(d.iter().map(|x| x / s).collect(), inst.p_pi().clone()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn a_eta_is_nonsingular(inst in instance(8), log_t in -3.0f64..2.0) {
        let eta = inst.scale() * 10f64.powf(log_t);
        let rep = nonsingularity_check(&inst, eta, &Tolerances::default()).unwrap();
        prop_assert!(rep.nonsingular, "{rep:?}");
    }

    #[test]
    fn spectrum_of_l(inst in instance(10)) {
        prop_assert!(lemma_spectrum_check(&inst, &LemmaTolerances::default()).is_ok());
    }

    #[test]
    fn resolvent_conjugate_symmetry(inst in instance(8), omega in 1e-3f64..10.0) {
        let z = Complex64::new(0.0, omega);
        let g = g_eval(&inst, z).unwrap();
        let h = g_eval(&inst, z.conj()).unwrap();
        prop_assert!((g - h.conj()).norm() <= 1e-12 * (1.0 + g.norm()));
    }

    #[test]
    fn zero_eigenvalue_moves_right(inst in instance(8)) {
        prop_assert!(zero_eig_derivative(&inst, &Tolerances::default()).unwrap() > 0.0);
    }

    #[test]
    fn stable_below_threshold(inst in instance(6)) {
        let tol = Tolerances::default();
        let r = eta_star(&inst, &EtaStarOptions::default(), &tol).unwrap();
        let top = if r.eta_star.is_finite() { r.eta_star } else { 100.0 * inst.scale() };
        for i in 0..20 {
            let eta = top * 10f64.powf(-4.0 + 4.0 * (i as f64 + 0.5) / 20.0);
            prop_assert!(is_positive_stable(&build_a(&inst, eta).unwrap()).unwrap(), "eta = {eta}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn region_matches_direct_test(inst in instance(6), probes in prop::collection::vec(-3.0f64..2.0, 8)) {
        let tol = Tolerances::default();
        let s = inst.scale();
        let reg = stability_region(&inst, 10.0 * s, &tol).unwrap();
        let mut mids: Vec<f64> = reg.intervals.iter()
            .map(|i| if i.hi.is_finite() { 0.5 * (i.lo + i.hi) } else { 2.0 * i.lo.max(s) })
            .collect();
        mids.extend(probes.iter().map(|p| s * 10f64.powf(*p)));
        if reg.intervals.len() != 1 || reg.intervals[0].hi.is_finite() {
            mids.extend(reg.boundary_roots.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        }
        for eta in mids {
            if reg.boundary_roots.iter().any(|&r| (eta - r).abs() <= 1e-6 * r) {
                continue;
            }
            let direct = is_positive_stable(&build_a(&inst, eta).unwrap()).unwrap();
            prop_assert_eq!(direct, reg.contains(eta), "eta = {}", eta);
        }
    }
}

/// `char_poly(−A/s)` coefficients, as the region solver forms them.
fn scaled_coeffs(inst: &StabilityInstance, eta: f64) -> Vec<f64> {
    let a = build_a(inst, eta).unwrap();
    let s = inst.scale();
    char_poly(&RealMatrix::from_fn(inst.n(), |i, j| -a[(i, j)] / s)).unwrap().coeffs().to_vec()
}

#[test]
fn family_boundaries_are_determinant_roots() {
    for m in [23, 27] {
        let fam = build_family(m).unwrap();
        let inst = fam.instance().unwrap();
        let reg = stability_region(&inst, 10.0 * fam.alpha, &Tolerances::default()).unwrap();
        assert_eq!(reg.boundary_roots.len(), 2, "m={m}");
        for (r, t) in reg.boundary_roots.iter().zip([1.0, 3.0]) {
            assert!((r / fam.alpha - t).abs() < 1e-8, "m={m}: root {r}");
            let (dets, scales) = hurwitz_determinants_with_scales(&scaled_coeffs(&inst, *r));
            let smallest = dets.iter().zip(&scales).map(|(d, s)| d.abs() / s).fold(f64::INFINITY, f64::min);
            assert!(smallest <= 1e-8, "m={m}: min relative |Delta_k| = {smallest:e}");
        }
    }
}

#[test]
fn one_state_region_is_everything() {
    let inst = StabilityInstance::new(vec![1.0], RealMatrix::identity(1)).unwrap();
    let reg = stability_region(&inst, 1.0, &Tolerances::default()).unwrap();
    assert_eq!(reg.intervals.len(), 1);
    assert_eq!((reg.intervals[0].lo, reg.intervals[0].hi), (0.0, f64::INFINITY));
}
