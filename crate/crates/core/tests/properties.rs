use proptest::prelude::*;
use qentropy::entropy::{entropy, expected_entropy, margin};
use qentropy::majorization::{majorizes, MAJORIZATION_TOL};
use qentropy::matcore::{hermitian_spectrum, is_psd, partial_trace, tensor_product, Keep, DEFAULT_TOL};
use qentropy::povm::{apply_povm, is_purity_preserving, PPPOVM_TOL};
use qentropy::processes::{decohere, ensemble_average, luders, observe, response_gram};
use qentropy::sampling::*;
use qentropy::states::{density_from_pure, gram_from_projectors, purity, ProjectorSet};
use qentropy::{ComplexMatrix, DensityMatrix, EntropyFunctional};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn conjugate(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    (&(u * m) * &u.adjoint()).hermitian_part()
}

fn nonsingular_for(f: &EntropyFunctional, rho: &DensityMatrix) -> bool {
    !matches!(f, EntropyFunctional::LogDet) || rho.spectrum().min() >= 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_invariant_under_unitary_conjugation(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        let h = random_hermitian(n, &mut r);
        let u = haar_unitary(n, &mut r);
        let a = hermitian_spectrum(&h, DEFAULT_TOL).unwrap();
        let b = hermitian_spectrum(&conjugate(&u, &h), DEFAULT_TOL).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-9);
    }

    #[test]
    fn spectrum_sums_to_trace(seed in any::<u64>(), n in 1usize..=8) {
        let h = random_hermitian(n, &mut rng(seed));
        let s = hermitian_spectrum(&h, DEFAULT_TOL).unwrap();
        prop_assert!((s.sum() - h.trace().re).abs() <= 1e-10);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), d1 in 1usize..=4, d2 in 1usize..=4) {
        let mut r = rng(seed);
        let a = random_density(d1, &mut r);
        let b = random_density(d2, &mut r);
        let ab = tensor_product(a.matrix(), b.matrix());
        let first = partial_trace(&ab, d1, d2, Keep::First).unwrap();
        let second = partial_trace(&ab, d1, d2, Keep::Second).unwrap();
        prop_assert!(first.max_abs_diff(a.matrix()) <= 1e-12);
        prop_assert!(second.max_abs_diff(b.matrix()) <= 1e-12);
    }

    #[test]
    fn observation_averages_to_decoherence(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let s = random_probing(n, m, &mut r);
        let avg = ensemble_average(&observe(&rho, &s).unwrap()).unwrap();
        let dec = decohere(&rho, &response_gram(&s)).unwrap();
        prop_assert!(avg.matrix().max_abs_diff(dec.matrix()) <= 1e-12);
    }

    #[test]
    fn processes_preserve_trace(seed in any::<u64>(), n in 1usize..=8, d in 1usize..=8) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let e = random_gram(n, d, &mut r);
        let out = decohere(&rho, &e).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-12);
        let ens = observe(&rho, &random_probing(n, d, &mut r)).unwrap();
        prop_assert!((ens.probabilities().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn probing_keeps_pure_states_pure(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let mut r = rng(seed);
        let rho = density_from_pure(&random_pure(n, &mut r));
        let ens = observe(&rho, &random_probing(n, m, &mut r)).unwrap();
        for (_, state) in ens.live() {
            prop_assert!((purity(state) - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn luders_is_block_schur(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let blocks = random_block_sizes(n, &mut r);
        let ps = diagonal_partition(n, &blocks).unwrap();
        let direct = luders(&rho, &ps).unwrap();
        let schur = decohere(&rho, &gram_from_projectors(&ps).unwrap()).unwrap();
        prop_assert!(direct.matrix().max_abs_diff(schur.matrix()) <= 1e-12);
    }

    #[test]
    fn majorization_is_a_preorder(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let e1 = random_gram(n, 2, &mut r);
        let e2 = random_gram(n, 3, &mut r);
        let a = rho.spectrum();
        let mid = decohere(&rho, &e1).unwrap();
        let b = mid.spectrum();
        let c = decohere(&mid, &e2).unwrap().spectrum();
        prop_assert!(majorizes(a.values(), a.values(), MAJORIZATION_TOL));
        prop_assert!(majorizes(a.values(), b.values(), MAJORIZATION_TOL));
        prop_assert!(majorizes(b.values(), c.values(), MAJORIZATION_TOL));
        prop_assert!(majorizes(a.values(), c.values(), MAJORIZATION_TOL));
    }

    #[test]
    fn entropy_invariant_under_unitaries(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let u = haar_unitary(n, &mut r);
        let rotated = DensityMatrix::new(conjugate(&u, rho.matrix())).unwrap();
        for f in EntropyFunctional::builtins() {
            let (a, b) = (entropy(&rho, &f).unwrap(), entropy(&rotated, &f).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{f}: {a} vs {b}");
        }
    }

    #[test]
    fn maximally_mixed_maximizes_entropy(seed in any::<u64>(), n in 1usize..=8) {
        let rho = random_density(n, &mut rng(seed));
        let top = DensityMatrix::maximally_mixed(n);
        for f in EntropyFunctional::builtins() {
            let m = margin(entropy(&rho, &f).unwrap(), entropy(&top, &f).unwrap());
            prop_assert!(m >= -1e-9, "{f}: margin {m}");
        }
    }

    #[test]
    fn mixing_does_not_lower_entropy(seed in any::<u64>(), n in 1usize..=6, k in 2usize..=5) {
        let mut r = rng(seed);
        let w = random_weights(k, &mut r);
        let parts: Vec<_> = w.iter().map(|&p| (p, Some(random_density(n, &mut r)))).collect();
        let ens = qentropy::OutcomeEnsemble::new(parts).unwrap();
        let avg = ensemble_average(&ens).unwrap();
        for f in EntropyFunctional::builtins() {
            let m = margin(expected_entropy(&ens, &f).unwrap(), entropy(&avg, &f).unwrap());
            prop_assert!(m >= -1e-9, "{f}: margin {m}");
        }
    }

    #[test]
    fn s_theorem_sandwich(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        let s = random_probing(n, m, &mut r);
        let ens = observe(&rho, &s).unwrap();
        let dec = decohere(&rho, &response_gram(&s)).unwrap();
        for f in EntropyFunctional::builtins() {
            if !nonsingular_for(&f, &rho) {
                continue;
            }
            let mid = entropy(&rho, &f).unwrap();
            prop_assert!(margin(expected_entropy(&ens, &f).unwrap(), mid) >= -1e-9, "{f} left");
            prop_assert!(margin(mid, entropy(&dec, &f).unwrap()) >= -1e-9, "{f} right");
        }
    }

    #[test]
    fn samplers_produce_valid_objects(seed in any::<u64>(), n in 1usize..=8, d in 1usize..=4) {
        let mut r = rng(seed);
        let rho = random_density(n, &mut r);
        prop_assert!(is_psd(rho.matrix(), 1e-12).unwrap());
        let e = random_gram(n, d, &mut r);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(e.matrix().get(i, j).norm() <= 1.0 + 1e-12);
            }
        }
        let blocks = random_block_sizes(n, &mut r);
        let ps = random_projector_partition(n, &blocks, &mut r).unwrap();
        prop_assert!(ProjectorSet::new(ps.projectors().to_vec()).is_ok());
        let m = random_pppovm(n.min(3), d, &mut r);
        prop_assert!(is_purity_preserving(&m, PPPOVM_TOL));
    }

    #[test]
    fn pppovm_outcomes_stay_pure(seed in any::<u64>(), n in 1usize..=3, d in 1usize..=3) {
        let mut r = rng(seed);
        let m = random_pppovm(n, d, &mut r);
        let rho = density_from_pure(&random_pure(n, &mut r));
        let ens = apply_povm(&rho, &m).unwrap();
        for (_, state) in ens.live() {
            prop_assert!((purity(state) - 1.0).abs() <= 1e-9);
        }
    }
}

/// Purity preservation is "only if": generic measurements whose projectors are
/// not of product form lose purity on almost every pure input.
#[test]
fn generic_povms_are_not_purity_preserving() {
    let trials = 200;
    let mut preserving = 0;
    for t in 0..trials {
        let mut r = SeedStream::new(7).trial(t).rng();
        let m = random_general_povm(2, 2, &mut r);
        assert!(!is_purity_preserving(&m, PPPOVM_TOL));
        let rho = density_from_pure(&random_pure(2, &mut r));
        let ens = apply_povm(&rho, &m).unwrap();
        if ens.live().all(|(_, s)| (purity(s) - 1.0).abs() <= 1e-9) {
            preserving += 1;
        }
    }
    let fraction_broken = 1.0 - preserving as f64 / trials as f64;
    assert!(fraction_broken >= 1.0 - 1e-6, "{preserving} of {trials} stayed pure");
}
