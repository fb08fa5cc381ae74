use nalgebra::DMatrix;
use proptest::prelude::*;
use rankmod::dense::rel_diff;
use rankmod::determinant::compare_determinants;
use rankmod::direct_path::{structured_inverse_direct, structured_inverse_general};
use rankmod::identities::{check_corollary, check_penrose};
use rankmod::instances::{
    dense_inverse_oracle, gaussian_matrix, generate, random_ansatz, random_unitary, rng_from_seed, GeneratorSpec,
};
use rankmod::scalar::mul;
use rankmod::svd_path::{g_from_pseudoinverse, structured_inverse_from_svd, structured_inverse_svd};
use rankmod::{validate, Complex64, Error, Field, IdentityTolerance, RankModifiedProblem, Scalar, StructuredInverse};

fn spec_strategy() -> impl Strategy<Value = GeneratorSpec> {
    (3usize..16, any::<u64>(), prop::bool::ANY, 1.0f64..100.0, 0.0f64..0.9)
        .prop_flat_map(|(n, seed, complex, spread, coupling)| {
            (1..n.min(5)).prop_map(move |k| {
                GeneratorSpec::new(n, k, seed)
                    .with_field(if complex { Field::Complex } else { Field::Real })
                    .with_spread(spread)
                    .with_coupling(coupling)
            })
        })
}

fn max_rel<T: Scalar>(a: &StructuredInverse<T>, b: &StructuredInverse<T>) -> f64 {
    rel_diff(a.g(), b.g()).max(rel_diff(a.x(), b.x())).max(rel_diff(a.y(), b.y()))
}

fn both_fields(spec: &GeneratorSpec, real: impl Fn(RankModifiedProblem<f64>), complex: impl Fn(RankModifiedProblem<Complex64>)) {
    match spec.field {
        Field::Real => real(generate(spec).unwrap()),
        Field::Complex => complex(generate(spec).unwrap()),
    }
}

fn core_swap_leaves_parts_unchanged<T: Scalar>(p: RankModifiedProblem<T>, seed: u64) {
    let svd_base = structured_inverse_svd(&p).unwrap();
    let direct_base = structured_inverse_direct(&p).unwrap();
    let mut rng = rng_from_seed(seed);
    let swapped = p.with_core(gaussian_matrix::<T>(&mut rng, p.k(), p.k())).unwrap();
    assert!(max_rel(&structured_inverse_svd(&swapped).unwrap(), &svd_base) <= 1e-14);
    assert!(max_rel(&structured_inverse_direct(&swapped).unwrap(), &direct_base) <= 1e-14);

    let fast = svd_base.reassemble_inverse(swapped.d()).unwrap();
    let oracle = dense_inverse_oracle(&swapped).unwrap();
    let kappa = rankmod::dense::cond2(&swapped.assemble());
    assert!(rel_diff(&fast, &oracle) <= 1e-12 * kappa.max(1.0), "kappa {kappa}");
}

fn apply_matches_reassemble<T: Scalar>(p: RankModifiedProblem<T>, seed: u64) {
    let inv = structured_inverse_svd(&p).unwrap();
    let b = gaussian_matrix::<T>(&mut rng_from_seed(seed), p.n(), 3);
    let applied = inv.apply_inverse(p.d(), &b).unwrap();
    let dense = mul(&inv.reassemble_inverse(p.d()).unwrap(), &b);
    assert!(rel_diff(&applied, &dense) <= 1e-12);
}

fn identities_hold<T: Scalar>(p: RankModifiedProblem<T>) {
    let tol = IdentityTolerance::default();
    for inv in [structured_inverse_svd(&p).unwrap(), structured_inverse_direct(&p).unwrap()] {
        let report = check_corollary(&p, &inv, &tol).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert!(check_penrose(p.a(), inv.g(), &tol).unwrap().reflexive());
    }
}

fn paths_agree<T: Scalar>(p: RankModifiedProblem<T>, seed: u64) {
    let svd = structured_inverse_svd(&p).unwrap();
    let direct = structured_inverse_direct(&p).unwrap();
    let params = random_ansatz(&p, &mut rng_from_seed(seed)).unwrap();
    let general = structured_inverse_general(&p, &params).unwrap();
    let via_pinv = g_from_pseudoinverse(p.svd(), p.e(), p.f()).unwrap();
    assert!(max_rel(&direct, &svd) <= 1e-10);
    assert!(max_rel(&general, &svd) <= 1e-10);
    assert!(rel_diff(&via_pinv, svd.g()) <= 1e-10);
}

fn null_bases_are_arbitrary<T: Scalar>(p: RankModifiedProblem<T>, seed: u64) {
    let mut rng = rng_from_seed(seed);
    let q = random_unitary::<T>(&mut rng, p.k());
    let r = random_unitary::<T>(&mut rng, p.k());
    let rotated = p.svd().with_rotated_null_bases(&q, &r);
    let a = structured_inverse_from_svd(&rotated, p.e(), p.f()).unwrap();
    let b = structured_inverse_svd(&p).unwrap();
    assert!(max_rel(&a, &b) <= 1e-13);
}

fn determinant_sides_agree<T: Scalar>(p: RankModifiedProblem<T>) {
    let inv = structured_inverse_svd(&p).unwrap();
    let (cmp, _) = compare_determinants(&p, &inv).unwrap();
    assert!(cmp.relative_gap <= 1e-10, "{cmp:?}");
    assert!(cmp.reciprocal_gap <= 1e-10, "{cmp:?}");
}

fn e_inside_range_is_rejected<T: Scalar>(p: RankModifiedProblem<T>, seed: u64) {
    let coeffs = gaussian_matrix::<T>(&mut rng_from_seed(seed), p.n(), p.k());
    let e = mul(p.a(), &coeffs);
    let err = validate(p.a().clone(), e, p.d().clone(), p.f().clone(), 1e-10).unwrap_err();
    assert!(matches!(err, Error::SpanDeficientE { .. }), "{err:?}");
    let f = mul(&p.a().adjoint(), &coeffs);
    let err = validate(p.a().clone(), p.e().clone(), p.d().clone(), f, 1e-10).unwrap_err();
    assert!(matches!(err, Error::SpanDeficientF { .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn structured_parts_do_not_depend_on_core(spec in spec_strategy(), seed in any::<u64>()) {
        both_fields(&spec, |p| core_swap_leaves_parts_unchanged(p, seed), |p| core_swap_leaves_parts_unchanged(p, seed));
    }

    #[test]
    fn applying_equals_multiplying_by_reassembled(spec in spec_strategy(), seed in any::<u64>()) {
        both_fields(&spec, |p| apply_matches_reassemble(p, seed), |p| apply_matches_reassemble(p, seed));
    }

    #[test]
    fn corollary_and_reflexive_conditions(spec in spec_strategy()) {
        both_fields(&spec, identities_hold, identities_hold);
    }

    #[test]
    fn construction_paths_agree(spec in spec_strategy(), seed in any::<u64>()) {
        both_fields(&spec, |p| paths_agree(p, seed), |p| paths_agree(p, seed));
    }

    #[test]
    fn null_space_basis_choice_is_irrelevant(spec in spec_strategy(), seed in any::<u64>()) {
        both_fields(&spec, |p| null_bases_are_arbitrary(p, seed), |p| null_bases_are_arbitrary(p, seed));
    }

    #[test]
    fn determinant_lemma_and_inverse_analogue(spec in spec_strategy()) {
        both_fields(&spec, determinant_sides_agree, determinant_sides_agree);
    }

    #[test]
    fn perturbation_inside_the_range_is_rejected(spec in spec_strategy(), seed in any::<u64>()) {
        both_fields(&spec, |p| e_inside_range_is_rejected(p, seed), |p| e_inside_range_is_rejected(p, seed));
    }

    #[test]
    fn generation_is_deterministic(spec in spec_strategy()) {
        match spec.field {
            Field::Real => {
                let (a, b) = (generate::<f64>(&spec).unwrap(), generate::<f64>(&spec).unwrap());
                prop_assert_eq!(a.assemble(), b.assemble());
            }
            Field::Complex => {
                let (a, b) = (generate::<Complex64>(&spec).unwrap(), generate::<Complex64>(&spec).unwrap());
                prop_assert_eq!(a.assemble(), b.assemble());
            }
        }
    }

    #[test]
    fn wrong_rank_is_reported(n in 3usize..12, seed in any::<u64>()) {
        let a = gaussian_matrix::<f64>(&mut rng_from_seed(seed), n, n);
        let e = DMatrix::<f64>::from_element(n, 1, 1.0);
        let err = validate(a, e.clone(), DMatrix::identity(1, 1), e, 1e-12).unwrap_err();
        prop_assert_eq!(err, Error::RankOfANotNMinusK { n, k: 1, detected: n });
    }
}
