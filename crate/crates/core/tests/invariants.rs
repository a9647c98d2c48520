use cesaro_growth::diagnostics::{solid_core_norm, solid_hull_norm};
use cesaro_growth::expansions::{cesaro_mean, radial_lp_profile, vp_sum, HarmonicExpansion, Mode};
use cesaro_growth::multipliers::{apply_hf, apply_hf_inv, apply_multiplier, MultiplierSeq};
use cesaro_growth::weights::{blocks, doubling_constant, regularize, Weight};
use proptest::prelude::*;

const FAMILY: [&str; 5] = ["pow:0.5", "pow:1", "pow:2", "logpow:1", "logpow:2"];

fn family() -> impl Strategy<Value = Weight> {
    (0..FAMILY.len()).prop_map(|i| Weight::parse(FAMILY[i]).unwrap())
}

fn expansion(dim: u32, degree: usize) -> impl Strategy<Value = HarmonicExpansion> {
    let mode = if dim <= 2 { Mode::Full } else { Mode::Zonal };
    let probe = HarmonicExpansion::zeros(dim, mode, degree).unwrap();
    let len: usize = (0..=degree).map(|k| probe.degree_coeffs(k).len()).sum();
    prop::collection::vec(-1.0f64..1.0, len).prop_map(move |flat| {
        let mut u = HarmonicExpansion::zeros(dim, mode, degree).unwrap();
        let mut it = flat.into_iter();
        for k in 0..=degree {
            for l in 1..=u.degree_coeffs(k).len() {
                u.set(k, l, it.next().unwrap()).unwrap();
            }
        }
        u
    })
}

fn assert_same(a: &HarmonicExpansion, b: &HarmonicExpansion, tol: f64) {
    let d = a.max_coeff_diff(b);
    assert!(d <= tol, "coefficient difference {d:e}");
}

#[test]
fn family_weights_are_monotone_and_doubling() {
    for spec in FAMILY {
        let g = Weight::parse(spec).unwrap();
        let d = doubling_constant(&g, 2f64.powi(20)).unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| 2f64.powf(20.0 * i as f64 / 400.0)).collect();
        for w in xs.windows(2) {
            assert!(g.eval(w[1]) >= g.eval(w[0]), "{spec} decreases at {}", w[1]);
        }
        for &x in &xs[..xs.len() - 20] {
            assert!(g.eval(2.0 * x) / g.eval(x) <= d + 1e-9, "{spec} at {x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn block_cuts_satisfy_the_ratio_bounds(f in family(), a in 1.5f64..4.0) {
        let b = blocks(&f, a, 10, 1).unwrap();
        let d = doubling_constant(&f, *b.cuts.last().unwrap() as f64 * 2.0).unwrap();
        prop_assert!(b.satisfies_invariant(d));
    }

    #[test]
    fn regularization_is_nondecreasing_in_alpha(q in family(), a in 0.0f64..20.0, step in 0.01f64..5.0) {
        let lo = regularize(&q, a).unwrap();
        let hi = regularize(&q, a + step).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12), "{lo} > {hi}");
    }

    #[test]
    fn parseval_on_the_grid(u in (1u32..=3).prop_flat_map(|d| expansion(d, 6)), r in 0.0f64..=1.0) {
        let grid = radial_lp_profile(&u, r, 2.0).unwrap();
        let coeff = u.l2_from_coefficients(r);
        prop_assert!((grid - coeff).abs() <= 1e-9 * coeff.max(1.0));
    }

    #[test]
    fn multipliers_commute_with_means(u in expansion(2, 12), n in 1usize..12, m in 1u32..=3, f in family()) {
        let lambda = MultiplierSeq::hf(f.clone());
        let a = cesaro_mean(&apply_multiplier(&u, &lambda).unwrap(), n, m as f64);
        let b = apply_multiplier(&cesaro_mean(&u, n, m as f64), &lambda).unwrap();
        assert_same(&a, &b, 1e-12 * f.eval(12.0));
        let a = vp_sum(&apply_hf_inv(&u, &f), n, 2).unwrap();
        let b = apply_hf_inv(&vp_sum(&u, n, 2).unwrap(), &f);
        assert_same(&a, &b, 1e-12);
        let a = apply_hf(&apply_hf_inv(&u, &f), &Weight::power(1.0));
        let b = apply_hf_inv(&apply_hf(&u, &Weight::power(1.0)), &f);
        assert_same(&a, &b, 1e-12);
    }

    #[test]
    fn weight_multiplier_and_inverse_cancel(u in expansion(1, 20), f in family()) {
        assert_same(&apply_hf(&apply_hf_inv(&u, &f), &f), &u, 1e-14);
    }

    #[test]
    fn multipliers_are_homogeneous(u in expansion(1, 10), c in -5.0f64..5.0, f in family()) {
        let lambda = MultiplierSeq::hf(f);
        let a = apply_multiplier(&u.scale(c), &lambda).unwrap();
        let b = apply_multiplier(&u, &lambda.clone().scaled(c)).unwrap();
        let c_u = apply_multiplier(&u, &lambda).unwrap().scale(c);
        assert_same(&a, &c_u, 1e-10);
        assert_same(&b, &c_u, 1e-10);
    }

    #[test]
    fn core_norm_dominates_hull_norm(u in expansion(1, 40), g in family()) {
        let b = blocks(&g, 2.0, 12, 1).unwrap();
        prop_assume!(*b.cuts.last().unwrap() >= 40);
        let hull = solid_hull_norm(&u, &g, &b).unwrap();
        let core = solid_core_norm(&u, &g, &b).unwrap();
        prop_assert!(core >= hull * (1.0 - 1e-12));
    }
}
