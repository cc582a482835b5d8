//! Cross-module properties: identities that tie the expansion arithmetic,
//! the lattice geometry, the flow, the classifier, and the constructions to
//! one another on randomized inputs.

use lpdi::cf::{self, ContinuedFraction};
use lpdi::classifier::{self, Status};
use lpdi::flow;
use lpdi::geometry;
use lpdi::witness;
use proptest::prelude::*;

fn periodic_from(seed: u64, len: usize, max_digit: u64) -> ContinuedFraction {
    let mut state = seed;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        state >> 33
    };
    let per: Vec<u64> = (0..len).map(|_| 1 + next() % max_digit).collect();
    ContinuedFraction::periodic(0, vec![], per).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The slope constant solves its equation and decreases in the
    /// exponent.
    #[test]
    fn sigma_solves_and_decreases(p1 in 1.01f64..15.0, gap in 0.01f64..5.0) {
        let p2 = p1 + gap;
        let s1 = geometry::sigma(p1).unwrap();
        let s2 = geometry::sigma(p2).unwrap();
        prop_assert!((s1.powf(p1) + (1.0 + s1).powf(p1) - 2.0).abs() <= 1e-11);
        prop_assert!(s1 > s2, "sigma({p1}) = {s1} vs sigma({p2}) = {s2}");
        prop_assert!(s2 > 0.0 && s1 < 1.0);
    }

    /// Both minima of a flow lattice obey the two-sided product bound
    /// lambda1*lambda2 in [2*det/vol, 4*det/vol] at the exponents with
    /// closed-form ball volumes.
    #[test]
    fn minima_products_stay_in_the_two_sided_bound(
        seed in any::<u64>(),
        len in 1usize..5,
        t in 2.0f64..5e3,
    ) {
        let x = periodic_from(seed, len, 6);
        let basis = flow::lattice_at(&x, t).unwrap();
        for (p, vol) in [(1.0, 2.0), (2.0, std::f64::consts::PI), (f64::INFINITY, 4.0)] {
            let m = flow::successive_minima(p, &basis).unwrap();
            prop_assert!(m.lambda1 <= m.lambda2 + 1e-12);
            let prod = m.lambda1 * m.lambda2;
            prop_assert!(
                prod >= 2.0 / vol - 1e-9 && prod <= 4.0 / vol + 1e-9,
                "p = {p}: product {prod} outside [{}, {}]",
                2.0 / vol,
                4.0 / vol
            );
        }
    }

    /// The flow's collision values reproduce the best-approximation
    /// quantities of the expansion (the identity behind the sup-norm
    /// constant), on random quadratics at small depth.
    #[test]
    fn collisions_match_best_approximation_windows(
        seed in any::<u64>(),
        len in 1usize..4,
    ) {
        let x = periodic_from(seed, len, 4);
        let convs = x.convergents(10);
        let mut expected = Vec::new();
        for nu in 2..=8usize {
            let q = cf::rat_to_f64(&num_rational::BigRational::from_integer(convs[nu].q.clone()));
            let point = cf::psi(&x, q, 128).unwrap();
            let q_next = cf::rat_to_f64(&num_rational::BigRational::from_integer(convs[nu + 1].q.clone()));
            expected.push(q_next * point.value());
        }
        let q8 = cf::rat_to_f64(&num_rational::BigRational::from_integer(convs[8].q.clone()));
        let q9 = cf::rat_to_f64(&num_rational::BigRational::from_integer(convs[9].q.clone()));
        let est = flow::critical_times(&x, f64::INFINITY, (q8 * q9).sqrt() * 3.0).unwrap();
        let mut vi = 0usize;
        for &want in &expected {
            while vi < est.values.len()
                && (est.values[vi] * est.values[vi] - want).abs() > 1e-8
            {
                vi += 1;
            }
            prop_assert!(vi < est.values.len(), "unmatched window value {want}");
            vi += 1;
        }
    }

    /// Every catalog lattice keeps its determinant and its marked points on
    /// the unit sphere, at randomized exponents.
    #[test]
    fn catalog_lattices_stay_critical(p in 1.0f64..12.0) {
        let delta = geometry::critical_determinant(p).unwrap();
        for entry in geometry::catalog(p).unwrap() {
            for lat in entry.sample(7) {
                prop_assert!((lat.det().abs() - delta).abs() <= 1e-9);
                for pt in lat.boundary_points() {
                    let norm = geometry::norm_eval(p, pt).unwrap();
                    prop_assert!((norm - 1.0).abs() <= 1e-9, "point {pt:?} at p = {p}");
                }
            }
        }
    }

    /// Preset witness streams keep their two-sided promises at every
    /// materialization horizon, and removal recovers the base.
    #[test]
    fn witness_presets_keep_their_promises(
        horizon in 512usize..2048,
        which in 0usize..3,
    ) {
        let base = ContinuedFraction::periodic(1, vec![], vec![1]).unwrap();
        let (stream, improvable_at, non_improvable_at) = match which {
            0 => (witness::witness_di_minus_ba(2.3, &base, horizon).unwrap(), 2.3, f64::INFINITY),
            1 => (witness::witness_di1_minus_di2(&base, horizon).unwrap(), 1.0, 2.0),
            _ => (witness::witness_di2_minus_di1(&base, horizon).unwrap(), 2.0, 1.0),
        };
        let good = witness::classify_witness(&stream, improvable_at).unwrap();
        prop_assert_eq!(good.status, Status::DecidedImprovable);
        let bad = witness::classify_witness(&stream, non_improvable_at).unwrap();
        prop_assert_eq!(bad.status, Status::DecidedNonImprovable);
        let recovered = stream.recover_base();
        prop_assert_eq!(recovered.len() + stream.omega(horizon).unwrap(), horizon);
        prop_assert_eq!(recovered, base.digits_clamped(horizon - stream.omega(horizon).unwrap()));
    }

    /// Pattern sets are locally constant strictly between 2 and the
    /// transition exponent, and pick up the slope data outside.
    #[test]
    fn pattern_sets_are_stable_on_the_open_interval(
        p in 2.05f64..2.55,
        q in 2.05f64..2.55,
    ) {
        let rp = classifier::regime_of(p).unwrap();
        let rq = classifier::regime_of(q).unwrap();
        let jp = serde_json::to_string(&classifier::patterns_for(&rp)).unwrap();
        let jq = serde_json::to_string(&classifier::patterns_for(&rq)).unwrap();
        prop_assert_eq!(jp, jq);
    }

    /// The balance product of the capped-digit family stays at or above 1
    /// for random words and qualities.
    #[test]
    fn capped_family_balance_holds_for_random_words(
        eps_milli in 50u32..950,
        seed in any::<u64>(),
        word_len in 1usize..5,
    ) {
        let epsilon = eps_milli as f64 / 1000.0;
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state >> 33
        };
        let word: Vec<u64> = (0..word_len).map(|_| 1 + next() % 9).collect();
        let report = witness::good_condition_check(epsilon, &[word], 400).unwrap();
        prop_assert!(report.running_min >= 1.0 - 1e-12);
        prop_assert_eq!(report.first_good_index, 1);
        prop_assert!(report.word_checks[0].repaired_chain_ok);
    }
}
