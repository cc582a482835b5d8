//! End-to-end acceptance checks, one per published criterion, each at its
//! stated tolerance. Every test prints a single PASS line on success (run
//! with `--nocapture` to see them).

use lpdi::cf::{self, ContinuedFraction};
use lpdi::classifier::{self, PatternSpec, Status};
use lpdi::flow;
use lpdi::geometry;
use lpdi::witness;

fn periodic(a0: i64, pre: &[u64], per: &[u64]) -> ContinuedFraction {
    ContinuedFraction::periodic(a0, pre.to_vec(), per.to_vec()).unwrap()
}

fn golden() -> ContinuedFraction {
    periodic(1, &[], &[1])
}

/// 1. Slope constants at the integer exponents and the defining-equation
///    residual across a 50-point grid.
const SIGMA_VALUE_TOL: f64 = 1e-12;
const SIGMA_RESIDUAL_TOL: f64 = 1e-11;

#[test]
fn criterion_01_sigma_values_and_equation_residuals() {
    let s1 = geometry::sigma(1.0).unwrap();
    assert!((s1 - 0.5).abs() <= SIGMA_VALUE_TOL, "sigma(1) = {s1}");
    let s2 = geometry::sigma(2.0).unwrap();
    let s2_exact = (3f64.sqrt() - 1.0) / 2.0;
    assert!((s2 - s2_exact).abs() <= SIGMA_VALUE_TOL, "sigma(2) = {s2}");
    for k in 0..50 {
        let p = 1.1 + (10.0 - 1.1) * k as f64 / 49.0;
        let s = geometry::sigma(p).unwrap();
        let residual = (s.powf(p) + (1.0 + s).powf(p) - 2.0).abs();
        assert!(
            residual <= SIGMA_RESIDUAL_TOL,
            "defining-equation residual {residual:e} at p = {p}"
        );
    }
    println!(
        "ACCEPTANCE 01 PASS — sigma(1), sigma(2) to 1e-12; equation residual <= 1e-11 on 50 exponents"
    );
}

/// 2. The transition exponent lies in (2.57, 2.58) and is stable to 1e-9
///    under precision doubling.
const P0_STABILITY_TOL: f64 = 1e-9;

#[test]
fn criterion_02_transition_exponent_bracket_and_stability() {
    let p0 = geometry::p_zero(1e-12).unwrap();
    assert!(p0 > 2.57 && p0 < 2.58, "p0 = {p0}");
    let lo_bits = geometry::p_zero_refined(128, 1e-14).unwrap();
    let hi_bits = geometry::p_zero_refined(256, 1e-14).unwrap();
    let drift = lo_bits.sub(&hi_bits).abs().to_f64();
    assert!(drift <= P0_STABILITY_TOL, "precision-doubling drift {drift:e}");
    assert!((p0 - hi_bits.to_f64()).abs() <= 1e-9);
    println!(
        "ACCEPTANCE 02 PASS — transition exponent {p0:.6} in (2.57, 2.58), drift {drift:.2e} under doubling"
    );
}

/// 3. Critical determinants at the anchor exponents, plus boundary
///    membership and determinant invariants across the whole catalog.
const DELTA_TOL: f64 = 1e-10;
const BOUNDARY_TOL: f64 = 1e-9;

#[test]
fn criterion_03_critical_determinants_and_catalog_invariants() {
    assert!((geometry::critical_determinant(1.0).unwrap() - 0.5).abs() <= DELTA_TOL);
    assert!(
        (geometry::critical_determinant(2.0).unwrap() - 3f64.sqrt() / 2.0).abs() <= DELTA_TOL
    );
    assert!((geometry::critical_determinant(f64::INFINITY).unwrap() - 1.0).abs() <= DELTA_TOL);

    let p0 = geometry::p_zero(1e-12).unwrap();
    let mut lattices = 0usize;
    for p in [1.0, 1.4, 2.0, 2.3, p0, 2.9, 4.0, 10.0] {
        let delta = geometry::critical_determinant(p).unwrap();
        for entry in geometry::catalog(p).unwrap() {
            for lat in entry.sample(100) {
                lattices += 1;
                let det = lat.det().abs();
                assert!(
                    (det - delta).abs() <= DELTA_TOL,
                    "{:?} at p = {p}: |det| = {det}, delta = {delta}",
                    lat.family
                );
                for pt in lat.boundary_points() {
                    let norm = geometry::norm_eval(p, pt).unwrap();
                    assert!(
                        (norm - 1.0).abs() <= BOUNDARY_TOL,
                        "{:?} at p = {p}: boundary point {pt:?} has norm {norm}",
                        lat.family
                    );
                }
            }
        }
    }
    println!(
        "ACCEPTANCE 03 PASS — determinants at 1/2/inf to 1e-10; {lattices} catalog lattices pass boundary and determinant checks"
    );
}

/// 4. The sup-norm identity between the flow's first minimum at collisions
///    and the best-approximation quantities of the expansion.
const PSI_IDENTITY_TOL: f64 = 1e-8;

#[test]
fn criterion_04_flow_matches_best_approximation_identity() {
    let quadratics = vec![
        periodic(1, &[], &[1]),
        periodic(0, &[], &[2]),
        periodic(0, &[], &[1, 2]),
        periodic(0, &[], &[2, 1]),
        periodic(0, &[], &[3]),
        periodic(0, &[], &[1, 3]),
        periodic(0, &[], &[3, 1]),
        periodic(0, &[], &[2, 3]),
        periodic(0, &[], &[1, 1, 2]),
        periodic(2, &[1], &[1, 2, 3]),
    ];
    for x in &quadratics {
        let convs = x.convergents(22);
        // Expected collision values q_{nu+1} * |q_nu x - p_nu| for nu <= 20.
        let mut expected = Vec::new();
        for nu in 1..=20usize {
            let q: f64 = cf::rat_to_f64(&num_rational::BigRational::from_integer(
                convs[nu].q.clone(),
            ));
            let point = cf::psi(x, q, 160).unwrap();
            assert_eq!(point.nu, nu, "psi window at t = q_{nu}");
            let q_next = cf::rat_to_f64(&num_rational::BigRational::from_integer(
                convs[nu + 1].q.clone(),
            ));
            expected.push(q_next * point.value());
        }
        let q20 = cf::rat_to_f64(&num_rational::BigRational::from_integer(convs[20].q.clone()));
        let q21 = cf::rat_to_f64(&num_rational::BigRational::from_integer(convs[21].q.clone()));
        let t_max = (q20 * q21).sqrt() * 3.0;
        let est = flow::critical_times(x, f64::INFINITY, t_max).unwrap();
        // Match the twenty expected values, in order, against the collision
        // list (the flow may see extra collisions before and after).
        let mut vi = 0usize;
        for (i, &want) in expected.iter().enumerate() {
            while vi < est.values.len()
                && (est.values[vi] * est.values[vi] - want).abs() > PSI_IDENTITY_TOL
            {
                vi += 1;
            }
            assert!(
                vi < est.values.len(),
                "no collision matches nu = {} (want {want})",
                i + 1
            );
            vi += 1;
        }
    }
    println!(
        "ACCEPTANCE 04 PASS — collision first-minimum squared equals q_(nu+1)*||q_nu a|| to 1e-8, nu <= 20, on 10 quadratics"
    );
}

/// 5. The classical extremal values of the golden ratio, from the expansion
///    and from the flow.
const EXTREMAL_TOL: f64 = 1e-6;
const FLOW_D2_TOL: f64 = 5e-3;

#[test]
fn criterion_05_golden_ratio_extremal_values() {
    let phi_val = (1.0 + 5f64.sqrt()) / 2.0;
    let d_target = 1.0 / (3.0 - phi_val);
    let l_target = 1.0 / 5f64.sqrt();

    let phi = golden();
    let d = cf::dirichlet_estimate(&phi, 60, 192).unwrap();
    assert!(
        (d.tail_sup - d_target).abs() <= EXTREMAL_TOL,
        "limsup estimate {} vs {d_target}",
        d.tail_sup
    );
    let l = cf::lagrange_estimate(&phi, 60, 192).unwrap();
    assert!(
        (l.tail_inf - l_target).abs() <= EXTREMAL_TOL,
        "liminf estimate {} vs {l_target}",
        l.tail_inf
    );

    let est = flow::critical_times(&phi, f64::INFINITY, 1e4).unwrap();
    let d2 = est.d_estimate * est.d_estimate;
    assert!(
        (d2 - d_target).abs() <= FLOW_D2_TOL,
        "flow d_estimate^2 = {d2} vs {d_target}"
    );
    println!(
        "ACCEPTANCE 05 PASS — golden-ratio limsup {:.7} and liminf {:.7} to 1e-6; flow square {:.4} within 5e-3",
        d.tail_sup, l.tail_inf, d2
    );
}

/// 6. The full improvability table of the natural logarithm base across the
///    parameter line.
#[test]
fn criterion_06_euler_number_improvability_table() {
    let p0 = geometry::p_zero(1e-12).unwrap();
    for p in [1.2, 1.5, 1.9, 2.7, 3.0, 10.0] {
        let v = classifier::classify_e(p).unwrap();
        assert!(v.status.decided(), "p = {p} must be decided");
        assert!(v.status.improvable(), "p = {p} must be improvable");
    }
    for p in [1.0, 2.0, 2.3, p0, f64::INFINITY] {
        let v = classifier::classify_e(p).unwrap();
        assert!(v.status.decided(), "p = {p} must be decided");
        assert!(!v.status.improvable(), "p = {p} must be non-improvable");
    }
    println!(
        "ACCEPTANCE 06 PASS — improvable exactly at {{1.2, 1.5, 1.9, 2.7, 3, 10}}, non-improvable at {{1, 2, 2.3, p0, inf}}"
    );
}

/// 7. Flow/classifier cross-validation at p = 2.3: the unbounded-digit
///    number drives the estimate to the sharp bound, the golden ratio stays
///    strictly below it.
const CROSS_LOW_SLACK: f64 = 0.05;
const CROSS_HIGH_GAP: f64 = 0.01;

#[test]
fn criterion_07_flow_classifier_cross_validation() {
    let p = 2.3;
    let bound = geometry::dirichlet_bound(p).unwrap();

    let e_est = flow::critical_times_parallel(&ContinuedFraction::E, p, 1e6, 4).unwrap();
    assert!(
        e_est.d_estimate >= bound - CROSS_LOW_SLACK,
        "estimate {} must reach within {CROSS_LOW_SLACK} of the bound {bound}",
        e_est.d_estimate
    );

    let phi_est = flow::critical_times_parallel(&golden(), p, 1e6, 4).unwrap();
    assert!(
        phi_est.d_estimate <= bound - CROSS_HIGH_GAP,
        "estimate {} must stay at least {CROSS_HIGH_GAP} below the bound {bound}",
        phi_est.d_estimate
    );
    println!(
        "ACCEPTANCE 07 PASS — at p = 2.3: e reaches {:.4} (bound {bound:.4}), golden ratio stays at {:.4}",
        e_est.d_estimate, phi_est.d_estimate
    );
}

/// 8. The witness pipeline: each preset's 4096-digit prefix carries its
///    intended pattern signature, the complementary decided pattern is
///    absent, and removal inverts insertion.
const WITNESS_DIGITS: usize = 4096;

#[test]
fn criterion_08_witness_pipeline_signatures() {
    let base = golden();

    let check_roundtrip = |stream: &witness::WitnessStream| {
        let recovered = stream.recover_base();
        assert_eq!(recovered, base.digits_clamped(recovered.len()));
    };
    let growing = |records: &[(usize, u64)]| {
        records.len() >= 3 && records.windows(2).all(|w| w[1].1 > w[0].1)
    };
    let report_of = |v: &classifier::Verdict, want: &str| -> Vec<(usize, u64)> {
        v.report
            .reports
            .iter()
            .find(|r| r.pattern.label() == want)
            .map(|r| r.records.clone())
            .unwrap_or_default()
    };

    // Improvable-but-not-badly-approximable: growing digits visible as an
    // unbounded-digit signature at p = inf, nothing sustained at the target.
    let s1 = witness::witness_di_minus_ba(2.3, &base, WITNESS_DIGITS).unwrap();
    check_roundtrip(&s1);
    let at_inf = classifier::classify_digits(s1.digits(), f64::INFINITY, WITNESS_DIGITS).unwrap();
    assert!(growing(&report_of(&at_inf, "UNBOUNDED_DIGITS")));
    assert_eq!(at_inf.status, Status::EvidenceNonImprovable);
    let at_target = classifier::classify_digits(s1.digits(), 2.3, WITNESS_DIGITS).unwrap();
    assert_eq!(at_target.status, Status::EvidenceImprovable);

    // Improvable at 1, not at 2: central windows with tail product 3 and
    // growing flanks at p = 2; no off-by-one signature at p = 1.
    let s2 = witness::witness_di1_minus_di2(&base, WITNESS_DIGITS).unwrap();
    check_roundtrip(&s2);
    let at_two = classifier::classify_digits(s2.digits(), 2.0, WITNESS_DIGITS).unwrap();
    let product_windows: Vec<_> = at_two
        .report
        .reports
        .iter()
        .find(|r| matches!(r.pattern, PatternSpec::CentralProduct { .. }))
        .map(|r| {
            r.windows
                .iter()
                .filter(|w| w.depth >= 8 && w.residual <= 0.05)
                .collect::<Vec<_>>()
        })
        .unwrap_or_default();
    assert!(
        product_windows.len() >= 3,
        "want at least 3 deep product windows, got {}",
        product_windows.len()
    );
    assert_eq!(at_two.status, Status::EvidenceNonImprovable);
    let at_one = classifier::classify_digits(s2.digits(), 1.0, WITNESS_DIGITS).unwrap();
    assert!(!growing(&report_of(&at_one, "ALMOST_SYMMETRIC")));
    assert_eq!(at_one.status, Status::EvidenceImprovable);

    // Improvable at 2, not at 1: the mirror signature.
    let s3 = witness::witness_di2_minus_di1(&base, WITNESS_DIGITS).unwrap();
    check_roundtrip(&s3);
    let at_one = classifier::classify_digits(s3.digits(), 1.0, WITNESS_DIGITS).unwrap();
    assert!(growing(&report_of(&at_one, "ALMOST_SYMMETRIC")));
    assert_eq!(at_one.status, Status::EvidenceNonImprovable);
    let at_two = classifier::classify_digits(s3.digits(), 2.0, WITNESS_DIGITS).unwrap();
    let cp_fired = at_two
        .report
        .reports
        .iter()
        .filter(|r| matches!(r.pattern, PatternSpec::CentralProduct { .. }))
        .any(|r| r.windows.iter().filter(|w| w.depth >= 8 && w.residual <= 0.05).count() >= 3);
    assert!(!cp_fired, "no deep product windows may appear at p = 2");
    assert_eq!(at_two.status, Status::EvidenceImprovable);

    println!(
        "ACCEPTANCE 08 PASS — three presets at 4096 digits: signatures present, complements absent, removal inverts insertion"
    );
}

/// 9. The capped-digit family's parameters for quality 1/2 and word (2, 3),
///    and the balance product staying at or above 1.
#[test]
fn criterion_09_capped_family_parameters_and_balance() {
    let w = witness::ba_w(0.5, &[vec![2, 3]], 256, 7).unwrap();
    assert_eq!(w.m, 24, "free-digit cap");
    assert_eq!(w.q, vec!["144".to_string()], "squared product");
    assert_eq!(w.nu, vec![29], "free-block length");

    let report = witness::good_condition_check(0.5, &[vec![2, 3]], 4 * (29 + 2)).unwrap();
    assert!(
        report.running_min >= 1.0 - 1e-12,
        "running product dipped to {}",
        report.running_min
    );
    assert_eq!(report.first_good_index, 1, "good from the first position");
    let chk = &report.word_checks[0];
    assert!(chk.repaired_chain_ok, "{} >= {} >= {}", chk.lhs, chk.mid, chk.rhs);
    println!(
        "ACCEPTANCE 09 PASS — cap 24, squared product 144, block length 29; balance product stays >= 1"
    );
}

/// 10. Invariant suites: exhaustive continuant symmetry, the convergent
///     determinant identity, quasi-multiplicativity, cylinder nesting, and
///     the product-3 identity across the exponent-2 lattice family.
const L4_PRODUCT_TOL: f64 = 1e-9;

#[test]
fn criterion_10_invariant_suites() {
    // Continuant symmetry, exhaustive over all words of length <= 12 with
    // digits 1..=4.
    let mut words = 0u64;
    let mut buf = [0u64; 12];
    for len in 1..=12usize {
        for code in 0..4usize.pow(len as u32) {
            let mut c = code;
            for slot in buf.iter_mut().take(len) {
                *slot = 1 + (c & 3) as u64;
                c >>= 2;
            }
            let mut k = 1u64;
            let mut kp = 0u64;
            for &a in &buf[..len] {
                let next = a * k + kp;
                kp = k;
                k = next;
            }
            let mut rk = 1u64;
            let mut rkp = 0u64;
            for &a in buf[..len].iter().rev() {
                let next = a * rk + rkp;
                rkp = rk;
                rk = next;
            }
            assert_eq!(k, rk, "continuant symmetry failed for {:?}", &buf[..len]);
            words += 1;
        }
    }
    assert_eq!(words, 22_369_620);

    // Convergent determinant identity, exact.
    let mut rng: u64 = 0x5eed;
    let mut next = move || {
        rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        rng >> 33
    };
    let mut subjects = vec![ContinuedFraction::E, golden(), periodic(0, &[], &[2])];
    for _ in 0..5 {
        let per: Vec<u64> = (0..1 + next() % 4).map(|_| 1 + next() % 6).collect();
        subjects.push(periodic(0, &[], &per));
    }
    for x in &subjects {
        let convs = x.convergents(50);
        for nu in 1..convs.len() {
            let det = &convs[nu].p * &convs[nu - 1].q - &convs[nu - 1].p * &convs[nu].q;
            let expect = if nu % 2 == 1 { 1 } else { -1 };
            assert_eq!(det, num_bigint::BigInt::from(expect), "at index {nu}");
        }
    }

    // Quasi-multiplicativity: K(u)K(v) <= K(uv) <= 2 K(u)K(v).
    for _ in 0..500 {
        let u: Vec<u64> = (0..1 + next() % 10).map(|_| 1 + next() % 9).collect();
        let v: Vec<u64> = (0..1 + next() % 10).map(|_| 1 + next() % 9).collect();
        let joined: Vec<u64> = u.iter().chain(v.iter()).copied().collect();
        let ku = cf::continuant(&u);
        let kv = cf::continuant(&v);
        let kuv = cf::continuant(&joined);
        let prod = &ku * &kv;
        assert!(kuv >= prod, "lower bound failed for {u:?} ++ {v:?}");
        assert!(kuv <= &prod * 2u32, "upper bound failed for {u:?} ++ {v:?}");
    }

    // Cylinder nesting: appending a digit shrinks the interval, inside the
    // parent.
    for _ in 0..500 {
        let w: Vec<u64> = (0..1 + next() % 8).map(|_| 1 + next() % 9).collect();
        let parent = cf::cylinder(&w).unwrap();
        let mut child_word = w.clone();
        child_word.push(1 + next() % 9);
        let child = cf::cylinder(&child_word).unwrap();
        assert!(child.lower >= parent.lower && child.upper <= parent.upper);
        assert!(child.length() < parent.length());
    }

    // Product-3 identity across the exponent-2 family: writing the marked
    // points' absolute components as (A, B) and (C, D), the two associated
    // window tails (2B - D)/(D - B) and (A - C)/C multiply to exactly 3.
    let mut l4 = 0usize;
    for entry in geometry::catalog(2.0).unwrap() {
        for k in 0..100 {
            let phi = (k as f64 + 0.5) * std::f64::consts::FRAC_PI_6 / 100.0;
            let lat = entry.at(phi).unwrap();
            let zp = lat.z_prime();
            let zs = lat.z_second();
            let (c, d) = (zp[0].abs(), zp[1].abs());
            let (a, b) = (zs[0].abs(), zs[1].abs());
            let beta = (2.0 * b - d) / (d - b);
            let beta_star = (a - c) / c;
            assert!(
                (beta * beta_star - 3.0).abs() <= L4_PRODUCT_TOL,
                "family {:?} at {phi}: product {}",
                lat.family,
                beta * beta_star
            );
            l4 += 1;
        }
    }
    assert_eq!(l4, 200);

    println!(
        "ACCEPTANCE 10 PASS — 22,369,620 continuant symmetries, determinant identity, quasi-multiplicativity, cylinder nesting, product-3 identity: zero failures"
    );
}
