mod common;

use common::*;
use rand::Rng;
use segguard_core::{
    best_case_cs, best_case_weighted, classify, compute_bounds, construct_cs_improving,
    construct_cs_reducing, evaluate, low_price_mass_threshold, profile_polytope,
    segmentation_point, worst_case_cs, worst_case_weighted, Database, OracleConfig, PriceIndex,
    Rational,
};

#[test]
fn lower_bound_matches_worst_case() {
    let cfg = OracleConfig::default();
    let mut r = rng(11);
    let mut boundary = 0;
    for case in 0..120 {
        let m = random_bounded_market(&mut r, 4);
        let b = compute_bounds(&m).unwrap();
        let f = if case % 4 == 0 && b.lambda_lower < Rational::one() {
            match database_with_first(&b.lambda_lower, r.gen_range(2..=3)) {
                Some(f) => {
                    boundary += 1;
                    f
                }
                None => random_database(&mut r, 3),
            }
        } else {
            random_database(&mut r, 3)
        };
        let w = worst_case_cs(&m, &f, &cfg).unwrap();
        let in_wc = *f.min_mass() > b.lambda_lower;
        assert_eq!(w.value == b.u_star, in_wc, "market {m:?} database {f:?}");
        assert!(w.value <= b.u_star);
        assert_eq!(w.witness_value, w.value);
    }
    assert!(boundary > 10);
}

#[test]
fn upper_bound_matches_threshold_lp() {
    let mut r = rng(12);
    for _ in 0..150 {
        let m = random_bounded_market(&mut r, 5);
        let b = compute_bounds(&m).unwrap();
        let t = low_price_mass_threshold(&m).unwrap();
        assert_eq!(t.value, b.lambda_upper, "market {m:?}");
    }
}

#[test]
fn f2_matches_best_case() {
    let cfg = OracleConfig::default();
    let mut r = rng(13);
    let mut checked = 0;
    let mut in_f2 = 0;
    let mut at_upper = 0;
    while checked < 90 {
        let (m, b) = loop {
            let m = random_bounded_market(&mut r, 4);
            let b = compute_bounds(&m).unwrap();
            if checked % 3 == 2 || b.f2_nonempty() {
                break (m, b);
            }
        };
        let half = q(1, 2);
        let f = match checked % 3 {
            // label mass strictly inside (lambda_lower, lambda_upper)
            0 if b.f2_nonempty() => Database::new(b.f2_witness().unwrap()).unwrap(),
            // label mass exactly at lambda_upper
            1 if b.lambda_upper > b.lambda_lower && b.lambda_upper <= half => {
                at_upper += 1;
                database_with_first(&b.lambda_upper, 2).unwrap()
            }
            _ => random_database(&mut r, 3),
        };
        let c = classify(&m, &f).unwrap();
        if !c.in_wc {
            continue;
        }
        checked += 1;
        let best = best_case_cs(&m, &f, &cfg).unwrap();
        assert_eq!(
            best.value > b.u_star,
            c.in_f2,
            "market {m:?} database {f:?}"
        );
        if c.in_f2 {
            in_f2 += 1;
            let w = best.witness_exceeding(&m, &b.u_star).unwrap();
            assert!(evaluate(&m, &w).unwrap().cs > b.u_star);
        }
    }
    assert!(in_f2 >= 20, "{in_f2}");
    assert!(at_upper >= 5, "{at_upper}");
}

#[test]
fn weighted_objectives_classify_identically() {
    let cfg = OracleConfig::default();
    let mut r = rng(14);
    for _ in 0..40 {
        let m = random_bounded_market(&mut r, 4);
        let f = random_database(&mut r, 3);
        let c = classify(&m, &f).unwrap();
        let b = compute_bounds(&m).unwrap();
        for alpha in [q(1, 2), q(3, 4), q(1, 1)] {
            let w_star = &alpha * &b.u_star + (Rational::one() - &alpha) * &b.pi_star;
            let worst = worst_case_weighted(&m, &f, &alpha, &cfg).unwrap();
            assert_eq!(worst.value == w_star, c.in_wc, "alpha {alpha} {m:?} {f:?}");
            if c.in_wc {
                let best = best_case_weighted(&m, &f, &alpha, &cfg).unwrap();
                assert_eq!(best.value > w_star, c.in_f2, "alpha {alpha} {m:?} {f:?}");
            }
        }
    }
}

#[test]
fn lp_examples() {
    use segguard_core::lp::{LinearProgram, Relation, Sense};
    // normalization only, n = 1, K = 2
    let mut lp = LinearProgram::new(2, Sense::Maximize);
    lp.set_objective(vec![q(1, 1), q(0, 1)]);
    lp.add(vec![q(1, 1), q(1, 1)], Relation::Eq, q(1, 1));
    let sol = lp.solve().unwrap();
    assert_eq!((sol.value, sol.point), (q(1, 1), vec![q(1, 1), q(0, 1)]));

    // one label: the marginals pin the segment to the market itself
    let m = x_star();
    let lp = profile_polytope(&m, &Database::trivial(), &[PriceIndex(1)]).unwrap();
    let sol = lp.solve().unwrap();
    assert_eq!(sol.point, m.masses().to_vec());
    assert_eq!(sol.value, q(1, 10));
}

#[test]
fn witnesses_lie_in_their_polytopes() {
    let m = x_star();
    let f = Database::new(vec![q(3, 10), q(7, 10)]).unwrap();
    let seg = construct_cs_reducing(&m, &f, 0).unwrap();
    let lp = profile_polytope(&m, &f, &[PriceIndex(2), PriceIndex(1)]).unwrap();
    assert!(lp.is_feasible(&segmentation_point(&seg)));

    let mut r = rng(15);
    let mut seen = 0;
    while seen < 60 {
        let m = random_bounded_market(&mut r, 5);
        let b = compute_bounds(&m).unwrap();
        let n = r.gen_range(2..=3);
        let (seg, f) = if seen % 2 == 0 {
            let Some(f) = database_with_first(&b.lambda_lower, n) else {
                continue;
            };
            (construct_cs_reducing(&m, &f, 0).unwrap(), f)
        } else {
            let Some(t) = b.f2_witness() else { continue };
            let f = Database::new(t).unwrap();
            (
                construct_cs_improving(&m, &f, 0, None)
                    .unwrap()
                    .segmentation,
                f,
            )
        };
        let prices = evaluate(&m, &seg).unwrap().prices;
        let lp = profile_polytope(&m, &f, &prices).unwrap();
        assert!(lp.is_feasible(&segmentation_point(&seg)));
        seen += 1;
    }
}

#[test]
fn wc_vertices_never_price_above_uniform() {
    let cfg = OracleConfig::default();
    let mut r = rng(16);
    let mut checked = 0;
    while checked < 40 {
        let m = random_bounded_market(&mut r, 4);
        let f = random_database(&mut r, 3);
        if !classify(&m, &f).unwrap().in_wc {
            continue;
        }
        checked += 1;
        let b = compute_bounds(&m).unwrap();
        for res in [
            worst_case_cs(&m, &f, &cfg).unwrap(),
            best_case_cs(&m, &f, &cfg).unwrap(),
        ] {
            let stats = res.vertex_stats.unwrap();
            assert!(stats.max_price <= b.i_star, "{m:?} {f:?}");
            assert!(stats.min_ps >= b.pi_star, "{m:?} {f:?}");
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let m = x_star();
    let f = Database::new(vec![q(1, 5), q(2, 5), q(2, 5)]).unwrap();
    let cfg = OracleConfig::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                worst_case_cs(&m, &f, &cfg).unwrap(),
                best_case_cs(&m, &f, &cfg).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(4));
}
