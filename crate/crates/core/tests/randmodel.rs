mod common;

use num_traits::ToPrimitive;
use pgmatroid::cli::consistent_with_bound;
use pgmatroid::randmodel::{
    bound_report, claim1_check, dense_flat_census, exact_survival_probability, run_census,
    run_colouring_experiment, run_rank_experiment, run_size_experiment, run_small_flat_experiment,
    sample_pgp, survival_frequency, trial_rng, TrialConfig,
};
use pgmatroid::{qbinom, GeometryCtx, Limits, SubMatroid};

use common::oracle_rank;

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}

/// Survival probability of a rank-d flat by enumerating its keep-patterns.
fn survival_oracle(d: usize, q: u32, p: f64) -> (u64, f64) {
    let local = GeometryCtx::pg(d, q).unwrap();
    let m = local.point_count();
    let threshold = 0.5 * p * ((q as f64).powi(d as i32) - 1.0) / (q as f64 - 1.0);
    let (mut count, mut prob) = (0u64, 0.0);
    for mask in 0u32..(1 << m) {
        let pts: Vec<usize> = (0..m).filter(|&j| mask >> j & 1 == 1).collect();
        if pts.len() as f64 >= threshold && oracle_rank(&local, &pts) == d {
            count += 1;
            prob += p.powi(pts.len() as i32) * (1.0 - p).powi((m - pts.len()) as i32);
        }
    }
    (count, prob)
}

#[test]
fn fano_survival_is_92_of_128() {
    let (count, prob) = survival_oracle(3, 2, 0.5);
    assert_eq!(count, 92);
    assert_eq!(exact_survival_probability(3, 2, 0.5).unwrap(), 0.71875);
    assert_eq!(prob, 0.71875);
}

#[test]
fn survival_matches_oracle() {
    for (d, q, p) in [
        (2, 3, 0.5),
        (2, 5, 0.3),
        (3, 3, 0.4),
        (3, 2, 0.9),
        (1, 7, 0.5),
        (4, 2, 0.2),
    ] {
        let (_, prob) = survival_oracle(d, q, p);
        assert!(
            (exact_survival_probability(d, q, p).unwrap() - prob).abs() < 1e-12,
            "d={d} q={q} p={p}"
        );
    }
}

#[test]
fn census_matches_direct_count() {
    let ctx = GeometryCtx::pg(5, 2).unwrap();
    let limits = Limits::default();
    for t in 0..5 {
        let m = sample_pgp(&ctx, 0.5, &mut trial_rng(31, t));
        for d in 2..=4 {
            let threshold = 0.5 * 0.5 * ((1u32 << d) - 1) as f64;
            let mut dense = 0;
            let mut surviving = 0;
            for flat in ctx.enumerate_flats(d).unwrap() {
                let trace: Vec<usize> = ctx
                    .flat_points(&flat)
                    .into_iter()
                    .filter(|&i| m.contains(i))
                    .collect();
                if oracle_rank(&ctx, &trace) == d {
                    surviving += 1;
                    dense += (trace.len() as f64 >= threshold) as u64;
                }
            }
            let r = dense_flat_census(&m, d, 0.5, &limits).unwrap();
            assert_eq!(
                (r.dense_count, r.surviving_count),
                (dense, surviving),
                "trial {t} d={d}"
            );
            assert_eq!(
                r.total_flats,
                qbinom(5, d as i64, 2).unwrap().to_u64().unwrap()
            );
        }
    }
}

#[test]
fn full_restriction_census_and_claim1() {
    let ctx = GeometryCtx::pg(6, 3).unwrap();
    let full = SubMatroid::full(&ctx);
    let limits = Limits::default();
    let r = dense_flat_census(&full, 2, 1.0, &limits).unwrap();
    assert_eq!(r.dense_count, r.total_flats);
    // Lines of PG(5,3) have 4 points: col = 2 > 1 and ½·4/2 = 1 is not > 1.
    let c = claim1_check(&full, 2, 1, 1.0, &limits).unwrap();
    assert!(!c.threshold_condition_holds);
    assert_eq!((c.exceptions, c.min_col), (0, Some(2)));
    let c = claim1_check(&full, 3, 2, 1.0, &limits).unwrap();
    // ½·13/3 > 2 and col(PG(2,3)) = 5.
    assert!(c.threshold_condition_holds);
    assert_eq!(
        (c.exceptions, c.edmonds_violations, c.min_col),
        (0, 0, Some(5))
    );
}

#[test]
fn census_guard() {
    let cfg = TrialConfig::new(10, 2, 0.5).with_d(3).with_trials(1);
    let small = Limits {
        max_census_flats: 1000,
        ..Limits::default()
    };
    assert!(run_census(&cfg, 1, &small, None).is_err());
}

#[test]
fn tiny_p_gives_empty_samples() {
    let ctx = GeometryCtx::pg(4, 2).unwrap();
    let empty = (0..200)
        .filter(|&t| sample_pgp(&ctx, 1e-6, &mut trial_rng(2, t)).is_empty())
        .count();
    assert!(empty >= 199);
}

#[test]
fn worker_count_does_not_change_results() {
    let limits = Limits::default();
    let cfg = TrialConfig::new(8, 2, 0.5)
        .with_delta(0.2)
        .with_trials(12)
        .with_seed(42);
    for workers in [3, 8] {
        assert_eq!(
            json(&run_size_experiment(&cfg, 1).unwrap()),
            json(&run_size_experiment(&cfg, workers).unwrap())
        );
        assert_eq!(
            json(&run_rank_experiment(&cfg, 1).unwrap()),
            json(&run_rank_experiment(&cfg, workers).unwrap())
        );
        assert_eq!(
            json(&run_colouring_experiment(&cfg, 1, &limits).unwrap()),
            json(&run_colouring_experiment(&cfg, workers, &limits).unwrap())
        );
        let small = TrialConfig::new(6, 2, 0.5)
            .with_delta(0.3)
            .with_trials(6)
            .with_seed(3);
        assert_eq!(
            json(&run_small_flat_experiment(&small, 1, &limits).unwrap()),
            json(&run_small_flat_experiment(&small, workers, &limits).unwrap())
        );
        let census = cfg.clone().with_d(3);
        assert_eq!(
            json(&run_census(&census, 1, &limits, Some(1)).unwrap()),
            json(&run_census(&census, workers, &limits, Some(1)).unwrap())
        );
        let ctx = GeometryCtx::pg(7, 2).unwrap();
        assert_eq!(
            json(&survival_frequency(&ctx, 3, 0.5, 500, 9, 1).unwrap()),
            json(&survival_frequency(&ctx, 3, 0.5, 500, 9, workers).unwrap())
        );
        assert_eq!(
            json(&bound_report(300, 0.3, 0.2, 150.0, 50, 5, 1).unwrap()),
            json(&bound_report(300, 0.3, 0.2, 150.0, 50, 5, workers).unwrap())
        );
    }
}

#[test]
fn empirical_frequencies_sit_under_bounds() {
    let limits = Limits::default();
    let size = run_size_experiment(
        &TrialConfig::new(10, 2, 0.5)
            .with_delta(0.1)
            .with_trials(300)
            .with_seed(1),
        1,
    )
    .unwrap();
    assert!(consistent_with_bound(
        size.out_of_band_fraction,
        size.out_of_band_bound.unwrap(),
        300
    ));

    let rank = run_rank_experiment(
        &TrialConfig::new(6, 2, 0.2).with_trials(300).with_seed(2),
        1,
    )
    .unwrap();
    assert!(rank.union_bound > 0.0);
    assert!(consistent_with_bound(
        1.0 - rank.full_rank_fraction,
        rank.union_bound.min(1.0),
        300
    ));

    let small = run_small_flat_experiment(
        &TrialConfig::new(7, 2, 0.5)
            .with_delta(0.3)
            .with_trials(40)
            .with_seed(3),
        1,
        &limits,
    )
    .unwrap();
    assert!(consistent_with_bound(
        small.violation_frequency,
        small.failure_bound.min(1.0),
        40
    ));

    let census = run_census(
        &TrialConfig::new(7, 2, 0.5)
            .with_d(3)
            .with_trials(20)
            .with_seed(4),
        1,
        &limits,
        None,
    )
    .unwrap();
    let fail = 1.0 - census.property_iii_trials as f64 / 20.0;
    assert!(consistent_with_bound(fail, census.markov_failure_bound, 20));

    let b = bound_report(1000, 0.4, 0.1, 800.0, 400, 6, 1).unwrap();
    assert!(consistent_with_bound(
        b.empirical_upper_tail,
        b.chernoff_upper,
        400
    ));
    assert!(consistent_with_bound(
        b.empirical_lower_tail,
        b.chernoff_lower,
        400
    ));
    assert!(consistent_with_bound(
        b.empirical_markov_tail,
        b.markov,
        400
    ));
}

#[test]
fn sampled_survival_frequency() {
    let ctx = GeometryCtx::pg(10, 2).unwrap();
    let est = survival_frequency(&ctx, 3, 0.5, 10_000, 7, 1).unwrap();
    assert_eq!(est.exact, 0.71875);
    assert!(est.z_score.abs() <= 3.0, "{est:?}");
}
