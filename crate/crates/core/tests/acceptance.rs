//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//! Tolerances and seeds are pinned below.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use pgmatroid::decomp::{
    counting_bound_report, find_violating_partial_transversal, lemma5_final_step,
    naive_transversal_oracle, search_decomposition, threshold_n0, verify_decomposition, LogBase,
    Verdict,
};
use pgmatroid::randmodel::{
    run_census, run_colouring_experiment, run_rank_experiment, run_size_experiment,
    survival_frequency, trial_rng, TrialConfig,
};
use pgmatroid::{colouring_number, qbinom, verify_colouring, GeometryCtx, Limits, SubMatroid};
use rand::seq::SliceRandom;
use rand::Rng;

const SEED: u64 = 20240601;
const SIZE_MIN_FRACTION: f64 = 0.99;
const RANK_MAX_LOG10_BOUND: f64 = -70.0;
const COLOURING_MIN_FRACTION: f64 = 0.95;
const CENSUS_MIN_TRIALS: usize = 18;
const SURVIVAL_SAMPLES: usize = 20_000;
const SURVIVAL_MAX_SIGMAS: f64 = 3.0;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}

fn qbinom_product(n: u32, d: u32, q: u32) -> BigUint {
    let q = BigUint::from(q);
    let one = BigUint::from(1u32);
    let (mut num, mut den) = (one.clone(), one.clone());
    for i in 0..d {
        num *= q.pow(n - i) - &one;
        den *= q.pow(i + 1) - &one;
    }
    num / den
}

fn criterion_1() -> Check {
    for q in [2u32, 3, 4, 5, 7, 8, 9] {
        for n in 0..=30u32 {
            for d in 0..=n {
                let v = qbinom(n as i64, d as i64, q).map_err(e)?;
                ensure(v == qbinom_product(n, d, q), || {
                    format!("[{n},{d}]_{q} differs from product")
                })?;
                let qb = BigUint::from(q);
                ensure(
                    qb.pow(d * (n - d)) <= v && v <= qb.pow(d * (n - d + 1)),
                    || format!("bounds fail at [{n},{d}]_{q}"),
                )?;
            }
        }
    }
    let mut checked = 0;
    for (q, nmax, dmax) in [(2u32, 8usize, 4usize), (3, 5, 3)] {
        for n in 1..=nmax {
            let ctx = GeometryCtx::pg(n, q).map_err(e)?;
            for d in 1..=dmax.min(n) {
                let count = ctx.enumerate_flats(d).map_err(e)?.count();
                ensure(
                    BigUint::from(count) == qbinom(n as i64, d as i64, q).map_err(e)?,
                    || format!("flat count PG({},{q}) rank {d}", n - 1),
                )?;
                checked += 1;
            }
        }
    }
    Ok(format!("q-binomials for n <= 30; {checked} flat counts"))
}

fn criterion_2() -> Check {
    let limits = Limits::default();
    let mut done = 0;
    for (n, q) in [(5, 2), (4, 3)] {
        let ctx = GeometryCtx::pg(n, q).map_err(e)?;
        for t in 0..100 {
            let mut rng = trial_rng(SEED, t);
            let keep: f64 = rng.random_range(0.1..0.9);
            let mut pts: Vec<usize> = (0..ctx.point_count())
                .filter(|_| rng.random_bool(keep))
                .collect();
            if pts.is_empty() {
                pts.push(rng.random_range(0..ctx.point_count()));
            }
            let m = SubMatroid::restrict(&ctx, &pts).map_err(e)?;
            let (k, w) = colouring_number(&m);
            let brute = m.edmonds_bruteforce(&limits).map_err(e)?;
            ensure(k == brute && verify_colouring(&m, &w), || {
                format!(
                    "PG({},{q}) instance {t}: partition {k}, Edmonds {brute}",
                    n - 1
                )
            })?;
            done += 1;
        }
    }
    Ok(format!("{done} instances agree, all witnesses verified"))
}

fn criterion_3() -> Check {
    let expected = [3, 4, 7, 11, 19, 32, 57, 103];
    let mut got = Vec::new();
    for n in 3..=10 {
        got.push(colouring_number(&SubMatroid::full(&GeometryCtx::pg(n, 2).map_err(e)?)).0);
    }
    ensure(got == expected, || format!("got {got:?}"))?;
    Ok(format!("{got:?}"))
}

fn size_cfg() -> TrialConfig {
    TrialConfig::new(12, 2, 0.5)
        .with_delta(0.05)
        .with_trials(500)
        .with_seed(SEED)
}

fn rank_cfg() -> TrialConfig {
    TrialConfig::new(10, 2, 0.3)
        .with_trials(500)
        .with_seed(SEED)
}

fn colouring_cfg() -> TrialConfig {
    TrialConfig::new(12, 2, 0.5)
        .with_delta(0.1)
        .with_trials(100)
        .with_seed(SEED)
}

fn census_cfg(p: f64) -> TrialConfig {
    TrialConfig::new(10, 2, p)
        .with_d(3)
        .with_trials(20)
        .with_seed(SEED)
}

/// Serialized outputs of the randomized criteria at one worker count.
#[derive(PartialEq)]
struct Outputs(Vec<String>);

fn randomized_outputs(workers: usize) -> Result<Outputs, String> {
    let limits = Limits::default();
    let ctx = GeometryCtx::pg(10, 2).map_err(e)?;
    Ok(Outputs(vec![
        json(&run_size_experiment(&size_cfg(), workers).map_err(e)?),
        json(&run_rank_experiment(&rank_cfg(), workers).map_err(e)?),
        json(&run_colouring_experiment(&colouring_cfg(), workers, &limits).map_err(e)?),
        json(&run_census(&census_cfg(0.5), workers, &limits, None).map_err(e)?),
        json(&survival_frequency(&ctx, 3, 0.5, SURVIVAL_SAMPLES, SEED, workers).map_err(e)?),
        json(&run_census(&census_cfg(1.0), workers, &limits, Some(1)).map_err(e)?),
    ]))
}

fn criterion_4() -> Check {
    let r = run_size_experiment(&size_cfg(), 1).map_err(e)?;
    let sigma = (4095.0f64 * 0.25).sqrt();
    let half_width = r.band.1 - r.expectation;
    ensure(r.in_band_fraction >= SIZE_MIN_FRACTION, || {
        format!("in-band {}", r.in_band_fraction)
    })?;
    Ok(format!(
        "in-band {:.3}; half-width {:.1} = {:.2} sigma; Chernoff upper {:.3e}",
        r.in_band_fraction,
        half_width,
        half_width / sigma,
        r.chernoff_upper.unwrap()
    ))
}

fn criterion_5() -> Check {
    let r = run_rank_experiment(&rank_cfg(), 1).map_err(e)?;
    ensure(r.full_rank_fraction == 1.0, || {
        format!("full-rank fraction {}", r.full_rank_fraction)
    })?;
    ensure(r.log10_union_bound < RANK_MAX_LOG10_BOUND, || {
        format!("log10 bound {}", r.log10_union_bound)
    })?;
    Ok(format!(
        "full rank 500/500; log10 union bound {:.1}",
        r.log10_union_bound
    ))
}

fn criterion_6() -> Check {
    let r = run_colouring_experiment(&colouring_cfg(), 1, &Limits::default()).map_err(e)?;
    ensure(r.in_band_fraction >= COLOURING_MIN_FRACTION, || {
        format!("in-band {}", r.in_band_fraction)
    })?;
    let (lo, hi) = r.rows.iter().fold((f64::MAX, f64::MIN), |(a, b), row| {
        (a.min(row.statistic), b.max(row.statistic))
    });
    Ok(format!(
        "in-band {:.2} around {:.2}; col range {lo}..{hi}",
        r.in_band_fraction, r.center
    ))
}

fn criterion_7() -> Check {
    let r = run_census(&census_cfg(0.5), 1, &Limits::default(), None).map_err(e)?;
    ensure(r.property_iii_trials >= CENSUS_MIN_TRIALS, || {
        format!("{} / 20 trials", r.property_iii_trials)
    })?;
    let ctx = GeometryCtx::pg(10, 2).map_err(e)?;
    let s = survival_frequency(&ctx, 3, 0.5, SURVIVAL_SAMPLES, SEED, 1).map_err(e)?;
    ensure(s.exact == 0.71875, || format!("exact {}", s.exact))?;
    ensure(s.z_score.abs() <= SURVIVAL_MAX_SIGMAS, || {
        format!("frequency {} z {}", s.frequency, s.z_score)
    })?;
    Ok(format!(
        "{}/20 trials reach {:.0}; survival {:.4} vs 0.71875 (z = {:.2}, {} samples); census pooled {:.4}",
        r.property_iii_trials, r.target, s.frequency, s.z_score, s.samples, r.pooled_survival_frequency
    ))
}

fn criterion_8() -> Check {
    let r = run_census(&census_cfg(1.0), 1, &Limits::default(), Some(1)).map_err(e)?;
    let claims = r.claim1.as_ref().ok_or("no claim results")?;
    ensure(claims.iter().all(|c| c.threshold_condition_holds), || {
        "threshold condition fails".into()
    })?;
    let exceptions: u64 = claims
        .iter()
        .map(|c| c.exceptions + c.edmonds_violations)
        .sum();
    let dense: u64 = claims.iter().map(|c| c.dense_flats).sum();
    ensure(exceptions == 0 && dense == 20 * r.total_flats, || {
        format!("{exceptions} exceptions, {dense} dense")
    })?;
    let min_col = claims.iter().filter_map(|c| c.min_col).min();
    Ok(format!(
        "{dense} dense flats over 20 trials, 0 exceptions, min col {min_col:?}"
    ))
}

fn criterion_9() -> Check {
    let ctx = GeometryCtx::pg(4, 2).map_err(e)?;
    let limits = Limits::default();
    let mut violations = 0;
    for t in 0..100 {
        let mut rng = trial_rng(SEED ^ 9, t);
        let mut pts: Vec<usize> = (0..15).collect();
        pts.shuffle(&mut rng);
        let mut it = pts.into_iter();
        let classes: Vec<Vec<usize>> = (0..rng.random_range(1..=6))
            .map(|_| it.by_ref().take(rng.random_range(1..=3)).collect())
            .collect();
        let ground: Vec<usize> = classes.iter().flatten().copied().collect();
        let m = SubMatroid::restrict(&ctx, &ground).map_err(e)?;
        let b = rng.random_range(1..=2);
        let found = find_violating_partial_transversal(&m, &classes, b, u64::MAX).map_err(e)?;
        let ok = naive_transversal_oracle(&m, &classes, b, &limits).map_err(e)?;
        ensure(found.is_none() == ok, || format!("instance {t} disagrees"))?;
        violations += found.is_some() as usize;
    }
    Ok(format!(
        "100 instances agree ({violations} with violations)"
    ))
}

fn criterion_10() -> Check {
    let fano = SubMatroid::full(&GeometryCtx::pg(3, 2).map_err(e)?);
    let singletons: Vec<Vec<usize>> = (0..7).map(|i| vec![i]).collect();
    let verdict = verify_decomposition(&fano, &singletons, 2, 1.0, u64::MAX).map_err(e)?;
    let size = match &verdict {
        Verdict::TransversalViolation { witness, .. } => witness.len(),
        other => return Err(format!("{other:?}")),
    };
    ensure(size == 7, || format!("witness size {size}"))?;
    let d = search_decomposition(&fano, 1, 2.0, u64::MAX, &Limits::default())
        .map_err(e)?
        .ok_or("none found")?;
    let check = verify_decomposition(&fano, &d.classes, 1, 2.0, u64::MAX).map_err(e)?;
    ensure(check.is_valid(), || format!("{check:?}"))?;
    Ok(format!("witness of size 7; found {:?}", d.classes))
}

fn criterion_11() -> Check {
    for q in [2u32, 3] {
        for n in 0..=30u64 {
            for d in 0..=n.min(5) {
                ensure(lemma5_final_step(n, d, q).map_err(e)?, || {
                    format!("q^(nd-d^2) > [{n},{d}]_{q}")
                })?;
            }
        }
    }
    let n0 = threshold_n0(2, 1.0, 1, 1.0, 0.1, LogBase::Natural).map_err(e)?;
    let r = counting_bound_report(n0.to_u64().unwrap(), 2, 1.0, 1, 1.0, 0.1, LogBase::Natural)
        .map_err(e)?;
    ensure(r.regimes.len() == 2, || "both regimes required".into())?;
    let regimes: Vec<String> = r
        .regimes
        .iter()
        .map(|g| {
            let steps: Vec<&str> = g
                .steps
                .iter()
                .map(|s| if s.holds { "T" } else { "F" })
                .collect();
            format!("{}: [{}]", g.classes_bound, steps.join(" "))
        })
        .collect();
    Ok(format!(
        "lemma bound for n <= 30; chain at n0 = {n0}: {}",
        regimes.join("; ")
    ))
}

fn criterion_12() -> Check {
    let one = randomized_outputs(1)?;
    let eight = randomized_outputs(8)?;
    ensure(one == eight, || {
        "outputs differ between 1 and 8 workers".into()
    })?;
    Ok(format!(
        "{} randomized outputs identical at 1 and 8 workers",
        one.0.len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("q-binomials, flat counts, Gaussian bounds", criterion_1),
        ("partitioning agrees with Edmonds", criterion_2),
        ("col(PG(n-1,2)) for n = 3..10", criterion_3),
        ("size concentration", criterion_4),
        ("full rank and union bound", criterion_5),
        ("colouring-number concentration", criterion_6),
        ("dense-flat census and survival", criterion_7),
        ("dense flats are not b-colourable", criterion_8),
        ("partial-transversal reduction", criterion_9),
        ("worked Fano decompositions", criterion_10),
        ("counting-chain report", criterion_11),
        ("determinism across workers", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
