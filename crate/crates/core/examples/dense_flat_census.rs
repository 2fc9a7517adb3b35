//! Dense rank-3 flats of PG_{1/2}(9, 2) across trials, the dense-flat colouring check at
//! p = 1, and the sampled per-flat survival frequency.

use pgmatroid::randmodel::{exact_survival_probability, run_census, survival_frequency};
use pgmatroid::{GeometryCtx, Limits, TrialConfig};

fn main() -> pgmatroid::Result<()> {
    let limits = Limits::default();
    let cfg = TrialConfig::new(10, 2, 0.5)
        .with_d(3)
        .with_trials(5)
        .with_seed(7);
    let report = run_census(&cfg, 1, &limits, None)?;
    println!(
        "{} flats, density threshold {}, target {}",
        report.total_flats, report.threshold, report.target
    );
    for r in &report.results {
        println!(
            "  dense {} surviving {} property {}",
            r.dense_count, r.surviving_count, r.property_iii
        );
    }
    println!(
        "exact survival {:?}, pooled {:.4}",
        report.exact_survival_probability, report.pooled_survival_frequency
    );

    let ctx = GeometryCtx::pg(10, 2)?;
    let est = survival_frequency(&ctx, 3, 0.5, 10_000, 7, 1)?;
    println!(
        "sampled survival {:.4} (z = {:.2})",
        est.frequency, est.z_score
    );
    assert_eq!(exact_survival_probability(3, 2, 0.5)?, 92.0 / 128.0);

    let full = TrialConfig::new(6, 2, 1.0)
        .with_d(3)
        .with_trials(1)
        .with_seed(0);
    let claims = run_census(&full, 1, &limits, Some(1))?.claim1.unwrap();
    println!("p = 1, b = 1: {:?}", claims[0]);
    Ok(())
}
