//! PG_p(n-1, q): one sample, then the size, rank and colouring experiments.

use pgmatroid::randmodel::{
    run_colouring_experiment, run_rank_experiment, run_size_experiment, trial_rng,
};
use pgmatroid::{colouring_number, sample_pgp, GeometryCtx, Limits, TrialConfig};

fn main() -> pgmatroid::Result<()> {
    let ctx = GeometryCtx::pg(8, 2)?;
    let m = sample_pgp(&ctx, 0.5, &mut trial_rng(1, 0));
    println!(
        "sample: {} of {} points, rank {}, col {}",
        m.len(),
        ctx.point_count(),
        m.full_rank(),
        colouring_number(&m).0
    );

    let cfg = TrialConfig::new(10, 2, 0.5)
        .with_delta(0.1)
        .with_trials(200)
        .with_seed(1);
    let size = run_size_experiment(&cfg, 1)?;
    println!(
        "size: mean {:.1}, band {:.1}..{:.1}, in band {:.3}, Chernoff tails {:?} / {:?}",
        size.expectation,
        size.band.0,
        size.band.1,
        size.in_band_fraction,
        size.chernoff_upper,
        size.chernoff_lower
    );

    let rank = run_rank_experiment(&cfg.clone().with_trials(200), 1)?;
    println!(
        "rank: full in {:.3} of trials, log10 union bound {:.1}",
        rank.full_rank_fraction, rank.log10_union_bound
    );

    let col = run_colouring_experiment(&cfg.with_trials(30), 1, &Limits::default())?;
    println!(
        "colouring: centre {:.2}, band {:.1}..{:.1}, in band {:.3}",
        col.center, col.band.0, col.band.1, col.in_band_fraction
    );
    Ok(())
}
