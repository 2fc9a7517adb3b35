//! The random restriction PG_p(n-1, q) and the experiments around it.
//!
//! Every trial draws from its own ChaCha8 stream, `stream(seed, trial)`, so
//! results do not depend on how trials are spread over worker threads.
//! Aggregation always happens in trial order.

mod census;
mod experiments;

pub use census::{
    claim1_check, dense_flat_census, exact_survival_probability, run_census, survival_frequency,
    CensusReport, CensusResult, Claim1Result, SurvivalEstimate, TraceTable,
};
pub use experiments::{
    check_small_flat, run_colouring_experiment, run_rank_experiment, run_size_experiment,
    run_small_flat_experiment, ColouringReport, RankReport, SizeReport, SmallFlatOutcome,
    SmallFlatReport, TrialRow,
};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{PointSet, SubMatroid};
use crate::projgeom::GeometryCtx;

/// Parameters shared by the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub q: u32,
    /// Retention probability.
    pub p: f64,
    /// Half-width of the relative concentration band.
    pub delta: f64,
    /// Flat rank for censuses.
    pub d: usize,
    pub b: usize,
    pub c: f64,
    pub trials: usize,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(n: usize, q: u32, p: f64) -> Self {
        TrialConfig {
            n,
            q,
            p,
            delta: 0.1,
            d: 3,
            b: 1,
            c: 1.0,
            trials: 100,
            seed: 0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn with_b(mut self, b: usize) -> Self {
        self.b = b;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p = {} must lie in (0, 1]",
                self.p
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must be positive",
                self.delta
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidDimension);
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Arc<GeometryCtx>> {
        GeometryCtx::pg(self.n, self.q)
    }

    /// Number of points of PG(n-1, q), as a float.
    pub(crate) fn points_f64(&self) -> f64 {
        ((self.q as f64).powi(self.n as i32) - 1.0) / (self.q as f64 - 1.0)
    }
}

/// Independent generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Stream offset reserved for auxiliary sampling that must not overlap trial streams.
pub(crate) const AUX_STREAM: u64 = 1 << 40;

/// Keeps each point of the geometry independently with probability `p`.
pub fn sample_pgp<R: Rng + ?Sized>(ctx: &Arc<GeometryCtx>, p: f64, rng: &mut R) -> SubMatroid {
    let mut ground = PointSet::empty(ctx.point_count());
    for i in 0..ctx.point_count() {
        if rng.random_bool(p) {
            ground.insert(i);
        }
    }
    SubMatroid::from_set(ctx.clone(), ground)
}

/// Runs `f` on `0..count`, returning results in index order.
pub(crate) fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

// --- tail bounds ---

/// P(X ≥ x) ≤ μ/x for nonnegative X.
pub fn markov(mu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !(mu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "markov needs mu >= 0 and x > 0 (got {mu}, {x})"
        )));
    }
    Ok(mu / x)
}

fn check_chernoff(mu: f64, delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) || !(mu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "chernoff needs mu >= 0 and 0 <= delta <= 1 (got {mu}, {delta})"
        )));
    }
    Ok(())
}

/// P(X ≥ (1+δ)μ) ≤ exp(-δ²μ/3).
pub fn chernoff_upper(mu: f64, delta: f64) -> Result<f64> {
    check_chernoff(mu, delta)?;
    Ok((-delta * delta * mu / 3.0).exp())
}

/// P(X ≤ (1-δ)μ) ≤ exp(-δ²μ/2).
pub fn chernoff_lower(mu: f64, delta: f64) -> Result<f64> {
    check_chernoff(mu, delta)?;
    Ok((-delta * delta * mu / 2.0).exp())
}

/// Markov and Chernoff bounds next to simulated tail frequencies of a
/// Binomial(vars, prob) sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub vars: u64,
    pub prob: f64,
    pub mu: f64,
    pub delta: f64,
    pub markov_x: f64,
    pub markov: f64,
    pub chernoff_upper: f64,
    pub chernoff_lower: f64,
    pub ln_chernoff_upper: f64,
    pub ln_chernoff_lower: f64,
    pub trials: usize,
    /// Fraction of trials with X ≥ x.
    pub empirical_markov_tail: f64,
    /// Fraction of trials with X ≥ (1+δ)μ.
    pub empirical_upper_tail: f64,
    /// Fraction of trials with X ≤ (1-δ)μ.
    pub empirical_lower_tail: f64,
}

pub fn bound_report(
    vars: u64,
    prob: f64,
    delta: f64,
    markov_x: f64,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidParameter(format!(
            "prob = {prob} must lie in [0, 1]"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mu = vars as f64 * prob;
    let markov_bound = markov(mu, markov_x)?;
    let upper = chernoff_upper(mu, delta)?;
    let lower = chernoff_lower(mu, delta)?;
    let sums = run_indexed(workers, trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        Ok((0..vars).filter(|_| rng.random_bool(prob)).count() as f64)
    })?;
    let freq = |pred: &dyn Fn(f64) -> bool| {
        sums.iter().filter(|&&x| pred(x)).count() as f64 / trials as f64
    };
    Ok(BoundReport {
        vars,
        prob,
        mu,
        delta,
        markov_x,
        markov: markov_bound,
        chernoff_upper: upper,
        chernoff_lower: lower,
        ln_chernoff_upper: -delta * delta * mu / 3.0,
        ln_chernoff_lower: -delta * delta * mu / 2.0,
        trials,
        empirical_markov_tail: freq(&|x| x >= markov_x),
        empirical_upper_tail: freq(&|x| x >= (1.0 + delta) * mu),
        empirical_lower_tail: freq(&|x| x <= (1.0 - delta) * mu),
    })
}
