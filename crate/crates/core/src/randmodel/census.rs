//! Dense-flat census over all rank-d flats of the ambient geometry.

use std::sync::{Arc, OnceLock};

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::experiments::ln_biguint;
use super::{run_indexed, sample_pgp, trial_rng, TrialConfig, TrialRow, AUX_STREAM};
use crate::colouring::colouring_number;
use crate::error::{Error, Result};
use crate::gf::Elem;
use crate::limits::{guard, Limits};
use crate::linalg::rref;
use crate::matroid::{PointSet, SubMatroid};
use crate::projgeom::{pivot_profiles, qbinom, Flat, GeometryCtx};

/// Largest local point count for which per-pattern tables are kept.
const TABLE_POINTS: usize = 16;

/// ½·p·(q^d-1)/(q-1)
fn density_threshold(d: usize, q: u32, p: f64) -> f64 {
    0.5 * p * ((q as f64).powi(d as i32) - 1.0) / (q as f64 - 1.0)
}

/// Rank and colouring number of every subset of PG(d-1, q), indexed by the
/// bitmask over local point order. Colouring numbers are filled on demand.
pub struct TraceTable {
    local: Arc<GeometryCtx>,
    ranks: Option<Vec<u8>>,
    cols: Option<Vec<OnceLock<u32>>>,
}

impl TraceTable {
    pub fn new(d: usize, ambient: &GeometryCtx) -> Result<Self> {
        let local = GeometryCtx::new(d, ambient.field().clone())?;
        let m = local.point_count();
        let (ranks, cols) = if m <= TABLE_POINTS {
            let mut idx = Vec::with_capacity(m);
            let ranks = (0..1u32 << m)
                .map(|mask| {
                    idx.clear();
                    idx.extend((0..m).filter(|&j| mask >> j & 1 == 1));
                    local.rank_of(&idx) as u8
                })
                .collect();
            (
                Some(ranks),
                Some((0..1usize << m).map(|_| OnceLock::new()).collect()),
            )
        } else {
            (None, None)
        };
        Ok(TraceTable { local, ranks, cols })
    }

    pub fn local(&self) -> &Arc<GeometryCtx> {
        &self.local
    }

    /// Number of points of a rank-d flat.
    pub fn points(&self) -> usize {
        self.local.point_count()
    }

    pub fn is_tabulated(&self) -> bool {
        self.ranks.is_some()
    }

    /// Rank of the local pattern; only valid when tabulated.
    pub fn rank(&self, mask: u32) -> usize {
        self.ranks.as_ref().expect("pattern table")[mask as usize] as usize
    }

    /// Colouring number of the local pattern; only valid when tabulated.
    pub fn col(&self, mask: u32) -> usize {
        let cell = &self.cols.as_ref().expect("pattern table")[mask as usize];
        *cell.get_or_init(|| {
            let idx: Vec<usize> = (0..self.points()).filter(|&j| mask >> j & 1 == 1).collect();
            let m = SubMatroid::restrict(&self.local, &idx).expect("local indices");
            colouring_number(&m).0 as u32
        }) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub d: usize,
    /// |Z_d|: flats whose trace has rank d and at least `threshold` points.
    pub dense_count: u64,
    /// Flats whose trace has rank d.
    pub surviving_count: u64,
    /// Flats whose trace has at least `threshold` points.
    pub size_dense_count: u64,
    pub total_flats: u64,
    pub threshold: f64,
    /// dense_count ≥ ½·total_flats
    pub property_iii: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Claim1Result {
    pub b: usize,
    pub dense_flats: u64,
    /// Dense flats with col(M|F) ≤ b.
    pub exceptions: u64,
    /// Dense flats with col(M|F) < ⌈|E∩F|/d⌉; always zero for a correct colouring.
    pub edmonds_violations: u64,
    /// ½·p·(q^d-1)/((q-1)·d) > b
    pub threshold_condition_holds: bool,
    pub min_col: Option<usize>,
}

#[derive(Clone, Default)]
struct Tally {
    dense: u64,
    surviving: u64,
    size_dense: u64,
    claim_exceptions: u64,
    edmonds_violations: u64,
    min_col: Option<usize>,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.dense += o.dense;
        self.surviving += o.surviving;
        self.size_dense += o.size_dense;
        self.claim_exceptions += o.claim_exceptions;
        self.edmonds_violations += o.edmonds_violations;
        self.min_col = match (self.min_col, o.min_col) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

fn census_guard(ctx: &GeometryCtx, d: usize, limits: &Limits) -> Result<u64> {
    if d == 0 || d > ctx.n() {
        return Err(Error::InvalidRank {
            d: d as i64,
            n: ctx.n() as i64,
        });
    }
    let total = qbinom(ctx.n() as i64, d as i64, ctx.q())?
        .to_u128()
        .unwrap_or(u128::MAX);
    guard("rank-d flats in a census", total, limits.max_census_flats)?;
    Ok(total as u64)
}

/// One pass over all rank-d flats, tallying every ground set. When `b` is set,
/// colouring numbers of dense traces are computed as well.
fn scan(
    ctx: &Arc<GeometryCtx>,
    d: usize,
    grounds: &[PointSet],
    threshold: f64,
    b: Option<usize>,
    table: &TraceTable,
    workers: usize,
) -> Result<Vec<Tally>> {
    let profiles = pivot_profiles(ctx.n(), d);
    let per_chunk = run_indexed(workers, profiles.len(), |ci| {
        let mut tallies = vec![Tally::default(); grounds.len()];
        let mut pts = Vec::new();
        let mut trace = Vec::new();
        for flat in ctx.flats_with_profile(profiles[ci].clone()) {
            ctx.flat_points_into(&flat, &mut pts);
            for (g, tally) in grounds.iter().zip(tallies.iter_mut()) {
                let (size, rank, mask) = if table.is_tabulated() {
                    let mut mask = 0u32;
                    for (j, &i) in pts.iter().enumerate() {
                        mask |= (g.contains(i) as u32) << j;
                    }
                    (mask.count_ones() as usize, table.rank(mask), Some(mask))
                } else {
                    trace.clear();
                    trace.extend(pts.iter().copied().filter(|&i| g.contains(i)));
                    (trace.len(), ctx.rank_of(&trace), None)
                };
                let big = size as f64 >= threshold;
                tally.size_dense += big as u64;
                if rank < d {
                    continue;
                }
                tally.surviving += 1;
                if !big {
                    continue;
                }
                tally.dense += 1;
                if let Some(b) = b {
                    let col = match mask {
                        Some(mask) => table.col(mask),
                        None => {
                            let m = SubMatroid::restrict(ctx, &trace)?;
                            colouring_number(&m).0
                        }
                    };
                    tally.claim_exceptions += (col <= b) as u64;
                    tally.edmonds_violations += (col < size.div_ceil(d)) as u64;
                    tally.min_col = Some(tally.min_col.map_or(col, |c| c.min(col)));
                }
            }
        }
        Ok(tallies)
    })?;
    let mut total = vec![Tally::default(); grounds.len()];
    for chunk in &per_chunk {
        for (acc, t) in total.iter_mut().zip(chunk) {
            acc.merge(t);
        }
    }
    Ok(total)
}

fn result_from(t: &Tally, d: usize, total_flats: u64, threshold: f64) -> CensusResult {
    CensusResult {
        d,
        dense_count: t.dense,
        surviving_count: t.surviving,
        size_dense_count: t.size_dense,
        total_flats,
        threshold,
        property_iii: 2 * t.dense >= total_flats,
    }
}

fn claim1_condition(d: usize, q: u32, b: usize, p: f64) -> bool {
    density_threshold(d, q, p) / d as f64 > b as f64
}

fn claim1_from(t: &Tally, d: usize, q: u32, b: usize, p: f64) -> Claim1Result {
    Claim1Result {
        b,
        dense_flats: t.dense,
        exceptions: t.claim_exceptions,
        edmonds_violations: t.edmonds_violations,
        threshold_condition_holds: claim1_condition(d, q, b, p),
        min_col: t.min_col,
    }
}

/// Counts dense, surviving rank-d flats of M against ½·[n,d]_q.
pub fn dense_flat_census(
    m: &SubMatroid,
    d: usize,
    p: f64,
    limits: &Limits,
) -> Result<CensusResult> {
    let ctx = m.ctx();
    let total = census_guard(ctx, d, limits)?;
    let table = TraceTable::new(d, ctx)?;
    let threshold = density_threshold(d, ctx.q(), p);
    let t = scan(
        ctx,
        d,
        std::slice::from_ref(m.ground()),
        threshold,
        None,
        &table,
        1,
    )?;
    Ok(result_from(&t[0], d, total, threshold))
}

/// Colouring number of every dense flat of M against b.
pub fn claim1_check(
    m: &SubMatroid,
    d: usize,
    b: usize,
    p: f64,
    limits: &Limits,
) -> Result<Claim1Result> {
    let ctx = m.ctx();
    census_guard(ctx, d, limits)?;
    let table = TraceTable::new(d, ctx)?;
    let threshold = density_threshold(d, ctx.q(), p);
    let t = scan(
        ctx,
        d,
        std::slice::from_ref(m.ground()),
        threshold,
        Some(b),
        &table,
        1,
    )?;
    Ok(claim1_from(&t[0], d, ctx.q(), b, p))
}

/// Probability that a fixed rank-d flat survives as a dense rank-d flat,
/// summed over all keep-patterns.
pub fn exact_survival_probability(d: usize, q: u32, p: f64) -> Result<f64> {
    let ctx = GeometryCtx::pg(d.max(1), q)?;
    let table = TraceTable::new(d, &ctx)?;
    let m = table.points();
    if !table.is_tabulated() {
        return Err(Error::GuardExceeded {
            what: "points in a flat for exact survival",
            actual: m as u128,
            limit: TABLE_POINTS as u128,
        });
    }
    let threshold = density_threshold(d, q, p);
    Ok((0..1u32 << m)
        .filter(|&mask| table.rank(mask) == d && mask.count_ones() as f64 >= threshold)
        .map(|mask| {
            let s = mask.count_ones() as i32;
            p.powi(s) * (1.0 - p).powi(m as i32 - s)
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub samples: usize,
    pub survivors: usize,
    pub frequency: f64,
    pub exact: f64,
    /// Binomial standard deviation of the frequency under the exact probability.
    pub sigma: f64,
    /// (frequency - exact) / sigma
    pub z_score: f64,
}

fn random_flat<R: Rng + ?Sized>(ctx: &GeometryCtx, d: usize, rng: &mut R) -> Flat {
    let (n, q) = (ctx.n(), ctx.q());
    loop {
        let rows: Vec<Vec<Elem>> = (0..d)
            .map(|_| (0..n).map(|_| rng.random_range(0..q)).collect())
            .collect();
        let r = rref(ctx.field(), n, &rows);
        if r.len() == d {
            return Flat::from_rref(r);
        }
    }
}

/// Survival frequency over independent samples, each a uniform rank-d flat
/// with its own independent retention pattern.
pub fn survival_frequency(
    ctx: &Arc<GeometryCtx>,
    d: usize,
    p: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<SurvivalEstimate> {
    if d == 0 || d > ctx.n() {
        return Err(Error::InvalidRank {
            d: d as i64,
            n: ctx.n() as i64,
        });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let exact = exact_survival_probability(d, ctx.q(), p)?;
    let threshold = density_threshold(d, ctx.q(), p);
    let hits = run_indexed(workers, samples, |i| {
        let mut rng = trial_rng(seed, AUX_STREAM + i as u64);
        let flat = random_flat(ctx, d, &mut rng);
        let kept: Vec<usize> = ctx
            .flat_points(&flat)
            .into_iter()
            .filter(|_| rng.random_bool(p))
            .collect();
        Ok(kept.len() as f64 >= threshold && ctx.rank_of(&kept) == d)
    })?;
    let survivors = hits.iter().filter(|&&h| h).count();
    let frequency = survivors as f64 / samples as f64;
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    let z_score = if sigma > 0.0 {
        (frequency - exact) / sigma
    } else {
        0.0
    };
    Ok(SurvivalEstimate {
        samples,
        survivors,
        frequency,
        exact,
        sigma,
        z_score,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub config: TrialConfig,
    pub total_flats: u64,
    pub threshold: f64,
    /// ½·[n,d]_q
    pub target: f64,
    pub results: Vec<CensusResult>,
    pub claim1: Option<Vec<Claim1Result>>,
    /// Trials satisfying dense_count ≥ target.
    pub property_iii_trials: usize,
    /// Σ dense_count / (trials · total_flats). Flats within a trial are correlated.
    pub pooled_survival_frequency: f64,
    pub exact_survival_probability: Option<f64>,
    /// Chernoff bound exp(-p·m/8) on a flat's trace falling under half its mean.
    pub sparse_bound: f64,
    /// Union bound q^d·(1-p)^(q^(d-1)) on a flat's trace losing rank.
    pub rank_loss_bound: f64,
    pub ln_rank_loss_bound: f64,
    /// Markov bound 2·(1-s) on failing the target, s the per-flat survival lower bound.
    pub markov_failure_bound: f64,
    pub ln_total_flats: f64,
    pub rows: Vec<TrialRow>,
}

/// Census of every trial in one pass over the flats. With `b` set, the dense-flat colouring
/// check runs on the same pass.
pub fn run_census(
    cfg: &TrialConfig,
    workers: usize,
    limits: &Limits,
    b: Option<usize>,
) -> Result<CensusReport> {
    cfg.validate()?;
    let ctx = cfg.geometry()?;
    let d = cfg.d;
    let total = census_guard(&ctx, d, limits)?;
    let table = TraceTable::new(d, &ctx)?;
    let threshold = density_threshold(d, cfg.q, cfg.p);
    let grounds: Vec<PointSet> = run_indexed(workers, cfg.trials, |t| {
        Ok(sample_pgp(&ctx, cfg.p, &mut trial_rng(cfg.seed, t as u64))
            .ground()
            .clone())
    })?;
    let tallies = scan(&ctx, d, &grounds, threshold, b, &table, workers)?;
    let results: Vec<CensusResult> = tallies
        .iter()
        .map(|t| result_from(t, d, total, threshold))
        .collect();
    let target = total as f64 / 2.0;
    let rows = results
        .iter()
        .enumerate()
        .map(|(i, r)| TrialRow {
            trial_index: i,
            statistic: r.dense_count as f64,
            in_band: r.property_iii,
        })
        .collect();
    let dense_sum: u64 = results.iter().map(|r| r.dense_count).sum();

    let (q, p) = (cfg.q as f64, cfg.p);
    let m = table.points() as f64;
    let sparse_bound = (-p * m / 8.0).exp();
    let ln_rank_loss = d as f64 * q.ln() + q.powi(d as i32 - 1) * (1.0 - p).ln();
    let rank_loss_bound = ln_rank_loss.exp();
    let s = 1.0 - sparse_bound - rank_loss_bound;
    Ok(CensusReport {
        config: cfg.clone(),
        total_flats: total,
        threshold,
        target,
        property_iii_trials: results.iter().filter(|r| r.property_iii).count(),
        claim1: b.map(|b| {
            tallies
                .iter()
                .map(|t| claim1_from(t, d, cfg.q, b, p))
                .collect()
        }),
        results,
        pooled_survival_frequency: dense_sum as f64 / (cfg.trials as f64 * total as f64),
        exact_survival_probability: exact_survival_probability(d, cfg.q, p).ok(),
        sparse_bound,
        rank_loss_bound,
        ln_rank_loss_bound: ln_rank_loss,
        markov_failure_bound: 2.0 * (1.0 - s),
        ln_total_flats: ln_biguint(&qbinom(cfg.n as i64, d as i64, cfg.q)?),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fano_patterns() {
        let ctx = GeometryCtx::pg(3, 2).unwrap();
        let t = TraceTable::new(3, &ctx).unwrap();
        assert_eq!(t.points(), 7);
        let full_rank = (0..128u32).filter(|&m| t.rank(m) == 3).count();
        assert_eq!(full_rank, 92);
        assert_eq!(t.col(127), 3);
        assert_eq!(t.col(0b111), 2);
    }

    #[test]
    fn survival_probability_fano() {
        assert_eq!(exact_survival_probability(3, 2, 0.5).unwrap(), 92.0 / 128.0);
        assert_eq!(exact_survival_probability(2, 3, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn full_restriction_is_all_dense() {
        let ctx = GeometryCtx::pg(5, 2).unwrap();
        let r = dense_flat_census(&SubMatroid::full(&ctx), 3, 1.0, &Limits::default()).unwrap();
        assert_eq!(r.total_flats, 155);
        assert_eq!(
            (r.dense_count, r.surviving_count, r.size_dense_count),
            (155, 155, 155)
        );
        assert!(r.property_iii);
    }

    #[test]
    fn untabulated_path_agrees() {
        // PG(4,2) flats of rank 5 have 31 points.
        let ctx = GeometryCtx::pg(5, 2).unwrap();
        let m = sample_pgp(&ctx, 0.6, &mut trial_rng(3, 0));
        let r = dense_flat_census(&m, 5, 0.6, &Limits::default()).unwrap();
        let dense = m.len() as f64 >= density_threshold(5, 2, 0.6) && m.full_rank() == 5;
        assert_eq!(r.dense_count, dense as u64);
    }

    #[test]
    fn claim1_on_full_fano_flats() {
        let ctx = GeometryCtx::pg(4, 2).unwrap();
        let full = SubMatroid::full(&ctx);
        let ok = claim1_check(&full, 3, 1, 1.0, &Limits::default()).unwrap();
        assert!(ok.threshold_condition_holds);
        assert_eq!(
            (ok.dense_flats, ok.exceptions, ok.min_col),
            (15, 0, Some(3))
        );
        let bad = claim1_check(&full, 3, 3, 1.0, &Limits::default()).unwrap();
        assert!(!bad.threshold_condition_holds);
        assert_eq!(bad.exceptions, 15);
    }

    #[test]
    fn census_is_worker_independent() {
        let cfg = TrialConfig::new(6, 2, 0.5).with_trials(5).with_seed(4);
        let a = run_census(&cfg, 1, &Limits::default(), Some(1)).unwrap();
        let b = run_census(&cfg, 4, &Limits::default(), Some(1)).unwrap();
        assert_eq!(a, b);
        for r in &a.results {
            assert!(r.dense_count <= r.surviving_count && r.surviving_count <= r.total_flats);
        }
    }

    #[test]
    fn sampled_survival_near_exact() {
        let ctx = GeometryCtx::pg(6, 2).unwrap();
        let est = survival_frequency(&ctx, 3, 0.5, 4000, 1, 2).unwrap();
        assert!(est.z_score.abs() < 4.0, "{est:?}");
    }
}
