//! Size, rank, colouring and small-flat experiments on PG_p(n-1, q).

use serde::{Deserialize, Serialize};

use super::{chernoff_lower, chernoff_upper, run_indexed, sample_pgp, trial_rng, TrialConfig};
use crate::colouring::colouring_number;
use crate::error::Result;
use crate::limits::{guard, Limits};
use crate::matroid::{PointSet, SubMatroid};
use crate::projgeom::{pivot_profiles, qbinom, Flat, GeometryCtx};

use num_traits::ToPrimitive;

/// One CSV row: the per-trial statistic and whether it fell in the band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_index: usize,
    pub statistic: f64,
    pub in_band: bool,
}

fn fraction(rows: &[TrialRow]) -> f64 {
    rows.iter().filter(|r| r.in_band).count() as f64 / rows.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub config: TrialConfig,
    /// Exact expectation p·(q^n-1)/(q-1); the band is centred here.
    pub expectation: f64,
    /// p·q^n/(q-1), the asymptotic form of the expectation.
    pub asymptotic_center: f64,
    pub band: (f64, f64),
    pub in_band_fraction: f64,
    pub out_of_band_fraction: f64,
    /// exp(-δ²μ/3) and exp(-δ²μ/2); absent when δ > 1.
    pub chernoff_upper: Option<f64>,
    pub chernoff_lower: Option<f64>,
    pub out_of_band_bound: Option<f64>,
    pub rows: Vec<TrialRow>,
}

/// Fraction of trials with |E_p| inside (1±δ)·p·(q^n-1)/(q-1).
pub fn run_size_experiment(cfg: &TrialConfig, workers: usize) -> Result<SizeReport> {
    cfg.validate()?;
    let ctx = cfg.geometry()?;
    let mu = cfg.p * cfg.points_f64();
    let band = ((1.0 - cfg.delta) * mu, (1.0 + cfg.delta) * mu);
    let rows = run_indexed(workers, cfg.trials, |t| {
        let m = sample_pgp(&ctx, cfg.p, &mut trial_rng(cfg.seed, t as u64));
        let size = m.len() as f64;
        Ok(TrialRow {
            trial_index: t,
            statistic: size,
            in_band: band.0 <= size && size <= band.1,
        })
    })?;
    let upper = chernoff_upper(mu, cfg.delta).ok();
    let lower = chernoff_lower(mu, cfg.delta).ok();
    let in_band_fraction = fraction(&rows);
    Ok(SizeReport {
        config: cfg.clone(),
        expectation: mu,
        asymptotic_center: cfg.p * (cfg.q as f64).powi(cfg.n as i32) / (cfg.q as f64 - 1.0),
        band,
        in_band_fraction,
        out_of_band_fraction: 1.0 - in_band_fraction,
        chernoff_upper: upper,
        chernoff_lower: lower,
        out_of_band_bound: upper.zip(lower).map(|(u, l)| (u + l).min(1.0)),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub config: TrialConfig,
    pub full_rank_fraction: f64,
    /// ln of ((q^n-1)/(q-1))·(1-p)^(q^(n-1)).
    pub ln_union_bound: f64,
    pub log10_union_bound: f64,
    pub union_bound: f64,
    pub rows: Vec<TrialRow>,
}

/// Fraction of trials where E_p spans, against the hyperplane union bound.
pub fn run_rank_experiment(cfg: &TrialConfig, workers: usize) -> Result<RankReport> {
    cfg.validate()?;
    let ctx = cfg.geometry()?;
    let rows = run_indexed(workers, cfg.trials, |t| {
        let m = sample_pgp(&ctx, cfg.p, &mut trial_rng(cfg.seed, t as u64));
        let r = m.full_rank();
        Ok(TrialRow {
            trial_index: t,
            statistic: r as f64,
            in_band: r == cfg.n,
        })
    })?;
    let ln_bound =
        cfg.points_f64().ln() + (cfg.q as f64).powi(cfg.n as i32 - 1) * (1.0 - cfg.p).ln();
    Ok(RankReport {
        config: cfg.clone(),
        full_rank_fraction: fraction(&rows),
        ln_union_bound: ln_bound,
        log10_union_bound: ln_bound / std::f64::consts::LN_10,
        union_bound: ln_bound.exp(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColouringReport {
    pub config: TrialConfig,
    /// p·q^n/((q-1)·n)
    pub center: f64,
    pub band: (f64, f64),
    pub in_band_fraction: f64,
    pub rows: Vec<TrialRow>,
}

/// Fraction of trials with col(PG_p) inside (1±δ)·p·q^n/((q-1)·n).
pub fn run_colouring_experiment(
    cfg: &TrialConfig,
    workers: usize,
    limits: &Limits,
) -> Result<ColouringReport> {
    cfg.validate()?;
    let ctx = cfg.geometry()?;
    guard(
        "points for exact colouring",
        ctx.point_count() as u128,
        limits.max_colouring_points,
    )?;
    let center = cfg.p * (cfg.q as f64).powi(cfg.n as i32) / ((cfg.q as f64 - 1.0) * cfg.n as f64);
    let band = ((1.0 - cfg.delta) * center, (1.0 + cfg.delta) * center);
    let rows = run_indexed(workers, cfg.trials, |t| {
        let m = sample_pgp(&ctx, cfg.p, &mut trial_rng(cfg.seed, t as u64));
        let k = colouring_number(&m).0 as f64;
        Ok(TrialRow {
            trial_index: t,
            statistic: k,
            in_band: band.0 <= k && k <= band.1,
        })
    })?;
    Ok(ColouringReport {
        config: cfg.clone(),
        center,
        band,
        in_band_fraction: fraction(&rows),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallFlatOutcome {
    pub holds: bool,
    /// (1+δ)·p·q^n/((q-1)·n)
    pub slope: f64,
    pub flats_checked: u64,
    pub violating_flat: Option<Flat>,
    pub trace_size: Option<usize>,
    pub trace_rank: Option<usize>,
}

/// Total number of flats of all positive ranks, guarded.
fn all_flats_guard(ctx: &GeometryCtx, limits: &Limits) -> Result<()> {
    let total = (1..=ctx.n())
        .map(|d| {
            qbinom(ctx.n() as i64, d as i64, ctx.q())
                .unwrap()
                .to_u128()
                .unwrap_or(u128::MAX)
        })
        .fold(0u128, |a, b| a.saturating_add(b));
    guard("flats in an all-ranks scan", total, limits.max_all_flats)
}

fn min_rank_for(size: usize, q: u32) -> usize {
    // A rank-r set has at most (q^r-1)/(q-1) points.
    let (mut r, mut cap, mut pow) = (0usize, 0u128, 1u128);
    while cap < size as u128 {
        cap += pow;
        pow *= q as u128;
        r += 1;
    }
    r
}

struct FlatViolation {
    flat: Flat,
    size: usize,
    rank: usize,
}

/// Scans every flat in enumeration order against each ground set; returns per
/// ground set the violation count and the first violation.
fn small_flat_scan(
    ctx: &std::sync::Arc<GeometryCtx>,
    grounds: &[PointSet],
    slope: f64,
    workers: usize,
) -> Result<Vec<(u64, Option<FlatViolation>)>> {
    let chunks: Vec<(usize, Vec<usize>)> = (1..=ctx.n())
        .flat_map(|d| pivot_profiles(ctx.n(), d).into_iter().map(move |p| (d, p)))
        .collect();
    let per_chunk = run_indexed(workers, chunks.len(), |ci| {
        let (_, profile) = &chunks[ci];
        let mut out: Vec<(u64, Option<FlatViolation>)> =
            grounds.iter().map(|_| (0, None)).collect();
        let mut pts = Vec::new();
        let mut trace = Vec::new();
        for flat in ctx.flats_with_profile(profile.clone()) {
            ctx.flat_points_into(&flat, &mut pts);
            for (g, slot) in grounds.iter().zip(out.iter_mut()) {
                trace.clear();
                trace.extend(pts.iter().copied().filter(|&i| g.contains(i)));
                let s = trace.len();
                if s == 0 || (s as f64) <= slope * min_rank_for(s, ctx.q()) as f64 {
                    continue;
                }
                let r = ctx.rank_of(&trace);
                if (s as f64) > slope * r as f64 {
                    slot.0 += 1;
                    if slot.1.is_none() {
                        slot.1 = Some(FlatViolation {
                            flat: flat.clone(),
                            size: s,
                            rank: r,
                        });
                    }
                }
            }
        }
        Ok(out)
    })?;
    let mut total: Vec<(u64, Option<FlatViolation>)> = grounds.iter().map(|_| (0, None)).collect();
    for chunk in per_chunk {
        for (acc, (count, first)) in total.iter_mut().zip(chunk) {
            acc.0 += count;
            if acc.1.is_none() {
                acc.1 = first;
            }
        }
    }
    Ok(total)
}

fn slope_for(ctx: &GeometryCtx, p: f64, delta: f64) -> f64 {
    (1.0 + delta) * p * (ctx.q() as f64).powi(ctx.n() as i32)
        / ((ctx.q() as f64 - 1.0) * ctx.n() as f64)
}

/// Checks |E∩F| ≤ (1+δ)·p·q^n/((q-1)·n)·r(E∩F) for every flat F of the ambient geometry.
pub fn check_small_flat(
    m: &SubMatroid,
    p: f64,
    delta: f64,
    limits: &Limits,
) -> Result<SmallFlatOutcome> {
    let ctx = m.ctx();
    all_flats_guard(ctx, limits)?;
    let slope = slope_for(ctx, p, delta);
    let (_, first) = small_flat_scan(ctx, std::slice::from_ref(m.ground()), slope, 1)?
        .pop()
        .unwrap();
    let flats_checked = (1..=ctx.n())
        .map(|d| {
            qbinom(ctx.n() as i64, d as i64, ctx.q())
                .unwrap()
                .to_u64()
                .unwrap_or(u64::MAX)
        })
        .sum();
    Ok(SmallFlatOutcome {
        holds: first.is_none(),
        slope,
        flats_checked,
        trace_size: first.as_ref().map(|v| v.size),
        trace_rank: first.as_ref().map(|v| v.rank),
        violating_flat: first.map(|v| v.flat),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankFailureBound {
    pub rank: usize,
    /// [n,t]_q · (q^t (1-p)^(q^(t-1)) + exp(-δ²p q^(t-1)/3)), in log space.
    pub ln_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallFlatReport {
    pub config: TrialConfig,
    pub slope: f64,
    /// Whether n ≥ 1/((1+δ)p), which makes rank-1 flats safe.
    pub rank_one_proviso: bool,
    pub violation_frequency: f64,
    /// Ranks t ≥ n - 2·log_q n and their per-rank union bounds.
    pub rank_bounds: Vec<RankFailureBound>,
    /// Sum of the per-rank bounds (may exceed 1 at small n).
    pub failure_bound: f64,
    /// Trial rows: statistic is the number of violating flats.
    pub rows: Vec<TrialRow>,
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Monte Carlo frequency of small-flat failures next to the union bound over large ranks.
pub fn run_small_flat_experiment(
    cfg: &TrialConfig,
    workers: usize,
    limits: &Limits,
) -> Result<SmallFlatReport> {
    cfg.validate()?;
    let ctx = cfg.geometry()?;
    all_flats_guard(&ctx, limits)?;
    let slope = slope_for(&ctx, cfg.p, cfg.delta);
    let grounds: Vec<PointSet> = run_indexed(workers, cfg.trials, |t| {
        Ok(sample_pgp(&ctx, cfg.p, &mut trial_rng(cfg.seed, t as u64))
            .ground()
            .clone())
    })?;
    let scan = small_flat_scan(&ctx, &grounds, slope, workers)?;
    let rows: Vec<TrialRow> = scan
        .iter()
        .enumerate()
        .map(|(t, (count, _))| TrialRow {
            trial_index: t,
            statistic: *count as f64,
            in_band: *count == 0,
        })
        .collect();

    let (n, q, p) = (cfg.n as f64, cfg.q as f64, cfg.p);
    let t_min = (n - 2.0 * n.ln() / q.ln()).ceil().max(1.0) as usize;
    let mut rank_bounds = Vec::new();
    for t in t_min..=cfg.n {
        let ln_flats = ln_biguint(&qbinom(cfg.n as i64, t as i64, cfg.q)?);
        let q_t1 = q.powi(t as i32 - 1);
        let ln_rank = t as f64 * q.ln() + q_t1 * (1.0 - p).ln();
        let ln_size = -cfg.delta * cfg.delta * p * q_t1 / 3.0;
        rank_bounds.push(RankFailureBound {
            rank: t,
            ln_bound: ln_flats + ln_add(ln_rank, ln_size),
        });
    }
    let failure_bound = rank_bounds.iter().map(|r| r.ln_bound.exp()).sum();
    Ok(SmallFlatReport {
        config: cfg.clone(),
        slope,
        rank_one_proviso: n >= 1.0 / ((1.0 + cfg.delta) * p),
        violation_frequency: 1.0 - fraction(&rows),
        rank_bounds,
        failure_bound,
        rows,
    })
}

pub(crate) fn ln_biguint(x: &num_bigint::BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}
