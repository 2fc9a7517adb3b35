//! Independent oracles shared by the integration tests. Nothing here calls the
//! library's rank or field code; only prime fields are supported.

#![allow(dead_code)]

use std::sync::Arc;

use pgmatroid::{GeometryCtx, SubMatroid};
use rand::Rng;

/// Rank of integer vectors over Z/p by plain Gaussian elimination.
pub fn rank_mod_p(vectors: &[Vec<u32>], p: u32) -> usize {
    let mut rows: Vec<Vec<u64>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as u64 % p as u64).collect())
        .collect();
    let p = p as u64;
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = mod_pow(rows[rank][col], p - 2, p);
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + p * p - f * y) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Oracle rank of a set of point indices.
pub fn oracle_rank(ctx: &GeometryCtx, points: &[usize]) -> usize {
    let vecs: Vec<Vec<u32>> = points.iter().map(|&i| ctx.coords(i).to_vec()).collect();
    rank_mod_p(&vecs, ctx.q())
}

/// max ⌈|X|/r(X)⌉ over all nonempty subsets X of the ground set.
pub fn all_subsets_edmonds(m: &SubMatroid) -> usize {
    let e = m.elements();
    assert!(e.len() <= 18);
    let mut best = 0;
    let mut subset = Vec::new();
    for mask in 1u32..(1 << e.len()) {
        subset.clear();
        subset.extend((0..e.len()).filter(|&j| mask >> j & 1 == 1).map(|j| e[j]));
        let r = oracle_rank(m.ctx(), &subset);
        if r > 0 {
            best = best.max(subset.len().div_ceil(r));
        }
    }
    best
}

/// Restriction to a uniformly random subset (each point kept with probability 1/2).
pub fn random_restriction<R: Rng>(ctx: &Arc<GeometryCtx>, rng: &mut R) -> SubMatroid {
    let points: Vec<usize> = (0..ctx.point_count())
        .filter(|_| rng.random_bool(0.5))
        .collect();
    SubMatroid::restrict(ctx, &points).unwrap()
}
