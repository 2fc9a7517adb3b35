//! Row reduction over GF(q).
//!
//! Binary vectors are packed into a single `u64` (coordinate 0 in the most
//! significant used bit); everything else is a dense slice of field elements.

use crate::gf::{Elem, FieldSpec};

/// Incremental echelon basis answering "is this vector in the span so far?".
/// The binary variant stays inline; a basis is built per rank query.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum RankBasis {
    Binary {
        /// `rows[b]` has its highest set bit at `b`, or is zero.
        rows: [u64; 64],
        rank: usize,
    },
    General {
        n: usize,
        /// Rows with their pivot column; pivot entry is 1 and every later row
        /// is zero in the pivots of earlier rows.
        rows: Vec<(usize, Vec<Elem>)>,
    },
}

impl RankBasis {
    pub fn binary() -> Self {
        RankBasis::Binary {
            rows: [0; 64],
            rank: 0,
        }
    }

    pub fn general(n: usize) -> Self {
        RankBasis::General {
            n,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            RankBasis::Binary { rank, .. } => *rank,
            RankBasis::General { rows, .. } => rows.len(),
        }
    }

    /// Inserts a packed binary vector; returns whether it raised the rank.
    #[inline]
    pub fn insert_packed(&mut self, mut v: u64) -> bool {
        let RankBasis::Binary { rows, rank } = self else {
            panic!("packed insert into a non-binary basis");
        };
        while v != 0 {
            let b = 63 - v.leading_zeros() as usize;
            if rows[b] == 0 {
                rows[b] = v;
                *rank += 1;
                return true;
            }
            v ^= rows[b];
        }
        false
    }

    /// Inserts a dense vector; returns whether it raised the rank.
    pub fn insert_dense(&mut self, field: &FieldSpec, v: &[Elem]) -> bool {
        match self {
            RankBasis::Binary { .. } => self.insert_packed(pack_binary(v)),
            RankBasis::General { n, rows } => {
                debug_assert_eq!(v.len(), *n);
                let mut w = v.to_vec();
                reduce_by(field, rows, &mut w);
                let Some(pivot) = w.iter().position(|&x| x != 0) else {
                    return false;
                };
                let scale = field.inv(w[pivot]).expect("nonzero pivot");
                for x in w.iter_mut() {
                    *x = field.mul(*x, scale);
                }
                rows.push((pivot, w));
                true
            }
        }
    }
}

fn reduce_by(field: &FieldSpec, rows: &[(usize, Vec<Elem>)], w: &mut [Elem]) {
    for (pivot, row) in rows {
        let coef = w[*pivot];
        if coef == 0 {
            continue;
        }
        for (x, &r) in w.iter_mut().zip(row) {
            if r != 0 {
                *x = field.sub(*x, field.mul(coef, r));
            }
        }
    }
}

/// Packs a 0/1 vector with coordinate 0 as the most significant bit.
pub fn pack_binary(v: &[Elem]) -> u64 {
    v.iter().fold(0u64, |acc, &x| (acc << 1) | (x as u64 & 1))
}

pub fn unpack_binary(mask: u64, n: usize) -> Vec<Elem> {
    (0..n)
        .map(|i| ((mask >> (n - 1 - i)) & 1) as Elem)
        .collect()
}

/// Reduced row-echelon form of the span of `vectors`, zero rows dropped.
pub fn rref(field: &FieldSpec, n: usize, vectors: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let mut m: Vec<Vec<Elem>> = vectors.to_vec();
    let mut rank = 0;
    for col in 0..n {
        let Some(sel) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, sel);
        let scale = field.inv(m[rank][col]).expect("nonzero pivot");
        for x in m[rank].iter_mut() {
            *x = field.mul(*x, scale);
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let coef = row[col];
            for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(coef, pv));
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    m
}
