//! Points, flats and Gaussian binomials of PG(n-1, q).
//!
//! A point is the canonical representative of a 1-dimensional subspace of
//! GF(q)^n: its first nonzero coordinate is 1. Points are numbered in
//! lexicographic order of their coordinate vectors, so for q = 2 the index of
//! a point is its packed bit pattern minus one.
//!
//! A flat is a subspace, stored as the reduced row-echelon basis of the span.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldSpec};
use crate::limits::{guard, Limits};
use crate::linalg::{pack_binary, rref, unpack_binary, RankBasis};

/// Number of points of PG(n-1, q), i.e. (q^n - 1)/(q - 1), if it fits.
pub fn point_count(n: usize, q: u32) -> Option<u128> {
    let mut total: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..n {
        total = total.checked_add(power)?;
        power = power.checked_mul(q as u128)?;
    }
    Some(total)
}

/// Gaussian binomial coefficient, by the recurrence
/// `[n,d] = [n-1,d-1] + q^d [n-1,d]` in exact integers.
pub fn qbinom(n: i64, d: i64, q: u32) -> Result<BigUint> {
    if d < 0 || d > n {
        return Err(Error::InvalidRank { d, n });
    }
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must be at least 2"
        )));
    }
    let (n, d) = (n as usize, d as usize);
    let q = BigUint::from(q);
    let q_pow: Vec<BigUint> = (0..=d).map(|j| q.pow(j as u32)).collect();
    // row[j] holds [m, j] for the current m.
    let mut row = vec![BigUint::zero(); d + 1];
    row[0] = BigUint::one();
    for m in 1..=n {
        for j in (1..=d.min(m)).rev() {
            let lower = &row[j - 1];
            let next = lower + &q_pow[j] * &row[j];
            row[j] = next;
        }
    }
    Ok(row.swap_remove(d))
}

pub fn qbinom_u128(n: usize, d: usize, q: u32) -> Option<u128> {
    qbinom(n as i64, d as i64, q).ok()?.to_u128()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub index: usize,
    pub coords: Vec<Elem>,
}

/// A subspace in reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flat {
    rows: Vec<Vec<Elem>>,
}

impl Flat {
    /// Wraps rows that are already in reduced row-echelon form.
    pub fn from_rref(rows: Vec<Vec<Elem>>) -> Self {
        Flat { rows }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .position(|&x| x != 0)
                    .expect("RREF rows are nonzero")
            })
            .collect()
    }

    /// Checks the RREF shape: increasing pivots equal to 1, cleared pivot columns.
    pub fn is_rref(&self) -> bool {
        let Some(pivots) = self
            .rows
            .iter()
            .map(|r| r.iter().position(|&x| x != 0))
            .collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        pivots.windows(2).all(|w| w[0] < w[1])
            && pivots.iter().enumerate().all(|(i, &pc)| {
                self.rows[i][pc] == 1
                    && self
                        .rows
                        .iter()
                        .enumerate()
                        .all(|(j, r)| j == i || r[pc] == 0)
            })
    }
}

/// The point table of PG(n-1, q).
#[derive(Debug)]
pub struct GeometryCtx {
    n: usize,
    field: FieldSpec,
    len: usize,
    coords: Vec<Elem>,
    packed: Vec<u64>,
}

impl GeometryCtx {
    pub fn new(n: usize, field: FieldSpec) -> Result<Arc<Self>> {
        Self::with_limits(n, field, &Limits::default())
    }

    /// PG(n-1, q) for a prime power q.
    pub fn pg(n: usize, q: u32) -> Result<Arc<Self>> {
        Self::new(n, FieldSpec::from_order(q)?)
    }

    pub fn with_limits(n: usize, field: FieldSpec, limits: &Limits) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::InvalidDimension);
        }
        let count = point_count(n, field.q()).unwrap_or(u128::MAX);
        guard("point table size", count, limits.max_points)?;
        let len = count as usize;
        let q = field.q();

        let mut coords = Vec::with_capacity(len * n);
        // Leading 1 at position `lead`, free tail after it. Groups with a later
        // leading position sort first lexicographically.
        for lead in (0..n).rev() {
            let tail_len = n - 1 - lead;
            let mut tail = vec![0 as Elem; tail_len];
            loop {
                coords.extend(std::iter::repeat_n(0, lead));
                coords.push(1);
                coords.extend_from_slice(&tail);
                if !odometer(&mut tail, q) {
                    break;
                }
            }
        }
        debug_assert_eq!(coords.len(), len * n);

        let packed = if field.is_binary() && n <= 64 {
            coords.chunks(n).map(pack_binary).collect()
        } else {
            Vec::new()
        };
        Ok(Arc::new(GeometryCtx {
            n,
            field,
            len,
            coords,
            packed,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn point_count(&self) -> usize {
        self.len
    }

    /// True when points are available as packed `u64` masks.
    pub fn is_packed(&self) -> bool {
        !self.packed.is_empty()
    }

    pub fn coords(&self, index: usize) -> &[Elem] {
        &self.coords[index * self.n..(index + 1) * self.n]
    }

    #[inline]
    pub fn packed(&self, index: usize) -> u64 {
        self.packed[index]
    }

    pub fn point(&self, index: usize) -> Point {
        Point {
            index,
            coords: self.coords(index).to_vec(),
        }
    }

    pub fn enumerate_points(&self) -> Vec<Point> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                index,
                count: self.len,
            })
        }
    }

    /// Index of a canonical vector (first nonzero entry equal to 1).
    pub fn index_of(&self, coords: &[Elem]) -> Option<usize> {
        if coords.len() != self.n {
            return None;
        }
        let lead = coords.iter().position(|&x| x != 0)?;
        if coords[lead] != 1 {
            return None;
        }
        let q = self.q() as usize;
        let tail_len = self.n - 1 - lead;
        // Points whose leading 1 sits further right come first.
        let before = (q.pow(tail_len as u32) - 1) / (q - 1);
        let tail = coords[lead + 1..]
            .iter()
            .fold(0usize, |acc, &x| acc * q + x as usize);
        Some(before + tail)
    }

    /// Scales a nonzero vector to its canonical representative.
    pub fn normalize(&self, v: &[Elem]) -> Option<Vec<Elem>> {
        let lead = v.iter().position(|&x| x != 0)?;
        let scale = self.field.inv(v[lead]).ok()?;
        Some(v.iter().map(|&x| self.field.mul(x, scale)).collect())
    }

    pub fn empty_basis(&self) -> RankBasis {
        if self.is_packed() {
            RankBasis::binary()
        } else {
            RankBasis::general(self.n)
        }
    }

    /// Adds point `index` to `basis`; returns whether the rank went up.
    #[inline]
    pub fn insert_point(&self, basis: &mut RankBasis, index: usize) -> bool {
        if self.is_packed() {
            basis.insert_packed(self.packed[index])
        } else {
            basis.insert_dense(&self.field, self.coords(index))
        }
    }

    /// Dimension of the span of the given points. Panics on an out-of-range index.
    pub fn rank_of(&self, points: &[usize]) -> usize {
        let mut basis = self.empty_basis();
        for &i in points {
            self.insert_point(&mut basis, i);
            if basis.rank() == self.n {
                break;
            }
        }
        basis.rank()
    }

    pub fn closure(&self, points: &[usize]) -> Result<Flat> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        for &i in points {
            self.check_index(i)?;
        }
        let vectors: Vec<Vec<Elem>> = points.iter().map(|&i| self.coords(i).to_vec()).collect();
        Ok(Flat {
            rows: rref(&self.field, self.n, &vectors),
        })
    }

    /// Streams every rank-`d` flat exactly once.
    pub fn enumerate_flats(self: &Arc<Self>, d: usize) -> Result<FlatIter> {
        if d == 0 || d > self.n {
            return Err(Error::InvalidRank {
                d: d as i64,
                n: self.n as i64,
            });
        }
        Ok(FlatIter::new(self.clone(), pivot_profiles(self.n, d)))
    }

    /// Flats of rank `d` whose pivot columns are exactly `profile`.
    pub fn flats_with_profile(self: &Arc<Self>, profile: Vec<usize>) -> FlatIter {
        FlatIter::new(self.clone(), vec![profile])
    }

    /// Points of a flat, in the order of their coefficient vectors relative
    /// to the flat's basis (itself a canonical PG(d-1, q) ordering).
    pub fn flat_points(&self, flat: &Flat) -> Vec<usize> {
        let mut out = Vec::new();
        self.flat_points_into(flat, &mut out);
        out
    }

    pub fn flat_points_into(&self, flat: &Flat, out: &mut Vec<usize>) {
        out.clear();
        let d = flat.rank();
        if self.is_packed() {
            let rows: Vec<u64> = flat.rows.iter().map(|r| pack_binary(r)).collect();
            for local in 1u64..(1u64 << d) {
                let mut mask = 0u64;
                for (j, row) in rows.iter().enumerate() {
                    if (local >> (d - 1 - j)) & 1 == 1 {
                        mask ^= row;
                    }
                }
                out.push(mask as usize - 1);
            }
            return;
        }
        // Coefficient vectors of PG(d-1, q) in canonical order; a leading
        // coefficient of 1 on an RREF basis yields a canonical global vector.
        let q = self.q();
        let f = &self.field;
        let mut v = vec![0 as Elem; self.n];
        for lead in (0..d).rev() {
            let mut tail = vec![0 as Elem; d - 1 - lead];
            loop {
                v.copy_from_slice(&flat.rows[lead]);
                for (k, &c) in tail.iter().enumerate() {
                    if c != 0 {
                        for (x, &r) in v.iter_mut().zip(&flat.rows[lead + 1 + k]) {
                            *x = f.add(*x, f.mul(c, r));
                        }
                    }
                }
                out.push(
                    self.index_of(&v)
                        .expect("leading coefficient 1 keeps vectors canonical"),
                );
                if !odometer(&mut tail, q) {
                    break;
                }
            }
        }
    }

    /// Flat spanned by a packed binary basis. Binary geometries only.
    pub fn flat_from_packed(&self, rows: &[u64]) -> Flat {
        let vectors: Vec<Vec<Elem>> = rows.iter().map(|&r| unpack_binary(r, self.n)).collect();
        Flat {
            rows: rref(&self.field, self.n, &vectors),
        }
    }
}

/// Increments `digits` as a base-q counter (last digit fastest); false on wrap-around.
pub(crate) fn odometer(digits: &mut [Elem], q: u32) -> bool {
    for x in digits.iter_mut().rev() {
        *x += 1;
        if *x < q {
            return true;
        }
        *x = 0;
    }
    false
}

/// All d-subsets of 0..n in lexicographic order.
pub fn pivot_profiles(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if d > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..d).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..d).rev().find(|&i| cur[i] < n - d + i) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Iterator over flats: pivot profiles in order, free entries filled as an odometer.
pub struct FlatIter {
    ctx: Arc<GeometryCtx>,
    profiles: std::vec::IntoIter<Vec<usize>>,
    current: Option<ProfileState>,
}

struct ProfileState {
    template: Vec<Vec<Elem>>,
    free: Vec<(usize, usize)>,
    digits: Vec<Elem>,
    done: bool,
}

impl FlatIter {
    fn new(ctx: Arc<GeometryCtx>, profiles: Vec<Vec<usize>>) -> Self {
        FlatIter {
            ctx,
            profiles: profiles.into_iter(),
            current: None,
        }
    }

    fn start_profile(&self, profile: &[usize]) -> ProfileState {
        let n = self.ctx.n;
        let mut template = vec![vec![0 as Elem; n]; profile.len()];
        let mut free = Vec::new();
        for (i, &pc) in profile.iter().enumerate() {
            template[i][pc] = 1;
            for col in pc + 1..n {
                if !profile.contains(&col) {
                    free.push((i, col));
                }
            }
        }
        let digits = vec![0; free.len()];
        ProfileState {
            template,
            free,
            digits,
            done: false,
        }
    }
}

impl Iterator for FlatIter {
    type Item = Flat;

    fn next(&mut self) -> Option<Flat> {
        loop {
            if let Some(state) = self.current.as_mut() {
                if !state.done {
                    let mut rows = state.template.clone();
                    for (&(r, c), &x) in state.free.iter().zip(&state.digits) {
                        rows[r][c] = x;
                    }
                    state.done = !odometer(&mut state.digits, self.ctx.q());
                    return Some(Flat { rows });
                }
            }
            let profile = self.profiles.next()?;
            self.current = Some(self.start_profile(&profile));
        }
    }
}
