//! Restrictions PG(n-1, q)|E as linear matroids.

use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::limits::{guard, Limits};
use crate::projgeom::{qbinom, GeometryCtx};

/// Membership bitmap over a geometry's point table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    words: Vec<u64>,
    universe: usize,
}

impl PointSet {
    pub fn empty(universe: usize) -> Self {
        PointSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

/// The restriction of an ambient projective geometry to a ground set.
#[derive(Clone, Debug)]
pub struct SubMatroid {
    ctx: Arc<GeometryCtx>,
    ground: PointSet,
    elements: Vec<usize>,
}

impl SubMatroid {
    pub fn restrict(ctx: &Arc<GeometryCtx>, points: &[usize]) -> Result<Self> {
        let mut ground = PointSet::empty(ctx.point_count());
        for &i in points {
            ctx.check_index(i)?;
            ground.insert(i);
        }
        Ok(Self::from_set(ctx.clone(), ground))
    }

    /// The whole geometry PG(n-1, q).
    pub fn full(ctx: &Arc<GeometryCtx>) -> Self {
        Self::from_set(ctx.clone(), PointSet::full(ctx.point_count()))
    }

    pub fn from_set(ctx: Arc<GeometryCtx>, ground: PointSet) -> Self {
        assert_eq!(ground.universe(), ctx.point_count());
        let elements = ground.iter().collect();
        SubMatroid {
            ctx,
            ground,
            elements,
        }
    }

    pub fn ctx(&self) -> &Arc<GeometryCtx> {
        &self.ctx
    }

    pub fn ground(&self) -> &PointSet {
        &self.ground
    }

    /// Ground set as sorted point indices.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.ground.contains(i)
    }

    /// M|Y for `subset` ⊆ ground.
    pub fn restriction(&self, subset: &[usize]) -> Result<SubMatroid> {
        self.check_subset(subset)?;
        SubMatroid::restrict(&self.ctx, subset)
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        match subset.iter().find(|&&i| !self.ground.contains(i)) {
            Some(&i) => Err(Error::NotInGround(i)),
            None => Ok(()),
        }
    }

    pub fn rank(&self, subset: &[usize]) -> Result<usize> {
        self.check_subset(subset)?;
        Ok(self.ctx.rank_of(subset))
    }

    pub fn full_rank(&self) -> usize {
        self.ctx.rank_of(&self.elements)
    }

    pub fn is_independent(&self, subset: &[usize]) -> Result<bool> {
        Ok(self.rank(subset)? == subset.len())
    }

    /// max ⌈|X|/r(X)⌉ over traces X = F ∩ E of every ambient flat F.
    ///
    /// The maximum over all subsets is attained on a closed set, and every
    /// closed set of the restriction is such a trace.
    pub fn edmonds_bruteforce(&self, limits: &Limits) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::EmptyGround);
        }
        let n = self.ctx.n();
        let q = self.ctx.q();
        let total: u128 = (1..=n)
            .map(|d| {
                qbinom(n as i64, d as i64, q)
                    .unwrap()
                    .to_u128()
                    .unwrap_or(u128::MAX)
            })
            .fold(0u128, |a, b| a.saturating_add(b));
        guard("flats in an all-ranks scan", total, limits.max_all_flats)?;

        let mut best = 1;
        let mut pts = Vec::new();
        for d in 1..=n {
            for flat in self.ctx.enumerate_flats(d)? {
                self.ctx.flat_points_into(&flat, &mut pts);
                pts.retain(|&i| self.ground.contains(i));
                // r(X) >= 1 for nonempty X, so |X| <= best cannot improve.
                if pts.len() <= best {
                    continue;
                }
                let r = self.ctx.rank_of(&pts);
                best = best.max(pts.len().div_ceil(r));
            }
        }
        Ok(best)
    }

    /// Plain-text form: `n q` header, then one point index per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.ctx.n(), self.ctx.q());
        for &i in &self.elements {
            writeln!(out, "{i}").unwrap();
        }
        out
    }

    /// Parses [`SubMatroid::to_text`] output. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<SubMatroid> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(line, format!("expected `n q`, got `{header}`")));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad n `{}`", fields[0])))?;
        let q: u32 = fields[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad q `{}`", fields[1])))?;
        let ctx = GeometryCtx::pg(n, q)?;
        let mut points = Vec::new();
        for (line, l) in lines {
            let i: usize = l
                .parse()
                .map_err(|_| parse_err(line, format!("bad point index `{l}`")))?;
            points.push(i);
        }
        SubMatroid::restrict(&ctx, &points)
    }
}
