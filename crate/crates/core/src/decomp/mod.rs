//! (b,c)-decompositions: verification, search and the numeric side of the
//! non-decomposability argument.
//!
//! A transversal of the classes fails to be b-colourable iff it contains a
//! subset X with |X| > b·r(X). Subsets of transversals are exactly the
//! partial transversals, so the transversal condition is decided by a
//! branch-and-bound search for such an X, which doubles as a certificate.

mod chain;

pub use chain::{
    conditions_at, counting_bound_report, lemma5_final_step, threshold_n0, BoundChainReport,
    ChainRegime, ChainStep, LogBase, N0Conditions,
};

use serde::{Deserialize, Serialize};

use crate::colouring::colouring_number;
use crate::error::{Error, Result};
use crate::limits::{guard, Limits};
use crate::linalg::RankBasis;
use crate::matroid::{PointSet, SubMatroid};
use crate::projgeom::GeometryCtx;

/// Classes E_1..E_l with the parameters they are checked against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub classes: Vec<Vec<usize>>,
    pub b: usize,
    pub c: f64,
    /// Colouring number of the matroid.
    pub k: usize,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    SizeViolation {
        class: usize,
        size: usize,
        cap: String,
    },
    /// A partial transversal with |X| > b·r(X).
    TransversalViolation {
        witness: Vec<usize>,
        rank: usize,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// JSON interchange form of a decomposition instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub n: usize,
    pub q: u32,
    pub ground: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub b: usize,
    pub c: f64,
}

impl DecompositionFile {
    pub fn matroid(&self) -> Result<SubMatroid> {
        let ctx = GeometryCtx::pg(self.n, self.q)?;
        SubMatroid::restrict(&ctx, &self.ground)
    }

    pub fn from_decomposition(m: &SubMatroid, d: &Decomposition) -> Self {
        DecompositionFile {
            n: m.ctx().n(),
            q: m.ctx().q(),
            ground: m.elements().to_vec(),
            classes: d.classes.clone(),
            b: d.b,
            c: d.c,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_disjoint_in_ground(m: &SubMatroid, classes: &[Vec<usize>]) -> Result<()> {
    let mut seen = PointSet::empty(m.ctx().point_count());
    for (ci, class) in classes.iter().enumerate() {
        for &e in class {
            if !m.contains(e) {
                return Err(Error::NotInGround(e));
            }
            if seen.contains(e) {
                return Err(Error::NotAPartition(format!(
                    "point {e} appears twice (class {ci})"
                )));
            }
            seen.insert(e);
        }
    }
    Ok(())
}

fn check_partition(m: &SubMatroid, classes: &[Vec<usize>]) -> Result<()> {
    check_disjoint_in_ground(m, classes)?;
    if let Some(ci) = classes.iter().position(|c| c.is_empty()) {
        return Err(Error::NotAPartition(format!("class {ci} is empty")));
    }
    let covered: usize = classes.iter().map(Vec::len).sum();
    if covered != m.len() {
        return Err(Error::NotAPartition(format!(
            "classes cover {covered} of {} points",
            m.len()
        )));
    }
    Ok(())
}

struct ViolationSearch<'a> {
    ctx: &'a GeometryCtx,
    classes: &'a [Vec<usize>],
    b: usize,
    budget: u64,
    nodes: u64,
    skip: Option<usize>,
}

impl ViolationSearch<'_> {
    fn dfs(&mut self, i: usize, x: &mut Vec<usize>, basis: &RankBasis) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExhausted(self.budget));
        }
        let threshold = self.b * basis.rank();
        if x.len() > threshold {
            return Ok(true);
        }
        // Best case every further element lands in the current span.
        let remaining = self.classes.len() - i - usize::from(self.skip.is_some_and(|s| s >= i));
        if x.len() + remaining <= threshold || i == self.classes.len() {
            return Ok(false);
        }
        if self.skip == Some(i) {
            return self.dfs(i + 1, x, basis);
        }
        for &e in &self.classes[i] {
            let mut next = basis.clone();
            self.ctx.insert_point(&mut next, e);
            x.push(e);
            if self.dfs(i + 1, x, &next)? {
                return Ok(true);
            }
            x.pop();
        }
        self.dfs(i + 1, x, basis)
    }
}

/// Searches for a partial transversal X (at most one point per class) with
/// |X| > b·r(X). `Ok(None)` is conclusive; running out of `budget` search
/// nodes is reported as [`Error::BudgetExhausted`].
pub fn find_violating_partial_transversal(
    m: &SubMatroid,
    classes: &[Vec<usize>],
    b: usize,
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    if b == 0 {
        return Err(Error::InvalidParameter("b must be at least 1".into()));
    }
    check_disjoint_in_ground(m, classes)?;
    let mut search = ViolationSearch {
        ctx: m.ctx(),
        classes,
        b,
        budget,
        nodes: 0,
        skip: None,
    };
    let mut x = Vec::new();
    let found = search.dfs(0, &mut x, &m.ctx().empty_basis())?;
    Ok(found.then_some(x))
}

/// Like [`find_violating_partial_transversal`], restricted to sets that
/// contain `point` (a member of class `class`). Returns the nodes spent.
fn find_violation_through(
    ctx: &GeometryCtx,
    classes: &[Vec<usize>],
    b: usize,
    class: usize,
    point: usize,
    budget: u64,
) -> Result<(bool, u64)> {
    let mut search = ViolationSearch {
        ctx,
        classes,
        b,
        budget,
        nodes: 0,
        skip: Some(class),
    };
    let mut basis = ctx.empty_basis();
    ctx.insert_point(&mut basis, point);
    let mut x = vec![point];
    let found = search.dfs(0, &mut x, &basis)?;
    Ok((found, search.nodes))
}

/// Checks both conditions of a (b,c)-decomposition, with k the true colouring number.
pub fn verify_decomposition(
    m: &SubMatroid,
    classes: &[Vec<usize>],
    b: usize,
    c: f64,
    budget: u64,
) -> Result<Verdict> {
    check_partition(m, classes)?;
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "c = {c} must be at least 1"
        )));
    }
    let k = colouring_number(m).0;
    let cap = c * k as f64;
    if let Some(ci) = classes.iter().position(|cl| cl.len() as f64 > cap) {
        return Ok(Verdict::SizeViolation {
            class: ci,
            size: classes[ci].len(),
            cap: format!("{cap}"),
        });
    }
    Ok(
        match find_violating_partial_transversal(m, classes, b, budget)? {
            Some(witness) => {
                let rank = m.ctx().rank_of(&witness);
                Verdict::TransversalViolation { witness, rank }
            }
            None => Verdict::Valid,
        },
    )
}

/// Literal check: every full transversal Y has col(M|Y) ≤ b.
pub fn naive_transversal_oracle(
    m: &SubMatroid,
    classes: &[Vec<usize>],
    b: usize,
    limits: &Limits,
) -> Result<bool> {
    check_disjoint_in_ground(m, classes)?;
    if let Some(ci) = classes.iter().position(|c| c.is_empty()) {
        return Err(Error::NotAPartition(format!("class {ci} is empty")));
    }
    let product = classes
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128));
    guard("number of transversals", product, limits.max_transversals)?;

    let mut choice = vec![0usize; classes.len()];
    loop {
        let y: Vec<usize> = classes.iter().zip(&choice).map(|(c, &i)| c[i]).collect();
        if colouring_number(&m.restriction(&y)?).0 > b {
            return Ok(false);
        }
        let mut pos = classes.len();
        loop {
            if pos == 0 {
                return Ok(true);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < classes[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

struct DecompSearch<'a> {
    ctx: &'a GeometryCtx,
    elements: &'a [usize],
    b: usize,
    cap: usize,
    budget: u64,
    nodes: u64,
    classes: Vec<Vec<usize>>,
}

impl DecompSearch<'_> {
    fn spend(&mut self, n: u64) -> Result<()> {
        self.nodes += n;
        if self.nodes > self.budget {
            Err(Error::BudgetExhausted(self.budget))
        } else {
            Ok(())
        }
    }

    fn place(&mut self, i: usize) -> Result<bool> {
        self.spend(1)?;
        if i == self.elements.len() {
            return Ok(true);
        }
        let e = self.elements[i];
        // Existing classes in order, then one fresh class.
        for ci in 0..=self.classes.len() {
            if ci == self.classes.len() {
                self.classes.push(Vec::new());
            } else if self.classes[ci].len() >= self.cap {
                continue;
            }
            self.classes[ci].push(e);
            // Violations among earlier points were excluded already, and any
            // violation persists as classes grow.
            let remaining = self.budget - self.nodes;
            let (violated, used) =
                match find_violation_through(self.ctx, &self.classes, self.b, ci, e, remaining) {
                    Ok(r) => r,
                    Err(Error::BudgetExhausted(_)) => {
                        return Err(Error::BudgetExhausted(self.budget))
                    }
                    Err(err) => return Err(err),
                };
            self.spend(used)?;
            if !violated && self.place(i + 1)? {
                return Ok(true);
            }
            self.classes[ci].pop();
            if self.classes[ci].is_empty() {
                self.classes.pop();
            }
        }
        Ok(false)
    }
}

/// Backtracking search for a (b,c)-decomposition of a small matroid.
/// `Ok(None)` means none exists; an exhausted budget is an error.
pub fn search_decomposition(
    m: &SubMatroid,
    b: usize,
    c: f64,
    budget: u64,
    limits: &Limits,
) -> Result<Option<Decomposition>> {
    guard(
        "ground set size for decomposition search",
        m.len() as u128,
        limits.max_search_ground,
    )?;
    if b == 0 {
        return Err(Error::InvalidParameter("b must be at least 1".into()));
    }
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "c = {c} must be at least 1"
        )));
    }
    let k = colouring_number(m).0;
    if m.is_empty() {
        return Ok(Some(Decomposition {
            classes: Vec::new(),
            b,
            c,
            k,
        }));
    }
    let cap = (c * k as f64 + 1e-9).floor() as usize;
    let mut search = DecompSearch {
        ctx: m.ctx(),
        elements: m.elements(),
        b,
        cap,
        budget,
        nodes: 0,
        classes: Vec::new(),
    };
    Ok(search.place(0)?.then_some(Decomposition {
        classes: search.classes,
        b,
        c,
        k,
    }))
}
