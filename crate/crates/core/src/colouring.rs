//! Colouring number by matroid partitioning.
//!
//! Elements are inserted one at a time into `k` independent classes. When an
//! element does not fit anywhere directly, a breadth-first search over the
//! exchange graph looks for a shortest augmenting path: an arc `y -> x` means
//! `x` sits in some class `I` and `I - x + y` is independent. If no path
//! exists the current prefix needs `k + 1` classes, so `k` grows by one.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::gf::{Elem, FieldSpec};
use crate::matroid::SubMatroid;

/// A partition of the ground set into independent classes of point indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colouring {
    pub classes: Vec<Vec<usize>>,
}

impl Colouring {
    pub fn k(&self) -> usize {
        self.classes.len()
    }
}

/// True iff the classes are disjoint, cover the ground set exactly and are independent.
pub fn verify_colouring(m: &SubMatroid, colouring: &Colouring) -> bool {
    let mut seen = crate::matroid::PointSet::empty(m.ctx().point_count());
    let mut count = 0;
    for class in &colouring.classes {
        for &i in class {
            if !m.contains(i) || seen.contains(i) {
                return false;
            }
            seen.insert(i);
            count += 1;
        }
        if m.ctx().rank_of(class) != class.len() {
            return false;
        }
    }
    count == m.len()
}

/// Minimum number of independent sets partitioning the ground set, with a witness.
pub fn colouring_number(m: &SubMatroid) -> (usize, Colouring) {
    let elements = m.elements();
    if elements.is_empty() {
        return (0, Colouring::default());
    }
    let ctx = m.ctx();
    let vectors = if ctx.is_packed() {
        Vectors::Packed(elements.iter().map(|&i| ctx.packed(i)).collect())
    } else {
        Vectors::Dense(elements.iter().map(|&i| ctx.coords(i).to_vec()).collect())
    };
    let rank = m.full_rank();
    let lower = elements.len().div_ceil(rank);

    let mut p = Partitioner::new(ctx.field(), ctx.n(), vectors, lower);
    for s in 0..elements.len() {
        if !p.augment(s) {
            p.open_class_with(s);
        }
    }
    let classes: Vec<Vec<usize>> = p
        .classes
        .iter()
        .map(|c| {
            let mut pts: Vec<usize> = c.members.iter().map(|&e| elements[e]).collect();
            pts.sort_unstable();
            pts
        })
        .collect();
    let colouring = Colouring { classes };
    (colouring.k(), colouring)
}

enum Vectors {
    Packed(Vec<u64>),
    Dense(Vec<Vec<Elem>>),
}

/// Echelon basis of one class, each row remembering which members combine to it.
#[derive(Clone, Debug)]
enum ClassBasis {
    /// `rows[b]`: (vector with top bit b, member mask).
    Packed(Box<[(u64, u64); 64]>),
    Dense(Vec<DenseRow>),
}

#[derive(Clone, Debug)]
struct DenseRow {
    pivot: usize,
    vector: Vec<Elem>,
    combo: Vec<Elem>,
}

#[derive(Clone, Debug)]
struct ClassState {
    /// Element positions; bit/slot i of a combination refers to `members[i]`.
    members: Vec<usize>,
    basis: ClassBasis,
}

enum Exchange {
    Independent,
    /// Members whose removal makes room for the tested element.
    Circuit(Vec<usize>),
}

impl ClassState {
    fn empty(packed: bool) -> Self {
        let basis = if packed {
            ClassBasis::Packed(Box::new([(0, 0); 64]))
        } else {
            ClassBasis::Dense(Vec::new())
        };
        ClassState {
            members: Vec::new(),
            basis,
        }
    }

    fn test(&self, field: &FieldSpec, vectors: &Vectors, y: usize) -> Exchange {
        match (&self.basis, vectors) {
            (ClassBasis::Packed(rows), Vectors::Packed(vs)) => {
                let (mut v, mut combo) = (vs[y], 0u64);
                while v != 0 {
                    let b = 63 - v.leading_zeros() as usize;
                    let (rv, rc) = rows[b];
                    if rv == 0 {
                        return Exchange::Independent;
                    }
                    v ^= rv;
                    combo ^= rc;
                }
                let mut circuit = Vec::with_capacity(combo.count_ones() as usize);
                while combo != 0 {
                    circuit.push(self.members[combo.trailing_zeros() as usize]);
                    combo &= combo - 1;
                }
                Exchange::Circuit(circuit)
            }
            (ClassBasis::Dense(rows), Vectors::Dense(vs)) => {
                let (residual, combo) = dense_reduce(field, rows, &vs[y], self.members.len());
                if residual.iter().any(|&x| x != 0) {
                    return Exchange::Independent;
                }
                let circuit = combo
                    .iter()
                    .zip(&self.members)
                    .filter(|(&c, _)| c != 0)
                    .map(|(_, &m)| m)
                    .collect();
                Exchange::Circuit(circuit)
            }
            _ => unreachable!("class basis and vectors disagree on representation"),
        }
    }

    /// Appends an element that is independent of the current members.
    fn push(&mut self, field: &FieldSpec, vectors: &Vectors, y: usize) {
        let slot = self.members.len();
        self.members.push(y);
        match (&mut self.basis, vectors) {
            (ClassBasis::Packed(rows), Vectors::Packed(vs)) => {
                let (mut v, mut combo) = (vs[y], 1u64 << slot);
                while v != 0 {
                    let b = 63 - v.leading_zeros() as usize;
                    if rows[b].0 == 0 {
                        rows[b] = (v, combo);
                        return;
                    }
                    v ^= rows[b].0;
                    combo ^= rows[b].1;
                }
                panic!("dependent element pushed into a class");
            }
            (ClassBasis::Dense(rows), Vectors::Dense(vs)) => {
                let (residual, combo) = dense_reduce(field, rows, &vs[y], slot + 1);
                let pivot = residual
                    .iter()
                    .position(|&x| x != 0)
                    .expect("dependent element pushed into a class");
                // residual = y - sum(combo_i * member_i)
                let mut row_combo: Vec<Elem> = combo.iter().map(|&c| field.neg(c)).collect();
                row_combo[slot] = 1;
                let scale = field.inv(residual[pivot]).unwrap();
                let vector = residual.iter().map(|&x| field.mul(x, scale)).collect();
                let combo = row_combo.iter().map(|&x| field.mul(x, scale)).collect();
                for r in rows.iter_mut() {
                    r.combo.resize(slot + 1, 0);
                }
                rows.push(DenseRow {
                    pivot,
                    vector,
                    combo,
                });
            }
            _ => unreachable!("class basis and vectors disagree on representation"),
        }
    }
}

/// Reduces `y` against `rows`; returns the residual and the member
/// combination that was subtracted.
fn dense_reduce(
    field: &FieldSpec,
    rows: &[DenseRow],
    y: &[Elem],
    slots: usize,
) -> (Vec<Elem>, Vec<Elem>) {
    let mut w = y.to_vec();
    let mut combo = vec![0; slots];
    for row in rows {
        let coef = w[row.pivot];
        if coef == 0 {
            continue;
        }
        for (x, &r) in w.iter_mut().zip(&row.vector) {
            if r != 0 {
                *x = field.sub(*x, field.mul(coef, r));
            }
        }
        for (c, &r) in combo.iter_mut().zip(&row.combo) {
            if r != 0 {
                *c = field.add(*c, field.mul(coef, r));
            }
        }
    }
    (w, combo)
}

struct Partitioner<'a> {
    field: &'a FieldSpec,
    vectors: Vectors,
    classes: Vec<ClassState>,
    class_of: Vec<Option<usize>>,
    packed: bool,
}

impl<'a> Partitioner<'a> {
    fn new(field: &'a FieldSpec, n: usize, vectors: Vectors, k: usize) -> Self {
        let packed = matches!(vectors, Vectors::Packed(_));
        debug_assert!(!packed || n <= 64);
        let count = match &vectors {
            Vectors::Packed(v) => v.len(),
            Vectors::Dense(v) => v.len(),
        };
        Partitioner {
            field,
            vectors,
            classes: (0..k).map(|_| ClassState::empty(packed)).collect(),
            class_of: vec![None; count],
            packed,
        }
    }

    fn open_class_with(&mut self, s: usize) {
        let mut class = ClassState::empty(self.packed);
        class.push(self.field, &self.vectors, s);
        self.class_of[s] = Some(self.classes.len());
        self.classes.push(class);
    }

    /// Tries to insert unassigned element `s` along a shortest augmenting path.
    fn augment(&mut self, s: usize) -> bool {
        let mut pred: Vec<Option<usize>> = vec![None; self.class_of.len()];
        let mut visited = vec![false; self.class_of.len()];
        let mut queue = VecDeque::from([s]);
        visited[s] = true;
        let mut circuits = Vec::new();

        while let Some(y) = queue.pop_front() {
            circuits.clear();
            for (j, class) in self.classes.iter().enumerate() {
                if self.class_of[y] == Some(j) {
                    continue;
                }
                match class.test(self.field, &self.vectors, y) {
                    Exchange::Independent => {
                        self.apply_path(&pred, y, j);
                        return true;
                    }
                    Exchange::Circuit(c) => circuits.push(c),
                }
            }
            for c in &circuits {
                for &x in c {
                    if !visited[x] {
                        visited[x] = true;
                        pred[x] = Some(y);
                        queue.push_back(x);
                    }
                }
            }
        }
        false
    }

    fn apply_path(&mut self, pred: &[Option<usize>], last: usize, sink: usize) {
        // path[0] is the inserted element; path[i+1] is displaced by path[i].
        let mut path = vec![last];
        while let Some(prev) = pred[*path.last().unwrap()] {
            path.push(prev);
        }
        path.reverse();

        let old: Vec<Option<usize>> = path.iter().map(|&y| self.class_of[y]).collect();
        let mut touched = vec![sink];
        for (i, &y) in path.iter().enumerate() {
            let target = if i + 1 < path.len() {
                old[i + 1].unwrap()
            } else {
                sink
            };
            self.class_of[y] = Some(target);
            touched.push(target);
        }
        touched.sort_unstable();
        touched.dedup();

        for &j in &touched {
            let mut members: Vec<usize> = self.classes[j]
                .members
                .iter()
                .copied()
                .filter(|&x| self.class_of[x] == Some(j))
                .collect();
            members.extend(
                path.iter()
                    .copied()
                    .filter(|&y| self.class_of[y] == Some(j)),
            );
            let mut rebuilt = ClassState::empty(self.packed);
            for x in members {
                rebuilt.push(self.field, &self.vectors, x);
            }
            self.classes[j] = rebuilt;
        }
    }
}
