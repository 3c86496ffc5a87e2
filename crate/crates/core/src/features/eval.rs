//! Extensions of concepts (object sets) and roles (object-pair sets) in one
//! state. A role over `n` objects is an `n*n` bitset, row `x` holding the
//! successors of `x`.

use fixedbitset::FixedBitSet;

use super::expr::{Concept, Role};
use crate::pddl::{State, Universe};

pub(crate) fn top(n: usize) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    b.insert_range(..);
    b
}

pub(crate) fn prim_concept(u: &Universe, s: &State, pred: usize, pos: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(u.objects.len());
    for &a in &u.atoms_by_predicate[pred] {
        if s.contains(a) {
            if let Some(&o) = u.atoms[a as usize].args.get(pos) {
                out.insert(o);
            }
        }
    }
    out
}

pub(crate) fn prim_role(
    u: &Universe,
    s: &State,
    pred: usize,
    from: usize,
    to: usize,
) -> FixedBitSet {
    let n = u.objects.len();
    let mut out = FixedBitSet::with_capacity(n * n);
    for &a in &u.atoms_by_predicate[pred] {
        if s.contains(a) {
            let args = &u.atoms[a as usize].args;
            if let (Some(&x), Some(&y)) = (args.get(from), args.get(to)) {
                out.insert(x * n + y);
            }
        }
    }
    out
}

pub(crate) fn type_concept(u: &Universe, ty: usize) -> FixedBitSet {
    let mut b = u.type_members[ty].clone();
    b.grow(u.objects.len());
    b
}

pub(crate) fn not(c: &FixedBitSet) -> FixedBitSet {
    let mut b = c.clone();
    b.toggle_range(..);
    b
}

pub(crate) fn and(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut r = a.clone();
    r.intersect_with(b);
    r
}

pub(crate) fn or(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut r = a.clone();
    r.union_with(b);
    r
}

pub(crate) fn diff(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut r = a.clone();
    r.difference_with(b);
    r
}

pub(crate) fn some(r: &FixedBitSet, c: &FixedBitSet, n: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(n);
    for p in r.ones() {
        if c.contains(p % n) {
            out.insert(p / n);
        }
    }
    out
}

pub(crate) fn all(r: &FixedBitSet, c: &FixedBitSet, n: usize) -> FixedBitSet {
    let mut out = top(n);
    for p in r.ones() {
        if !c.contains(p % n) {
            out.set(p / n, false);
        }
    }
    out
}

pub(crate) fn inverse(r: &FixedBitSet, n: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(n * n);
    for p in r.ones() {
        out.insert((p % n) * n + p / n);
    }
    out
}

pub(crate) fn compose(a: &FixedBitSet, b: &FixedBitSet, n: usize) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(n * n);
    for p in a.ones() {
        let (x, y) = (p / n, p % n);
        for z in 0..n {
            if b.contains(y * n + z) {
                out.insert(x * n + z);
            }
        }
    }
    out
}

pub fn eval_concept(c: &Concept, u: &Universe, s: &State) -> FixedBitSet {
    let n = u.objects.len();
    match c {
        Concept::Top => top(n),
        Concept::Bot => FixedBitSet::with_capacity(n),
        Concept::Primitive { pred, pos } => match u.predicate_index(pred) {
            Some(p) => prim_concept(u, s, p, *pos),
            None => FixedBitSet::with_capacity(n),
        },
        Concept::Type(t) => match u.type_index(t) {
            Some(t) => type_concept(u, t),
            None => FixedBitSet::with_capacity(n),
        },
        Concept::Not(c) => not(&eval_concept(c, u, s)),
        Concept::And(a, b) => and(&eval_concept(a, u, s), &eval_concept(b, u, s)),
        Concept::Or(a, b) => or(&eval_concept(a, u, s), &eval_concept(b, u, s)),
        Concept::Some(r, c) => some(&eval_role(r, u, s), &eval_concept(c, u, s), n),
        Concept::All(r, c) => all(&eval_role(r, u, s), &eval_concept(c, u, s), n),
    }
}

pub fn eval_role(r: &Role, u: &Universe, s: &State) -> FixedBitSet {
    let n = u.objects.len();
    match r {
        Role::Primitive { pred, from, to } => match u.predicate_index(pred) {
            Some(p) => prim_role(u, s, p, *from, *to),
            None => FixedBitSet::with_capacity(n * n),
        },
        Role::Inverse(r) => inverse(&eval_role(r, u, s), n),
        Role::Compose(a, b) => compose(&eval_role(a, u, s), &eval_role(b, u, s), n),
        Role::And(a, b) => and(&eval_role(a, u, s), &eval_role(b, u, s)),
        Role::Diff(a, b) => diff(&eval_role(a, u, s), &eval_role(b, u, s)),
    }
}
