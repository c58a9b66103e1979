//! Unary polynomials seen through pairs: the values `(p(a), p(b))` of all
//! unary polynomials with coefficients in `C` form the sublattice of `L × L`
//! generated by `(a, b)` and the diagonal over `C ∪ {0, 1}`.

use std::collections::HashMap;

use thiserror::Error;

use crate::lattice::{Elem, FiniteLattice};
use crate::term::{Family, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpolationError {
    #[error("no unary polynomial maps {a} to {c} and {b} to {d}")]
    NoInterpolant {
        a: String,
        b: String,
        c: String,
        d: String,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// A unary polynomial: a term in `x1` and `s1..sn` with `s_j` bound to
/// `coefficients[j - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryPolynomial {
    pub term: Term,
    pub coefficients: Vec<Elem>,
}

impl UnaryPolynomial {
    pub fn eval(&self, lattice: &FiniteLattice, x: Elem) -> Elem {
        eval_unary(&self.term, lattice, x, &self.coefficients)
    }
}

fn eval_unary(term: &Term, lattice: &FiniteLattice, x: Elem, coefficients: &[Elem]) -> Elem {
    match term {
        Term::Zero => lattice.bottom(),
        Term::One => lattice.top(),
        Term::Var(v) => match v.family {
            Family::X => x,
            Family::S => coefficients[v.index as usize - 1],
            Family::T => panic!("unary polynomial with fresh slot {v}"),
        },
        Term::Meet(l, r) => lattice.meet(
            eval_unary(l, lattice, x, coefficients),
            eval_unary(r, lattice, x, coefficients),
        ),
        Term::Join(l, r) => lattice.join(
            eval_unary(l, lattice, x, coefficients),
            eval_unary(r, lattice, x, coefficients),
        ),
    }
}

/// Renumbers the `s` slots of `term` to `s1..sn` in first-use order.
fn compact_slots(term: &Term, slot_values: &[Elem]) -> UnaryPolynomial {
    let mut order: Vec<u32> = Vec::new();
    term.visit_vars(&mut |v| {
        if v.family == Family::S && !order.contains(&v.index) {
            order.push(v.index);
        }
    });
    let renamed = term.map_vars(&|v| match v.family {
        Family::S => Var::s(order.iter().position(|&i| i == v.index).unwrap() as u32 + 1),
        _ => v,
    });
    UnaryPolynomial {
        term: renamed,
        coefficients: order.iter().map(|&i| slot_values[i as usize - 1]).collect(),
    }
}

/// Sublattice of `L × L` generated by `(a, b)` and the diagonal over the
/// coefficients and the bounds, each member carrying a node-minimal witness.
#[derive(Clone, Debug)]
pub struct PairClosure {
    pub a: Elem,
    pub b: Elem,
    /// Non-bound coefficients; slot `s_j` stands for `coefficients[j - 1]`.
    pub coefficients: Vec<Elem>,
    pairs: Vec<(Elem, Elem)>,
    witnesses: Vec<Term>,
    index: HashMap<(Elem, Elem), usize>,
}

impl PairClosure {
    /// Members in discovery order.
    pub fn pairs(&self) -> &[(Elem, Elem)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, u: Elem, v: Elem) -> bool {
        self.index.contains_key(&(u, v))
    }

    /// Witness term over `x1` and the closure's coefficient slots.
    pub fn witness(&self, u: Elem, v: Elem) -> Option<&Term> {
        self.index.get(&(u, v)).map(|&i| &self.witnesses[i])
    }

    /// Witness with its own coefficients, renumbered by first use.
    pub fn polynomial(&self, u: Elem, v: Elem) -> Option<UnaryPolynomial> {
        self.witness(u, v).map(|t| compact_slots(t, &self.coefficients))
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Elem, Elem), &Term)> {
        self.pairs.iter().copied().zip(self.witnesses.iter())
    }
}

fn normalize_coefficients(lattice: &FiniteLattice, coefficients: &[Elem]) -> Vec<Elem> {
    let mut out: Vec<Elem> = coefficients
        .iter()
        .copied()
        .filter(|&c| !lattice.is_bound(c))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Membership bitmap of the generated sublattice, indexed `u * |L| + v`.
pub(crate) fn closure_set(lattice: &FiniteLattice, a: Elem, b: Elem, coefficients: &[Elem]) -> Vec<bool> {
    let n = lattice.size();
    let mut member = vec![false; n * n];
    let mut list: Vec<(Elem, Elem)> = Vec::new();
    let push = |p: (Elem, Elem), member: &mut Vec<bool>, list: &mut Vec<(Elem, Elem)>| {
        let i = p.0.index() * n + p.1.index();
        if !member[i] {
            member[i] = true;
            list.push(p);
        }
    };
    push((a, b), &mut member, &mut list);
    push((lattice.bottom(), lattice.bottom()), &mut member, &mut list);
    push((lattice.top(), lattice.top()), &mut member, &mut list);
    for &c in coefficients {
        push((c, c), &mut member, &mut list);
    }
    let mut next = 0;
    while next < list.len() {
        let p = list[next];
        let mut j = 0;
        while j <= next {
            let q = list[j];
            push(
                (lattice.meet(p.0, q.0), lattice.meet(p.1, q.1)),
                &mut member,
                &mut list,
            );
            push(
                (lattice.join(p.0, q.0), lattice.join(p.1, q.1)),
                &mut member,
                &mut list,
            );
            j += 1;
        }
        next += 1;
    }
    member
}

/// Computes the pair closure with breadth-first-minimal witnesses.
pub fn pair_closure(lattice: &FiniteLattice, a: Elem, b: Elem, coefficients: &[Elem]) -> PairClosure {
    let coefficients = normalize_coefficients(lattice, coefficients);
    let target = closure_set(lattice, a, b, &coefficients)
        .iter()
        .filter(|&&m| m)
        .count();
    let mut pairs = Vec::new();
    let mut witnesses = Vec::new();
    let mut index = HashMap::new();
    // levels[i] lists member ids whose minimal witness has 2i+1 nodes
    let mut levels: Vec<Vec<usize>> = vec![Vec::new()];
    let mut add = |p: (Elem, Elem), w: Term, pairs: &mut Vec<(Elem, Elem)>, witnesses: &mut Vec<Term>| {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(p) {
            e.insert(pairs.len());
            pairs.push(p);
            witnesses.push(w);
            true
        } else {
            false
        }
    };
    let mut leaves = vec![((a, b), Term::x(1))];
    leaves.push(((lattice.bottom(), lattice.bottom()), Term::Zero));
    leaves.push(((lattice.top(), lattice.top()), Term::One));
    for (j, &c) in coefficients.iter().enumerate() {
        leaves.push(((c, c), Term::s(j as u32 + 1)));
    }
    for (p, w) in leaves {
        if add(p, w, &mut pairs, &mut witnesses) {
            levels[0].push(pairs.len() - 1);
        }
    }
    while pairs.len() < target {
        let level = levels.len();
        let mut fresh = Vec::new();
        // children sizes 2i+1 and 2j+1 with i + j = level - 1
        for i in 0..level {
            let j = level - 1 - i;
            for &l in &levels[i] {
                for &r in &levels[j] {
                    let (p, q) = (pairs[l], pairs[r]);
                    let m = (lattice.meet(p.0, q.0), lattice.meet(p.1, q.1));
                    let w = witnesses[l].clone().meet(witnesses[r].clone());
                    if add(m, w, &mut pairs, &mut witnesses) {
                        fresh.push(pairs.len() - 1);
                    }
                    let jn = (lattice.join(p.0, q.0), lattice.join(p.1, q.1));
                    let w = witnesses[l].clone().join(witnesses[r].clone());
                    if add(jn, w, &mut pairs, &mut witnesses) {
                        fresh.push(pairs.len() - 1);
                    }
                }
            }
        }
        levels.push(fresh);
    }
    let index = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    PairClosure {
        a,
        b,
        coefficients,
        pairs,
        witnesses,
        index,
    }
}

/// Outcome of the unary interpolation check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OneIpVerdict {
    Holds,
    /// First `(a, b, c, d)` with `b ≰ a`, `c ≤ d` and no polynomial taking
    /// `a ↦ c`, `b ↦ d`.
    Fails { a: Elem, b: Elem, c: Elem, d: Elem },
}

impl OneIpVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, OneIpVerdict::Holds)
    }
}

/// Decides the unary interpolation property in its two-point form, with all
/// elements admitted as coefficients.
pub fn has_1ip(lattice: &FiniteLattice) -> OneIpVerdict {
    let n = lattice.size();
    let all: Vec<Elem> = lattice.elements().collect();
    for a in lattice.elements() {
        for b in lattice.elements() {
            if lattice.leq(b, a) {
                continue;
            }
            let member = closure_set(lattice, a, b, &all);
            for c in lattice.elements() {
                for d in lattice.elements() {
                    if lattice.leq(c, d) && !member[c.index() * n + d.index()] {
                        return OneIpVerdict::Fails { a, b, c, d };
                    }
                }
            }
        }
    }
    OneIpVerdict::Holds
}

/// A unary polynomial with `p(a) = c` and `p(b) = d`, coefficients from all
/// of `L`.
pub fn interpolating_polynomial(
    lattice: &FiniteLattice,
    a: Elem,
    b: Elem,
    c: Elem,
    d: Elem,
) -> Result<UnaryPolynomial, InterpolationError> {
    let name = |e: Elem| lattice.element_name(e).to_string();
    if lattice.leq(b, a) {
        return Err(InterpolationError::Precondition(format!("{} ≤ {}", name(b), name(a))));
    }
    if !lattice.leq(c, d) {
        return Err(InterpolationError::Precondition(format!("{} ≰ {}", name(c), name(d))));
    }
    let all: Vec<Elem> = lattice.elements().collect();
    let closure = pair_closure(lattice, a, b, &all);
    closure.polynomial(c, d).ok_or_else(|| InterpolationError::NoInterpolant {
        a: name(a),
        b: name(b),
        c: name(c),
        d: name(d),
    })
}

/// Whether `a` and `b` satisfy the same inequalities `σ(x) ≤ τ(x)` between
/// unary polynomials with coefficients in `over ∪ {0, 1}`.
pub fn same_qf_type(lattice: &FiniteLattice, a: Elem, b: Elem, over: &[Elem]) -> bool {
    let n = lattice.size();
    let coefficients = normalize_coefficients(lattice, over);
    let member = closure_set(lattice, a, b, &coefficients);
    let pairs: Vec<(Elem, Elem)> = (0..n * n)
        .filter(|&i| member[i])
        .map(|i| (Elem::new(i / n), Elem::new(i % n)))
        .collect();
    pairs.iter().all(|&(u, u2)| {
        pairs
            .iter()
            .all(|&(v, v2)| lattice.leq(u, v) == lattice.leq(u2, v2))
    })
}

/// First pair of distinct elements outside `over` with the same type over
/// it, oriented so that the second is not below the first.
pub fn find_same_type_pair(lattice: &FiniteLattice, over: &[Elem]) -> Option<(Elem, Elem)> {
    let outside: Vec<Elem> = lattice.elements().filter(|e| !over.contains(e)).collect();
    for (i, &a) in outside.iter().enumerate() {
        for &b in &outside[i + 1..] {
            if same_qf_type(lattice, a, b, over) {
                return Some(if lattice.leq(b, a) { (b, a) } else { (a, b) });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_standard, AtomPermutation};
    use std::collections::BTreeSet;

    fn lat(spec: &str) -> FiniteLattice {
        make_standard(spec).unwrap()
    }

    fn el(l: &FiniteLattice, n: &str) -> Elem {
        l.element(n).unwrap()
    }

    #[test]
    fn chain2_closure() {
        let l = lat("chain:2");
        let (z, o) = (l.bottom(), l.top());
        let c = pair_closure(&l, z, o, &[]);
        let got: BTreeSet<_> = c.pairs().iter().copied().collect();
        assert_eq!(got, BTreeSet::from([(z, z), (o, o), (z, o)]));
        assert_eq!(c.witness(z, o), Some(&Term::x(1)));
    }

    #[test]
    fn equal_points_give_the_diagonal() {
        let l = lat("n5");
        let a = el(&l, "a");
        let c = pair_closure(&l, a, a, &[el(&l, "c")]);
        assert!(c.pairs().iter().all(|&(u, v)| u == v));
        // sublattice generated by {0, 1, a, c}
        let diag: BTreeSet<&str> = c.pairs().iter().map(|&(u, _)| l.element_name(u)).collect();
        assert_eq!(diag, BTreeSet::from(["0", "1", "a", "c"]));
    }

    #[test]
    fn witnesses_re_evaluate() {
        for spec in ["flat:4", "n5", "chain:4", "product(chain:2,chain:3)"] {
            let l = lat(spec);
            let all: Vec<Elem> = l.elements().collect();
            for a in l.elements() {
                for b in l.elements() {
                    let c = pair_closure(&l, a, b, &all);
                    for ((u, v), w) in c.iter() {
                        let p = compact_slots(w, &c.coefficients);
                        assert_eq!((p.eval(&l, a), p.eval(&l, b)), (u, v), "{spec}: {w}");
                    }
                }
            }
        }
    }

    #[test]
    fn flat4_reaches_zero_one_from_atoms() {
        let l = lat("flat:4");
        let all: Vec<Elem> = l.elements().collect();
        let c = pair_closure(&l, el(&l, "a1"), el(&l, "a2"), &all);
        assert!(c.contains(l.bottom(), l.top()));
    }

    #[test]
    fn one_ip_examples() {
        assert!(has_1ip(&lat("chain:2")).holds());
        let c3 = lat("chain:3");
        let (z, u, o) = (el(&c3, "0"), el(&c3, "u1"), el(&c3, "1"));
        assert_eq!(has_1ip(&c3), OneIpVerdict::Fails { a: z, b: u, c: z, d: o });
        assert!(has_1ip(&lat("flat:4")).holds());
    }

    #[test]
    fn interpolants() {
        let c2 = lat("chain:2");
        let p = interpolating_polynomial(&c2, c2.bottom(), c2.top(), c2.bottom(), c2.top()).unwrap();
        assert_eq!(p.term, Term::x(1));
        assert!(p.coefficients.is_empty());

        let f5 = lat("flat:5");
        let (a1, a2) = (el(&f5, "a1"), el(&f5, "a2"));
        let p = interpolating_polynomial(&f5, a1, a2, f5.bottom(), f5.top()).unwrap();
        assert_eq!(p.eval(&f5, a1), f5.bottom());
        assert_eq!(p.eval(&f5, a2), f5.top());

        let c3 = lat("chain:3");
        let err = interpolating_polynomial(&c3, c3.bottom(), el(&c3, "u1"), c3.bottom(), c3.top());
        assert!(matches!(err, Err(InterpolationError::NoInterpolant { .. })));
        let err = interpolating_polynomial(&c3, c3.top(), c3.bottom(), c3.bottom(), c3.top());
        assert!(matches!(err, Err(InterpolationError::Precondition(_))));
    }

    #[test]
    fn type_examples() {
        let f6 = lat("flat:6");
        let a = |n: &str| el(&f6, n);
        assert!(same_qf_type(&f6, a("a3"), a("a3"), &[]));
        assert!(same_qf_type(&f6, a("a4"), a("a5"), &[a("a1")]));
        assert!(!same_qf_type(&f6, a("a1"), a("a4"), &[a("a1")]));
        assert_eq!(find_same_type_pair(&f6, &[a("a1")]), Some((a("a2"), a("a3"))));
        let c3 = lat("chain:3");
        let all: Vec<Elem> = c3.elements().collect();
        assert_eq!(find_same_type_pair(&c3, &all), None);
        let f3 = lat("flat:3");
        assert_eq!(find_same_type_pair(&f3, f3.atoms()), None);
    }

    #[test]
    fn monotone_shadow() {
        for spec in ["chain:4", "n5", "m3", "flat:6", "product(chain:2,chain:4)"] {
            let l = lat(spec);
            let all: Vec<Elem> = l.elements().collect();
            for a in l.elements() {
                for b in l.elements().filter(|&b| l.leq(a, b)) {
                    let c = pair_closure(&l, a, b, &all);
                    assert!(c.pairs().iter().all(|&(u, v)| l.leq(u, v)), "{spec}");
                }
            }
        }
    }

    #[test]
    fn type_equality_is_an_equivalence() {
        for (spec, over) in [("flat:6", vec!["a1"]), ("chain:4", vec!["u1"])] {
            let l = lat(spec);
            let over: Vec<Elem> = over.iter().map(|n| el(&l, n)).collect();
            let rest: Vec<Elem> = l.elements().filter(|e| !over.contains(e)).collect();
            let same = |x: Elem, y: Elem| same_qf_type(&l, x, y, &over);
            for &x in &rest {
                assert!(same(x, x));
                for &y in &rest {
                    assert_eq!(same(x, y), same(y, x));
                    for &z in &rest {
                        if same(x, y) && same(y, z) {
                            assert!(same(x, z), "{spec}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn automorphic_images_share_types() {
        let l = lat("flat:6");
        let atoms = l.atoms().to_vec();
        let over = vec![atoms[0], atoms[1]];
        let mut images = atoms.clone();
        images.swap(2, 5);
        images.swap(3, 4);
        let pi = AtomPermutation::from_atom_images(&l, &images).unwrap();
        for a in l.elements() {
            assert!(same_qf_type(&l, a, pi.apply(a), &over));
        }
    }
}
