//! Brute-force oracles shared by the integration and acceptance targets.
//! Nothing here calls into the algorithms it is used to check.

#![allow(dead_code)]

use std::collections::HashSet;

use opclat::lattice::{make_standard, AtomPermutation};
use opclat::term::{chi_cofinite, chi_up_set, slot_layout, ChiMember, CompiledTerm};
use opclat::{Elem, FiniteLattice, MonotoneTable, Term};

pub fn lat(spec: &str) -> FiniteLattice {
    make_standard(spec).unwrap()
}

/// `x ∈ ↑A`.
pub fn in_up_set(l: &FiniteLattice, set: &[Elem], x: Elem) -> bool {
    set.iter().any(|&a| l.leq(a, x))
}

/// All `k`-subsets of `items`, in lexicographic order.
pub fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn go<T: Copy>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// All orderings of `items`.
pub fn permutations<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Ordered tuples of `len` distinct elements of `pool`.
pub fn arrangements(pool: &[Elem], len: usize) -> Vec<Vec<Elem>> {
    combinations(pool, len)
        .into_iter()
        .flat_map(|c| permutations(&c))
        .collect()
}

/// Every argument tuple of `L^n` in rank order.
pub fn all_args(l: &FiniteLattice, n: usize) -> Vec<Vec<Elem>> {
    let s = l.size();
    let total = s.pow(n as u32);
    (0..total)
        .map(|mut r| {
            let mut v = vec![Elem::new(0); n];
            for slot in v.iter_mut().rev() {
                *slot = Elem::new(r % s);
                r /= s;
            }
            v
        })
        .collect()
}

/// Every automorphism of a flat lattice that fixes `params` pointwise.
pub fn full_stabilizer(l: &FiniteLattice, params: &[Elem]) -> Vec<AtomPermutation> {
    let free: Vec<Elem> = l.atoms().iter().copied().filter(|a| !params.contains(a)).collect();
    permutations(&free)
        .into_iter()
        .map(|img| {
            let images: Vec<Elem> = l
                .atoms()
                .iter()
                .map(|&a| match free.iter().position(|&f| f == a) {
                    Some(i) => img[i],
                    None => a,
                })
                .collect();
            AtomPermutation::from_atom_images(l, &images).unwrap()
        })
        .collect()
}

/// `π f = f` for every `π` in the list, checked on every argument tuple.
pub fn invariant_under_all(l: &FiniteLattice, f: &MonotoneTable, group: &[AtomPermutation]) -> bool {
    let args = all_args(l, f.arity());
    group.iter().all(|pi| {
        args.iter().all(|a| {
            let moved: Vec<Elem> = a.iter().map(|&e| pi.apply(e)).collect();
            f.value(&moved) == pi.apply(f.value(a))
        })
    })
}

/// Unary polynomial functions as value vectors: closure of the identity
/// and all constants under pointwise meet and join.
pub fn unary_polynomial_tables(l: &FiniteLattice) -> HashSet<Vec<Elem>> {
    let els: Vec<Elem> = l.elements().collect();
    let mut list: Vec<Vec<Elem>> = vec![els.clone()];
    for &c in &els {
        list.push(vec![c; els.len()]);
    }
    let mut set: HashSet<Vec<Elem>> = list.iter().cloned().collect();
    let mut changed = true;
    while changed {
        changed = false;
        let snapshot = list.clone();
        for p in &snapshot {
            for q in &snapshot {
                for meet in [true, false] {
                    let r: Vec<Elem> = p
                        .iter()
                        .zip(q)
                        .map(|(&a, &b)| if meet { l.meet(a, b) } else { l.join(a, b) })
                        .collect();
                    if set.insert(r.clone()) {
                        list.push(r);
                        changed = true;
                    }
                }
            }
        }
    }
    set
}

/// Values `(p(a), p(b))` of all unary polynomials, by a naive fixpoint on
/// pairs seeded with `(a, b)` and the diagonal. Operations are pointwise, so
/// this is the projection of [`unary_polynomial_tables`] onto `{a, b}`.
pub fn unary_pair_values(l: &FiniteLattice, a: Elem, b: Elem) -> HashSet<(Elem, Elem)> {
    let mut set: HashSet<(Elem, Elem)> = l.elements().map(|c| (c, c)).collect();
    set.insert((a, b));
    loop {
        let snapshot: Vec<(Elem, Elem)> = set.iter().copied().collect();
        let before = set.len();
        for &(p, q) in &snapshot {
            for &(u, v) in &snapshot {
                set.insert((l.meet(p, u), l.meet(q, v)));
                set.insert((l.join(p, u), l.join(q, v)));
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// Two-point unary interpolation decided from [`unary_pair_values`].
pub fn brute_1ip(l: &FiniteLattice) -> bool {
    l.elements().all(|a| {
        l.elements().filter(|&b| !l.leq(b, a)).all(|b| {
            let values = unary_pair_values(l, a, b);
            l.elements()
                .all(|c| l.elements().filter(|&d| l.leq(c, d)).all(|d| values.contains(&(c, d))))
        })
    })
}

/// Arity-`n` polynomial functions by depth-bounded term enumeration: depth
/// 0 holds projections and constants, depth `D + 1` adds every meet and join
/// of two functions of depth at most `D`. Stops at the first depth that adds
/// nothing. Returns the set and the depth reached.
pub fn term_enumeration_clone(l: &FiniteLattice, n: usize) -> (HashSet<Vec<Elem>>, usize) {
    let args = all_args(l, n);
    let mut level: Vec<Vec<Elem>> = Vec::new();
    for i in 0..n {
        level.push(args.iter().map(|a| a[i]).collect());
    }
    for c in l.elements() {
        level.push(vec![c; args.len()]);
    }
    let mut seen: HashSet<Vec<Elem>> = level.iter().cloned().collect();
    let mut all = level.clone();
    let mut depth = 0;
    loop {
        let mut fresh = Vec::new();
        for p in &all {
            for q in &all {
                for meet in [true, false] {
                    let r: Vec<Elem> = p
                        .iter()
                        .zip(q)
                        .map(|(&a, &b)| if meet { l.meet(a, b) } else { l.join(a, b) })
                        .collect();
                    if !seen.contains(&r) {
                        seen.insert(r.clone());
                        fresh.push(r);
                    }
                }
            }
        }
        if fresh.is_empty() {
            return (seen, depth);
        }
        depth += 1;
        all.extend(fresh);
    }
}

/// Monotone maps `L^n → L` by filtering every map through the pairwise
/// order check. Only for tiny spaces.
pub fn brute_monotone_count(l: &FiniteLattice, n: usize) -> usize {
    let args = all_args(l, n);
    let total = args.len();
    let s = l.size();
    let mut count = 0;
    let mut vals = vec![0usize; total];
    loop {
        let ok = (0..total).all(|i| {
            (0..total).all(|j| {
                let le = args[i].iter().zip(&args[j]).all(|(&a, &b)| l.leq(a, b));
                !le || l.leq(Elem::new(vals[i]), Elem::new(vals[j]))
            })
        });
        if ok {
            count += 1;
        }
        let mut k = 0;
        while k < total && vals[k] == s - 1 {
            vals[k] = 0;
            k += 1;
        }
        if k == total {
            return count;
        }
        vals[k] += 1;
    }
}

/// Checks every characteristic term for parameter tuples of up to three
/// atoms on `flat:m`; returns the number of evaluations.
pub fn chi_contract(m: usize) -> usize {
    let l = lat(&format!("flat:{m}"));
    let atoms = l.atoms().to_vec();
    let mut evals = 0;
    for k in 0..=3usize.min(m.saturating_sub(3)) {
        for params in combinations(&atoms, k) {
            let free: Vec<Elem> = atoms.iter().copied().filter(|a| !params.contains(a)).collect();
            let triples: Vec<Vec<Elem>> = combinations(&free, 3).into_iter().flat_map(|c| permutations(&c)).collect();
            let mut cases: Vec<(Term, Vec<Elem>)> = Vec::new();
            // every A ⊆ {c̄, 0, 1}
            for mask in 0u32..(1 << (k + 2)) {
                let mut members = Vec::new();
                let mut set = Vec::new();
                for i in 0..k {
                    if mask & (1 << i) != 0 {
                        members.push(ChiMember::Param(i as u32 + 1));
                        set.push(params[i]);
                    }
                }
                if mask & (1 << k) != 0 {
                    members.push(ChiMember::Zero);
                    set.push(l.bottom());
                }
                if mask & (1 << (k + 1)) != 0 {
                    members.push(ChiMember::One);
                    set.push(l.top());
                }
                cases.push((chi_up_set(&members, k as u32, 1).unwrap(), set));
            }
            // cofinite A with complement {0} ∪ E, E ⊆ c̄, and A = L
            for mask in 0u32..(1 << k) {
                let excluded: Vec<u32> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| i as u32 + 1).collect();
                let set: Vec<Elem> = l
                    .elements()
                    .filter(|&e| e != l.bottom() && !excluded.iter().any(|&j| params[j as usize - 1] == e))
                    .collect();
                cases.push((chi_cofinite(&excluded, false, k as u32, 1).unwrap(), set));
            }
            cases.push((chi_cofinite(&[], true, k as u32, 1).unwrap(), l.elements().collect()));

            for (term, set) in &cases {
                let compiled = CompiledTerm::new(term, &slot_layout(k, 1, 3)).unwrap();
                let mut scratch = Vec::new();
                let mut inputs: Vec<Elem> = params.clone();
                inputs.push(l.bottom());
                inputs.extend([l.bottom(); 3]);
                for d in &triples {
                    inputs[k + 1..].copy_from_slice(d);
                    for x in l.elements() {
                        inputs[k] = x;
                        let want = if in_up_set(&l, set, x) { l.top() } else { l.bottom() };
                        assert_eq!(
                            compiled.eval(&l, &inputs, &mut scratch),
                            want,
                            "flat:{m} c={params:?} A={set:?} d={d:?} x={x:?}: {term}"
                        );
                        evals += 1;
                    }
                }
            }
        }
    }
    evals
}

