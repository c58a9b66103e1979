//! Generators for stabilizer-invariant monotone functions on flat lattices.
//!
//! With at least `n + 2` atoms outside the parameters, an invariant `f` is
//! determined by one symbolic value per orbit of argument tuples: either a
//! fixed element (a parameter or a bound) or "the atom in coordinate j" for
//! a movable atom of the tuple. Orbits are visited in order of tuple height,
//! so every lower cover of a tuple is assigned before the tuple itself.

use std::collections::HashMap;

use rand::Rng;

use super::SynthesisError;
use crate::lattice::{Elem, FiniteLattice, LatticeError};
use crate::table::{rank, table_len, unrank, MonotoneTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolicValue {
    Fixed(Elem),
    Coord(usize),
}

impl SymbolicValue {
    fn concrete(self, args: &[Elem]) -> Elem {
        match self {
            SymbolicValue::Fixed(e) => e,
            SymbolicValue::Coord(j) => args[j],
        }
    }
}

/// One orbit of `L^n` under the stabilizer of the parameters.
#[derive(Clone, Debug)]
pub struct OrbitClass {
    pub ranks: Vec<usize>,
    pub choices: Vec<SymbolicValue>,
    pub height: usize,
}

pub fn orbit_classes(
    lattice: &FiniteLattice,
    params: &[Elem],
    arity: usize,
) -> Result<Vec<OrbitClass>, SynthesisError> {
    if !lattice.is_flat() {
        return Err(LatticeError::NotFlat(lattice.name().to_string()).into());
    }
    let movable = |e: Elem| !lattice.is_bound(e) && !params.contains(&e);
    let free = lattice.atoms().iter().filter(|&&a| movable(a)).count();
    if free < arity + 2 {
        return Err(SynthesisError::AtomBudgetExceeded {
            needed: params.len() + arity + 2,
            available: lattice.atoms().len(),
        });
    }
    let mut fixed: Vec<Elem> = vec![lattice.bottom(), lattice.top()];
    fixed.extend(params.iter().copied().filter(|&c| !lattice.is_bound(c)));
    fixed.sort();
    fixed.dedup();

    let size = lattice.size();
    let total = table_len(size, arity).expect("fits");
    let mut by_key: HashMap<Vec<i32>, usize> = HashMap::new();
    let mut classes: Vec<OrbitClass> = Vec::new();
    for r in 0..total {
        let args = unrank(r, size, arity);
        let mut seen: Vec<Elem> = Vec::new();
        let key: Vec<i32> = args
            .iter()
            .map(|&e| {
                if movable(e) {
                    let pos = seen.iter().position(|&s| s == e).unwrap_or_else(|| {
                        seen.push(e);
                        seen.len() - 1
                    });
                    -(pos as i32) - 1
                } else {
                    e.index() as i32
                }
            })
            .collect();
        let idx = *by_key.entry(key).or_insert_with(|| {
            let mut choices: Vec<SymbolicValue> = fixed.iter().map(|&e| SymbolicValue::Fixed(e)).collect();
            for (j, &e) in args.iter().enumerate() {
                if movable(e) && !args[..j].contains(&e) {
                    choices.push(SymbolicValue::Coord(j));
                }
            }
            classes.push(OrbitClass {
                ranks: Vec::new(),
                choices,
                height: args.iter().map(|&e| lattice.height(e)).sum(),
            });
            classes.len() - 1
        });
        classes[idx].ranks.push(r);
    }
    classes.sort_by_key(|c| c.height);
    Ok(classes)
}

/// True when assigning `choice` to the whole class keeps every cover
/// relation into the class monotone, given the already-assigned values.
fn admissible(
    lattice: &FiniteLattice,
    class: &OrbitClass,
    choice: SymbolicValue,
    values: &[Option<Elem>],
    arity: usize,
) -> bool {
    let size = lattice.size();
    class.ranks.iter().all(|&r| {
        let args = unrank(r, size, arity);
        let v = choice.concrete(&args);
        (0..arity).all(|i| {
            lattice.lower_covers(args[i]).iter().all(|&lo| {
                let mut below = args.clone();
                below[i] = lo;
                match values[rank(&below, size)] {
                    Some(w) => lattice.leq(w, v),
                    None => true,
                }
            })
        })
    })
}

fn assign(class: &OrbitClass, choice: SymbolicValue, values: &mut [Option<Elem>], size: usize, arity: usize) {
    for &r in &class.ranks {
        values[r] = Some(choice.concrete(&unrank(r, size, arity)));
    }
}

/// A random invariant monotone function; each orbit value is drawn uniformly
/// from the admissible choices.
pub fn random_invariant_monotone<R: Rng + ?Sized>(
    lattice: &FiniteLattice,
    params: &[Elem],
    arity: usize,
    rng: &mut R,
) -> Result<MonotoneTable, SynthesisError> {
    let classes = orbit_classes(lattice, params, arity)?;
    let size = lattice.size();
    let mut values = vec![None; table_len(size, arity).expect("fits")];
    for class in &classes {
        let ok: Vec<SymbolicValue> = class
            .choices
            .iter()
            .copied()
            .filter(|&c| admissible(lattice, class, c, &values, arity))
            .collect();
        // the top element is always admissible
        let pick = ok[rng.gen_range(0..ok.len())];
        assign(class, pick, &mut values, size, arity);
    }
    let values = values.into_iter().map(|v| v.expect("all orbits assigned")).collect();
    Ok(MonotoneTable::from_values_unchecked(lattice, arity, values))
}

/// Every invariant monotone function, in depth-first choice order. Fails
/// with `TooManyTrials` once more than `limit` functions are found.
pub fn all_invariant_monotone(
    lattice: &FiniteLattice,
    params: &[Elem],
    arity: usize,
    limit: usize,
) -> Result<Vec<MonotoneTable>, SynthesisError> {
    let classes = orbit_classes(lattice, params, arity)?;
    let mut values = vec![None; table_len(lattice.size(), arity).expect("fits")];
    let mut out = Vec::new();
    fn dfs(
        lattice: &FiniteLattice,
        classes: &[OrbitClass],
        depth: usize,
        values: &mut Vec<Option<Elem>>,
        arity: usize,
        out: &mut Vec<MonotoneTable>,
        limit: usize,
    ) -> Result<(), SynthesisError> {
        if depth == classes.len() {
            if out.len() == limit {
                return Err(SynthesisError::TooManyTrials(limit + 1));
            }
            let vals = values.iter().map(|v| v.expect("assigned")).collect();
            out.push(MonotoneTable::from_values_unchecked(lattice, arity, vals));
            return Ok(());
        }
        let class = &classes[depth];
        for &c in &class.choices {
            if admissible(lattice, class, c, values, arity) {
                assign(class, c, values, lattice.size(), arity);
                dfs(lattice, classes, depth + 1, values, arity, out, limit)?;
                for &r in &class.ranks {
                    values[r] = None;
                }
            }
        }
        Ok(())
    }
    dfs(lattice, &classes, 0, &mut values, arity, &mut out, limit)?;
    Ok(out)
}
