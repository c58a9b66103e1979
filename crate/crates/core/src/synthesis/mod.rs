//! Polynomial synthesis for stabilizer-invariant monotone functions on flat
//! lattices.
//!
//! For `f: L^n → L` invariant under every atom permutation fixing the
//! parameters `c̄`, [`synthesize`] builds a term `p(s̄; x̄; t̄)` such that
//! `p(c̄; ā; d̄) = f(ā)` for every `ā` and every tuple `d̄` of `3^n` distinct
//! atoms outside `c̄`. The recursion on arity combines:
//!
//! * `τ_constant`: slices at the parameters and the bounds, gated by
//!   characteristic terms of the last argument;
//! * `τ_raw`: the slice at a generic atom `α`, synthesized with `α` as an
//!   extra parameter whose slot is then renamed to the last argument;
//! * `τ_clean`: a majority vote of three copies of `τ_raw` on disjoint blocks
//!   of fresh slots, so a collision of `α` with one block is outvoted;
//! * `τ_bounded = τ_clean ∧ τ_1 ∧ χ_A`, restricted to generic atoms;
//! * `p = τ_constant ∨ τ_bounded`.

pub mod corpus;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{
    stabilizer_transpositions, AtomPermutation, Elem, FiniteLattice, LatticeError, Transposition,
};
use crate::table::{rank, table_len, tuples, unrank, MonotoneTable};
use crate::term::{chi_basic, chi_cofinite, chi_top, mu_term, ChiError, CompiledTerm, Family, Term, Var};

pub use crate::table::MonotoneTable as MonotoneFunctionTable;

/// Upper bound on the number of fresh tuples checked by `Trials::All`.
pub const ALL_TRIALS_LIMIT: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("function is not invariant under the stabilizer of the parameters: {0}")]
    NotInvariant(String),
    #[error("atom budget exceeded: need {needed} atoms, {available} available")]
    AtomBudgetExceeded { needed: usize, available: usize },
    #[error("constant value `{0}` is not a parameter or bound")]
    BaseConstantNotDefinable(String),
    #[error("table is over {table} elements but the lattice has {lattice}")]
    SizeMismatch { table: usize, lattice: usize },
    #[error("parameter id {0} is not an element of the lattice")]
    BadParameter(usize),
    #[error("fresh tuple ({0}) is not independent over the parameters")]
    NotIndependent(String),
    #[error("polynomial slots (k={poly_k}, n={poly_n}) do not match the problem (k={k}, n={n})")]
    SlotMismatch {
        poly_k: usize,
        poly_n: usize,
        k: usize,
        n: usize,
    },
    #[error("{0} fresh tuples exceed the exhaustive verification limit")]
    TooManyTrials(usize),
    #[error("atom {0} cannot serve as the generic atom")]
    BadAlpha(String),
    #[error(transparent)]
    Chi(#[from] ChiError),
}

/// First counterexample to `f(π ū) = π f(ū)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceViolation {
    pub transposition: Transposition,
    pub args: Vec<Elem>,
}

impl InvarianceViolation {
    pub fn describe(&self, lattice: &FiniteLattice) -> String {
        let Transposition(a, b) = self.transposition;
        let args: Vec<&str> = self.args.iter().map(|&e| lattice.element_name(e)).collect();
        format!(
            "transposition ({} {}) at ({})",
            lattice.element_name(a),
            lattice.element_name(b),
            args.join(" ")
        )
    }
}

/// A function together with parameters, on a flat lattice.
#[derive(Clone, Debug)]
pub struct SynthesisProblem<'a> {
    lattice: &'a FiniteLattice,
    f: MonotoneTable,
    original: Vec<Elem>,
    params: Vec<Elem>,
    slot_map: Vec<u32>,
}

impl<'a> SynthesisProblem<'a> {
    /// Parameters are normalized: repeats and bounds are dropped, and the
    /// original slot of each kept parameter is recorded.
    pub fn new(lattice: &'a FiniteLattice, f: MonotoneTable, params: &[Elem]) -> Result<Self, SynthesisError> {
        if !lattice.is_flat() {
            return Err(LatticeError::NotFlat(lattice.name().to_string()).into());
        }
        if f.base() != lattice.size() {
            return Err(SynthesisError::SizeMismatch {
                table: f.base(),
                lattice: lattice.size(),
            });
        }
        let mut normalized = Vec::new();
        let mut slot_map = Vec::new();
        for (i, &c) in params.iter().enumerate() {
            if c.index() >= lattice.size() {
                return Err(SynthesisError::BadParameter(c.index()));
            }
            if !lattice.is_bound(c) && !normalized.contains(&c) {
                normalized.push(c);
                slot_map.push(i as u32 + 1);
            }
        }
        Ok(SynthesisProblem {
            lattice,
            f,
            original: params.to_vec(),
            params: normalized,
            slot_map,
        })
    }

    pub fn lattice(&self) -> &'a FiniteLattice {
        self.lattice
    }

    pub fn function(&self) -> &MonotoneTable {
        &self.f
    }

    pub fn arity(&self) -> usize {
        self.f.arity()
    }

    /// Normalized parameters.
    pub fn params(&self) -> &[Elem] {
        &self.params
    }

    /// Parameters as supplied.
    pub fn original_params(&self) -> &[Elem] {
        &self.original
    }

    /// `slot_map()[i]` is the original slot (1-based) of normalized parameter `i`.
    pub fn slot_map(&self) -> &[u32] {
        &self.slot_map
    }

    pub fn fresh_budget(&self) -> usize {
        3usize.pow(self.arity() as u32)
    }
}

/// Emitted polynomial over `s1..sk, x1..xn, t1..t_{3^n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesizedPolynomial {
    pub term: Term,
    pub k: usize,
    pub n: usize,
    pub t_budget: usize,
}

impl SynthesizedPolynomial {
    pub fn declared_slots(&self) -> Vec<Var> {
        crate::term::slot_layout(self.k, self.n, self.t_budget)
    }
}

/// Pairwise distinct and avoiding the parameters and the bounds.
pub fn is_independent(lattice: &FiniteLattice, params: &[Elem], fresh: &[Elem]) -> bool {
    fresh.iter().enumerate().all(|(i, &d)| {
        !lattice.is_bound(d) && !params.contains(&d) && !fresh[..i].contains(&d)
    })
}

fn free_atoms(lattice: &FiniteLattice, params: &[Elem]) -> Vec<Elem> {
    lattice
        .atoms()
        .iter()
        .copied()
        .filter(|a| !params.contains(a))
        .collect()
}

/// The `count` lowest-indexed atoms outside the parameters.
pub fn fresh_independent(
    lattice: &FiniteLattice,
    params: &[Elem],
    count: usize,
) -> Result<Vec<Elem>, SynthesisError> {
    let free = free_atoms(lattice, params);
    if free.len() < count {
        return Err(SynthesisError::AtomBudgetExceeded {
            needed: count,
            available: free.len(),
        });
    }
    Ok(free[..count].to_vec())
}

/// Checks `f(π ū) = π f(ū)` for each generating transposition `π` of the
/// stabilizer of `params`.
pub fn check_invariance_of(
    lattice: &FiniteLattice,
    f: &MonotoneTable,
    params: &[Elem],
) -> Result<Result<(), InvarianceViolation>, LatticeError> {
    let size = lattice.size();
    for t in stabilizer_transpositions(lattice, params)? {
        for (r, &v) in f.values().iter().enumerate() {
            let args = unrank(r, size, f.arity());
            let moved: Vec<Elem> = args.iter().map(|&e| t.apply(e)).collect();
            if f.values()[rank(&moved, size)] != t.apply(v) {
                return Ok(Err(InvarianceViolation {
                    transposition: t,
                    args,
                }));
            }
        }
    }
    Ok(Ok(()))
}

pub fn check_invariance(problem: &SynthesisProblem<'_>) -> Result<(), InvarianceViolation> {
    check_invariance_of(problem.lattice, &problem.f, &problem.params)
        .expect("problem lattice is flat")
}

/// `f_α(ū) = f(ū, α)`.
pub fn slice(lattice: &FiniteLattice, f: &MonotoneTable, alpha: Elem) -> MonotoneTable {
    assert!(f.arity() >= 1, "cannot slice a constant");
    let size = lattice.size();
    let values = (0..table_len(size, f.arity() - 1).expect("fits"))
        .map(|r| f.values()[r * size + alpha.index()])
        .collect();
    MonotoneTable::from_values_unchecked(lattice, f.arity() - 1, values)
}

/// `(π f)(π ā) = π(f(ā))`.
pub fn conjugate_function(lattice: &FiniteLattice, f: &MonotoneTable, pi: &AtomPermutation) -> MonotoneTable {
    let inv = pi.inverse();
    let values = tuples(lattice.size(), f.arity())
        .map(|args| {
            let pre: Vec<Elem> = args.iter().map(|&e| inv.apply(e)).collect();
            pi.apply(f.value(&pre))
        })
        .collect();
    MonotoneTable::from_values_unchecked(lattice, f.arity(), values)
}

/// Intermediate terms of one recursion step, in normalized slot numbering.
#[derive(Clone, Debug)]
pub struct SynthesisStages {
    pub alpha: Elem,
    /// Terms for the slices at `c1..ck`, then `0`, then `1`.
    pub slices: Vec<Term>,
    pub tau_constant: Term,
    pub tau_raw: Term,
    pub tau_clean: Term,
    pub tau_bounded: Term,
    pub polynomial: Term,
}

/// Node counts of the stage terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageMetrics {
    pub tau_constant: usize,
    pub tau_raw: usize,
    pub tau_clean: usize,
    pub tau_bounded: usize,
    pub total: usize,
}

impl SynthesisStages {
    pub fn metrics(&self) -> StageMetrics {
        StageMetrics {
            tau_constant: self.tau_constant.size(),
            tau_raw: self.tau_raw.size(),
            tau_clean: self.tau_clean.size(),
            tau_bounded: self.tau_bounded.size(),
            total: self.polynomial.size(),
        }
    }
}

fn base_term(lattice: &FiniteLattice, f: &MonotoneTable, params: &[Elem]) -> Result<Term, SynthesisError> {
    let v = f.values()[0];
    if v == lattice.bottom() {
        Ok(Term::Zero)
    } else if v == lattice.top() {
        Ok(Term::One)
    } else if let Some(i) = params.iter().position(|&c| c == v) {
        Ok(Term::s(i as u32 + 1))
    } else {
        Err(SynthesisError::BaseConstantNotDefinable(
            lattice.element_name(v).to_string(),
        ))
    }
}

fn synth_term(lattice: &FiniteLattice, f: &MonotoneTable, params: &[Elem]) -> Result<Term, SynthesisError> {
    if f.arity() == 0 {
        base_term(lattice, f, params)
    } else {
        Ok(build_stages(lattice, f, params, None)?.polynomial)
    }
}

fn canonical_alpha(lattice: &FiniteLattice, params: &[Elem]) -> Result<Elem, SynthesisError> {
    free_atoms(lattice, params)
        .first()
        .copied()
        .ok_or(SynthesisError::AtomBudgetExceeded {
            needed: params.len() + 1,
            available: lattice.atoms().len(),
        })
}

fn build_stages(
    lattice: &FiniteLattice,
    f: &MonotoneTable,
    params: &[Elem],
    alpha: Option<Elem>,
) -> Result<SynthesisStages, SynthesisError> {
    debug_assert!(f.arity() >= 1);
    let n = (f.arity() - 1) as u32;
    let k = params.len() as u32;
    let block = 3u32.pow(n);
    let last = n + 1;

    let mut slices = Vec::with_capacity(params.len() + 2);
    for &c in params.iter().chain([lattice.bottom(), lattice.top()].iter()) {
        slices.push(synth_term(lattice, &slice(lattice, f, c), params)?);
    }
    let tau_zero = &slices[params.len()];
    let tau_one = &slices[params.len() + 1];

    let mut tau_constant = tau_zero.clone();
    for (i, tau) in slices[..params.len()].iter().enumerate() {
        tau_constant = tau_constant.join(chi_basic(i as u32 + 1, last, 1, 2, 3).meet(tau.clone()));
    }
    tau_constant = tau_constant.join(chi_top(last).meet(tau_one.clone()));

    let alpha = match alpha {
        Some(a) => {
            if !lattice.atoms().contains(&a) || params.contains(&a) {
                return Err(SynthesisError::BadAlpha(lattice.element_name(a).to_string()));
            }
            a
        }
        None => canonical_alpha(lattice, params)?,
    };
    let mut extended = Vec::with_capacity(params.len() + 1);
    extended.push(alpha);
    extended.extend_from_slice(params);
    let inner = synth_term(lattice, &slice(lattice, f, alpha), &extended)?;
    // s1 becomes the last argument, the remaining parameters shift down
    let tau_raw = inner.map_vars(&|v| match v.family {
        Family::S if v.index == 1 => Var::x(last),
        Family::S => Var::s(v.index - 1),
        _ => v,
    });
    let sigma = |copy: u32| {
        tau_raw.map_vars(&|v| match v.family {
            Family::T => Var::t((copy - 1) * block + v.index),
            _ => v,
        })
    };
    let tau_clean = mu_term(sigma(1), sigma(2), sigma(3));
    let excluded: Vec<u32> = (1..=k).collect();
    let tau_bounded = tau_clean
        .clone()
        .meet(tau_one.clone())
        .meet(chi_cofinite(&excluded, false, k, last)?);
    let polynomial = tau_constant.clone().join(tau_bounded.clone());
    Ok(SynthesisStages {
        alpha,
        slices,
        tau_constant,
        tau_raw,
        tau_clean,
        tau_bounded,
        polynomial,
    })
}

fn precheck(problem: &SynthesisProblem<'_>) -> Result<(), SynthesisError> {
    if let Err(v) = check_invariance(problem) {
        return Err(SynthesisError::NotInvariant(v.describe(problem.lattice)));
    }
    let needed = problem.params.len() + problem.fresh_budget();
    let available = problem.lattice.atoms().len();
    if available < needed {
        return Err(SynthesisError::AtomBudgetExceeded { needed, available });
    }
    Ok(())
}

/// Synthesizes the polynomial for `problem`. The returned term addresses
/// parameters by their original slots.
pub fn synthesize(problem: &SynthesisProblem<'_>) -> Result<SynthesizedPolynomial, SynthesisError> {
    precheck(problem)?;
    let term = synth_term(problem.lattice, &problem.f, &problem.params)?;
    let slot_map = &problem.slot_map;
    let term = term.map_vars(&|v| match v.family {
        Family::S => Var::s(slot_map[v.index as usize - 1]),
        _ => v,
    });
    Ok(SynthesizedPolynomial {
        term,
        k: problem.original.len(),
        n: problem.arity(),
        t_budget: problem.fresh_budget(),
    })
}

/// Top-level stages for a problem of arity ≥ 1, optionally with a chosen
/// generic atom. Terms use normalized parameter slots.
pub fn synthesize_stages(
    problem: &SynthesisProblem<'_>,
    alpha: Option<Elem>,
) -> Result<SynthesisStages, SynthesisError> {
    assert!(problem.arity() >= 1, "stages exist only for positive arity");
    precheck(problem)?;
    build_stages(problem.lattice, &problem.f, &problem.params, alpha)
}

/// Which fresh tuples to check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trials {
    All,
    Sample(usize),
    Explicit(Vec<Vec<Elem>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub fresh: Vec<Elem>,
    pub args: Vec<Elem>,
    pub expected: Elem,
    pub got: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub trials: usize,
    pub inputs_per_trial: usize,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn is_success(&self) -> bool {
        self.mismatch.is_none()
    }

    pub fn describe(&self, lattice: &FiniteLattice) -> String {
        match &self.mismatch {
            None => format!(
                "verified: {} fresh tuples x {} inputs",
                self.trials, self.inputs_per_trial
            ),
            Some(m) => {
                let names = |v: &[Elem]| {
                    v.iter()
                        .map(|&e| lattice.element_name(e))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                format!(
                    "mismatch at x=({}) t=({}): expected {} got {}",
                    names(&m.args),
                    names(&m.fresh),
                    lattice.element_name(m.expected),
                    lattice.element_name(m.got)
                )
            }
        }
    }
}

fn count_arrangements(n: usize, r: usize) -> Option<usize> {
    if r > n {
        return Some(0);
    }
    (n - r + 1..=n).try_fold(1usize, |acc, x| acc.checked_mul(x))
}

/// Every ordered tuple of `len` distinct atoms outside `params`.
pub fn all_independent(
    lattice: &FiniteLattice,
    params: &[Elem],
    len: usize,
) -> Result<Vec<Vec<Elem>>, SynthesisError> {
    let free = free_atoms(lattice, params);
    let count = count_arrangements(free.len(), len).unwrap_or(usize::MAX);
    if count > ALL_TRIALS_LIMIT {
        return Err(SynthesisError::TooManyTrials(count));
    }
    let mut out = Vec::with_capacity(count);
    let mut current = Vec::with_capacity(len);
    let mut used = vec![false; free.len()];
    fn rec(
        free: &[Elem],
        len: usize,
        current: &mut Vec<Elem>,
        used: &mut [bool],
        out: &mut Vec<Vec<Elem>>,
    ) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for i in 0..free.len() {
            if !used[i] {
                used[i] = true;
                current.push(free[i]);
                rec(free, len, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(&free, len, &mut current, &mut used, &mut out);
    Ok(out)
}

/// Up to `count` distinct fresh tuples: rotations of the free atoms, taken
/// forwards and backwards. The first is [`fresh_independent`].
pub fn sample_independent(
    lattice: &FiniteLattice,
    params: &[Elem],
    len: usize,
    count: usize,
) -> Result<Vec<Vec<Elem>>, SynthesisError> {
    let free = free_atoms(lattice, params);
    if free.len() < len {
        return Err(SynthesisError::AtomBudgetExceeded {
            needed: len,
            available: free.len(),
        });
    }
    let mut out: Vec<Vec<Elem>> = Vec::new();
    let m = free.len();
    for j in 0..2 * m {
        if out.len() == count {
            break;
        }
        let shift = j / 2;
        let mut cand: Vec<Elem> = (0..len).map(|i| free[(shift + i) % m]).collect();
        if j % 2 == 1 {
            cand.reverse();
        }
        if !out.contains(&cand) {
            out.push(cand);
        }
    }
    Ok(out)
}

/// Evaluates `poly` against `f` on every argument tuple, for each fresh tuple.
pub fn verify_polynomial(
    problem: &SynthesisProblem<'_>,
    poly: &SynthesizedPolynomial,
    trials: &Trials,
) -> Result<VerifyReport, SynthesisError> {
    let lattice = problem.lattice;
    if poly.k != problem.original.len() || poly.n != problem.arity() {
        return Err(SynthesisError::SlotMismatch {
            poly_k: poly.k,
            poly_n: poly.n,
            k: problem.original.len(),
            n: problem.arity(),
        });
    }
    let fresh_sets = match trials {
        Trials::All => all_independent(lattice, &problem.params, poly.t_budget)?,
        Trials::Sample(c) => sample_independent(lattice, &problem.params, poly.t_budget, *c)?,
        Trials::Explicit(list) => {
            for d in list {
                if d.len() != poly.t_budget || !is_independent(lattice, &problem.params, d) {
                    let names: Vec<&str> = d.iter().map(|&e| lattice.element_name(e)).collect();
                    return Err(SynthesisError::NotIndependent(names.join(",")));
                }
            }
            list.clone()
        }
    };
    let compiled = CompiledTerm::with_layout(&poly.term, poly.k, poly.n, poly.t_budget)
        .map_err(|e| SynthesisError::NotIndependent(e.to_string()))?;
    let size = lattice.size();
    let inputs = table_len(size, poly.n).expect("fits");
    let (k, n) = (poly.k, poly.n);
    let mismatch = fresh_sets.par_iter().find_map_first(|fresh| {
        let mut slots = Vec::with_capacity(k + n + fresh.len());
        slots.extend_from_slice(&problem.original);
        slots.extend(std::iter::repeat_n(lattice.bottom(), n));
        slots.extend_from_slice(fresh);
        let mut scratch = Vec::with_capacity(compiled.dag_size());
        for r in 0..inputs {
            let args = unrank(r, size, n);
            slots[k..k + n].copy_from_slice(&args);
            let got = compiled.eval(lattice, &slots, &mut scratch);
            let expected = problem.f.values()[r];
            if got != expected {
                return Some(Mismatch {
                    fresh: fresh.clone(),
                    args,
                    expected,
                    got,
                });
            }
        }
        None
    });
    Ok(VerifyReport {
        trials: fresh_sets.len(),
        inputs_per_trial: inputs,
        mismatch,
    })
}

/// One row of the term-growth report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub arity: usize,
    pub metrics: StageMetrics,
    pub dag_size: usize,
}

/// Synthesizes the projection onto the first argument for each arity in
/// `1..=max_arity` (term shape does not depend on the function) and reports
/// node counts per stage.
pub fn growth_report(lattice: &FiniteLattice, max_arity: usize) -> Result<Vec<GrowthRow>, SynthesisError> {
    let mut rows = Vec::new();
    for arity in 1..=max_arity {
        let f = MonotoneTable::projection(lattice, arity, 0);
        let problem = SynthesisProblem::new(lattice, f, &[])?;
        let stages = synthesize_stages(&problem, None)?;
        let k = 0;
        let dag_size = CompiledTerm::with_layout(&stages.polynomial, k, arity, problem.fresh_budget())
            .map(|c| c.dag_size())
            .unwrap_or(0);
        rows.push(GrowthRow {
            arity,
            metrics: stages.metrics(),
            dag_size,
        });
    }
    Ok(rows)
}

pub fn growth_tsv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("arity\ttau_constant\ttau_raw\ttau_clean\ttau_bounded\ttotal_nodes\tdag_nodes\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.arity,
            r.metrics.tau_constant,
            r.metrics.tau_raw,
            r.metrics.tau_clean,
            r.metrics.tau_bounded,
            r.metrics.total,
            r.dag_size
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_standard;
    use crate::term::Assignment;

    fn lat(spec: &str) -> FiniteLattice {
        make_standard(spec).unwrap()
    }

    fn el(l: &FiniteLattice, n: &str) -> Elem {
        l.element(n).unwrap()
    }

    fn els(l: &FiniteLattice, ns: &[&str]) -> Vec<Elem> {
        ns.iter().map(|n| el(l, n)).collect()
    }

    #[test]
    fn independence() {
        let f5 = lat("flat:5");
        let c = els(&f5, &["a1"]);
        assert!(is_independent(&f5, &c, &els(&f5, &["a2", "a3", "a4"])));
        assert!(!is_independent(&f5, &c, &els(&f5, &["a1", "a2", "a3"])));
        assert!(!is_independent(&f5, &c, &els(&f5, &["a2", "a2", "a3"])));
        assert!(!is_independent(&f5, &c, &els(&f5, &["a2", "1", "a3"])));
    }

    #[test]
    fn fresh_selection() {
        let f5 = lat("flat:5");
        assert_eq!(
            fresh_independent(&f5, &els(&f5, &["a2"]), 3).unwrap(),
            els(&f5, &["a1", "a3", "a4"])
        );
        let f3 = lat("flat:3");
        assert!(matches!(
            fresh_independent(&f3, &els(&f3, &["a1"]), 3),
            Err(SynthesisError::AtomBudgetExceeded { needed: 3, available: 2 })
        ));
        let f4 = lat("flat:4");
        assert_eq!(fresh_independent(&f4, &[], 1).unwrap(), els(&f4, &["a1"]));
    }

    #[test]
    fn invariance_examples() {
        let f4 = lat("flat:4");
        let zero = MonotoneTable::constant(&f4, 0, f4.bottom());
        let p = SynthesisProblem::new(&f4, zero, &[]).unwrap();
        assert_eq!(check_invariance(&p), Ok(()));
        let a1 = MonotoneTable::constant(&f4, 0, el(&f4, "a1"));
        let p = SynthesisProblem::new(&f4, a1, &[]).unwrap();
        assert_eq!(
            check_invariance(&p),
            Err(InvarianceViolation {
                transposition: Transposition(el(&f4, "a1"), el(&f4, "a2")),
                args: vec![],
            })
        );
        let id = MonotoneTable::projection(&f4, 1, 0);
        let p = SynthesisProblem::new(&f4, id, &[]).unwrap();
        assert_eq!(check_invariance(&p), Ok(()));
    }

    #[test]
    fn slices() {
        let f3 = lat("flat:3");
        let id = MonotoneTable::projection(&f3, 1, 0);
        assert_eq!(slice(&f3, &id, el(&f3, "a1")).values(), &[el(&f3, "a1")]);
        let join = MonotoneTable::from_fn(&f3, 2, |a| f3.join(a[0], a[1])).unwrap();
        let s = slice(&f3, &join, f3.top());
        assert!(s.values().iter().all(|&v| v == f3.top()));
        let meet = MonotoneTable::from_fn(&f3, 2, |a| f3.meet(a[0], a[1])).unwrap();
        let s = slice(&f3, &meet, f3.bottom());
        assert!(s.values().iter().all(|&v| v == f3.bottom()));
        assert!(s.monotonicity_violation(&f3).is_none());
    }

    #[test]
    fn conjugation() {
        let f5 = lat("flat:5");
        let f = MonotoneTable::constant(&f5, 1, el(&f5, "a1"));
        let id = AtomPermutation::identity(&f5);
        assert_eq!(conjugate_function(&f5, &f, &id), f);
        let swap = AtomPermutation::from_transposition(&f5, Transposition(el(&f5, "a1"), el(&f5, "a2")));
        let g = conjugate_function(&f5, &f, &swap);
        assert!(g.values().iter().all(|&v| v == el(&f5, "a2")));
        let binary = MonotoneTable::from_fn(&f5, 2, |a| {
            if a[0] == el(&f5, "a3") || a[0] == f5.top() { f5.top() } else { f5.meet(a[0], a[1]) }
        })
        .unwrap();
        let images = els(&f5, &["a4", "a1", "a5", "a3", "a2"]);
        let pi = AtomPermutation::from_atom_images(&f5, &images).unwrap();
        let there = conjugate_function(&f5, &binary, &pi);
        let back = conjugate_function(&f5, &there, &pi.inverse());
        assert_eq!(back, binary);
    }

    #[test]
    fn base_cases() {
        let f4 = lat("flat:4");
        let one = MonotoneTable::constant(&f4, 0, f4.top());
        let p = SynthesisProblem::new(&f4, one, &[]).unwrap();
        assert_eq!(synthesize(&p).unwrap().term, Term::One);
        let c = MonotoneTable::constant(&f4, 0, el(&f4, "a3"));
        let p = SynthesisProblem::new(&f4, c, &els(&f4, &["a2", "a3"])).unwrap();
        assert_eq!(synthesize(&p).unwrap().term, Term::s(2));
        // one movable atom: invariant, yet not expressible without naming it
        let f2 = lat("flat:2");
        let c = MonotoneTable::constant(&f2, 0, el(&f2, "a2"));
        let p = SynthesisProblem::new(&f2, c, &els(&f2, &["a1"])).unwrap();
        assert!(matches!(synthesize(&p), Err(SynthesisError::BaseConstantNotDefinable(_))));
    }

    #[test]
    fn errors_are_reported_in_order() {
        let f4 = lat("flat:4");
        let c = MonotoneTable::constant(&f4, 1, el(&f4, "a1"));
        let p = SynthesisProblem::new(&f4, c, &[]).unwrap();
        assert!(matches!(synthesize(&p), Err(SynthesisError::NotInvariant(_))));
        let id = MonotoneTable::projection(&f4, 2, 0);
        let p = SynthesisProblem::new(&f4, id, &[]).unwrap();
        assert!(matches!(
            synthesize(&p),
            Err(SynthesisError::AtomBudgetExceeded { needed: 9, available: 4 })
        ));
        let n5 = lat("n5");
        let f = MonotoneTable::constant(&n5, 0, n5.top());
        assert!(matches!(SynthesisProblem::new(&n5, f, &[]), Err(SynthesisError::Lattice(_))));
    }

    #[test]
    fn parameter_normalization_keeps_original_slots() {
        let f8 = lat("flat:8");
        let a3 = el(&f8, "a3");
        // characteristic function of the up-set of a3
        let f = MonotoneTable::from_fn(&f8, 1, |a| if f8.leq(a3, a[0]) { f8.top() } else { f8.bottom() })
            .unwrap();
        let params = vec![f8.top(), a3, a3, f8.bottom()];
        let p = SynthesisProblem::new(&f8, f, &params).unwrap();
        assert_eq!(p.params(), &[a3]);
        assert_eq!(p.slot_map(), &[2]);
        let poly = synthesize(&p).unwrap();
        assert!(poly.term.free_vars().iter().all(|v| v.family != Family::S || v.index == 2));
        assert!(verify_polynomial(&p, &poly, &Trials::All).unwrap().is_success());
    }

    #[test]
    fn identity_on_flat30() {
        let l = lat("flat:30");
        let id = MonotoneTable::projection(&l, 1, 0);
        let p = SynthesisProblem::new(&l, id, &[]).unwrap();
        let poly = synthesize(&p).unwrap();
        assert_eq!(poly.t_budget, 3);
        let declared = poly.declared_slots();
        assert!(poly.term.free_vars().iter().all(|v| declared.contains(v)));
        let report = verify_polynomial(&p, &poly, &Trials::All).unwrap();
        assert!(report.is_success(), "{}", report.describe(&l));
        assert_eq!(report.trials, 30 * 29 * 28);
    }

    #[test]
    fn characteristic_of_parameter_on_flat12() {
        let l = lat("flat:12");
        let a1 = el(&l, "a1");
        let f = MonotoneTable::from_fn(&l, 1, |a| if l.leq(a1, a[0]) { l.top() } else { l.bottom() }).unwrap();
        let p = SynthesisProblem::new(&l, f, &[a1]).unwrap();
        let poly = synthesize(&p).unwrap();
        let report = verify_polynomial(&p, &poly, &Trials::All).unwrap();
        assert!(report.is_success());
        assert_eq!(report.inputs_per_trial, 14);
    }

    #[test]
    fn verification_failures() {
        let f4 = lat("flat:4");
        let id = MonotoneTable::projection(&f4, 1, 0);
        let p = SynthesisProblem::new(&f4, id, &[]).unwrap();
        let zero = SynthesizedPolynomial {
            term: Term::Zero,
            k: 0,
            n: 1,
            t_budget: 3,
        };
        let report = verify_polynomial(&p, &zero, &Trials::Sample(1)).unwrap();
        let m = report.mismatch.unwrap();
        // first mismatching argument in rank order is the first atom
        assert_eq!(m.args, els(&f4, &["a1"]));
        let bad = Trials::Explicit(vec![els(&f4, &["a1", "a1", "a2"])]);
        assert!(matches!(
            verify_polynomial(&p, &zero, &bad),
            Err(SynthesisError::NotIndependent(_))
        ));
    }

    #[test]
    fn stage_contracts_on_flat8() {
        let l = lat("flat:8");
        let (a1, a2) = (el(&l, "a1"), el(&l, "a2"));
        let params = vec![a1, a2];
        // unary invariant function mixing parameters and the identity
        let f = MonotoneTable::from_fn(&l, 1, |a| {
            let x = a[0];
            if x == a1 || x == l.top() { l.top() } else if x == a2 { a2 } else { x }
        });
        let f = f.unwrap();
        let p = SynthesisProblem::new(&l, f.clone(), &params).unwrap();
        let st = synthesize_stages(&p, None).unwrap();
        let free = free_atoms(&l, &params);
        let special = |e: Elem| l.is_bound(e) || params.contains(&e);
        for d in all_independent(&l, &params, 3).unwrap().iter().step_by(7) {
            for x in l.elements() {
                let asg = Assignment::from_slots(&params, &[x], d);
                let fx = f.value(&[x]);
                let tc = st.tau_constant.evaluate(&l, &asg).unwrap();
                let expected = if special(x) { fx } else { f.value(&[l.bottom()]) };
                assert_eq!(tc, expected);
                let tb = st.tau_bounded.evaluate(&l, &asg).unwrap();
                if x == l.top() {
                    assert!(l.leq(tb, f.value(&[l.top()])));
                } else if special(x) {
                    assert_eq!(tb, l.bottom());
                } else {
                    assert!(free.contains(&x));
                    assert_eq!(tb, fx);
                }
            }
        }
    }
}
