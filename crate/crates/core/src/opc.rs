//! Order-polynomial completeness on small lattices: the monotone maps
//! `L^n → L` against the polynomial clone of arity `n`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::antichain::verify_antichain;
use crate::lattice::{Elem, ElementTuple, FiniteLattice};
use crate::table::{rank, table_len, unrank, MonotoneTable};
use crate::term::{Assignment, Family, Term, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpcError {
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("bad certificate: {0}")]
    BadCertificate(String),
}

/// Work limits for enumeration and closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpcBudget {
    /// Maximum `|L|^n` for streaming and clone generation.
    pub max_inputs: usize,
    /// Maximum number of tables in a clone.
    pub max_clone: usize,
    /// Maximum number of live states in the counting recursion.
    pub max_states: usize,
}

impl Default for OpcBudget {
    fn default() -> Self {
        OpcBudget {
            max_inputs: 4096,
            max_clone: 200_000,
            max_states: 4_000_000,
        }
    }
}

fn input_count(lattice: &FiniteLattice, n: usize, budget: &OpcBudget) -> Result<usize, OpcError> {
    let exceeded = |needed: u128| OpcError::BudgetExceeded {
        what: "input space",
        needed,
        limit: budget.max_inputs as u128,
    };
    match table_len(lattice.size(), n) {
        Some(len) if len <= budget.max_inputs => Ok(len),
        Some(len) => Err(exceeded(len as u128)),
        None => Err(exceeded(u128::MAX)),
    }
}

/// Exact number of monotone maps `L^n → L`.
///
/// Tuples are visited in lexicographic order over a linear extension of `L`,
/// which is a linear extension of `L^n`; the state is the value vector on the
/// tuples that still have an unvisited upper cover.
pub fn count_monotone(lattice: &FiniteLattice, n: usize, budget: &OpcBudget) -> Result<u128, OpcError> {
    let s = lattice.size();
    let total = table_len(s, n).ok_or(OpcError::BudgetExceeded {
        what: "input space",
        needed: u128::MAX,
        limit: usize::MAX as u128,
    })?;
    let mut ext: Vec<Elem> = lattice.elements().collect();
    ext.sort_by_key(|&e| (lattice.height(e), e));
    let mut pos_of = vec![0usize; s];
    for (k, &e) in ext.iter().enumerate() {
        pos_of[e.index()] = k;
    }
    let weight: Vec<usize> = (0..n).map(|i| s.pow((n - 1 - i) as u32)).collect();
    let neighbours = |p: usize, up: bool| -> Vec<usize> {
        let coords = unrank(p, s, n);
        let mut out = Vec::new();
        for i in 0..n {
            let e = ext[coords[i].index()];
            let covers = if up { lattice.upper_covers(e) } else { lattice.lower_covers(e) };
            for &c in covers {
                let k = pos_of[c.index()];
                out.push(p - weight[i] * coords[i].index() + weight[i] * k);
            }
        }
        out
    };
    let last_use: Vec<usize> = (0..total)
        .map(|p| neighbours(p, true).into_iter().max().unwrap_or(p))
        .collect();

    let mut active: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u8>, u128> = HashMap::from([(Vec::new(), 1u128)]);
    let overflow = || OpcError::BudgetExceeded {
        what: "monotone count",
        needed: u128::MAX,
        limit: u128::MAX,
    };
    for p in 0..total {
        let lower: Vec<usize> = neighbours(p, false)
            .into_iter()
            .map(|q| active.binary_search(&q).expect("lower cover still active"))
            .collect();
        let keep: Vec<usize> = (0..active.len()).filter(|&i| last_use[active[i]] > p).collect();
        let add = last_use[p] > p;
        let mut next: HashMap<Vec<u8>, u128> = HashMap::new();
        for (state, count) in &states {
            for v in lattice.elements() {
                if !lower.iter().all(|&i| lattice.leq(Elem::new(state[i] as usize), v)) {
                    continue;
                }
                let mut key: Vec<u8> = keep.iter().map(|&i| state[i]).collect();
                if add {
                    key.push(v.index() as u8);
                }
                let slot = next.entry(key).or_insert(0);
                *slot = slot.checked_add(*count).ok_or_else(overflow)?;
            }
        }
        if next.len() > budget.max_states {
            return Err(OpcError::BudgetExceeded {
                what: "counting states",
                needed: next.len() as u128,
                limit: budget.max_states as u128,
            });
        }
        active = keep.iter().map(|&i| active[i]).collect();
        if add {
            active.push(p);
        }
        states = next;
    }
    states
        .values()
        .try_fold(0u128, |acc, &c| acc.checked_add(c))
        .ok_or_else(overflow)
}

/// Calls `f` on every monotone map `L^n → L`, in lexicographic order of
/// value vectors (tuples in rank order, values by element id). Returns
/// `false` if `f` stopped early.
pub fn stream_monotone(
    lattice: &FiniteLattice,
    n: usize,
    budget: &OpcBudget,
    mut f: impl FnMut(&[Elem]) -> ControlFlow<()>,
) -> Result<bool, OpcError> {
    let s = lattice.size();
    let total = input_count(lattice, n, budget)?;
    let weight: Vec<usize> = (0..n).map(|i| s.pow((n - 1 - i) as u32)).collect();
    // neighbours already assigned when r is visited: (rank, neighbour is below)
    let earlier: Vec<Vec<(usize, bool)>> = (0..total)
        .map(|r| {
            let coords = unrank(r, s, n);
            let mut out = Vec::new();
            for i in 0..n {
                let e = coords[i];
                for (covers, below) in [(lattice.lower_covers(e), true), (lattice.upper_covers(e), false)] {
                    for &c in covers {
                        let q = r - weight[i] * e.index() + weight[i] * c.index();
                        if q < r {
                            out.push((q, below));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut values = vec![lattice.bottom(); total];
    fn go(
        lattice: &FiniteLattice,
        r: usize,
        values: &mut Vec<Elem>,
        earlier: &[Vec<(usize, bool)>],
        f: &mut dyn FnMut(&[Elem]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if r == values.len() {
            return f(values);
        }
        for v in lattice.elements() {
            let ok = earlier[r].iter().all(|&(q, below)| {
                if below {
                    lattice.leq(values[q], v)
                } else {
                    lattice.leq(v, values[q])
                }
            });
            if ok {
                values[r] = v;
                go(lattice, r + 1, values, earlier, f)?;
            }
        }
        ControlFlow::Continue(())
    }
    Ok(go(lattice, 0, &mut values, &earlier, &mut f).is_continue())
}

/// Every monotone map as a table, in stream order.
pub fn enumerate_monotone(
    lattice: &FiniteLattice,
    n: usize,
    budget: &OpcBudget,
) -> Result<Vec<MonotoneTable>, OpcError> {
    let mut out = Vec::new();
    stream_monotone(lattice, n, budget, |v| {
        out.push(MonotoneTable::from_values_unchecked(lattice, n, v.to_vec()));
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// A polynomial: term in `x1..xn` and `s1..sk`, with `s_j` bound to
/// `coefficients[j - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    pub term: Term,
    pub coefficients: Vec<Elem>,
}

impl Polynomial {
    pub fn eval(&self, lattice: &FiniteLattice, args: &[Elem]) -> Elem {
        let mut asg = Assignment::new();
        for (i, &a) in args.iter().enumerate() {
            asg.set(Var::x(i as u32 + 1), a);
        }
        for (j, &c) in self.coefficients.iter().enumerate() {
            asg.set(Var::s(j as u32 + 1), c);
        }
        self.term.evaluate(lattice, &asg).expect("all slots bound")
    }

    pub fn table(&self, lattice: &FiniteLattice, n: usize) -> MonotoneTable {
        let values = (0..table_len(lattice.size(), n).expect("fits"))
            .map(|r| self.eval(lattice, &unrank(r, lattice.size(), n)))
            .collect();
        MonotoneTable::from_values_unchecked(lattice, n, values)
    }
}

/// The arity-`n` polynomial functions with a witness term for each.
#[derive(Clone, Debug)]
pub struct PolynomialClone {
    arity: usize,
    /// Non-bound elements in id order; `s_j` in a stored witness stands for
    /// `constants[j - 1]`.
    constants: Vec<Elem>,
    tables: Vec<MonotoneTable>,
    witnesses: Vec<Term>,
    index: HashMap<Vec<Elem>, usize>,
}

impl PolynomialClone {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Tables in discovery order.
    pub fn tables(&self) -> &[MonotoneTable] {
        &self.tables
    }

    pub fn contains(&self, values: &[Elem]) -> bool {
        self.index.contains_key(values)
    }

    /// Witness polynomial with coefficients renumbered by first use.
    pub fn witness(&self, values: &[Elem]) -> Option<Polynomial> {
        let i = *self.index.get(values)?;
        let term = &self.witnesses[i];
        let mut order: Vec<u32> = Vec::new();
        term.visit_vars(&mut |v| {
            if v.family == Family::S && !order.contains(&v.index) {
                order.push(v.index);
            }
        });
        Some(Polynomial {
            term: term.map_vars(&|v| match v.family {
                Family::S => Var::s(order.iter().position(|&k| k == v.index).unwrap() as u32 + 1),
                _ => v,
            }),
            coefficients: order.iter().map(|&k| self.constants[k as usize - 1]).collect(),
        })
    }
}

/// Table cells a clone may hold, whatever `max_clone` says.
pub const MAX_CLONE_CELLS: usize = 1 << 26;

/// Closure of the projections and constants under pointwise meet and join.
pub fn polynomial_functions(
    lattice: &FiniteLattice,
    n: usize,
    budget: &OpcBudget,
) -> Result<PolynomialClone, OpcError> {
    let inputs = input_count(lattice, n, budget)?;
    let max_clone = budget.max_clone.min(MAX_CLONE_CELLS / inputs.max(1));
    let constants: Vec<Elem> = lattice.elements().filter(|&e| !lattice.is_bound(e)).collect();
    let mut clone = PolynomialClone {
        arity: n,
        constants: constants.clone(),
        tables: Vec::new(),
        witnesses: Vec::new(),
        index: HashMap::new(),
    };
    let push = |clone: &mut PolynomialClone, t: MonotoneTable, w: Term| -> Result<(), OpcError> {
        if clone.index.contains_key(t.values()) {
            return Ok(());
        }
        if clone.tables.len() == max_clone {
            return Err(OpcError::BudgetExceeded {
                what: "clone size",
                needed: max_clone as u128 + 1,
                limit: max_clone as u128,
            });
        }
        clone.index.insert(t.values().to_vec(), clone.tables.len());
        clone.tables.push(t);
        clone.witnesses.push(w);
        Ok(())
    };
    for i in 0..n {
        push(&mut clone, MonotoneTable::projection(lattice, n, i), Term::x(i as u32 + 1))?;
    }
    push(&mut clone, MonotoneTable::constant(lattice, n, lattice.bottom()), Term::Zero)?;
    push(&mut clone, MonotoneTable::constant(lattice, n, lattice.top()), Term::One)?;
    for (j, &c) in constants.iter().enumerate() {
        push(&mut clone, MonotoneTable::constant(lattice, n, c), Term::s(j as u32 + 1))?;
    }
    let mut next = 0;
    while next < clone.tables.len() {
        for j in 0..=next {
            for meet in [true, false] {
                let t = clone.tables[next].pointwise(&clone.tables[j], lattice, meet);
                if clone.index.contains_key(t.values()) {
                    continue;
                }
                let (l, r) = (clone.witnesses[j].clone(), clone.witnesses[next].clone());
                let w = if meet { l.meet(r) } else { l.join(r) };
                push(&mut clone, t, w)?;
            }
        }
        next += 1;
    }
    Ok(clone)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpcReport {
    pub lattice: String,
    pub arity: usize,
    pub monotone_count: u128,
    pub polynomial_count: usize,
    pub is_opc: bool,
    /// Lexicographically first monotone map that is not polynomial.
    pub witness: Option<MonotoneTable>,
}

impl OpcReport {
    pub fn to_text(&self) -> String {
        format!(
            "lattice {}\narity {}\nmonotone {}\npolynomial {}\n{}-opc: {}\n",
            self.lattice, self.arity, self.monotone_count, self.polynomial_count, self.arity, self.is_opc
        )
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "lattice\tarity\tmonotone\tpolynomial\topc\n{}\t{}\t{}\t{}\t{}\n",
            self.lattice, self.arity, self.monotone_count, self.polynomial_count, self.is_opc
        )
    }
}

pub fn is_n_opc(lattice: &FiniteLattice, n: usize, budget: &OpcBudget) -> Result<OpcReport, OpcError> {
    let clone = polynomial_functions(lattice, n, budget)?;
    let monotone_count = count_monotone(lattice, n, budget)?;
    let is_opc = monotone_count == clone.len() as u128;
    let mut witness = None;
    if !is_opc {
        stream_monotone(lattice, n, budget, |v| {
            if clone.contains(v) {
                ControlFlow::Continue(())
            } else {
                witness = Some(MonotoneTable::from_values_unchecked(lattice, n, v.to_vec()));
                ControlFlow::Break(())
            }
        })?;
    }
    Ok(OpcReport {
        lattice: lattice.name().to_string(),
        arity: n,
        monotone_count,
        polynomial_count: clone.len(),
        is_opc,
        witness,
    })
}

/// Up-set indicators built from subsets of an antichain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismReport {
    pub antichain_size: usize,
    /// Number of pairwise distinct monotone `{0,1}`-valued maps built.
    pub distinct_maps: usize,
}

impl MechanismReport {
    pub fn expected(&self) -> usize {
        1 << self.antichain_size
    }

    pub fn holds(&self) -> bool {
        self.distinct_maps == self.expected()
    }
}

pub const MAX_MECHANISM_ANTICHAIN: usize = 16;

/// For each subset `S` of the antichain builds the indicator of the up-set
/// of `S` on `L^n`, checks it is monotone, and counts distinct tables.
pub fn antichain_mechanism(
    lattice: &FiniteLattice,
    n: usize,
    tuples: &[ElementTuple],
    budget: &OpcBudget,
) -> Result<MechanismReport, OpcError> {
    if let Some(t) = tuples.iter().find(|t| t.len() != n) {
        return Err(OpcError::BadCertificate(format!(
            "tuple of length {} used with arity {n}",
            t.len()
        )));
    }
    match verify_antichain(lattice, tuples) {
        Err(e) => return Err(OpcError::BadCertificate(e.to_string())),
        Ok(Some(v)) => {
            return Err(OpcError::BadCertificate(format!(
                "tuples {} and {} are comparable",
                v.i, v.j
            )))
        }
        Ok(None) => {}
    }
    let k = tuples.len();
    if k > MAX_MECHANISM_ANTICHAIN {
        return Err(OpcError::BudgetExceeded {
            what: "antichain size",
            needed: k as u128,
            limit: MAX_MECHANISM_ANTICHAIN as u128,
        });
    }
    let total = input_count(lattice, n, budget)?;
    let s = lattice.size();
    // above[r] = bitmask of antichain members below tuple r
    let above: Vec<u32> = (0..total)
        .map(|r| {
            let x = unrank(r, s, n);
            tuples.iter().enumerate().fold(0u32, |m, (i, d)| {
                if d.entries.iter().zip(&x).all(|(&a, &b)| lattice.leq(a, b)) {
                    m | (1 << i)
                } else {
                    m
                }
            })
        })
        .collect();
    let mut seen: HashSet<Vec<Elem>> = HashSet::new();
    for subset in 0u32..(1u32 << k) {
        let values: Vec<Elem> = above
            .iter()
            .map(|&m| if m & subset != 0 { lattice.top() } else { lattice.bottom() })
            .collect();
        let table = MonotoneTable::new(lattice, n, values).expect("up-set indicators are monotone");
        seen.insert(table.values().to_vec());
    }
    debug_assert!(tuples.iter().all(|d| rank(&d.entries, s) < total));
    Ok(MechanismReport {
        antichain_size: k,
        distinct_maps: seen.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingReport {
    pub lattice: String,
    pub arity: usize,
    pub monotone_count: u128,
    /// `None` when the clone does not fit `max_clone`.
    pub polynomial_count: Option<usize>,
    pub mechanism: Option<MechanismReport>,
}

impl CountingReport {
    pub fn ratio(&self) -> Option<f64> {
        self.polynomial_count.map(|p| self.monotone_count as f64 / p as f64)
    }

    fn polynomial_cell(&self) -> (String, String) {
        match (self.polynomial_count, self.ratio()) {
            (Some(p), Some(r)) => (p.to_string(), r.to_string()),
            _ => ("over-budget".into(), "-".into()),
        }
    }

    pub fn to_text(&self) -> String {
        let (poly, ratio) = self.polynomial_cell();
        let mut out = format!(
            "lattice {}\narity {}\nmonotone {}\npolynomial {}\nratio {}\n",
            self.lattice, self.arity, self.monotone_count, poly, ratio
        );
        if let Some(m) = &self.mechanism {
            let _ = writeln!(out, "antichain {}", m.antichain_size);
            let _ = writeln!(out, "antichain maps {} of 2^{} = {}", m.distinct_maps, m.antichain_size, m.expected());
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let (poly, ratio) = self.polynomial_cell();
        let mut head = "lattice\tarity\tmonotone\tpolynomial\tratio".to_string();
        let mut row = format!(
            "{}\t{}\t{}\t{}\t{}",
            self.lattice, self.arity, self.monotone_count, poly, ratio
        );
        if let Some(m) = &self.mechanism {
            head.push_str("\tantichain\tantichain_maps");
            let _ = write!(row, "\t{}\t{}", m.antichain_size, m.distinct_maps);
        }
        format!("{head}\n{row}\n")
    }
}

pub fn counting_report(
    lattice: &FiniteLattice,
    n: usize,
    antichain: Option<&[ElementTuple]>,
    budget: &OpcBudget,
) -> Result<CountingReport, OpcError> {
    let mechanism = antichain
        .map(|t| antichain_mechanism(lattice, n, t, budget))
        .transpose()?;
    let polynomial_count = match polynomial_functions(lattice, n, budget) {
        Ok(clone) => Some(clone.len()),
        Err(OpcError::BudgetExceeded { what: "clone size", .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CountingReport {
        lattice: lattice.name().to_string(),
        arity: n,
        monotone_count: count_monotone(lattice, n, budget)?,
        polynomial_count,
        mechanism,
    })
}
