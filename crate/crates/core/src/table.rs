//! Explicit value tables for functions `L^n → L`.
//!
//! Argument tuples are ranked lexicographically by element id, most
//! significant coordinate first.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lattice::{make_standard_with_limit, Elem, FiniteLattice, LatticeError};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("table has {got} values, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("not monotone: f({lower}) = {lower_value} but f({upper}) = {upper_value}")]
    NotMonotone {
        lower: String,
        upper: String,
        lower_value: String,
        upper_value: String,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("table lattice `{table}` does not match `{expected}`")]
    LatticeMismatch { table: String, expected: String },
    #[error("table of arity {arity} over {size} elements is too large")]
    TooLarge { arity: usize, size: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Iterates over all tuples of `L^n` in rank order.
pub fn tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<Elem>> {
    let count = table_len(size, arity).expect("tuple space fits in memory");
    (0..count).map(move |r| unrank(r, size, arity))
}

pub fn table_len(size: usize, arity: usize) -> Option<usize> {
    size.checked_pow(arity as u32)
}

pub fn rank(args: &[Elem], size: usize) -> usize {
    args.iter().fold(0, |acc, e| acc * size + e.index())
}

pub fn unrank(mut r: usize, size: usize, arity: usize) -> Vec<Elem> {
    let mut out = vec![Elem::new(0); arity];
    for slot in out.iter_mut().rev() {
        *slot = Elem::new(r % size);
        r /= size;
    }
    out
}

/// A monotone map `L^n → L` stored as its value table.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MonotoneTable {
    arity: usize,
    size: usize,
    values: Vec<Elem>,
}

impl MonotoneTable {
    /// Validates length and monotonicity.
    pub fn new(lattice: &FiniteLattice, arity: usize, values: Vec<Elem>) -> Result<Self, TableError> {
        let expected = table_len(lattice.size(), arity).ok_or(TableError::TooLarge {
            arity,
            size: lattice.size(),
        })?;
        if values.len() != expected {
            return Err(TableError::WrongLength {
                got: values.len(),
                expected,
            });
        }
        let table = MonotoneTable {
            arity,
            size: lattice.size(),
            values,
        };
        if let Some((lo, hi)) = table.monotonicity_violation(lattice) {
            let show = |t: &[Elem]| {
                t.iter()
                    .map(|&e| lattice.element_name(e))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            return Err(TableError::NotMonotone {
                lower_value: lattice.element_name(table.value(&lo)).to_string(),
                upper_value: lattice.element_name(table.value(&hi)).to_string(),
                lower: show(&lo),
                upper: show(&hi),
            });
        }
        Ok(table)
    }

    /// Builds the table of `f`, checking monotonicity.
    pub fn from_fn(
        lattice: &FiniteLattice,
        arity: usize,
        f: impl Fn(&[Elem]) -> Elem,
    ) -> Result<Self, TableError> {
        let values = tuples(lattice.size(), arity).map(|t| f(&t)).collect();
        Self::new(lattice, arity, values)
    }

    /// Caller guarantees monotonicity.
    pub(crate) fn from_values_unchecked(lattice: &FiniteLattice, arity: usize, values: Vec<Elem>) -> Self {
        debug_assert_eq!(Some(values.len()), table_len(lattice.size(), arity));
        MonotoneTable {
            arity,
            size: lattice.size(),
            values,
        }
    }

    pub fn constant(lattice: &FiniteLattice, arity: usize, value: Elem) -> Self {
        let len = table_len(lattice.size(), arity).expect("table fits");
        Self::from_values_unchecked(lattice, arity, vec![value; len])
    }

    pub fn projection(lattice: &FiniteLattice, arity: usize, coord: usize) -> Self {
        assert!(coord < arity);
        let values = tuples(lattice.size(), arity).map(|t| t[coord]).collect();
        Self::from_values_unchecked(lattice, arity, values)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Size of the lattice the table is over.
    pub fn base(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn value(&self, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.arity);
        self.values[rank(args, self.size)]
    }

    /// First cover pair `(u, v)` with `u ⋖ v` but `f(u) ≰ f(v)`.
    pub fn monotonicity_violation(&self, lattice: &FiniteLattice) -> Option<(Vec<Elem>, Vec<Elem>)> {
        let weight: Vec<usize> = (0..self.arity)
            .map(|i| self.size.pow((self.arity - 1 - i) as u32))
            .collect();
        for (r, &v) in self.values.iter().enumerate() {
            let u = unrank(r, self.size, self.arity);
            for i in 0..self.arity {
                for &up in lattice.upper_covers(u[i]) {
                    let r2 = r - weight[i] * u[i].index() + weight[i] * up.index();
                    if !lattice.leq(v, self.values[r2]) {
                        let mut w = u.clone();
                        w[i] = up;
                        return Some((u, w));
                    }
                }
            }
        }
        None
    }

    /// Pointwise meet/join of two tables of the same shape.
    pub fn pointwise(&self, other: &MonotoneTable, lattice: &FiniteLattice, meet: bool) -> MonotoneTable {
        debug_assert_eq!(self.arity, other.arity);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| if meet { lattice.meet(a, b) } else { lattice.join(a, b) })
            .collect();
        MonotoneTable {
            arity: self.arity,
            size: self.size,
            values,
        }
    }

    /// Text format: header plus one `args -> value` line per tuple.
    pub fn to_text(&self, lattice: &FiniteLattice) -> String {
        let mut out = format!("fn arity={} lattice={}\n", self.arity, lattice.name());
        for (r, &v) in self.values.iter().enumerate() {
            let args = unrank(r, self.size, self.arity);
            for a in &args {
                out.push_str(lattice.element_name(*a));
                out.push(' ');
            }
            let _ = writeln!(out, "-> {}", lattice.element_name(v));
        }
        out
    }
}

/// Parses the function-table text format. The header's lattice spec must be
/// a standard spec or match `lattice.name()` when a lattice is supplied.
pub fn parse_table(
    text: &str,
    lattice: Option<&FiniteLattice>,
    limit: usize,
) -> Result<(FiniteLattice, MonotoneTable), TableError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(TableError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let perr = |line: usize, msg: String| TableError::Parse { line, msg };
    let mut arity = None;
    let mut spec = None;
    let mut words = header.split_whitespace();
    if words.next() != Some("fn") {
        return Err(perr(hline, "header must start with `fn`".into()));
    }
    for w in words {
        if let Some(a) = w.strip_prefix("arity=") {
            arity = Some(a.parse::<usize>().map_err(|_| perr(hline, format!("bad arity `{a}`")))?);
        } else if let Some(s) = w.strip_prefix("lattice=") {
            spec = Some(s.to_string());
        } else {
            return Err(perr(hline, format!("unexpected header field `{w}`")));
        }
    }
    let arity = arity.ok_or_else(|| perr(hline, "missing arity=".into()))?;
    let spec = spec.ok_or_else(|| perr(hline, "missing lattice=".into()))?;
    let lattice = match lattice {
        Some(l) => {
            let matches = l.name() == spec
                || make_standard_with_limit(&spec, limit)
                    .map(|s| s.same_order(l) && s.element_names() == l.element_names())
                    .unwrap_or(false);
            if !matches {
                return Err(TableError::LatticeMismatch {
                    table: spec,
                    expected: l.name().to_string(),
                });
            }
            l.clone()
        }
        None => make_standard_with_limit(&spec, limit)?,
    };
    let len = table_len(lattice.size(), arity)
        .filter(|&n| n <= 1 << 24)
        .ok_or(TableError::TooLarge {
            arity,
            size: lattice.size(),
        })?;
    let mut values: Vec<Option<Elem>> = vec![None; len];
    for (line, text) in lines {
        let (args, value) = text
            .split_once("->")
            .ok_or_else(|| perr(line, "expected `args -> value`".into()))?;
        let args: Vec<Elem> = args
            .split_whitespace()
            .map(|n| lattice.parse_element(n))
            .collect::<Result<_, _>>()?;
        if args.len() != arity {
            return Err(perr(line, format!("expected {arity} arguments, found {}", args.len())));
        }
        let value = lattice.parse_element(value)?;
        let slot = &mut values[rank(&args, lattice.size())];
        if slot.is_some() {
            return Err(perr(line, "duplicate argument tuple".into()));
        }
        *slot = Some(value);
    }
    if let Some(missing) = values.iter().position(Option::is_none) {
        let args = unrank(missing, lattice.size(), arity);
        let shown: Vec<&str> = args.iter().map(|&e| lattice.element_name(e)).collect();
        return Err(perr(0, format!("missing line for ({})", shown.join(" "))));
    }
    let values = values.into_iter().map(Option::unwrap).collect();
    let table = MonotoneTable::new(&lattice, arity, values)?;
    Ok((lattice, table))
}
