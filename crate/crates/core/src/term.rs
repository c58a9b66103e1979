//! Element-free lattice terms over three variable families.
//!
//! `s` slots carry parameters, `x` slots carry function arguments and `t`
//! slots carry fresh (independent) elements. Terms never mention lattice
//! elements directly, so two terms built for isomorphic inputs are
//! comparable with `==`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lattice::{Elem, FiniteLattice, LatticeError};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Family {
    S,
    X,
    T,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::S => 's',
            Family::X => 'x',
            Family::T => 't',
        }
    }
}

/// A variable slot; indices start at 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub family: Family,
    pub index: u32,
}

impl Var {
    pub fn s(index: u32) -> Self {
        debug_assert!(index >= 1);
        Var {
            family: Family::S,
            index,
        }
    }

    pub fn x(index: u32) -> Self {
        debug_assert!(index >= 1);
        Var {
            family: Family::X,
            index,
        }
    }

    pub fn t(index: u32) -> Self {
        debug_assert!(index >= 1);
        Var {
            family: Family::T,
            index,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.index)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Zero,
    One,
    Var(Var),
    Meet(Box<Term>, Box<Term>),
    Join(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn s(index: u32) -> Term {
        Term::Var(Var::s(index))
    }

    pub fn x(index: u32) -> Term {
        Term::Var(Var::x(index))
    }

    pub fn t(index: u32) -> Term {
        Term::Var(Var::t(index))
    }

    pub fn meet(self, other: Term) -> Term {
        Term::Meet(Box::new(self), Box::new(other))
    }

    pub fn join(self, other: Term) -> Term {
        Term::Join(Box::new(self), Box::new(other))
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::One | Term::Var(_) => 1,
            Term::Meet(l, r) | Term::Join(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Zero | Term::One | Term::Var(_) => 0,
            Term::Meet(l, r) | Term::Join(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v);
        });
        out
    }

    /// Calls `f` on every variable occurrence, left to right.
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Term::Zero | Term::One => {}
            Term::Var(v) => f(*v),
            Term::Meet(l, r) | Term::Join(l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }

    /// Renames every variable through `f`.
    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> Term {
        match self {
            Term::Zero => Term::Zero,
            Term::One => Term::One,
            Term::Var(v) => Term::Var(f(*v)),
            Term::Meet(l, r) => l.map_vars(f).meet(r.map_vars(f)),
            Term::Join(l, r) => l.map_vars(f).join(r.map_vars(f)),
        }
    }

    /// Replaces variables by terms; unmapped variables are kept.
    pub fn substitute(&self, map: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Zero => Term::Zero,
            Term::One => Term::One,
            Term::Var(v) => map.get(v).cloned().unwrap_or(Term::Var(*v)),
            Term::Meet(l, r) => l.substitute(map).meet(r.substitute(map)),
            Term::Join(l, r) => l.substitute(map).join(r.substitute(map)),
        }
    }

    /// Removes constant operands using the bound laws; the induced function
    /// is unchanged on every bounded lattice.
    pub fn fold_constants(&self) -> Term {
        match self {
            Term::Meet(l, r) => match (l.fold_constants(), r.fold_constants()) {
                (Term::Zero, _) | (_, Term::Zero) => Term::Zero,
                (Term::One, t) | (t, Term::One) => t,
                (a, b) => a.meet(b),
            },
            Term::Join(l, r) => match (l.fold_constants(), r.fold_constants()) {
                (Term::One, _) | (_, Term::One) => Term::One,
                (Term::Zero, t) | (t, Term::Zero) => t,
                (a, b) => a.join(b),
            },
            other => other.clone(),
        }
    }

    /// Direct recursive evaluation.
    pub fn evaluate(&self, lattice: &FiniteLattice, asg: &Assignment) -> Result<Elem, EvalError> {
        Ok(match self {
            Term::Zero => lattice.bottom(),
            Term::One => lattice.top(),
            Term::Var(v) => asg.get(*v).ok_or(EvalError::Unbound(*v))?,
            Term::Meet(l, r) => lattice.meet(l.evaluate(lattice, asg)?, r.evaluate(lattice, asg)?),
            Term::Join(l, r) => lattice.join(l.evaluate(lattice, asg)?, r.evaluate(lattice, asg)?),
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Zero => f.write_str("0"),
            Term::One => f.write_str("1"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Meet(l, r) => write!(f, "(meet {l} {r})"),
            Term::Join(l, r) => write!(f, "(join {l} {r})"),
        }
    }
}

pub fn print_term(term: &Term) -> String {
    term.to_string()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Var),
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Word(&'a str),
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Returns the token and its starting offset, or `None` at end of input.
    fn next(&mut self) -> Option<(Token<'a>, usize)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let ch = rest.chars().next()?;
        match ch {
            '(' => {
                self.pos += 1;
                Some((Token::Open, start))
            }
            ')' => {
                self.pos += 1;
                Some((Token::Close, start))
            }
            _ => {
                let len = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                self.pos += len;
                Some((Token::Word(&rest[..len]), start))
            }
        }
    }
}

/// Parses the S-expression term grammar.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut lexer = Lexer { text, pos: 0 };
    let term = parse_expr(&mut lexer)?;
    if let Some((_, pos)) = lexer.next() {
        return Err(SyntaxError {
            pos,
            msg: "trailing input after term".into(),
        });
    }
    Ok(term)
}

fn parse_expr(lexer: &mut Lexer<'_>) -> Result<Term, SyntaxError> {
    let end = |lexer: &Lexer<'_>| SyntaxError {
        pos: lexer.text.len(),
        msg: "unexpected end of input".into(),
    };
    match lexer.next() {
        None => Err(end(lexer)),
        Some((Token::Close, pos)) => Err(SyntaxError {
            pos,
            msg: "unexpected `)`".into(),
        }),
        Some((Token::Word(w), pos)) => parse_atom(w, pos),
        Some((Token::Open, _)) => {
            let op = match lexer.next() {
                None => return Err(end(lexer)),
                Some((Token::Word("meet"), _)) => true,
                Some((Token::Word("join"), _)) => false,
                Some((_, pos)) => {
                    return Err(SyntaxError {
                        pos,
                        msg: "expected `meet` or `join`".into(),
                    })
                }
            };
            let left = parse_expr(lexer)?;
            let right = parse_expr(lexer)?;
            match lexer.next() {
                Some((Token::Close, _)) => {}
                None => return Err(end(lexer)),
                Some((_, pos)) => {
                    return Err(SyntaxError {
                        pos,
                        msg: "expected `)` after two operands".into(),
                    })
                }
            }
            Ok(if op { left.meet(right) } else { left.join(right) })
        }
    }
}

fn parse_atom(word: &str, pos: usize) -> Result<Term, SyntaxError> {
    match word {
        "0" => return Ok(Term::Zero),
        "1" => return Ok(Term::One),
        _ => {}
    }
    parse_var(word).map(Term::Var).ok_or_else(|| SyntaxError {
        pos,
        msg: format!("bad token `{word}`"),
    })
}

/// Parses `x3`, `s1`, `t12`; indices must be ≥ 1 and written without sign
/// or leading zeros.
pub fn parse_var(word: &str) -> Option<Var> {
    let mut chars = word.chars();
    let family = match chars.next()? {
        's' => Family::S,
        'x' => Family::X,
        't' => Family::T,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let index: u32 = digits.parse().ok()?;
    Some(Var { family, index })
}

/// Values for variable slots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<Var, Elem>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Var, e: Elem) -> &mut Self {
        self.values.insert(v, e);
        self
    }

    pub fn with(mut self, v: Var, e: Elem) -> Self {
        self.values.insert(v, e);
        self
    }

    pub fn get(&self, v: Var) -> Option<Elem> {
        self.values.get(&v).copied()
    }

    /// Binds `s1..`, `x1..`, `t1..` in order.
    pub fn from_slots(params: &[Elem], args: &[Elem], fresh: &[Elem]) -> Self {
        let mut asg = Assignment::new();
        for (i, &e) in params.iter().enumerate() {
            asg.set(Var::s(i as u32 + 1), e);
        }
        for (i, &e) in args.iter().enumerate() {
            asg.set(Var::x(i as u32 + 1), e);
        }
        for (i, &e) in fresh.iter().enumerate() {
            asg.set(Var::t(i as u32 + 1), e);
        }
        asg
    }

    /// Parses `x1=a1,s1=a2` against element names of `lattice`.
    pub fn parse(lattice: &FiniteLattice, text: &str) -> Result<Self, AssignmentError> {
        let mut asg = Assignment::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (var, val) = item
                .split_once('=')
                .ok_or_else(|| AssignmentError::Malformed(item.to_string()))?;
            let var = parse_var(var.trim()).ok_or_else(|| AssignmentError::Malformed(item.to_string()))?;
            let val = lattice.parse_element(val)?;
            if asg.values.insert(var, val).is_some() {
                return Err(AssignmentError::Duplicate(var));
            }
        }
        Ok(asg)
    }
}

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("malformed binding `{0}`")]
    Malformed(String),
    #[error("variable {0} bound twice")]
    Duplicate(Var),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub fn evaluate(term: &Term, lattice: &FiniteLattice, asg: &Assignment) -> Result<Elem, EvalError> {
    term.evaluate(lattice, asg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    Zero,
    One,
    Slot(u32),
    Meet(u32, u32),
    Join(u32, u32),
}

/// A term flattened into a hash-consed DAG over a fixed slot layout, for
/// evaluating the same term on many inputs.
#[derive(Clone, Debug)]
pub struct CompiledTerm {
    slots: Vec<Var>,
    nodes: Vec<Node>,
}

impl CompiledTerm {
    /// `slots` fixes the input order; every free variable of `term` must be
    /// among them.
    pub fn new(term: &Term, slots: &[Var]) -> Result<Self, EvalError> {
        let slot_index: HashMap<Var, u32> = slots
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        let mut nodes = Vec::new();
        let mut memo = HashMap::new();
        fn go(
            t: &Term,
            slot_index: &HashMap<Var, u32>,
            nodes: &mut Vec<Node>,
            memo: &mut HashMap<Node, u32>,
        ) -> Result<u32, EvalError> {
            let node = match t {
                Term::Zero => Node::Zero,
                Term::One => Node::One,
                Term::Var(v) => Node::Slot(*slot_index.get(v).ok_or(EvalError::Unbound(*v))?),
                Term::Meet(l, r) => {
                    let (a, b) = (go(l, slot_index, nodes, memo)?, go(r, slot_index, nodes, memo)?);
                    Node::Meet(a, b)
                }
                Term::Join(l, r) => {
                    let (a, b) = (go(l, slot_index, nodes, memo)?, go(r, slot_index, nodes, memo)?);
                    Node::Join(a, b)
                }
            };
            Ok(*memo.entry(node).or_insert_with(|| {
                nodes.push(node);
                nodes.len() as u32 - 1
            }))
        }
        go(term, &slot_index, &mut nodes, &mut memo)?;
        Ok(CompiledTerm {
            slots: slots.to_vec(),
            nodes,
        })
    }

    /// Compiles with slots `s1..sk, x1..xn, t1..tm`.
    pub fn with_layout(term: &Term, k: usize, n: usize, m: usize) -> Result<Self, EvalError> {
        let slots = slot_layout(k, n, m);
        Self::new(term, &slots)
    }

    pub fn slots(&self) -> &[Var] {
        &self.slots
    }

    /// Number of distinct subterms.
    pub fn dag_size(&self) -> usize {
        self.nodes.len()
    }

    /// `inputs[i]` is the value of `slots[i]`; `scratch` is reused across calls.
    pub fn eval(&self, lattice: &FiniteLattice, inputs: &[Elem], scratch: &mut Vec<Elem>) -> Elem {
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                Node::Zero => lattice.bottom(),
                Node::One => lattice.top(),
                Node::Slot(i) => inputs[i as usize],
                Node::Meet(a, b) => lattice.meet(scratch[a as usize], scratch[b as usize]),
                Node::Join(a, b) => lattice.join(scratch[a as usize], scratch[b as usize]),
            };
            scratch.push(v);
        }
        *scratch.last().expect("compiled term is never empty")
    }
}

pub fn slot_layout(k: usize, n: usize, m: usize) -> Vec<Var> {
    (1..=k as u32)
        .map(Var::s)
        .chain((1..=n as u32).map(Var::x))
        .chain((1..=m as u32).map(Var::t))
        .collect()
}

/// Majority term `(q ∨ r) ∧ (r ∨ p) ∧ (p ∨ q)`.
pub fn mu_term(p: Term, q: Term, r: Term) -> Term {
    q.clone()
        .join(r.clone())
        .meet(r.join(p.clone()))
        .meet(p.join(q))
}

/// `[(x ∧ s) ∨ t1] ∧ [(x ∧ s) ∨ t2]`: the monotone characteristic function of
/// the parameter in slot `s` when `t1, t2` are fresh. The third fresh slot is
/// part of the signature only.
pub fn chi_basic(s_index: u32, x_index: u32, t1: u32, t2: u32, _t3: u32) -> Term {
    let core = Term::x(x_index).meet(Term::s(s_index));
    core.clone().join(Term::t(t1)).meet(core.join(Term::t(t2)))
}

/// `μ(x ∧ t1, x ∧ t2, x ∧ t3)`: characteristic function of `{1}`.
pub fn chi_top(x_index: u32) -> Term {
    let x = || Term::x(x_index);
    mu_term(x().meet(Term::t(1)), x().meet(Term::t(2)), x().meet(Term::t(3)))
}

/// Symbolic member of a set `A ⊆ {c1..ck, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChiMember {
    Param(u32),
    Zero,
    One,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChiError {
    #[error("member {0:?} is not a parameter slot in 1..={1}")]
    BadMember(ChiMember, u32),
}

/// Term for the monotone characteristic function of `A ⊆ {c1..ck, 0, 1}`,
/// evaluated at `x_{arg_index}` with fresh elements in `t1, t2, t3`.
pub fn chi_up_set(members: &[ChiMember], k: u32, arg_index: u32) -> Result<Term, ChiError> {
    let set: BTreeSet<ChiMember> = members.iter().copied().collect();
    for &m in &set {
        if let ChiMember::Param(i) = m {
            if i == 0 || i > k {
                return Err(ChiError::BadMember(m, k));
            }
        }
    }
    if set.is_empty() {
        return Ok(Term::Zero);
    }
    if set.contains(&ChiMember::Zero) {
        return Ok(Term::One);
    }
    let mut acc: Option<Term> = None;
    for &m in &set {
        if let ChiMember::Param(i) = m {
            let chi = chi_basic(i, arg_index, 1, 2, 3);
            acc = Some(match acc {
                None => chi,
                Some(t) => t.join(chi),
            });
        }
    }
    if set.contains(&ChiMember::One) {
        let top = chi_top(arg_index);
        acc = Some(match acc {
            None => top,
            Some(t) => t.join(top),
        });
    }
    Ok(acc.expect("nonempty set without 0 has a parameter or 1"))
}

/// Characteristic function of a cofinite `A` whose complement lies within
/// the parameters (listed in `excluded`) and the bounds.
///
/// Built as `u ∧ δ_{s}` over the excluded slots, where
/// `δ_s = [(x ∨ s) ∧ t1] ∨ [(x ∨ s) ∧ t2]` vanishes exactly on `{0, s}` and
/// `u = e12 ∨ e13 ∨ e23`, `e_ij = (x ∨ t_i) ∧ (x ∨ t_j)` vanishes exactly on 0.
pub fn chi_cofinite(excluded: &[u32], zero_in_a: bool, k: u32, arg_index: u32) -> Result<Term, ChiError> {
    for &i in excluded {
        if i == 0 || i > k {
            return Err(ChiError::BadMember(ChiMember::Param(i), k));
        }
    }
    if zero_in_a {
        return Ok(Term::One);
    }
    let x = || Term::x(arg_index);
    let e = |i: u32, j: u32| x().join(Term::t(i)).meet(x().join(Term::t(j)));
    let mut acc = e(1, 2).join(e(1, 3)).join(e(2, 3));
    let excluded: BTreeSet<u32> = excluded.iter().copied().collect();
    for s in excluded {
        let up = x().join(Term::s(s));
        let delta = up.clone().meet(Term::t(1)).join(up.meet(Term::t(2)));
        acc = acc.meet(delta);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_standard;
    use proptest::prelude::*;

    fn lat(spec: &str) -> FiniteLattice {
        make_standard(spec).unwrap()
    }

    fn el(l: &FiniteLattice, n: &str) -> Elem {
        l.element(n).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_term("(meet x1 s1)").unwrap(), Term::x(1).meet(Term::s(1)));
        assert_eq!(parse_term("0").unwrap(), Term::Zero);
        assert_eq!(parse_term("  ( join\n t2   1 ) ").unwrap(), Term::t(2).join(Term::One));
        let err = parse_term("(join x1").unwrap_err();
        assert_eq!(err.pos, "(join x1".len());
        for bad in ["x0", "y1", "(meet x1)", "(meet x1 x2 x3)", "(or x1 x2)", "x01", ")", "x1 x2", ""] {
            assert!(parse_term(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn print_is_canonical() {
        let t = parse_term("(meet  (join x1 0)\n\t s2)").unwrap();
        assert_eq!(print_term(&t), "(meet (join x1 0) s2)");
    }

    #[test]
    fn evaluation_examples() {
        let f2 = lat("flat:2");
        let asg = Assignment::new().with(Var::x(1), el(&f2, "a1")).with(Var::x(2), el(&f2, "a2"));
        let t = parse_term("(join x1 0)").unwrap();
        assert_eq!(evaluate(&t, &f2, &asg).unwrap(), el(&f2, "a1"));
        let t = parse_term("(meet x1 x2)").unwrap();
        assert_eq!(evaluate(&t, &f2, &asg).unwrap(), f2.bottom());
        let t = parse_term("(meet x1 t1)").unwrap();
        assert_eq!(evaluate(&t, &f2, &asg), Err(EvalError::Unbound(Var::t(1))));
    }

    #[test]
    fn mu_layout_and_values() {
        let mu = mu_term(Term::x(1), Term::x(2), Term::x(3));
        assert_eq!(mu.to_string(), "(meet (meet (join x2 x3) (join x3 x1)) (join x1 x2))");
        let f3 = lat("flat:3");
        let at = |a: &str, b: &str, c: &str| {
            let asg = Assignment::from_slots(&[], &[el(&f3, a), el(&f3, b), el(&f3, c)], &[]);
            f3.element_name(mu.evaluate(&f3, &asg).unwrap()).to_string()
        };
        assert_eq!(at("0", "0", "1"), "0");
        assert_eq!(at("a1", "a2", "a3"), "1");
        let f4 = lat("flat:4");
        for a in f4.elements() {
            for b in f4.elements() {
                let asg = Assignment::from_slots(&[], &[a, a, b], &[]);
                assert_eq!(mu.evaluate(&f4, &asg).unwrap(), a);
            }
        }
    }

    #[test]
    fn chi_basic_values() {
        let f4 = lat("flat:4");
        let chi = chi_basic(1, 1, 1, 2, 3);
        let eval = |x: &str| {
            let asg = Assignment::from_slots(
                &[el(&f4, "a1")],
                &[el(&f4, x)],
                &[el(&f4, "a2"), el(&f4, "a3")],
            );
            f4.element_name(chi.evaluate(&f4, &asg).unwrap()).to_string()
        };
        assert_eq!(eval("a1"), "1");
        assert_eq!(eval("a4"), "0");
        assert_eq!(eval("1"), "1");
        let vars: Vec<String> = chi.free_vars().iter().map(|v| v.to_string()).collect();
        assert_eq!(vars, ["s1", "x1", "t1", "t2"]);
    }

    #[test]
    fn chi_set_constants() {
        assert_eq!(chi_up_set(&[], 2, 1).unwrap(), Term::Zero);
        assert_eq!(chi_up_set(&[ChiMember::Zero], 2, 1).unwrap(), Term::One);
        assert_eq!(chi_up_set(&[ChiMember::Zero, ChiMember::Param(1)], 2, 1).unwrap(), Term::One);
        assert_eq!(chi_cofinite(&[1], true, 1, 1).unwrap(), Term::One);
        assert_eq!(
            chi_up_set(&[ChiMember::Param(3)], 2, 1),
            Err(ChiError::BadMember(ChiMember::Param(3), 2))
        );
        assert!(chi_cofinite(&[0], false, 2, 1).is_err());
    }

    fn truth(l: &FiniteLattice, term: &Term, params: &[Elem], fresh: &[Elem]) -> Vec<String> {
        l.elements()
            .filter(|&e| {
                let asg = Assignment::from_slots(params, &[e], fresh);
                term.evaluate(l, &asg).unwrap() == l.top()
            })
            .map(|e| l.element_name(e).to_string())
            .collect()
    }

    #[test]
    fn chi_set_single_parameter() {
        let f6 = lat("flat:6");
        let t = chi_up_set(&[ChiMember::Param(1)], 2, 1).unwrap();
        let params = [el(&f6, "a1"), el(&f6, "a2")];
        let fresh = [el(&f6, "a3"), el(&f6, "a4"), el(&f6, "a5")];
        assert_eq!(truth(&f6, &t, &params, &fresh), ["a1", "1"]);
        // 0/1 valued everywhere
        for e in f6.elements() {
            let v = t.evaluate(&f6, &Assignment::from_slots(&params, &[e], &fresh)).unwrap();
            assert!(f6.is_bound(v));
        }
    }

    #[test]
    fn chi_cofinite_examples() {
        let f5 = lat("flat:5");
        let t = chi_cofinite(&[], false, 0, 1).unwrap();
        let fresh = [el(&f5, "a1"), el(&f5, "a2"), el(&f5, "a3")];
        let ones = truth(&f5, &t, &[], &fresh);
        assert_eq!(ones, ["a1", "a2", "a3", "a4", "a5", "1"]);

        let f6 = lat("flat:6");
        let t = chi_cofinite(&[1], false, 1, 1).unwrap();
        let fresh = [el(&f6, "a2"), el(&f6, "a3"), el(&f6, "a4")];
        let ones = truth(&f6, &t, &[el(&f6, "a1")], &fresh);
        assert_eq!(ones, ["a2", "a3", "a4", "a5", "a6", "1"]);
    }

    #[test]
    fn substitution() {
        let t = parse_term("(join x1 t1)").unwrap();
        let map = BTreeMap::from([(Var::x(1), Term::Zero)]);
        assert_eq!(t.substitute(&map).to_string(), "(join 0 t1)");
        assert_eq!(Term::One.substitute(&map), Term::One);
        let renamed = t.map_vars(&|v| if v == Var::t(1) { Var::t(4) } else { v });
        assert_eq!(renamed.to_string(), "(join x1 t4)");
    }

    #[test]
    fn compiled_matches_direct() {
        let l = lat("n5");
        let t = parse_term("(join (meet x1 s1) (meet (join x1 t1) (join s1 t1)))").unwrap();
        let c = CompiledTerm::with_layout(&t, 1, 1, 1).unwrap();
        assert!(c.dag_size() < t.size());
        let mut scratch = Vec::new();
        for a in l.elements() {
            for b in l.elements() {
                for d in l.elements() {
                    let asg = Assignment::from_slots(&[b], &[a], &[d]);
                    assert_eq!(c.eval(&l, &[b, a, d], &mut scratch), t.evaluate(&l, &asg).unwrap());
                }
            }
        }
        assert!(CompiledTerm::with_layout(&t, 0, 1, 1).is_err());
    }

    #[test]
    fn assignment_parsing() {
        let f3 = lat("flat:3");
        let asg = Assignment::parse(&f3, "x1=a1, s1=a2,t1=1").unwrap();
        assert_eq!(asg.get(Var::s(1)), Some(el(&f3, "a2")));
        assert!(Assignment::parse(&f3, "x1=a9").is_err());
        assert!(Assignment::parse(&f3, "x1").is_err());
        assert!(Assignment::parse(&f3, "x1=a1,x1=a2").is_err());
        assert_eq!(Assignment::parse(&f3, "").unwrap(), Assignment::new());
    }

    pub(crate) fn arb_term(vars: Vec<Var>) -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::Zero),
            Just(Term::One),
            proptest::sample::select(vars).prop_map(Term::Var),
        ];
        leaf.prop_recursive(6, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.meet(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.join(b)),
            ]
        })
    }

    fn all_vars() -> Vec<Var> {
        let mut v = Vec::new();
        for i in 1..=12 {
            v.extend([Var::s(i), Var::x(i), Var::t(i)]);
        }
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn print_parse_round_trip(t in arb_term(all_vars())) {
            let text = print_term(&t);
            prop_assert_eq!(parse_term(&text).unwrap(), t);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn folding_preserves_function(t in arb_term(vec![Var::x(1), Var::x(2), Var::s(1)])) {
            let folded = t.fold_constants();
            prop_assert!(folded.size() <= t.size());
            for spec in ["n5", "flat:3", "chain:3"] {
                let l = lat(spec);
                for a in l.elements() { for b in l.elements() { for c in l.elements() {
                    let asg = Assignment::from_slots(&[c], &[a, b], &[]);
                    prop_assert_eq!(t.evaluate(&l, &asg).unwrap(), folded.evaluate(&l, &asg).unwrap());
                }}}
            }
        }
    }
}
