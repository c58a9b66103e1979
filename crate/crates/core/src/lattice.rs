//! Finite bounded lattices given by explicit order, meet and join tables.
//!
//! Elements are dense ids (`Elem`); names are carried only for display and
//! parsing. Every constructor goes through [`FiniteLattice::from_leq_table`],
//! which derives meet/join from the order and rejects anything that is not a
//! bounded lattice.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Default cap on the number of elements a lattice may have.
pub const DEFAULT_MAX_SIZE: usize = 64;

/// Hard cap imposed by the `u8` element representation.
pub const HARD_MAX_SIZE: usize = 255;

/// Dense element id within one lattice.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Elem(u8);

impl Elem {
    pub fn new(index: usize) -> Self {
        assert!(index < HARD_MAX_SIZE, "element id {index} out of range");
        Elem(index as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("order relation has a cycle through `{0}` and `{1}`")]
    Cycle(String, String),
    #[error("not a lattice: pair ({0}, {1}) has no {2}")]
    NotALattice(String, String, &'static str),
    #[error("no unique {0} element")]
    NoBounds(&'static str),
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("unknown element name `{0}`")]
    UnknownName(String),
    #[error("lattice has {size} elements, limit is {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("empty element list")]
    Empty,
    #[error("bad lattice spec `{0}`")]
    BadSpec(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("lattice `{0}` is not flat")]
    NotFlat(String),
    #[error("tuple lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("tuples belong to different lattices (`{0}` vs `{1}`)")]
    LatticeMismatch(String, String),
}

/// A finite bounded lattice with precomputed tables.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    name: String,
    names: Vec<String>,
    leq: Vec<bool>,
    meet: Vec<Elem>,
    join: Vec<Elem>,
    bottom: Elem,
    top: Elem,
    atoms: Vec<Elem>,
    upper_covers: Vec<Vec<Elem>>,
    lower_covers: Vec<Vec<Elem>>,
    heights: Vec<usize>,
    flat: bool,
}

impl fmt::Debug for FiniteLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteLattice")
            .field("name", &self.name)
            .field("elements", &self.names)
            .finish()
    }
}

impl FiniteLattice {
    /// Builds a lattice from generating order pairs; the order is their
    /// reflexive-transitive closure.
    pub fn from_order<S: AsRef<str>>(
        name: &str,
        element_names: &[S],
        leq_pairs: &[(S, S)],
    ) -> Result<Self, LatticeError> {
        Self::from_order_with_limit(name, element_names, leq_pairs, DEFAULT_MAX_SIZE)
    }

    pub fn from_order_with_limit<S: AsRef<str>>(
        name: &str,
        element_names: &[S],
        leq_pairs: &[(S, S)],
        limit: usize,
    ) -> Result<Self, LatticeError> {
        let n = element_names.len();
        if n == 0 {
            return Err(LatticeError::Empty);
        }
        let limit = limit.min(HARD_MAX_SIZE);
        if n > limit {
            return Err(LatticeError::TooLarge { size: n, limit });
        }
        let mut index = HashMap::new();
        for (i, nm) in element_names.iter().enumerate() {
            if index.insert(nm.as_ref().to_string(), i).is_some() {
                return Err(LatticeError::DuplicateName(nm.as_ref().to_string()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| LatticeError::UnknownName(s.to_string()))
        };
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (lo, hi) in leq_pairs {
            let (lo, hi) = (lookup(lo.as_ref())?, lookup(hi.as_ref())?);
            leq[lo * n + hi] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let names = element_names
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect();
        Self::from_leq_table(name, names, leq)
    }

    /// Builds a lattice from a complete (already transitive) order table.
    pub fn from_leq_table(
        name: &str,
        names: Vec<String>,
        leq: Vec<bool>,
    ) -> Result<Self, LatticeError> {
        let n = names.len();
        if n == 0 {
            return Err(LatticeError::Empty);
        }
        if n > HARD_MAX_SIZE {
            return Err(LatticeError::TooLarge {
                size: n,
                limit: HARD_MAX_SIZE,
            });
        }
        assert_eq!(leq.len(), n * n);
        let le = |a: usize, b: usize| leq[a * n + b];
        for a in 0..n {
            for b in (a + 1)..n {
                if le(a, b) && le(b, a) {
                    return Err(LatticeError::Cycle(names[a].clone(), names[b].clone()));
                }
            }
        }
        let mut meet = vec![Elem(0); n * n];
        let mut join = vec![Elem(0); n * n];
        for a in 0..n {
            for b in a..n {
                let glb = (0..n)
                    .filter(|&c| le(c, a) && le(c, b))
                    .find(|&c| (0..n).all(|d| !(le(d, a) && le(d, b)) || le(d, c)));
                let lub = (0..n)
                    .filter(|&c| le(a, c) && le(b, c))
                    .find(|&c| (0..n).all(|d| !(le(a, d) && le(b, d)) || le(c, d)));
                let glb = glb.ok_or_else(|| {
                    LatticeError::NotALattice(names[a].clone(), names[b].clone(), "meet")
                })?;
                let lub = lub.ok_or_else(|| {
                    LatticeError::NotALattice(names[a].clone(), names[b].clone(), "join")
                })?;
                meet[a * n + b] = Elem::new(glb);
                meet[b * n + a] = Elem::new(glb);
                join[a * n + b] = Elem::new(lub);
                join[b * n + a] = Elem::new(lub);
            }
        }
        let bottom = (0..n)
            .find(|&b| (0..n).all(|e| le(b, e)))
            .ok_or(LatticeError::NoBounds("minimum"))?;
        let top = (0..n)
            .find(|&t| (0..n).all(|e| le(e, t)))
            .ok_or(LatticeError::NoBounds("maximum"))?;

        let covers = |a: usize, b: usize| {
            a != b && le(a, b) && (0..n).all(|c| c == a || c == b || !(le(a, c) && le(c, b)))
        };
        let mut upper_covers = vec![Vec::new(); n];
        let mut lower_covers = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if covers(a, b) {
                    upper_covers[a].push(Elem::new(b));
                    lower_covers[b].push(Elem::new(a));
                }
            }
        }
        let atoms: Vec<Elem> = upper_covers[bottom]
            .iter()
            .copied()
            .filter(|&e| e.index() != top)
            .collect();
        // length of the longest chain from bottom
        let mut heights = vec![0usize; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&e| (0..n).filter(|&d| le(d, e)).count());
        for &e in &order {
            heights[e] = lower_covers[e]
                .iter()
                .map(|d| heights[d.index()] + 1)
                .max()
                .unwrap_or(0);
        }
        let flat = n >= 3
            && (0..n).all(|e| {
                e == bottom || e == top || (le(bottom, e) && upper_covers[e] == [Elem::new(top)]
                    && lower_covers[e] == [Elem::new(bottom)])
            });

        Ok(FiniteLattice {
            name: name.to_string(),
            names,
            leq,
            meet,
            join,
            bottom: Elem::new(bottom),
            top: Elem::new(top),
            atoms,
            upper_covers,
            lower_covers,
            heights,
            flat,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.size()).map(Elem::new)
    }

    pub fn element_name(&self, e: Elem) -> &str {
        &self.names[e.index()]
    }

    pub fn element_names(&self) -> &[String] {
        &self.names
    }

    pub fn element(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name).map(Elem::new)
    }

    pub fn parse_element(&self, name: &str) -> Result<Elem, LatticeError> {
        self.element(name.trim())
            .ok_or_else(|| LatticeError::UnknownName(name.trim().to_string()))
    }

    /// Parses a comma-separated element list; the empty string is the empty list.
    pub fn parse_element_list(&self, list: &str) -> Result<Vec<Elem>, LatticeError> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| self.parse_element(s))
            .collect()
    }

    #[inline]
    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.leq[a.index() * self.size() + b.index()]
    }

    #[inline]
    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a.index() * self.size() + b.index()]
    }

    #[inline]
    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join[a.index() * self.size() + b.index()]
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn is_bound(&self, e: Elem) -> bool {
        e == self.bottom || e == self.top
    }

    pub fn atoms(&self) -> &[Elem] {
        &self.atoms
    }

    pub fn upper_covers(&self, e: Elem) -> &[Elem] {
        &self.upper_covers[e.index()]
    }

    pub fn lower_covers(&self, e: Elem) -> &[Elem] {
        &self.lower_covers[e.index()]
    }

    /// Length of the longest chain from bottom to `e`.
    pub fn height(&self, e: Elem) -> usize {
        self.heights[e.index()]
    }

    /// Bottom, some atoms, top, and nothing else.
    pub fn is_flat(&self) -> bool {
        self.flat
    }

    /// Same carrier and order (names may differ).
    pub fn same_order(&self, other: &FiniteLattice) -> bool {
        self.leq == other.leq
    }

    /// Exhaustively checks the lattice axioms on the stored tables.
    pub fn validate(&self) -> Result<(), String> {
        let els: Vec<Elem> = self.elements().collect();
        let show = |e: Elem| self.element_name(e).to_string();
        for &a in &els {
            if !self.leq(self.bottom, a) || !self.leq(a, self.top) {
                return Err(format!("{} is not between the bounds", show(a)));
            }
            if self.meet(a, a) != a || self.join(a, a) != a {
                return Err(format!("idempotence fails at {}", show(a)));
            }
            for &b in &els {
                if self.leq(a, b) && self.leq(b, a) && a != b {
                    return Err(format!("antisymmetry fails at {}, {}", show(a), show(b)));
                }
                if self.meet(a, b) != self.meet(b, a) || self.join(a, b) != self.join(b, a) {
                    return Err(format!("commutativity fails at {}, {}", show(a), show(b)));
                }
                if self.meet(a, self.join(a, b)) != a || self.join(a, self.meet(a, b)) != a {
                    return Err(format!("absorption fails at {}, {}", show(a), show(b)));
                }
                if self.leq(a, b) != (self.meet(a, b) == a) || self.leq(a, b) != (self.join(a, b) == b)
                {
                    return Err(format!("order/table mismatch at {}, {}", show(a), show(b)));
                }
                for &c in &els {
                    if self.leq(a, b) && self.leq(b, c) && !self.leq(a, c) {
                        return Err(format!("transitivity fails at {}", show(b)));
                    }
                    if self.meet(self.meet(a, b), c) != self.meet(a, self.meet(b, c))
                        || self.join(self.join(a, b), c) != self.join(a, self.join(b, c))
                    {
                        return Err(format!(
                            "associativity fails at {}, {}, {}",
                            show(a),
                            show(b),
                            show(c)
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Multi-line human-readable dump.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("lattice {}\n", self.name));
        out.push_str(&format!("elements {}\n", self.names.join(" ")));
        out.push_str(&format!("size {}\n", self.size()));
        out.push_str(&format!(
            "bottom {} top {}\n",
            self.element_name(self.bottom),
            self.element_name(self.top)
        ));
        let atoms: Vec<&str> = self.atoms.iter().map(|&a| self.element_name(a)).collect();
        out.push_str(&format!("atoms {} [{}]\n", atoms.len(), atoms.join(" ")));
        out.push_str(&format!("flat {}\n", self.flat));
        for a in self.elements() {
            for &b in self.upper_covers(a) {
                out.push_str(&format!("leq {} {}\n", self.element_name(a), self.element_name(b)));
            }
        }
        out
    }

    /// Serializes in the line-based lattice text format (cover relations only).
    pub fn to_text(&self) -> String {
        let mut out = format!("lattice {}\nelements {}\n", self.name, self.names.join(" "));
        for a in self.elements() {
            for &b in self.upper_covers(a) {
                out.push_str(&format!("leq {} {}\n", self.element_name(a), self.element_name(b)));
            }
        }
        out
    }
}

/// `m` pairwise-incomparable atoms between a bottom `0` and a top `1`.
pub fn make_flat(m: usize) -> FiniteLattice {
    assert!(m >= 1, "flat lattice needs at least one atom");
    let n = m + 2;
    let mut names = vec!["0".to_string()];
    names.extend((1..=m).map(|i| format!("a{i}")));
    names.push("1".to_string());
    let mut leq = vec![false; n * n];
    for i in 0..n {
        leq[i * n + i] = true;
        leq[i] = true;
        leq[i * n + n - 1] = true;
    }
    FiniteLattice::from_leq_table(&format!("flat:{m}"), names, leq)
        .expect("flat lattice is a lattice")
}

/// `n`-element chain `0 < u1 < ... < 1`.
pub fn make_chain(n: usize) -> FiniteLattice {
    assert!(n >= 1, "chain needs at least one element");
    let names: Vec<String> = (0..n)
        .map(|i| match i {
            0 => "0".to_string(),
            i if i == n - 1 => "1".to_string(),
            i => format!("u{i}"),
        })
        .collect();
    let mut leq = vec![false; n * n];
    for i in 0..n {
        for j in i..n {
            leq[i * n + j] = true;
        }
    }
    FiniteLattice::from_leq_table(&format!("chain:{n}"), names, leq).expect("chain is a lattice")
}

fn make_m3() -> FiniteLattice {
    FiniteLattice::from_order(
        "m3",
        &["0", "p", "q", "r", "1"],
        &[
            ("0", "p"),
            ("0", "q"),
            ("0", "r"),
            ("p", "1"),
            ("q", "1"),
            ("r", "1"),
        ],
    )
    .expect("m3 is a lattice")
}

fn make_n5() -> FiniteLattice {
    FiniteLattice::from_order(
        "n5",
        &["0", "a", "b", "c", "1"],
        &[("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")],
    )
    .expect("n5 is a lattice")
}

/// Componentwise product; element `(x, y)` is named `x_y`.
pub fn make_product(left: &FiniteLattice, right: &FiniteLattice, limit: usize) -> Result<FiniteLattice, LatticeError> {
    let (nl, nr) = (left.size(), right.size());
    let n = nl * nr;
    if n > limit.min(HARD_MAX_SIZE) {
        return Err(LatticeError::TooLarge {
            size: n,
            limit: limit.min(HARD_MAX_SIZE),
        });
    }
    let mut names = Vec::with_capacity(n);
    for x in left.elements() {
        for y in right.elements() {
            names.push(format!("{}_{}", left.element_name(x), right.element_name(y)));
        }
    }
    if names.iter().collect::<BTreeSet<_>>().len() != n {
        return Err(LatticeError::DuplicateName(
            "product element names collide".to_string(),
        ));
    }
    let mut leq = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let (xi, yi) = (Elem::new(i / nr), Elem::new(i % nr));
            let (xj, yj) = (Elem::new(j / nr), Elem::new(j % nr));
            leq[i * n + j] = left.leq(xi, xj) && right.leq(yi, yj);
        }
    }
    FiniteLattice::from_leq_table(
        &format!("product({},{})", left.name(), right.name()),
        names,
        leq,
    )
}

/// Parses a standard lattice spec: `flat:<m>`, `chain:<n>`, `m3`, `n5`,
/// `product(<spec>,<spec>)`.
pub fn make_standard(spec: &str) -> Result<FiniteLattice, LatticeError> {
    make_standard_with_limit(spec, DEFAULT_MAX_SIZE)
}

pub fn make_standard_with_limit(spec: &str, limit: usize) -> Result<FiniteLattice, LatticeError> {
    let spec = spec.trim();
    let bad = || LatticeError::BadSpec(spec.to_string());
    let check = |size: usize| {
        if size > limit.min(HARD_MAX_SIZE) {
            Err(LatticeError::TooLarge {
                size,
                limit: limit.min(HARD_MAX_SIZE),
            })
        } else {
            Ok(())
        }
    };
    if let Some(m) = spec.strip_prefix("flat:") {
        let m: usize = m.parse().map_err(|_| bad())?;
        if m == 0 {
            return Err(bad());
        }
        check(m + 2)?;
        return Ok(make_flat(m));
    }
    if let Some(n) = spec.strip_prefix("chain:") {
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        check(n)?;
        return Ok(make_chain(n));
    }
    match spec {
        "m3" => return Ok(make_m3()),
        "n5" => return Ok(make_n5()),
        _ => {}
    }
    if let Some(inner) = spec.strip_prefix("product(").and_then(|s| s.strip_suffix(')')) {
        let split = split_top_level_comma(inner).ok_or_else(bad)?;
        let left = make_standard_with_limit(&inner[..split], limit)?;
        let right = make_standard_with_limit(&inner[split + 1..], limit)?;
        return make_product(&left, &right, limit);
    }
    Err(bad())
}

fn split_top_level_comma(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
            _ => {}
        }
        if depth < 0 {
            return None;
        }
    }
    found
}

/// Parses the line-based lattice text format.
pub fn parse_lattice_text(text: &str, limit: usize) -> Result<FiniteLattice, LatticeError> {
    let mut name = None;
    let mut elements: Option<Vec<String>> = None;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| LatticeError::Parse {
            line: lineno + 1,
            msg: msg.to_string(),
        };
        let mut words = line.split_whitespace();
        match words.next() {
            Some("lattice") => {
                if name.is_some() {
                    return Err(err("duplicate `lattice` line"));
                }
                name = Some(words.next().ok_or_else(|| err("missing lattice name"))?.to_string());
                if words.next().is_some() {
                    return Err(err("trailing tokens after lattice name"));
                }
            }
            Some("elements") => {
                if name.is_none() {
                    return Err(err("`elements` before `lattice`"));
                }
                if elements.is_some() {
                    return Err(err("duplicate `elements` line"));
                }
                elements = Some(words.map(str::to_string).collect());
            }
            Some("leq") => {
                if elements.is_none() {
                    return Err(err("`leq` before `elements`"));
                }
                let lo = words.next().ok_or_else(|| err("leq needs two names"))?;
                let hi = words.next().ok_or_else(|| err("leq needs two names"))?;
                if words.next().is_some() {
                    return Err(err("leq takes exactly two names"));
                }
                pairs.push((lo.to_string(), hi.to_string()));
            }
            Some(other) => return Err(err(&format!("unknown directive `{other}`"))),
            None => unreachable!(),
        }
    }
    let name = name.ok_or(LatticeError::Parse {
        line: 1,
        msg: "missing `lattice` line".into(),
    })?;
    let elements = elements.ok_or(LatticeError::Parse {
        line: 2,
        msg: "missing `elements` line".into(),
    })?;
    FiniteLattice::from_order_with_limit(&name, &elements, &pairs, limit)
}

/// Verdict of a product-order comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TupleOrder {
    LessOrEqual,
    GreaterOrEqual,
    Equal,
    Incomparable,
}

/// Fixed-length tuple of elements of a named lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementTuple {
    pub lattice: String,
    pub entries: Vec<Elem>,
}

impl ElementTuple {
    pub fn new(lattice: &FiniteLattice, entries: Vec<Elem>) -> Self {
        debug_assert!(entries.iter().all(|e| e.index() < lattice.size()));
        ElementTuple {
            lattice: lattice.name().to_string(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn display(&self, lattice: &FiniteLattice) -> String {
        self.entries
            .iter()
            .map(|&e| lattice.element_name(e))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Componentwise comparison of two tuples.
pub fn compare_tuples(
    lattice: &FiniteLattice,
    u: &ElementTuple,
    v: &ElementTuple,
) -> Result<TupleOrder, LatticeError> {
    if u.lattice != v.lattice {
        return Err(LatticeError::LatticeMismatch(u.lattice.clone(), v.lattice.clone()));
    }
    if u.len() != v.len() {
        return Err(LatticeError::LengthMismatch(u.len(), v.len()));
    }
    Ok(compare_slices(lattice, &u.entries, &v.entries))
}

pub(crate) fn compare_slices(lattice: &FiniteLattice, u: &[Elem], v: &[Elem]) -> TupleOrder {
    let le = u.iter().zip(v).all(|(&a, &b)| lattice.leq(a, b));
    let ge = u.iter().zip(v).all(|(&a, &b)| lattice.leq(b, a));
    match (le, ge) {
        (true, true) => TupleOrder::Equal,
        (true, false) => TupleOrder::LessOrEqual,
        (false, true) => TupleOrder::GreaterOrEqual,
        (false, false) => TupleOrder::Incomparable,
    }
}

/// Transposition of two atoms of a flat lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transposition(pub Elem, pub Elem);

impl Transposition {
    #[inline]
    pub fn apply(self, e: Elem) -> Elem {
        if e == self.0 {
            self.1
        } else if e == self.1 {
            self.0
        } else {
            e
        }
    }
}

/// Atom transpositions generating the automorphisms of a flat lattice that
/// fix `fixed` pointwise.
pub fn stabilizer_transpositions(
    lattice: &FiniteLattice,
    fixed: &[Elem],
) -> Result<Vec<Transposition>, LatticeError> {
    if !lattice.is_flat() {
        return Err(LatticeError::NotFlat(lattice.name().to_string()));
    }
    let movable: Vec<Elem> = lattice
        .atoms()
        .iter()
        .copied()
        .filter(|a| !fixed.contains(a))
        .collect();
    let mut out = Vec::new();
    for (i, &x) in movable.iter().enumerate() {
        for &y in &movable[i + 1..] {
            out.push(Transposition(x, y));
        }
    }
    Ok(out)
}

/// Automorphism of a flat lattice given as a full element map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomPermutation {
    map: Vec<Elem>,
}

impl AtomPermutation {
    pub fn identity(lattice: &FiniteLattice) -> Self {
        AtomPermutation {
            map: lattice.elements().collect(),
        }
    }

    /// `atom_images[i]` is the image of the `i`-th atom.
    pub fn from_atom_images(lattice: &FiniteLattice, atom_images: &[Elem]) -> Result<Self, LatticeError> {
        if !lattice.is_flat() {
            return Err(LatticeError::NotFlat(lattice.name().to_string()));
        }
        let atoms = lattice.atoms();
        let mut seen: BTreeSet<Elem> = BTreeSet::new();
        if atom_images.len() != atoms.len()
            || atom_images.iter().any(|e| !atoms.contains(e) || !seen.insert(*e))
        {
            return Err(LatticeError::BadSpec("not a permutation of the atoms".into()));
        }
        let mut map: Vec<Elem> = lattice.elements().collect();
        for (&a, &img) in atoms.iter().zip(atom_images) {
            map[a.index()] = img;
        }
        Ok(AtomPermutation { map })
    }

    pub fn from_transposition(lattice: &FiniteLattice, t: Transposition) -> Self {
        let map = lattice.elements().map(|e| t.apply(e)).collect();
        AtomPermutation { map }
    }

    #[inline]
    pub fn apply(&self, e: Elem) -> Elem {
        self.map[e.index()]
    }

    pub fn inverse(&self) -> Self {
        let mut map = self.map.clone();
        for (i, &img) in self.map.iter().enumerate() {
            map[img.index()] = Elem::new(i);
        }
        AtomPermutation { map }
    }

    pub fn compose(&self, inner: &AtomPermutation) -> Self {
        AtomPermutation {
            map: inner.map.iter().map(|&e| self.apply(e)).collect(),
        }
    }
}
