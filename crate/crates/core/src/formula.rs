//! Formula AST, temporal terms, windows and the variable partition.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::FormulaError;

/// Prefix reserved for variables introduced by proposition removal.
pub const RESERVED_PREFIX: &str = "__p_";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Var(String),
    Const(i64),
}

/// Arithmetic temporal term: a variable or constant shifted by a signed depth.
///
/// Positive depth means `X^n`, negative depth means `Y^n`. Constants always
/// have depth zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub base: Base,
    pub depth: i32,
}

impl Term {
    pub fn var(name: impl Into<String>, depth: i32) -> Term {
        Term { base: Base::Var(name.into()), depth }
    }

    pub fn constant(value: i64) -> Term {
        Term { base: Base::Const(value), depth: 0 }
    }

    pub fn var_name(&self) -> Option<&str> {
        match &self.base {
            Base::Var(v) => Some(v),
            Base::Const(_) => None,
        }
    }

    pub fn const_value(&self) -> Option<i64> {
        match self.base {
            Base::Const(c) => Some(c),
            Base::Var(_) => None,
        }
    }

    /// Apply one more `X`; constants are invariant under shifting.
    pub fn next(&self) -> Term {
        self.shifted(1)
    }

    /// Apply one more `Y`.
    pub fn prev(&self) -> Term {
        self.shifted(-1)
    }

    pub fn shifted(&self, by: i32) -> Term {
        match &self.base {
            Base::Var(_) => Term { base: self.base.clone(), depth: self.depth + by },
            Base::Const(_) => self.clone(),
        }
    }
}

/// Raw nested term as written by a user, before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Var(String),
    Const(i64),
    X(Box<RawTerm>),
    Y(Box<RawTerm>),
}

/// Collapse nested `X`/`Y` applications into a single signed depth.
pub fn normalize_term(raw: &RawTerm) -> Term {
    match raw {
        RawTerm::Var(v) => Term::var(v.clone(), 0),
        RawTerm::Const(c) => Term::constant(*c),
        RawTerm::X(inner) => normalize_term(inner).next(),
        RawTerm::Y(inner) => normalize_term(inner).prev(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Lt(Term, Term),
    Eq(Term, Term),
    /// `t ≡ d (mod c)`
    ModEq { t: Term, c: i64, d: i64 },
    /// `t1 ≡ t2 + d (mod c)`
    ModEqTerm { t1: Term, t2: Term, c: i64, d: i64 },
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Lt(a, b) | Atom::Eq(a, b) => vec![a, b],
            Atom::ModEq { t, .. } => vec![t],
            Atom::ModEqTerm { t1, t2, .. } => vec![t1, t2],
        }
    }

    pub fn is_modular(&self) -> bool {
        matches!(self, Atom::ModEq { .. } | Atom::ModEqTerm { .. })
    }

    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Lt(a, b) => Atom::Lt(f(a), f(b)),
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::ModEq { t, c, d } => Atom::ModEq { t: f(t), c: *c, d: *d },
            Atom::ModEqTerm { t1, t2, c, d } => {
                Atom::ModEqTerm { t1: f(t1), t2: f(t2), c: *c, d: *d }
            }
        }
    }

    /// Constants mentioned by the atom, including the residue of modular atoms.
    pub fn constants(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self.terms().iter().filter_map(|t| t.const_value()).collect();
        if let Atom::ModEq { d, .. } = self {
            out.push(*d);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Prop(String),
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Prev(Box<Formula>),
    WeakPrev(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Since(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Trigger(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }
    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Lt(a, b))
    }
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }
    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }
    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }
    pub fn prev(f: Formula) -> Formula {
        Formula::Prev(Box::new(f))
    }
    pub fn weak_prev(f: Formula) -> Formula {
        Formula::WeakPrev(Box::new(f))
    }
    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }
    pub fn since(a: Formula, b: Formula) -> Formula {
        Formula::Since(Box::new(a), Box::new(b))
    }
    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::Release(Box::new(a), Box::new(b))
    }
    pub fn trigger(a: Formula, b: Formula) -> Formula {
        Formula::Trigger(Box::new(a), Box::new(b))
    }
    /// `G f` as `false R f`.
    pub fn globally(f: Formula) -> Formula {
        Formula::release(Formula::False, f)
    }
    /// `F f` as `true U f`.
    pub fn finally(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }
    /// `H f` as `false T f`.
    pub fn historically(f: Formula) -> Formula {
        Formula::trigger(Formula::False, f)
    }
    /// `O f` as `true S f`.
    pub fn once(f: Formula) -> Formula {
        Formula::since(Formula::True, f)
    }

    /// Conjunction of a list; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = items.into_iter().collect();
        match items.len() {
            0 => Formula::True,
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(f) = items.pop() {
                    acc = Formula::and(f, acc);
                }
                acc
            }
        }
    }

    /// Disjunction of a list; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = items.into_iter().collect();
        match items.len() {
            0 => Formula::False,
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(f) = items.pop() {
                    acc = Formula::or(f, acc);
                }
                acc
            }
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::Atom(_) => vec![],
            Formula::Not(a) | Formula::Next(a) | Formula::Prev(a) | Formula::WeakPrev(a) => {
                vec![a]
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Since(a, b)
            | Formula::Release(a, b)
            | Formula::Trigger(a, b) => vec![a, b],
        }
    }

    /// Rebuild the formula with every atom transformed by `f`.
    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Formula) -> Formula {
        let rec = |x: &Formula| Box::new(x.map_atoms(f));
        match self {
            Formula::Atom(a) => f(a),
            Formula::True | Formula::False | Formula::Prop(_) => self.clone(),
            Formula::Not(a) => Formula::Not(rec(a)),
            Formula::Next(a) => Formula::Next(rec(a)),
            Formula::Prev(a) => Formula::Prev(rec(a)),
            Formula::WeakPrev(a) => Formula::WeakPrev(rec(a)),
            Formula::And(a, b) => Formula::And(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
            Formula::Until(a, b) => Formula::Until(rec(a), rec(b)),
            Formula::Since(a, b) => Formula::Since(rec(a), rec(b)),
            Formula::Release(a, b) => Formula::Release(rec(a), rec(b)),
            Formula::Trigger(a, b) => Formula::Trigger(rec(a), rec(b)),
        }
    }

    /// Rebuild the formula with every proposition transformed by `f`.
    pub fn map_props(&self, f: &impl Fn(&str) -> Formula) -> Formula {
        let rec = |x: &Formula| Box::new(x.map_props(f));
        match self {
            Formula::Prop(p) => f(p),
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(a) => Formula::Not(rec(a)),
            Formula::Next(a) => Formula::Next(rec(a)),
            Formula::Prev(a) => Formula::Prev(rec(a)),
            Formula::WeakPrev(a) => Formula::WeakPrev(rec(a)),
            Formula::And(a, b) => Formula::And(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
            Formula::Until(a, b) => Formula::Until(rec(a), rec(b)),
            Formula::Since(a, b) => Formula::Since(rec(a), rec(b)),
            Formula::Release(a, b) => Formula::Release(rec(a), rec(b)),
            Formula::Trigger(a, b) => Formula::Trigger(rec(a), rec(b)),
        }
    }

    fn visit<'a>(&'a self, out: &mut impl FnMut(&'a Formula)) {
        for c in self.children() {
            c.visit(out);
        }
        out(self);
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Atom(a) = f {
                out.push(a);
            }
        });
        out
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Prop(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            for t in a.terms() {
                if let Some(v) = t.var_name() {
                    out.insert(v.to_string());
                }
            }
        }
        out
    }

    pub fn has_modular(&self) -> bool {
        self.atoms().iter().any(|a| a.is_modular())
    }

    /// True when negation occurs only directly above propositions and atoms.
    pub fn is_pnf(&self) -> bool {
        match self {
            Formula::Not(inner) => matches!(**inner, Formula::Prop(_) | Formula::Atom(_)),
            _ => self.children().iter().all(|c| c.is_pnf()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theory {
    Ipc,
    Int,
    Nat,
    Rat,
    Real,
}

impl Theory {
    /// Dense and open domains: every locally consistent symbolic model
    /// admits an arithmetic one.
    pub fn has_completion_property(self) -> bool {
        matches!(self, Theory::Rat | Theory::Real)
    }

    pub fn is_discrete(self) -> bool {
        !self.has_completion_property()
    }

    pub fn name(self) -> &'static str {
        match self {
            Theory::Ipc => "ipc",
            Theory::Int => "int",
            Theory::Nat => "nat",
            Theory::Rat => "rat",
            Theory::Real => "real",
        }
    }

    pub fn parse(s: &str) -> Option<Theory> {
        match s {
            "ipc" => Some(Theory::Ipc),
            "int" => Some(Theory::Int),
            "nat" => Some(Theory::Nat),
            "rat" => Some(Theory::Rat),
            "real" => Some(Theory::Real),
            _ => None,
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub look_back: i32,
    pub look_ahead: i32,
}

impl Bounds {
    pub fn width(&self) -> i32 {
        self.look_ahead - self.look_back + 1
    }

    pub fn shifts(&self) -> std::ops::RangeInclusive<i32> {
        self.look_back..=self.look_ahead
    }
}

pub fn bounds(phi: &Formula) -> Bounds {
    let mut lb = 0;
    let mut ub = 0;
    for a in phi.atoms() {
        for t in a.terms() {
            if t.var_name().is_some() {
                lb = lb.min(t.depth);
                ub = ub.max(t.depth);
            }
        }
    }
    Bounds { look_back: lb, look_ahead: ub }
}

/// Full term closure: every variable at every shift of the window.
pub fn terms_of(phi: &Formula) -> BTreeSet<Term> {
    let b = bounds(phi);
    let mut out = BTreeSet::new();
    for v in phi.variables() {
        for d in b.shifts() {
            out.insert(Term::var(v.clone(), d));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantsMode {
    #[default]
    Occurring,
    Interval,
}

impl ConstantsMode {
    pub fn parse(s: &str) -> Option<ConstantsMode> {
        match s {
            "occurring" => Some(ConstantsMode::Occurring),
            "interval" => Some(ConstantsMode::Interval),
            _ => None,
        }
    }
}

fn expand(consts: &BTreeSet<i64>) -> BTreeSet<i64> {
    match (consts.first(), consts.last()) {
        (Some(&lo), Some(&hi)) => (lo..=hi).collect(),
        _ => BTreeSet::new(),
    }
}

pub fn constants_of(
    phi: &Formula,
    mode: ConstantsMode,
    theory: Theory,
) -> Result<BTreeSet<i64>, FormulaError> {
    let occurring: BTreeSet<i64> = phi.atoms().iter().flat_map(|a| a.constants()).collect();
    match mode {
        ConstantsMode::Occurring => Ok(occurring),
        ConstantsMode::Interval if !theory.is_discrete() => Err(FormulaError::DenseInterval),
        ConstantsMode::Interval => Ok(expand(&occurring)),
    }
}

/// Node of the subformula table; children are referenced by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    True,
    False,
    Prop(String),
    Atom(Atom),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Prev(usize),
    WeakPrev(usize),
    Until(usize, usize),
    Since(usize, usize),
    Release(usize, usize),
    Trigger(usize, usize),
}

impl Node {
    pub fn is_temporal(&self) -> bool {
        matches!(
            self,
            Node::Next(_)
                | Node::Prev(_)
                | Node::WeakPrev(_)
                | Node::Until(..)
                | Node::Since(..)
                | Node::Release(..)
                | Node::Trigger(..)
        )
    }
}

/// Distinct subformulae in bottom-up order; the root is last.
#[derive(Debug, Clone)]
pub struct SubTable {
    pub formulas: Vec<Formula>,
    pub nodes: Vec<Node>,
}

impl SubTable {
    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.formulas.iter().position(|g| g == f)
    }
}

pub fn sub_table(phi: &Formula) -> SubTable {
    fn go(f: &Formula, idx: &mut HashMap<Formula, usize>, t: &mut SubTable) -> usize {
        if let Some(&i) = idx.get(f) {
            return i;
        }
        let mut r = |x: &Formula| go(x, idx, t);
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Prop(p) => Node::Prop(p.clone()),
            Formula::Atom(a) => Node::Atom(a.clone()),
            Formula::Not(a) => Node::Not(r(a)),
            Formula::Next(a) => Node::Next(r(a)),
            Formula::Prev(a) => Node::Prev(r(a)),
            Formula::WeakPrev(a) => Node::WeakPrev(r(a)),
            Formula::And(a, b) => {
                let x = r(a);
                Node::And(x, r(b))
            }
            Formula::Or(a, b) => {
                let x = r(a);
                Node::Or(x, r(b))
            }
            Formula::Until(a, b) => {
                let x = r(a);
                Node::Until(x, r(b))
            }
            Formula::Since(a, b) => {
                let x = r(a);
                Node::Since(x, r(b))
            }
            Formula::Release(a, b) => {
                let x = r(a);
                Node::Release(x, r(b))
            }
            Formula::Trigger(a, b) => {
                let x = r(a);
                Node::Trigger(x, r(b))
            }
        };
        let i = t.nodes.len();
        t.nodes.push(node);
        t.formulas.push(f.clone());
        idx.insert(f.clone(), i);
        i
    }
    let mut t = SubTable { formulas: Vec::new(), nodes: Vec::new() };
    let mut idx = HashMap::new();
    go(phi, &mut idx, &mut t);
    t
}

/// Every distinct subformula once, children before parents.
pub fn subformulae(phi: &Formula) -> Vec<Formula> {
    sub_table(phi).formulas
}

/// Variable classes induced by atoms, with the constants each class meets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarPartition {
    pub classes: Vec<BTreeSet<String>>,
    pub consts: Vec<BTreeSet<i64>>,
}

impl VarPartition {
    pub fn class_of(&self, var: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(var))
    }

    /// Single class holding every variable and constant.
    pub fn merged(&self) -> VarPartition {
        let vars: BTreeSet<String> = self.classes.iter().flatten().cloned().collect();
        let consts: BTreeSet<i64> = self.consts.iter().flatten().copied().collect();
        if vars.is_empty() {
            return VarPartition { classes: vec![], consts: vec![] };
        }
        VarPartition { classes: vec![vars], consts: vec![consts] }
    }

    /// Replace every non-empty constant set by the integer interval it spans.
    pub fn with_interval_constants(&self) -> VarPartition {
        VarPartition {
            classes: self.classes.clone(),
            consts: self.consts.iter().map(expand).collect(),
        }
    }

    /// Add `c` to every class.
    pub fn with_constant(&self, c: i64) -> VarPartition {
        let mut out = self.clone();
        for s in &mut out.consts {
            s.insert(c);
        }
        out
    }
}

pub fn partition_variables(phi: &Formula) -> VarPartition {
    let vars: Vec<String> = phi.variables().into_iter().collect();
    let pos: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let atoms = phi.atoms();
    for a in &atoms {
        let ids: Vec<usize> = a.terms().iter().filter_map(|t| t.var_name()).map(|v| pos[v]).collect();
        for w in ids.windows(2) {
            let (ra, rb) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut classes: Vec<BTreeSet<String>> = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        let r = find(&mut parent, i);
        let c = *by_root.entry(r).or_insert_with(|| {
            classes.push(BTreeSet::new());
            classes.len() - 1
        });
        classes[c].insert(v.clone());
    }
    let mut consts = vec![BTreeSet::new(); classes.len()];
    for a in &atoms {
        let cs = a.constants();
        if cs.is_empty() {
            continue;
        }
        for t in a.terms() {
            if let Some(v) = t.var_name() {
                let r = find(&mut parent, pos[v]);
                consts[by_root[&r]].extend(cs.iter().copied());
            }
        }
    }
    VarPartition { classes, consts }
}
