//! Bounded encoding of a formula into quantifier-free EUF plus arithmetic.
//!
//! Every term `X^d x` becomes a unary function over positions and every
//! subformula a unary predicate. Positions run over `0..=k+1`; position
//! `k+1` stands for the loop position and is tied back to `loop` by the
//! last-state rows.

use std::collections::BTreeSet;

use crate::error::EncodeError;
use crate::existence;
use crate::formula::{bounds, sub_table, Atom, Base, Bounds, ConstantsMode, Formula, Node, SubTable, Term, Theory};
use crate::smt::{Family, SExpr, SmtScript, Sort};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValuationMode {
    #[default]
    Weak,
    Strong,
}

impl ValuationMode {
    pub fn parse(s: &str) -> Option<ValuationMode> {
        match s {
            "weak" => Some(ValuationMode::Weak),
            "strong" => Some(ValuationMode::Strong),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Emit the arithmetic-model existence condition (discrete theories only).
    pub existence: bool,
    pub mode: ValuationMode,
    pub consts: ConstantsMode,
    /// Also forbid the pattern for a variable paired with itself at two shifts.
    pub self_pairs: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { existence: true, mode: ValuationMode::Weak, consts: ConstantsMode::Occurring, self_pairs: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventualityKind {
    Until,
    Release,
}

#[derive(Debug, Clone)]
pub struct EncodingContext {
    pub k: u32,
    pub theory: Theory,
    pub bounds: Bounds,
    pub vars: Vec<String>,
    pub subs: SubTable,
    pub value_sort: Sort,
}

impl EncodingContext {
    pub fn new(phi: &Formula, k: u32, theory: Theory) -> Result<EncodingContext, EncodeError> {
        if k < 1 {
            return Err(EncodeError::BadBound(k));
        }
        if let Some(p) = phi.props().into_iter().next() {
            return Err(EncodeError::PropositionsPresent(p));
        }
        if !phi.is_pnf() {
            return Err(EncodeError::NotPnf);
        }
        if phi.has_modular() && !theory.is_discrete() {
            return Err(EncodeError::ModularOverDense);
        }
        let value_sort = if theory.is_discrete() { Sort::Int } else { Sort::Real };
        Ok(EncodingContext {
            k,
            theory,
            bounds: bounds(phi),
            vars: phi.variables().into_iter().collect(),
            subs: sub_table(phi),
            value_sort,
        })
    }

    pub fn k(&self) -> i64 {
        self.k as i64
    }

    pub fn term_fn(var: &str, depth: i32) -> String {
        let code = match depth.cmp(&0) {
            std::cmp::Ordering::Equal => "0".to_string(),
            std::cmp::Ordering::Greater => format!("p{depth}"),
            std::cmp::Ordering::Less => format!("m{}", -depth),
        };
        format!("v_{var}_{code}")
    }

    pub fn pred(n: usize) -> String {
        format!("s{n}")
    }

    pub fn idx(i: i64) -> SExpr {
        SExpr::int(i)
    }

    pub fn loop_sym() -> SExpr {
        SExpr::sym("loop")
    }

    pub fn loop_minus_one() -> SExpr {
        SExpr::sub(Self::loop_sym(), SExpr::int(1))
    }

    pub fn literal(&self, c: i64) -> SExpr {
        match self.value_sort {
            Sort::Real => SExpr::real(c),
            _ => SExpr::int(c),
        }
    }

    pub fn term_app(&self, var: &str, depth: i32, at: SExpr) -> SExpr {
        SExpr::app(&Self::term_fn(var, depth), vec![at])
    }

    pub fn term_at(&self, t: &Term, at: SExpr) -> SExpr {
        match &t.base {
            Base::Const(c) => self.literal(*c),
            Base::Var(v) => self.term_app(v, t.depth, at),
        }
    }

    pub fn pred_at(n: usize, at: SExpr) -> SExpr {
        SExpr::app(&Self::pred(n), vec![at])
    }

    /// Term application denoting the value of `var` at absolute position
    /// `pos` in `[lb, k+1+ub]`.
    pub fn sigma_at(&self, var: &str, pos: i64) -> SExpr {
        let k = self.k();
        if pos < 0 {
            self.term_app(var, pos as i32, Self::idx(0))
        } else if pos <= k + 1 {
            self.term_app(var, 0, Self::idx(pos))
        } else {
            self.term_app(var, (pos - k - 1) as i32, Self::idx(k + 1))
        }
    }

    pub fn eventuality_var(kind: EventualityKind, psi2: usize) -> String {
        match kind {
            EventualityKind::Until => format!("j_u_{psi2}"),
            EventualityKind::Release => format!("j_r_{psi2}"),
        }
    }

    pub fn atom_nodes(&self) -> Vec<(usize, &Atom)> {
        self.subs
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(n, node)| match node {
                Node::Atom(a) => Some((n, a)),
                _ => None,
            })
            .collect()
    }

    fn rem_fn(n: usize) -> String {
        format!("r{n}")
    }

    fn quot_fn(n: usize) -> String {
        format!("q{n}")
    }

    /// Relation of atom node `n` evaluated at position `at`.
    pub fn atom_at(&self, n: usize, a: &Atom, at: SExpr) -> SExpr {
        match a {
            Atom::Lt(x, y) => SExpr::lt(self.term_at(x, at.clone()), self.term_at(y, at)),
            Atom::Eq(x, y) => SExpr::eq(self.term_at(x, at.clone()), self.term_at(y, at)),
            Atom::ModEq { .. } | Atom::ModEqTerm { .. } => {
                SExpr::eq(SExpr::app(&Self::rem_fn(n), vec![at]), SExpr::int(0))
            }
        }
    }

    /// Ground applications whose model values make up a witness.
    pub fn witness_requests(&self) -> Vec<SExpr> {
        let k = self.k();
        let lb = self.bounds.look_back as i64;
        let ub = self.bounds.look_ahead as i64;
        let mut out = vec![Self::loop_sym()];
        for v in &self.vars {
            for p in lb..=k + 1 + ub {
                out.push(self.sigma_at(v, p));
            }
        }
        for n in 0..self.subs.len() {
            for i in 0..=k + 1 {
                out.push(Self::pred_at(n, Self::idx(i)));
            }
        }
        out
    }
}

/// Chaining of shifted terms: `X^d x(i) = X^(d-1) x(i+1)` for `0 ≤ i ≤ k`
/// and `Y^d x(i) = Y^(d-1) x(i-1)` for `1 ≤ i ≤ k+1`.
///
/// The row at `i = k` binds the future margin of the window to position
/// `k+1`; the past margin is carried by `Y^d x(0)` itself.
pub fn encode_arith_constraints(ctx: &EncodingContext) -> Vec<SExpr> {
    let k = ctx.k();
    let mut out = Vec::new();
    for v in &ctx.vars {
        for d in 1..=ctx.bounds.look_ahead {
            for i in 0..=k {
                out.push(SExpr::eq(
                    ctx.term_app(v, d, EncodingContext::idx(i)),
                    ctx.term_app(v, d - 1, EncodingContext::idx(i + 1)),
                ));
            }
        }
        for d in (ctx.bounds.look_back..=-1).rev() {
            for i in 1..=k + 1 {
                out.push(SExpr::eq(
                    ctx.term_app(v, d, EncodingContext::idx(i)),
                    ctx.term_app(v, d + 1, EncodingContext::idx(i - 1)),
                ));
            }
        }
    }
    out
}

/// Atoms and boolean connectives at every position `0..=k+1`.
pub fn encode_prop_constraints(ctx: &EncodingContext) -> Vec<SExpr> {
    let mut out = Vec::new();
    for (n, node) in ctx.subs.nodes.iter().enumerate() {
        if node.is_temporal() {
            continue;
        }
        for i in 0..=ctx.k() + 1 {
            let at = EncodingContext::idx(i);
            let me = EncodingContext::pred_at(n, at.clone());
            let p = |c: usize| EncodingContext::pred_at(c, at.clone());
            let row = match node {
                Node::True => me,
                Node::False => SExpr::not(me),
                Node::Atom(a) => SExpr::eq(me, ctx.atom_at(n, a, at.clone())),
                Node::Not(c) => match &ctx.subs.nodes[*c] {
                    Node::Atom(a) => SExpr::eq(me, SExpr::not(ctx.atom_at(*c, a, at.clone()))),
                    _ => SExpr::eq(me, SExpr::not(p(*c))),
                },
                Node::And(a, b) => SExpr::eq(me, SExpr::and(vec![p(*a), p(*b)])),
                Node::Or(a, b) => SExpr::eq(me, SExpr::or(vec![p(*a), p(*b)])),
                Node::Prop(_) => unreachable!("propositions are rejected by the context"),
                _ => unreachable!(),
            };
            out.push(row);
        }
    }
    out
}

/// Exact divisibility for modular atoms through quotient and remainder
/// functions: `t(i) - d = c*q(i) + r(i)` with `0 ≤ r(i) < c`.
pub fn encode_divisibility(ctx: &EncodingContext) -> Vec<SExpr> {
    let mut out = Vec::new();
    for (n, a) in ctx.atom_nodes() {
        let (lhs_of, c): (Box<dyn Fn(SExpr) -> SExpr>, i64) = match a {
            Atom::ModEq { t, c, d } => {
                let t = t.clone();
                let d = *d;
                (Box::new(move |at| SExpr::sub(ctx.term_at(&t, at), SExpr::int(d))), *c)
            }
            Atom::ModEqTerm { t1, t2, c, d } => {
                let (t1, t2, d) = (t1.clone(), t2.clone(), *d);
                (
                    Box::new(move |at: SExpr| {
                        SExpr::sub(
                            SExpr::sub(ctx.term_at(&t1, at.clone()), ctx.term_at(&t2, at)),
                            SExpr::int(d),
                        )
                    }),
                    *c,
                )
            }
            _ => continue,
        };
        for i in 0..=ctx.k() + 1 {
            let at = EncodingContext::idx(i);
            let q = SExpr::app(&EncodingContext::quot_fn(n), vec![at.clone()]);
            let r = SExpr::app(&EncodingContext::rem_fn(n), vec![at.clone()]);
            out.push(SExpr::eq(lhs_of(at), SExpr::add(SExpr::mul(SExpr::int(c), q), r.clone())));
            out.push(SExpr::le(SExpr::int(0), r.clone()));
            out.push(SExpr::lt(r, SExpr::int(c)));
        }
    }
    out
}

/// Fixpoint unfoldings of temporal operators.
pub fn encode_temp_constraints(ctx: &EncodingContext) -> Vec<SExpr> {
    let k = ctx.k();
    let mut out = Vec::new();
    let p = |n: usize, i: i64| EncodingContext::pred_at(n, EncodingContext::idx(i));
    for (n, node) in ctx.subs.nodes.iter().enumerate() {
        match *node {
            Node::Next(a) => {
                for i in 0..=k {
                    out.push(SExpr::eq(p(n, i), p(a, i + 1)));
                }
            }
            Node::Until(a, b) => {
                for i in 0..=k {
                    let step = SExpr::or(vec![p(b, i), SExpr::and(vec![p(a, i), p(n, i + 1)])]);
                    out.push(SExpr::eq(p(n, i), step));
                }
            }
            Node::Release(a, b) => {
                for i in 0..=k {
                    let step = SExpr::and(vec![p(b, i), SExpr::or(vec![p(a, i), p(n, i + 1)])]);
                    out.push(SExpr::eq(p(n, i), step));
                }
            }
            Node::Prev(a) => {
                out.push(SExpr::not(p(n, 0)));
                for i in 1..=k + 1 {
                    out.push(SExpr::eq(p(n, i), p(a, i - 1)));
                }
            }
            Node::WeakPrev(a) => {
                out.push(p(n, 0));
                for i in 1..=k + 1 {
                    out.push(SExpr::eq(p(n, i), p(a, i - 1)));
                }
            }
            Node::Since(a, b) => {
                out.push(SExpr::eq(p(n, 0), p(b, 0)));
                for i in 1..=k + 1 {
                    let step = SExpr::or(vec![p(b, i), SExpr::and(vec![p(a, i), p(n, i - 1)])]);
                    out.push(SExpr::eq(p(n, i), step));
                }
            }
            Node::Trigger(a, b) => {
                out.push(SExpr::eq(p(n, 0), p(b, 0)));
                for i in 1..=k + 1 {
                    let step = SExpr::and(vec![p(b, i), SExpr::or(vec![p(a, i), p(n, i - 1)])]);
                    out.push(SExpr::eq(p(n, i), step));
                }
            }
            _ => {}
        }
    }
    out
}

/// `1 ≤ loop ≤ k`.
pub fn encode_loop_range(ctx: &EncodingContext) -> SExpr {
    let l = EncodingContext::loop_sym();
    SExpr::and(vec![SExpr::le(SExpr::int(1), l.clone()), SExpr::le(l, SExpr::int(ctx.k()))])
}

/// Periodicity: every relation atom has the same value at `loop-1` and `k`.
pub fn encode_loop_constraints(ctx: &EncodingContext) -> Vec<SExpr> {
    ctx.atom_nodes()
        .into_iter()
        .map(|(n, _)| {
            SExpr::eq(
                EncodingContext::pred_at(n, EncodingContext::loop_minus_one()),
                EncodingContext::pred_at(n, EncodingContext::idx(ctx.k())),
            )
        })
        .collect()
}

/// Position `k+1` repeats position `loop` for every subformula.
pub fn encode_last_state_constraints(ctx: &EncodingContext) -> Vec<SExpr> {
    (0..ctx.subs.len())
        .map(|n| {
            SExpr::eq(
                EncodingContext::pred_at(n, EncodingContext::idx(ctx.k() + 1)),
                EncodingContext::pred_at(n, EncodingContext::loop_sym()),
            )
        })
        .collect()
}

/// Integer witnesses of eventualities, one per operator kind and right operand.
pub fn eventuality_vars(ctx: &EncodingContext) -> BTreeSet<(EventualityKind, usize)> {
    ctx.subs
        .nodes
        .iter()
        .filter_map(|n| match *n {
            Node::Until(_, b) => Some((EventualityKind::Until, b)),
            Node::Release(_, b) => Some((EventualityKind::Release, b)),
            _ => None,
        })
        .collect()
}

pub fn encode_eventualities(ctx: &EncodingContext) -> Vec<SExpr> {
    let k = ctx.k();
    let mut out = Vec::new();
    for (n, node) in ctx.subs.nodes.iter().enumerate() {
        let (kind, b) = match *node {
            Node::Until(_, b) => (EventualityKind::Until, b),
            Node::Release(_, b) => (EventualityKind::Release, b),
            _ => continue,
        };
        let j = SExpr::sym(EncodingContext::eventuality_var(kind, b));
        let range = vec![
            SExpr::le(EncodingContext::loop_sym(), j.clone()),
            SExpr::le(j.clone(), SExpr::int(k)),
        ];
        let at_k = EncodingContext::pred_at(n, EncodingContext::idx(k));
        let psi = EncodingContext::pred_at(b, j);
        out.push(match kind {
            EventualityKind::Until => {
                SExpr::implies(at_k, SExpr::and(range.into_iter().chain([psi]).collect()))
            }
            EventualityKind::Release => SExpr::implies(
                SExpr::not(at_k),
                SExpr::and(range.into_iter().chain([SExpr::not(psi)]).collect()),
            ),
        });
    }
    out
}

pub fn encode_initial(ctx: &EncodingContext) -> SExpr {
    EncodingContext::pred_at(ctx.subs.root(), EncodingContext::idx(0))
}

/// Non-negativity of every term function for the naturals.
pub fn encode_domain(ctx: &EncodingContext) -> Vec<SExpr> {
    if ctx.theory != Theory::Nat {
        return Vec::new();
    }
    let mut out = Vec::new();
    for v in &ctx.vars {
        for d in ctx.bounds.shifts() {
            for i in 0..=ctx.k() + 1 {
                out.push(SExpr::le(SExpr::int(0), ctx.term_app(v, d, EncodingContext::idx(i))));
            }
        }
    }
    out
}

pub struct Encoding {
    pub script: SmtScript,
    pub ctx: EncodingContext,
    /// Ground applications requested after `sat`, in script order.
    pub requests: Vec<SExpr>,
}

fn logic_for(theory: Theory) -> &'static str {
    if theory.is_discrete() {
        "QF_UFLIA"
    } else {
        "QF_UFLIRA"
    }
}

/// Build the complete script for `phi` (PNF, proposition-free) and bound `k`.
pub fn build_encoding(
    phi: &Formula,
    k: u32,
    theory: Theory,
    opts: &EncodeOptions,
) -> Result<Encoding, EncodeError> {
    let ctx = EncodingContext::new(phi, k, theory)?;
    let mut s = SmtScript::new(logic_for(theory));
    s.comments.push(format!("k = {k}, theory = {theory}"));
    s.comments.push(format!(
        "window [{}, {}], {} subformulae",
        ctx.bounds.look_back,
        ctx.bounds.look_ahead,
        ctx.subs.len()
    ));

    s.declare("loop", vec![], Sort::Int);
    for v in &ctx.vars {
        for d in ctx.bounds.shifts() {
            s.declare(EncodingContext::term_fn(v, d), vec![Sort::Int], ctx.value_sort);
        }
    }
    for n in 0..ctx.subs.len() {
        s.declare(EncodingContext::pred(n), vec![Sort::Int], Sort::Bool);
    }
    for (n, a) in ctx.atom_nodes() {
        if a.is_modular() {
            s.declare(EncodingContext::quot_fn(n), vec![Sort::Int], Sort::Int);
            s.declare(EncodingContext::rem_fn(n), vec![Sort::Int], Sort::Int);
        }
    }
    for (kind, b) in eventuality_vars(&ctx) {
        s.declare(EncodingContext::eventuality_var(kind, b), vec![], Sort::Int);
    }

    s.extend(Family::Arith, encode_arith_constraints(&ctx));
    s.extend(Family::Prop, encode_prop_constraints(&ctx));
    s.extend(Family::Divisibility, encode_divisibility(&ctx));
    s.extend(Family::Temp, encode_temp_constraints(&ctx));
    s.assert(Family::LoopRange, encode_loop_range(&ctx));
    s.extend(Family::Loop, encode_loop_constraints(&ctx));
    s.extend(Family::LastState, encode_last_state_constraints(&ctx));
    s.extend(Family::Eventually, encode_eventualities(&ctx));
    s.assert(Family::Initial, encode_initial(&ctx));
    s.extend(Family::Domain, encode_domain(&ctx));

    if opts.existence && theory.is_discrete() {
        existence::encode_all(&ctx, phi, opts, &mut s)?;
    }

    let requests = ctx.witness_requests();
    s.get_values = requests.clone();
    Ok(Encoding { script: s, ctx, requests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{remove_propositions, to_pnf};

    fn x(d: i32) -> Term {
        Term::var("x", d)
    }

    fn strings(v: &[SExpr]) -> Vec<String> {
        v.iter().map(|e| e.to_string()).collect()
    }

    #[test]
    fn arith_rows_for_next_term() {
        let phi = Formula::lt(x(0), x(1));
        let ctx = EncodingContext::new(&phi, 2, Theory::Int).unwrap();
        assert_eq!(
            strings(&encode_arith_constraints(&ctx)),
            vec![
                "(= (v_x_p1 0) (v_x_0 1))",
                "(= (v_x_p1 1) (v_x_0 2))",
                "(= (v_x_p1 2) (v_x_0 3))",
            ]
        );
        assert_eq!(ctx.sigma_at("x", 3).to_string(), "(v_x_0 3)");
        assert_eq!(ctx.sigma_at("x", 4).to_string(), "(v_x_p1 3)");
    }

    #[test]
    fn arith_rows_absent_without_shifts() {
        let phi = Formula::eq(x(0), Term::constant(1));
        let ctx = EncodingContext::new(&phi, 3, Theory::Int).unwrap();
        assert!(encode_arith_constraints(&ctx).is_empty());
    }

    #[test]
    fn arith_rows_for_previous_term() {
        let phi = Formula::lt(x(-1), x(0));
        let ctx = EncodingContext::new(&phi, 1, Theory::Int).unwrap();
        assert_eq!(
            strings(&encode_arith_constraints(&ctx)),
            vec!["(= (v_x_m1 1) (v_x_0 0))", "(= (v_x_m1 2) (v_x_0 1))"]
        );
        assert_eq!(ctx.sigma_at("x", -1).to_string(), "(v_x_m1 0)");
    }

    #[test]
    fn prop_rows() {
        let phi = Formula::lt(x(0), x(1));
        let ctx = EncodingContext::new(&phi, 2, Theory::Int).unwrap();
        let rows = strings(&encode_prop_constraints(&ctx));
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0], "(= (s0 0) (< (v_x_0 0) (v_x_p1 0)))");
        assert_eq!(rows[3], "(= (s0 3) (< (v_x_0 3) (v_x_p1 3)))");

        let y = Term::var("y", 0);
        let phi = Formula::and(Formula::lt(x(0), y.clone()), Formula::eq(y.clone(), x(0)));
        let ctx = EncodingContext::new(&phi, 2, Theory::Int).unwrap();
        let and_rows = strings(&encode_prop_constraints(&ctx))
            .into_iter()
            .filter(|r| r.contains("(and"))
            .count();
        assert_eq!(and_rows, 4);

        let phi = Formula::not(Formula::eq(x(0), y));
        let ctx = EncodingContext::new(&phi, 1, Theory::Int).unwrap();
        let rows = strings(&encode_prop_constraints(&ctx));
        assert!(rows.contains(&"(= (s1 0) (not (= (v_x_0 0) (v_y_0 0))))".to_string()));
    }

    #[test]
    fn temporal_rows() {
        let q = Formula::eq(x(0), Term::constant(1));
        let ctx = EncodingContext::new(&Formula::next(q.clone()), 1, Theory::Int).unwrap();
        assert_eq!(strings(&encode_temp_constraints(&ctx)), vec!["(= (s1 0) (s0 1))", "(= (s1 1) (s0 2))"]);
        let ctx = EncodingContext::new(&Formula::prev(q.clone()), 2, Theory::Int).unwrap();
        let rows = strings(&encode_temp_constraints(&ctx));
        assert_eq!(rows[0], "(not (s1 0))");
        assert_eq!(rows.len(), 4);
        let phi = Formula::since(Formula::True, q);
        let ctx = EncodingContext::new(&phi, 2, Theory::Int).unwrap();
        let rows = strings(&encode_temp_constraints(&ctx));
        assert_eq!(rows[0], "(= (s2 0) (s1 0))");
    }

    #[test]
    fn loop_rows_per_atom() {
        let a = Formula::lt(x(0), x(1));
        let ctx = EncodingContext::new(&Formula::globally(a.clone()), 2, Theory::Int).unwrap();
        let rows = strings(&encode_loop_constraints(&ctx));
        assert_eq!(rows, vec!["(= (s1 (- loop 1)) (s1 2))"]);
        let b = Formula::eq(x(0), x(1));
        let ctx = EncodingContext::new(&Formula::or(a, b), 2, Theory::Int).unwrap();
        assert_eq!(encode_loop_constraints(&ctx).len(), 2);
    }

    #[test]
    fn last_state_rows() {
        let phi = Formula::globally(Formula::lt(x(0), x(1)));
        let ctx = EncodingContext::new(&phi, 2, Theory::Int).unwrap();
        let rows = strings(&encode_last_state_constraints(&ctx));
        assert_eq!(rows.len(), 3);
        assert!(rows.contains(&"(= (s2 3) (s2 loop))".to_string()));
    }

    #[test]
    fn eventuality_rows() {
        let q = Formula::eq(x(0), Term::constant(1));
        let ctx = EncodingContext::new(&Formula::finally(q.clone()), 2, Theory::Int).unwrap();
        assert_eq!(
            strings(&encode_eventualities(&ctx)),
            vec!["(=> (s2 2) (and (<= loop j_u_1) (<= j_u_1 2) (s1 j_u_1)))"]
        );
        let ctx = EncodingContext::new(&Formula::globally(q.clone()), 2, Theory::Int).unwrap();
        assert_eq!(
            strings(&encode_eventualities(&ctx)),
            vec!["(=> (not (s2 2)) (and (<= loop j_r_1) (<= j_r_1 2) (not (s1 j_r_1))))"]
        );
        let ctx = EncodingContext::new(&Formula::next(q), 2, Theory::Int).unwrap();
        assert!(encode_eventualities(&ctx).is_empty());
    }

    #[test]
    fn build_basic_properties() {
        let phi = Formula::globally(Formula::lt(x(0), x(1)));
        let opts = EncodeOptions::default();
        let e = build_encoding(&phi, 2, Theory::Int, &opts).unwrap();
        assert_eq!(e.script.count(Family::Initial), 1);
        assert_eq!(e.script.count(Family::LoopRange), 1);
        assert!(e.script.count(Family::Existence) > 0);
        let r = build_encoding(&phi, 2, Theory::Real, &opts).unwrap();
        assert!(r.script.assertions.iter().all(|a| !a.family.is_existence()));
        assert_eq!(r.script.logic, "QF_UFLIRA");
        assert!(build_encoding(&phi, 0, Theory::Int, &opts).is_err());
        assert!(matches!(
            build_encoding(&Formula::prop("p"), 1, Theory::Int, &opts),
            Err(EncodeError::PropositionsPresent(_))
        ));
        assert!(matches!(
            build_encoding(&Formula::not(Formula::globally(Formula::True)), 1, Theory::Int, &opts),
            Err(EncodeError::NotPnf)
        ));
    }

    #[test]
    fn deterministic_output() {
        let phi = to_pnf(&Formula::finally(Formula::prop("q")));
        let (phi, _) = remove_propositions(&phi).unwrap();
        let opts = EncodeOptions::default();
        let a = crate::smt::emit_smtlib(&build_encoding(&phi, 3, Theory::Int, &opts).unwrap().script);
        let b = crate::smt::emit_smtlib(&build_encoding(&phi, 3, Theory::Int, &opts).unwrap().script);
        assert_eq!(a, b);
    }

    #[test]
    fn nat_domain_rows() {
        let phi = Formula::lt(x(0), x(1));
        let ctx = EncodingContext::new(&phi, 2, Theory::Nat).unwrap();
        assert_eq!(encode_domain(&ctx).len(), 2 * 4);
        let ctx = EncodingContext::new(&phi, 2, Theory::Int).unwrap();
        assert!(encode_domain(&ctx).is_empty());
    }

    #[test]
    fn divisibility_rows() {
        let phi = Formula::Atom(Atom::ModEq { t: x(0), c: 2, d: 1 });
        let ctx = EncodingContext::new(&phi, 1, Theory::Int).unwrap();
        let rows = strings(&encode_divisibility(&ctx));
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0], "(= (- (v_x_0 0) 1) (+ (* 2 (q0 0)) (r0 0)))");
        assert!(EncodingContext::new(&phi, 1, Theory::Real).is_err());
    }
}
