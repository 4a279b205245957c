//! Positive normal form, proposition removal and past-term elimination.

use std::collections::BTreeMap;

use crate::error::RewriteError;
use crate::formula::{bounds, Atom, Formula, Term, RESERVED_PREFIX};

/// Push negations down to propositions and atoms using the dual operators.
pub fn to_pnf(phi: &Formula) -> Formula {
    pos(phi)
}

fn pos(f: &Formula) -> Formula {
    let b = |x: &Formula| Box::new(pos(x));
    match f {
        Formula::True | Formula::False | Formula::Prop(_) | Formula::Atom(_) => f.clone(),
        Formula::Not(inner) => neg(inner),
        Formula::And(x, y) => Formula::And(b(x), b(y)),
        Formula::Or(x, y) => Formula::Or(b(x), b(y)),
        Formula::Next(x) => Formula::Next(b(x)),
        Formula::Prev(x) => Formula::Prev(b(x)),
        Formula::WeakPrev(x) => Formula::WeakPrev(b(x)),
        Formula::Until(x, y) => Formula::Until(b(x), b(y)),
        Formula::Since(x, y) => Formula::Since(b(x), b(y)),
        Formula::Release(x, y) => Formula::Release(b(x), b(y)),
        Formula::Trigger(x, y) => Formula::Trigger(b(x), b(y)),
    }
}

fn neg(f: &Formula) -> Formula {
    let n = |x: &Formula| Box::new(neg(x));
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Prop(_) | Formula::Atom(_) => Formula::Not(Box::new(f.clone())),
        Formula::Not(inner) => pos(inner),
        Formula::And(x, y) => Formula::Or(n(x), n(y)),
        Formula::Or(x, y) => Formula::And(n(x), n(y)),
        Formula::Next(x) => Formula::Next(n(x)),
        Formula::Prev(x) => Formula::WeakPrev(n(x)),
        Formula::WeakPrev(x) => Formula::Prev(n(x)),
        Formula::Until(x, y) => Formula::Release(n(x), n(y)),
        Formula::Release(x, y) => Formula::Until(n(x), n(y)),
        Formula::Since(x, y) => Formula::Trigger(n(x), n(y)),
        Formula::Trigger(x, y) => Formula::Since(n(x), n(y)),
    }
}

/// Name of the integer variable standing for proposition `p`.
pub fn prop_var(p: &str) -> String {
    format!("{RESERVED_PREFIX}{p}")
}

/// Replace each proposition `p` by `x_p = 1` and conjoin the 0/1 guard.
///
/// The returned map sends each proposition to its fresh variable.
pub fn remove_propositions(
    phi: &Formula,
) -> Result<(Formula, BTreeMap<String, String>), RewriteError> {
    let props = phi.props();
    if props.is_empty() {
        return Ok((phi.clone(), BTreeMap::new()));
    }
    let vars = phi.variables();
    let mut map = BTreeMap::new();
    for p in &props {
        let v = prop_var(p);
        if vars.contains(&v) {
            return Err(RewriteError::FreshNameCollision(v));
        }
        map.insert(p.clone(), v);
    }
    let one = |v: &str| Formula::eq(Term::var(v, 0), Term::constant(1));
    let zero = |v: &str| Formula::eq(Term::var(v, 0), Term::constant(0));
    let body = phi.map_props(&|p| one(&map[p]));
    let guard = Formula::globally(Formula::conj(
        map.values().map(|v| Formula::or(one(v), zero(v))),
    ));
    Ok((Formula::and(body, guard), map))
}

/// Shift every term right by `-lookBack` so that no past terms remain.
///
/// Returns the shifted formula and the offset `lookBack` (non-positive).
pub fn shift_left(phi: &Formula) -> (Formula, i32) {
    let lb = bounds(phi).look_back;
    if lb == 0 {
        return (phi.clone(), 0);
    }
    let shifted = phi.map_atoms(&|a: &Atom| Formula::Atom(a.map_terms(&|t| t.shifted(-lb))));
    (shifted, lb)
}
