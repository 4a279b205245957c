#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cltlb::formula::{Formula, Term, Theory};
use cltlb::parser::ProblemFile;

pub const DOMAIN: [i64; 4] = [0, 1, 2, 3];

pub fn problem(theory: Theory, formula: Formula) -> ProblemFile {
    let vars = formula.variables().into_iter().collect();
    ProblemFile { theory, vars, formula, options: BTreeMap::new() }
}

/// Shape of generated formulae.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub vars: usize,
    /// Largest nesting of temporal operators.
    pub temporal_depth: usize,
    /// Smallest and largest term depth.
    pub term_depths: (i32, i32),
    pub props: usize,
    pub max_const: i64,
}

pub const VARS: [&str; 3] = ["x", "y", "z"];
pub const PROPS: [&str; 2] = ["p", "q"];

fn term(rng: &mut ChaCha8Rng, s: &Shape, vars: &[&str]) -> Term {
    if rng.gen_bool(0.25) {
        Term::constant(rng.gen_range(0..=s.max_const))
    } else {
        let v = vars.choose(rng).expect("non-empty");
        Term::var(*v, rng.gen_range(s.term_depths.0..=s.term_depths.1))
    }
}

fn atom(rng: &mut ChaCha8Rng, s: &Shape, vars: &[&str]) -> Formula {
    if s.props > 0 && rng.gen_bool(0.3) {
        return Formula::prop(PROPS[rng.gen_range(0..s.props)]);
    }
    let a = term(rng, s, vars);
    let mut b = term(rng, s, vars);
    while b == a {
        b = term(rng, s, vars);
    }
    if rng.gen_bool(0.5) {
        Formula::lt(a, b)
    } else {
        Formula::eq(a, b)
    }
}

fn formula(rng: &mut ChaCha8Rng, s: &Shape, vars: &[&str], temporal: usize, size: usize) -> Formula {
    if size == 0 {
        return atom(rng, s, vars);
    }
    let sub = |rng: &mut ChaCha8Rng, t: usize| formula(rng, s, vars, t, size - 1);
    let choice = if temporal == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..13) };
    match choice {
        0 => Formula::not(sub(rng, temporal)),
        1 => Formula::and(sub(rng, temporal), sub(rng, temporal)),
        2 => Formula::or(sub(rng, temporal), sub(rng, temporal)),
        3 => Formula::next(sub(rng, temporal - 1)),
        4 => Formula::globally(sub(rng, temporal - 1)),
        5 => Formula::finally(sub(rng, temporal - 1)),
        6 => Formula::until(sub(rng, temporal - 1), sub(rng, temporal - 1)),
        7 => Formula::release(sub(rng, temporal - 1), sub(rng, temporal - 1)),
        8 => Formula::prev(sub(rng, temporal - 1)),
        9 => Formula::weak_prev(sub(rng, temporal - 1)),
        10 => Formula::since(sub(rng, temporal - 1), sub(rng, temporal - 1)),
        11 => Formula::trigger(sub(rng, temporal - 1), sub(rng, temporal - 1)),
        _ => Formula::once(sub(rng, temporal - 1)),
    }
}

/// `G(0 <= v <= m)` for every variable, at every term depth used.
pub fn confinement(vars: &[&str], depths: (i32, i32), max: i64) -> Formula {
    let mut parts = Vec::new();
    for v in vars {
        for d in depths.0..=depths.1 {
            let t = Term::var(*v, d);
            parts.push(Formula::not(Formula::lt(t.clone(), Term::constant(0))));
            parts.push(Formula::not(Formula::lt(Term::constant(max), t)));
        }
    }
    Formula::globally(Formula::conj(parts))
}

/// Random formula conjoined with range confinement of its variables.
pub fn confined(rng: &mut ChaCha8Rng, s: &Shape) -> Formula {
    let vars = &VARS[..s.vars];
    let size = rng.gen_range(1..=4);
    let body = formula(rng, s, vars, s.temporal_depth, size);
    Formula::and(body, confinement(vars, s.term_depths, s.max_const))
}

/// Random formula without confinement.
pub fn free(rng: &mut ChaCha8Rng, s: &Shape) -> Formula {
    let vars = &VARS[..s.vars];
    let size = rng.gen_range(1..=4);
    formula(rng, s, vars, s.temporal_depth, size)
}
