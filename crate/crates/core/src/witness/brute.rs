//! Exhaustive k-satisfiability over a finite value domain.
//!
//! Columns `lb..=k+1+ub` are filled one at a time; the atom mask of
//! position `i` is known once column `i+ub` is placed. Leaves are checked
//! for every loop whose masks repeat, formula evaluation is cached per mask
//! sequence, and the graph check runs only on accepted leaves.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use num_integer::Integer;
use num_rational::Rational64;

use super::graph::condition_c;
use super::lasso::{eval_table, table_accepts};
use super::Witness;
use crate::encoder::ValuationMode;
use crate::error::WitnessError;
use crate::existence::{class_subjects, effective_partition, Subject};
use crate::formula::{bounds, sub_table, Atom, Base, ConstantsMode, Formula, Node, SubTable, Term, Theory};

pub const MAX_K: u32 = 4;
pub const DEFAULT_CAP: u128 = 1 << 28;

#[derive(Debug, Clone, Copy)]
pub struct BruteOptions {
    pub mode: ValuationMode,
    pub consts: ConstantsMode,
    pub self_pairs: bool,
    /// Largest number of candidate valuations explored.
    pub cap: u128,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions { mode: ValuationMode::Weak, consts: ConstantsMode::Occurring, self_pairs: true, cap: DEFAULT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BruteOutcome {
    Sat(Witness),
    Unsat,
}

impl BruteOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, BruteOutcome::Sat(_))
    }
}

#[derive(Debug, Clone, Copy)]
enum Operand {
    Const(i64),
    /// Variable index and column offset relative to the evaluated position.
    Var(usize, i64),
}

#[derive(Debug, Clone, Copy)]
enum CompiledAtom {
    Lt(Operand, Operand),
    Eq(Operand, Operand),
    Mod(Operand, Option<Operand>, i64, i64),
}

struct Search<'a> {
    phi_subs: &'a SubTable,
    atoms: Vec<CompiledAtom>,
    atom_bit: Vec<Option<usize>>,
    domain: Vec<i64>,
    nv: usize,
    k: usize,
    lb: i64,
    ub: i64,
    cols: usize,
    /// `vals[v][c]`, column `c` being position `lb + c`.
    vals: Vec<Vec<i64>>,
    masks: [u64; (MAX_K + 2) as usize],
    cache: HashMap<([u64; (MAX_K + 2) as usize], usize), Option<Vec<Vec<bool>>>>,
    classes: Vec<Vec<Subject>>,
    var_index: HashMap<String, usize>,
    discrete: bool,
    self_pairs: bool,
    found: Option<Witness>,
}

impl Search<'_> {
    fn operand(&self, o: Operand, col: usize) -> i64 {
        match o {
            Operand::Const(c) => c,
            Operand::Var(v, off) => self.vals[v][(col as i64 + off) as usize],
        }
    }

    fn mask_at(&self, pos: usize) -> u64 {
        let col = (pos as i64 - self.lb) as usize;
        let mut m = 0u64;
        for (b, a) in self.atoms.iter().enumerate() {
            let t = match *a {
                CompiledAtom::Lt(x, y) => self.operand(x, col) < self.operand(y, col),
                CompiledAtom::Eq(x, y) => self.operand(x, col) == self.operand(y, col),
                CompiledAtom::Mod(x, y, c, d) => {
                    let diff = self.operand(x, col) - y.map_or(0, |y| self.operand(y, col)) - d;
                    diff.mod_floor(&c) == 0
                }
            };
            m |= (t as u64) << b;
        }
        m
    }

    fn run(&mut self, col: usize) {
        if self.found.is_some() {
            return;
        }
        if col == self.cols {
            self.leaf();
            return;
        }
        let d = self.domain.len();
        let combos = d.pow(self.nv as u32);
        for code in 0..combos {
            let mut c = code;
            for v in 0..self.nv {
                self.vals[v][col] = self.domain[c % d];
                c /= d;
            }
            let pos = col as i64 + self.lb - self.ub;
            if (0..=self.k as i64 + 1).contains(&pos) {
                let pos = pos as usize;
                self.masks[pos] = self.mask_at(pos);
                if pos == self.k && !(1..=self.k).any(|l| self.masks[l - 1] == self.masks[self.k]) {
                    continue;
                }
                if pos == self.k + 1 && !(1..=self.k).any(|l| self.masks[l] == self.masks[self.k + 1]) {
                    continue;
                }
            }
            self.run(col + 1);
            if self.found.is_some() {
                return;
            }
        }
    }

    fn leaf(&mut self) {
        let k = self.k;
        for l in 1..=k {
            if self.masks[l - 1] != self.masks[k] || self.masks[k + 1] != self.masks[l] {
                continue;
            }
            let key = (self.masks, l);
            if !self.cache.contains_key(&key) {
                let masks = self.masks;
                let bits = &self.atom_bit;
                let table = eval_table(self.phi_subs, k, l, |n, i| masks[i] >> bits[n].expect("atom node") & 1 == 1);
                let ok = table_accepts(self.phi_subs, &table, k, l).is_ok();
                self.cache.insert(key, ok.then_some(table));
            }
            if self.cache[&key].is_none() || (self.discrete && self.condition_holds(l)) {
                continue;
            }
            {
                let table = self.cache[&key].clone().expect("accepted");
                let mut w = Witness::new(
                    k as u32,
                    l as u32,
                    self.lb,
                    self.var_index
                        .iter()
                        .map(|(v, &i)| (v.clone(), self.vals[i].iter().map(|&x| Rational64::from_integer(x)).collect()))
                        .collect(),
                );
                w.truth = table;
                w.props = vec![BTreeSet::new(); k + 1];
                w.verified = true;
                w.condition_c = self.discrete.then_some(false);
                self.found = Some(w);
                return;
            }
        }
    }

    fn condition_holds(&self, loop_at: usize) -> bool {
        let value = |s: &Subject, p: i64| match s {
            Subject::Const(c) => *c,
            Subject::Var(v) => self.vals[self.var_index[v]][(p - self.lb) as usize],
        };
        let cmp = |s: &Subject, p: i64, t: &Subject, q: i64| -> Ordering { value(s, p).cmp(&value(t, q)) };
        let b = crate::formula::Bounds { look_back: self.lb as i32, look_ahead: self.ub as i32 };
        condition_c(&self.classes, b, self.k as i64, loop_at as i64, self.self_pairs, cmp)
    }
}

/// Column of position `i` is `i - lb`, so a term of depth `d` sits `d`
/// columns to the right of the evaluated position.
fn compile(a: &Atom, var_index: &HashMap<String, usize>) -> CompiledAtom {
    let op = |t: &Term| match &t.base {
        Base::Const(c) => Operand::Const(*c),
        Base::Var(v) => Operand::Var(var_index[v], t.depth as i64),
    };
    match a {
        Atom::Lt(x, y) => CompiledAtom::Lt(op(x), op(y)),
        Atom::Eq(x, y) => CompiledAtom::Eq(op(x), op(y)),
        Atom::ModEq { t, c, d } => CompiledAtom::Mod(op(t), None, *c, *d),
        Atom::ModEqTerm { t1, t2, c, d } => CompiledAtom::Mod(op(t1), Some(op(t2)), *c, *d),
    }
}

/// Search every valuation over `domain` on the rectangle and every loop.
///
/// `phi` must be proposition-free and should confine its variables to
/// `domain` so that the symbolic pipeline answers the same question.
pub fn brute_force_ksat(
    phi: &Formula,
    k: u32,
    domain: &[i64],
    theory: Theory,
    opts: &BruteOptions,
) -> Result<BruteOutcome, WitnessError> {
    if !phi.props().is_empty() {
        return Err(WitnessError::Unsupported("propositions must be removed first".into()));
    }
    if !(1..=MAX_K).contains(&k) {
        return Err(WitnessError::Unsupported(format!("k = {k} outside [1, {MAX_K}]")));
    }
    let subs = sub_table(phi);
    let atom_nodes: Vec<usize> = (0..subs.len()).filter(|&n| matches!(subs.nodes[n], Node::Atom(_))).collect();
    if atom_nodes.len() > 64 {
        return Err(WitnessError::Unsupported(format!("{} atoms, at most 64", atom_nodes.len())));
    }
    let mut domain: Vec<i64> = domain.to_vec();
    domain.sort_unstable();
    domain.dedup();
    if theory == Theory::Nat {
        domain.retain(|&v| v >= 0);
    }
    let vars: Vec<String> = phi.variables().into_iter().collect();
    let var_index: HashMap<String, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let b = bounds(phi);
    let (lb, ub) = (b.look_back as i64, b.look_ahead as i64);
    let cols = (k as i64 + 2 + ub - lb) as usize;
    let cells = (vars.len() * cols) as u32;
    let space = (domain.len() as u128).checked_pow(cells).unwrap_or(u128::MAX);
    if space > opts.cap {
        return Err(WitnessError::SearchSpaceExceeded(space));
    }
    if domain.is_empty() && !vars.is_empty() {
        return Ok(BruteOutcome::Unsat);
    }
    let mut atom_bit = vec![None; subs.len()];
    let mut atoms = Vec::new();
    for (bit, &n) in atom_nodes.iter().enumerate() {
        atom_bit[n] = Some(bit);
        if let Node::Atom(a) = &subs.nodes[n] {
            atoms.push(compile(a, &var_index));
        }
    }
    let classes = if theory.is_discrete() {
        class_subjects(&effective_partition(phi, theory, opts.mode, opts.consts))
    } else {
        Vec::new()
    };
    let mut s = Search {
        phi_subs: &subs,
        atoms,
        atom_bit,
        domain,
        nv: vars.len(),
        k: k as usize,
        lb,
        ub,
        cols,
        vals: vec![vec![0; cols]; vars.len()],
        masks: [0; (MAX_K + 2) as usize],
        cache: HashMap::new(),
        classes,
        var_index,
        discrete: theory.is_discrete(),
        self_pairs: opts.self_pairs,
        found: None,
    };
    if s.nv == 0 {
        for pos in 0..=k as usize + 1 {
            s.masks[pos] = s.mask_at(pos);
        }
        s.leaf();
    } else {
        s.run(0);
    }
    Ok(match s.found {
        Some(w) => BruteOutcome::Sat(w),
        None => BruteOutcome::Unsat,
    })
}
