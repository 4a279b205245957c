//! Direct lasso evaluation of formulae over concrete valuations.
//!
//! Positions `0..=k` form the lasso prefix; position `k+1` is the copy of
//! `loop` reached after the last step. Past operators are computed forward,
//! `U` and `R` as least and greatest fixpoints on the loop.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Signed;

use super::Witness;
use crate::existence::Subject;
use crate::parser::render;
use crate::formula::{bounds, sub_table, Atom, Base, Bounds, Formula, Node, SubTable, Term, Theory};

/// Truth of a relation given a term valuation; modular atoms need integers.
pub fn eval_atom(a: &Atom, val: impl Fn(&Term) -> Rational64) -> bool {
    let congruent = |v: Rational64, c: i64| v.is_integer() && v.to_integer().mod_floor(&c) == 0;
    match a {
        Atom::Lt(x, y) => val(x) < val(y),
        Atom::Eq(x, y) => val(x) == val(y),
        Atom::ModEq { t, c, d } => congruent(val(t) - Rational64::from_integer(*d), *c),
        Atom::ModEqTerm { t1, t2, c, d } => congruent(val(t1) - val(t2) - Rational64::from_integer(*d), *c),
    }
}

/// Truth table `[node][position]` for positions `0..=k+1`.
///
/// `leaf(n, i)` supplies propositions and atoms. Future operators at `k+1`
/// copy their value at `loop`; past operators are evaluated forward.
pub fn eval_table(subs: &SubTable, k: usize, loop_at: usize, mut leaf: impl FnMut(usize, usize) -> bool) -> Vec<Vec<bool>> {
    let n = k + 2;
    let mut t: Vec<Vec<bool>> = Vec::with_capacity(subs.len());
    for (idx, node) in subs.nodes.iter().enumerate() {
        let mut row = vec![false; n];
        match *node {
            Node::True => row.fill(true),
            Node::False => {}
            Node::Prop(_) | Node::Atom(_) => {
                for (i, r) in row.iter_mut().enumerate() {
                    *r = leaf(idx, i);
                }
            }
            Node::Not(c) => {
                for i in 0..n {
                    row[i] = !t[c][i];
                }
            }
            Node::And(a, b) => {
                for i in 0..n {
                    row[i] = t[a][i] && t[b][i];
                }
            }
            Node::Or(a, b) => {
                for i in 0..n {
                    row[i] = t[a][i] || t[b][i];
                }
            }
            Node::Next(c) => {
                row[..=k].copy_from_slice(&t[c][1..=k + 1]);
                row[k + 1] = row[loop_at];
            }
            Node::Prev(c) | Node::WeakPrev(c) => {
                row[0] = matches!(node, Node::WeakPrev(_));
                row[1..n].copy_from_slice(&t[c][..n - 1]);
            }
            Node::Since(a, b) => {
                row[0] = t[b][0];
                for i in 1..n {
                    row[i] = t[b][i] || (t[a][i] && row[i - 1]);
                }
            }
            Node::Trigger(a, b) => {
                row[0] = t[b][0];
                for i in 1..n {
                    row[i] = t[b][i] && (t[a][i] || row[i - 1]);
                }
            }
            Node::Until(a, b) | Node::Release(a, b) => {
                let until = matches!(node, Node::Until(..));
                row.fill(!until);
                loop {
                    let mut changed = false;
                    for i in (0..=k).rev() {
                        let next = if i == k { row[loop_at] } else { row[i + 1] };
                        let v = if until {
                            t[b][i] || (t[a][i] && next)
                        } else {
                            t[b][i] && (t[a][i] || next)
                        };
                        if v != row[i] {
                            row[i] = v;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                row[k + 1] = row[loop_at];
            }
        }
        t.push(row);
    }
    t
}

/// Lasso acceptance of an evaluated table: leaf periodicity, the copy at
/// `k+1` agreeing with `loop` for every node, and the root true at 0.
pub fn table_accepts(subs: &SubTable, table: &[Vec<bool>], k: usize, loop_at: usize) -> Result<(), String> {
    for (n, node) in subs.nodes.iter().enumerate() {
        if matches!(node, Node::Atom(_) | Node::Prop(_)) && table[n][loop_at - 1] != table[n][k] {
            return Err(format!("leaf `{}` differs between positions {} and {k}", render(&subs.formulas[n]), loop_at - 1));
        }
    }
    for (n, row) in table.iter().enumerate() {
        if row[k + 1] != row[loop_at] {
            return Err(format!("subformula #{n} differs between positions {} and {loop_at}", k + 1));
        }
    }
    if !table[subs.root()][0] {
        return Err("formula is false at position 0".to_string());
    }
    Ok(())
}

fn term_value(w: &Witness, t: &Term, pos: i64) -> Option<Rational64> {
    match &t.base {
        Base::Const(c) => Some(Rational64::from_integer(*c)),
        Base::Var(v) => w.value(v, pos + t.depth as i64),
    }
}

/// Full check of `w` against `phi`; returns the truth table on success.
pub fn check_lasso(phi: &Formula, w: &Witness, theory: Theory) -> Result<Vec<Vec<bool>>, String> {
    let k = w.k as usize;
    let loop_at = w.loop_at as usize;
    if w.k < 1 || loop_at < 1 || loop_at > k {
        return Err(format!("loop {loop_at} outside [1, {k}]"));
    }
    let b = bounds(phi);
    let lo = b.look_back as i64;
    let hi = k as i64 + 1 + b.look_ahead as i64;
    for v in phi.variables() {
        for p in lo..=hi {
            let Some(x) = w.value(&v, p) else {
                return Err(format!("no value for `{v}` at position {p}"));
            };
            if theory.is_discrete() && !x.is_integer() {
                return Err(format!("`{v}` at position {p} is {x}, not an integer"));
            }
            if theory == Theory::Nat && x.is_negative() {
                return Err(format!("`{v}` at position {p} is negative"));
            }
        }
    }
    let props = phi.props();
    if !props.is_empty() && w.props.len() < k + 1 {
        return Err(format!("propositions given for {} positions, need {}", w.props.len(), k + 1));
    }
    let subs = sub_table(phi);
    let table = eval_table(&subs, k, loop_at, |n, i| match &subs.nodes[n] {
        Node::Atom(a) => eval_atom(a, |t| term_value(w, t, i as i64).expect("checked above")),
        Node::Prop(p) => {
            let at = if i == k + 1 { loop_at } else { i };
            w.props[at].contains(p)
        }
        _ => unreachable!(),
    });
    if w.truth.len() == subs.len() {
        for (n, node) in subs.nodes.iter().enumerate() {
            if matches!(node, Node::Atom(_)) && w.truth[n] != table[n] {
                return Err(format!("claimed truth of `{}` disagrees with the valuation", render(&subs.formulas[n])));
            }
        }
    }
    table_accepts(&subs, &table, k, loop_at)?;
    Ok(table)
}

/// True iff `w` is an accepting lasso of `phi` under `theory`.
pub fn verify_lasso(phi: &Formula, w: &Witness, theory: Theory) -> bool {
    check_lasso(phi, w, theory).is_ok()
}

/// Symbolic valuations induced by a witness: for each window `j` in
/// `0..=k+1`, the pairwise order of all points `(subject, j + h)`, plus the
/// truth of every atom at `j`.
#[derive(Debug, Clone)]
pub struct SymbolicLasso {
    pub k: u32,
    pub loop_at: u32,
    pub bounds: Bounds,
    pub subjects: Vec<Subject>,
    /// `windows[j][a * n + b]` compares points `a` and `b`, where point
    /// `s * width + (h - lb)` is subject `s` at shift `h`.
    pub windows: Vec<Vec<Ordering>>,
    pub atoms: Vec<Atom>,
    /// `atom_truth[j][n]` for atom `atoms[n]`.
    pub atom_truth: Vec<Vec<bool>>,
}

impl SymbolicLasso {
    fn point(&self, s: usize, h: i64) -> usize {
        s * self.bounds.width() as usize + (h - self.bounds.look_back as i64) as usize
    }

    fn points(&self) -> usize {
        self.subjects.len() * self.bounds.width() as usize
    }

    /// Order between two points lying in a common window.
    pub fn compare(&self, s: &Subject, p: i64, t: &Subject, q: i64) -> Option<Ordering> {
        let si = self.subjects.iter().position(|x| x == s)?;
        let ti = self.subjects.iter().position(|x| x == t)?;
        let (lb, ub) = (self.bounds.look_back as i64, self.bounds.look_ahead as i64);
        let j = (p.max(q) - ub).max(0);
        if j > self.k as i64 + 1 || p.min(q) - j < lb {
            return None;
        }
        let n = self.points();
        Some(self.windows[j as usize][self.point(si, p - j) * n + self.point(ti, q - j)])
    }

    /// The periodicity the encoding enforces: equal atoms at `loop-1` and `k`.
    pub fn periodic_on_atoms(&self) -> bool {
        self.atom_truth[self.loop_at as usize - 1] == self.atom_truth[self.k as usize]
    }

    /// Equality of the full order types at `loop-1` and `k`.
    pub fn periodic_full(&self) -> bool {
        self.windows[self.loop_at as usize - 1] == self.windows[self.k as usize]
    }

    /// Constraints of window `j` as text, e.g. `x < X x`.
    pub fn valuation(&self, j: usize) -> BTreeSet<String> {
        let name = |s: &Subject, h: i64| match s {
            Subject::Const(c) => c.to_string(),
            Subject::Var(v) => match h.cmp(&0) {
                Ordering::Equal => v.clone(),
                Ordering::Greater => format!("{}{v}", "X ".repeat(h as usize)),
                Ordering::Less => format!("{}{v}", "Y ".repeat((-h) as usize)),
            },
        };
        let mut out = BTreeSet::new();
        let n = self.points();
        let w = self.bounds.width() as usize;
        let lb = self.bounds.look_back as i64;
        for a in 0..n {
            for b in a + 1..n {
                let (sa, ha) = (&self.subjects[a / w], lb + (a % w) as i64);
                let (sb, hb) = (&self.subjects[b / w], lb + (b % w) as i64);
                if sa.is_const() && sb.is_const() {
                    continue;
                }
                let (l, r) = (name(sa, ha), name(sb, hb));
                out.insert(match self.windows[j][a * n + b] {
                    Ordering::Less => format!("{l} < {r}"),
                    Ordering::Equal => format!("{l} = {r}"),
                    Ordering::Greater => format!("{r} < {l}"),
                });
            }
        }
        out
    }
}

/// Induced symbolic model of `w` over the variables of `phi` and `consts`.
pub fn induced_symbolic_model(w: &Witness, phi: &Formula, consts: &BTreeSet<i64>) -> SymbolicLasso {
    let b = bounds(phi);
    let subjects: Vec<Subject> = phi
        .variables()
        .into_iter()
        .map(Subject::Var)
        .chain(consts.iter().copied().map(Subject::Const))
        .collect();
    let width = b.width() as usize;
    let n = subjects.len() * width;
    let value = |s: &Subject, p: i64| match s {
        Subject::Const(c) => Rational64::from_integer(*c),
        Subject::Var(v) => w.value(v, p).unwrap_or_default(),
    };
    let atoms: Vec<Atom> = {
        let subs = sub_table(phi);
        subs.nodes
            .into_iter()
            .filter_map(|nd| match nd {
                Node::Atom(a) => Some(a),
                _ => None,
            })
            .collect()
    };
    let mut windows = Vec::new();
    let mut atom_truth = Vec::new();
    for j in 0..=w.k as i64 + 1 {
        let mut m = vec![Ordering::Equal; n * n];
        for a in 0..n {
            for c in 0..n {
                let pa = j + b.look_back as i64 + (a % width) as i64;
                let pc = j + b.look_back as i64 + (c % width) as i64;
                m[a * n + c] = value(&subjects[a / width], pa).cmp(&value(&subjects[c / width], pc));
            }
        }
        windows.push(m);
        atom_truth.push(
            atoms
                .iter()
                .map(|a| eval_atom(a, |t| term_value(w, t, j).unwrap_or_default()))
                .collect(),
        );
    }
    SymbolicLasso { k: w.k, loop_at: w.loop_at, bounds: b, subjects, windows, atoms, atom_truth }
}
