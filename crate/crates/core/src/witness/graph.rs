//! Point-graph decision of the forbidden pattern on a concrete lasso.
//!
//! Nodes are points `(subject, position)` for positions in `[lb, k+ub]`.
//! A forward edge joins two points at most `width-1` positions apart, going
//! rightwards, when the first value is `≤` the second; a backward edge when
//! it is `≥`. Strictness is tracked by searching a doubled graph.

use std::cmp::Ordering;
use std::collections::VecDeque;

use super::lasso::SymbolicLasso;
use crate::error::WitnessError;
use crate::existence::Subject;
use crate::formula::{Bounds, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Forward,
    Backward,
}

struct PointGraph<'a, C> {
    subjects: &'a [Subject],
    lo: i64,
    hi: i64,
    span: i64,
    cmp: &'a C,
}

impl<C: Fn(&Subject, i64, &Subject, i64) -> Ordering> PointGraph<'_, C> {
    fn index(&self, s: usize, p: i64) -> usize {
        s * (self.hi - self.lo + 1) as usize + (p - self.lo) as usize
    }

    fn len(&self) -> usize {
        self.subjects.len() * (self.hi - self.lo + 1) as usize
    }

    /// `reach[node]` as (reachable at all, reachable with a strict edge).
    fn reach(&self, dir: Dir, s: usize, p: i64) -> Vec<(bool, bool)> {
        let mut seen = vec![[false; 2]; self.len()];
        let mut queue = VecDeque::new();
        seen[self.index(s, p)][0] = true;
        queue.push_back((s, p, false));
        while let Some((a, pa, strict)) = queue.pop_front() {
            for q in pa..=(pa + self.span).min(self.hi) {
                for b in 0..self.subjects.len() {
                    if b == a && q == pa {
                        continue;
                    }
                    let ord = (self.cmp)(&self.subjects[a], pa, &self.subjects[b], q);
                    let (edge, edge_strict) = match dir {
                        Dir::Forward => (ord != Ordering::Greater, ord == Ordering::Less),
                        Dir::Backward => (ord != Ordering::Less, ord == Ordering::Greater),
                    };
                    if !edge {
                        continue;
                    }
                    let st = strict || edge_strict;
                    let slot = &mut seen[self.index(b, q)][st as usize];
                    if !*slot {
                        *slot = true;
                        queue.push_back((b, q, st));
                    }
                }
            }
        }
        seen.into_iter().map(|[plain, strict]| (plain || strict, strict)).collect()
    }
}

/// True iff the forbidden pattern occurs in some class, i.e. no arithmetic
/// model over a discrete domain extends the lasso.
///
/// `cmp(s, p, t, q)` orders subject `s` at position `p` against `t` at `q`;
/// it is only queried for points at most `width-1` positions apart within
/// `[lb, k+ub]`.
pub fn condition_c<C>(classes: &[Vec<Subject>], bounds: Bounds, k: i64, loop_at: i64, self_pairs: bool, cmp: C) -> bool
where
    C: Fn(&Subject, i64, &Subject, i64) -> Ordering,
{
    let (lb, ub) = (bounds.look_back as i64, bounds.look_ahead as i64);
    let l = loop_at - 1;
    for subjects in classes {
        let g = PointGraph { subjects, lo: lb, hi: k + ub, span: ub - lb, cmp: &cmp };
        let n = subjects.len();
        let fwd: Vec<Vec<Vec<(bool, bool)>>> =
            (0..n).map(|a| (lb..=ub).map(|h| g.reach(Dir::Forward, a, l + h)).collect()).collect();
        let bwd: Vec<Vec<Vec<(bool, bool)>>> =
            (0..n).map(|a| (lb..=ub).map(|h| g.reach(Dir::Backward, a, l + h)).collect()).collect();
        for a in 0..n {
            for b in 0..n {
                if subjects[a].is_const() && subjects[b].is_const() || (a == b && !self_pairs) {
                    continue;
                }
                for h in lb..=ub {
                    let (f_le, f_lt) = fwd[a][(h - lb) as usize][g.index(a, k + h)];
                    if !f_le {
                        continue;
                    }
                    for h2 in lb..=ub {
                        let (b_ge, b_gt) = bwd[b][(h2 - lb) as usize][g.index(b, k + h2)];
                        let paths = (f_le && b_gt) || (f_lt && b_ge);
                        if paths && cmp(&subjects[a], l + h, &subjects[b], l + h2) == Ordering::Less {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

/// Graph decision on an induced symbolic lasso; `Ok(true)` means the
/// pattern holds and the lasso has no arithmetic model.
pub fn check_property_c_graph(
    lasso: &SymbolicLasso,
    classes: &[Vec<Subject>],
    theory: Theory,
    self_pairs: bool,
) -> Result<bool, WitnessError> {
    if !theory.is_discrete() {
        return Err(WitnessError::DenseTheory);
    }
    let cmp = |s: &Subject, p: i64, t: &Subject, q: i64| {
        lasso.compare(s, p, t, q).expect("points of one window with known subjects")
    };
    Ok(condition_c(classes, lasso.bounds, lasso.k as i64, lasso.loop_at as i64, self_pairs, cmp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn var(v: &str) -> Subject {
        Subject::Var(v.into())
    }

    /// Comparator over explicit rows indexed from `lb`.
    fn rows(table: BTreeMap<&'static str, Vec<i64>>, lb: i64) -> impl Fn(&Subject, i64, &Subject, i64) -> Ordering {
        move |s, p, t, q| {
            let v = |s: &Subject, p: i64| match s {
                Subject::Const(c) => *c,
                Subject::Var(n) => table[n.as_str()][(p - lb) as usize],
            };
            v(s, p).cmp(&v(t, q))
        }
    }

    const B: Bounds = Bounds { look_back: 0, look_ahead: 1 };

    #[test]
    fn increasing_alone_has_model() {
        let cmp = rows(BTreeMap::from([("x", vec![0, 1, 2])]), 0);
        assert!(!condition_c(&[vec![var("x")]], B, 1, 1, true, cmp));
    }

    #[test]
    fn increasing_below_stalling_has_no_model() {
        // x strictly increases, y never increases, x < y throughout
        let cmp = rows(BTreeMap::from([("x", vec![0, 1, 2]), ("y", vec![5, 5, 5])]), 0);
        assert!(condition_c(&[vec![var("x"), var("y")]], B, 1, 1, false, cmp));
    }

    #[test]
    fn separate_classes_are_not_compared() {
        let cmp = rows(BTreeMap::from([("x", vec![0, 1, 2]), ("y", vec![5, 5, 5])]), 0);
        assert!(!condition_c(&[vec![var("x")], vec![var("y")]], B, 1, 1, false, cmp));
    }

    #[test]
    fn increasing_below_constant() {
        let cmp = rows(BTreeMap::from([("x", vec![0, 1, 2, 3])]), 0);
        assert!(condition_c(&[vec![var("x"), Subject::Const(7)]], B, 2, 2, false, cmp));
        let cmp = rows(BTreeMap::from([("x", vec![0, 1, 2, 3])]), 0);
        assert!(!condition_c(&[vec![var("x"), Subject::Const(-1)]], B, 2, 2, false, cmp));
    }

    #[test]
    fn self_pair_with_two_shifts() {
        // shift 0 rises strictly while shift 1 never rises and starts above
        let cmp = rows(BTreeMap::from([("x", vec![0, 1, 1])]), 0);
        assert!(condition_c(&[vec![var("x")]], B, 1, 1, true, &cmp));
        assert!(!condition_c(&[vec![var("x")]], B, 1, 1, false, &cmp));
    }

    #[test]
    fn dense_theory_rejected() {
        let lasso = SymbolicLasso {
            k: 1,
            loop_at: 1,
            bounds: B,
            subjects: vec![],
            windows: vec![vec![]; 3],
            atoms: vec![],
            atom_truth: vec![vec![]; 3],
        };
        assert!(matches!(check_property_c_graph(&lasso, &[], Theory::Real, true), Err(WitnessError::DenseTheory)));
    }
}
