//! Existence condition for arithmetic models over discrete domains.
//!
//! A point `(s, j, h)` is subject `s` (variable or constant) at shift `h`
//! of window `j`, i.e. at absolute position `j + h`. Local relations
//! `f<`, `f≤`, `b>`, `b≥` compare two points of one window; the path
//! predicates `F<`, `F≤`, `B>`, `B≥` close them transitively along
//! positionally monotone paths. The final assertions forbid a forward path
//! from window `loop-1` to window `k` lying strictly below a backward one.

use std::fmt;

use crate::encoder::{EncodeOptions, EncodingContext, ValuationMode};
use crate::error::EncodeError;
use crate::formula::{partition_variables, ConstantsMode, Formula, Theory, VarPartition};
use crate::smt::{Family, SExpr, SmtScript, Sort};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Var(String),
    Const(i64),
}

impl Subject {
    pub fn is_const(&self) -> bool {
        matches!(self, Subject::Const(_))
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Var(v) => f.write_str(v),
            Subject::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Point `(subject, j, h)`; its absolute position is `j + h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointRef {
    pub subject: Subject,
    pub j: i64,
    pub h: i32,
}

impl PointRef {
    pub fn position(&self) -> i64 {
        self.j + self.h as i64
    }
}

/// Partition actually used by the condition for the given options.
pub fn effective_partition(phi: &Formula, theory: Theory, mode: ValuationMode, consts: ConstantsMode) -> VarPartition {
    let mut p = partition_variables(phi);
    if mode == ValuationMode::Strong {
        p = p.merged();
    }
    if consts == ConstantsMode::Interval && theory.is_discrete() {
        p = p.with_interval_constants();
    }
    if theory == Theory::Nat {
        p = p.with_constant(0);
    }
    p
}

/// Subjects of every class: variables first, then constants, both sorted.
pub fn class_subjects(p: &VarPartition) -> Vec<Vec<Subject>> {
    p.classes
        .iter()
        .zip(&p.consts)
        .map(|(vs, cs)| {
            vs.iter().cloned().map(Subject::Var).chain(cs.iter().copied().map(Subject::Const)).collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Local {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Local {
    const ALL: [Local; 4] = [Local::Lt, Local::Le, Local::Gt, Local::Ge];

    fn tag(self) -> &'static str {
        match self {
            Local::Lt => "lt",
            Local::Le => "le",
            Local::Gt => "gt",
            Local::Ge => "ge",
        }
    }

    /// The non-strict companion used in path recursion.
    fn weak(self) -> Local {
        match self {
            Local::Lt | Local::Le => Local::Le,
            Local::Gt | Local::Ge => Local::Ge,
        }
    }

    fn strict(self) -> Local {
        match self {
            Local::Lt | Local::Le => Local::Lt,
            Local::Gt | Local::Ge => Local::Gt,
        }
    }

    fn is_strict(self) -> bool {
        matches!(self, Local::Lt | Local::Gt)
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Local::Lt => a < b,
            Local::Le => a <= b,
            Local::Gt => a > b,
            Local::Ge => a >= b,
        }
    }

    fn relation(self, a: SExpr, b: SExpr) -> SExpr {
        match self {
            Local::Lt => SExpr::lt(a, b),
            Local::Le => SExpr::le(a, b),
            Local::Gt => SExpr::lt(b, a),
            Local::Ge => SExpr::le(b, a),
        }
    }
}

/// Symbol naming for one class.
pub struct ClassNames {
    pub class: usize,
}

impl ClassNames {
    pub fn local(&self, r: Local, a: usize, b: usize) -> String {
        format!("f{}_c{}_{a}_{b}", r.tag(), self.class)
    }

    pub fn path(&self, r: Local, a: usize, b: usize) -> String {
        format!("F{}_c{}_{a}_{b}", r.tag(), self.class)
    }
}

fn i(v: i64) -> SExpr {
    SExpr::int(v)
}

struct ClassEncoder<'a> {
    ctx: &'a EncodingContext,
    names: ClassNames,
    subjects: &'a [Subject],
    lb: i64,
    ub: i64,
    k: i64,
}

impl ClassEncoder<'_> {
    fn local_app(&self, r: Local, a: usize, b: usize, j: SExpr, h: i64, m: i64) -> SExpr {
        SExpr::app(&self.names.local(r, a, b), vec![j, i(h), i(m)])
    }

    fn path_app(&self, r: Local, a: usize, b: usize, j: SExpr, h: i64, ii: SExpr, m: i64) -> SExpr {
        SExpr::app(&self.names.path(r, a, b), vec![j, i(h), ii, i(m)])
    }

    fn value(&self, s: usize, j: i64, h: i64) -> SExpr {
        match &self.subjects[s] {
            Subject::Const(c) => self.ctx.literal(*c),
            Subject::Var(v) => self.ctx.term_app(v, h as i32, i(j)),
        }
    }

    fn declare(&self, script: &mut SmtScript) {
        let n = self.subjects.len();
        for r in Local::ALL {
            for a in 0..n {
                for b in 0..n {
                    script.declare(self.names.local(r, a, b), vec![Sort::Int; 3], Sort::Bool);
                }
            }
        }
        for r in Local::ALL {
            for a in 0..n {
                for b in 0..n {
                    script.declare(self.names.path(r, a, b), vec![Sort::Int; 4], Sort::Bool);
                }
            }
        }
    }

    fn local_relations(&self) -> Vec<SExpr> {
        let n = self.subjects.len();
        let mut out = Vec::new();
        for r in Local::ALL {
            for a in 0..n {
                for b in 0..n {
                    for j in 0..=self.k {
                        for h in self.lb..=self.ub {
                            for m in self.lb..=self.ub {
                                let me = self.local_app(r, a, b, i(j), h, m);
                                if h > m {
                                    out.push(SExpr::not(me));
                                    continue;
                                }
                                match (&self.subjects[a], &self.subjects[b]) {
                                    (Subject::Const(x), Subject::Const(y)) => {
                                        out.push(if r.holds(*x, *y) { me } else { SExpr::not(me) });
                                    }
                                    _ => {
                                        let rel = r.relation(self.value(a, j, h), self.value(b, j, m));
                                        out.push(SExpr::eq(me, rel));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Recursion, base and forced-false rows for `F`/`B` over keys `j ≤ i`.
    fn path_closure(&self) -> Vec<SExpr> {
        let n = self.subjects.len();
        let width = self.ub - self.lb;
        let mut out = Vec::new();
        for r in Local::ALL {
            for a in 0..n {
                for b in 0..n {
                    for j in 0..=self.k {
                        for ii in j..=self.k {
                            for h in self.lb..=self.ub {
                                for m in self.lb..=self.ub {
                                    let me = self.path_app(r, a, b, i(j), h, i(ii), m);
                                    if j + h > ii + m {
                                        out.push(SExpr::not(me));
                                    } else if j == ii {
                                        out.push(SExpr::eq(me, self.local_app(r, a, b, i(j), h, m)));
                                    } else if h == self.lb && ii + m - (j + h) > width {
                                        out.push(SExpr::eq(me, self.recursion(r, a, b, j, h, ii, m)));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn recursion(&self, r: Local, a: usize, b: usize, j: i64, h: i64, ii: i64, m: i64) -> SExpr {
        let mut alts = Vec::new();
        for z in 0..self.subjects.len() {
            for u in self.lb..=self.ub {
                if z == a && u == h {
                    continue;
                }
                let first_weak = self.local_app(r.weak(), a, z, i(j), h, u);
                let rest_weak = self.path_app(r.weak(), z, b, i(j), u, i(ii), m);
                if r.is_strict() {
                    let first_strict = self.local_app(r.strict(), a, z, i(j), h, u);
                    let rest_strict = self.path_app(r.strict(), z, b, i(j), u, i(ii), m);
                    alts.push(SExpr::and(vec![first_strict, rest_weak]));
                    alts.push(SExpr::and(vec![first_weak, rest_strict]));
                } else {
                    alts.push(SExpr::and(vec![first_weak, rest_weak]));
                }
            }
        }
        SExpr::or(alts)
    }

    /// Shift equivalence of locally equivalent points.
    fn congruence(&self) -> Vec<SExpr> {
        let n = self.subjects.len();
        let (lb, ub, k) = (self.lb, self.ub, self.k);
        let mut out = Vec::new();
        for r in Local::ALL {
            for a in 0..n {
                for b in 0..n {
                    let f = |j: i64, h: i64, ii: i64, m: i64| self.path_app(r, a, b, i(j), h, i(ii), m);
                    for ii in 1..=k {
                        for m in lb..=ub {
                            for h in lb + 1..=ub {
                                for j in 0..ii {
                                    out.push(SExpr::eq(f(j, h, ii, m), f(j + 1, h - 1, ii, m)));
                                }
                            }
                            for h in lb..ub {
                                for j in 1..=ii {
                                    out.push(SExpr::eq(f(j, h, ii, m), f(j - 1, h + 1, ii, m)));
                                }
                            }
                        }
                    }
                    for j in 0..k {
                        for h in lb..=ub {
                            for m in lb + 1..=ub {
                                for ii in j..k {
                                    out.push(SExpr::eq(f(j, h, ii, m), f(j, h, ii + 1, m - 1)));
                                }
                            }
                            for m in lb..ub {
                                for ii in j + 1..=k {
                                    out.push(SExpr::eq(f(j, h, ii, m), f(j, h, ii - 1, m + 1)));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn pairs(&self, self_pairs: bool) -> Vec<(usize, usize)> {
        let n = self.subjects.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let both_const = self.subjects[a].is_const() && self.subjects[b].is_const();
                if both_const || (a == b && !self_pairs) {
                    continue;
                }
                out.push((a, b));
            }
        }
        out
    }

    fn condition(&self, a: usize, b: usize) -> SExpr {
        let l = EncodingContext::loop_minus_one;
        let k = i(self.k);
        let mut alts = Vec::new();
        for h in self.lb..=self.ub {
            for h2 in self.lb..=self.ub {
                let fwd = |r| self.path_app(r, a, a, l(), h, k.clone(), h);
                let bwd = |r| self.path_app(r, b, b, l(), h2, k.clone(), h2);
                let paths = SExpr::or(vec![
                    SExpr::and(vec![fwd(Local::Le), bwd(Local::Gt)]),
                    SExpr::and(vec![fwd(Local::Lt), bwd(Local::Ge)]),
                ]);
                let below = SExpr::or(vec![
                    self.local_app(Local::Lt, a, b, l(), h, h2),
                    self.local_app(Local::Gt, b, a, l(), h2, h),
                ]);
                alts.push(SExpr::and(vec![paths, below]));
            }
        }
        SExpr::or(alts)
    }
}

/// Per-family assertions of the existence condition.
pub struct ExistenceRows {
    pub local: Vec<SExpr>,
    pub path_closure: Vec<SExpr>,
    pub congruence: Vec<SExpr>,
    pub condition: Vec<SExpr>,
}

fn encoders<'a>(ctx: &'a EncodingContext, classes: &'a [Vec<Subject>]) -> Vec<ClassEncoder<'a>> {
    classes
        .iter()
        .enumerate()
        .map(|(c, subjects)| ClassEncoder {
            ctx,
            names: ClassNames { class: c },
            subjects,
            lb: ctx.bounds.look_back as i64,
            ub: ctx.bounds.look_ahead as i64,
            k: ctx.k(),
        })
        .collect()
}

pub fn encode_local_relations(ctx: &EncodingContext, classes: &[Vec<Subject>]) -> Vec<SExpr> {
    encoders(ctx, classes).iter().flat_map(|e| e.local_relations()).collect()
}

/// Recursive definitions, base rows, forced-false rows and congruence rows.
pub fn encode_path_closure(ctx: &EncodingContext, classes: &[Vec<Subject>]) -> (Vec<SExpr>, Vec<SExpr>) {
    let es = encoders(ctx, classes);
    let defs = es.iter().flat_map(|e| e.path_closure()).collect();
    let cong = es.iter().flat_map(|e| e.congruence()).collect();
    (defs, cong)
}

/// `¬C` for every admissible ordered pair of each class.
pub fn encode_existence_condition(ctx: &EncodingContext, classes: &[Vec<Subject>], self_pairs: bool) -> Vec<SExpr> {
    let mut out = Vec::new();
    for e in encoders(ctx, classes) {
        for (a, b) in e.pairs(self_pairs) {
            out.push(SExpr::not(e.condition(a, b)));
        }
    }
    out
}

pub fn existence_rows(ctx: &EncodingContext, phi: &Formula, opts: &EncodeOptions) -> ExistenceRows {
    let partition = effective_partition(phi, ctx.theory, opts.mode, opts.consts);
    let classes = class_subjects(&partition);
    let (path_closure, congruence) = encode_path_closure(ctx, &classes);
    ExistenceRows {
        local: encode_local_relations(ctx, &classes),
        path_closure,
        congruence,
        condition: encode_existence_condition(ctx, &classes, opts.self_pairs),
    }
}

/// Declarations and assertions of the whole condition, appended to `script`.
pub fn encode_all(
    ctx: &EncodingContext,
    phi: &Formula,
    opts: &EncodeOptions,
    script: &mut SmtScript,
) -> Result<(), EncodeError> {
    if !ctx.theory.is_discrete() {
        return Ok(());
    }
    let partition = effective_partition(phi, ctx.theory, opts.mode, opts.consts);
    let classes = class_subjects(&partition);
    for e in encoders(ctx, &classes) {
        e.declare(script);
    }
    let rows = existence_rows(ctx, phi, opts);
    script.extend(Family::Local, rows.local);
    script.extend(Family::PathClosure, rows.path_closure);
    script.extend(Family::Congruence, rows.congruence);
    script.extend(Family::Existence, rows.condition);
    Ok(())
}
