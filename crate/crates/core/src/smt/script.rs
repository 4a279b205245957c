//! Abstract SMT scripts and their SMT-LIB 2 serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::sexpr::SExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sort {
    Int,
    Real,
    Bool,
}

impl Sort {
    pub fn name(self) -> &'static str {
        match self {
            Sort::Int => "Int",
            Sort::Real => "Real",
            Sort::Bool => "Bool",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub ret: Sort,
}

/// Constraint family an assertion belongs to; used for counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    Arith,
    Prop,
    Divisibility,
    Temp,
    LoopRange,
    Loop,
    LastState,
    Eventually,
    Initial,
    Domain,
    Local,
    PathClosure,
    Congruence,
    Existence,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::Arith,
        Family::Prop,
        Family::Divisibility,
        Family::Temp,
        Family::LoopRange,
        Family::Loop,
        Family::LastState,
        Family::Eventually,
        Family::Initial,
        Family::Domain,
        Family::Local,
        Family::PathClosure,
        Family::Congruence,
        Family::Existence,
    ];

    /// Families produced by the existence-condition encoding.
    pub fn is_existence(self) -> bool {
        matches!(self, Family::Local | Family::PathClosure | Family::Congruence | Family::Existence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub family: Family,
    pub term: SExpr,
}

#[derive(Debug, Clone, Default)]
pub struct SmtScript {
    pub logic: String,
    pub decls: Vec<FunDecl>,
    pub assertions: Vec<Assertion>,
    /// Ground applications whose values are requested after `sat`.
    pub get_values: Vec<SExpr>,
    pub comments: Vec<String>,
}

impl SmtScript {
    pub fn new(logic: impl Into<String>) -> SmtScript {
        SmtScript { logic: logic.into(), ..Default::default() }
    }

    pub fn declare(&mut self, name: impl Into<String>, args: Vec<Sort>, ret: Sort) {
        self.decls.push(FunDecl { name: name.into(), args, ret });
    }

    pub fn assert(&mut self, family: Family, term: SExpr) {
        self.assertions.push(Assertion { family, term });
    }

    pub fn extend(&mut self, family: Family, terms: impl IntoIterator<Item = SExpr>) {
        for t in terms {
            self.assert(family, t);
        }
    }

    pub fn count(&self, family: Family) -> usize {
        self.assertions.iter().filter(|a| a.family == family).count()
    }

    pub fn counts(&self) -> BTreeMap<Family, usize> {
        let mut out = BTreeMap::new();
        for a in &self.assertions {
            *out.entry(a.family).or_insert(0) += 1;
        }
        out
    }

    pub fn assertions_of(&self, family: Family) -> impl Iterator<Item = &SExpr> {
        self.assertions.iter().filter(move |a| a.family == family).map(|a| &a.term)
    }
}

/// Serialize to SMT-LIB 2; identical scripts give identical bytes.
pub fn emit_smtlib(script: &SmtScript) -> String {
    let mut out = String::new();
    for c in &script.comments {
        let _ = writeln!(out, "; {c}");
    }
    out.push_str("(set-option :produce-models true)\n");
    if !script.logic.is_empty() {
        let _ = writeln!(out, "(set-logic {})", script.logic);
    }
    for d in &script.decls {
        let args: Vec<&str> = d.args.iter().map(|s| s.name()).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) {})", d.name, args.join(" "), d.ret.name());
    }
    for a in &script.assertions {
        let _ = writeln!(out, "(assert {})", a.term);
    }
    out.push_str("(check-sat)\n");
    if !script.get_values.is_empty() {
        out.push_str("(get-value (");
        for (i, v) in script.get_values.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push_str("))\n");
    }
    out.push_str("(exit)\n");
    out
}
