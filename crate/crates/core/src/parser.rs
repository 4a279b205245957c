//! Concrete syntax for problem files and a round-trip printer.
//!
//! ```text
//! theory int;
//! var x, y;
//! option max_k = 5;
//! formula G(x < X(x)) & F(y = 3);
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ParseError;
use crate::formula::{normalize_term, Atom, Base, Formula, RawTerm, Term, Theory, RESERVED_PREFIX};

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub theory: Theory,
    pub vars: Vec<String>,
    pub formula: Formula,
    pub options: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const KEYWORDS: &[&str] = &[
    "theory", "var", "option", "formula", "true", "false", "mod", "X", "Y", "Z", "U", "S", "R",
    "T", "G", "F", "H", "O",
];

const SYMBOLS: &[&str] =
    &["<->", "->", "<=", ">=", "!=", "<", ">", "=", "!", "&", "|", "(", ")", ",", ";", "+", "-"];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(s), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let v = s.parse::<i64>().map_err(|_| ParseError {
                line: l0,
                col: c0,
                message: format!("integer literal `{s}` out of range"),
            })?;
            out.push(Spanned { tok: Tok::Int(v), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Spanned { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => {
                return Err(ParseError {
                    line: l0,
                    col: c0,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    vars: &'a BTreeSet<String>,
    end: (usize, usize),
    /// First modular atom seen, for the theory check.
    first_mod: Option<(usize, usize)>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError { line, col, message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(v)) => format!("`{v}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.err(format!("expected integer, found {}", self.describe())),
        }
    }

    // formula := imp ('<->' imp)*
    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while self.eat_sym("<->") {
            let rhs = self.implication()?;
            lhs = Formula::and(
                Formula::implies(lhs.clone(), rhs.clone()),
                Formula::implies(rhs, lhs),
            );
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat_sym("|") {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.binary_temporal()?;
        while self.eat_sym("&") {
            let rhs = self.binary_temporal()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        for (kw, mk) in [
            ("U", Formula::until as fn(Formula, Formula) -> Formula),
            ("S", Formula::since),
            ("R", Formula::release),
            ("T", Formula::trigger),
        ] {
            if self.is_kw(kw) {
                self.pos += 1;
                let rhs = self.binary_temporal()?;
                return Ok(mk(lhs, rhs));
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if let Some(a) = self.try_atom()? {
            return Ok(a);
        }
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        let ops: [(&str, fn(Formula) -> Formula); 7] = [
            ("X", Formula::next),
            ("Y", Formula::prev),
            ("Z", Formula::weak_prev),
            ("G", Formula::globally),
            ("F", Formula::finally),
            ("H", Formula::historically),
            ("O", Formula::once),
        ];
        for (kw, mk) in ops {
            if self.is_kw(kw) {
                self.pos += 1;
                return Ok(mk(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if self.is_kw("true") {
            self.pos += 1;
            return Ok(Formula::True);
        }
        if self.is_kw("false") {
            self.pos += 1;
            return Ok(Formula::False);
        }
        let at = self.here();
        let name = self.ident()?;
        if self.vars.contains(&name) {
            return Err(ParseError {
                line: at.0,
                col: at.1,
                message: format!("variable `{name}` used as a proposition"),
            });
        }
        if name.starts_with(RESERVED_PREFIX) {
            return Err(ParseError {
                line: at.0,
                col: at.1,
                message: format!("names starting with `{RESERVED_PREFIX}` are reserved"),
            });
        }
        Ok(Formula::Prop(name))
    }

    /// Raw term; `None` when the tokens do not form a term.
    fn raw_term(&mut self) -> Option<(RawTerm, (usize, usize))> {
        let at = self.here();
        match self.peek()?.clone() {
            Tok::Ident(s) if s == "X" || s == "Y" => {
                self.pos += 1;
                let (inner, _) = self.raw_term()?;
                let t = if s == "X" { RawTerm::X(Box::new(inner)) } else { RawTerm::Y(Box::new(inner)) };
                Some((t, at))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Some((RawTerm::Var(s), at))
            }
            Tok::Int(v) => {
                self.pos += 1;
                Some((RawTerm::Const(v), at))
            }
            Tok::Sym("-") => match self.peek_at(1) {
                Some(Tok::Int(v)) => {
                    let v = *v;
                    self.pos += 2;
                    Some((RawTerm::Const(-v), at))
                }
                _ => None,
            },
            Tok::Sym("(") => {
                self.pos += 1;
                let (inner, _) = self.raw_term()?;
                if !self.eat_sym(")") {
                    return None;
                }
                Some((inner, at))
            }
            _ => None,
        }
    }

    fn check_term(&self, raw: &RawTerm, at: (usize, usize)) -> PResult<Term> {
        let t = normalize_term(raw);
        if let Base::Var(v) = &t.base {
            if !self.vars.contains(v) {
                return Err(ParseError {
                    line: at.0,
                    col: at.1,
                    message: format!("undeclared variable `{v}`"),
                });
            }
        }
        Ok(t)
    }

    fn term(&mut self) -> PResult<Term> {
        match self.raw_term() {
            Some((raw, at)) => self.check_term(&raw, at),
            None => self.err(format!("expected term, found {}", self.describe())),
        }
    }

    /// Try `term rel term` or a modular constraint; restores the position on failure.
    fn try_atom(&mut self) -> PResult<Option<Formula>> {
        let save = self.pos;
        let Some((raw, at)) = self.raw_term() else {
            self.pos = save;
            return Ok(None);
        };
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["<", "<=", "=", "!=", ">", ">="].contains(s) => *s,
            Some(Tok::Ident(s)) if s == "mod" => "mod",
            _ => {
                self.pos = save;
                return Ok(None);
            }
        };
        self.pos += 1;
        let lhs = self.check_term(&raw, at)?;
        if op == "mod" {
            self.first_mod.get_or_insert(at);
            let c_at = self.here();
            let c = self.signed_int()?;
            if c < 1 {
                return Err(ParseError {
                    line: c_at.0,
                    col: c_at.1,
                    message: "modulus must be a positive integer".into(),
                });
            }
            self.expect_sym("=")?;
            let rhs = self.term()?;
            if rhs.var_name().is_none() {
                return Ok(Some(Formula::Atom(Atom::ModEq { t: lhs, c, d: rhs.const_value().unwrap() })));
            }
            let signed = self.is_sym("-") && matches!(self.peek_at(1), Some(Tok::Int(_)));
            let d = if self.eat_sym("+") || signed {
                self.signed_int()?
            } else {
                0
            };
            return Ok(Some(Formula::Atom(Atom::ModEqTerm { t1: lhs, t2: rhs, c, d })));
        }
        let rhs = self.term()?;
        let (a, b) = (lhs, rhs);
        let f = match op {
            "<" => Formula::lt(a, b),
            "=" => Formula::eq(a, b),
            "<=" => Formula::or(Formula::lt(a.clone(), b.clone()), Formula::eq(a, b)),
            ">" => Formula::lt(b, a),
            ">=" => Formula::or(Formula::lt(b.clone(), a.clone()), Formula::eq(a, b)),
            "!=" => Formula::not(Formula::eq(a, b)),
            _ => unreachable!(),
        };
        Ok(Some(f))
    }
}

fn collect_vars(toks: &[Spanned]) -> Result<BTreeSet<String>, ParseError> {
    let mut vars = BTreeSet::new();
    let mut at_stmt_start = true;
    let mut i = 0;
    while i < toks.len() {
        match &toks[i].tok {
            Tok::Ident(s) if at_stmt_start && s == "var" => {
                i += 1;
                while i < toks.len() && toks[i].tok != Tok::Sym(";") {
                    if let Tok::Ident(name) = &toks[i].tok {
                        if KEYWORDS.contains(&name.as_str()) {
                            return Err(ParseError {
                                line: toks[i].line,
                                col: toks[i].col,
                                message: format!("`{name}` is a reserved word"),
                            });
                        }
                        if name.starts_with(RESERVED_PREFIX) {
                            return Err(ParseError {
                                line: toks[i].line,
                                col: toks[i].col,
                                message: format!("names starting with `{RESERVED_PREFIX}` are reserved"),
                            });
                        }
                        vars.insert(name.clone());
                    }
                    i += 1;
                }
                at_stmt_start = true;
                i += 1;
            }
            Tok::Sym(";") => {
                at_stmt_start = true;
                i += 1;
            }
            _ => {
                at_stmt_start = false;
                i += 1;
            }
        }
    }
    Ok(vars)
}

fn end_of(text: &str) -> (usize, usize) {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    (line, col)
}

/// Parse a complete problem file.
pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
    let toks = lex(text)?;
    let vars = collect_vars(&toks)?;
    let mut p = Parser { toks: &toks, pos: 0, vars: &vars, end: end_of(text), first_mod: None };
    let mut theory: Option<(Theory, (usize, usize))> = None;
    let mut var_order: Vec<String> = Vec::new();
    let mut formulas = Vec::new();
    let mut options = BTreeMap::new();
    while p.peek().is_some() {
        if p.is_kw("theory") {
            p.pos += 1;
            let at = p.here();
            let name = match p.peek() {
                Some(Tok::Ident(s)) => s.clone(),
                _ => return p.err("expected theory name"),
            };
            p.pos += 1;
            let t = Theory::parse(&name).ok_or_else(|| ParseError {
                line: at.0,
                col: at.1,
                message: format!("unknown theory `{name}` (expected ipc, int, nat, rat or real)"),
            })?;
            theory = Some((t, at));
            p.expect_sym(";")?;
        } else if p.is_kw("var") {
            p.pos += 1;
            loop {
                let v = p.ident()?;
                if !var_order.contains(&v) {
                    var_order.push(v);
                }
                if !p.eat_sym(",") {
                    break;
                }
            }
            p.expect_sym(";")?;
        } else if p.is_kw("option") {
            p.pos += 1;
            let key = p.ident()?;
            p.expect_sym("=")?;
            let value = match p.peek().cloned() {
                Some(Tok::Ident(s)) => {
                    p.pos += 1;
                    s
                }
                Some(Tok::Int(_)) | Some(Tok::Sym("-")) => p.signed_int()?.to_string(),
                _ => return p.err("expected option value"),
            };
            options.insert(key, value);
            p.expect_sym(";")?;
        } else if p.is_kw("formula") {
            p.pos += 1;
            formulas.push(p.formula()?);
            p.expect_sym(";")?;
        } else {
            return p.err(format!(
                "expected `theory`, `var`, `option` or `formula`, found {}",
                p.describe()
            ));
        }
    }
    if formulas.is_empty() {
        let (line, col) = p.end;
        return Err(ParseError { line, col, message: "missing `formula` statement".into() });
    }
    let theory_value = theory.map(|t| t.0).unwrap_or(Theory::Int);
    if let Some(at) = p.first_mod {
        if !theory_value.is_discrete() {
            return Err(ParseError {
                line: at.0,
                col: at.1,
                message: "mod constraint requires discrete theory".into(),
            });
        }
    }
    Ok(ProblemFile { theory: theory_value, vars: var_order, formula: Formula::conj(formulas), options })
}

/// Parse a bare formula; identifiers in `vars` are variables, others propositions.
pub fn parse_formula(text: &str, vars: &BTreeSet<String>) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, vars, end: end_of(text), first_mod: None };
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.err(format!("unexpected {}", p.describe()));
    }
    Ok(f)
}

pub fn render_term(t: &Term) -> String {
    match &t.base {
        Base::Const(c) => c.to_string(),
        Base::Var(v) => {
            let (op, n) = if t.depth >= 0 { ("X", t.depth) } else { ("Y", -t.depth) };
            let mut s = v.clone();
            for _ in 0..n {
                s = format!("{op}({s})");
            }
            s
        }
    }
}

fn render_atom(a: &Atom) -> String {
    match a {
        Atom::Lt(x, y) => format!("{} < {}", render_term(x), render_term(y)),
        Atom::Eq(x, y) => format!("{} = {}", render_term(x), render_term(y)),
        Atom::ModEq { t, c, d } => format!("{} mod {c} = {d}", render_term(t)),
        Atom::ModEqTerm { t1, t2, c, d } => {
            let tail = match d.cmp(&0) {
                std::cmp::Ordering::Equal => String::new(),
                std::cmp::Ordering::Greater => format!(" + {d}"),
                std::cmp::Ordering::Less => format!(" - {}", -d),
            };
            format!("{} mod {c} = {}{tail}", render_term(t1), render_term(t2))
        }
    }
}

fn render_inner(f: &Formula) -> String {
    let bin = |a: &Formula, op: &str, b: &Formula| {
        format!("({} {op} {})", render_inner(a), render_inner(b))
    };
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Prop(p) => p.clone(),
        Formula::Atom(a) => render_atom(a),
        Formula::Not(a) => format!("!({})", render_inner(a)),
        Formula::Next(a) => format!("X({})", render_inner(a)),
        Formula::Prev(a) => format!("Y({})", render_inner(a)),
        Formula::WeakPrev(a) => format!("Z({})", render_inner(a)),
        Formula::And(a, b) => bin(a, "&", b),
        Formula::Or(a, b) => bin(a, "|", b),
        Formula::Until(a, b) => bin(a, "U", b),
        Formula::Since(a, b) => bin(a, "S", b),
        Formula::Release(a, b) => bin(a, "R", b),
        Formula::Trigger(a, b) => bin(a, "T", b),
    }
}

/// Canonical text of a formula; `parse_formula` inverts it.
pub fn render(f: &Formula) -> String {
    let s = render_inner(f);
    let binary = matches!(
        f,
        Formula::And(..)
            | Formula::Or(..)
            | Formula::Until(..)
            | Formula::Since(..)
            | Formula::Release(..)
            | Formula::Trigger(..)
    );
    if binary {
        s[1..s.len() - 1].to_string()
    } else {
        s
    }
}

/// Full problem file text.
pub fn render_problem(p: &ProblemFile) -> String {
    let mut out = format!("theory {};\n", p.theory);
    if !p.vars.is_empty() {
        out.push_str(&format!("var {};\n", p.vars.join(", ")));
    }
    for (k, v) in &p.options {
        out.push_str(&format!("option {k} = {v};\n"));
    }
    out.push_str(&format!("formula {};\n", render(&p.formula)));
    out
}
