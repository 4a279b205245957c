//! Minimal s-expressions for emitting scripts and reading solver replies.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn sym(s: impl Into<String>) -> SExpr {
        SExpr::Atom(s.into())
    }

    pub fn list(items: Vec<SExpr>) -> SExpr {
        SExpr::List(items)
    }

    pub fn app(f: &str, args: Vec<SExpr>) -> SExpr {
        let mut v = Vec::with_capacity(args.len() + 1);
        v.push(SExpr::sym(f));
        v.extend(args);
        SExpr::List(v)
    }

    /// Integer literal; negatives use the `(- n)` form.
    pub fn int(v: i64) -> SExpr {
        if v < 0 {
            SExpr::app("-", vec![SExpr::sym(v.unsigned_abs().to_string())])
        } else {
            SExpr::sym(v.to_string())
        }
    }

    /// Real literal in decimal form.
    pub fn real(v: i64) -> SExpr {
        if v < 0 {
            SExpr::app("-", vec![SExpr::sym(format!("{}.0", v.unsigned_abs()))])
        } else {
            SExpr::sym(format!("{v}.0"))
        }
    }

    pub fn bool(b: bool) -> SExpr {
        SExpr::sym(if b { "true" } else { "false" })
    }

    pub fn not(a: SExpr) -> SExpr {
        SExpr::app("not", vec![a])
    }

    pub fn and(items: Vec<SExpr>) -> SExpr {
        match items.len() {
            0 => SExpr::bool(true),
            1 => items.into_iter().next().unwrap(),
            _ => SExpr::app("and", items),
        }
    }

    pub fn or(items: Vec<SExpr>) -> SExpr {
        match items.len() {
            0 => SExpr::bool(false),
            1 => items.into_iter().next().unwrap(),
            _ => SExpr::app("or", items),
        }
    }

    pub fn eq(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("=", vec![a, b])
    }

    pub fn implies(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("=>", vec![a, b])
    }

    pub fn lt(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("<", vec![a, b])
    }

    pub fn le(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("<=", vec![a, b])
    }

    pub fn sub(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("-", vec![a, b])
    }

    pub fn add(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("+", vec![a, b])
    }

    pub fn mul(a: SExpr, b: SExpr) -> SExpr {
        SExpr::app("*", vec![a, b])
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(v) => Some(v),
            SExpr::Atom(_) => None,
        }
    }

    /// Every atom occurring in the expression.
    pub fn atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SExpr::Atom(s) => out.push(s),
            SExpr::List(v) => v.iter().for_each(|e| e.atoms(out)),
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            SExpr::Atom(s) => out.push_str(s),
            SExpr::List(v) => {
                out.push('(');
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    e.write(out);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

/// Parse a sequence of s-expressions. String literals are kept verbatim
/// (with quotes) as atoms; `;` comments are skipped.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                if stack.len() < 2 {
                    return Err("unbalanced `)`".into());
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(SExpr::List(done));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    if chars[i] == '"' {
                        if chars.get(i + 1) == Some(&'"') {
                            i += 2;
                            continue;
                        }
                        break;
                    }
                    i += 1;
                }
                if i >= chars.len() {
                    return Err("unterminated string literal".into());
                }
                i += 1;
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..i].iter().collect()));
            }
            '|' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err("unterminated quoted symbol".into());
                }
                i += 1;
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..i].iter().collect()));
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len()
                    && !chars[i].is_whitespace()
                    && !matches!(chars[i], '(' | ')' | ';' | '"')
                {
                    i += 1;
                }
                stack.last_mut().unwrap().push(SExpr::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

fn parse_decimal(s: &str) -> Option<Rational64> {
    if let Some((ip, fp)) = s.split_once('.') {
        if ip.is_empty() || !ip.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{ip}{fp}");
        let num: i64 = digits.parse().ok()?;
        let den = 10i64.checked_pow(fp.len() as u32)?;
        Some(Rational64::new(num, den))
    } else if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) {
        Some(Rational64::from_integer(s.parse().ok()?))
    } else {
        None
    }
}

/// Read a numeric model value: `5`, `(- 5)`, `2.5`, `(/ 1 2)`, `(- (/ 1.0 2.0))`.
pub fn parse_number(e: &SExpr) -> Option<Rational64> {
    match e {
        SExpr::Atom(s) => parse_decimal(s),
        SExpr::List(v) => match v.as_slice() {
            [SExpr::Atom(op), a] if op == "-" => parse_number(a).map(|x| -x),
            [SExpr::Atom(op), a, b] if op == "/" => {
                let (a, b) = (parse_number(a)?, parse_number(b)?);
                if b.is_zero() {
                    None
                } else {
                    Some(a / b)
                }
            }
            _ => None,
        },
    }
}

pub fn parse_bool(e: &SExpr) -> Option<bool> {
    match e.as_atom()? {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// SMT-LIB literal for an exact rational value.
pub fn number_literal(v: Rational64, real: bool) -> SExpr {
    let neg = v.is_negative();
    let a = v.abs();
    let body = if a.is_integer() {
        if real {
            SExpr::sym(format!("{}.0", a.numer()))
        } else {
            SExpr::sym(a.numer().to_string())
        }
    } else {
        SExpr::app(
            "/",
            vec![SExpr::sym(format!("{}.0", a.numer())), SExpr::sym(format!("{}.0", a.denom()))],
        )
    };
    if neg {
        SExpr::app("-", vec![body])
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_symbolic_index() {
        let e = SExpr::app("s3", vec![SExpr::sub(SExpr::sym("loop"), SExpr::int(1))]);
        assert_eq!(e.to_string(), "(s3 (- loop 1))");
        assert_eq!(SExpr::int(-4).to_string(), "(- 4)");
        assert_eq!(SExpr::real(-4).to_string(), "(- 4.0)");
    }

    #[test]
    fn parses_nested_and_strings() {
        let v = parse_all("sat\n((a 1) (b (- 2)))\n(error \"line 3: no \"\"model\"\"\")").unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], SExpr::sym("sat"));
        assert!(parse_all("(a").is_err());
        assert!(parse_all("a)").is_err());
    }

    #[test]
    fn parses_numbers() {
        let n = |s: &str| parse_number(&parse_all(s).unwrap()[0]);
        assert_eq!(n("7"), Some(Rational64::from_integer(7)));
        assert_eq!(n("(- 7)"), Some(Rational64::from_integer(-7)));
        assert_eq!(n("2.5"), Some(Rational64::new(5, 2)));
        assert_eq!(n("(/ 1.0 3.0)"), Some(Rational64::new(1, 3)));
        assert_eq!(n("(- (/ 1 4))"), Some(Rational64::new(-1, 4)));
        assert_eq!(n("x"), None);
    }

    #[test]
    fn literal_round_trip() {
        for (num, den) in [(0, 1), (5, 1), (-3, 1), (1, 2), (-7, 8), (3, 1024)] {
            let v = Rational64::new(num, den);
            for real in [false, true] {
                if !v.is_integer() && !real {
                    continue;
                }
                let lit = number_literal(v, real);
                let back = parse_number(&parse_all(&lit.to_string()).unwrap()[0]).unwrap();
                assert_eq!(back, v);
            }
        }
    }
}
