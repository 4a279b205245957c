//! External solver process management and model retrieval.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use serde::Serialize;

use super::sexpr::{parse_all, parse_bool, parse_number, SExpr};
use crate::error::SolverError;

pub const DEFAULT_SOLVER: &str = "z3 -in";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverVerdict {
    Sat,
    Unsat,
    Unknown,
    SolverError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelValue {
    Bool(bool),
    Num(Rational64),
}

impl ModelValue {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            ModelValue::Bool(b) => Some(b),
            ModelValue::Num(_) => None,
        }
    }

    pub fn as_num(self) -> Option<Rational64> {
        match self {
            ModelValue::Num(n) => Some(n),
            ModelValue::Bool(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub verdict: SolverVerdict,
    /// Keyed by the printed ground application, e.g. `(v_x_0 3)`.
    pub model: BTreeMap<String, ModelValue>,
    /// Reason for unknown or error verdicts.
    pub reason: Option<String>,
    pub raw_output: String,
    pub raw_stats: String,
    pub wall_time: Duration,
}

impl SolverResult {
    fn without_model(verdict: SolverVerdict, reason: Option<String>, out: String, err: String, t: Duration) -> Self {
        SolverResult { verdict, model: BTreeMap::new(), reason, raw_output: out, raw_stats: err, wall_time: t }
    }
}

fn split_command(cmd: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut started = false;
    for c in cmd.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None if c == '"' || c == '\'' => {
                quote = Some(c);
                started = true;
            }
            None if c.is_whitespace() => {
                if started {
                    out.push(std::mem::take(&mut cur));
                    started = false;
                }
            }
            None => {
                cur.push(c);
                started = true;
            }
        }
    }
    if started {
        out.push(cur);
    }
    out
}

/// Run `command` on the script text and parse the reply.
pub fn solve(script: &str, command: &str, timeout: Duration) -> Result<SolverResult, SolverError> {
    solve_cancellable(script, command, timeout, None)
}

/// As [`solve`], additionally killing the process once `cancel` is set.
pub fn solve_cancellable(
    script: &str,
    command: &str,
    timeout: Duration,
    cancel: Option<&AtomicBool>,
) -> Result<SolverResult, SolverError> {
    let parts = split_command(command);
    let (prog, args) = parts.split_first().ok_or(SolverError::EmptyCommand)?;
    let start = Instant::now();
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Launch { command: command.to_string(), source })?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let text = script.to_string();
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(text.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let mut stopped: Option<&str> = None;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= timeout {
            stopped = Some("timeout");
        } else if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            stopped = Some("cancelled");
        }
        if stopped.is_some() {
            let _ = child.kill();
            let _ = child.wait();
            break;
        }
        thread::sleep(Duration::from_millis(2));
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let elapsed = start.elapsed();
    if let Some(why) = stopped {
        let reason = format!("{why} after {:.3}s", elapsed.as_secs_f64());
        return Ok(SolverResult::without_model(SolverVerdict::Unknown, Some(reason), out, err, elapsed));
    }
    Ok(interpret(out, err, elapsed))
}

fn interpret(out: String, err: String, elapsed: Duration) -> SolverResult {
    let exprs = match parse_all(&out) {
        Ok(e) => e,
        Err(e) => {
            let reason = format!("unparsable solver output ({e})");
            return SolverResult::without_model(SolverVerdict::SolverError, Some(reason), out, err, elapsed);
        }
    };
    let mut verdict = None;
    let mut rest = exprs.iter();
    for e in rest.by_ref() {
        match e.as_atom() {
            Some("sat") => verdict = Some(SolverVerdict::Sat),
            Some("unsat") => verdict = Some(SolverVerdict::Unsat),
            Some("unknown") => verdict = Some(SolverVerdict::Unknown),
            _ => {}
        }
        if verdict.is_some() {
            break;
        }
    }
    let Some(verdict) = verdict else {
        let reason = format!("no verdict in solver output: {}", out.trim());
        return SolverResult::without_model(SolverVerdict::SolverError, Some(reason), out, err, elapsed);
    };
    let mut model = BTreeMap::new();
    if verdict == SolverVerdict::Sat {
        for e in rest {
            let Some(items) = e.as_list() else { continue };
            let pairs: Option<Vec<(&SExpr, &SExpr)>> = items
                .iter()
                .map(|p| match p.as_list() {
                    Some([k, v]) => Some((k, v)),
                    _ => None,
                })
                .collect();
            let Some(pairs) = pairs else { continue };
            for (k, v) in pairs {
                let value = parse_bool(v).map(ModelValue::Bool).or_else(|| parse_number(v).map(ModelValue::Num));
                if let Some(value) = value {
                    model.insert(k.to_string(), value);
                }
            }
        }
    }
    let reason = (verdict == SolverVerdict::Unknown).then(|| "solver answered unknown".to_string());
    SolverResult { verdict, model, reason, raw_output: out, raw_stats: err, wall_time: elapsed }
}

/// Values for the requested ground applications, in request order.
pub fn get_model_values(result: &SolverResult, requests: &[SExpr]) -> Result<Vec<ModelValue>, SolverError> {
    if result.verdict != SolverVerdict::Sat {
        return Err(SolverError::NotSat);
    }
    requests
        .iter()
        .map(|r| {
            let key = r.to_string();
            result.model.get(&key).copied().ok_or(SolverError::MissingValue(key))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smt::script::{emit_smtlib, Family, SmtScript, Sort};

    fn z3_available() -> bool {
        Command::new("z3").arg("-version").output().is_ok()
    }

    #[test]
    fn splits_commands() {
        assert_eq!(split_command("z3 -in"), vec!["z3", "-in"]);
        assert_eq!(split_command("  sh -c 'echo  hi' "), vec!["sh", "-c", "echo  hi"]);
        assert!(split_command("   ").is_empty());
    }

    #[test]
    fn interprets_replies() {
        let r = interpret("sat\n(((f 0) 3)\n ((f 1) (- 2))\n (b true))\n".into(), String::new(), Duration::ZERO);
        assert_eq!(r.verdict, SolverVerdict::Sat);
        assert_eq!(r.model["(f 1)"], ModelValue::Num(Rational64::from_integer(-2)));
        assert_eq!(r.model["b"], ModelValue::Bool(true));
        let r = interpret("unsat\n(error \"line 9 column 10: model is not available\")\n".into(), String::new(), Duration::ZERO);
        assert_eq!(r.verdict, SolverVerdict::Unsat);
        let r = interpret("hello there (".into(), String::new(), Duration::ZERO);
        assert_eq!(r.verdict, SolverVerdict::SolverError);
        let r = interpret("hello there".into(), String::new(), Duration::ZERO);
        assert_eq!(r.verdict, SolverVerdict::SolverError);
        assert!(r.reason.unwrap().contains("hello there"));
    }

    #[test]
    fn false_is_unsat() {
        if !z3_available() {
            panic!("z3 not found on PATH");
        }
        let mut s = SmtScript::new("QF_UFLIA");
        s.assert(Family::Initial, SExpr::bool(false));
        let r = solve(&emit_smtlib(&s), DEFAULT_SOLVER, Duration::from_secs(10)).unwrap();
        assert_eq!(r.verdict, SolverVerdict::Unsat);
        assert!(get_model_values(&r, &[SExpr::sym("a")]).is_err());
    }

    #[test]
    fn equality_is_sat_with_model() {
        let mut s = SmtScript::new("QF_UFLIA");
        s.declare("a", vec![], Sort::Int);
        s.assert(Family::Initial, SExpr::eq(SExpr::sym("a"), SExpr::int(1)));
        s.get_values.push(SExpr::sym("a"));
        let r = solve(&emit_smtlib(&s), DEFAULT_SOLVER, Duration::from_secs(10)).unwrap();
        assert_eq!(r.verdict, SolverVerdict::Sat);
        let v = get_model_values(&r, &[SExpr::sym("a")]).unwrap();
        assert_eq!(v, vec![ModelValue::Num(Rational64::from_integer(1))]);
        assert!(matches!(
            get_model_values(&r, &[SExpr::sym("b")]),
            Err(SolverError::MissingValue(_))
        ));
    }

    #[test]
    fn banter_is_solver_error() {
        let r = solve("", "echo I am not a solver", Duration::from_secs(5)).unwrap();
        assert_eq!(r.verdict, SolverVerdict::SolverError);
        assert!(r.raw_output.contains("not a solver"));
    }

    #[test]
    fn timeout_is_unknown() {
        let r = solve("", "sleep 5", Duration::from_millis(100)).unwrap();
        assert_eq!(r.verdict, SolverVerdict::Unknown);
        assert!(r.reason.unwrap().starts_with("timeout"));
    }

    #[test]
    fn launch_failure_is_error() {
        assert!(matches!(
            solve("", "/nonexistent/solver-binary", Duration::from_secs(1)),
            Err(SolverError::Launch { .. })
        ));
    }
}
