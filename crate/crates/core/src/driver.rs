//! The k-iteration loop, option resolution and the suite runner.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::encoder::{build_encoding, EncodeOptions, ValuationMode};
use crate::error::{DriverError, EncodeError, FormulaError};
use crate::existence::{class_subjects, effective_partition};
use crate::formula::{ConstantsMode, Formula, Theory};
use crate::parser::{parse, ProblemFile};
use crate::rewrite::{remove_propositions, shift_left, to_pnf};
use crate::smt::{emit_smtlib, solve_cancellable, SolverVerdict, DEFAULT_SOLVER};
use crate::witness::{check_lasso, check_property_c_graph, extract_witness, induced_symbolic_model, Witness};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_k: u32,
    /// Overrides the theory declared in the problem file.
    pub theory: Option<Theory>,
    pub consts: ConstantsMode,
    pub mode: ValuationMode,
    pub solver: String,
    pub timeout: Duration,
    /// Script dump path; `{k}` is replaced by the bound.
    pub emit_smt: Option<PathBuf>,
    pub json: bool,
    pub shift: bool,
    pub existence: bool,
    pub self_pairs: bool,
    /// Number of bounds probed concurrently; 1 is sequential.
    pub parallel_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_k: 10,
            theory: None,
            consts: ConstantsMode::Occurring,
            mode: ValuationMode::Weak,
            solver: DEFAULT_SOLVER.to_string(),
            timeout: Duration::from_secs(60),
            emit_smt: None,
            json: false,
            shift: true,
            existence: true,
            self_pairs: true,
            parallel_k: 1,
        }
    }
}

/// Settings given explicitly on the command line; they win over file options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub max_k: Option<u32>,
    pub theory: Option<Theory>,
    pub consts: Option<ConstantsMode>,
    pub mode: Option<ValuationMode>,
    pub solver: Option<String>,
    pub timeout: Option<Duration>,
    pub emit_smt: Option<PathBuf>,
    pub json: Option<bool>,
    pub shift: Option<bool>,
    pub existence: Option<bool>,
    pub self_pairs: Option<bool>,
    pub parallel_k: Option<usize>,
}

fn bad(key: &str, message: impl Into<String>) -> DriverError {
    DriverError::BadOption { key: key.to_string(), message: message.into() }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, DriverError> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(bad(key, format!("expected true or false, got `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, DriverError> {
    v.parse().map_err(|_| bad(key, format!("expected a number, got `{v}`")))
}

pub fn parse_timeout(key: &str, v: &str) -> Result<Duration, DriverError> {
    let secs: f64 = parse_num(key, v)?;
    if !(secs > 0.0 && secs.is_finite()) {
        return Err(bad(key, "must be positive"));
    }
    Ok(Duration::from_secs_f64(secs))
}

impl RunConfig {
    /// Apply `option key = value;` lines of a problem file.
    pub fn apply_file_options(&mut self, options: &BTreeMap<String, String>) -> Result<(), DriverError> {
        for (key, v) in options {
            match key.as_str() {
                "max_k" => self.max_k = parse_num(key, v)?,
                "theory" => self.theory = Some(Theory::parse(v).ok_or_else(|| bad(key, format!("unknown theory `{v}`")))?),
                "mode" => self.mode = ValuationMode::parse(v).ok_or_else(|| bad(key, "expected weak or strong"))?,
                "consts" => self.consts = ConstantsMode::parse(v).ok_or_else(|| bad(key, "expected occurring or interval"))?,
                "existence" => self.existence = parse_bool(key, v)?,
                "shift" => self.shift = parse_bool(key, v)?,
                "self_pairs" => self.self_pairs = parse_bool(key, v)?,
                "timeout" => self.timeout = parse_timeout(key, v)?,
                "parallel_k" => self.parallel_k = parse_num(key, v)?,
                "expect" => {
                    Expectation::parse(v).ok_or_else(|| bad(key, "expected sat, unsat or unknown"))?;
                }
                _ => return Err(bad(key, "unknown option")),
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = &o.$f { self.$f = v.clone(); } )*};
        }
        take!(max_k, consts, mode, solver, timeout, json, shift, existence, self_pairs, parallel_k);
        if o.theory.is_some() {
            self.theory = o.theory;
        }
        if o.emit_smt.is_some() {
            self.emit_smt = o.emit_smt.clone();
        }
    }

    /// Defaults, then file options, then explicit flags.
    pub fn resolve(file_options: &BTreeMap<String, String>, cli: &Overrides) -> Result<RunConfig, DriverError> {
        let mut cfg = RunConfig::default();
        cfg.apply_file_options(file_options)?;
        cfg.apply_overrides(cli);
        if cfg.max_k < 1 {
            return Err(bad("max_k", "must be at least 1"));
        }
        Ok(cfg)
    }

    pub fn encode_options(&self) -> EncodeOptions {
        EncodeOptions { existence: self.existence, mode: self.mode, consts: self.consts, self_pairs: self.self_pairs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Sat,
    Unsat,
    Unknown,
}

impl Expectation {
    pub fn parse(s: &str) -> Option<Expectation> {
        match s {
            "sat" => Some(Expectation::Sat),
            "unsat" => Some(Expectation::Unsat),
            "unknown" => Some(Expectation::Unknown),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Expectation::Sat => "sat",
            Expectation::Unsat => "unsat",
            Expectation::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct KLog {
    pub k: u32,
    pub verdict: SolverVerdict,
    pub wall_ms: u128,
    pub assertions: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerdictKind {
    Sat { k: u32, witness: Witness },
    UnsatUpTo(u32),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub per_k: Vec<KLog>,
    pub notes: Vec<String>,
}

impl Verdict {
    /// 0 sat, 1 unsat up to the bound, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            VerdictKind::Sat { .. } => 0,
            VerdictKind::UnsatUpTo(_) => 1,
            VerdictKind::Unknown(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            VerdictKind::Sat { .. } => "sat",
            VerdictKind::UnsatUpTo(_) => "unsat",
            VerdictKind::Unknown(_) => "unknown",
        }
    }

    pub fn first_sat_k(&self) -> Option<u32> {
        match self.kind {
            VerdictKind::Sat { k, .. } => Some(k),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.kind {
            VerdictKind::Sat { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "verdict": self.name(),
            "per_k": self.per_k,
            "notes": self.notes,
        });
        match &self.kind {
            VerdictKind::Sat { k, witness } => {
                v["k"] = json!(k);
                v["witness"] = witness.to_json();
            }
            VerdictKind::UnsatUpTo(k) => v["max_k"] = json!(k),
            VerdictKind::Unknown(reason) => v["reason"] = json!(reason),
        }
        v
    }

    /// Human-readable report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        match &self.kind {
            VerdictKind::Sat { k, witness } => {
                out.push_str(&format!(
                    "sat at k={k} (loop {}, verified: {})\n",
                    witness.loop_at, witness.verified
                ));
                let last = witness.first_position + witness.sigma.values().map(Vec::len).max().unwrap_or(0) as i64;
                for (v, row) in &witness.sigma {
                    let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("  {v} [{}..{}): {}\n", witness.first_position, last, cells.join(" ")));
                }
                for (i, ps) in witness.props.iter().enumerate() {
                    if !ps.is_empty() {
                        let names: Vec<&str> = ps.iter().map(String::as_str).collect();
                        out.push_str(&format!("  props at {i}: {}\n", names.join(" ")));
                    }
                }
            }
            VerdictKind::UnsatUpTo(k) => out.push_str(&format!("unsat up to k={k}\n")),
            VerdictKind::Unknown(reason) => out.push_str(&format!("unknown: {reason}\n")),
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Outcome of the pipeline at a single bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Unsat,
    Sat(Box<Witness>),
    Unknown(String),
}

struct Prepared {
    theory: Theory,
    original: Formula,
    encoded: Formula,
    offset: i32,
    np: BTreeMap<String, String>,
}

fn prepare(problem: &ProblemFile, cfg: &RunConfig) -> Result<Prepared, DriverError> {
    let theory = cfg.theory.unwrap_or(problem.theory);
    if cfg.consts == ConstantsMode::Interval && !theory.is_discrete() {
        return Err(EncodeError::Formula(FormulaError::DenseInterval).into());
    }
    let original = to_pnf(&problem.formula);
    let (np_phi, np) = remove_propositions(&original)?;
    let (encoded, offset) = if cfg.shift { shift_left(&np_phi) } else { (np_phi, 0) };
    Ok(Prepared { theory, original, encoded, offset, np })
}

fn dump_path(template: &Path, k: u32) -> PathBuf {
    PathBuf::from(template.to_string_lossy().replace("{k}", &k.to_string()))
}

fn probe(p: &Prepared, cfg: &RunConfig, k: u32, cancel: Option<&AtomicBool>) -> Result<(KLog, Probe), DriverError> {
    let mut enc = build_encoding(&p.encoded, k, p.theory, &cfg.encode_options())?;
    enc.script.get_values = enc.requests.clone();
    let text = emit_smtlib(&enc.script);
    if let Some(t) = &cfg.emit_smt {
        let path = dump_path(t, k);
        fs::write(&path, &text).map_err(|source| io_error(&path, source))?;
    }
    let result = solve_cancellable(&text, &cfg.solver, cfg.timeout, cancel)?;
    let log = KLog {
        k,
        verdict: result.verdict,
        wall_ms: result.wall_time.as_millis(),
        assertions: enc.script.assertions.len(),
        bytes: text.len(),
    };
    let outcome = match result.verdict {
        SolverVerdict::Unsat => Probe::Unsat,
        SolverVerdict::Unknown | SolverVerdict::SolverError => {
            let reason = result.reason.unwrap_or_else(|| "no reason given".into());
            Probe::Unknown(format!("k={k}: {reason}"))
        }
        SolverVerdict::Sat => match verify(p, cfg, k, extract_witness(&enc, &result)?)? {
            Ok(w) => Probe::Sat(Box::new(w)),
            Err(why) => Probe::Unknown(format!("k={k}: {why}")),
        },
    };
    Ok((log, outcome))
}

/// Independent checks of an extracted witness, then back-translation.
fn verify(p: &Prepared, cfg: &RunConfig, k: u32, mut w: Witness) -> Result<Result<Witness, String>, DriverError> {
    if let Err(e) = check_lasso(&p.encoded, &w, p.theory) {
        return Ok(Err(format!("witness rejected by lasso check: {e}")));
    }
    let mut c = false;
    if p.theory.is_discrete() {
        let partition = effective_partition(&p.encoded, p.theory, cfg.mode, cfg.consts);
        let consts: BTreeSet<i64> = partition.consts.iter().flatten().copied().collect();
        let lasso = induced_symbolic_model(&w, &p.encoded, &consts);
        c = check_property_c_graph(&lasso, &class_subjects(&partition), p.theory, cfg.self_pairs)?;
        w.condition_c = Some(c);
    }
    if c && cfg.existence {
        return Ok(Err(format!("witness at k={k} shows the forbidden pattern")));
    }
    let mut back = w.back_translate(p.offset, &p.np);
    if let Err(e) = check_lasso(&p.original, &back, p.theory) {
        return Ok(Err(format!("back-translated witness rejected: {e}")));
    }
    back.verified = !c;
    Ok(Ok(back))
}

fn unsat_note(max_k: u32) -> String {
    format!(
        "no lasso model up to k={max_k}; unsatisfiability follows only beyond the completeness threshold, \
         roughly |SV(phi)| * 2^|phi|, which is not computed"
    )
}

/// Run the full pipeline at bound `k` only.
pub fn check_k(problem: &ProblemFile, cfg: &RunConfig, k: u32) -> Result<(KLog, Probe), DriverError> {
    let p = prepare(problem, cfg)?;
    probe(&p, cfg, k, None)
}

/// Iterate k = 1..=max_k and report the first verified lasso.
pub fn check_sat(problem: &ProblemFile, cfg: &RunConfig) -> Result<Verdict, DriverError> {
    let p = prepare(problem, cfg)?;
    let mut notes = Vec::new();
    if !cfg.existence && p.theory.is_discrete() {
        notes.push("existence constraints disabled: sat answers may lack an arithmetic model".to_string());
    }
    let outcomes = if cfg.parallel_k > 1 { probe_parallel(&p, cfg)? } else { probe_sequential(&p, cfg)? };
    let mut per_k = Vec::new();
    for (log, outcome) in outcomes {
        let k = log.k;
        per_k.push(log);
        match outcome {
            Probe::Unsat => continue,
            Probe::Sat(w) => {
                if !w.verified {
                    notes.push(format!("witness at k={k} has no arithmetic model (forbidden pattern present)"));
                }
                return Ok(Verdict { kind: VerdictKind::Sat { k, witness: *w }, per_k, notes });
            }
            Probe::Unknown(reason) => return Ok(Verdict { kind: VerdictKind::Unknown(reason), per_k, notes }),
        }
    }
    notes.push(unsat_note(cfg.max_k));
    Ok(Verdict { kind: VerdictKind::UnsatUpTo(cfg.max_k), per_k, notes })
}

fn probe_sequential(p: &Prepared, cfg: &RunConfig) -> Result<Vec<(KLog, Probe)>, DriverError> {
    let mut out = Vec::new();
    for k in 1..=cfg.max_k {
        let (log, outcome) = probe(p, cfg, k, None)?;
        let stop = !matches!(outcome, Probe::Unsat);
        out.push((log, outcome));
        if stop {
            break;
        }
    }
    Ok(out)
}

/// Probe several bounds at once; a decided bound cancels all larger ones.
fn probe_parallel(p: &Prepared, cfg: &RunConfig) -> Result<Vec<(KLog, Probe)>, DriverError> {
    let next = AtomicU32::new(1);
    let decided = AtomicU32::new(u32::MAX);
    let cancels: Vec<AtomicBool> = (0..=cfg.max_k).map(|_| AtomicBool::new(false)).collect();
    let results: Mutex<BTreeMap<u32, Result<(KLog, Probe), DriverError>>> = Mutex::new(BTreeMap::new());
    std::thread::scope(|s| {
        for _ in 0..cfg.parallel_k.min(cfg.max_k as usize) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k > cfg.max_k || k > decided.load(Ordering::SeqCst) {
                    break;
                }
                let r = probe(p, cfg, k, Some(&cancels[k as usize]));
                if !matches!(r, Ok((_, Probe::Unsat))) {
                    decided.fetch_min(k, Ordering::SeqCst);
                    for c in &cancels[k as usize + 1..] {
                        c.store(true, Ordering::SeqCst);
                    }
                }
                results.lock().expect("results lock").insert(k, r);
            });
        }
    });
    let mut out = Vec::new();
    for (_, r) in results.into_inner().expect("results lock") {
        let (log, outcome) = r?;
        let stop = !matches!(outcome, Probe::Unsat);
        out.push((log, outcome));
        if stop {
            break;
        }
    }
    Ok(out)
}

fn io_error(path: &Path, source: std::io::Error) -> DriverError {
    DriverError::Io { path: path.display().to_string(), source }
}

pub fn load_problem(path: &Path) -> Result<ProblemFile, DriverError> {
    let text = fs::read_to_string(path).map_err(|source| io_error(path, source))?;
    parse(&text).map_err(|e| DriverError::Parse { path: path.display().to_string(), source: e })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SuiteRow {
    pub file: String,
    pub expected: String,
    pub verdict: String,
    pub first_sat_k: Option<u32>,
    pub wall_ms: u128,
    pub assertions: usize,
    pub bytes: usize,
    pub verified: Option<bool>,
    pub status: String,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    /// Files that could not be read or parsed, with the reason.
    pub unreadable: Vec<(String, String)>,
    pub failures: usize,
}

impl SuiteReport {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 || !self.unreadable.is_empty() {
            1
        } else {
            0
        }
    }
}

fn suite_row(file: String, problem: &ProblemFile, cli: &Overrides) -> SuiteRow {
    let expected = problem.options.get("expect").and_then(|e| Expectation::parse(e));
    let mut row = SuiteRow {
        file,
        expected: expected.map_or("-", Expectation::name).to_string(),
        verdict: "error".into(),
        first_sat_k: None,
        wall_ms: 0,
        assertions: 0,
        bytes: 0,
        verified: None,
        status: String::new(),
    };
    let start = Instant::now();
    let verdict = RunConfig::resolve(&problem.options, cli).and_then(|cfg| check_sat(problem, &cfg));
    row.wall_ms = start.elapsed().as_millis();
    let v = match verdict {
        Ok(v) => v,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    row.verdict = v.name().into();
    row.first_sat_k = v.first_sat_k();
    row.assertions = v.per_k.last().map_or(0, |l| l.assertions);
    row.bytes = v.per_k.last().map_or(0, |l| l.bytes);
    row.verified = v.witness().map(|w| w.verified);
    let matches = match expected {
        None => true,
        Some(Expectation::Sat) => matches!(v.kind, VerdictKind::Sat { .. }),
        Some(Expectation::Unsat) => matches!(v.kind, VerdictKind::UnsatUpTo(_)),
        Some(Expectation::Unknown) => matches!(v.kind, VerdictKind::Unknown(_)),
    };
    row.status = if !matches {
        "mismatch".into()
    } else if row.verified == Some(false) {
        "unverified".into()
    } else {
        "ok".into()
    };
    row
}

/// Run every `.cltl` file of `dir` and write the CSV report to `csv_out`.
pub fn run_suite(dir: &Path, cli: &Overrides, csv_out: &Path) -> Result<SuiteReport, DriverError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| io_error(dir, source))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cltl"))
        .collect();
    files.sort();
    let mut report = SuiteReport::default();
    for path in files {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        match load_problem(&path) {
            Ok(problem) => {
                let row = suite_row(name, &problem, cli);
                if row.status != "ok" {
                    report.failures += 1;
                }
                report.rows.push(row);
            }
            Err(e) => report.unreadable.push((name, e.to_string())),
        }
    }
    let mut w = csv::Writer::from_path(csv_out)?;
    for row in &report.rows {
        w.serialize(row)?;
    }
    if report.rows.is_empty() {
        w.write_record(["file", "expected", "verdict", "first_sat_k", "wall_ms", "assertions", "bytes", "verified", "status"])?;
    }
    w.flush().map_err(|source| io_error(csv_out, source))?;
    Ok(report)
}
