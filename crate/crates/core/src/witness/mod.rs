//! Witnesses read back from solver models and their independent checks.

pub mod brute;
pub mod graph;
pub mod lasso;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use serde_json::{json, Value};

use crate::encoder::Encoding;
use crate::error::WitnessError;
use crate::smt::{get_model_values, ModelValue, SolverResult};

pub use brute::{brute_force_ksat, BruteOptions, BruteOutcome};
pub use graph::{check_property_c_graph, condition_c};
pub use lasso::{check_lasso, eval_atom, induced_symbolic_model, verify_lasso, SymbolicLasso};

/// A lasso of length `k+1` with loop start `loop_at` and its valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub k: u32,
    pub loop_at: u32,
    /// Position of the first entry of every `sigma` row.
    pub first_position: i64,
    pub sigma: BTreeMap<String, Vec<Rational64>>,
    /// `truth[n][i]` for subformula `n` of the encoded formula, `i` in `0..=k+1`.
    pub truth: Vec<Vec<bool>>,
    /// Propositions true at positions `0..=k`.
    pub props: Vec<BTreeSet<String>>,
    pub verified: bool,
    /// Outcome of the graph check, when it was run.
    pub condition_c: Option<bool>,
}

impl Witness {
    pub fn new(k: u32, loop_at: u32, first_position: i64, sigma: BTreeMap<String, Vec<Rational64>>) -> Witness {
        Witness {
            k,
            loop_at,
            first_position,
            sigma,
            truth: Vec::new(),
            props: Vec::new(),
            verified: false,
            condition_c: None,
        }
    }

    pub fn value(&self, var: &str, pos: i64) -> Option<Rational64> {
        let row = self.sigma.get(var)?;
        let i = usize::try_from(pos - self.first_position).ok()?;
        row.get(i).copied()
    }

    /// Undo a left shift by `offset` and replace proposition variables by
    /// the propositions they stand for.
    pub fn back_translate(&self, offset: i32, np: &BTreeMap<String, String>) -> Witness {
        let one = Rational64::from_integer(1);
        let mut w = self.clone();
        w.first_position = self.first_position + offset as i64;
        w.truth.clear();
        w.props = (0..=self.k as i64)
            .map(|i| {
                np.iter()
                    .filter(|(_, v)| w.value(v, i) == Some(one))
                    .map(|(p, _)| p.clone())
                    .collect()
            })
            .collect();
        w.sigma.retain(|v, _| !np.values().any(|x| x == v));
        w
    }

    pub fn to_json(&self) -> Value {
        let num = |v: &Rational64| {
            if v.is_integer() {
                json!(v.to_integer())
            } else {
                json!(v.to_string())
            }
        };
        let sigma: serde_json::Map<String, Value> = self
            .sigma
            .iter()
            .map(|(k, row)| (k.clone(), Value::Array(row.iter().map(num).collect())))
            .collect();
        json!({
            "k": self.k,
            "loop": self.loop_at,
            "first_position": self.first_position,
            "sigma": sigma,
            "props": self.props,
            "verified": self.verified,
            "condition_c": self.condition_c,
        })
    }
}

/// Read the witness out of a `sat` result for `enc`.
pub fn extract_witness(enc: &Encoding, result: &SolverResult) -> Result<Witness, WitnessError> {
    let values = get_model_values(result, &enc.requests).map_err(|e| WitnessError::IncompleteModel(e.to_string()))?;
    let ctx = &enc.ctx;
    let k = ctx.k();
    let lb = ctx.bounds.look_back as i64;
    let ub = ctx.bounds.look_ahead as i64;
    let bad = WitnessError::IncompleteModel;
    let num = |v: &ModelValue| v.as_num().ok_or_else(|| bad("expected a number".into()));
    let loop_val = num(&values[0])?;
    if !loop_val.is_integer() || loop_val.to_integer() < 1 || loop_val.to_integer() > k {
        return Err(bad(format!("loop value {loop_val} outside [1, {k}]")));
    }
    let loop_at = loop_val.to_integer();
    let len = (k + 1 + ub - lb + 1) as usize;
    let mut at = 1;
    let mut sigma = BTreeMap::new();
    for v in &ctx.vars {
        let row = values[at..at + len].iter().map(num).collect::<Result<Vec<_>, _>>()?;
        sigma.insert(v.clone(), row);
        at += len;
    }
    let width = (k + 2) as usize;
    if values.len() - at != ctx.subs.len() * width {
        return Err(bad("truth table size".into()));
    }
    let truth = values[at..]
        .chunks(width)
        .map(|row| row.iter().map(|v| v.as_bool().ok_or_else(|| bad("non-boolean truth value".into()))).collect())
        .collect::<Result<Vec<Vec<bool>>, _>>()?;
    let mut w = Witness::new(k as u32, loop_at as u32, lb, sigma);
    w.truth = truth;
    w.props = vec![BTreeSet::new(); k as usize + 1];
    Ok(w)
}
