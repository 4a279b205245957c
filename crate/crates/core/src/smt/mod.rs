pub mod script;
pub mod sexpr;
pub mod solver;

pub use script::{emit_smtlib, Assertion, Family, FunDecl, SmtScript, Sort};
pub use sexpr::SExpr;
pub use solver::{get_model_values, solve, solve_cancellable, ModelValue, SolverResult, SolverVerdict, DEFAULT_SOLVER};
