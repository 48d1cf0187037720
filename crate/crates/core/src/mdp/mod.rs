//! The operational semantics as an explicit Markov decision process, used as
//! an oracle for expected rewards, strategies and termination checks.

mod build;
mod export;
mod graph;
mod linsolve;
mod restrict;
mod solve;
mod termination;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{DesugarError, DomainError, EvalError, ProgState, Rat, Stmt, Var};
use crate::parser::print_program;

pub use build::{budget_from_env, build_mdp, BuildOptions, EscapePolicy, DEFAULT_BUDGET};
pub use export::export_text;
pub use restrict::{restrict_by_program, Restriction};
pub use solve::{expected_reward, extract_strategy, solve, Mode, Objective, SolveOptions, Solution, ValueResult};
pub use termination::{check_dast, check_dpast, DastReport, DpastReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Action {
    /// Probabilistic or deterministic step.
    #[serde(rename = "tau")]
    Tau,
    /// First branch of a guarded choice.
    #[serde(rename = "alpha")]
    Alpha,
    /// Second branch of a guarded choice.
    #[serde(rename = "beta")]
    Beta,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Tau => "tau",
            Action::Alpha => "alpha",
            Action::Beta => "beta",
        })
    }
}

/// Program counter of a configuration: an interned statement, normal
/// termination, or the sink for runs that left the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Control {
    Run(u32),
    Done,
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub control: Control,
    pub state: ProgState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub action: Action,
    /// Successor indices with positive probabilities summing to one.
    pub succ: Vec<(usize, Rat)>,
}

#[derive(Clone, Debug)]
pub struct OperationalMdp {
    /// The desugared program the model was built from.
    pub program: Stmt,
    /// Interned statements referenced by [`Control::Run`].
    pub stmts: Vec<Stmt>,
    pub configs: Vec<Config>,
    pub initial: Vec<usize>,
    /// Enabled actions per configuration, in action order.
    pub actions: Vec<Vec<Transition>>,
    /// Whether some run was cut off by [`EscapePolicy::Truncate`].
    pub truncated: bool,
}

impl OperationalMdp {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn is_terminated(&self, i: usize) -> bool {
        self.configs[i].control == Control::Done
    }

    pub fn is_truncated(&self, i: usize) -> bool {
        self.configs[i].control == Control::Truncated
    }

    pub fn stmt(&self, i: usize) -> Option<&Stmt> {
        match self.configs[i].control {
            Control::Run(id) => Some(&self.stmts[id as usize]),
            _ => None,
        }
    }

    pub fn transition(&self, i: usize, a: Action) -> Option<&Transition> {
        self.actions[i].iter().find(|t| t.action == a)
    }

    /// Human-readable description of a configuration.
    pub fn describe(&self, i: usize) -> String {
        let c = &self.configs[i];
        match c.control {
            Control::Done => format!("<done, {}>", c.state),
            Control::Truncated => format!("<truncated, {}>", c.state),
            Control::Run(id) => {
                let text = print_program(&self.stmts[id as usize]).split_whitespace().collect::<Vec<_>>().join(" ");
                format!("<{text}, {}>", c.state)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("assignment `{stmt}` at {state} sets {var} to {value}, outside its domain")]
    DomainEscape { state: ProgState, var: Var, value: String, stmt: String },
    #[error("state budget of {0} configurations exceeded")]
    BudgetExceeded(usize),
    #[error("probability {expr} evaluates to {value} at {state}, outside [0, 1]")]
    Probability { expr: String, value: String, state: ProgState },
    #[error("no guard of `{stmt}` holds at {state}")]
    NoEnabledBranch { state: ProgState, stmt: String },
    #[error("variable `{0}` has no domain")]
    Undeclared(Var),
    #[error("evaluation failed at {state}: {source}")]
    Eval { state: ProgState, source: EvalError },
    #[error(transparent)]
    Desugar(#[from] DesugarError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("configuration {0} of the implementation has no counterpart in the original model")]
    EmbeddingMismatch(String),
    #[error("{0}")]
    Unsupported(&'static str),
}
