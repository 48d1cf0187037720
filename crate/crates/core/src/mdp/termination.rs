//! Demonic almost-sure termination and its positive variant, decided on the
//! finite model.

use serde::Serialize;

use crate::ast::{FiniteDomain, ProgState, Stmt, Value};

use super::graph::{can_avoid_surely, can_reach};
use super::solve::{solve, Mode, Objective, SolveOptions};
use super::{build_mdp, BuildOptions, Control, MdpError, OperationalMdp};

#[derive(Clone, Debug, Serialize)]
pub struct DastReport {
    pub holds: bool,
    /// First initial state from which some resolution avoids termination
    /// with positive probability.
    pub counterexample: Option<ProgState>,
    pub states: usize,
    /// Runs that left the domain were counted as stopped.
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DpastReport {
    pub holds: bool,
    pub counterexample: Option<ProgState>,
    /// Largest expected number of transitions until termination over all
    /// initial states and resolutions.
    pub expected_steps: Value,
    /// Largest expected number of guard-true visits of the loop head, when
    /// the program is a loop.
    pub expected_iterations: Option<Value>,
    pub exact: bool,
    pub truncated: bool,
}

fn stopped(m: &OperationalMdp) -> Vec<bool> {
    m.configs.iter().map(|c| !matches!(c.control, Control::Run(_))).collect()
}

/// Initial states from which the minimizing player reaches termination with
/// probability below one.
fn not_surely_terminating(m: &OperationalMdp) -> Vec<bool> {
    let stop = stopped(m);
    let forever = can_avoid_surely(m, &stop, |_, _| true);
    can_reach(m, &forever, &stop, |_, _| true)
}

fn dast_on(m: &OperationalMdp) -> DastReport {
    let bad = not_surely_terminating(m);
    let counterexample = m.initial.iter().find(|&&s| bad[s]).map(|&s| m.configs[s].state.clone());
    DastReport { holds: counterexample.is_none(), counterexample, states: m.len(), truncated: m.truncated }
}

pub fn check_dast(c: &Stmt, d: &FiniteDomain, opts: &BuildOptions) -> Result<DastReport, MdpError> {
    Ok(dast_on(&build_mdp(c, d, opts)?))
}

/// On a finite model every resolution terminates almost surely iff no end
/// component avoids termination, which also bounds the expected runtime; the
/// verdict is therefore the qualitative one, with the step bound reported.
pub fn check_dpast(
    c: &Stmt,
    d: &FiniteDomain,
    opts: &BuildOptions,
    solve_opts: &SolveOptions,
) -> Result<DpastReport, MdpError> {
    let m = build_mdp(c, d, opts)?;
    let dast = dast_on(&m);
    let max_over_initial = |values: &[Value]| {
        m.initial.iter().map(|&s| values[s].clone()).max().unwrap_or_else(Value::zero)
    };
    let steps = solve(&m, &Objective::steps(&m), Mode::Max, solve_opts)?;
    let iterations = match &m.program {
        Stmt::While(guard, ..) => {
            let head = &m.program;
            let count = |s: usize| m.stmt(s) == Some(head) && guard.eval(&m.configs[s].state).unwrap_or(false);
            let sol = solve(&m, &Objective::counting(&m, count), Mode::Max, solve_opts)?;
            Some((max_over_initial(&sol.values), sol.exact))
        }
        _ => None,
    };
    Ok(DpastReport {
        holds: dast.holds,
        counterexample: dast.counterexample,
        expected_steps: max_over_initial(&steps.values),
        exact: steps.exact && iterations.as_ref().is_none_or(|(_, e)| *e),
        expected_iterations: iterations.map(|(v, _)| v),
        truncated: m.truncated,
    })
}
