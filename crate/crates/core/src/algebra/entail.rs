use serde::Serialize;
use thiserror::Error;

use crate::ast::{DomainError, EvalError, Expectation, FiniteDomain, Pred, ProgState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("evaluation failed at {state}: {source}")]
    Eval { state: ProgState, source: EvalError },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Outcome of a bounded-domain check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntailmentReport {
    pub holds: bool,
    pub counterexample: Option<ProgState>,
    pub states_checked: usize,
    /// Set when some variable ranges over an explicit sample set, so the
    /// claim does not cover every rational value.
    pub sampled: bool,
}

impl EntailmentReport {
    /// Conjunction of two reports; the first failure is kept.
    pub fn and(self, other: EntailmentReport) -> EntailmentReport {
        EntailmentReport {
            holds: self.holds && other.holds,
            counterexample: self.counterexample.or(other.counterexample),
            states_checked: self.states_checked + other.states_checked,
            sampled: self.sampled || other.sampled,
        }
    }
}

/// Checks `ok` at every initial state of `d` in enumeration order and stops
/// at the first state where it is false.
pub fn check_states<F>(d: &FiniteDomain, mut ok: F) -> Result<EntailmentReport, CheckError>
where
    F: FnMut(&ProgState) -> Result<bool, EvalError>,
{
    let mut checked = 0;
    for st in d.initial_states()? {
        checked += 1;
        let holds = ok(&st).map_err(|source| CheckError::Eval { state: st.clone(), source })?;
        if !holds {
            return Ok(EntailmentReport {
                holds: false,
                counterexample: Some(st),
                states_checked: checked,
                sampled: d.sampled(),
            });
        }
    }
    Ok(EntailmentReport { holds: true, counterexample: None, states_checked: checked, sampled: d.sampled() })
}

/// `f <= g` pointwise on the domain.
pub fn le_on_domain(f: &Expectation, g: &Expectation, d: &FiniteDomain) -> Result<EntailmentReport, CheckError> {
    check_states(d, |s| Ok(f.eval(s)? <= g.eval(s)?))
}

/// `f = g` pointwise on the domain.
pub fn eq_on_domain(f: &Expectation, g: &Expectation, d: &FiniteDomain) -> Result<EntailmentReport, CheckError> {
    check_states(d, |s| Ok(f.eval(s)? == g.eval(s)?))
}

/// Every state satisfying `phi` satisfies `psi`.
pub fn pred_entails(phi: &Pred, psi: &Pred, d: &FiniteDomain) -> Result<EntailmentReport, CheckError> {
    check_states(d, |s| Ok(!phi.eval(s)? || psi.eval(s)?))
}

/// `phi` holds at every state.
pub fn pred_valid(phi: &Pred, d: &FiniteDomain) -> Result<EntailmentReport, CheckError> {
    check_states(d, |s| phi.eval(s))
}

/// The two predicates agree at every state.
pub fn pred_equiv(phi: &Pred, psi: &Pred, d: &FiniteDomain) -> Result<EntailmentReport, CheckError> {
    check_states(d, |s| Ok(phi.eval(s)? == psi.eval(s)?))
}
