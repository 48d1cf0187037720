//! Side conditions under which a subinvariant lower-bounds `awp` through
//! optional stopping.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::algebra::{check_states, simplify, CheckError, EntailmentReport};
use crate::ast::{EvalError, Expectation, FiniteDomain, Pred, ProgState, Rat, Stmt, Value, Var};
use crate::mdp::{build_mdp, expected_reward, Mode};
use crate::wp::{wp_exact, Transformer, WpError};

use super::{VcError, VcOptions};

#[derive(Clone, Debug, Serialize)]
pub struct CdbReport {
    pub holds: bool,
    /// Largest one-step expected change of the invariant, when finite.
    pub bound: Option<Value>,
    /// State attaining the bound, or where the change is infinite.
    pub witness: Option<ProgState>,
    pub states_checked: usize,
    /// The body contains a loop, so the expected change was computed on the
    /// operational model rather than symbolically.
    pub via_model: bool,
    /// Some run of the body left the domain and was counted as no change.
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StoppingReport {
    /// `I` agrees with `f` wherever the guard fails, so that
    /// `I = [φ]·I + [¬φ]·f`.
    pub shape: EntailmentReport,
    /// `f`, `I` and `Φ(I)` are finite everywhere.
    pub finite: EntailmentReport,
    pub cdb: CdbReport,
}

impl StoppingReport {
    pub fn holds(&self) -> bool {
        self.shape.holds && self.finite.holds && self.cdb.holds
    }

    pub fn counterexample(&self) -> Option<&ProgState> {
        self.shape
            .counterexample
            .as_ref()
            .or(self.finite.counterexample.as_ref())
            .or(if self.cdb.holds { None } else { self.cdb.witness.as_ref() })
    }
}

/// Checks that `inv` normalizes to the form `[guard]·I' + [¬guard]·f` on the
/// domain, taking the normalized invariant itself as `I'`.
pub fn check_shape(guard: &Pred, inv: &Expectation, f: &Expectation, d: &FiniteDomain) -> Result<EntailmentReport, VcError> {
    let inner = simplify(inv);
    let shaped = simplify(&Expectation::add(
        Expectation::mul(Expectation::iverson(guard.clone()), inner),
        Expectation::mul(Expectation::iverson(Pred::not(guard.clone())), f.clone()),
    ));
    Ok(check_states(d, |s| Ok(shaped.eval(s)? == inv.eval(s)?))?)
}

/// One-step expected change `awp(body)(|I - I(σ)|)(σ)` at guard states,
/// as a function of the state.
enum Spread {
    Symbolic { anchor: Var, spread: Expectation },
    /// Per anchor value `I(σ)`, the maximal expected change from each state.
    Model { values: HashMap<Rat, HashMap<ProgState, Value>>, truncated: bool },
}

impl Spread {
    fn new(guard: &Pred, body: &Stmt, inv: &Expectation, d: &FiniteDomain, opts: &VcOptions) -> Result<Self, VcError> {
        let anchor = Var::new("k#");
        let diff = Expectation::abs_diff(inv.clone(), Expectation::Var(anchor.clone()));
        match wp_exact(Transformer::Awp, body, &diff) {
            Ok(spread) => return Ok(Spread::Symbolic { anchor, spread }),
            Err(WpError::LoopPresent) => {}
            Err(e) => return Err(e.into()),
        }
        let starts = d.with_init(Some(guard.clone()));
        let m = build_mdp(body, &starts, &opts.build)?;
        let mut anchors = BTreeSet::new();
        for &i in &m.initial {
            if let Value::Finite(k) = inv.eval(&m.configs[i].state).map_err(|source| {
                VcError::Check(CheckError::Eval { state: m.configs[i].state.clone(), source })
            })? {
                anchors.insert(k);
            }
        }
        let mut values = HashMap::new();
        for k in anchors {
            let post = Expectation::abs_diff(inv.clone(), Expectation::Const(k.clone()));
            let r = expected_reward(&m, &post, Mode::Max, &opts.solve)?;
            values.insert(k, r.values.into_iter().collect());
        }
        Ok(Spread::Model { values, truncated: m.truncated })
    }

    fn at(&self, s: &ProgState, k: Rat) -> Result<Value, EvalError> {
        match self {
            Spread::Symbolic { anchor, spread } => spread.eval(&s.with(anchor, k)),
            Spread::Model { values, .. } => Ok(values[&k][s].clone()),
        }
    }
}

/// Conditional difference boundedness: the largest value over guard states
/// `σ` of `awp(body)(|I - I(σ)|)(σ)`, computed with signed differences.
pub fn check_cdb(
    guard: &Pred,
    body: &Stmt,
    inv: &Expectation,
    d: &FiniteDomain,
    opts: &VcOptions,
) -> Result<CdbReport, VcError> {
    let spread = Spread::new(guard, body, inv, d, opts)?;
    let mut best: Option<(Value, ProgState)> = None;
    let mut infinite: Option<ProgState> = None;
    let mut checked = 0;
    check_states(d, |s| {
        if !guard.eval(s)? {
            return Ok(true);
        }
        checked += 1;
        let v = match inv.eval(s)? {
            Value::Finite(k) => spread.at(s, k)?,
            Value::Infinity => Value::Infinity,
        };
        if v.is_infinite() {
            infinite = Some(s.clone());
            return Ok(false);
        }
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, s.clone()));
        }
        Ok(true)
    })?;
    let (via_model, truncated) = match &spread {
        Spread::Symbolic { .. } => (false, false),
        Spread::Model { truncated, .. } => (true, *truncated),
    };
    Ok(match infinite {
        Some(w) => CdbReport { holds: false, bound: None, witness: Some(w), states_checked: checked, via_model, truncated },
        None => {
            let (bound, witness) = match best {
                Some((b, w)) => (b, Some(w)),
                None => (Value::zero(), None),
            };
            CdbReport { holds: true, bound: Some(bound), witness, states_checked: checked, via_model, truncated }
        }
    })
}

pub(super) fn check_stopping(
    guard: &Pred,
    body: &Stmt,
    inv: &Expectation,
    f: &Expectation,
    phi: &Expectation,
    d: &FiniteDomain,
    opts: &VcOptions,
) -> Result<StoppingReport, VcError> {
    let shape = check_shape(guard, inv, f, d)?;
    let finite = check_states(d, |s| {
        Ok(!f.eval(s)?.is_infinite() && !inv.eval(s)?.is_infinite() && !phi.eval(s)?.is_infinite())
    })?;
    let cdb = check_cdb(guard, body, inv, d, opts)?;
    Ok(StoppingReport { shape, finite, cdb })
}
