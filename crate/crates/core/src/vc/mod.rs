//! Verification conditions: a generator parameterized by a per-loop check
//! (the provider), and the three providers for upper and lower bounds.

mod stopping;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{check_states, le_on_domain, CheckError, EntailmentReport};
use crate::ast::{Expectation, FiniteDomain, Pred, Stmt, Value};
use crate::mdp::{check_dast, check_dpast, BuildOptions, DastReport, DpastReport, MdpError, SolveOptions};
use crate::parser::print_pred;
use crate::wp::{char_functional, wpre_raw, Transformer, WpError};

pub use stopping::{check_cdb, check_shape, CdbReport, StoppingReport};

/// The per-loop proof rule used by [`vc_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VcProviderId {
    /// Park induction: `Φ(I) <= I` gives upper bounds on `dwp`.
    Superinv,
    /// `I <= Φ(I)`, demonic almost-sure termination and boundedness give
    /// lower bounds on `awp`.
    DastSubinv,
    /// `I <= Φ(I)`, finite expected runtime and optional-stopping
    /// suitability give lower bounds on `awp`.
    DpastSubinv,
}

impl VcProviderId {
    /// The transformer this provider is sound for.
    pub fn transformer(self) -> Transformer {
        match self {
            VcProviderId::Superinv => Transformer::Dwp,
            VcProviderId::DastSubinv | VcProviderId::DpastSubinv => Transformer::Awp,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VcProviderId::Superinv => "superinv",
            VcProviderId::DastSubinv => "dast-subinv",
            VcProviderId::DpastSubinv => "dpast-subinv",
        }
    }
}

impl std::str::FromStr for VcProviderId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "superinv" => Ok(VcProviderId::Superinv),
            "dast-subinv" => Ok(VcProviderId::DastSubinv),
            "dpast-subinv" => Ok(VcProviderId::DpastSubinv),
            _ => Err(format!("unknown provider `{s}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VcError {
    #[error("provider {provider} is sound for {expected}, not {given}")]
    Pairing { provider: &'static str, expected: &'static str, given: &'static str },
    #[error(transparent)]
    Wp(#[from] WpError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

#[derive(Clone, Debug, Default)]
pub struct VcOptions {
    pub build: BuildOptions,
    pub solve: SolveOptions,
}

/// Everything checked for one loop.
#[derive(Clone, Debug, Serialize)]
pub struct LoopRecord {
    /// Child positions from the program root, 1-based, e.g. `2.1`.
    pub location: String,
    pub guard: String,
    pub passed: bool,
    /// `Φ(I) <= I` for the super-, `I <= Φ(I)` for the subinvariant rules.
    pub inequality: EntailmentReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dast: Option<DastReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dpast: Option<DpastReport>,
    /// Largest value of `I` and `f` on the domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopping: Option<StoppingReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VcReport {
    pub verdict: bool,
    pub provider: VcProviderId,
    pub transformer: Transformer,
    pub loops: Vec<LoopRecord>,
    pub warnings: Vec<String>,
}

impl VcReport {
    /// First counterexample state of a failing loop, if any.
    pub fn first_counterexample(&self) -> Option<&crate::ast::ProgState> {
        self.loops.iter().filter(|l| !l.passed).find_map(|l| {
            l.inequality
                .counterexample
                .as_ref()
                .or(l.dast.as_ref().and_then(|d| d.counterexample.as_ref()))
                .or(l.dpast.as_ref().and_then(|d| d.counterexample.as_ref()))
                .or(l.stopping.as_ref().and_then(|s| s.counterexample()))
        })
    }
}

/// Runs the verification-condition generator over `c` with postexpectation
/// `f`, invoking the provider at each loop.
pub fn vc_check(
    provider: VcProviderId,
    t: Transformer,
    c: &Stmt,
    f: &Expectation,
    d: &FiniteDomain,
    opts: &VcOptions,
) -> Result<VcReport, VcError> {
    if provider.transformer() != t {
        return Err(VcError::Pairing { provider: provider.name(), expected: provider.transformer().name(), given: t.name() });
    }
    let c = c.desugar().map_err(WpError::from)?;
    let mut loops = Vec::new();
    collect(provider, &c, f, d, opts, String::new(), &mut loops)?;
    let mut warnings = Vec::new();
    if d.sampled() {
        warnings.push("some variables range over sample sets; results hold on the samples only".to_string());
    }
    if provider != VcProviderId::Superinv && !loops.is_empty() {
        warnings.push("termination and boundedness side conditions are established on the declared domain only".into());
    }
    let truncated = loops.iter().any(|l| {
        l.dast.as_ref().is_some_and(|r| r.truncated)
            || l.dpast.as_ref().is_some_and(|r| r.truncated)
            || l.stopping.as_ref().is_some_and(|r| r.cdb.truncated)
    });
    if truncated {
        warnings.push("runs leaving the domain were cut off and counted as terminated".into());
    }
    if loops.iter().any(|l| l.dpast.as_ref().is_some_and(|r| !r.exact)) {
        warnings.push("expected runtimes come from converged value iteration, not exact solving".into());
    }
    if loops.iter().any(|l| l.stopping.as_ref().is_some_and(|r| r.cdb.via_model)) {
        warnings.push("the difference bound of a loop with nested loops was computed on the operational model".into());
    }
    Ok(VcReport { verdict: loops.iter().all(|l| l.passed), provider, transformer: t, loops, warnings })
}

fn child(path: &str, i: usize) -> String {
    if path.is_empty() {
        i.to_string()
    } else {
        format!("{path}.{i}")
    }
}

fn collect(
    provider: VcProviderId,
    c: &Stmt,
    f: &Expectation,
    d: &FiniteDomain,
    opts: &VcOptions,
    path: String,
    out: &mut Vec<LoopRecord>,
) -> Result<(), VcError> {
    let t = provider.transformer();
    match c {
        Stmt::Skip | Stmt::Assign(..) => {}
        Stmt::Seq(a, b) => {
            let mid = wpre_raw(t, b, f)?;
            collect(provider, a, &mid, d, opts, child(&path, 1), out)?;
            collect(provider, b, f, d, opts, child(&path, 2), out)?;
        }
        Stmt::GChoice(_, a, _, b) | Stmt::PChoice(a, _, b) => {
            collect(provider, a, f, d, opts, child(&path, 1), out)?;
            collect(provider, b, f, d, opts, child(&path, 2), out)?;
        }
        Stmt::While(guard, body, inv) => {
            let location = if path.is_empty() { "0".to_string() } else { path.clone() };
            out.push(check_loop(provider, c, guard, body, inv, f, d, opts, location)?);
            collect(provider, body, inv, d, opts, child(&path, 1), out)?;
        }
        Stmt::IfElse(..) | Stmt::Uniform(..) | Stmt::Choice(..) => {
            unreachable!("programs are desugared before collection")
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_loop(
    provider: VcProviderId,
    whole: &Stmt,
    guard: &Pred,
    body: &Stmt,
    inv: &Expectation,
    f: &Expectation,
    d: &FiniteDomain,
    opts: &VcOptions,
    location: String,
) -> Result<LoopRecord, VcError> {
    let phi = char_functional(provider.transformer(), guard, body, inv, f)?;
    let mut rec = LoopRecord {
        location,
        guard: print_pred(guard),
        passed: false,
        inequality: match provider {
            VcProviderId::Superinv => le_on_domain(&phi, inv, d)?,
            _ => le_on_domain(inv, &phi, d)?,
        },
        dast: None,
        dpast: None,
        bound: None,
        stopping: None,
    };
    rec.passed = rec.inequality.holds;
    match provider {
        VcProviderId::Superinv => {}
        VcProviderId::DastSubinv => {
            let dast = check_dast(whole, d, &opts.build)?;
            let bound = max_value(&[inv, f], d)?;
            rec.passed &= dast.holds && !bound.is_infinite();
            rec.dast = Some(dast);
            rec.bound = Some(bound);
        }
        VcProviderId::DpastSubinv => {
            let dpast = check_dpast(whole, d, &opts.build, &opts.solve)?;
            let stopping = stopping::check_stopping(guard, body, inv, f, &phi, d, opts)?;
            rec.passed &= dpast.holds && stopping.holds();
            rec.dpast = Some(dpast);
            rec.stopping = Some(stopping);
        }
    }
    Ok(rec)
}

/// Largest value any of the expectations takes on the domain.
fn max_value(es: &[&Expectation], d: &FiniteDomain) -> Result<Value, VcError> {
    let mut best = Value::zero();
    check_states(d, |s| {
        for e in es {
            best = best.maximum(&e.eval(s)?);
        }
        Ok(true)
    })?;
    Ok(best)
}

/// Upper-bound check for a file: `wpre(dwp, C, f) <= g` or
/// `wpre(awp, C, f) >= g`.
pub fn check_threshold(
    t: Transformer,
    c: &Stmt,
    f: &Expectation,
    g: &Expectation,
    d: &FiniteDomain,
) -> Result<EntailmentReport, VcError> {
    let bound = wpre_raw(t, c, f)?;
    Ok(match t {
        Transformer::Dwp => le_on_domain(&bound, g, d)?,
        Transformer::Awp => le_on_domain(g, &bound, d)?,
    })
}

#[cfg(test)]
mod tests;
