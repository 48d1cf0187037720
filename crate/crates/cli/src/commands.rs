use std::path::Path;

use pgcl_core::ast::{Dir, Expectation, FiniteDomain, ProgState, Rat, Value, Var};
use pgcl_core::gen::corpus;
use pgcl_core::mdp::{
    budget_from_env, build_mdp, expected_reward, export_text, solve, BuildOptions, EscapePolicy, Mode, Objective,
    SolveOptions,
};
use pgcl_core::parser::{parse_arith, parse_expectation, parse_program, print_expectation, print_program, Direction, SourceFile};
use pgcl_core::transform::{determinize, determinize_right, implements, is_deterministic, simplify_guards, trans};
use pgcl_core::vc::{check_threshold, vc_check, LoopRecord, VcOptions, VcProviderId};
use pgcl_core::wp::{wp_exact, wpre, Transformer};
use serde::Serialize;

use crate::report::{CliError, Report, ValueEntry};
use crate::{DirectionArg, Escape, Input, ModeArg, ProviderArg, TransformerArg};

const SCOPE: &str = "results hold on the declared finite domain only";

pub struct Context {
    build: BuildOptions,
}

impl Context {
    pub fn new(escape: Escape) -> Self {
        let escape = match escape {
            Escape::Error => EscapePolicy::Error,
            Escape::Truncate => EscapePolicy::Truncate,
        };
        Context { build: BuildOptions { budget: budget_from_env(), escape } }
    }
}

struct Loaded {
    file: SourceFile,
    post: Expectation,
    name: String,
}

fn load(input: &Input) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(&input.file)
        .map_err(|e| CliError::Usage(format!("{}: {e}", input.file.display())))?;
    let file = parse_program(&text)?;
    let post = match (&input.post, &file.post) {
        (Some(p), _) => parse_expectation(p)?,
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(CliError::Usage("no postexpectation: pass --post or declare `post` in the file".into())),
    };
    Ok(Loaded { file, post, name: input.file.display().to_string() })
}

fn report_for(command: &'static str, l: &Loaded) -> Report {
    let mut r = Report::new(command, &l.name, l.file.domain.size());
    if l.file.domain.sampled() {
        r.warnings.push("some variables range over sample sets; results hold on the samples only".into());
    }
    r
}

fn initial_states(d: &FiniteDomain) -> Result<Vec<ProgState>, CliError> {
    d.initial_states().map_err(|e| CliError::Resource(e.to_string()))
}

/// Parses `x=1,y=1/2` into a state over the domain's variables.
fn parse_state(text: &str, d: &FiniteDomain) -> Result<ProgState, CliError> {
    let empty = ProgState::from_pairs([]);
    let mut vals: Vec<Option<Rat>> = vec![None; d.vars().len()];
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, val) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected `name=value`, got `{part}`")))?;
        let idx = d
            .index_of(&Var::new(name.trim()))
            .ok_or_else(|| CliError::Usage(format!("`{}` is not a declared variable", name.trim())))?;
        let v = parse_arith(val)?.eval(&empty).map_err(|e| CliError::Usage(format!("{part}: {e}")))?;
        vals[idx] = Some(v);
    }
    let vals = vals
        .into_iter()
        .zip(d.vars())
        .map(|(v, var)| v.ok_or_else(|| CliError::Usage(format!("state `{text}` gives no value for `{}`", var.name))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProgState::new(d.names().clone(), vals))
}

fn eval_at(e: &Expectation, s: &ProgState) -> Result<Value, CliError> {
    e.eval(s).map_err(|err| CliError::Resource(format!("evaluation at {s} failed: {err}")))
}

fn direction_of(arg: Option<DirectionArg>, file: &SourceFile) -> Option<Direction> {
    match arg {
        Some(DirectionArg::Upper) => Some(Direction::Upper),
        Some(DirectionArg::Lower) => Some(Direction::Lower),
        None => file.direction,
    }
}

fn transformer_of(dir: Direction) -> Transformer {
    match dir {
        Direction::Upper => Transformer::Dwp,
        Direction::Lower => Transformer::Awp,
    }
}

pub fn wp(input: &Input, t: TransformerArg, eval: &[String], all: bool) -> Result<Report, CliError> {
    let l = load(input)?;
    let (transformer, exact) = match t {
        TransformerArg::Dwp => (Transformer::Dwp, true),
        TransformerArg::Awp => (Transformer::Awp, true),
        TransformerArg::WpreDwp => (Transformer::Dwp, false),
        TransformerArg::WpreAwp => (Transformer::Awp, false),
    };
    let e = if exact {
        wp_exact(transformer, &l.file.program, &l.post)?
    } else {
        wpre(transformer, &l.file.program, &l.post)?
    };
    let mut r = report_for("wp", &l);
    r.detail("transformer", if exact { transformer.name().to_string() } else { format!("wpre-{}", transformer.name()) });
    r.detail("preexpectation", print_expectation(&e));
    let mut states = eval.iter().map(|s| parse_state(s, &l.file.domain)).collect::<Result<Vec<_>, _>>()?;
    if all {
        states.extend(initial_states(&l.file.domain)?);
    }
    for s in states {
        let v = eval_at(&e, &s)?;
        r.values.push(ValueEntry::new(s, v));
    }
    if !exact {
        r.warnings.push("loops contribute their annotated invariants; the value is a bound only where the invariants pass `check`".into());
    }
    Ok(r)
}

fn provider_of(arg: ProviderArg) -> VcProviderId {
    match arg {
        ProviderArg::Superinv => VcProviderId::Superinv,
        ProviderArg::DastSubinv => VcProviderId::DastSubinv,
        ProviderArg::DpastSubinv => VcProviderId::DpastSubinv,
    }
}

fn loop_failure(l: &LoopRecord, provider: VcProviderId) -> (Option<ProgState>, String) {
    if !l.inequality.holds {
        let rel = if provider == VcProviderId::Superinv { "Phi(I) <= I" } else { "I <= Phi(I)" };
        return (l.inequality.counterexample.clone(), format!("{rel} fails"));
    }
    if let Some(d) = l.dast.as_ref().filter(|d| !d.holds) {
        return (d.counterexample.clone(), "the loop is not almost-surely terminating under every resolution".into());
    }
    if let Some(d) = l.dpast.as_ref().filter(|d| !d.holds) {
        return (d.counterexample.clone(), "the loop has unbounded expected runtime under some resolution".into());
    }
    if let Some(s) = l.stopping.as_ref().filter(|s| !s.holds()) {
        let what = if !s.shape.holds {
            "the invariant does not equal the postexpectation where the guard fails"
        } else if !s.finite.holds {
            "the postexpectation, invariant or its image is infinite"
        } else {
            "the expected one-step change of the invariant is unbounded"
        };
        return (s.counterexample().cloned(), what.into());
    }
    if l.dast.is_some() && l.bound.is_none() {
        return (None, "the invariant or postexpectation is unbounded on the domain".into());
    }
    (None, "verification condition fails".into())
}

pub fn check(
    ctx: &Context,
    input: &Input,
    provider: Option<ProviderArg>,
    transformer: Option<TransformerArg>,
    threshold: Option<&str>,
    direction: Option<DirectionArg>,
) -> Result<Report, CliError> {
    let l = load(input)?;
    let dir = direction_of(direction, &l.file);
    let provider = match (provider.map(provider_of), dir) {
        (Some(p), Some(d)) if p.transformer() != transformer_of(d) => {
            return Err(CliError::Usage(format!(
                "provider {} bounds {} from {}, but the requested direction is {}",
                p.name(),
                p.transformer().name(),
                if p.transformer() == Transformer::Dwp { "above" } else { "below" },
                if d == Direction::Upper { "upper" } else { "lower" },
            )))
        }
        (Some(p), _) => p,
        (None, Some(Direction::Upper)) => VcProviderId::Superinv,
        (None, Some(Direction::Lower)) => VcProviderId::DastSubinv,
        (None, None) => return Err(CliError::Usage("give --provider or --direction".into())),
    };
    let t = match transformer {
        None => provider.transformer(),
        Some(TransformerArg::Dwp | TransformerArg::WpreDwp) => Transformer::Dwp,
        Some(TransformerArg::Awp | TransformerArg::WpreAwp) => Transformer::Awp,
    };
    let opts = VcOptions { build: ctx.build.clone(), ..VcOptions::default() };
    let vc = vc_check(provider, t, &l.file.program, &l.post, &l.file.domain, &opts)?;
    let mut r = report_for("check", &l);
    r.warnings.retain(|w| !vc.warnings.contains(w));
    r.warnings.extend(vc.warnings.iter().cloned());
    r.warnings.push(SCOPE.into());
    r.detail("provider", provider.name());
    r.detail("transformer", t.name());
    for lp in vc.loops.iter().filter(|l| !l.passed) {
        let (state, reason) = loop_failure(lp, provider);
        r.fail(state, Some(lp.location.clone()), reason);
    }
    let bound = wpre(t, &l.file.program, &l.post)?;
    r.detail("bound", print_expectation(&bound));
    let g = match (threshold, &l.file.threshold) {
        (Some(g), _) => Some(parse_expectation(g)?),
        (None, g) => g.clone(),
    };
    if let Some(g) = g {
        let th = check_threshold(t, &l.file.program, &l.post, &g, &l.file.domain)?;
        r.detail("threshold", print_expectation(&g));
        r.detail("threshold_holds", th.holds);
        if !th.holds {
            let rel = if t == Transformer::Dwp { "the bound exceeds the threshold" } else { "the bound is below the threshold" };
            r.fail(th.counterexample, None, rel);
        }
    }
    r.detail("loops", &vc.loops);
    for s in initial_states(&l.file.domain)? {
        let v = eval_at(&bound, &s)?;
        r.values.push(ValueEntry::new(s, v));
    }
    Ok(r)
}

/// `a ⋈ b` exactly, or up to `tol` in floating point when `tol > 0`.
fn respects(a: &Value, b: &Value, upper: bool, tol: f64) -> bool {
    let exact = if upper { a <= b } else { a >= b };
    exact
        || tol > 0.0
            && if upper { a.to_f64() <= b.to_f64() + tol } else { a.to_f64() >= b.to_f64() - tol }
}

pub fn transform(
    ctx: &Context,
    input: &Input,
    direction: Option<DirectionArg>,
    det: bool,
    right: bool,
    tolerance: f64,
) -> Result<Report, CliError> {
    let l = load(input)?;
    let dir = direction_of(direction, &l.file)
        .ok_or_else(|| CliError::Usage("give --direction or declare `direction` in the file".into()))?;
    let upper = dir == Direction::Upper;
    let t = transformer_of(dir);
    let cmp = if upper { Dir::Le } else { Dir::Ge };
    let c = &l.file.program;
    let tamed = trans(cmp, t, c, &l.post)?;
    let out = match (det, right) {
        (false, _) => tamed,
        (true, false) => determinize(&tamed),
        (true, true) => determinize_right(&tamed),
    };
    let mut r = report_for("transform", &l);
    r.warnings.push(SCOPE.into());
    let shown = print_program(&simplify_guards(&out));
    r.detail("program", &shown);
    r.text = Some(shown);
    let imp = implements(&out, c, &l.file.domain)?;
    r.detail("implements", imp.holds);
    if !imp.holds {
        r.fail(imp.counterexample.clone(), imp.locus.clone(), imp.reason.clone().unwrap_or_default());
    }
    if det {
        let d = is_deterministic(&out, &l.file.domain)?;
        r.detail("deterministic", d.holds);
        if !d.holds {
            r.fail(d.witness, d.locus, "both guards of a choice hold");
        }
    }
    let bound = wpre(t, c, &l.post)?;
    let solve = SolveOptions::default();
    let m = build_mdp(c, &l.file.domain, &ctx.build)?;
    let sub = build_mdp(&out, &l.file.domain, &ctx.build)?;
    let (best, worst) = if upper { (Mode::Min, Mode::Max) } else { (Mode::Max, Mode::Min) };
    let before = expected_reward(&m, &l.post, best, &solve)?;
    let after = expected_reward(&sub, &l.post, worst, &solve)?;
    if before.truncated || after.truncated {
        r.warnings.push("runs leaving the domain were cut off; oracle values omit their reward".into());
    }
    let tol = if after.exact { tolerance } else { tolerance.max(solve.epsilon) };
    let mut violated = None;
    for ((s, orig), (_, v)) in before.values.into_iter().zip(after.values) {
        let b = eval_at(&bound, &s)?;
        if violated.is_none() && !respects(&v, &b, upper, tol) {
            violated = Some(s.clone());
        }
        r.values.push(ValueEntry { state: s, value: v, original: Some(orig), bound: Some(b) });
    }
    if let Some(s) = violated {
        let what = if upper { "exceeds" } else { "falls below" };
        r.fail(Some(s), None, format!("some resolution of the transformed program {what} the preexpectation bound"));
    }
    if l.file.program.contains_loop() {
        r.warnings.push("with loops, the bound is guaranteed only where `check` passes".into());
    }
    Ok(r)
}

#[derive(Serialize)]
struct StrategyRow {
    config: String,
    action: String,
}

pub fn mdp(ctx: &Context, input: &Input, mode: ModeArg, export: Option<&Path>, strategy: bool) -> Result<Report, CliError> {
    let l = load(input)?;
    let m = build_mdp(&l.file.program, &l.file.domain, &ctx.build)?;
    let mode = match mode {
        ModeArg::Min => Mode::Min,
        ModeArg::Max => Mode::Max,
    };
    let sol = solve(&m, &Objective::terminal(&m, &l.post)?, mode, &SolveOptions::default())?;
    let mut r = report_for("mdp", &l);
    r.detail("mode", if mode == Mode::Min { "min" } else { "max" });
    r.detail("states", m.len());
    r.detail("exact", sol.exact);
    if m.truncated {
        r.warnings.push("runs leaving the domain were cut off; their reward is zero".into());
    }
    if !sol.exact {
        r.warnings.push("values come from converged value iteration, not exact solving".into());
    }
    for &i in &m.initial {
        r.values.push(ValueEntry::new(m.configs[i].state.clone(), sol.values[i].clone()));
    }
    if let Some(path) = export {
        std::fs::write(path, export_text(&m, &l.post)?)?;
        r.detail("export", path.display().to_string());
    }
    if strategy {
        let rows: Vec<StrategyRow> = (0..m.len())
            .filter(|&i| m.actions[i].len() > 1)
            .map(|i| StrategyRow { config: m.describe(i), action: sol.action(&m, i).to_string() })
            .collect();
        r.detail("strategy", rows);
    }
    Ok(r)
}

/// Transformers against the oracle, and the transformation laws, on seeded
/// random loop-free programs.
pub fn selftest(seed: u64, cases: usize) -> Result<Report, CliError> {
    let mut r = Report::new("selftest", "", 0);
    r.detail("seed", seed);
    r.detail("cases", cases);
    let build = BuildOptions::default();
    let solve = SolveOptions::default();
    let mut checked = 0usize;
    for case in corpus(seed, cases) {
        let fail = |r: &mut Report, s: Option<ProgState>, what: String| {
            r.fail(s, None, format!("seed {}: {what}", case.seed));
        };
        let m = build_mdp(&case.program, &case.domain, &build)?;
        for (t, mode, cmp) in [(Transformer::Dwp, Mode::Min, Dir::Le), (Transformer::Awp, Mode::Max, Dir::Ge)] {
            let w = wp_exact(t, &case.program, &case.post)?;
            for (s, v) in expected_reward(&m, &case.post, mode, &solve)?.values {
                if eval_at(&w, &s)? != v {
                    fail(&mut r, Some(s), format!("{} differs from the model", t.name()));
                }
            }
            let tamed = trans(cmp, t, &case.program, &case.post)?;
            if !implements(&tamed, &case.program, &case.domain)?.holds {
                fail(&mut r, None, format!("trans for {} is not an implementation", t.name()));
            }
            for det in [determinize(&tamed), determinize_right(&tamed)] {
                let dm = build_mdp(&det, &case.domain, &build)?;
                for (s, v) in expected_reward(&dm, &case.post, mode, &solve)?.values {
                    if eval_at(&w, &s)? != v {
                        fail(&mut r, Some(s), format!("a determinization changes {}", t.name()));
                    }
                }
            }
        }
        r.domain_size = r.domain_size.max(case.domain.size());
        checked += 1;
    }
    r.detail("checked", checked);
    Ok(r)
}
