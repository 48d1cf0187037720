use std::collections::HashMap;
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::ast::{fmt_rat, ArithExpr, EvalError, FiniteDomain, Pred, ProgState, Rat, Stmt, Var};
use crate::parser::{print_arith, print_program};

use super::{Action, Config, Control, MdpError, OperationalMdp, Transition};

/// What to do when an assignment leaves the declared domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EscapePolicy {
    #[default]
    Error,
    /// Route the run into an absorbing sink that earns no reward.
    Truncate,
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub budget: usize,
    pub escape: EscapePolicy,
}

pub const DEFAULT_BUDGET: usize = 2_000_000;

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { budget: DEFAULT_BUDGET, escape: EscapePolicy::Error }
    }
}

/// Transition shape of one interned statement, independent of the state.
/// Successor statements are interned once, when the template is built.
enum Template {
    /// `skip`, or an assignment when `assign` is set; continues at `then`.
    Step { assign: Option<(usize, ArithExpr)>, then: Control },
    Choice { g1: Pred, a: Control, g2: Pred, b: Control },
    /// `same` marks branches with identical residuals.
    Prob { p: ArithExpr, a: Control, b: Control, same: bool },
    Loop { guard: Pred, enter: Control },
}

/// Like [`Template`], with successors as residual statements (`None` for
/// termination).
#[allow(clippy::large_enum_variant)]
enum Shape {
    Step(Option<(Var, ArithExpr)>, Option<Stmt>),
    Choice(Pred, Option<Stmt>, Pred, Option<Stmt>),
    Prob(ArithExpr, Option<Stmt>, Option<Stmt>),
    Loop(Pred, Option<Stmt>),
}

fn shape(s: &Stmt) -> Result<Shape, MdpError> {
    let run = |s: &Stmt| Some(s.clone());
    Ok(match s {
        Stmt::Skip => Shape::Step(None, None),
        Stmt::Assign(x, e) => Shape::Step(Some((x.clone(), e.clone())), None),
        Stmt::Seq(a, b) => {
            let k = |n: Option<Stmt>| match n {
                None => Some((**b).clone()),
                Some(a2) => Some(Stmt::Seq(Box::new(a2), b.clone())),
            };
            match shape(a)? {
                Shape::Step(asg, n) => Shape::Step(asg, k(n)),
                Shape::Choice(g1, x, g2, y) => Shape::Choice(g1, k(x), g2, k(y)),
                Shape::Prob(p, x, y) => Shape::Prob(p, k(x), k(y)),
                Shape::Loop(g, n) => Shape::Loop(g, k(n)),
            }
        }
        Stmt::GChoice(g1, a, g2, b) => Shape::Choice(g1.clone(), run(a), g2.clone(), run(b)),
        Stmt::PChoice(a, p, b) => Shape::Prob(p.clone(), run(a), run(b)),
        Stmt::While(g, body, _) => Shape::Loop(g.clone(), Some(Stmt::Seq(body.clone(), Box::new(s.clone())))),
        Stmt::IfElse(..) | Stmt::Uniform(..) | Stmt::Choice(..) => shape(&s.desugar()?)?,
    })
}

type Dist = Vec<(Control, ProgState, Rat)>;

struct Builder<'a> {
    domain: &'a FiniteDomain,
    opts: &'a BuildOptions,
    stmt_ids: HashMap<Stmt, u32>,
    stmts: Vec<Stmt>,
    templates: Vec<Option<Rc<Template>>>,
    index: HashMap<(Control, ProgState), usize>,
    configs: Vec<Config>,
    truncated: bool,
}

fn eval_err(state: &ProgState) -> impl FnOnce(EvalError) -> MdpError + '_ {
    move |source| MdpError::Eval { state: state.clone(), source }
}

impl<'a> Builder<'a> {
    fn control(&mut self, next: Option<Stmt>) -> Control {
        let Some(s) = next else { return Control::Done };
        if let Some(&id) = self.stmt_ids.get(&s) {
            return Control::Run(id);
        }
        let id = self.stmts.len() as u32;
        self.stmts.push(s.clone());
        self.templates.push(None);
        self.stmt_ids.insert(s, id);
        Control::Run(id)
    }

    fn template(&mut self, id: u32) -> Result<Rc<Template>, MdpError> {
        if let Some(t) = &self.templates[id as usize] {
            return Ok(t.clone());
        }
        let t = match shape(&self.stmts[id as usize])? {
            Shape::Step(asg, n) => {
                let assign = match asg {
                    Some((x, e)) => {
                        let idx = self.domain.index_of(&x).ok_or(MdpError::Undeclared(x))?;
                        Some((idx, e))
                    }
                    None => None,
                };
                Template::Step { assign, then: self.control(n) }
            }
            Shape::Choice(g1, x, g2, y) => {
                let (a, b) = (self.control(x), self.control(y));
                Template::Choice { g1, a, g2, b }
            }
            Shape::Prob(p, x, y) => {
                let same = x == y;
                let (a, b) = (self.control(x), self.control(y));
                Template::Prob { p, a, b, same }
            }
            Shape::Loop(guard, n) => Template::Loop { guard, enter: self.control(n) },
        };
        let t = Rc::new(t);
        self.templates[id as usize] = Some(t.clone());
        Ok(t)
    }

    fn intern(&mut self, control: Control, state: ProgState) -> Result<usize, MdpError> {
        let key = (control, state);
        if let Some(&i) = self.index.get(&key) {
            return Ok(i);
        }
        if self.configs.len() >= self.opts.budget {
            return Err(MdpError::BudgetExceeded(self.opts.budget));
        }
        let i = self.configs.len();
        self.configs.push(Config { control: key.0, state: key.1.clone() });
        self.index.insert(key, i);
        Ok(i)
    }

    fn step(&self, id: u32, t: &Template, st: &ProgState) -> Result<Vec<(Action, Dist)>, MdpError> {
        let one = Rat::one;
        let current = || head(&self.stmts[id as usize]);
        Ok(match t {
            Template::Step { assign: None, then } => vec![(Action::Tau, vec![(*then, st.clone(), one())])],
            Template::Step { assign: Some((idx, e)), then } => {
                let v = e.eval(st).map_err(eval_err(st))?;
                if self.domain.contains(*idx, &v) {
                    let mut next = st.clone();
                    next.set_index(*idx, v);
                    vec![(Action::Tau, vec![(*then, next, one())])]
                } else if self.opts.escape == EscapePolicy::Truncate {
                    vec![(Action::Tau, vec![(Control::Truncated, st.clone(), one())])]
                } else {
                    return Err(MdpError::DomainEscape {
                        state: st.clone(),
                        var: self.domain.vars()[*idx].name.clone(),
                        value: fmt_rat(&v),
                        stmt: print_program(current()),
                    });
                }
            }
            Template::Choice { g1, a, g2, b } => {
                let mut out = Vec::new();
                if g1.eval(st).map_err(eval_err(st))? {
                    out.push((Action::Alpha, vec![(*a, st.clone(), one())]));
                }
                if g2.eval(st).map_err(eval_err(st))? {
                    out.push((Action::Beta, vec![(*b, st.clone(), one())]));
                }
                if out.is_empty() {
                    return Err(MdpError::NoEnabledBranch { state: st.clone(), stmt: print_program(current()) });
                }
                out
            }
            Template::Prob { same: true, a, .. } => vec![(Action::Tau, vec![(*a, st.clone(), one())])],
            Template::Prob { p, a, b, .. } => {
                let pv = p.eval(st).map_err(eval_err(st))?;
                if pv < Rat::zero() || pv > one() {
                    return Err(MdpError::Probability { expr: print_arith(p), value: fmt_rat(&pv), state: st.clone() });
                }
                let mut dist = Vec::new();
                let q = one() - &pv;
                if !pv.is_zero() {
                    dist.push((*a, st.clone(), pv));
                }
                if !q.is_zero() {
                    dist.push((*b, st.clone(), q));
                }
                vec![(Action::Tau, dist)]
            }
            Template::Loop { guard, enter } => {
                let next = if guard.eval(st).map_err(eval_err(st))? { *enter } else { Control::Done };
                vec![(Action::Tau, vec![(next, st.clone(), one())])]
            }
        })
    }

    fn transitions(&mut self, i: usize) -> Result<Vec<Transition>, MdpError> {
        let (control, state) = (self.configs[i].control, self.configs[i].state.clone());
        let step = match control {
            Control::Done | Control::Truncated => {
                return Ok(vec![Transition { action: Action::Tau, succ: vec![(i, Rat::one())] }]);
            }
            Control::Run(id) => {
                let t = self.template(id)?;
                self.step(id, &t, &state)?
            }
        };
        let mut out = Vec::with_capacity(step.len());
        for (action, dist) in step {
            let mut succ: Vec<(usize, Rat)> = Vec::with_capacity(dist.len());
            for (c, st, p) in dist {
                if c == Control::Truncated {
                    self.truncated = true;
                }
                let j = self.intern(c, st)?;
                match succ.iter_mut().find(|(k, _)| *k == j) {
                    Some((_, q)) => *q += p,
                    None => succ.push((j, p)),
                }
            }
            out.push(Transition { action, succ });
        }
        Ok(out)
    }
}

/// The statement executed next: the leftmost leaf of a sequence.
fn head(s: &Stmt) -> &Stmt {
    match s {
        Stmt::Seq(a, _) => head(a),
        other => other,
    }
}

/// Explores the operational MDP breadth-first from every initial state of
/// the domain.
pub fn build_mdp(c: &Stmt, d: &FiniteDomain, opts: &BuildOptions) -> Result<OperationalMdp, MdpError> {
    let program = c.desugar()?;
    let mut b = Builder {
        domain: d,
        opts,
        stmt_ids: HashMap::new(),
        stmts: Vec::new(),
        templates: Vec::new(),
        index: HashMap::new(),
        configs: Vec::new(),
        truncated: false,
    };
    let mut initial = Vec::new();
    for st in d.initial_states()? {
        let c = b.control(Some(program.clone()));
        initial.push(b.intern(c, st)?);
    }
    let mut actions = Vec::new();
    let mut next = 0;
    while next < b.configs.len() {
        actions.push(b.transitions(next)?);
        next += 1;
    }
    Ok(OperationalMdp {
        program,
        stmts: b.stmts,
        configs: b.configs,
        initial,
        actions,
        truncated: b.truncated,
    })
}

/// Reads the state budget from `PGCL_STATE_BUDGET`, falling back to the
/// default.
pub fn budget_from_env() -> usize {
    std::env::var("PGCL_STATE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}
