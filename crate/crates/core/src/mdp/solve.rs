//! Minimal and maximal expected reachability rewards.
//!
//! States are processed one strongly connected component at a time, in
//! reverse topological order. Acyclic parts get an exact rational backup.
//! Cyclic components are first approximated by value iteration from zero;
//! the induced policy is then evaluated exactly and accepted only if no
//! action improves on it, otherwise the approximate values are kept and the
//! result is marked inexact.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{ToPrimitive, Zero};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::ast::{Expectation, ProgState, Rat, Value};

use super::graph::{can_avoid_surely, can_reach};
use super::linsolve::solve_sparse;
use super::{Action, Control, MdpError, OperationalMdp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Min,
    Max,
}

/// Reward structure: absorbing states carry a fixed value, every other state
/// earns `step` per transition taken from it.
#[derive(Clone, Debug)]
pub struct Objective {
    pub fixed: Vec<Option<Value>>,
    pub step: Vec<Rat>,
}

impl Objective {
    /// Collect `f` on termination; truncated runs earn nothing.
    pub fn terminal(m: &OperationalMdp, f: &Expectation) -> Result<Self, MdpError> {
        let fixed = m
            .configs
            .iter()
            .map(|c| match c.control {
                Control::Done => {
                    f.eval(&c.state).map(Some).map_err(|source| MdpError::Eval { state: c.state.clone(), source })
                }
                Control::Truncated => Ok(Some(Value::zero())),
                Control::Run(_) => Ok(None),
            })
            .collect::<Result<_, _>>()?;
        Ok(Objective { fixed, step: vec![Rat::zero(); m.len()] })
    }

    /// One unit per transition until termination or truncation.
    pub fn steps(m: &OperationalMdp) -> Self {
        Objective::counting(m, |_| true)
    }

    /// One unit per transition taken from a running state selected by `count`.
    pub fn counting(m: &OperationalMdp, count: impl Fn(usize) -> bool) -> Self {
        let fixed = m
            .configs
            .iter()
            .map(|c| (!matches!(c.control, Control::Run(_))).then(Value::zero))
            .collect();
        let step = (0..m.len()).map(|s| if count(s) { Rat::from_integer(1.into()) } else { Rat::zero() }).collect();
        Objective { fixed, step }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Convergence threshold on the sup-norm update of value iteration.
    pub epsilon: f64,
    pub max_sweeps: usize,
    /// Largest cyclic component that is re-solved exactly.
    pub exact_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { epsilon: 1e-9, max_sweeps: 200_000, exact_limit: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<Value>,
    /// Index into `actions[s]` of the chosen action.
    pub strategy: Vec<usize>,
    pub exact: bool,
    pub sweeps: usize,
}

impl Solution {
    pub fn action(&self, m: &OperationalMdp, s: usize) -> Action {
        m.actions[s][self.strategy[s]].action
    }
}

/// Values at the initial states.
#[derive(Clone, Debug, Serialize)]
pub struct ValueResult {
    pub values: Vec<(ProgState, Value)>,
    pub exact: bool,
    pub epsilon: f64,
    pub iterations: usize,
    pub truncated: bool,
}

/// Action index, constant part and successors within the component.
type LocalAction = (usize, f64, Vec<(usize, f64)>);

fn q_exact(m: &OperationalMdp, obj: &Objective, s: usize, a: usize, val: &[Option<Value>]) -> Value {
    let mut acc = Value::Finite(obj.step[s].clone());
    for (j, p) in &m.actions[s][a].succ {
        let v = val[*j].as_ref().expect("successor solved before predecessor");
        acc = acc.add(&Value::Finite(p.clone()).mul(v));
    }
    acc
}

fn better(mode: Mode, a: &Value, b: &Value) -> bool {
    match mode {
        Mode::Min => a < b,
        Mode::Max => a > b,
    }
}

struct Solver<'a> {
    m: &'a OperationalMdp,
    obj: &'a Objective,
    mode: Mode,
    opts: &'a SolveOptions,
    allowed: Vec<Vec<bool>>,
    val: Vec<Option<Value>>,
    strat: Vec<usize>,
    exact: bool,
    sweeps: usize,
}

impl Solver<'_> {
    fn allowed_actions(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.m.actions[s].len()).filter(move |&a| self.allowed[s][a])
    }

    fn backup_exact(&mut self, s: usize) {
        let mut best: Option<(usize, Value)> = None;
        for a in self.allowed_actions(s).collect::<Vec<_>>() {
            let q = q_exact(self.m, self.obj, s, a, &self.val);
            if best.as_ref().is_none_or(|(_, b)| better(self.mode, &q, b)) {
                best = Some((a, q));
            }
        }
        let (a, v) = best.expect("every state keeps an allowed action");
        self.val[s] = Some(v);
        self.strat[s] = a;
    }

    fn solve_cyclic(&mut self, comp: &[usize]) {
        let pos: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        // Per local state and allowed action: (action index, constant part, local successors).
        let local: Vec<Vec<LocalAction>> = comp
            .iter()
            .map(|&s| {
                self.allowed_actions(s)
                    .map(|a| {
                        let mut c = self.obj.step[s].to_f64().unwrap_or(f64::INFINITY);
                        let mut inner = Vec::new();
                        for (j, p) in &self.m.actions[s][a].succ {
                            let pf = p.to_f64().unwrap_or(0.0);
                            match pos.get(j) {
                                Some(&k) => inner.push((k, pf)),
                                None => c += pf * self.val[*j].as_ref().expect("solved").to_f64(),
                            }
                        }
                        (a, c, inner)
                    })
                    .collect()
            })
            .collect();
        let q = |x: &[f64], acts: &LocalAction| acts.1 + acts.2.iter().map(|(k, p)| p * x[*k]).sum::<f64>();
        let pick = |qs: &mut dyn Iterator<Item = f64>| -> f64 {
            match self.mode {
                Mode::Min => qs.fold(f64::INFINITY, f64::min),
                Mode::Max => qs.fold(f64::NEG_INFINITY, f64::max),
            }
        };
        let mut x = vec![0.0f64; comp.len()];
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut delta: f64 = 0.0;
            for k in 0..comp.len() {
                let new = pick(&mut local[k].iter().map(|acts| q(&x, acts)));
                let d = (new - x[k]).abs();
                if d.is_finite() {
                    delta = delta.max(d / x[k].abs().max(1.0));
                } else if new != x[k] {
                    delta = f64::INFINITY;
                }
                x[k] = new;
            }
            if delta < self.opts.epsilon || sweeps >= self.opts.max_sweeps {
                break;
            }
        }
        self.sweeps += sweeps;

        // Policy from the approximate values.
        let tol = |v: f64| 1e-7 * v.abs().max(1.0);
        let mut policy: Vec<usize> = vec![0; comp.len()];
        match self.mode {
            Mode::Min => {
                for k in 0..comp.len() {
                    let best = pick(&mut local[k].iter().map(|acts| q(&x, acts)));
                    let choice = local[k].iter().position(|acts| q(&x, acts) <= best + tol(best)).unwrap_or(0);
                    policy[k] = choice;
                }
            }
            Mode::Max => {
                // Among near-optimal actions prefer those that move closer to
                // leaving the component, so that the policy cannot cycle.
                let near: Vec<Vec<bool>> = (0..comp.len())
                    .map(|k| {
                        let best = pick(&mut local[k].iter().map(|acts| q(&x, acts)));
                        local[k].iter().map(|acts| q(&x, acts) >= best - tol(best)).collect()
                    })
                    .collect();
                let leaks = |k: usize, i: usize| {
                    let s = comp[k];
                    let a = local[k][i].0;
                    self.m.actions[s][a].succ.iter().any(|(j, _)| !pos.contains_key(j))
                };
                let mut rank = vec![usize::MAX; comp.len()];
                let mut preds: Vec<Vec<usize>> = vec![Vec::new(); comp.len()];
                let mut queue = VecDeque::new();
                for k in 0..comp.len() {
                    for (i, acts) in local[k].iter().enumerate() {
                        if !near[k][i] {
                            continue;
                        }
                        if leaks(k, i) && rank[k] == usize::MAX {
                            rank[k] = 0;
                            policy[k] = i;
                            queue.push_back(k);
                        }
                        for (j, _) in &acts.2 {
                            preds[*j].push(k);
                        }
                    }
                }
                while let Some(j) = queue.pop_front() {
                    for &k in &preds[j] {
                        if rank[k] != usize::MAX {
                            continue;
                        }
                        let i = (0..local[k].len())
                            .find(|&i| near[k][i] && local[k][i].2.iter().any(|(t, _)| *t == j))
                            .expect("predecessor edge");
                        rank[k] = rank[j] + 1;
                        policy[k] = i;
                        queue.push_back(k);
                    }
                }
                for k in 0..comp.len() {
                    if rank[k] == usize::MAX {
                        policy[k] = near[k].iter().position(|&b| b).unwrap_or(0);
                    }
                }
            }
        }

        if comp.len() <= self.opts.exact_limit {
            if let Some(vals) = self.evaluate_exactly(comp, &pos, &local, &mut policy) {
                for (k, &s) in comp.iter().enumerate() {
                    self.val[s] = Some(vals[k].clone());
                    self.strat[s] = local[k][policy[k]].0;
                }
                return;
            }
        }
        self.exact = false;
        for (k, &s) in comp.iter().enumerate() {
            self.val[s] = Some(Value::from_f64(x[k]));
            self.strat[s] = local[k][policy[k]].0;
        }
    }

    /// Policy evaluation in exact arithmetic followed by improvement rounds.
    /// Returns values only once no allowed action improves on the policy.
    fn evaluate_exactly(
        &self,
        comp: &[usize],
        pos: &BTreeMap<usize, usize>,
        local: &[Vec<LocalAction>],
        policy: &mut [usize],
    ) -> Option<Vec<Value>> {
        const ROUNDS: usize = 50;
        for _ in 0..ROUNDS {
            let n = comp.len();
            // Local states whose policy chain can leave the component.
            let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut leaving = vec![false; n];
            let mut queue = VecDeque::new();
            for k in 0..n {
                let s = comp[k];
                let a = local[k][policy[k]].0;
                for (j, _) in &self.m.actions[s][a].succ {
                    match pos.get(j) {
                        Some(&t) => preds[t].push(k),
                        None => leaving[k] = true,
                    }
                }
                if leaving[k] {
                    queue.push_back(k);
                }
            }
            while let Some(t) = queue.pop_front() {
                for &k in &preds[t] {
                    if !leaving[k] {
                        leaving[k] = true;
                        queue.push_back(k);
                    }
                }
            }
            if (0..n).any(|k| !leaving[k] && !self.obj.step[comp[k]].is_zero()) {
                return None;
            }
            let idx: Vec<usize> = (0..n).filter(|&k| leaving[k]).collect();
            let row_of: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(r, &k)| (k, r)).collect();
            let mut rows = Vec::with_capacity(idx.len());
            let mut rhs = Vec::with_capacity(idx.len());
            for &k in &idx {
                let s = comp[k];
                let a = local[k][policy[k]].0;
                let mut row: BTreeMap<usize, Rat> = BTreeMap::new();
                *row.entry(row_of[&k]).or_insert_with(Rat::zero) += Rat::from_integer(1.into());
                let mut b = self.obj.step[s].clone();
                for (j, p) in &self.m.actions[s][a].succ {
                    match pos.get(j) {
                        Some(t) => {
                            if let Some(&r) = row_of.get(t) {
                                *row.entry(r).or_insert_with(Rat::zero) -= p;
                            }
                        }
                        None => match self.val[*j].as_ref().expect("solved") {
                            Value::Finite(v) => b += p * v,
                            Value::Infinity => return None,
                        },
                    }
                }
                row.retain(|_, v| !v.is_zero());
                rows.push(row);
                rhs.push(b);
            }
            let sol = solve_sparse(rows, rhs)?;
            let mut vals = vec![Value::zero(); n];
            for (r, &k) in idx.iter().enumerate() {
                vals[k] = Value::Finite(sol[r].clone());
            }
            let mut improved = false;
            for k in 0..n {
                let s = comp[k];
                for (i, &(a, _, _)) in local[k].iter().enumerate() {
                    let mut q = Value::Finite(self.obj.step[s].clone());
                    for (j, p) in &self.m.actions[s][a].succ {
                        let v = match pos.get(j) {
                            Some(&t) => vals[t].clone(),
                            None => self.val[*j].clone().expect("solved"),
                        };
                        q = q.add(&Value::Finite(p.clone()).mul(&v));
                    }
                    if better(self.mode, &q, &vals[k]) && i != policy[k] {
                        policy[k] = i;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                return Some(vals);
            }
        }
        None
    }
}

/// Solves the objective for every state of the model.
pub fn solve(m: &OperationalMdp, obj: &Objective, mode: Mode, opts: &SolveOptions) -> Result<Solution, MdpError> {
    let n = m.len();
    let fixed: Vec<bool> = obj.fixed.iter().map(Option::is_some).collect();
    let has_steps = (0..n).any(|s| !fixed[s] && !obj.step[s].is_zero());
    if has_steps && mode == Mode::Min {
        return Err(MdpError::Unsupported("minimal step rewards are not supported"));
    }
    let mut allowed: Vec<Vec<bool>> = m.actions.iter().map(|a| vec![true; a.len()]).collect();
    let inf_target: Vec<bool> = obj.fixed.iter().map(|v| matches!(v, Some(Value::Infinity))).collect();

    // States with infinite optimal value.
    let inf: Vec<bool> = match mode {
        Mode::Max => {
            let mut goal = inf_target.clone();
            if has_steps {
                let forever = can_avoid_surely(m, &fixed, |_, _| true);
                for s in 0..n {
                    goal[s] |= forever[s];
                }
            }
            can_reach(m, &goal, &vec![false; n], |_, _| true)
        }
        Mode::Min => {
            if inf_target.iter().any(|&b| b) {
                let safe = can_avoid_surely(m, &inf_target, |_, _| true);
                for (row, acts) in allowed.iter_mut().zip(&m.actions) {
                    for (a, t) in acts.iter().enumerate() {
                        row[a] = t.succ.iter().all(|(j, _)| safe[*j]);
                    }
                }
                safe.iter().map(|b| !b).collect()
            } else {
                vec![false; n]
            }
        }
    };

    let mut val: Vec<Option<Value>> = obj.fixed.clone();
    let mut strat = vec![0usize; n];
    for s in 0..n {
        if inf[s] && !fixed[s] {
            val[s] = Some(Value::Infinity);
        }
    }

    // Under minimization, states that can avoid every positive reward forever
    // have value zero.
    if mode == Mode::Min {
        let stop: Vec<bool> = (0..n)
            .map(|s| inf[s] || matches!(&obj.fixed[s], Some(v) if !v.is_zero()))
            .collect();
        let zero = can_avoid_surely(m, &stop, |s, a| allowed[s][a]);
        for s in 0..n {
            if zero[s] && !fixed[s] {
                val[s] = Some(Value::zero());
                strat[s] = (0..m.actions[s].len())
                    .find(|&a| allowed[s][a] && m.actions[s][a].succ.iter().all(|(j, _)| zero[*j]))
                    .expect("greatest fixpoint keeps a witness action");
            }
        }
    }

    // Remaining states, solved component by component.
    let open: Vec<bool> = val.iter().map(Option::is_none).collect();
    let mut graph: DiGraph<usize, ()> = DiGraph::new();
    let mut node = vec![NodeIndex::end(); n];
    for s in (0..n).filter(|&s| open[s]) {
        node[s] = graph.add_node(s);
    }
    let mut self_loop = vec![false; n];
    for s in (0..n).filter(|&s| open[s]) {
        for (a, t) in m.actions[s].iter().enumerate() {
            if !allowed[s][a] {
                continue;
            }
            for (j, _) in &t.succ {
                if open[*j] {
                    graph.add_edge(node[s], node[*j], ());
                    self_loop[s] |= *j == s;
                }
            }
        }
    }
    let mut solver = Solver { m, obj, mode, opts, allowed, val, strat, exact: true, sweeps: 0 };
    for comp in petgraph::algo::tarjan_scc(&graph) {
        let states: Vec<usize> = comp.iter().map(|&ix| graph[ix]).collect();
        if states.len() == 1 && !self_loop[states[0]] {
            solver.backup_exact(states[0]);
        } else {
            let mut states = states;
            states.sort_unstable();
            solver.solve_cyclic(&states);
        }
    }
    Ok(Solution {
        values: solver.val.into_iter().map(|v| v.expect("every state solved")).collect(),
        strategy: solver.strat,
        exact: solver.exact,
        sweeps: solver.sweeps,
    })
}

/// Optimal expected value of `f` on termination, per initial state.
pub fn expected_reward(
    m: &OperationalMdp,
    f: &Expectation,
    mode: Mode,
    opts: &SolveOptions,
) -> Result<ValueResult, MdpError> {
    let sol = solve(m, &Objective::terminal(m, f)?, mode, opts)?;
    Ok(ValueResult {
        values: m.initial.iter().map(|&s| (m.configs[s].state.clone(), sol.values[s].clone())).collect(),
        exact: sol.exact,
        epsilon: opts.epsilon,
        iterations: sol.sweeps,
        truncated: m.truncated,
    })
}

/// An optimal memoryless deterministic strategy, one action per state.
pub fn extract_strategy(
    m: &OperationalMdp,
    f: &Expectation,
    mode: Mode,
    opts: &SolveOptions,
) -> Result<Vec<Action>, MdpError> {
    let sol = solve(m, &Objective::terminal(m, f)?, mode, opts)?;
    Ok((0..m.len()).map(|s| sol.action(m, s)).collect())
}
