//! Qualitative graph algorithms on the explicit model.

use std::collections::VecDeque;

use super::OperationalMdp;

/// Largest set of non-`stop` states from which some choice of enabled
/// actions keeps every run inside the set forever.
pub fn can_avoid_surely(m: &OperationalMdp, stop: &[bool], allowed: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let n = m.len();
    let mut z: Vec<bool> = (0..n).map(|s| !stop[s]).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !z[s] {
                continue;
            }
            let keep = m.actions[s]
                .iter()
                .enumerate()
                .any(|(a, t)| allowed(s, a) && t.succ.iter().all(|&(j, _)| z[j]));
            if !keep {
                z[s] = false;
                changed = true;
            }
        }
        if !changed {
            return z;
        }
    }
}

/// Predecessor lists: for each state, the states with an allowed action
/// that reaches it with positive probability.
pub fn predecessors(m: &OperationalMdp, allowed: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut pre = vec![Vec::new(); m.len()];
    for (s, acts) in m.actions.iter().enumerate() {
        for (a, t) in acts.iter().enumerate() {
            if allowed(s, a) {
                for &(j, _) in &t.succ {
                    pre[j].push(s);
                }
            }
        }
    }
    for p in &mut pre {
        p.sort_unstable();
        p.dedup();
    }
    pre
}

/// States that reach `goal` with positive probability under some choice of
/// allowed actions, moving only through states not in `blocked`.
pub fn can_reach(
    m: &OperationalMdp,
    goal: &[bool],
    blocked: &[bool],
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<bool> {
    let pre = predecessors(m, allowed);
    let mut seen = goal.to_vec();
    let mut queue: VecDeque<usize> = (0..m.len()).filter(|&s| goal[s]).collect();
    while let Some(s) = queue.pop_front() {
        for &p in &pre[s] {
            if !seen[p] && !blocked[p] {
                seen[p] = true;
                queue.push_back(p);
            }
        }
    }
    seen
}
