use std::collections::HashMap;

use crate::ast::{FiniteDomain, ProgState, Stmt};

use super::{build_mdp, BuildOptions, Control, MdpError, OperationalMdp};

/// The model of an implementation viewed as a sub-model of the original.
#[derive(Clone, Debug)]
pub struct Restriction {
    /// Same configuration labels as the original model, keeping only the
    /// actions the implementation enables.
    pub mdp: OperationalMdp,
    /// Index in the original model of each state of `mdp`.
    pub embedding: Vec<usize>,
}

fn pair_subterms(imp: &Stmt, orig: &Stmt, table: &mut HashMap<Stmt, Stmt>) -> bool {
    table.entry(imp.clone()).or_insert_with(|| orig.clone());
    match (imp, orig) {
        (Stmt::Skip, Stmt::Skip) => true,
        (Stmt::Assign(x, e), Stmt::Assign(y, f)) => x == y && e == f,
        (Stmt::Seq(a, b), Stmt::Seq(c, d)) | (Stmt::GChoice(_, a, _, b), Stmt::GChoice(_, c, _, d)) => {
            pair_subterms(a, c, table) && pair_subterms(b, d, table)
        }
        (Stmt::PChoice(a, p, b), Stmt::PChoice(c, q, d)) => {
            p == q && pair_subterms(a, c, table) && pair_subterms(b, d, table)
        }
        (Stmt::While(g, a, _), Stmt::While(h, c, _)) => g == h && pair_subterms(a, c, table),
        _ => false,
    }
}

fn map_residual(s: &Stmt, table: &HashMap<Stmt, Stmt>) -> Option<Stmt> {
    if let Some(t) = table.get(s) {
        return Some(t.clone());
    }
    match s {
        Stmt::Seq(a, b) => Some(Stmt::Seq(Box::new(map_residual(a, table)?), Box::new(map_residual(b, table)?))),
        _ => None,
    }
}

/// Builds the model of `imp` and checks that it embeds into `m` state for
/// state, with each enabled action present in `m` with the same successor
/// distribution.
pub fn restrict_by_program(
    m: &OperationalMdp,
    imp: &Stmt,
    d: &FiniteDomain,
    opts: &BuildOptions,
) -> Result<Restriction, MdpError> {
    let sub = build_mdp(imp, d, opts)?;
    let mut table = HashMap::new();
    if !pair_subterms(&sub.program, &m.program, &mut table) {
        return Err(MdpError::EmbeddingMismatch("<program>".into()));
    }
    let stmt_ids: HashMap<&Stmt, u32> = m.stmts.iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
    let index: HashMap<(Control, &ProgState), usize> =
        m.configs.iter().enumerate().map(|(i, c)| ((c.control, &c.state), i)).collect();
    let mismatch = |i: usize| MdpError::EmbeddingMismatch(sub.describe(i));
    let embedding = (0..sub.len())
        .map(|i| {
            let c = &sub.configs[i];
            let control = match c.control {
                Control::Run(id) => {
                    let mapped = map_residual(&sub.stmts[id as usize], &table).ok_or_else(|| mismatch(i))?;
                    Control::Run(*stmt_ids.get(&mapped).ok_or_else(|| mismatch(i))?)
                }
                other => other,
            };
            index.get(&(control, &c.state)).copied().ok_or_else(|| mismatch(i))
        })
        .collect::<Result<Vec<usize>, MdpError>>()?;
    for (i, acts) in sub.actions.iter().enumerate() {
        for t in acts {
            let orig = m.transition(embedding[i], t.action).ok_or_else(|| mismatch(i))?;
            let mut mapped: Vec<_> = t.succ.iter().map(|(j, p)| (embedding[*j], p.clone())).collect();
            let mut expected = orig.succ.clone();
            mapped.sort();
            expected.sort();
            if mapped != expected {
                return Err(mismatch(i));
            }
        }
    }
    let initial_ok = sub.initial.iter().map(|&i| embedding[i]).eq(m.initial.iter().copied());
    if !initial_ok {
        return Err(MdpError::EmbeddingMismatch("<initial states>".into()));
    }
    let mdp = OperationalMdp {
        program: m.program.clone(),
        stmts: m.stmts.clone(),
        configs: embedding.iter().map(|&j| m.configs[j].clone()).collect(),
        initial: sub.initial.clone(),
        actions: sub.actions.clone(),
        truncated: sub.truncated,
    };
    Ok(Restriction { mdp, embedding })
}
