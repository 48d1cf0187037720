use std::fmt::Write;

use crate::ast::{fmt_rat, Expectation};

use super::{MdpError, Objective, OperationalMdp};

/// Plain-text dump of the model:
///
/// ```text
/// states <n>
/// state <i> <description>
/// init <i>
/// <src> <action> <prob> <dst>
/// target <i>
/// reward <i> <value>
/// ```
///
/// Targets are terminated configurations; `reward` lines give the value of
/// `f` there. Truncated sinks appear as ordinary self-looping states.
pub fn export_text(m: &OperationalMdp, f: &Expectation) -> Result<String, MdpError> {
    let obj = Objective::terminal(m, f)?;
    let mut out = String::new();
    let _ = writeln!(out, "states {}", m.len());
    for i in 0..m.len() {
        let _ = writeln!(out, "state {i} {}", m.describe(i));
    }
    for &i in &m.initial {
        let _ = writeln!(out, "init {i}");
    }
    for (i, acts) in m.actions.iter().enumerate() {
        for t in acts {
            for (j, p) in &t.succ {
                let _ = writeln!(out, "{i} {} {} {j}", t.action, fmt_rat(p));
            }
        }
    }
    for i in (0..m.len()).filter(|&i| m.is_terminated(i)) {
        let _ = writeln!(out, "target {i}");
        if let Some(v) = &obj.fixed[i] {
            let _ = writeln!(out, "reward {i} {v}");
        }
    }
    Ok(out)
}
