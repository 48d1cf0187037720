//! A passing verification condition certifies a bound that the operational
//! model must respect.

mod common;

use pgcl_core::mdp::{build_mdp, expected_reward, BuildOptions, EscapePolicy, Mode, SolveOptions};
use pgcl_core::vc::{vc_check, VcOptions, VcProviderId};
use pgcl_core::wp::wpre;

#[test]
fn passing_conditions_bound_the_oracle() {
    let build = BuildOptions { escape: EscapePolicy::Truncate, ..BuildOptions::default() };
    let opts = VcOptions { build: build.clone(), ..VcOptions::default() };
    let mut certified = 0;
    for (name, file) in common::all_fixtures() {
        let Some(post) = &file.post else { continue };
        let m = build_mdp(&file.program, &file.domain, &build).unwrap();
        for provider in [VcProviderId::Superinv, VcProviderId::DastSubinv, VcProviderId::DpastSubinv] {
            let t = provider.transformer();
            let report = vc_check(provider, t, &file.program, post, &file.domain, &opts).unwrap_or_else(|e| panic!("{name} {provider:?}: {e}"));
            if !report.verdict || report.loops.is_empty() {
                continue;
            }
            let bound = wpre(t, &file.program, post).unwrap();
            let upper = provider == VcProviderId::Superinv;
            let mode = if upper { Mode::Min } else { Mode::Max };
            let oracle = expected_reward(&m, post, mode, &SolveOptions::default()).unwrap();
            // Truncated runs earn nothing, which only weakens lower bounds.
            if !upper && oracle.truncated {
                continue;
            }
            for (s, v) in &oracle.values {
                let b = bound.eval(s).unwrap();
                if upper {
                    assert!(*v <= b || !oracle.exact && v.to_f64() <= b.to_f64() + 1e-6, "{name} {provider:?} at {s}");
                } else {
                    assert!(*v >= b || !oracle.exact && v.to_f64() >= b.to_f64() - 1e-6, "{name} {provider:?} at {s}");
                }
            }
            certified += 1;
        }
    }
    assert!(certified >= 5, "only {certified} certified bounds were compared");
}
