//! Simplification of expectations and predicates, comparison guards, and
//! quantitative entailment checked by exhaustive enumeration of a finite
//! domain.

mod entail;
mod simplify;

pub use entail::{
    check_states, eq_on_domain, le_on_domain, pred_entails, pred_equiv, pred_valid, CheckError, EntailmentReport,
};
pub use simplify::{cmp_guard, simplify, simplify_arith, simplify_pred};
