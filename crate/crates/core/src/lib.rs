//! Verification of quantitative loop invariants and synthesis of
//! memoryless deterministic strategies for nondeterministic probabilistic
//! programs, checked against an explicit-state MDP oracle.

pub mod ast;
pub mod parser;
pub mod algebra;
pub mod wp;
pub mod vc;
pub mod mdp;
pub mod transform;
pub mod gen;
