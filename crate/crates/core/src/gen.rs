//! Seeded random loop-free programs over small domains, used to compare the
//! symbolic transformers against the operational model.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{ratio, rat, ArithExpr, CmpOp, Expectation, FiniteDomain, Pred, Stmt, Var, VarDomain};

/// A program together with the domain it stays inside and a postexpectation.
#[derive(Clone, Debug)]
pub struct GenCase {
    pub seed: u64,
    pub program: Stmt,
    pub domain: FiniteDomain,
    pub post: Expectation,
}

pub const MAX_DEPTH: u32 = 5;
const NAMES: [&str; 3] = ["x", "y", "z"];

struct Gen {
    rng: ChaCha8Rng,
    /// Variable names with their domain sizes; values are `0..size`.
    vars: Vec<(Var, i64)>,
}

impl Gen {
    fn var(&mut self) -> (Var, i64) {
        self.vars.choose(&mut self.rng).cloned().expect("at least one variable")
    }

    fn small_const(&mut self) -> ArithExpr {
        ArithExpr::Const(rat(self.rng.gen_range(0..4)))
    }

    fn arith(&mut self, depth: u32) -> ArithExpr {
        let b = Box::new;
        if depth == 0 || self.rng.gen_bool(0.4) {
            return if self.rng.gen_bool(0.6) { ArithExpr::Var(self.var().0) } else { self.small_const() };
        }
        let (l, r) = (self.arith(depth - 1), self.arith(depth - 1));
        match self.rng.gen_range(0..3) {
            0 => ArithExpr::Add(b(l), b(r)),
            1 => ArithExpr::Monus(b(l), b(r)),
            _ => ArithExpr::Mul(b(l), b(r)),
        }
    }

    fn pred(&mut self, depth: u32) -> Pred {
        if depth == 0 || self.rng.gen_bool(0.5) {
            let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
                .choose(&mut self.rng)
                .expect("non-empty");
            return Pred::Cmp(self.arith(1), op, self.arith(1));
        }
        match self.rng.gen_range(0..4) {
            0 => Pred::and(self.pred(depth - 1), self.pred(depth - 1)),
            1 => Pred::or(self.pred(depth - 1), self.pred(depth - 1)),
            2 => Pred::not(self.pred(depth - 1)),
            _ => Pred::True,
        }
    }

    /// A value inside the domain of a variable of size `n`.
    fn in_range(&mut self, n: i64) -> ArithExpr {
        ArithExpr::Mod(Box::new(self.arith(1)), Box::new(ArithExpr::Const(rat(n))))
    }

    fn prob(&mut self) -> ArithExpr {
        if self.rng.gen_bool(0.75) {
            let (num, den) = *[(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (1, 1)].choose(&mut self.rng).expect("non-empty");
            ArithExpr::Const(ratio(num, den))
        } else {
            let (v, n) = self.var();
            ArithExpr::Div(Box::new(ArithExpr::Var(v)), Box::new(ArithExpr::Const(rat(n))))
        }
    }

    fn stmt(&mut self, depth: u32) -> Stmt {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.atom();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..5) {
            0 | 1 => Stmt::seq(self.stmt(d), self.stmt(d)),
            2 => {
                let p = self.prob();
                Stmt::pchoice(self.stmt(d), p, self.stmt(d))
            }
            3 => {
                // The second guard covers every state the first one misses.
                let g1 = self.pred(2);
                let g2 = if self.rng.gen_bool(0.3) { Pred::True } else { Pred::or(self.pred(1), Pred::not(g1.clone())) };
                Stmt::gchoice(g1, self.stmt(d), g2, self.stmt(d))
            }
            _ => Stmt::IfElse(self.pred(2), Box::new(self.stmt(d)), Box::new(self.stmt(d))),
        }
    }

    fn atom(&mut self) -> Stmt {
        let (v, n) = self.var();
        match self.rng.gen_range(0..6) {
            0 => Stmt::Skip,
            1 => {
                let k = self.rng.gen_range(2..=3);
                Stmt::Uniform(v, (0..k).map(|_| self.in_range(n)).collect())
            }
            _ => Stmt::Assign(v, self.in_range(n)),
        }
    }

    fn expectation(&mut self, depth: u32) -> Expectation {
        let b = Box::new;
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Expectation::from(&self.arith(1));
        }
        let d = depth - 1;
        match self.rng.gen_range(0..5) {
            0 => Expectation::Add(b(self.expectation(d)), b(self.expectation(d))),
            1 => Expectation::Mul(b(self.expectation(d)), b(self.expectation(d))),
            2 => Expectation::Min(b(self.expectation(d)), b(self.expectation(d))),
            3 => Expectation::Max(b(self.expectation(d)), b(self.expectation(d))),
            _ => Expectation::Mul(b(Expectation::Iverson(Box::new(self.pred(1)))), b(self.expectation(d))),
        }
    }
}

/// Deterministically generates one case from `seed`: one to three variables
/// with two to four values each, a program of depth at most [`MAX_DEPTH`]
/// whose assignments stay in range, and a finite postexpectation.
pub fn random_case(seed: u64) -> GenCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nvars = rng.gen_range(1..=NAMES.len());
    let vars: Vec<(Var, i64)> = NAMES[..nvars].iter().map(|n| (Var::new(n), rng.gen_range(2..=4))).collect();
    let domain = FiniteDomain::new(
        vars.iter().map(|(v, n)| VarDomain::range(v.as_str(), 0, n - 1)).collect(),
        None,
    )
    .expect("generated domains are well formed");
    let mut g = Gen { rng, vars };
    let depth = g.rng.gen_range(1..=MAX_DEPTH);
    let program = g.stmt(depth);
    let post = g.expectation(2);
    GenCase { seed, program, domain, post }
}

/// `n` cases with consecutive seeds starting at `seed`.
pub fn corpus(seed: u64, n: usize) -> impl Iterator<Item = GenCase> {
    (0..n as u64).map(move |i| random_case(seed.wrapping_add(i)))
}
