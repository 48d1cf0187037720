//! Exact sparse Gaussian elimination over the rationals.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::ast::Rat;

/// Solves `A x = b` without pivoting. Intended for matrices of the form
/// `I - P` with `P` substochastic and every row eventually leaking mass,
/// whose leading minors are nonsingular. Returns `None` on a zero pivot.
pub fn solve_sparse(mut rows: Vec<BTreeMap<usize, Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = rows.len();
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, r) in rows.iter().enumerate() {
        for &j in r.keys() {
            col_rows[j].insert(i);
        }
    }
    for k in 0..n {
        let pivot = rows[k].get(&k).filter(|p| !p.is_zero())?.clone();
        let below: Vec<usize> = col_rows[k].range(k + 1..).copied().collect();
        if below.is_empty() {
            continue;
        }
        let pivot_row: Vec<(usize, Rat)> = rows[k].range(k + 1..).map(|(j, v)| (*j, v.clone())).collect();
        for i in below {
            let factor = rows[i].remove(&k).expect("indexed entry") / &pivot;
            col_rows[k].remove(&i);
            for (j, v) in &pivot_row {
                let e = rows[i].entry(*j).or_insert_with(Rat::zero);
                *e -= &factor * v;
                if e.is_zero() {
                    rows[i].remove(j);
                    col_rows[*j].remove(&i);
                } else {
                    col_rows[*j].insert(i);
                }
            }
            let delta = &factor * &rhs[k];
            rhs[i] -= delta;
        }
    }
    let mut x = vec![Rat::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for (j, v) in rows[k].range(k + 1..) {
            acc -= v * &x[*j];
        }
        x[k] = acc / &rows[k][&k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{rat, ratio};

    #[test]
    fn gamblers_ruin_chain() {
        // x0 = 1/2 x1 + 1/2 * 1, x1 = 1/2 x0
        let rows = vec![
            BTreeMap::from([(0, rat(1)), (1, ratio(-1, 2))]),
            BTreeMap::from([(0, ratio(-1, 2)), (1, rat(1))]),
        ];
        let x = solve_sparse(rows, vec![ratio(1, 2), rat(0)]).unwrap();
        assert_eq!(x, vec![ratio(2, 3), ratio(1, 3)]);
    }

    #[test]
    fn singular_matrix() {
        let rows = vec![BTreeMap::from([(0, rat(1)), (1, rat(-1))]), BTreeMap::from([(0, rat(-1)), (1, rat(1))])];
        assert!(solve_sparse(rows, vec![rat(0), rat(0)]).is_none());
    }
}
