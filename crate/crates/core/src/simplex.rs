//! Exact-rational feasibility of `A·x ≤ b, x ≥ 0`.
//!
//! The solver works on the associated program `min bᵀy` subject to
//! `Aᵀy ≥ 0, y ≥ 0`, which is feasible at `y = 0` and fully degenerate
//! (all right-hand sides are zero, so no phase-1 is needed and the objective
//! never moves). Primal simplex with Bland's rule then terminates in one of
//! two states:
//!
//! * optimal at value 0 — the original system is feasible, and a witness
//!   `x` is read off the reduced costs of the slack columns: optimality
//!   makes every `x_j = rc(s_j) ≥ 0` and every `A_k·x ≤ b_k`;
//! * an unbounded descent ray — the original system is infeasible.
//!
//! The tableau has one row per original *variable* rather than per
//! constraint, which keeps pivoting cheap when constraints vastly outnumber
//! variables (here: `2^N` constraint rows versus `2N + 2` variables).

use crate::rational::Rat;

pub(crate) enum Feasibility {
    /// A nonnegative solution of `A·x ≤ b`.
    Feasible(Vec<Rat>),
    Infeasible,
}

/// Decides feasibility of `A·x ≤ b` over `x ≥ 0`, exactly.
///
/// `a` is row-major, one row per constraint; entries are machine integers
/// (the callers build constraints from `±1` data), arithmetic is exact
/// rational throughout.
pub(crate) fn nonneg_feasible(a: &[Vec<i64>], b: &[i64]) -> Feasibility {
    let m = a.len(); // constraints of the original system = columns here
    assert_eq!(m, b.len());
    let n = a.first().map_or(0, Vec::len); // original variables = rows here
    if n == 0 {
        // No variables: feasible iff every right-hand side is nonnegative.
        return if b.iter().all(|&v| v >= 0) {
            Feasibility::Feasible(Vec::new())
        } else {
            Feasibility::Infeasible
        };
    }

    let cols = m + n;
    // Constraint rows of the associated program: -Aᵀ·y + I·s = 0.
    let mut tab: Vec<Vec<Rat>> = (0..n)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    if c < m {
                        Rat::from_int(-a[c][r])
                    } else if c - m == r {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    // Reduced costs; the slack basis has zero cost, so these start at the
    // objective coefficients (b over the y columns).
    let mut rc: Vec<Rat> = (0..cols)
        .map(|c| {
            if c < m {
                Rat::from_int(b[c])
            } else {
                Rat::zero()
            }
        })
        .collect();
    let mut basis: Vec<usize> = (m..cols).collect();

    loop {
        // Bland: entering column is the lowest-index negative reduced cost.
        let Some(entering) = rc.iter().position(|c| *c < Rat::zero()) else {
            // Optimal. The witness is the reduced-cost row over the slacks.
            return Feasibility::Feasible(rc[m..].to_vec());
        };
        // Every right-hand side is zero, so all ratios tie at zero; Bland
        // breaks the tie by the smallest basic variable index.
        let leaving = (0..n)
            .filter(|&r| tab[r][entering] > Rat::zero())
            .min_by_key(|&r| basis[r]);
        let Some(row) = leaving else {
            // Descent ray: the associated program is unbounded below.
            return Feasibility::Infeasible;
        };

        // Pivot on (row, entering).
        let pivot = tab[row][entering].clone();
        for c in 0..cols {
            tab[row][c] = &tab[row][c] / &pivot;
        }
        for r in 0..n {
            if r == row || tab[r][entering].is_zero() {
                continue;
            }
            let factor = tab[r][entering].clone();
            for c in 0..cols {
                let delta = &factor * &tab[row][c];
                tab[r][c] = &tab[r][c] - &delta;
            }
        }
        if !rc[entering].is_zero() {
            let factor = rc[entering].clone();
            for c in 0..cols {
                let delta = &factor * &tab[row][c];
                rc[c] = &rc[c] - &delta;
            }
        }
        basis[row] = entering;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_witness(a: &[Vec<i64>], b: &[i64], x: &[Rat]) {
        for (row, rhs) in a.iter().zip(b) {
            let lhs: Rat = row
                .iter()
                .zip(x)
                .map(|(&c, v)| Rat::from_int(c) * v)
                .sum();
            assert!(lhs <= Rat::from_int(*rhs), "violated: {lhs} > {rhs}");
        }
        for v in x {
            assert!(*v >= Rat::zero());
        }
    }

    #[test]
    fn trivially_feasible_at_origin() {
        let a = vec![vec![1, 1], vec![-1, 2]];
        let b = vec![3, 0];
        match nonneg_feasible(&a, &b) {
            Feasibility::Feasible(x) => check_witness(&a, &b, &x),
            Feasibility::Infeasible => panic!("origin is feasible"),
        }
    }

    #[test]
    fn forced_away_from_origin() {
        // -x ≤ -1 requires x ≥ 1
        let a = vec![vec![-1]];
        let b = vec![-1];
        match nonneg_feasible(&a, &b) {
            Feasibility::Feasible(x) => {
                check_witness(&a, &b, &x);
                assert!(x[0] >= Rat::one());
            }
            Feasibility::Infeasible => panic!("x = 1 works"),
        }
    }

    #[test]
    fn contradictory_system() {
        // x ≤ -1 with x ≥ 0 is impossible
        let a = vec![vec![1]];
        let b = vec![-1];
        assert!(matches!(nonneg_feasible(&a, &b), Feasibility::Infeasible));
    }

    #[test]
    fn two_sided_squeeze() {
        // x + y ≤ -1 impossible; but x - y ≤ -1, y - x ≤ -1 also impossible
        let a = vec![vec![1, -1], vec![-1, 1]];
        let b = vec![-1, -1];
        assert!(matches!(nonneg_feasible(&a, &b), Feasibility::Infeasible));

        // x - y ≤ -1, y ≤ 2 is satisfiable (x=0, y∈[1,2])
        let a = vec![vec![1, -1], vec![0, 1]];
        let b = vec![-1, 2];
        match nonneg_feasible(&a, &b) {
            Feasibility::Feasible(x) => check_witness(&a, &b, &x),
            Feasibility::Infeasible => panic!("satisfiable"),
        }
    }
}
