//! Extendability of an n-histogram PMF to an exchangeable m-sequence.
//!
//! Feasibility of `A w = b, sum w = 1, w >= 0` where `A[h][u] = H^n(h; u)`,
//! decided with phase one of the simplex method on an exact tableau. Bland's
//! rule keeps it from cycling.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use crate::combinat::{check_space, enumerate_histograms, Histogram};
use crate::error::{Error, Result};
use crate::model::{weights_from_atoms, SimplexWeights};
use crate::prob::{Exact, Prob};

/// Largest number of m-histograms the solver accepts.
pub const EXTENDABILITY_CAP: u64 = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Extendability {
    pub feasible: bool,
    /// Simplex weights whose n-marginal is the target, when feasible.
    pub witness: Option<SimplexWeights<Exact>>,
}

/// Decides whether `target` (a PMF over n-histograms; absent histograms have
/// mass zero) is the n-marginal of some exchangeable model over m items.
pub fn is_extendable(target: &[(Histogram, Exact)], m: u64) -> Result<Extendability> {
    let (first, _) = target
        .first()
        .ok_or_else(|| Error::InvalidDistribution("empty target".into()))?;
    let (n, k) = (first.total(), first.k());
    if n > m {
        return Err(Error::SampleTooLarge { n, m });
    }
    check_space(m, k, EXTENDABILITY_CAP)?;

    let rows = enumerate_histograms(n, k)?;
    let row_of: HashMap<&Histogram, usize> = rows.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let mut b = vec![Exact::zero(); rows.len() + 1];
    for (h, p) in target {
        if h.k() != k || h.total() != n {
            return Err(Error::InvalidDistribution(format!("target mixes histogram shapes at {h}")));
        }
        if p.is_negative() {
            return Err(Error::InvalidDistribution(format!("negative mass at {h}")));
        }
        b[row_of[h]] += p;
    }
    if b.iter().sum::<Exact>() != Exact::one() {
        return Err(Error::InvalidDistribution("target does not sum to 1".into()));
    }
    *b.last_mut().expect("normalization row") = Exact::one();

    let cols = enumerate_histograms(m, k)?;
    let mut a: Vec<Vec<Exact>> = rows
        .iter()
        .map(|h| cols.iter().map(|u| Exact::hypergeometric(h, u)).collect())
        .collect();
    a.push(vec![Exact::one(); cols.len()]);

    let Some(w) = phase_one(a, b) else {
        return Ok(Extendability {
            feasible: false,
            witness: None,
        });
    };
    let atoms: Vec<(Histogram, Exact)> = cols
        .into_iter()
        .zip(w)
        .filter(|(_, x)| !x.is_zero())
        .collect();
    let witness = weights_from_atoms(m, k, atoms, false)?;
    Ok(Extendability {
        feasible: true,
        witness: Some(witness),
    })
}

/// Returns a nonnegative solution of `a x = b` (with `b >= 0`), or `None`.
fn phase_one(a: Vec<Vec<Exact>>, b: Vec<Exact>) -> Option<Vec<Exact>> {
    let rows = a.len();
    let n = a[0].len();
    let width = n + rows;
    // tableau: original columns, one artificial per row, then the rhs
    let mut t: Vec<Vec<Exact>> = a
        .into_iter()
        .zip(b)
        .enumerate()
        .map(|(i, (mut row, rhs))| {
            row.extend((0..rows).map(|j| if i == j { Exact::one() } else { Exact::zero() }));
            row.push(rhs);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..width).collect();
    // reduced costs of minimizing the sum of artificials
    let mut cost: Vec<Exact> = (0..=width)
        .map(|j| {
            if (n..width).contains(&j) {
                Exact::zero()
            } else {
                -t.iter().map(|r| &r[j]).sum::<Exact>()
            }
        })
        .collect();

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Exact)> = None;
        for (i, row) in t.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[width] / &row[enter];
            let better = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // phase one is bounded below by zero, so a pivot row always exists
        let (p, _) = leave.expect("bounded phase-one objective");
        let pivot = t[p][enter].clone();
        for x in t[p].iter_mut() {
            *x /= &pivot;
        }
        let prow = t[p].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        let f = cost[enter].clone();
        for (x, y) in cost.iter_mut().zip(&prow) {
            *x -= &f * y;
        }
        basis[p] = enter;
    }

    // the objective value is -cost[rhs]
    if !cost[width].is_zero() {
        return None;
    }
    let mut x = vec![Exact::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width].clone();
        }
    }
    Some(x)
}
