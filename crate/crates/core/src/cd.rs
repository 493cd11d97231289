//! Cyclic coordinate descent for
//! `min_z z'Qz − 2z'g + Σ_j ω_j |z_j − κ_j|`
//! with some coordinates unpenalised and some pinned at zero.

use crate::error::{Error, Result};
use crate::estimators::soft_threshold;
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Penalty<F> {
    Free,
    Pinned,
    Weighted { kink: F, weight: F },
}

#[derive(Clone, Debug)]
pub(crate) struct Solution<F> {
    pub z: Vec<F>,
    /// Coordinate sits exactly at its kink (pinned coordinates included).
    pub at_kink: Vec<bool>,
    pub kkt: F,
    pub iterations: usize,
}

pub(crate) fn solve<F: Scalar>(
    q: &Matrix<F>,
    g: &[F],
    pens: &[Penalty<F>],
    start: &[F],
    tol: F,
    max_iter: usize,
) -> Result<Solution<F>> {
    let k = g.len();
    let mut z = start.to_vec();
    let mut at_kink = vec![false; k];
    for j in 0..k {
        match pens[j] {
            Penalty::Pinned => {
                z[j] = F::zero();
                at_kink[j] = true;
            }
            Penalty::Weighted { kink, .. } => at_kink[j] = z[j] == kink,
            Penalty::Free => {}
        }
    }
    let half = F::of(0.5);
    let mut residual = kkt(q, g, pens, &z, &at_kink);
    let mut iterations = 0;
    while residual > tol {
        if iterations == max_iter {
            return Err(Error::Convergence {
                iterations,
                residual: residual.as_f64(),
                last_iterate: z.iter().map(|v| v.as_f64()).collect(),
            });
        }
        iterations += 1;
        for j in 0..k {
            let mut r = g[j];
            for i in 0..k {
                if i != j {
                    r -= q[(j, i)] * z[i];
                }
            }
            let qjj = q[(j, j)];
            match pens[j] {
                Penalty::Pinned => {}
                Penalty::Free => z[j] = r / qjj,
                Penalty::Weighted { kink, weight } => {
                    let (u, off) = soft_threshold(r - qjj * kink, weight * half);
                    z[j] = if off { kink + u / qjj } else { kink };
                    at_kink[j] = !off;
                }
            }
        }
        residual = kkt(q, g, pens, &z, &at_kink);
        if residual > tol {
            if let Some((pz, pr)) = polish(q, g, pens, &z, &at_kink) {
                if pr <= tol {
                    z = pz;
                    residual = pr;
                }
            }
        }
    }
    Ok(Solution {
        z,
        at_kink,
        kkt: residual,
        iterations,
    })
}

/// Largest violation of the subgradient conditions.
pub(crate) fn kkt<F: Scalar>(q: &Matrix<F>, g: &[F], pens: &[Penalty<F>], z: &[F], at_kink: &[bool]) -> F {
    let two = F::of(2.0);
    let mut worst = F::zero();
    for j in 0..z.len() {
        let mut grad = -g[j];
        for i in 0..z.len() {
            grad += q[(j, i)] * z[i];
        }
        let grad = two * grad;
        let v = match pens[j] {
            Penalty::Pinned => F::zero(),
            Penalty::Free => grad.abs(),
            Penalty::Weighted { weight, .. } if at_kink[j] => (grad.abs() - weight).max(F::zero()),
            Penalty::Weighted { kink, weight } => (grad + weight * (z[j] - kink).signum()).abs(),
        };
        worst = worst.max(v);
    }
    worst
}

// Newton step on the current off-kink set with signs held fixed.
fn polish<F: Scalar>(
    q: &Matrix<F>,
    g: &[F],
    pens: &[Penalty<F>],
    z: &[F],
    at_kink: &[bool],
) -> Option<(Vec<F>, F)> {
    let idx: Vec<usize> = (0..z.len()).filter(|&j| !at_kink[j]).collect();
    if idx.is_empty() {
        return None;
    }
    let m = idx.len();
    let mut sub = Matrix::zeros(m, m);
    let mut rhs = vec![F::zero(); m];
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            sub[(a, b)] = q[(i, j)];
        }
        let mut r = g[i];
        for j in 0..z.len() {
            if at_kink[j] {
                r -= q[(i, j)] * z[j];
            }
        }
        if let Penalty::Weighted { kink, weight } = pens[i] {
            r -= F::of(0.5) * weight * (z[i] - kink).signum();
        }
        rhs[a] = r;
    }
    let sol = Cholesky::new(&sub).ok()?.solve(&rhs);
    let mut out = z.to_vec();
    for (a, &i) in idx.iter().enumerate() {
        if let Penalty::Weighted { kink, .. } = pens[i] {
            if (sol[a] - kink).signum() != (z[i] - kink).signum() || sol[a] == kink {
                return None;
            }
        }
        out[i] = sol[a];
    }
    let r = kkt(q, g, pens, &out, at_kink);
    Some((out, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unpenalised_problem_is_a_linear_solve() {
        let q = Matrix::from_rows(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g = [1.0f64, -1.0];
        let sol = solve(&q, &g, &[Penalty::Free, Penalty::Free], &[0.0, 0.0], 1e-12, 1000).unwrap();
        let exact = q.solve(&g).unwrap();
        for (a, b) in sol.z.iter().zip(&exact) {
            assert!((*a - *b).abs() < 1e-12);
        }
    }

    #[test]
    fn heavy_weight_sticks_to_the_kink() {
        let q = Matrix::identity(1);
        let pens = [Penalty::Weighted { kink: 0.7, weight: 100.0 }];
        let sol = solve(&q, &[1.0], &pens, &[0.0], 1e-12, 100).unwrap();
        assert_eq!(sol.z, vec![0.7]);
        assert!(sol.at_kink[0]);
    }

    #[test]
    fn shifted_soft_threshold() {
        // min z² − 2z·3 + 2|z − 1|: kink at 1, optimum 3 − 1 = 2.
        let q = Matrix::identity(1);
        let pens = [Penalty::Weighted { kink: 1.0, weight: 2.0 }];
        let sol = solve(&q, &[3.0], &pens, &[0.0], 1e-14, 100).unwrap();
        assert!((sol.z[0] - 2.0f64).abs() < 1e-14);
        assert!(!sol.at_kink[0]);
    }
}
