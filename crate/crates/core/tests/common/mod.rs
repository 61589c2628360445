//! Helpers shared by the integration tests.

#![allow(dead_code)]

use onebit::optim::LinearProgram;
use onebit::rng::{gaussian, gaussian_vector, rng, Rng};
use onebit::{Matrix, Vector};
use rand::Rng as _;

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with_last = subsets(n - 1, k - 1);
    for s in &mut with_last {
        s.push(n - 1);
    }
    let mut out = subsets(n - 1, k);
    out.extend(with_last);
    out
}

/// Minimum of the objective over all feasible basic solutions, or `None`
/// when no vertex is feasible.
pub fn vertex_optimum(lp: &LinearProgram) -> Option<f64> {
    let k = lp.num_variables();
    let e = lp.eq_rhs.len();
    let p = lp.ineq_rhs.len();
    let mut best: Option<f64> = None;
    for active in subsets(p, k - e) {
        let mut m = Matrix::zeros(k, k);
        let mut rhs = Vector::zeros(k);
        for i in 0..e {
            m.row_mut(i).copy_from(&lp.eq_matrix.row(i));
            rhs[i] = lp.eq_rhs[i];
        }
        for (j, &i) in active.iter().enumerate() {
            m.row_mut(e + j).copy_from(&lp.ineq_matrix.row(i));
            rhs[e + j] = lp.ineq_rhs[i];
        }
        let svd = m.clone().svd(false, false);
        let smin = svd.singular_values.min();
        if smin < 1e-9 * svd.singular_values.max().max(1.0) {
            continue;
        }
        let Some(v) = m.lu().solve(&rhs) else { continue };
        if lp.max_violation(&v) > 1e-9 {
            continue;
        }
        let obj = lp.objective.dot(&v);
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
    best
}

fn entry(rng: &mut Rng, integer: bool) -> f64 {
    if integer {
        f64::from(rng.random_range(-3i32..=3))
    } else {
        gaussian(rng)
    }
}

/// Feasible and bounded by construction: `q = P v₀ − slack` and the
/// objective is a nonnegative combination of rows plus equality rows.
/// Every tenth program gets a contradictory pair of rows instead.
pub fn random_program(seed: u64) -> (LinearProgram, bool) {
    let mut rng = rng(seed);
    let integer = seed % 2 == 1;
    let k = rng.random_range(2..=6usize);
    let e = rng.random_range(0..=1usize.min(k - 1));
    let p = rng.random_range((k + 1).max(3)..=8usize).max(k - e);
    let infeasible = seed % 10 == 9;
    let g = Matrix::from_fn(e, k, |_, _| entry(&mut rng, integer));
    let mut pm = Matrix::from_fn(p, k, |_, _| entry(&mut rng, integer));
    let v0 = gaussian_vector(&mut rng, k);
    let h = &g * &v0;
    let mut q = &pm * &v0;
    for qi in q.iter_mut() {
        if rng.random_bool(0.5) {
            *qi -= rng.random_range(0.0..2.0);
        }
    }
    if infeasible {
        let row = pm.row(0).clone_owned();
        pm.row_mut(1).copy_from(&(-&row));
        q[1] = -q[0] + 1.0;
    }
    let lambda = Vector::from_fn(p, |_, _| rng.random_range(0.0..1.0));
    let mu = gaussian_vector(&mut rng, e);
    let c = pm.transpose() * lambda + g.transpose() * mu;
    (
        LinearProgram::new(c)
            .with_equalities(g, h)
            .with_inequalities(pm, q),
        !infeasible,
    )
}
