use grasp_core::qp::QpProblem;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Enumerates every active set of up to `m` rows and returns the KKT point
/// with the smallest objective, or `None` when no subset is primal feasible.
pub fn brute_force(p: &QpProblem<f64>) -> Option<DVector<f64>> {
    let (k, m) = p.a.shape();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let set: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if set.len() > m {
            continue;
        }
        let n = DMatrix::from_fn(m, set.len(), |r, c| p.a[(set[c], r)]);
        let u = if set.is_empty() {
            p.u_nom.clone()
        } else {
            let gram = n.transpose() * &n;
            let Some(ch) = gram.clone().cholesky() else { continue };
            if gram.symmetric_eigenvalues().min() < 1e-10 {
                continue;
            }
            let rhs = DVector::from_iterator(set.len(), set.iter().map(|&i| p.b[i])) - n.transpose() * &p.u_nom;
            let lambda = ch.solve(&rhs);
            if lambda.iter().any(|&l| l < -1e-12) {
                continue;
            }
            &p.u_nom + &n * lambda
        };
        let feasible = (0..k).all(|i| p.a.row(i).dot(&u.transpose()) >= p.b[i] - 1e-10);
        if !feasible {
            continue;
        }
        let cost = (&u - &p.u_nom).norm_squared();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, u));
        }
    }
    best.map(|(_, u)| u)
}

/// Small dense problem with a mix of feasible and infeasible instances.
pub fn random_problem(rng: &mut impl Rng) -> QpProblem<f64> {
    let m = rng.gen_range(1..=6);
    let k = rng.gen_range(1..=12);
    QpProblem {
        u_nom: DVector::from_fn(m, |_, _| rng.gen_range(-3.0..3.0)),
        a: DMatrix::from_fn(k, m, |_, _| rng.gen_range(-1.0..1.0)),
        b: DVector::from_fn(k, |_, _| rng.gen_range(-1.0..0.4)),
    }
}
