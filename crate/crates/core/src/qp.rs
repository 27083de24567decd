//! Minimum-deviation quadratic program `min ½‖u - u_nom‖² s.t. A u ≥ b`.
//!
//! Dual active-set method (Goldfarb-Idnani) specialised to the identity
//! Hessian. Rows are normalised before solving; the most violated row enters
//! first, the lowest index wins ties.

use nalgebra::{DMatrix, DVector};

use crate::error::{GraspError, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem<T: Real> {
    pub u_nom: DVector<T>,
    /// `k x m`.
    pub a: DMatrix<T>,
    pub b: DVector<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals<T: Real> {
    pub primal: T,
    pub stationarity: T,
    pub min_multiplier: T,
    pub complementarity: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution<T: Real> {
    pub u: DVector<T>,
    /// Active row indices, ascending.
    pub active: Vec<usize>,
    /// One multiplier per row of the original problem.
    pub multipliers: DVector<T>,
    pub iterations: usize,
    pub kkt: KktResiduals<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings<T: Real> {
    pub max_iterations: usize,
    /// Violation (normalised rows) below which a row counts as satisfied.
    pub feasibility_tol: T,
}

impl<T: Real> Default for QpSettings<T> {
    fn default() -> Self {
        QpSettings { max_iterations: 500, feasibility_tol: lit(1e-11) }
    }
}

struct Normalised<T: Real> {
    a: DMatrix<T>,
    b: DVector<T>,
    scale: DVector<T>,
    live: Vec<bool>,
}

fn normalise<T: Real>(p: &QpProblem<T>, tol: T) -> Result<Normalised<T>> {
    let (k, m) = p.a.shape();
    let mut a = DMatrix::zeros(k, m);
    let mut b = DVector::zeros(k);
    let mut scale = DVector::from_element(k, T::one());
    let mut live = vec![true; k];
    for i in 0..k {
        let n = p.a.row(i).norm();
        if n <= lit(1e-14) {
            if p.b[i] > tol {
                return Err(GraspError::Infeasible);
            }
            live[i] = false;
            continue;
        }
        a.set_row(i, &(p.a.row(i) / n));
        b[i] = p.b[i] / n;
        scale[i] = n;
    }
    Ok(Normalised { a, b, scale, live })
}

/// Equality-constrained minimiser on `set`: `u = u_nom + Nλ`, `N λ` solved
/// by least squares through a QR of the active normals.
fn solve_on<T: Real>(n: &Normalised<T>, u_nom: &DVector<T>, set: &[usize]) -> Option<(DVector<T>, DVector<T>)> {
    if set.is_empty() {
        return Some((u_nom.clone(), DVector::zeros(0)));
    }
    let nm = active_matrix(&n.a, set);
    let gram = nm.transpose() * &nm;
    let rhs = DVector::from_iterator(set.len(), set.iter().map(|&i| n.b[i])) - nm.transpose() * u_nom;
    let lambda = gram.cholesky()?.solve(&rhs);
    Some((u_nom + &nm * &lambda, lambda))
}

fn active_matrix<T: Real>(a: &DMatrix<T>, set: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(a.ncols(), set.len(), |r, c| a[(set[c], r)])
}

fn independent_prefix<T: Real>(a: &DMatrix<T>, candidates: &[usize], m: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Vec<DVector<T>> = Vec::new();
    for &i in candidates {
        if kept.len() == m {
            break;
        }
        let mut v: DVector<T> = a.row(i).transpose();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, T::one());
            }
        }
        let n = v.norm();
        if n > lit(1e-9) {
            basis.push(v / n);
            kept.push(i);
        }
    }
    kept
}

/// Solves `problem`, optionally starting from a previous active set.
pub fn solve<T: Real>(problem: &QpProblem<T>, warm: Option<&[usize]>, settings: &QpSettings<T>) -> Result<QpSolution<T>> {
    let (k, m) = problem.a.shape();
    if problem.b.len() != k || problem.u_nom.len() != m {
        return Err(GraspError::Dimension(format!("QP with A {k}x{m}, b {}, u_nom {}", problem.b.len(), problem.u_nom.len())));
    }
    if problem.a.iter().chain(problem.b.iter()).chain(problem.u_nom.iter()).any(|v| !v.is_finite()) {
        return Err(GraspError::Dimension("non-finite QP data".into()));
    }
    let tol = settings.feasibility_tol;
    if warm.is_none_or(|w| w.is_empty()) && nominal_is_feasible(problem, tol) {
        let multipliers = DVector::zeros(k);
        let kkt = kkt_residuals(problem, &problem.u_nom, &multipliers);
        return Ok(QpSolution { u: problem.u_nom.clone(), active: Vec::new(), multipliers, iterations: 0, kkt });
    }
    let nz = normalise(problem, tol)?;
    let eps = lit::<T>(1e-12);

    // dual-feasible start: equality solution on the warm set with negative
    // multipliers dropped one at a time
    let mut active: Vec<usize> = match warm {
        Some(w) => {
            let mut c: Vec<usize> = w.iter().copied().filter(|&i| i < k && nz.live[i]).collect();
            c.sort_unstable();
            c.dedup();
            independent_prefix(&nz.a, &c, m)
        }
        None => Vec::new(),
    };
    let (mut u, mut lambda) = loop {
        let (u, l) = solve_on(&nz, &problem.u_nom, &active).ok_or(GraspError::Infeasible)?;
        match (0..l.len()).filter(|&j| l[j] < T::zero()).min_by(|&x, &y| l[x].partial_cmp(&l[y]).unwrap()) {
            Some(j) => {
                active.remove(j);
            }
            None => break (u, l),
        }
    };

    let mut iterations = 0;
    loop {
        // most violated inactive row
        let mut p = None;
        let mut worst = -tol;
        for i in 0..k {
            if !nz.live[i] || active.contains(&i) {
                continue;
            }
            let s = nz.a.row(i).dot(&u.transpose()) - nz.b[i];
            if s < worst {
                worst = s;
                p = Some(i);
            }
        }
        let Some(p) = p else { break };
        let n_p: DVector<T> = nz.a.row(p).transpose();
        let mut lambda_p = T::zero();
        loop {
            iterations += 1;
            if iterations > settings.max_iterations {
                return Err(GraspError::MaxIterations(settings.max_iterations));
            }
            let (z, r) = if active.is_empty() {
                (n_p.clone(), DVector::zeros(0))
            } else {
                let nm = active_matrix(&nz.a, &active);
                let gram = nm.transpose() * &nm;
                let r = gram.cholesky().ok_or(GraspError::Infeasible)?.solve(&(nm.transpose() * &n_p));
                (&n_p - &nm * &r, r)
            };
            // dual step length
            let mut t1 = None;
            for j in 0..active.len() {
                if r[j] > eps {
                    let t = lambda[j] / r[j];
                    if t1.is_none_or(|(tb, _)| t < tb) {
                        t1 = Some((t, j));
                    }
                }
            }
            let s_p = n_p.dot(&u) - nz.b[p];
            let zn = z.dot(&n_p);
            let t2 = (active.len() < m && z.norm() > lit(1e-9)).then(|| -s_p / zn);
            match (t1, t2) {
                (None, None) => return Err(GraspError::Infeasible),
                (Some((t, j)), None) => {
                    lambda -= &r * t;
                    lambda_p += t;
                    drop_row(&mut active, &mut lambda, j);
                }
                (t1, Some(t2)) => {
                    let (t, drop) = match t1 {
                        Some((t, j)) if t < t2 => (t, Some(j)),
                        _ => (t2, None),
                    };
                    u += &z * t;
                    lambda -= &r * t;
                    lambda_p += t;
                    match drop {
                        Some(j) => drop_row(&mut active, &mut lambda, j),
                        None => {
                            active.push(p);
                            lambda = DVector::from_iterator(active.len(), lambda.iter().copied().chain(std::iter::once(lambda_p)));
                            break;
                        }
                    }
                }
            }
        }
    }

    let mut multipliers = DVector::zeros(k);
    for (j, &i) in active.iter().enumerate() {
        multipliers[i] = lambda[j] / nz.scale[i];
    }
    let kkt = kkt_residuals(problem, &u, &multipliers);
    let mut order: Vec<usize> = (0..active.len()).collect();
    order.sort_by_key(|&j| active[j]);
    let active = order.iter().map(|&j| active[j]).collect();
    Ok(QpSolution { u, active, multipliers, iterations, kkt })
}

fn nominal_is_feasible<T: Real>(p: &QpProblem<T>, tol: T) -> bool {
    (0..p.a.nrows()).all(|i| {
        let row = p.a.row(i);
        row.dot(&p.u_nom.transpose()) - p.b[i] >= -tol * row.norm().max(T::one())
    })
}

fn drop_row<T: Real>(active: &mut Vec<usize>, lambda: &mut DVector<T>, j: usize) {
    active.remove(j);
    *lambda = lambda.clone().remove_row(j);
}

/// Residuals measured on unit-norm rows so that they are scale free.
pub fn kkt_residuals<T: Real>(problem: &QpProblem<T>, u: &DVector<T>, multipliers: &DVector<T>) -> KktResiduals<T> {
    let mut primal = T::zero();
    let mut complementarity = T::zero();
    let mut min_multiplier = T::zero();
    let mut grad = u - &problem.u_nom;
    for i in 0..problem.a.nrows() {
        let row = problem.a.row(i);
        let n = row.norm();
        let s = row.dot(&u.transpose()) - problem.b[i];
        grad -= row.transpose() * multipliers[i];
        if n > T::zero() {
            primal = primal.max(-s / n);
            complementarity = complementarity.max((multipliers[i] * s).abs());
        }
        min_multiplier = min_multiplier.min(multipliers[i] * n);
    }
    KktResiduals { primal: primal.max(T::zero()), stationarity: grad.amax(), min_multiplier, complementarity }
}
