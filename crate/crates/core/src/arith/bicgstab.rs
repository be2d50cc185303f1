use crate::error::{Error, Result};
use crate::linalg::Scalar;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual `|r| / |b|` after each iteration, starting with the
    /// initial guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Scalar]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unpreconditioned BiCGStab from a zero initial guess.
///
/// Converges when `|b - A x| / |b| <= tol`. A vanishing `rho` restarts the
/// iteration once from the current iterate with a perturbed shadow residual;
/// a second breakdown is an error.
pub fn bicgstab_solve<F>(mut apply: F, rhs: &[Scalar], tol: f64, max_iter: usize) -> Result<(Vec<Scalar>, SolveReport)>
where
    F: FnMut(&[Scalar]) -> Result<Vec<Scalar>>,
{
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be in (0, 1), got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let start = Instant::now();
    let n = rhs.len();
    let zero = Scalar::new(0.0, 0.0);
    let bnorm = norm(rhs);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                residual_history: vec![0.0],
                converged: true,
                wall_time: start.elapsed().as_secs_f64(),
            },
        ));
    }
    let mut r = rhs.to_vec();
    let mut history = vec![1.0];
    let mut shadow = r.clone();
    let mut restarted = false;
    let (mut rho, mut alpha, mut omega) = (Scalar::new(1.0, 0.0), Scalar::new(1.0, 0.0), Scalar::new(1.0, 0.0));
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut it = 0;
    while it < max_iter {
        let rho_new = dot(&shadow, &r);
        if rho_new.norm() <= 1e-30 * bnorm * bnorm || omega.norm() == 0.0 {
            if restarted {
                return Err(Error::Breakdown(it));
            }
            restarted = true;
            // perturb the shadow residual and restart from the current iterate
            for (i, s) in shadow.iter_mut().enumerate() {
                *s = r[i] + Scalar::new(((i * 7919) % 101) as f64 / 101.0 - 0.5, 0.25) * (norm(&r) / (n as f64).sqrt());
            }
            rho = Scalar::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            v.iter_mut().for_each(|z| *z = zero);
            p.iter_mut().for_each(|z| *z = zero);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = apply(&p)?;
        let sv = dot(&shadow, &v);
        if sv.norm() == 0.0 {
            if restarted {
                return Err(Error::Breakdown(it));
            }
            restarted = true;
            rho = Scalar::new(0.0, 0.0);
            continue;
        }
        alpha = rho / sv;
        let s: Vec<Scalar> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        it += 1;
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            history.push(norm(&s) / bnorm);
            return Ok((x, report(it, history, true, start)));
        }
        let t = apply(&s)?;
        let tt = dot(&t, &t);
        omega = if tt.norm() == 0.0 { zero } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm(&r) / bnorm;
        history.push(res);
        if res <= tol {
            return Ok((x, report(it, history, true, start)));
        }
    }
    Ok((x, report(it, history, false, start)))
}

fn report(iterations: usize, residual_history: Vec<f64>, converged: bool, start: Instant) -> SolveReport {
    SolveReport {
        iterations,
        residual_history,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    }
}
