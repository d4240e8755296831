//! Linear solvers for the saddle-point systems: sparse LU and block-diagonally
//! preconditioned MINRES.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::sparse::{dot, norm2, CsrMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LinearSolver {
    #[default]
    Direct,
    Minres,
}

impl LinearSolver {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" | "lu" => Some(Self::Direct),
            "minres" => Some(Self::Minres),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Minres => "minres",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveStats {
    pub method: LinearSolver,
    pub iterations: usize,
    /// `|b - A x| / |b|`.
    pub relative_residual: f64,
}

fn serial() {
    faer::set_global_parallelism(faer::Par::Seq);
}

fn column(b: &[f64]) -> Mat<f64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Sparse LU with partial pivoting.
pub fn direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    let mut out = direct_solve_many(a, &[b])?;
    Ok(out.pop().unwrap())
}

/// One LU factorization, several right-hand sides.
pub fn direct_solve_many(a: &CsrMatrix, bs: &[&[f64]]) -> Result<Vec<(Vec<f64>, SolveStats)>> {
    serial();
    if a.n_rows == 0 {
        let empty = (Vec::new(), SolveStats { method: LinearSolver::Direct, iterations: 1, relative_residual: 0.0 });
        return Ok(vec![empty; bs.len()]);
    }
    let lu = a.to_faer().sp_lu().map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e:?}")))?;
    let mut out = Vec::with_capacity(bs.len());
    for b in bs {
        let sol = lu.solve(column(b));
        let x: Vec<f64> = (0..b.len()).map(|i| sol[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem("LU solve produced non-finite values".into()));
        }
        let res = relative_residual(a, &x, b);
        if !(res < 1e-6) {
            return Err(Error::SingularSystem(format!("LU residual {res:e} indicates a singular system")));
        }
        out.push((x, SolveStats { method: LinearSolver::Direct, iterations: 1, relative_residual: res }));
    }
    Ok(out)
}

/// MINRES on `[[A, B^T], [B, 0]]` with preconditioner
/// `diag(A_chol, diag(pressure_weights))`, where the first `n_velocity`
/// unknowns are velocity. `pressure_weights` are typically lumped pressure
/// masses divided by the viscosity.
pub fn minres_solve(
    a: &CsrMatrix,
    b: &[f64],
    n_velocity: usize,
    pressure_weights: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    serial();
    let n = a.n_rows;
    assert_eq!(pressure_weights.len(), n - n_velocity);
    let llt = a
        .block(0, n_velocity)
        .to_faer()
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::SolveFailure(format!("velocity block is not positive definite: {e:?}")))?;
    let precond = |r: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        if n_velocity > 0 {
            let z = llt.solve(column(&r[..n_velocity]));
            for i in 0..n_velocity {
                out[i] = z[(i, 0)];
            }
        }
        for (k, w) in pressure_weights.iter().enumerate() {
            out[n_velocity + k] = r[n_velocity + k] / w;
        }
        out
    };

    let mut x = vec![0.0; n];
    let mut v_old = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = precond(&v);
    let mut gamma = dot(&z, &v).sqrt();
    if gamma == 0.0 {
        return Ok((x, SolveStats { method: LinearSolver::Minres, iterations: 0, relative_residual: 0.0 }));
    }
    let gamma1 = gamma;
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s) = (0.0, 0.0);
    let (mut c_old, mut c) = (1.0, 1.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        z.iter_mut().for_each(|zi| *zi /= gamma);
        let az = a.matvec(&z);
        let delta = dot(&az, &z);
        let v_new: Vec<f64> =
            (0..n).map(|i| az[i] - delta / gamma * v[i] - gamma / gamma_old * v_old[i]).collect();
        let z_new = precond(&v_new);
        let gamma_new = dot(&z_new, &v_new).max(0.0).sqrt();
        let a0 = c * delta - c_old * s * gamma;
        let a1 = (a0 * a0 + gamma_new * gamma_new).sqrt();
        let a2 = s * delta + c_old * c * gamma;
        let a3 = s_old * gamma;
        let c_new = a0 / a1;
        let s_new = gamma_new / a1;
        let w_new: Vec<f64> = (0..n).map(|i| (z[i] - a3 * w_old[i] - a2 * w[i]) / a1).collect();
        for i in 0..n {
            x[i] += c_new * eta * w_new[i];
        }
        eta *= -s_new;
        w_old = std::mem::replace(&mut w, w_new);
        v_old = std::mem::replace(&mut v, v_new);
        z = z_new;
        gamma_old = gamma;
        gamma = gamma_new;
        s_old = s;
        s = s_new;
        c_old = c;
        c = c_new;
        if eta.abs() / gamma1 < tol || gamma == 0.0 {
            break;
        }
    }
    let res = relative_residual(a, &x, b);
    if eta.abs() / gamma1 >= tol && gamma != 0.0 {
        return Err(Error::NonConvergence { iterations, residual: res });
    }
    Ok((x, SolveStats { method: LinearSolver::Minres, iterations, relative_residual: res }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    // Small saddle point: A = tridiag(-1, 4, -1) (4x4), B = [[1, 1, 0, 0], [0, 0, 1, -1]].
    fn saddle() -> CsrMatrix {
        let mut t = Triplets::new(6, 6);
        for i in 0..4 {
            t.push(i, i, 4.0);
            if i + 1 < 4 {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        for (r, c, v) in [(4, 0, 1.0), (4, 1, 1.0), (5, 2, 1.0), (5, 3, -1.0)] {
            t.push(r, c, v);
            t.push(c, r, v);
        }
        t.to_csr()
    }

    #[test]
    fn direct_and_minres_agree() {
        let a = saddle();
        let b = [1.0, -2.0, 0.5, 3.0, 0.25, -1.0];
        let (x1, s1) = direct_solve(&a, &b).unwrap();
        let (x2, s2) = minres_solve(&a, &b, 4, &[1.0, 1.0], 1e-12, 100).unwrap();
        assert!(s1.relative_residual < 1e-14);
        assert!(s2.relative_residual < 1e-10, "{s2:?}");
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        assert!(direct_solve(&t.to_csr(), &[1.0, 0.0]).is_err());
    }
}
