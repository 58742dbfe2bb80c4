//! Preconditioned conjugate gradients with a Lanczos condition estimate.

use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, symmetric_eigenvalues, LinearOperator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖r_k‖ / ‖b‖`, starting with `k = 0`.
    pub relative_residual_history: Vec<f64>,
    /// `λ_max / λ_min` of the Lanczos matrix; `None` before the first iteration.
    pub cond_estimate: Option<f64>,
    pub extreme_eigs: Option<(f64, f64)>,
    /// False when fewer than two iterations were taken.
    pub estimate_reliable: bool,
    /// `‖b - A x‖ / ‖b‖` recomputed at exit.
    pub final_relative_residual: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn write_residual_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["iteration", "relative_residual"])?;
        for (k, r) in self.relative_residual_history.iter().enumerate() {
            w.write_record([k.to_string(), format!("{r:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond: f64,
    pub reliable: bool,
}

/// Extreme eigenvalues of the Lanczos tridiagonal built from the CG step
/// lengths `alphas` and the direction-update factors `betas`
/// (`betas[j]` links steps `j` and `j+1`).
pub fn lanczos_condition_estimate(alphas: &[f64], betas: &[f64]) -> Result<LanczosEstimate> {
    let k = alphas.len();
    if k == 0 {
        return Err(Error::Eigensolver("no CG iterations to build a Lanczos matrix".into()));
    }
    if betas.len() + 1 < k {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            actual: betas.len(),
            context: "Lanczos beta coefficients",
        });
    }
    let t = Mat::from_fn(k, k, |i, j| {
        if i == j {
            let prev = if i > 0 { betas[i - 1] / alphas[i - 1] } else { 0.0 };
            1.0 / alphas[i] + prev
        } else if i.abs_diff(j) == 1 {
            let l = i.min(j);
            betas[l].sqrt() / alphas[l]
        } else {
            0.0
        }
    });
    let ev = symmetric_eigenvalues(&t)?;
    let (lmin, lmax) = (ev[0], ev[k - 1]);
    Ok(LanczosEstimate {
        lambda_min: lmin,
        lambda_max: lmax,
        cond: lmax / lmin,
        reliable: k >= 2,
    })
}

/// Solves `A x = b` from a zero initial guess. Stops when the true relative
/// residual `‖b - A x‖ / ‖b‖` is at most `rel_tol` or after `max_iter` steps.
pub fn pcg_solve(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n || m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: if b.len() != n { b.len() } else { m.dim() },
            context: "pcg operands",
        });
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    let mut history = vec![1.0];
    if bnorm == 0.0 {
        let report = SolveReport {
            iterations: 0,
            relative_residual_history: history,
            cond_estimate: None,
            extreme_eigs: None,
            estimate_reliable: false,
            final_relative_residual: 0.0,
            converged: true,
        };
        return Ok((x, report));
    }

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut converged = false;
    let mut true_rel = 1.0;

    for it in 0..max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Breakdown {
                iteration: it,
                curvature: pap,
            });
        }
        let alpha = rz / pap;
        alphas.push(alpha);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let mut rel = norm2(&r) / bnorm;
        if rel <= rel_tol {
            // Confirm against the true residual; the recurrence can drift.
            let mut ax = vec![0.0; n];
            a.apply(&x, &mut ax);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            rel = norm2(&r) / bnorm;
            true_rel = rel;
            if rel <= rel_tol {
                history.push(rel);
                converged = true;
                break;
            }
        }
        history.push(rel);
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        betas.push(beta);
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if !converged {
        let mut ax = vec![0.0; n];
        a.apply(&x, &mut ax);
        let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        true_rel = norm2(&res) / bnorm;
        converged = true_rel <= rel_tol;
    }

    let (cond_estimate, extreme_eigs, reliable) = if alphas.is_empty() {
        (None, None, false)
    } else {
        let est = lanczos_condition_estimate(&alphas, &betas)?;
        (
            Some(est.cond),
            Some((est.lambda_min, est.lambda_max)),
            est.reliable,
        )
    };
    let report = SolveReport {
        iterations: alphas.len(),
        relative_residual_history: history,
        cond_estimate,
        extreme_eigs,
        estimate_reliable: reliable,
        final_relative_residual: true_rel,
        converged,
    };
    Ok((x, report))
}

/// Identity operator of a given dimension.
#[derive(Clone, Copy, Debug)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}
