//! Dense generalized eigenproblems `A x = λ B x` with diagonal positive `B`.
//!
//! The problem is reduced to the standard symmetric problem for
//! `B^{-1/2} A B^{-1/2}`. A known null vector of `A` can be deflated exactly
//! with a Householder reflection so that the zero mode is reproduced to
//! rounding rather than to the accuracy of the eigensolver.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Relative size below which eigenvalues count as zero.
pub const ZERO_TOL: f64 = 1e-10;

/// Full ascending eigensystem with `B`-orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
    /// Number of eigenvalues within `ZERO_TOL · λ_max` of zero.
    pub kernel_dim: usize,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.col(i).iter().copied().collect()
    }
}

/// Selected eigenpairs of one interface structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenSelection {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// The selected eigenvectors, `B`-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    pub count_selected: usize,
    pub threshold: f64,
    /// Smallest eigenvalue not selected; `None` when all are selected.
    pub first_excluded: Option<f64>,
    pub kernel_dim: usize,
}

impl EigenSelection {
    pub fn selected_values(&self) -> &[f64] {
        &self.eigenvalues[..self.count_selected]
    }
}

fn check_inputs(a: &Mat<f64>, b: &[f64]) -> Result<f64> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.nrows().max(a.ncols()),
            context: "generalized eigenproblem",
        });
    }
    if let Some((index, &value)) = b.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveWeight { index, value });
    }
    let mut scale: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(a[(i, j)].abs());
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(scale)
}

/// `D A D` with `D = diag(b^{-1/2})`, symmetrized.
fn reduce(a: &Mat<f64>, d: &[f64]) -> Mat<f64> {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]) * d[i] * d[j])
}

/// Clamps tiny negative eigenvalues; errors if `A` is clearly indefinite.
fn clamp(values: &mut [f64]) -> Result<usize> {
    let lmax = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = ZERO_TOL * lmax;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -tol {
                return Err(Error::NotSemidefinite(*v));
            }
            *v = 0.0;
        }
    }
    Ok(values.iter().filter(|&&v| v <= tol).count())
}

/// Solves `A x = λ B x` for symmetric positive semidefinite `A` and `B = diag(b)`.
pub fn solve_gevp(a: &Mat<f64>, b: &[f64]) -> Result<Eigensystem> {
    check_inputs(a, b)?;
    let n = b.len();
    let d: Vec<f64> = b.iter().map(|v| 1.0 / v.sqrt()).collect();
    if n == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
            kernel_dim: 0,
        });
    }
    let (mut values, y) = symmetric_eigen(&reduce(a, &d))?;
    let kernel_dim = clamp(&mut values)?;
    let vectors = Mat::from_fn(n, n, |i, j| d[i] * y[(i, j)]);
    Ok(Eigensystem {
        values,
        vectors,
        kernel_dim,
    })
}

/// Like [`solve_gevp`], for `A` with the known null vector `kernel`.
///
/// The first eigenpair is `(0, kernel / ‖kernel‖_B)` exactly; the others are
/// computed on the `B`-orthogonal complement.
pub fn solve_gevp_deflated(a: &Mat<f64>, b: &[f64], kernel: &[f64]) -> Result<Eigensystem> {
    let scale = check_inputs(a, b)?;
    let n = b.len();
    if kernel.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: kernel.len(),
            context: "kernel vector",
        });
    }
    let d: Vec<f64> = b.iter().map(|v| 1.0 / v.sqrt()).collect();
    // kernel of the reduced matrix: B^{1/2} z
    let mut q: Vec<f64> = kernel.iter().zip(b).map(|(z, bi)| z * bi.sqrt()).collect();
    let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(qn > 0.0) {
        return Err(Error::Eigensolver("zero kernel vector".into()));
    }
    q.iter_mut().for_each(|v| *v /= qn);
    let az = {
        let mut r: f64 = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| a[(i, j)] * kernel[j]).sum();
            r = r.max(row.abs());
        }
        r
    };
    let kmax = kernel.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if az > 1e-10 * scale * kmax * n as f64 {
        return Err(Error::Eigensolver(format!(
            "supplied kernel vector is not annihilated (|A z|_inf = {az:e})"
        )));
    }

    let c = reduce(a, &d);
    // Householder H = I - 2 w wᵀ / wᵀw maps q to ∓e₀; columns 1.. span q⊥.
    let mut w = q.clone();
    w[0] += if q[0] >= 0.0 { 1.0 } else { -1.0 };
    let ww: f64 = w.iter().map(|v| v * v).sum();
    let cw: Vec<f64> = (0..n).map(|i| (0..n).map(|j| c[(i, j)] * w[j]).sum()).collect();
    let wcw: f64 = w.iter().zip(&cw).map(|(a, b)| a * b).sum();
    let (s1, s2) = (2.0 / ww, 4.0 * wcw / (ww * ww));
    let hch = |i: usize, j: usize| {
        c[(i, j)] - s1 * (w[i] * cw[j] + cw[i] * w[j]) + s2 * w[i] * w[j]
    };
    let m = n - 1;
    let reduced = Mat::from_fn(m, m, |i, j| 0.5 * (hch(i + 1, j + 1) + hch(j + 1, i + 1)));
    let (mut rest, z) = if m > 0 {
        symmetric_eigen(&reduced)?
    } else {
        (Vec::new(), Mat::zeros(0, 0))
    };
    let mut values = Vec::with_capacity(n);
    values.push(0.0);
    values.append(&mut rest);
    let kernel_dim = clamp(&mut values)?;

    let mut vectors = Mat::zeros(n, n);
    for i in 0..n {
        vectors[(i, 0)] = d[i] * q[i];
    }
    for k in 0..m {
        // y = H [0; z_k]
        let wz: f64 = (0..m).map(|i| w[i + 1] * z[(i, k)]).sum();
        for i in 0..n {
            let yk = if i == 0 { 0.0 } else { z[(i - 1, k)] };
            vectors[(i, k + 1)] = d[i] * (yk - s1 * w[i] * wz);
        }
    }
    Ok(Eigensystem {
        values,
        vectors,
        kernel_dim,
    })
}

/// Keeps the eigenpairs with `λ < threshold`, but at least `floor` of them.
pub fn select(sys: &Eigensystem, threshold: f64, floor: usize) -> EigenSelection {
    let below = sys.values.iter().take_while(|&&v| v < threshold).count();
    let count = below.max(floor).min(sys.dim());
    EigenSelection {
        eigenvalues: sys.values.clone(),
        eigenvectors: (0..count).map(|i| sys.vector(i)).collect(),
        count_selected: count,
        threshold,
        first_excluded: sys.values.get(count).copied(),
        kernel_dim: sys.kernel_dim,
    }
}
