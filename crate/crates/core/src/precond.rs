//! Two-level additive Schwarz preconditioner with exact local and coarse solves.
//!
//! `M⁻¹ r = R₀ A₀⁻¹ R₀ᵀ r + Σ_i R_iᵀ A_i⁻¹ R_i r`, where `R_i` restricts to the
//! interior DOFs of the overlapping subdomain `Ω'_i` and `R₀` holds the coarse
//! basis columns.

use crate::coarse::{assemble_coarse_operator, CoarseBasis, CoarseOperator};
use crate::error::{Error, Result};
use crate::linalg::{LinearOperator, SparseCholesky};
use crate::problem::Problem;

/// Exact solver on the DOFs of one overlapping subdomain.
#[derive(Debug)]
pub struct LocalSolver {
    pub dofs: Vec<usize>,
    chol: SparseCholesky,
}

#[derive(Debug)]
pub struct CoarseSolver {
    pub basis: CoarseBasis,
    pub operator: CoarseOperator,
}

#[derive(Debug)]
pub struct SchwarzPreconditioner {
    locals: Vec<LocalSolver>,
    coarse: Option<CoarseSolver>,
    dim: usize,
}

impl SchwarzPreconditioner {
    /// Factors all local blocks and, if a basis is given, the coarse matrix.
    pub fn setup(problem: &Problem, basis: Option<CoarseBasis>) -> Result<Self> {
        let sys = &problem.system;
        let map = &sys.dof_map;
        let locals = problem
            .decomp
            .subdomains()
            .iter()
            .map(|sub| {
                let dofs: Vec<usize> = sub
                    .overlap_nodes
                    .iter()
                    .map(|&x| {
                        map.dof(x).ok_or_else(|| {
                            Error::InvalidDecomposition(format!(
                                "overlap node {x} of subdomain {} is a Dirichlet node",
                                sub.id
                            ))
                        })
                    })
                    .collect::<Result<_>>()?;
                let chol = SparseCholesky::factor(
                    &sys.a.submatrix(&dofs),
                    &format!("local block of subdomain {}", sub.id),
                )?;
                Ok(LocalSolver { dofs, chol })
            })
            .collect::<Result<Vec<_>>>()?;
        let coarse = basis
            .map(|basis| {
                let operator = assemble_coarse_operator(&basis, sys)?;
                Ok::<_, Error>(CoarseSolver { basis, operator })
            })
            .transpose()?;
        Ok(Self {
            locals,
            coarse,
            dim: sys.dim(),
        })
    }

    pub fn num_local_solvers(&self) -> usize {
        self.locals.len()
    }

    pub fn locals(&self) -> &[LocalSolver] {
        &self.locals
    }

    pub fn coarse(&self) -> Option<&CoarseSolver> {
        self.coarse.as_ref()
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse.as_ref().map_or(0, |c| c.basis.dim())
    }

    /// Largest number of subspaces (locals plus coarse) containing any one DOF.
    pub fn max_covering(&self) -> usize {
        let mut count = vec![0usize; self.dim];
        for l in &self.locals {
            for &d in &l.dofs {
                count[d] += 1;
            }
        }
        count.into_iter().max().unwrap_or(0)
    }

    /// `z = M⁻¹ r`.
    pub fn apply_checked(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        if r.len() != self.dim || z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: if r.len() != self.dim { r.len() } else { z.len() },
                context: "preconditioner apply",
            });
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        let mut buf = Vec::new();
        for l in &self.locals {
            buf.clear();
            buf.extend(l.dofs.iter().map(|&d| r[d]));
            l.chol.solve_in_place(&mut buf);
            for (&d, v) in l.dofs.iter().zip(&buf) {
                z[d] += v;
            }
        }
        if let Some(c) = &self.coarse {
            let mut y = c.basis.restrict(r);
            c.operator.solve_in_place(&mut y);
            for (coef, col) in y.iter().zip(&c.basis.columns) {
                col.axpy_into(*coef, z);
            }
        }
        Ok(())
    }
}

impl LinearOperator for SchwarzPreconditioner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_checked(x, y)
            .expect("preconditioner applied to a vector of the wrong length");
    }
}
