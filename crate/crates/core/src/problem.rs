//! Discretized model problem on a decomposed cube.

use crate::assembly::{assemble_system, AssembledSystem};
use crate::coeff::{CoefficientField, InclusionSpec};
use crate::decomp::Decomposition;
use crate::error::Result;
use crate::harmonic::HarmonicExtender;
use crate::linalg::CsrMatrix;
use crate::mesh::TetMesh;

/// Mesh, coefficient, decomposition and the assembled operators shared by
/// the coarse-space construction and the preconditioner.
#[derive(Debug)]
pub struct Problem {
    pub mesh: TetMesh,
    pub field: CoefficientField,
    pub decomp: Decomposition,
    /// Stiffness over all mesh nodes, before Dirichlet elimination.
    pub a_full: CsrMatrix,
    pub system: AssembledSystem,
    pub extender: HarmonicExtender,
}

impl Problem {
    pub fn new(
        mesh: TetMesh,
        field: CoefficientField,
        subdomains_per_axis: usize,
        f_constant: f64,
    ) -> Result<Self> {
        let decomp = Decomposition::decompose(&mesh, subdomains_per_axis)?;
        let (a_full, system) = assemble_system(&mesh, &field, f_constant)?;
        let extender = HarmonicExtender::new(&a_full, &decomp)?;
        Ok(Self {
            mesh,
            field,
            decomp,
            a_full,
            system,
            extender,
        })
    }

    /// Unit cube with `m³` subdomains of `h_ratio = H/h` cells per side.
    pub fn build(
        subdomains_per_axis: usize,
        h_ratio: usize,
        background: f64,
        inclusions: &[InclusionSpec],
        f_constant: f64,
    ) -> Result<Self> {
        let mesh = TetMesh::build_cube_mesh(subdomains_per_axis * h_ratio)?;
        let field = CoefficientField::assign(&mesh, background, inclusions)?;
        Self::new(mesh, field, subdomains_per_axis, f_constant)
    }

    pub fn num_dofs(&self) -> usize {
        self.system.dim()
    }

    /// `H/h`.
    pub fn h_ratio(&self) -> usize {
        self.decomp.cells_per_subdomain()
    }
}
