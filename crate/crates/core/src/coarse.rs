//! Wirebasket and vertex coarse spaces as explicit sparse basis columns.
//!
//! Every column is discrete harmonic in each subdomain and is determined by
//! its trace on the interface Γ:
//!
//! * wirebasket interpolant: nodal delta on the wirebasket, face-harmonic for
//!   the weighted face form on each face;
//! * vertex interpolant: nodal delta at a vertex, harmonic for the weighted
//!   edge form along each edge, zero on open faces;
//! * enrichment: a selected interface eigenvector on one face or edge, zero on
//!   the rest of Γ.

use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::AssembledSystem;
use crate::decomp::NodeClass;
use crate::error::{Error, Result};
use crate::gevp::{select, solve_gevp, solve_gevp_deflated, EigenSelection};
use crate::harmonic::Structure;
use crate::iforms::{edge_forms, face_forms, EdgeForms, FaceForms};
use crate::linalg::{CsrMatrix, DenseCholesky, SparseCholesky};
use crate::problem::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoarseKind {
    Wirebasket,
    Vertex,
}

impl CoarseKind {
    pub fn name(&self) -> &'static str {
        match self {
            CoarseKind::Wirebasket => "wirebasket",
            CoarseKind::Vertex => "vertex",
        }
    }
}

/// Default threshold constants `c` in `λ* = c h/H`.
pub const DEFAULT_C_WIREBASKET_FACE: f64 = 0.6;
pub const DEFAULT_C_VERTEX_FACE: f64 = 0.3;
pub const DEFAULT_C_EDGE: f64 = 1.2096;

/// Eigenvalue thresholds `λ*` for face and edge problems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub face: f64,
    pub edge: f64,
}

impl Thresholds {
    /// `λ* = c h/H` with the default constants for `kind`.
    pub fn default_for(kind: CoarseKind, h_ratio: usize) -> Self {
        let r = 1.0 / h_ratio as f64;
        let face = match kind {
            CoarseKind::Wirebasket => DEFAULT_C_WIREBASKET_FACE,
            CoarseKind::Vertex => DEFAULT_C_VERTEX_FACE,
        };
        Self {
            face: face * r,
            edge: DEFAULT_C_EDGE * r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseOptions {
    pub kind: CoarseKind,
    pub enrichment: bool,
    pub thresholds: Thresholds,
}

impl CoarseOptions {
    pub fn new(kind: CoarseKind, enrichment: bool, h_ratio: usize) -> Self {
        Self {
            kind,
            enrichment,
            thresholds: Thresholds::default_for(kind, h_ratio),
        }
    }
}

/// Origin of a coarse basis column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ColumnTag {
    Interpolant { node: usize },
    FaceEig { face: usize, index: usize },
    EdgeEig { edge: usize, index: usize },
}

impl ColumnTag {
    pub fn describe(&self) -> String {
        match *self {
            ColumnTag::Interpolant { node } => format!("interpolant node {node}"),
            ColumnTag::FaceEig { face, index } => format!("face {face} eig {index}"),
            ColumnTag::EdgeEig { edge, index } => format!("edge {edge} eig {index}"),
        }
    }
}

/// Column supported on a sorted set of interior DOFs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseColumn {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.dofs.iter().zip(&self.values).map(|(&d, v)| v * x[d]).sum()
    }

    /// `y += c · self`.
    pub fn axpy_into(&self, c: f64, y: &mut [f64]) {
        for (&d, v) in self.dofs.iter().zip(&self.values) {
            y[d] += c * v;
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.axpy_into(1.0, &mut v);
        v
    }
}

/// Eigenpairs selected on one structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureSelection {
    pub structure: Structure,
    pub selection: EigenSelection,
}

/// Factorized Dirichlet problem of a face or edge form: open nodes given the perimeter.
#[derive(Debug)]
struct InterfaceDirichlet {
    /// Open nodes (global ids).
    open: Vec<usize>,
    /// Perimeter / endpoint nodes (global ids).
    fixed: Vec<usize>,
    a_oo: SparseCholesky,
    a_of: CsrMatrix,
}

impl InterfaceDirichlet {
    fn new(a_full: &CsrMatrix, closed: &[usize], open_pos: &[usize], fixed_pos: &[usize], what: &str) -> Result<Self> {
        Ok(Self {
            open: open_pos.iter().map(|&p| closed[p]).collect(),
            fixed: fixed_pos.iter().map(|&p| closed[p]).collect(),
            a_oo: SparseCholesky::factor(&a_full.submatrix(open_pos), what)?,
            a_of: a_full.block(open_pos, fixed_pos),
        })
    }

    /// Writes the harmonic values on the open nodes given the fixed-node values of `u`.
    fn solve_into(&self, u: &mut [f64]) {
        let g: Vec<f64> = self.fixed.iter().map(|&x| u[x]).collect();
        if g.iter().all(|&v| v == 0.0) {
            self.open.iter().for_each(|&x| u[x] = 0.0);
            return;
        }
        let mut r = self.a_of.mul_vec_alloc(&g);
        r.iter_mut().for_each(|v| *v = -*v);
        self.a_oo.solve_in_place(&mut r);
        for (&x, v) in self.open.iter().zip(r) {
            u[x] = v;
        }
    }
}

/// Interface forms and their Dirichlet solvers for one coarse kind.
#[derive(Debug)]
pub struct InterfaceData {
    pub face_forms: Vec<FaceForms>,
    pub edge_forms: Vec<EdgeForms>,
    face_solvers: Vec<InterfaceDirichlet>,
    edge_solvers: Vec<InterfaceDirichlet>,
}

impl InterfaceData {
    pub fn new(problem: &Problem, kind: CoarseKind) -> Result<Self> {
        let d = &problem.decomp;
        let face_forms = d
            .faces()
            .iter()
            .map(|f| face_forms(&problem.mesh, &problem.field, f))
            .collect::<Result<Vec<_>>>()?;
        let edge_forms = d
            .edges()
            .iter()
            .map(|e| edge_forms(&problem.mesh, &problem.field, e))
            .collect::<Result<Vec<_>>>()?;
        let mut face_solvers = Vec::new();
        let mut edge_solvers = Vec::new();
        match kind {
            CoarseKind::Wirebasket => {
                for (f, ff) in d.faces().iter().zip(&face_forms) {
                    face_solvers.push(InterfaceDirichlet::new(
                        &ff.a_face_full,
                        &f.closed_nodes,
                        &ff.open_positions,
                        &ff.perimeter_positions,
                        &format!("face form {}", f.id),
                    )?);
                }
            }
            CoarseKind::Vertex => {
                for (e, ef) in d.edges().iter().zip(&edge_forms) {
                    let s = e.s;
                    let open: Vec<usize> = (1..s).collect();
                    edge_solvers.push(InterfaceDirichlet::new(
                        &ef.a_edge_full,
                        &e.closed_nodes,
                        &open,
                        &[0, s],
                        &format!("edge form {}", e.id),
                    )?);
                }
            }
        }
        Ok(Self {
            face_forms,
            edge_forms,
            face_solvers,
            edge_solvers,
        })
    }
}

/// Explicit coarse basis with column provenance and the selected eigenpairs.
#[derive(Debug)]
pub struct CoarseBasis {
    pub kind: CoarseKind,
    pub options: CoarseOptions,
    pub columns: Vec<SparseColumn>,
    pub tags: Vec<ColumnTag>,
    pub selections: Vec<StructureSelection>,
    pub interface: InterfaceData,
    num_dofs: usize,
    /// Interface DOFs; a harmonic column's residual `A φ` lives there.
    interface_dof: Vec<bool>,
}

/// Scratch nodal vector that remembers which subdomains it touched.
struct Scratch {
    u: Vec<f64>,
}

impl Scratch {
    fn column(&mut self, problem: &Problem, subdomains: &[usize]) -> SparseColumn {
        let map = &problem.system.dof_map;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for &k in subdomains {
            for &x in &problem.decomp.subdomain(k).closed_nodes {
                let v = self.u[x];
                if v != 0.0 {
                    if let Some(dof) = map.dof(x) {
                        entries.push((dof, v));
                    }
                }
            }
        }
        for &k in subdomains {
            for &x in &problem.decomp.subdomain(k).closed_nodes {
                self.u[x] = 0.0;
            }
        }
        entries.sort_unstable_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        SparseColumn {
            dofs: entries.iter().map(|e| e.0).collect(),
            values: entries.iter().map(|e| e.1).collect(),
        }
    }
}

fn union_sorted(lists: impl IntoIterator<Item = Vec<usize>>) -> Vec<usize> {
    let mut all: Vec<usize> = lists.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    all
}

impl CoarseBasis {
    pub fn build(problem: &Problem, options: CoarseOptions) -> Result<Self> {
        let d = &problem.decomp;
        let interface = InterfaceData::new(problem, options.kind)?;
        let nn = problem.mesh.num_nodes();
        let mut scratch = Scratch { u: vec![0.0; nn] };
        let mut columns = Vec::new();
        let mut tags = Vec::new();
        let mut selections = Vec::new();

        match options.kind {
            CoarseKind::Wirebasket => {
                // faces whose perimeter contains each node
                let mut faces_at: Vec<Vec<usize>> = vec![Vec::new(); nn];
                for f in d.faces() {
                    for &x in &f.boundary_nodes {
                        faces_at[x].push(f.id);
                    }
                }
                for &w in d.wirebasket_nodes() {
                    scratch.u[w] = 1.0;
                    for &f in &faces_at[w] {
                        interface.face_solvers[f].solve_into(&mut scratch.u);
                    }
                    let subs = union_sorted(
                        faces_at[w]
                            .iter()
                            .map(|&f| d.subdomains_touching(NodeClass::Face(f)))
                            .chain([d.covering_subdomains(&problem.mesh, w)]),
                    );
                    problem.extender.extend_in(&subs, &mut scratch.u)?;
                    columns.push(scratch.column(problem, &subs));
                    tags.push(ColumnTag::Interpolant { node: w });
                }
                if options.enrichment {
                    for (f, ff) in d.faces().iter().zip(&interface.face_forms) {
                        let sys = solve_gevp(&ff.a_face.to_dense(), &ff.b_face)?;
                        let sel = select(&sys, options.thresholds.face, 0);
                        selections.push(StructureSelection {
                            structure: Structure::Face(f.id),
                            selection: sel,
                        });
                    }
                }
            }
            CoarseKind::Vertex => {
                for v in d.vertices() {
                    scratch.u[v.node] = 1.0;
                    for &e in &v.edges {
                        interface.edge_solvers[e].solve_into(&mut scratch.u);
                    }
                    let subs = v.sharing.clone();
                    problem.extender.extend_in(&subs, &mut scratch.u)?;
                    columns.push(scratch.column(problem, &subs));
                    tags.push(ColumnTag::Interpolant { node: v.node });
                }
                if options.enrichment {
                    for (e, ef) in d.edges().iter().zip(&interface.edge_forms) {
                        let sys = solve_gevp(&ef.a_edge.to_dense(), &ef.b_edge)?;
                        selections.push(StructureSelection {
                            structure: Structure::Edge(e.id),
                            selection: select(&sys, options.thresholds.edge, 0),
                        });
                    }
                }
                // The interior-face zero mode is always part of the space.
                let face_threshold = if options.enrichment {
                    options.thresholds.face
                } else {
                    0.0
                };
                for (f, ff) in d.faces().iter().zip(&interface.face_forms) {
                    let a_i = ff.interior_form(f)?;
                    let sys =
                        solve_gevp_deflated(&a_i.to_dense(), &ff.b_face, &vec![1.0; f.nodes.len()])?;
                    if sys.kernel_dim > 1 {
                        log::warn!(
                            "interior form of face {} has a {}-dimensional kernel",
                            f.id,
                            sys.kernel_dim
                        );
                    }
                    selections.push(StructureSelection {
                        structure: Structure::Face(f.id),
                        selection: select(&sys, face_threshold, 1),
                    });
                }
            }
        }

        for sel in &selections {
            for (i, xi) in sel.selection.eigenvectors.iter().enumerate() {
                let st = sel.structure;
                for (&x, &v) in st.nodes(d).iter().zip(xi) {
                    scratch.u[x] = v;
                }
                let subs = d.subdomains_touching(st.class());
                problem.extender.extend_in(&subs, &mut scratch.u)?;
                columns.push(scratch.column(problem, &subs));
                tags.push(match st {
                    Structure::Face(face) => ColumnTag::FaceEig { face, index: i },
                    Structure::Edge(edge) => ColumnTag::EdgeEig { edge, index: i },
                });
            }
        }

        let map = &problem.system.dof_map;
        let interface_dof = map
            .dof_nodes()
            .iter()
            .map(|&x| d.node_class(x).is_interface())
            .collect();
        Ok(Self {
            kind: options.kind,
            options,
            columns,
            tags,
            selections,
            interface,
            num_dofs: map.num_dofs(),
            interface_dof,
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn num_interpolant_columns(&self) -> usize {
        self.tags
            .iter()
            .filter(|t| matches!(t, ColumnTag::Interpolant { .. }))
            .count()
    }

    pub fn num_enrichment_columns(&self) -> usize {
        self.dim() - self.num_interpolant_columns()
    }

    /// `R₀ᵀ r`: inner products of every column with `r`.
    pub fn restrict(&self, r: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| c.dot(r)).collect()
    }

    /// `Σ_j c_j φ_j`.
    pub fn prolong(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.num_dofs];
        for (c, col) in coeffs.iter().zip(&self.columns) {
            col.axpy_into(*c, &mut y);
        }
        y
    }

    /// Nodal wirebasket interpolant of `u_full`: `u` on the wirebasket, face-harmonic
    /// on faces, discrete harmonic inside subdomains, zero on ∂Ω.
    pub fn wirebasket_interpolant(&self, problem: &Problem, u_full: &[f64]) -> Result<Vec<f64>> {
        if self.kind != CoarseKind::Wirebasket {
            return Err(Error::Config("wirebasket interpolant requested from a vertex basis".into()));
        }
        let d = &problem.decomp;
        let mut v = vec![0.0; u_full.len()];
        for &w in d.wirebasket_nodes() {
            v[w] = u_full[w];
        }
        for s in &self.interface.face_solvers {
            s.solve_into(&mut v);
        }
        problem.extender.extend_trace(&mut v)?;
        Ok(v)
    }

    /// Nodal vertex interpolant of `u_full`: `u` at vertices, edge-harmonic on edges,
    /// zero on open faces, discrete harmonic inside subdomains.
    pub fn vertex_interpolant(&self, problem: &Problem, u_full: &[f64]) -> Result<Vec<f64>> {
        if self.kind != CoarseKind::Vertex {
            return Err(Error::Config("vertex interpolant requested from a wirebasket basis".into()));
        }
        let d = &problem.decomp;
        let mut v = vec![0.0; u_full.len()];
        for vx in d.vertices() {
            v[vx.node] = u_full[vx.node];
        }
        for s in &self.interface.edge_solvers {
            s.solve_into(&mut v);
        }
        problem.extender.extend_trace(&mut v)?;
        Ok(v)
    }

    /// Column coefficients of the coarse interpolant `I₀ u`: nodal values for the
    /// interpolant columns and `b`-projection coefficients of the interpolation
    /// remainder for the enrichment columns.
    pub fn interpolation_coefficients(&self, problem: &Problem, u_full: &[f64]) -> Result<Vec<f64>> {
        let base = match self.kind {
            CoarseKind::Wirebasket => self.wirebasket_interpolant(problem, u_full)?,
            CoarseKind::Vertex => self.vertex_interpolant(problem, u_full)?,
        };
        let d = &problem.decomp;
        let mut coeffs = Vec::with_capacity(self.dim());
        for tag in &self.tags {
            if let ColumnTag::Interpolant { node } = *tag {
                coeffs.push(u_full[node]);
            }
        }
        for sel in &self.selections {
            let (nodes, b) = match sel.structure {
                Structure::Face(f) => (&d.faces()[f].nodes, &self.interface.face_forms[f].b_face),
                Structure::Edge(e) => (&d.edges()[e].nodes, &self.interface.edge_forms[e].b_edge),
            };
            for xi in &sel.selection.eigenvectors {
                let c: f64 = nodes
                    .iter()
                    .zip(b)
                    .zip(xi)
                    .map(|((&x, bx), v)| bx * (u_full[x] - base[x]) * v)
                    .sum();
                coeffs.push(c);
            }
        }
        Ok(coeffs)
    }

    /// `I₀ u` as an interior-DOF vector.
    pub fn interpolate(&self, problem: &Problem, u_full: &[f64]) -> Result<Vec<f64>> {
        Ok(self.prolong(&self.interpolation_coefficients(problem, u_full)?))
    }

    /// Dense column-major export plus a provenance CSV.
    pub fn export(&self, matrix_path: &Path, tags_path: &Path) -> Result<()> {
        let mut dense = vec![0.0; self.num_dofs * self.dim()];
        for (j, c) in self.columns.iter().enumerate() {
            c.axpy_into(1.0, &mut dense[j * self.num_dofs..(j + 1) * self.num_dofs]);
        }
        crate::mtx::write_dense(matrix_path, self.num_dofs, self.dim(), &dense)?;
        let mut w = csv::Writer::from_path(tags_path)?;
        w.write_record(["column", "kind", "structure", "index"])?;
        for (j, t) in self.tags.iter().enumerate() {
            let (k, s, i) = match *t {
                ColumnTag::Interpolant { node } => ("interpolant", node, 0),
                ColumnTag::FaceEig { face, index } => ("face-eig", face, index),
                ColumnTag::EdgeEig { edge, index } => ("edge-eig", edge, index),
            };
            w.write_record([j.to_string(), k.to_string(), s.to_string(), i.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Galerkin coarse matrix `A₀ = Φᵀ A Φ` and its Cholesky factor.
#[derive(Debug)]
pub struct CoarseOperator {
    pub a0: Mat<f64>,
    chol: DenseCholesky,
}

impl CoarseOperator {
    pub fn dim(&self) -> usize {
        self.a0.nrows()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.chol.solve_in_place(x);
    }
}

/// Assembles and factors `A₀`. Columns are discrete harmonic, so `A φ_j` is
/// supported on interface DOFs and only those entries enter the products.
pub fn assemble_coarse_operator(basis: &CoarseBasis, system: &AssembledSystem) -> Result<CoarseOperator> {
    let c = basis.dim();
    if c == 0 {
        return Err(Error::EmptyCoarseSpace);
    }
    if system.dim() != basis.num_dofs {
        return Err(Error::DimensionMismatch {
            expected: basis.num_dofs,
            actual: system.dim(),
            context: "coarse basis vs system",
        });
    }
    // interface part of each column
    let traces: Vec<SparseColumn> = basis
        .columns
        .iter()
        .map(|col| {
            let (dofs, values) = col
                .dofs
                .iter()
                .zip(&col.values)
                .filter(|(&d, _)| basis.interface_dof[d])
                .map(|(&d, &v)| (d, v))
                .unzip();
            SparseColumn { dofs, values }
        })
        .collect();
    let mut a0 = Mat::<f64>::zeros(c, c);
    let mut x = vec![0.0; system.dim()];
    for j in 0..c {
        basis.columns[j].axpy_into(1.0, &mut x);
        let y = system.a.mul_vec_alloc(&x);
        for &d in &basis.columns[j].dofs {
            x[d] = 0.0;
        }
        for i in 0..c {
            a0[(i, j)] = traces[i].dot(&y);
        }
    }
    let a0 = Mat::from_fn(c, c, |i, j| 0.5 * (a0[(i, j)] + a0[(j, i)]));
    let chol = DenseCholesky::factor(&a0, "coarse matrix (linearly dependent coarse basis?)")?;
    Ok(CoarseOperator { a0, chol })
}
