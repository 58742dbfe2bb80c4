//! P1 stiffness and load assembly with Dirichlet elimination.

use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::TetMesh;

/// Interior-DOF numbering of the mesh nodes.
#[derive(Clone, Debug)]
pub struct DofMap {
    node_to_dof: Vec<Option<usize>>,
    dof_to_node: Vec<usize>,
}

impl DofMap {
    /// Numbers the nodes not flagged in `boundary` in increasing node order.
    pub fn from_boundary(boundary: &[bool]) -> Self {
        let mut node_to_dof = vec![None; boundary.len()];
        let mut dof_to_node = Vec::new();
        for (x, &b) in boundary.iter().enumerate() {
            if !b {
                node_to_dof[x] = Some(dof_to_node.len());
                dof_to_node.push(x);
            }
        }
        Self {
            node_to_dof,
            dof_to_node,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_to_dof.len()
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        self.node_to_dof[node]
    }

    pub fn node(&self, dof: usize) -> usize {
        self.dof_to_node[dof]
    }

    pub fn dof_nodes(&self) -> &[usize] {
        &self.dof_to_node
    }

    /// Nodal vector with zeros on eliminated nodes.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.node_to_dof.len()];
        for (d, &x) in self.dof_to_node.iter().enumerate() {
            full[x] = u[d];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dof_to_node.iter().map(|&x| full[x]).collect()
    }
}

/// `A u = f` on the interior DOFs.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub a: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

/// Sorted node neighbourhoods (including the node itself) induced by the tets.
fn node_graph(mesh: &TetMesh) -> Vec<Vec<usize>> {
    (0..mesh.num_nodes())
        .map(|x| {
            let mut nb: Vec<usize> = mesh
                .tets_of_node(x)
                .iter()
                .flat_map(|&t| mesh.tet(t))
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Full stiffness `A_ij = Σ_τ α_τ |τ| ∇φ_i·∇φ_j` over all mesh nodes.
pub fn assemble_stiffness(mesh: &TetMesh, field: &CoefficientField) -> Result<CsrMatrix> {
    if field.alpha().len() != mesh.num_tets() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_tets(),
            actual: field.alpha().len(),
            context: "coefficient field vs mesh",
        });
    }
    let n = mesh.num_nodes();
    let mut a = CsrMatrix::from_pattern(n, n, &node_graph(mesh));
    for t in 0..mesh.num_tets() {
        let tet = mesh.tet(t);
        let g = mesh.element_geometry(t)?;
        let w = field.tet_value(t) * g.volume;
        for (p, &i) in tet.iter().enumerate() {
            for (q, &j) in tet.iter().enumerate() {
                let gij: f64 = (0..3).map(|d| g.gradients[p][d] * g.gradients[q][d]).sum();
                a.add_to(i, j, w * gij);
            }
        }
    }
    Ok(a)
}

/// Neumann stiffness of the tets in `tets`, numbered by position in `nodes`.
pub fn assemble_local_stiffness(
    mesh: &TetMesh,
    field: &CoefficientField,
    tets: &[usize],
    nodes: &[usize],
) -> Result<CsrMatrix> {
    let mut local = vec![usize::MAX; mesh.num_nodes()];
    for (l, &x) in nodes.iter().enumerate() {
        local[x] = l;
    }
    let mut triplets = Vec::with_capacity(16 * tets.len());
    for &t in tets {
        let tet = mesh.tet(t);
        let g = mesh.element_geometry(t)?;
        let w = field.tet_value(t) * g.volume;
        for (p, &i) in tet.iter().enumerate() {
            let li = local[i];
            if li == usize::MAX {
                return Err(Error::InvalidDecomposition(format!(
                    "tet {t} has vertex {i} outside the local node list"
                )));
            }
            for (q, &j) in tet.iter().enumerate() {
                let gij: f64 = (0..3).map(|d| g.gradients[p][d] * g.gradients[q][d]).sum();
                triplets.push((li, local[j], w * gij));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(nodes.len(), nodes.len(), &triplets))
}

/// Exact load for constant `f`: each tet gives `f |τ| / 4` to each of its vertices.
pub fn assemble_load(mesh: &TetMesh, f_constant: f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_nodes()];
    for t in 0..mesh.num_tets() {
        let vol = mesh
            .element_geometry(t)
            .map(|g| g.volume)
            .unwrap_or_default();
        for v in mesh.tet(t) {
            load[v] += 0.25 * f_constant * vol;
        }
    }
    load
}

/// Removes the rows and columns of `boundary` nodes (homogeneous Dirichlet data).
pub fn eliminate_dirichlet(
    a_full: &CsrMatrix,
    rhs_full: &[f64],
    boundary: &[bool],
) -> Result<AssembledSystem> {
    if a_full.nrows() != rhs_full.len() || boundary.len() != rhs_full.len() {
        return Err(Error::DimensionMismatch {
            expected: a_full.nrows(),
            actual: rhs_full.len().min(boundary.len()),
            context: "Dirichlet elimination",
        });
    }
    let dof_map = DofMap::from_boundary(boundary);
    if dof_map.num_dofs() == 0 {
        return Err(Error::InvalidMesh(
            "no interior nodes remain after Dirichlet elimination; use n_per_axis >= 2".into(),
        ));
    }
    let a = a_full.submatrix(dof_map.dof_nodes());
    let rhs = dof_map.restrict(rhs_full);
    Ok(AssembledSystem { a, rhs, dof_map })
}

/// Assembles and restricts the model problem `-div(α ∇u) = f`, `u = 0` on the boundary.
pub fn assemble_system(
    mesh: &TetMesh,
    field: &CoefficientField,
    f_constant: f64,
) -> Result<(CsrMatrix, AssembledSystem)> {
    let a_full = assemble_stiffness(mesh, field)?;
    let load = assemble_load(mesh, f_constant);
    let sys = eliminate_dirichlet(&a_full, &load, mesh.boundary_mask())?;
    Ok((a_full, sys))
}
