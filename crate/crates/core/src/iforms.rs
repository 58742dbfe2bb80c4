//! Weighted bilinear forms on subdomain faces and edges.

use crate::coeff::CoefficientField;
use crate::decomp::{split_face_interior, SubEdge, SubFace};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::TetMesh;

#[derive(Clone, Debug)]
pub struct FaceForms {
    /// Weighted 2D stiffness on the closed face, indexed like `SubFace::closed_nodes`.
    pub a_face_full: CsrMatrix,
    /// `a_face_full` restricted to the open-face nodes.
    pub a_face: CsrMatrix,
    /// Same form summed over the triangles away from the face boundary; `None` when there are none.
    pub a_face_interior: Option<CsrMatrix>,
    /// Diagonal of the nodal weight form on the open-face nodes.
    pub b_face: Vec<f64>,
    /// Positions in `closed_nodes` of the open-face nodes.
    pub open_positions: Vec<usize>,
    /// Positions in `closed_nodes` of the perimeter nodes.
    pub perimeter_positions: Vec<usize>,
}

impl FaceForms {
    pub fn interior_form(&self, face: &SubFace) -> Result<&CsrMatrix> {
        self.a_face_interior.as_ref().ok_or_else(|| {
            Error::InvalidDecomposition(format!(
                "face {} has an empty interior triangle set (H/h = {})",
                face.id, face.s
            ))
        })
    }
}

#[derive(Clone, Debug)]
pub struct EdgeForms {
    /// Tridiagonal 1D stiffness on all `s+1` edge nodes.
    pub a_edge_full: CsrMatrix,
    /// Restriction to the open-edge nodes.
    pub a_edge: CsrMatrix,
    /// Diagonal of `h⁻¹ Σ ᾱ_x u v` on the open-edge nodes.
    pub b_edge: Vec<f64>,
}

/// P1 stiffness of a triangle given in (any) planar coordinates.
fn triangle_stiffness(p: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (2.0 * area2.abs());
        }
    }
    k
}

fn assemble_face(
    face: &SubFace,
    triangles: impl Iterator<Item = usize>,
    weights: &[f64],
) -> CsrMatrix {
    let h = 1.0 / face.s as f64;
    let mut triplets = Vec::new();
    for t in triangles {
        let tri = &face.triangles[t];
        let coords = tri.local.map(|q| [q[0] as f64 * h, q[1] as f64 * h]);
        let k = triangle_stiffness(coords);
        let idx = tri.local.map(|q| face.closed_index(q[0], q[1]));
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((idx[a], idx[b], weights[t] * k[a][b]));
            }
        }
    }
    let nc = face.closed_nodes.len();
    CsrMatrix::from_triplets(nc, nc, &triplets)
}

/// Assembles the face forms with triangle weights `max(α_τ+, α_τ-)` and nodal weights `ᾱ_x`.
pub fn face_forms(mesh: &TetMesh, field: &CoefficientField, face: &SubFace) -> Result<FaceForms> {
    let weights: Vec<f64> = face
        .triangles
        .iter()
        .map(|t| field.face_triangle_weight(mesh, t.nodes))
        .collect::<Result<_>>()?;
    let a_face_full = assemble_face(face, 0..face.triangles.len(), &weights);

    let s = face.s;
    let mut open_positions = Vec::with_capacity(face.nodes.len());
    let mut perimeter_positions = Vec::new();
    for v in 0..=s {
        for u in 0..=s {
            let p = face.closed_index(u, v);
            if face.on_perimeter(u, v) {
                perimeter_positions.push(p);
            } else {
                open_positions.push(p);
            }
        }
    }
    let a_face = a_face_full.submatrix(&open_positions);

    let a_face_interior = match split_face_interior(face) {
        Ok((_, inner)) => {
            Some(assemble_face(face, inner.into_iter(), &weights).submatrix(&open_positions))
        }
        Err(_) => None,
    };

    let b_face = face
        .nodes
        .iter()
        .map(|&x| field.node_weight(x))
        .collect::<Result<_>>()?;

    Ok(FaceForms {
        a_face_full,
        a_face,
        a_face_interior,
        b_face,
        open_positions,
        perimeter_positions,
    })
}

/// Assembles `Σ_e ᾱ_e ∫ u'v'` and `h⁻¹ Σ_x ᾱ_x u v` on an edge.
pub fn edge_forms(mesh: &TetMesh, field: &CoefficientField, edge: &SubEdge) -> Result<EdgeForms> {
    let h = mesh.h();
    let nc = edge.closed_nodes.len();
    let mut triplets = Vec::with_capacity(4 * edge.segments.len());
    for (p, seg) in edge.segments.iter().enumerate() {
        let w = field.edge_segment_weight(mesh, *seg)? / h;
        triplets.extend([
            (p, p, w),
            (p + 1, p + 1, w),
            (p, p + 1, -w),
            (p + 1, p, -w),
        ]);
    }
    let a_edge_full = CsrMatrix::from_triplets(nc, nc, &triplets);
    let open: Vec<usize> = (1..nc - 1).collect();
    let a_edge = a_edge_full.submatrix(&open);
    let b_edge = edge
        .nodes
        .iter()
        .map(|&x| field.node_weight(x).map(|a| a / h))
        .collect::<Result<_>>()?;
    Ok(EdgeForms {
        a_edge_full,
        a_edge,
        b_edge,
    })
}
