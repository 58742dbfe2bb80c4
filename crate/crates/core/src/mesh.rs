//! Structured tetrahedral meshes of the unit cube.
//!
//! The cube is divided into `n³` small cubes of side `h = 1/n`, and each small
//! cube is split into six tetrahedra sharing its main diagonal
//! (Kuhn/Freudenthal split). The split has the same orientation in every cube,
//! so the triangulation is conforming: each square face of the lattice is cut
//! by the diagonal joining its lowest and highest corner.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Axis permutations; each defines a monotone lattice path from the low
/// corner of a cube to its high corner.
const KUHN_PATHS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [1, 2, 0],
    [2, 0, 1],
    [0, 2, 1],
    [2, 1, 0],
    [1, 0, 2],
];

/// Local vertex triples forming the four faces of a tetrahedron.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Local vertex pairs forming the six edges of a tetrahedron.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

#[derive(Clone, Debug)]
pub struct TetMesh {
    n_per_axis: usize,
    h: f64,
    nodes: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
    on_boundary: Vec<bool>,
    /// CSR-style node → incident tets.
    node_tet_ptr: Vec<usize>,
    node_tet_idx: Vec<usize>,
}

/// Volume and constant P1 basis gradients of one tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub volume: f64,
    pub gradients: [[f64; 3]; 4],
}

/// Fine-face and fine-edge incidence of a mesh.
#[derive(Clone, Debug, Default)]
pub struct Adjacency {
    /// Sorted triangle → owning tets (one on ∂Ω, two in the interior).
    pub faces: HashMap<[usize; 3], Vec<usize>>,
    /// Sorted edge → all tets containing it.
    pub edges: HashMap<[usize; 2], Vec<usize>>,
}

impl TetMesh {
    /// Builds the Kuhn-split mesh of the unit cube with `n_per_axis` cells per axis.
    pub fn build_cube_mesh(n_per_axis: usize) -> Result<Self> {
        if n_per_axis == 0 {
            return Err(Error::InvalidMesh("n_per_axis must be at least 1".into()));
        }
        let n = n_per_axis;
        let np = n + 1;
        let h = 1.0 / n as f64;

        let mut nodes = Vec::with_capacity(np * np * np);
        let mut on_boundary = Vec::with_capacity(np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    let nf = n as f64;
                    nodes.push([i as f64 / nf, j as f64 / nf, k as f64 / nf]);
                    on_boundary.push(
                        i == 0 || j == 0 || k == 0 || i == n || j == n || k == n,
                    );
                }
            }
        }

        let idx = |l: [usize; 3]| l[0] + np * l[1] + np * np * l[2];
        let mut tets = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for (p, path) in KUHN_PATHS.iter().enumerate() {
                        let mut corner = [i, j, k];
                        let mut verts = [0usize; 4];
                        verts[0] = idx(corner);
                        for (step, &axis) in path.iter().enumerate() {
                            corner[axis] += 1;
                            verts[step + 1] = idx(corner);
                        }
                        // odd permutations produce negatively oriented tets
                        if p >= 3 {
                            verts.swap(2, 3);
                        }
                        tets.push(verts);
                    }
                }
            }
        }

        let mut counts = vec![0usize; nodes.len() + 1];
        for t in &tets {
            for &v in t {
                counts[v + 1] += 1;
            }
        }
        for i in 0..nodes.len() {
            counts[i + 1] += counts[i];
        }
        let node_tet_ptr = counts.clone();
        let mut fill = counts;
        let mut node_tet_idx = vec![0; node_tet_ptr[nodes.len()]];
        for (ti, t) in tets.iter().enumerate() {
            for &v in t {
                node_tet_idx[fill[v]] = ti;
                fill[v] += 1;
            }
        }

        Ok(Self {
            n_per_axis,
            h,
            nodes,
            tets,
            on_boundary,
            node_tet_ptr,
            node_tet_idx,
        })
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn node(&self, i: usize) -> [f64; 3] {
        self.nodes[i]
    }

    pub fn tet(&self, t: usize) -> [usize; 4] {
        self.tets[t]
    }

    /// Lexicographic index of lattice point `(i, j, k)`.
    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let np = self.n_per_axis + 1;
        i + np * j + np * np * k
    }

    /// Lattice coordinates of a node.
    pub fn lattice(&self, node: usize) -> [usize; 3] {
        let np = self.n_per_axis + 1;
        [node % np, (node / np) % np, node / (np * np)]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.on_boundary[node]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.on_boundary
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.on_boundary[i])
    }

    /// Tets having `node` as a vertex.
    pub fn tets_of_node(&self, node: usize) -> &[usize] {
        &self.node_tet_idx[self.node_tet_ptr[node]..self.node_tet_ptr[node + 1]]
    }

    /// Tets containing every node of `simplex` (a vertex, edge or triangle).
    pub fn tets_containing(&self, simplex: &[usize]) -> Vec<usize> {
        let Some((&first, rest)) = simplex.split_first() else {
            return Vec::new();
        };
        self.tets_of_node(first)
            .iter()
            .copied()
            .filter(|&t| rest.iter().all(|v| self.tets[t].contains(v)))
            .collect()
    }

    pub fn barycenter(&self, t: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in &self.tets[t] {
            for d in 0..3 {
                c[d] += 0.25 * self.nodes[v][d];
            }
        }
        c
    }

    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        let tet = self.tets.get(t).ok_or(Error::OutOfRange {
            what: "tets",
            index: t,
            len: self.tets.len(),
        })?;
        Ok(tet_geometry(tet.map(|v| self.nodes[v])))
    }

    /// Exhaustive fine-face and fine-edge incidence maps.
    pub fn fine_face_and_edge_adjacency(&self) -> Adjacency {
        let mut adj = Adjacency::default();
        for (ti, tet) in self.tets.iter().enumerate() {
            for f in TET_FACES {
                let mut key = [tet[f[0]], tet[f[1]], tet[f[2]]];
                key.sort_unstable();
                adj.faces.entry(key).or_default().push(ti);
            }
            for e in TET_EDGES {
                let mut key = [tet[e[0]], tet[e[1]]];
                key.sort_unstable();
                adj.edges.entry(key).or_default().push(ti);
            }
        }
        adj
    }

    /// Plain-text export: node count and tet count on the first line, then one
    /// `x y z` line per node, then one line of four zero-based indices per tet.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{} {}", self.nodes.len(), self.tets.len())?;
        for p in &self.nodes {
            writeln!(w, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2])?;
        }
        for t in &self.tets {
            writeln!(w, "{} {} {} {}", t[0], t[1], t[2], t[3])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Volume and barycentric-coordinate gradients of the tet with the given vertices.
pub fn tet_geometry(p: [[f64; 3]; 4]) -> ElementGeometry {
    let e = |a: usize| {
        [
            p[a][0] - p[0][0],
            p[a][1] - p[0][1],
            p[a][2] - p[0][2],
        ]
    };
    let (e1, e2, e3) = (e(1), e(2), e(3));
    let det = e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0])
        + e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]);
    // Rows of the inverse Jacobian are the gradients of λ1..λ3: grad λ_a = (e_b × e_c) / det.
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let g1 = cross(e2, e3).map(|v| v / det);
    let g2 = cross(e3, e1).map(|v| v / det);
    let g3 = cross(e1, e2).map(|v| v / det);
    let g0 = [
        -(g1[0] + g2[0] + g3[0]),
        -(g1[1] + g2[1] + g3[1]),
        -(g1[2] + g2[2] + g3[2]),
    ];
    ElementGeometry {
        volume: det / 6.0,
        gradients: [g0, g1, g2, g3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_subdivisions() {
        assert!(matches!(
            TetMesh::build_cube_mesh(0),
            Err(Error::InvalidMesh(_))
        ));
    }

    #[test]
    fn single_cube_counts() {
        let m = TetMesh::build_cube_mesh(1).unwrap();
        assert_eq!(m.num_nodes(), 8);
        assert_eq!(m.num_tets(), 6);
        let vol: f64 = (0..6).map(|t| m.element_geometry(t).unwrap().volume).sum();
        assert!((vol - 1.0).abs() < 1e-14);
        // every tet contains the main diagonal
        let (lo, hi) = (m.node_index(0, 0, 0), m.node_index(1, 1, 1));
        assert!(m.tets().iter().all(|t| t.contains(&lo) && t.contains(&hi)));
        let adj = m.fine_face_and_edge_adjacency();
        assert_eq!(adj.edges[&[lo, hi]].len(), 6);
    }

    #[test]
    fn boundary_count_matches_lattice() {
        let m = TetMesh::build_cube_mesh(4).unwrap();
        assert_eq!(m.boundary_nodes().count(), 125 - 27);
        for i in 0..m.num_nodes() {
            let p = m.node(i);
            let expect = p.iter().any(|&c| c == 0.0 || c == 1.0);
            assert_eq!(m.is_boundary(i), expect);
        }
    }

    #[test]
    fn reference_kuhn_tet_volume() {
        let h = 0.25;
        let g = tet_geometry([[0.0, 0.0, 0.0], [h, 0.0, 0.0], [h, h, 0.0], [h, h, h]]);
        assert!((g.volume - h * h * h / 6.0).abs() < 1e-16);
    }

    #[test]
    fn gradients_sum_to_zero_and_volumes_positive() {
        let m = TetMesh::build_cube_mesh(3).unwrap();
        for t in 0..m.num_tets() {
            let g = m.element_geometry(t).unwrap();
            assert!(g.volume > 0.0);
            for d in 0..3 {
                let s: f64 = g.gradients.iter().map(|v| v[d]).sum();
                assert!(s.abs() < 1e-14 * m.n_per_axis() as f64);
            }
        }
    }

    #[test]
    fn out_of_range_tet() {
        let m = TetMesh::build_cube_mesh(1).unwrap();
        assert!(matches!(
            m.element_geometry(6),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn boundary_faces_have_one_owner() {
        let m = TetMesh::build_cube_mesh(1).unwrap();
        let adj = m.fine_face_and_edge_adjacency();
        for (face, owners) in &adj.faces {
            let on_bdry = (0..3).any(|d| {
                let c: Vec<f64> = face.iter().map(|&v| m.node(v)[d]).collect();
                c.iter().all(|&x| x == 0.0) || c.iter().all(|&x| x == 1.0)
            });
            assert_eq!(owners.len(), if on_bdry { 1 } else { 2 });
        }
    }

    #[test]
    fn node_ordering_is_lexicographic() {
        let m = TetMesh::build_cube_mesh(3).unwrap();
        assert_eq!(m.node_index(1, 2, 3), 1 + 4 * 2 + 16 * 3);
        assert_eq!(m.lattice(m.node_index(1, 2, 3)), [1, 2, 3]);
        assert_eq!(m.node(m.node_index(1, 2, 3)), [1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }
}
