//! Uniform subdomain grid, interface classification and overlapping subdomains.
//!
//! Subdomain `(a, b, c)` of the `m×m×m` grid has index `a + m b + m² c` and
//! covers lattice cells `[a s, (a+1) s) × …` where `s = H/h`. The interface Γ
//! (subdomain boundaries minus ∂Ω) splits into open faces, open edges and
//! vertices; the wirebasket is the union of edges and vertices.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::TetMesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", content = "id", rename_all = "kebab-case")]
pub enum NodeClass {
    /// On ∂Ω.
    DomainBoundary,
    SubdomainInterior(usize),
    Face(usize),
    Edge(usize),
    Vertex(usize),
}

impl NodeClass {
    pub fn label(&self) -> &'static str {
        match self {
            NodeClass::DomainBoundary => "boundary",
            NodeClass::SubdomainInterior(_) => "interior",
            NodeClass::Face(_) => "face",
            NodeClass::Edge(_) => "edge",
            NodeClass::Vertex(_) => "vertex",
        }
    }

    pub fn structure_id(&self) -> Option<usize> {
        match *self {
            NodeClass::DomainBoundary => None,
            NodeClass::SubdomainInterior(i)
            | NodeClass::Face(i)
            | NodeClass::Edge(i)
            | NodeClass::Vertex(i) => Some(i),
        }
    }

    pub fn is_interface(&self) -> bool {
        matches!(self, NodeClass::Face(_) | NodeClass::Edge(_) | NodeClass::Vertex(_))
    }

    pub fn is_wirebasket(&self) -> bool {
        matches!(self, NodeClass::Edge(_) | NodeClass::Vertex(_))
    }
}

/// Fine triangle of a subdomain face.
#[derive(Clone, Debug)]
pub struct FaceTriangle {
    /// Face-local lattice coordinates `(u, v)` of the vertices.
    pub local: [[usize; 2]; 3],
    pub nodes: [usize; 3],
    /// The two tets sharing the triangle, one on each side.
    pub owners: [usize; 2],
    /// No vertex on the face boundary.
    pub interior: bool,
}

/// Open face shared by subdomains `k > l`.
#[derive(Clone, Debug)]
pub struct SubFace {
    pub id: usize,
    pub owners: (usize, usize),
    pub normal_axis: usize,
    pub tangent_axes: [usize; 2],
    /// Lattice coordinate of the `(u, v) = (0, 0)` corner.
    pub origin: [usize; 3],
    pub s: usize,
    /// All `(s+1)²` nodes of the closed face, index `u + (s+1) v`.
    pub closed_nodes: Vec<usize>,
    /// Open-face nodes, index `(u-1) + (s-1)(v-1)`.
    pub nodes: Vec<usize>,
    /// Nodes on the face perimeter (edges, vertices and possibly ∂Ω).
    pub boundary_nodes: Vec<usize>,
    pub triangles: Vec<FaceTriangle>,
}

impl SubFace {
    pub fn closed_index(&self, u: usize, v: usize) -> usize {
        u + (self.s + 1) * v
    }

    /// Index into `nodes` of the open-face node `(u, v)`.
    pub fn interior_index(&self, u: usize, v: usize) -> Option<usize> {
        let s = self.s;
        (u > 0 && u < s && v > 0 && v < s).then(|| (u - 1) + (s - 1) * (v - 1))
    }

    pub fn on_perimeter(&self, u: usize, v: usize) -> bool {
        u == 0 || v == 0 || u == self.s || v == self.s
    }
}

/// Open edge along one axis, shared by the subdomains around it.
#[derive(Clone, Debug)]
pub struct SubEdge {
    pub id: usize,
    pub axis: usize,
    pub s: usize,
    /// All `s+1` nodes including the two endpoints, in increasing coordinate.
    pub closed_nodes: Vec<usize>,
    /// The `s-1` open-edge nodes.
    pub nodes: Vec<usize>,
    /// Endpoints; each is a vertex or lies on ∂Ω.
    pub endpoints: [usize; 2],
    /// Consecutive node pairs of the fine segments.
    pub segments: Vec<[usize; 2]>,
    pub sharing: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SubVertex {
    pub id: usize,
    pub node: usize,
    pub edges: Vec<usize>,
    pub sharing: Vec<usize>,
}

/// Node sets of one subdomain.
#[derive(Clone, Debug)]
pub struct Subdomain {
    pub id: usize,
    pub grid: [usize; 3],
    pub tets: Vec<usize>,
    /// Nodes of the closed box, sorted.
    pub closed_nodes: Vec<usize>,
    /// Nodes strictly inside the box.
    pub interior_nodes: Vec<usize>,
    /// Nodes on the box surface (including any on ∂Ω).
    pub boundary_nodes: Vec<usize>,
    /// Interior nodes of the overlapping subdomain: the closed box minus ∂Ω.
    pub overlap_nodes: Vec<usize>,
    pub faces: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    m: usize,
    s: usize,
    n: usize,
    subdomain_of_tet: Vec<usize>,
    subdomains: Vec<Subdomain>,
    faces: Vec<SubFace>,
    edges: Vec<SubEdge>,
    vertices: Vec<SubVertex>,
    wirebasket: Vec<usize>,
    node_class: Vec<NodeClass>,
}

fn other_axes(d: usize) -> [usize; 2] {
    match d {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

impl Decomposition {
    /// Splits the mesh into `m_per_axis³` cubes of `H/h = n/m` cells per side.
    pub fn decompose(mesh: &TetMesh, m_per_axis: usize) -> Result<Self> {
        let n = mesh.n_per_axis();
        let m = m_per_axis;
        if m == 0 || n % m != 0 {
            return Err(Error::InvalidDecomposition(format!(
                "n_per_axis = {n} is not divisible by subdomains_per_axis = {m}"
            )));
        }
        let s = n / m;
        let sub_id = |g: [usize; 3]| g[0] + m * g[1] + m * m * g[2];
        let lattice_node = |l: [usize; 3]| mesh.node_index(l[0], l[1], l[2]);

        let mut subdomain_of_tet = vec![0; mesh.num_tets()];
        let mut sub_tets = vec![Vec::new(); m * m * m];
        for (t, owner) in subdomain_of_tet.iter_mut().enumerate() {
            // Tets are stored cube by cube, six per cube, in lexicographic cube order.
            let cube = t / 6;
            let c = [cube % n, (cube / n) % n, cube / (n * n)];
            let id = sub_id(c.map(|x| x / s));
            *owner = id;
            sub_tets[id].push(t);
        }

        let cut = |x: usize| x % s == 0 && x != 0 && x != n;
        let mut node_class = vec![NodeClass::DomainBoundary; mesh.num_nodes()];

        // Vertices.
        let mut vertices = Vec::new();
        let mut vertex_of_node = std::collections::HashMap::new();
        for c in 1..m {
            for b in 1..m {
                for a in 1..m {
                    let node = lattice_node([a * s, b * s, c * s]);
                    let id = vertices.len();
                    let mut sharing = Vec::with_capacity(8);
                    for dc in 0..2 {
                        for db in 0..2 {
                            for da in 0..2 {
                                sharing.push(sub_id([a - 1 + da, b - 1 + db, c - 1 + dc]));
                            }
                        }
                    }
                    sharing.sort_unstable();
                    vertex_of_node.insert(node, id);
                    node_class[node] = NodeClass::Vertex(id);
                    vertices.push(SubVertex {
                        id,
                        node,
                        edges: Vec::new(),
                        sharing,
                    });
                }
            }
        }

        // Edges: along axis d, at cut lines of the two other axes.
        let mut edges = Vec::new();
        for d in 0..3 {
            let [t1, t2] = other_axes(d);
            for c2 in 1..m {
                for c1 in 1..m {
                    for a in 0..m {
                        let id = edges.len();
                        let closed_nodes: Vec<usize> = (0..=s)
                            .map(|p| {
                                let mut l = [0; 3];
                                l[d] = a * s + p;
                                l[t1] = c1 * s;
                                l[t2] = c2 * s;
                                lattice_node(l)
                            })
                            .collect();
                        let nodes = closed_nodes[1..s].to_vec();
                        for &x in &nodes {
                            node_class[x] = NodeClass::Edge(id);
                        }
                        let endpoints = [closed_nodes[0], closed_nodes[s]];
                        for ep in endpoints {
                            if let Some(&v) = vertex_of_node.get(&ep) {
                                vertices[v].edges.push(id);
                            }
                        }
                        let segments = closed_nodes.windows(2).map(|w| [w[0], w[1]]).collect();
                        let mut sharing = Vec::with_capacity(4);
                        for e2 in 0..2 {
                            for e1 in 0..2 {
                                let mut g = [0; 3];
                                g[d] = a;
                                g[t1] = c1 - 1 + e1;
                                g[t2] = c2 - 1 + e2;
                                sharing.push(sub_id(g));
                            }
                        }
                        sharing.sort_unstable();
                        edges.push(SubEdge {
                            id,
                            axis: d,
                            s,
                            closed_nodes,
                            nodes,
                            endpoints,
                            segments,
                            sharing,
                        });
                    }
                }
            }
        }

        // Faces: normal axis d, cut plane c, tangential box (a1, a2).
        let mut faces = Vec::new();
        for d in 0..3 {
            let tangent_axes = other_axes(d);
            let [t1, t2] = tangent_axes;
            for c in 1..m {
                for a2 in 0..m {
                    for a1 in 0..m {
                        let id = faces.len();
                        let mut origin = [0; 3];
                        origin[d] = c * s;
                        origin[t1] = a1 * s;
                        origin[t2] = a2 * s;
                        let at = |u: usize, v: usize| {
                            let mut l = origin;
                            l[t1] += u;
                            l[t2] += v;
                            lattice_node(l)
                        };
                        let mut closed_nodes = Vec::with_capacity((s + 1) * (s + 1));
                        let mut nodes = Vec::new();
                        let mut boundary_nodes = Vec::new();
                        for v in 0..=s {
                            for u in 0..=s {
                                let x = at(u, v);
                                closed_nodes.push(x);
                                if u == 0 || v == 0 || u == s || v == s {
                                    boundary_nodes.push(x);
                                } else {
                                    nodes.push(x);
                                    node_class[x] = NodeClass::Face(id);
                                }
                            }
                        }
                        let mut triangles = Vec::with_capacity(2 * s * s);
                        for v in 0..s {
                            for u in 0..s {
                                // Each square is cut by the diagonal from its low to its high corner.
                                for mid in [[u + 1, v], [u, v + 1]] {
                                    let local = [[u, v], mid, [u + 1, v + 1]];
                                    let tri = local.map(|p| at(p[0], p[1]));
                                    let owners = mesh.tets_containing(&tri);
                                    if owners.len() != 2 {
                                        return Err(Error::InvalidDecomposition(format!(
                                            "face triangle {tri:?} has {} owners",
                                            owners.len()
                                        )));
                                    }
                                    let interior = local
                                        .iter()
                                        .all(|p| p[0] > 0 && p[1] > 0 && p[0] < s && p[1] < s);
                                    triangles.push(FaceTriangle {
                                        local,
                                        nodes: tri,
                                        owners: [owners[0], owners[1]],
                                        interior,
                                    });
                                }
                            }
                        }
                        let mut lo = [0; 3];
                        lo[d] = c - 1;
                        lo[t1] = a1;
                        lo[t2] = a2;
                        let mut hi = lo;
                        hi[d] = c;
                        faces.push(SubFace {
                            id,
                            owners: (sub_id(hi), sub_id(lo)),
                            normal_axis: d,
                            tangent_axes,
                            origin,
                            s,
                            closed_nodes,
                            nodes,
                            boundary_nodes,
                            triangles,
                        });
                    }
                }
            }
        }

        // Subdomain node sets.
        let mut subdomains = Vec::with_capacity(m * m * m);
        for gc in 0..m {
            for gb in 0..m {
                for ga in 0..m {
                    let grid = [ga, gb, gc];
                    let id = sub_id(grid);
                    let mut closed_nodes = Vec::with_capacity((s + 1).pow(3));
                    let mut interior_nodes = Vec::new();
                    let mut boundary_nodes = Vec::new();
                    for k in 0..=s {
                        for j in 0..=s {
                            for i in 0..=s {
                                let l = [ga * s + i, gb * s + j, gc * s + k];
                                let x = lattice_node(l);
                                closed_nodes.push(x);
                                let inside = [i, j, k].iter().all(|&p| p > 0 && p < s);
                                if inside {
                                    interior_nodes.push(x);
                                    node_class[x] = NodeClass::SubdomainInterior(id);
                                } else {
                                    boundary_nodes.push(x);
                                }
                            }
                        }
                    }
                    let overlap_nodes = closed_nodes
                        .iter()
                        .copied()
                        .filter(|&x| !mesh.is_boundary(x))
                        .collect();
                    subdomains.push(Subdomain {
                        id,
                        grid,
                        tets: std::mem::take(&mut sub_tets[id]),
                        closed_nodes,
                        interior_nodes,
                        boundary_nodes,
                        overlap_nodes,
                        faces: Vec::new(),
                    });
                }
            }
        }
        for f in &faces {
            subdomains[f.owners.0].faces.push(f.id);
            subdomains[f.owners.1].faces.push(f.id);
        }

        let mut wirebasket: Vec<usize> = edges
            .iter()
            .flat_map(|e| e.nodes.iter().copied())
            .chain(vertices.iter().map(|v| v.node))
            .collect();
        wirebasket.sort_unstable();

        debug_assert!((0..mesh.num_nodes()).all(|x| {
            let l = mesh.lattice(x);
            let cuts = l.iter().filter(|&&c| cut(c)).count();
            match node_class[x] {
                NodeClass::DomainBoundary => mesh.is_boundary(x),
                NodeClass::SubdomainInterior(_) => cuts == 0,
                NodeClass::Face(_) => cuts == 1,
                NodeClass::Edge(_) => cuts == 2,
                NodeClass::Vertex(_) => cuts == 3,
            }
        }));

        Ok(Self {
            m,
            s,
            n,
            subdomain_of_tet,
            subdomains,
            faces,
            edges,
            vertices,
            wirebasket,
            node_class,
        })
    }

    pub fn m_per_axis(&self) -> usize {
        self.m
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    /// `H/h`.
    pub fn cells_per_subdomain(&self) -> usize {
        self.s
    }

    pub fn big_h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn subdomain_of_tet(&self, t: usize) -> usize {
        self.subdomain_of_tet[t]
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn subdomain(&self, k: usize) -> &Subdomain {
        &self.subdomains[k]
    }

    pub fn faces(&self) -> &[SubFace] {
        &self.faces
    }

    pub fn edges(&self) -> &[SubEdge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[SubVertex] {
        &self.vertices
    }

    /// Sorted wirebasket nodes (open edges and vertices).
    pub fn wirebasket_nodes(&self) -> &[usize] {
        &self.wirebasket
    }

    pub fn node_class(&self, x: usize) -> NodeClass {
        self.node_class[x]
    }

    /// Subdomains whose closed box contains lattice node `x`.
    pub fn covering_subdomains(&self, mesh: &TetMesh, x: usize) -> Vec<usize> {
        let (m, s, n) = (self.m, self.s, self.n);
        let l = mesh.lattice(x);
        let ranges: Vec<Vec<usize>> = l
            .iter()
            .map(|&c| {
                if c == n {
                    vec![m - 1]
                } else if c % s == 0 && c != 0 {
                    vec![c / s - 1, c / s]
                } else {
                    vec![c / s]
                }
            })
            .collect();
        let mut out = Vec::new();
        for &c in &ranges[2] {
            for &b in &ranges[1] {
                for &a in &ranges[0] {
                    out.push(a + m * b + m * m * c);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Subdomains whose boundary meets the closed structure of a node class.
    pub fn subdomains_touching(&self, class: NodeClass) -> Vec<usize> {
        match class {
            NodeClass::DomainBoundary => Vec::new(),
            NodeClass::SubdomainInterior(k) => vec![k],
            NodeClass::Face(f) => {
                let (k, l) = self.faces[f].owners;
                vec![l, k]
            }
            NodeClass::Edge(e) => self.edges[e].sharing.clone(),
            NodeClass::Vertex(v) => self.vertices[v].sharing.clone(),
        }
    }

    /// Per-node classification as CSV rows `node,class,structure`.
    pub fn write_classification_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node", "class", "structure"])?;
        for (x, c) in self.node_class.iter().enumerate() {
            let id = c.structure_id().map(|i| i.to_string()).unwrap_or_default();
            w.write_record([x.to_string(), c.label().to_string(), id])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Debug summary of structure counts.
    pub fn write_summary(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "subdomains={} faces={} edges={} vertices={} wirebasket={} H/h={}",
            self.subdomains.len(),
            self.faces.len(),
            self.edges.len(),
            self.vertices.len(),
            self.wirebasket.len(),
            self.s
        )?;
        Ok(())
    }
}

/// Splits a face's triangles into those touching the face boundary and the rest.
/// Returns indices into `face.triangles`.
pub fn split_face_interior(face: &SubFace) -> Result<(Vec<usize>, Vec<usize>)> {
    let (inner, touching): (Vec<usize>, Vec<usize>) =
        (0..face.triangles.len()).partition(|&t| face.triangles[t].interior);
    if inner.is_empty() {
        return Err(Error::InvalidDecomposition(format!(
            "face {} has no triangles away from its boundary (H/h = {} <= 2)",
            face.id, face.s
        )));
    }
    Ok((touching, inner))
}
