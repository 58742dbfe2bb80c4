//! Discrete harmonic extension of boundary data into subdomains.

use serde::{Deserialize, Serialize};

use crate::decomp::{Decomposition, NodeClass};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SparseCholesky};

/// Factorized interior block and boundary coupling of one subdomain.
#[derive(Debug)]
pub struct SubdomainSolver {
    pub interior: Vec<usize>,
    pub boundary: Vec<usize>,
    a_ii: Option<SparseCholesky>,
    a_ib: CsrMatrix,
}

impl SubdomainSolver {
    /// Interior values solving `A_II u_I = -A_IB u_B`.
    pub fn extend(&self, boundary_values: &[f64]) -> Result<Vec<f64>> {
        if boundary_values.len() != self.boundary.len() {
            return Err(Error::DimensionMismatch {
                expected: self.boundary.len(),
                actual: boundary_values.len(),
                context: "subdomain boundary data",
            });
        }
        let Some(chol) = &self.a_ii else {
            return Ok(Vec::new());
        };
        let mut rhs = self.a_ib.mul_vec_alloc(boundary_values);
        rhs.iter_mut().for_each(|v| *v = -*v);
        chol.solve_in_place(&mut rhs);
        Ok(rhs)
    }
}

/// Harmonic extension operators of all subdomains, built once from the full stiffness.
#[derive(Debug)]
pub struct HarmonicExtender {
    solvers: Vec<SubdomainSolver>,
    num_nodes: usize,
}

/// An interface structure supporting enrichment functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "kebab-case")]
pub enum Structure {
    Face(usize),
    Edge(usize),
}

impl Structure {
    pub fn nodes<'a>(&self, decomp: &'a Decomposition) -> &'a [usize] {
        match *self {
            Structure::Face(f) => &decomp.faces()[f].nodes,
            Structure::Edge(e) => &decomp.edges()[e].nodes,
        }
    }

    pub fn class(&self) -> NodeClass {
        match *self {
            Structure::Face(f) => NodeClass::Face(f),
            Structure::Edge(e) => NodeClass::Edge(e),
        }
    }
}

impl HarmonicExtender {
    pub fn new(a_full: &CsrMatrix, decomp: &Decomposition) -> Result<Self> {
        let solvers = decomp
            .subdomains()
            .iter()
            .map(|sub| {
                let a_ii = if sub.interior_nodes.is_empty() {
                    None
                } else {
                    Some(SparseCholesky::factor(
                        &a_full.submatrix(&sub.interior_nodes),
                        &format!("interior block of subdomain {}", sub.id),
                    )?)
                };
                Ok(SubdomainSolver {
                    interior: sub.interior_nodes.clone(),
                    boundary: sub.boundary_nodes.clone(),
                    a_ii,
                    a_ib: a_full.block(&sub.interior_nodes, &sub.boundary_nodes),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            solvers,
            num_nodes: a_full.nrows(),
        })
    }

    pub fn solver(&self, k: usize) -> &SubdomainSolver {
        &self.solvers[k]
    }

    pub fn num_subdomains(&self) -> usize {
        self.solvers.len()
    }

    /// Interior values of the harmonic extension of `boundary_values` into subdomain `k`.
    pub fn extend(&self, k: usize, boundary_values: &[f64]) -> Result<Vec<f64>> {
        self.solvers
            .get(k)
            .ok_or(Error::OutOfRange {
                what: "subdomains",
                index: k,
                len: self.solvers.len(),
            })?
            .extend(boundary_values)
    }

    /// Overwrites the subdomain-interior values of a nodal vector with the harmonic
    /// extension of its values on the subdomain boundaries.
    pub fn extend_trace(&self, u_full: &mut [f64]) -> Result<()> {
        for sol in &self.solvers {
            let bv: Vec<f64> = sol.boundary.iter().map(|&x| u_full[x]).collect();
            let vals = if bv.iter().all(|&v| v == 0.0) {
                vec![0.0; sol.interior.len()]
            } else {
                sol.extend(&bv)?
            };
            for (&x, v) in sol.interior.iter().zip(vals) {
                u_full[x] = v;
            }
        }
        Ok(())
    }

    /// Extends values given on one structure's nodes by zero to the rest of the
    /// interface and harmonically into every subdomain; returns a nodal vector.
    pub fn extend_interface_function(
        &self,
        decomp: &Decomposition,
        structure: Structure,
        values: &[f64],
    ) -> Result<Vec<f64>> {
        let nodes = structure.nodes(decomp);
        if values.len() != nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                actual: values.len(),
                context: "interface function values",
            });
        }
        let mut u = vec![0.0; self.num_nodes];
        for (&x, &v) in nodes.iter().zip(values) {
            u[x] = v;
        }
        for k in decomp.subdomains_touching(structure.class()) {
            self.fill_subdomain(k, &mut u)?;
        }
        Ok(u)
    }

    /// Same as [`Self::extend_interface_function`] for a nodal vector that must vanish on
    /// Γ and ∂Ω away from the structure.
    pub fn extend_supported(
        &self,
        decomp: &Decomposition,
        structure: Structure,
        trace: &[f64],
    ) -> Result<Vec<f64>> {
        let class = structure.class();
        if let Some(x) = (0..trace.len()).find(|&x| {
            let c = decomp.node_class(x);
            trace[x] != 0.0 && c != class && !matches!(c, NodeClass::SubdomainInterior(_))
        }) {
            return Err(Error::NotInterface(format!(
                "trace is nonzero at node {x} outside {structure:?}"
            )));
        }
        let values: Vec<f64> = structure.nodes(decomp).iter().map(|&x| trace[x]).collect();
        self.extend_interface_function(decomp, structure, &values)
    }

    fn fill_subdomain(&self, k: usize, u: &mut [f64]) -> Result<()> {
        let sol = &self.solvers[k];
        let bv: Vec<f64> = sol.boundary.iter().map(|&x| u[x]).collect();
        let vals = sol.extend(&bv)?;
        for (&x, v) in sol.interior.iter().zip(vals) {
            u[x] = v;
        }
        Ok(())
    }

    /// Harmonic extension restricted to the listed subdomains; others are left unchanged.
    pub fn extend_in(&self, subdomains: &[usize], u_full: &mut [f64]) -> Result<()> {
        for &k in subdomains {
            self.fill_subdomain(k, u_full)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_stiffness;
    use crate::coeff::CoefficientField;
    use crate::mesh::TetMesh;

    fn setup() -> (TetMesh, Decomposition, CsrMatrix, HarmonicExtender) {
        let mesh = TetMesh::build_cube_mesh(8).unwrap();
        let alpha: Vec<f64> = (0..mesh.num_tets()).map(|t| 1.0 + (t * 7 % 11) as f64).collect();
        let field = CoefficientField::from_values(&mesh, alpha).unwrap();
        let a = assemble_stiffness(&mesh, &field).unwrap();
        let d = Decomposition::decompose(&mesh, 2).unwrap();
        let ext = HarmonicExtender::new(&a, &d).unwrap();
        (mesh, d, a, ext)
    }

    #[test]
    fn constants_are_harmonic() {
        let (_, _, _, ext) = setup();
        let sol = ext.solver(3);
        let u = sol.extend(&vec![2.5; sol.boundary.len()]).unwrap();
        assert!(u.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn interior_residual_vanishes() {
        let (mesh, d, a, ext) = setup();
        let mut u: Vec<f64> = (0..mesh.num_nodes()).map(|x| ((x * 37) % 17) as f64 - 8.0).collect();
        ext.extend_trace(&mut u).unwrap();
        let r = a.mul_vec_alloc(&u);
        let scale = a.max_abs() * 8.0;
        for s in d.subdomains() {
            for &x in &s.interior_nodes {
                assert!(r[x].abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn face_function_support() {
        let (mesh, d, _, ext) = setup();
        let f = &d.faces()[4];
        let vals: Vec<f64> = (0..f.nodes.len()).map(|i| 1.0 + i as f64).collect();
        let u = ext
            .extend_interface_function(&d, Structure::Face(4), &vals)
            .unwrap();
        let (k, l) = f.owners;
        for x in 0..mesh.num_nodes() {
            if u[x] != 0.0 {
                let cov = d.covering_subdomains(&mesh, x);
                assert!(cov.contains(&k) || cov.contains(&l));
            }
        }
        let zero = ext
            .extend_interface_function(&d, Structure::Face(4), &vec![0.0; f.nodes.len()])
            .unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let mut leak = vec![0.0; mesh.num_nodes()];
        leak[d.wirebasket_nodes()[0]] = 1.0;
        assert!(ext.extend_supported(&d, Structure::Face(4), &leak).is_err());
    }
}
