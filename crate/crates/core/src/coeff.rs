//! Piecewise-constant coefficients and the max-type interface weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TetMesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionKind {
    BoxChannel,
}

/// Axis-aligned box of constant coefficient value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionSpec {
    #[serde(default = "default_kind")]
    pub kind: InclusionKind,
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub value: f64,
}

fn default_kind() -> InclusionKind {
    InclusionKind::BoxChannel
}

impl InclusionSpec {
    pub fn new(min: [f64; 3], max: [f64; 3], value: f64) -> Self {
        Self {
            kind: InclusionKind::BoxChannel,
            min,
            max,
            value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.value > 0.0 && self.value.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "inclusion value must be positive, got {}",
                self.value
            )));
        }
        for d in 0..3 {
            let (lo, hi) = (self.min[d], self.max[d]);
            if !(lo < hi) || lo > 1.0 || hi < 0.0 {
                return Err(Error::InvalidCoefficient(format!(
                    "inclusion box is empty or outside [0,1]^3 along axis {d}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|d| self.min[d] <= p[d] && p[d] <= self.max[d])
    }
}

/// Per-tet coefficient `α_τ` with the nodal maxima `ᾱ_x` cached.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    alpha: Vec<f64>,
    background: f64,
    inclusions: Vec<InclusionSpec>,
    node_max: Vec<f64>,
}

impl CoefficientField {
    /// Assigns `α_τ` by barycenter membership; later inclusions override earlier ones.
    pub fn assign(mesh: &TetMesh, background: f64, inclusions: &[InclusionSpec]) -> Result<Self> {
        if !(background > 0.0 && background.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "background must be positive, got {background}"
            )));
        }
        for inc in inclusions {
            inc.validate()?;
        }
        let alpha = (0..mesh.num_tets())
            .map(|t| {
                let c = mesh.barycenter(t);
                inclusions
                    .iter()
                    .rev()
                    .find(|inc| inc.contains(c))
                    .map_or(background, |inc| inc.value)
            })
            .collect();
        let mut field = Self {
            alpha,
            background,
            inclusions: inclusions.to_vec(),
            node_max: Vec::new(),
        };
        field.node_max = field.compute_node_max(mesh);
        Ok(field)
    }

    /// Coefficient given directly per tet.
    pub fn from_values(mesh: &TetMesh, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != mesh.num_tets() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_tets(),
                actual: alpha.len(),
                context: "per-tet coefficient",
            });
        }
        if let Some((t, &a)) = alpha
            .iter()
            .enumerate()
            .find(|(_, &a)| !(a > 0.0 && a.is_finite()))
        {
            return Err(Error::InvalidCoefficient(format!("alpha[{t}] = {a}")));
        }
        let background = alpha.iter().copied().fold(f64::INFINITY, f64::min);
        let mut field = Self {
            alpha,
            background,
            inclusions: Vec::new(),
            node_max: Vec::new(),
        };
        field.node_max = field.compute_node_max(mesh);
        Ok(field)
    }

    fn compute_node_max(&self, mesh: &TetMesh) -> Vec<f64> {
        (0..mesh.num_nodes())
            .map(|x| {
                mesh.tets_of_node(x)
                    .iter()
                    .map(|&t| self.alpha[t])
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn tet_value(&self, t: usize) -> f64 {
        self.alpha[t]
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn inclusions(&self) -> &[InclusionSpec] {
        &self.inclusions
    }

    /// `α ↦ c α`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            alpha: self.alpha.iter().map(|a| a * c).collect(),
            background: self.background * c,
            inclusions: self
                .inclusions
                .iter()
                .map(|i| InclusionSpec {
                    value: i.value * c,
                    ..i.clone()
                })
                .collect(),
            node_max: self.node_max.iter().map(|a| a * c).collect(),
        }
    }

    /// `ᾱ_x`: largest coefficient over tets having `x` as a vertex.
    pub fn node_weight(&self, x: usize) -> Result<f64> {
        self.node_max.get(x).copied().ok_or(Error::OutOfRange {
            what: "nodes",
            index: x,
            len: self.node_max.len(),
        })
    }

    /// `ᾱ_{τ_t}`: larger coefficient of the two tets sharing an interior triangle.
    pub fn face_triangle_weight(&self, mesh: &TetMesh, tri: [usize; 3]) -> Result<f64> {
        let owners = mesh.tets_containing(&tri);
        if owners.len() != 2 {
            return Err(Error::NotInterface(format!(
                "triangle {tri:?} has {} owning tets, expected 2",
                owners.len()
            )));
        }
        Ok(self.alpha[owners[0]].max(self.alpha[owners[1]]))
    }

    /// `ᾱ_e`: largest coefficient over tets containing the fine edge.
    pub fn edge_segment_weight(&self, mesh: &TetMesh, edge: [usize; 2]) -> Result<f64> {
        let owners = mesh.tets_containing(&edge);
        if owners.is_empty() {
            return Err(Error::NotInterface(format!("{edge:?} is not a mesh edge")));
        }
        Ok(owners.iter().map(|&t| self.alpha[t]).fold(0.0, f64::max))
    }
}
