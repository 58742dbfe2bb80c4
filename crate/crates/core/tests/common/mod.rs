//! Brute-force oracles shared by the integration tests.
//!
//! Everything here is written against the mesh and nalgebra only. Nothing goes
//! through the assembly, decomposition or interface-form code under test.
#![allow(dead_code)]

use asm3d_core::linalg::{CsrMatrix, LinearOperator};
use asm3d_core::mesh::TetMesh;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DENSE_CAP: usize = 3000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Per-tet coefficients log-uniform in `[lo, hi]`.
pub fn log_uniform_alpha(rng: &mut ChaCha8Rng, num_tets: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..num_tets).map(|_| rng.gen_range(a..=b).exp()).collect()
}

/// Barycentric gradients and volume of a tet from the inverse Jacobian.
pub fn p1_gradients(p: [[f64; 3]; 4]) -> ([Vector3<f64>; 4], f64) {
    let col = |i: usize| Vector3::new(p[i][0] - p[0][0], p[i][1] - p[0][1], p[i][2] - p[0][2]);
    let j = Matrix3::from_columns(&[col(1), col(2), col(3)]);
    let vol = j.determinant().abs() / 6.0;
    let jinv = j.try_inverse().expect("degenerate tet");
    let g1: Vector3<f64> = jinv.row(0).transpose();
    let g2: Vector3<f64> = jinv.row(1).transpose();
    let g3: Vector3<f64> = jinv.row(2).transpose();
    ([-(g1 + g2 + g3), g1, g2, g3], vol)
}

/// Dense full stiffness over all mesh nodes.
pub fn dense_stiffness(mesh: &TetMesh, alpha: &[f64]) -> DMatrix<f64> {
    let n = mesh.num_nodes();
    let mut a = DMatrix::zeros(n, n);
    for t in 0..mesh.num_tets() {
        let tet = mesh.tet(t);
        let (g, vol) = p1_gradients(tet.map(|x| mesh.node(x)));
        for p in 0..4 {
            for q in 0..4 {
                a[(tet[p], tet[q])] += alpha[t] * vol * g[p].dot(&g[q]);
            }
        }
    }
    a
}

pub fn csr_to_dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.iter() {
        d[(i, j)] += v;
    }
    d
}

/// Columns `op(e_j)`.
pub fn operator_to_dense(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut d = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut y);
        e[j] = 0.0;
        for i in 0..n {
            d[(i, j)] = y[i];
        }
    }
    d
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigenvalues of `M⁻¹A` for SPD `A` and `M⁻¹`, via `S A S` with `S = (M⁻¹)^{1/2}`.
pub fn dense_preconditioned_spectrum(a: &DMatrix<f64>, minv: &DMatrix<f64>) -> Result<Vec<f64>, String> {
    let n = a.nrows();
    if n > DENSE_CAP {
        return Err(format!("dimension {n} exceeds the dense oracle cap {DENSE_CAP}"));
    }
    let eig = ((minv + minv.transpose()) * 0.5).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err("preconditioner is not positive definite".into());
    }
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let s = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
    Ok(sorted_eigenvalues(&(&s * a * &s)))
}

/// Generalized eigenvalues of `A x = λ diag(b) x`.
pub fn dense_gevp_diag(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let d = DVector::from_iterator(b.len(), b.iter().map(|v| 1.0 / v.sqrt()));
    let dm = DMatrix::from_diagonal(&d);
    sorted_eigenvalues(&(&dm * a * &dm))
}

/// `4 sin²(pπ/2n) + 4 sin²(qπ/2n)`, `p, q = 1..n-1`, ascending.
pub fn fourier_face_eigenvalues(n: usize) -> Vec<f64> {
    let s = |p: usize| 4.0 * (p as f64 * std::f64::consts::PI / (2.0 * n as f64)).sin().powi(2);
    let mut ev: Vec<f64> = (1..n).flat_map(|p| (1..n).map(move |q| s(p) + s(q))).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `4 sin²(kπ/2n)`, `k = 1..n-1`: the 1D Dirichlet Laplacian against the identity.
pub fn fourier_edge_eigenvalues(n: usize) -> Vec<f64> {
    (1..n)
        .map(|k| 4.0 * (k as f64 * std::f64::consts::PI / (2.0 * n as f64)).sin().powi(2))
        .collect()
}

/// Subdomain grid coordinates `[a, b, c]` of id `a + m b + m² c`.
pub fn grid_of(m: usize, k: usize) -> [usize; 3] {
    [k % m, (k / m) % m, k / (m * m)]
}

/// Whether node `x` lies in the closed box of subdomain `k`.
pub fn in_closed_box(mesh: &TetMesh, m: usize, k: usize, x: usize) -> bool {
    let s = mesh.n_per_axis() / m;
    let g = grid_of(m, k);
    let l = mesh.lattice(x);
    (0..3).all(|d| g[d] * s <= l[d] && l[d] <= (g[d] + 1) * s)
}

/// Number of closed subdomain boxes containing node `x`.
pub fn covering_count(mesh: &TetMesh, m: usize, x: usize) -> usize {
    (0..m * m * m).filter(|&k| in_closed_box(mesh, m, k, x)).count()
}

/// Partition of unity over interior DOFs: `θ_k(x) = [x ∈ closed box k] / N_x`.
pub fn partition_of_unity(mesh: &TetMesh, m: usize, dof_nodes: &[usize]) -> Vec<Vec<f64>> {
    let counts: Vec<usize> = dof_nodes.iter().map(|&x| covering_count(mesh, m, x)).collect();
    (0..m * m * m)
        .map(|k| {
            dof_nodes
                .iter()
                .zip(&counts)
                .map(|(&x, &c)| if in_closed_box(mesh, m, k, x) { 1.0 / c as f64 } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Interior nodes of the box plus one layer of elements: every tet at the node
/// touches the closed box, and the node is not on the outer boundary.
pub fn overlap_interior_bruteforce(mesh: &TetMesh, m: usize, k: usize) -> Vec<usize> {
    let in_layer: Vec<bool> = (0..mesh.num_tets())
        .map(|t| mesh.tet(t).iter().any(|&x| in_closed_box(mesh, m, k, x)))
        .collect();
    (0..mesh.num_nodes())
        .filter(|&x| !mesh.is_boundary(x) && mesh.tets_of_node(x).iter().all(|&t| in_layer[t]))
        .collect()
}

/// Pieces `u_k = θ_k (u - u₀)` and the worst nodal error of `u₀ + Σ u_k - u`,
/// relative to `max|u|`.
pub fn decomposition_identity_check(u: &[f64], u0: &[f64], theta: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let pieces: Vec<Vec<f64>> = theta
        .iter()
        .map(|t| t.iter().zip(u.iter().zip(u0)).map(|(w, (a, b))| w * (a - b)).collect())
        .collect();
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut err = 0.0f64;
    for i in 0..u.len() {
        let sum: f64 = u0[i] + pieces.iter().map(|p| p[i]).sum::<f64>();
        err = err.max((sum - u[i]).abs() / scale);
    }
    (err, pieces)
}

pub fn quad(a: &DMatrix<f64>, x: &[f64]) -> f64 {
    let v = DVector::from_column_slice(x);
    v.dot(&(a * &v))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// `Σ_τ α_τ |τ| |∇u|²` over the listed tets, with `u` a nodal vector.
pub fn element_energy(mesh: &TetMesh, alpha: &[f64], tets: &[usize], u: &[f64]) -> f64 {
    tets.iter()
        .map(|&t| {
            let tet = mesh.tet(t);
            let (g, vol) = p1_gradients(tet.map(|x| mesh.node(x)));
            let grad: Vector3<f64> = (0..4).map(|a| g[a] * u[tet[a]]).sum();
            alpha[t] * vol * grad.norm_squared()
        })
        .sum()
}

/// Tets whose barycenter lies in the box of subdomain `k`.
pub fn box_tets(mesh: &TetMesh, m: usize, k: usize) -> Vec<usize> {
    let g = grid_of(m, k);
    (0..mesh.num_tets())
        .filter(|&t| {
            let c = mesh.barycenter(t);
            (0..3).all(|d| {
                let lo = g[d] as f64 / m as f64;
                c[d] > lo && c[d] < lo + 1.0 / m as f64
            })
        })
        .collect()
}
