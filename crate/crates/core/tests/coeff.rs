mod common;

use asm3d_core::coeff::{CoefficientField, InclusionSpec};
use asm3d_core::mesh::TetMesh;
use proptest::prelude::*;

#[test]
fn channel_is_mesh_aligned_at_every_resolution() {
    // a 1/16-wide bar covers the same volume whatever the grid refinement
    let inc = InclusionSpec::new([0.125, 0.25, 0.125], [0.1875, 0.75, 0.1875], 1e6);
    for n in [16, 32] {
        let mesh = TetMesh::build_cube_mesh(n).unwrap();
        let f = CoefficientField::assign(&mesh, 1.0, &[inc.clone()]).unwrap();
        let vol: f64 = (0..mesh.num_tets())
            .filter(|&t| f.tet_value(t) == 1e6)
            .map(|t| mesh.element_geometry(t).unwrap().volume)
            .sum();
        assert!((vol - 0.5 / 256.0).abs() < 1e-14, "n = {n}: {vol}");
    }
}

#[test]
fn invalid_inputs() {
    let mesh = TetMesh::build_cube_mesh(2).unwrap();
    assert!(CoefficientField::assign(&mesh, 0.0, &[]).is_err());
    assert!(CoefficientField::assign(&mesh, 1.0, &[InclusionSpec::new([0.5; 3], [0.4; 3], 2.0)]).is_err());
    assert!(CoefficientField::assign(&mesh, 1.0, &[InclusionSpec::new([0.0; 3], [1.0; 3], -2.0)]).is_err());
    assert!(CoefficientField::from_values(&mesh, vec![1.0; 3]).is_err());
    let mut bad = vec![1.0; mesh.num_tets()];
    bad[4] = f64::NAN;
    assert!(CoefficientField::from_values(&mesh, bad).is_err());
    let f = CoefficientField::assign(&mesh, 1.0, &[]).unwrap();
    assert!(f.node_weight(mesh.num_nodes()).is_err());
    // a boundary triangle has only one owner
    let tri = [mesh.node_index(0, 0, 0), mesh.node_index(1, 0, 0), mesh.node_index(1, 1, 0)];
    assert!(f.face_triangle_weight(&mesh, tri).is_err());
}

#[test]
fn inclusions_parse_from_toml() {
    #[derive(serde::Deserialize)]
    struct W {
        inc: InclusionSpec,
    }
    let w: W = toml::from_str("[inc]\nmin = [0.0, 0.1, 0.2]\nmax = [0.5, 0.6, 0.7]\nvalue = 1e6\n").unwrap();
    assert_eq!(w.inc, InclusionSpec::new([0.0, 0.1, 0.2], [0.5, 0.6, 0.7], 1e6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weights_are_local_maxima(seed in any::<u64>(), n in 2usize..4) {
        let mesh = TetMesh::build_cube_mesh(n).unwrap();
        let mut rng = common::rng(seed);
        let alpha = common::log_uniform_alpha(&mut rng, mesh.num_tets(), 1.0, 1e6);
        let f = CoefficientField::from_values(&mesh, alpha.clone()).unwrap();
        let adj = mesh.fine_face_and_edge_adjacency();
        for x in 0..mesh.num_nodes() {
            let brute = (0..mesh.num_tets())
                .filter(|&t| mesh.tet(t).contains(&x))
                .map(|t| alpha[t])
                .fold(0.0, f64::max);
            prop_assert_eq!(f.node_weight(x).unwrap(), brute);
        }
        for (tri, owners) in &adj.faces {
            if owners.len() == 2 {
                prop_assert_eq!(f.face_triangle_weight(&mesh, *tri).unwrap(), alpha[owners[0]].max(alpha[owners[1]]));
            }
        }
        for (e, owners) in &adj.edges {
            let brute = owners.iter().map(|&t| alpha[t]).fold(0.0, f64::max);
            prop_assert_eq!(f.edge_segment_weight(&mesh, *e).unwrap(), brute);
        }
    }

    #[test]
    fn painted_boxes_follow_barycenters(
        lo in prop::array::uniform3(0.0f64..0.6),
        ext in prop::array::uniform3(0.05f64..0.4),
        v in 1.0f64..1e6,
    ) {
        let mesh = TetMesh::build_cube_mesh(4).unwrap();
        let hi = [lo[0] + ext[0], lo[1] + ext[1], lo[2] + ext[2]];
        let inc = InclusionSpec::new(lo, hi, v);
        let f = CoefficientField::assign(&mesh, 1.0, &[inc]).unwrap();
        for t in 0..mesh.num_tets() {
            let c = mesh.barycenter(t);
            let inside = (0..3).all(|d| lo[d] <= c[d] && c[d] <= hi[d]);
            prop_assert_eq!(f.tet_value(t), if inside { v } else { 1.0 });
        }
    }
}
