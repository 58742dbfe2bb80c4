use asm3d_core::coarse::CoarseKind;
use asm3d_core::experiment::{run, run_with, ExperimentConfig, OutputFormat};
use asm3d_core::tables::{build_tables, cell, eigenvalue_listing, emit_tables, format_kappa, read_records};

fn config(extra: &str, h: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
        {extra}
        [mesh]
        H_over_h = {h}

        [[distributions]]
        name = "Constant"

        [[distributions]]
        name = "Channel"
        [[distributions.inclusions]]
        min = [0.125, 0.125, 0.25]
        max = [0.1875, 0.1875, 0.75]
        value = 1e6
        "#
    ))
    .unwrap()
}

#[test]
fn runs_are_deterministic_and_ordered() {
    let c = config("", "[3, 4]");
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    assert_eq!(a.len(), 2 * 2 * 2 * 2);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.report.cond_estimate, y.report.cond_estimate);
        assert_eq!(x.report.iterations, y.report.iterations);
        assert_eq!(x.report.relative_residual_history, y.report.relative_residual_history);
        assert_eq!(x.selections, y.selections);
    }
    // H/h outermost, then distribution, coarse space, enrichment off before on
    let order: Vec<(usize, &str, CoarseKind, bool)> =
        a.iter().map(|r| (r.h_ratio, r.distribution.as_str(), r.coarse, r.enrichment)).collect();
    assert_eq!(order[0], (3, "Constant", CoarseKind::Wirebasket, false));
    assert_eq!(order[1], (3, "Constant", CoarseKind::Wirebasket, true));
    assert_eq!(order[2], (3, "Constant", CoarseKind::Vertex, false));
    assert_eq!(order[4], (3, "Channel", CoarseKind::Wirebasket, false));
    assert_eq!(order[8].0, 4);
    for r in &a {
        assert!(r.report.converged && r.report.final_relative_residual <= 1e-6);
        assert_eq!(r.num_dofs, (2 * r.h_ratio - 1).pow(3));
        assert_eq!(r.config, c);
        if !r.enrichment && r.coarse == CoarseKind::Wirebasket {
            assert_eq!(r.enrichment_columns, 0);
        }
    }
}

#[test]
fn records_survive_a_json_roundtrip() {
    let c = config("coarse_space = \"vertex\"", "[3]");
    let records = run(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_tables(&records, dir.path(), &[OutputFormat::Json]).unwrap();
    let back = read_records(&dir.path().join("records.json")).unwrap();
    assert_eq!(back, records);
}

#[test]
fn table_layout() {
    let c = config("coarse_space = \"wirebasket\"\nenrichment = \"on\"", "[2]");
    let one = run(&c).unwrap();
    let only = &one[..1];
    let t = build_tables(only);
    assert_eq!(t.len(), 1);
    assert_eq!(t[0].header, vec!["distribution".to_string(), "enrichment H/h=2".to_string()]);
    assert_eq!(t[0].rows, vec![vec!["Constant".to_string(), cell(&only[0])]]);

    let c = config("coarse_space = \"both\"", "[4, 3, 5]");
    let mut c = c;
    c.distributions.truncate(1);
    let records = run(&c).unwrap();
    let tables = build_tables(&records);
    assert_eq!(tables.iter().map(|t| t.coarse).collect::<Vec<_>>(), vec![CoarseKind::Wirebasket, CoarseKind::Vertex]);
    let want: Vec<String> = std::iter::once("distribution".to_string())
        .chain([3, 4, 5].map(|h| format!("no enrichment H/h={h}")))
        .chain([3, 4, 5].map(|h| format!("enrichment H/h={h}")))
        .collect();
    for t in &tables {
        assert_eq!(t.header, want);
        assert_eq!(t.rows.len(), 1);
        assert!(t.to_text().starts_with(&format!("{} coarse space", t.coarse.name())));
    }
    let r = records
        .iter()
        .find(|r| r.h_ratio == 5 && r.coarse == CoarseKind::Vertex && r.enrichment)
        .unwrap();
    assert_eq!(tables[1].rows[0][6], cell(r));
}

#[test]
fn cells_and_listings() {
    assert_eq!(format_kappa(12.345), "12.35");
    assert_eq!(format_kappa(123456.0), "1.23e5");
    let mut c = config("coarse_space = \"wirebasket\"\nenrichment = \"on\"", "[4]");
    c.solver.max_iter = 2;
    let records = run(&c).unwrap();
    let r = &records[1];
    assert!(!r.report.converged);
    assert!(cell(r).ends_with("(2+)"));
    let listing = eigenvalue_listing(r);
    let marked = listing.lines().filter(|l| l.contains('*') && l.starts_with("face")).count();
    assert_eq!(marked, r.selections.len());
    assert!(r.selections.iter().any(|s| !s.selected.is_empty()));
}

#[test]
fn emitted_layout() {
    let c = config("coarse_space = \"vertex\"", "[3]");
    let dir = tempfile::tempdir().unwrap();
    let mats = dir.path().join("matrices");
    let records = run_with(&c, Some(&mats)).unwrap();
    let written = emit_tables(&records, dir.path(), &c.output.formats).unwrap();
    for name in ["table_vertex.csv", "table_vertex.txt", "records.json"] {
        assert!(written.contains(&dir.path().join(name)), "{name}");
    }
    for r in &records {
        assert!(dir.path().join("residuals").join(format!("{}.csv", r.stem())).exists());
        // vertex runs always carry the interior-face zero modes
        assert!(dir.path().join("eigenvalues").join(format!("{}.txt", r.stem())).exists());
        assert!(mats.join(format!("{}_coarse.mtx", r.stem())).exists());
    }
    assert!(mats.join("channel_Hh3_A.mtx").exists() && mats.join("constant_Hh3_f.mtx").exists());
    let a = asm3d_core::mtx::read_coordinate(&mats.join("channel_Hh3_A.mtx")).unwrap();
    assert_eq!(a.nrows(), records[0].num_dofs);
    assert!(emit_tables(&[], dir.path(), &c.output.formats).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = config("", "[4]");
    c.distributions[1].background = 0.0;
    assert!(c.validate().is_err());
    assert!(run(&c).is_err());
    let err = ExperimentConfig::from_toml_str("[mesh]\nH_over_h = [2]\n[[distributions]]\nname = \"x\"\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains("vertex"), "{err}");
    assert!(ExperimentConfig::load(std::path::Path::new("/nonexistent/x.toml")).is_err());
}

#[test]
fn face_channels_need_enrichment() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/contrast_sweep.toml");
    let mut c = ExperimentConfig::load(&path).unwrap();
    c.distributions.retain(|d| d.name.ends_with("1e6"));
    c.coarse_space = asm3d_core::experiment::CoarseChoice::Wirebasket;
    let records = run(&c).unwrap();
    let (plain, enriched) = (&records[0], &records[1]);
    assert!(!plain.enrichment && enriched.enrichment);
    assert!((enriched.thresholds.face - 0.075).abs() < 1e-15);
    let k = enriched.report.cond_estimate.unwrap();
    assert!((5.0..50.0).contains(&k), "κ = {k}");
    assert!((10..=40).contains(&enriched.report.iterations));
    // one selected eigenvalue per channel crossing a face
    assert_eq!(enriched.enrichment_columns, 3);
    assert!(plain.report.cond_estimate.unwrap() >= 1e2 * k);
}
