use std::f64::consts::{E, PI};

use santalo_core::families::{FamilyKind, FamilySpec, GridSpec};
use santalo_core::inequalities::{csv_summary, et_deficit, santalo_product, unconditional_verify, VerificationReport};
use santalo_core::measures::MeasureSidecar;

fn write_temp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("santalo-core-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn custom_csv_potential_matches_the_named_family() {
    let named = FamilySpec::new(FamilyKind::ShiftedExponential).potential().unwrap();
    let path = write_temp("exp.csv", &named.to_csv());
    let custom = FamilySpec::new(FamilyKind::CustomCsv { path }).potential().unwrap();
    assert_eq!(custom.values(), named.values());
    let r = santalo_product(&custom).unwrap();
    assert!((r.quantity("product").unwrap() - E).abs() < 1e-4);
}

#[test]
fn custom_csv_orthant_potential() {
    let spec = FamilySpec::new(FamilyKind::UnconditionalL1).with_grid(GridSpec::new(0.0, 40.0, 129));
    let u = spec.unconditional().unwrap();
    let path = write_temp("l1.csv", &u.potential().to_csv());
    let back = FamilySpec::new(FamilyKind::CustomCsv { path }).unconditional().unwrap();
    assert_eq!(back.potential().values(), u.potential().values());
    let r = unconditional_verify(&back, &[1.0]).unwrap();
    assert!((r.quantity("F(1)").unwrap() - 1.0).abs() < 1e-3, "{r:?}");
}

#[test]
fn measure_sidecar_and_report_serialization() {
    let m = FamilySpec::new(FamilyKind::Gaussian).measure().unwrap();
    let side = m.sidecar();
    assert!((side.log_normalizer - (2.0 * PI).sqrt().ln()).abs() < 1e-9, "{side:?}");
    assert!(side.essentially_continuous);
    let json = serde_json::to_string(&side).unwrap();
    assert_eq!(serde_json::from_str::<MeasureSidecar>(&json).unwrap(), side);

    let r = et_deficit(&m, &m).unwrap();
    let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    let csv = csv_summary(&[r.clone(), r]);
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("et_deficit,4.5158"));
}

#[test]
fn profile_families_reconstruct_measures() {
    // the ε-trapezoid measure against Laplace tends to the equality case
    let lap = FamilySpec::new(FamilyKind::Laplace).measure().unwrap();
    let mut last = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05] {
        let m = FamilySpec::new(FamilyKind::TrapezoidProfile { eps }).measure().unwrap();
        let d = et_deficit(&lap, &m).unwrap().deficit;
        assert!(d < last && d >= -1e-6);
        last = d;
    }
}
