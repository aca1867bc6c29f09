use std::f64::consts::PI;

use polaritrans_core::dynamics::{pump_only, COHERENCE, INVERSION, PHOTON};
use polaritrans_core::integrate::IntegratorConfig;
use polaritrans_core::{FieldData, LatticeGrid, ModelParams, PulseSpec, SpatioTemporalRecord, C64};
use polaritrans_sim::export::{read_binary, read_dataset, read_text, write_binary, write_text, Axis, Dataset, Table};
use proptest::prelude::*;
use serde_json::json;

fn small_record() -> (SpatioTemporalRecord, Vec<f64>) {
    let p = ModelParams {
        num_sites: 41,
        length: 20.0,
        ..ModelParams::default()
    };
    let pulse = PulseSpec::resonant_lp(&p, 0.01, PI / 2.0, 0.0, 100.0);
    let cfg = IntegratorConfig {
        t_end: 300.0,
        snapshot_stride: 100,
        frame_omega: pulse.omega_drive,
        ..IntegratorConfig::default()
    };
    (pump_only(&p, &pulse, &cfg).unwrap(), LatticeGrid::new(&p).positions)
}

#[test]
fn empty_record_gives_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = SpatioTemporalRecord::new(3);
    r.declare(PHOTON, true);
    let ds = Dataset::from_record(&r, &[-1.0, 0.0, 1.0], json!(null));
    let (t, b) = (dir.path().join("e.txt"), dir.path().join("e.pltr"));
    write_text(&ds, &t).unwrap();
    write_binary(&ds, &b).unwrap();
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.lines().all(|l| l.starts_with('#')));
    assert_eq!(ds.payload_len(), 0);
    let bytes = std::fs::read(&b).unwrap();
    let header_len = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    assert_eq!(bytes.len(), 13 + header_len);
    assert_eq!(read_binary(&b).unwrap(), ds);
    assert_eq!(read_text(&t).unwrap(), ds);
}

#[test]
fn text_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (rec, pos) = small_record();
    let ds = Dataset::from_record(&rec, &pos, json!({"run": "test"}));
    let (t, b) = (dir.path().join("r.txt"), dir.path().join("r.pltr"));
    write_text(&ds, &t).unwrap();
    write_binary(&ds, &b).unwrap();
    let from_text = read_dataset(&t).unwrap();
    let from_bin = read_dataset(&b).unwrap();
    assert_eq!(from_bin, ds);
    // shortest round-trip printing makes the text form exact as well
    assert_eq!(from_text, from_bin);
    assert_eq!(from_bin.to_record().fields, rec.fields);
}

#[test]
fn binary_size_follows_the_layout() {
    let (sites, snaps) = (601, 1000);
    let mut r = SpatioTemporalRecord::new(sites);
    r.times = (0..snaps).map(|i| i as f64).collect();
    r.fields.insert(PHOTON.into(), FieldData::Complex(vec![C64::new(1.0, -1.0); sites * snaps]));
    r.fields.insert(COHERENCE.into(), FieldData::Complex(vec![C64::new(0.5, 0.25); sites * snaps]));
    r.fields.insert(INVERSION.into(), FieldData::Real(vec![-1.0; sites * snaps]));
    let pos: Vec<f64> = (0..sites).map(|i| i as f64).collect();
    let ds = Dataset::from_record(&r, &pos, json!(null));
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("big.pltr");
    write_binary(&ds, &b).unwrap();
    let bytes = std::fs::read(&b).unwrap();
    let header = 13 + u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
    assert_eq!(bytes.len(), header + snaps * sites * (2 + 2 + 1) * 8);
    assert_eq!(&bytes[..5], b"PLTR1");
}

#[test]
fn truncated_binary_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (rec, pos) = small_record();
    let b = dir.path().join("r.pltr");
    write_binary(&Dataset::from_record(&rec, &pos, json!(null)), &b).unwrap();
    let mut bytes = std::fs::read(&b).unwrap();
    bytes.truncate(bytes.len() - 8);
    std::fs::write(&b, bytes).unwrap();
    assert_eq!(read_binary(&b).unwrap_err().exit_code(), 4);
}

#[test]
fn tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = Table {
        columns: vec![Axis::new("k", "1/um"), Axis::new("vGrp", "um/fs")],
        rows: vec![vec![0.1, 0.2 / 3.0], vec![1.0, f64::NAN]],
        provenance: json!({"a": 1}),
    };
    let p = dir.path().join("t.txt");
    t.write(&p).unwrap();
    let back = Table::read(&p).unwrap();
    assert_eq!(back.columns, t.columns);
    assert_eq!(back.rows[0], t.rows[0]);
    assert!(back.rows[1][1].is_nan());
    assert_eq!(back.provenance, t.provenance);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn arbitrary_values_survive_both_formats(
        values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 12),
    ) {
        let mut r = SpatioTemporalRecord::new(3);
        r.times = vec![0.0, 1.5];
        r.fields.insert("x".into(), FieldData::Real(values[..6].to_vec()));
        r.fields.insert("y".into(), FieldData::Complex(values[6..].chunks(2).map(|c| C64::new(c[0], c[1])).chain(values[6..].chunks(2).map(|c| C64::new(c[1], c[0]))).collect()));
        let ds = Dataset::from_record(&r, &[0.0, 1.0, 2.0], json!(null));
        let dir = tempfile::tempdir().unwrap();
        let (t, b) = (dir.path().join("p.txt"), dir.path().join("p.pltr"));
        write_text(&ds, &t).unwrap();
        write_binary(&ds, &b).unwrap();
        prop_assert_eq!(read_text(&t).unwrap(), ds.clone());
        prop_assert_eq!(read_binary(&b).unwrap(), ds);
    }
}
