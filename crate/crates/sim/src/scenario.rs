//! Scenario orchestration: runs the pipeline a configuration asks for and
//! writes data files, derived tables and a run manifest into the output
//! directory. Data files carry the configuration echo but no timing, so
//! identical configurations produce byte-identical data.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use polaritrans_core::dynamics::pump_only;
use polaritrans_core::model::{exciton_fraction_lp, group_velocity_lp, omega_cavity, polariton_frequencies};
use polaritrans_core::observables::{beer_lambert_check, bright_dark, populations};
use polaritrans_core::transport::SweepResult;
use polaritrans_core::{LatticeGrid, SpatioTemporalRecord};
use serde_json::{json, Value};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::{Result, SimError};
use crate::export::{write_binary, write_text, Axis, Dataset, Table};
use crate::sweep::{sweep_dephasing, sweep_momentum};

/// Sites (counted from the pump spot along its propagation direction) used
/// for the Beer–Lambert fit.
pub const BEER_LAMBERT_SITES: std::ops::Range<usize> = 10..40;

/// Files and numbers produced by a run.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Scenario-specific results echoed into the manifest.
    pub results: Value,
}

struct Writer<'a> {
    cfg: &'a ScenarioConfig,
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    /// Configuration echo for data files; the output location is left out
    /// so that reruns into another directory produce identical bytes.
    fn provenance(&self, context: Value) -> Value {
        let mut config = serde_json::to_value(self.cfg).expect("config serializes");
        if let Some(m) = config.as_object_mut() {
            m.remove("output");
        }
        json!({
            "program": "polaritrans",
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": self.cfg.scenario.name(),
            "config": config,
            "context": context,
        })
    }

    fn dataset(&mut self, stem: &str, ds: &Dataset) -> Result<()> {
        let fmt = self.cfg.output.format;
        if fmt.text() {
            let p = self.dir.join(format!("{stem}.txt"));
            write_text(ds, &p)?;
            self.files.push(p);
        }
        if fmt.binary() {
            let p = self.dir.join(format!("{stem}.pltr"));
            write_binary(ds, &p)?;
            self.files.push(p);
        }
        Ok(())
    }

    fn record(&mut self, stem: &str, record: &SpatioTemporalRecord, context: Value) -> Result<()> {
        let grid = LatticeGrid::new(&self.cfg.model);
        let ds = Dataset::from_record(record, &grid.positions, self.provenance(context));
        self.dataset(stem, &ds)
    }

    fn table(&mut self, stem: &str, columns: &[(&str, &str)], rows: Vec<Vec<f64>>, context: Value) -> Result<()> {
        let t = Table {
            columns: columns.iter().map(|(n, u)| Axis::new(n, u)).collect(),
            rows,
            provenance: self.provenance(context),
        };
        let p = self.dir.join(format!("{stem}.txt"));
        t.write(&p)?;
        self.files.push(p);
        Ok(())
    }
}

/// Runs the configured scenario, writing into `cfg.output.dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut w = Writer {
        cfg,
        dir,
        files: Vec::new(),
    };
    let results = match cfg.scenario {
        Scenario::Dispersion => dispersion(&mut w),
        Scenario::PumpOnly => pump_only_run(&mut w),
        Scenario::PumpProbe => pump_probe(&mut w),
        Scenario::SweepMomentum | Scenario::SweepDephasing => sweep_run(&mut w),
        Scenario::BeerLambert => beer_lambert(&mut w),
    }
    .map_err(|e| e.context(format!("scenario {}", cfg.scenario.name())))?;
    Ok(RunSummary {
        files: w.files,
        results,
    })
}

fn dispersion(w: &mut Writer) -> Result<Value> {
    let p = &w.cfg.model;
    let grid = LatticeGrid::new(p);
    let rows = grid
        .momenta
        .iter()
        .map(|&k| {
            let (up, lp) = polariton_frequencies(k, p);
            vec![k, omega_cavity(k, p), lp, up, exciton_fraction_lp(k, p), group_velocity_lp(k, p)]
        })
        .collect();
    w.table(
        "dispersion",
        &[("k", "1/um"), ("omegaK", "eV"), ("omegaLP", "eV"), ("omegaUP", "eV"), ("X2", "1"), ("vGrp", "um/fs")],
        rows,
        Value::Null,
    )?;
    Ok(json!({ "numMomenta": grid.momenta.len() }))
}

/// Site sums in the normalization of the mean-field variables, where
/// photon + bright + dark is conserved in a closed system; multiply by N_E
/// for absolute numbers.
fn population_table(w: &mut Writer, record: &SpatioTemporalRecord) -> Result<()> {
    let (photons, _) = populations(record)?;
    let (bright, dark, _) = bright_dark(record)?;
    let (ph, b, d) = (photons.totals(), bright.totals(), dark.totals());
    let rows = record
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| vec![t, ph[i], b[i], d[i]])
        .collect();
    w.table(
        "populations",
        &[("t", "fs"), ("photon", "N_E"), ("bright", "N_E"), ("dark", "N_E")],
        rows,
        Value::Null,
    )
}

fn pump_only_run(w: &mut Writer) -> Result<Value> {
    let cfg = w.cfg;
    let record = pump_only(&cfg.model, &cfg.pump, &cfg.integrator)?;
    w.record("record", &record, Value::Null)?;
    population_table(w, &record)?;
    Ok(json!({ "numSnapshots": record.num_snapshots() }))
}

fn pump_probe(w: &mut Writer) -> Result<Value> {
    let cfg = w.cfg;
    let setup = cfg.setup();
    let grid = LatticeGrid::new(&cfg.model);
    let results = setup.scan()?;
    let mut profile_rows: Vec<Vec<f64>> = grid.positions.iter().map(|&r| vec![r]).collect();
    let mut columns = vec![("r".to_string(), "um")];
    for (i, r) in results.iter().enumerate() {
        let context = json!({ "delay": r.timing.delay, "window": [r.timing.window.t_start, r.timing.window.t_end] });
        let ds = Dataset::from_spectrum(&r.map, "deltaT", &grid.positions, w.provenance(context));
        w.dataset(&format!("deltaT_{i:02}"), &ds)?;
        for (row, v) in profile_rows.iter_mut().zip(&r.profile) {
            row.push(*v);
        }
        columns.push((format!("absDeltaT_delay{}", r.timing.delay), "1"));
    }
    let columns: Vec<(&str, &str)> = columns.iter().map(|(n, u)| (n.as_str(), *u)).collect();
    w.table("profiles", &columns, profile_rows, Value::Null)?;

    let fit = match setup.fit(&results) {
        Ok(f) => f,
        Err(e) => return Ok(json!({ "fit": Value::Null, "fitError": e.to_string() })),
    };
    let rows = (0..fit.delays.len())
        .map(|i| vec![fit.delays[i], fit.peak_positions[i], fit.rms_positions[i]])
        .collect();
    w.table("transport", &[("delay", "fs"), ("peak", "um"), ("rms", "um")], rows, Value::Null)?;
    Ok(json!({
        "vPeak": fit.v_peak,
        "vRms": fit.v_rms,
        "vGrp": fit.v_grp,
        "rSquaredPeak": fit.r_squared_peak,
        "rSquaredRms": fit.r_squared_rms,
        "renormalization": fit.renormalization(),
    }))
}

/// Rows (axisValue, vPeak, vRms, vGrp, renorm, X²); failed points are NaN.
pub fn sweep_rows(result: &SweepResult) -> Vec<Vec<f64>> {
    result
        .points
        .iter()
        .map(|p| match &p.fit {
            Ok(f) => vec![p.axis_value, f.v_peak, f.v_rms, f.v_grp, f.renormalization(), p.exciton_fraction],
            Err(_) => vec![p.axis_value, f64::NAN, f64::NAN, f64::NAN, f64::NAN, p.exciton_fraction],
        })
        .collect()
}

fn sweep_run(w: &mut Writer) -> Result<Value> {
    let cfg = w.cfg;
    let values = cfg.sweep_axis.clone().unwrap_or_default();
    let setup = cfg.setup();
    let (result, unit) = match cfg.scenario {
        Scenario::SweepMomentum => (sweep_momentum(&setup, &values), "1/um"),
        _ => (sweep_dephasing(&setup, &values), "eV"),
    };
    w.table(
        "sweep",
        &[("axisValue", unit), ("vPeak", "um/fs"), ("vRms", "um/fs"), ("vGrp", "um/fs"), ("renorm", "1"), ("X2", "1")],
        sweep_rows(&result),
        Value::Null,
    )?;
    let failures: Vec<Value> = result
        .points
        .iter()
        .filter_map(|p| p.fit.as_ref().err().map(|e| json!({ "axisValue": p.axis_value, "error": e })))
        .collect();
    Ok(json!({ "points": result.points.len(), "failures": failures }))
}

fn beer_lambert(w: &mut Writer) -> Result<Value> {
    let cfg = w.cfg;
    let grid = LatticeGrid::new(&cfg.model);
    let record = pump_only(&cfg.model, &cfg.pump, &cfg.integrator)?;
    let i0 = grid.nearest_site(cfg.pump.center);
    let range = if cfg.pump.k_center >= 0.0 {
        i0 + BEER_LAMBERT_SITES.start..i0 + BEER_LAMBERT_SITES.end
    } else {
        i0.saturating_sub(BEER_LAMBERT_SITES.end - 1)..(i0 + 1).saturating_sub(BEER_LAMBERT_SITES.start)
    };
    let bl = beer_lambert_check(&record, &cfg.model, cfg.pump.omega_drive, cfg.pump.center, &grid.positions, range)?;
    w.record("record", &record, Value::Null)?;
    w.table(
        "beer_lambert",
        &[("simSlope", "1/um"), ("predictedSlope", "1/um"), ("ratio", "1"), ("rSquared", "1")],
        vec![vec![bl.sim_slope, bl.pred_slope, bl.ratio(), bl.r_squared]],
        Value::Null,
    )?;
    Ok(json!({ "simSlope": bl.sim_slope, "predictedSlope": bl.pred_slope, "ratio": bl.ratio() }))
}

/// Runs the scenario and writes `manifest.json` on success or `error.json`
/// on failure. Returns the process exit status.
pub fn run_and_report(cfg: &ScenarioConfig) -> i32 {
    let start = Instant::now();
    let outcome = run_scenario(cfg);
    let wall = start.elapsed().as_secs_f64();
    let dir = &cfg.output.dir;
    match outcome {
        Ok(summary) => {
            let manifest = json!({
                "status": "ok",
                "program": "polaritrans",
                "version": env!("CARGO_PKG_VERSION"),
                "scenario": cfg.scenario.name(),
                "config": cfg,
                "configToml": cfg.to_toml(),
                "wallTimeSeconds": wall,
                "files": summary.files,
                "results": summary.results,
            });
            match write_json(&dir.join("manifest.json"), &manifest) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = write_error_report(dir, &e, Some(cfg));
            e.exit_code()
        }
    }
}

/// Machine-readable description of a failure.
pub fn error_report(e: &SimError, cfg: Option<&ScenarioConfig>) -> Value {
    let mut chain = vec![e.to_string()];
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        chain.push(s.to_string());
        src = s.source();
    }
    json!({
        "status": "error",
        "kind": e.kind(),
        "exitCode": e.exit_code(),
        "message": e.to_string(),
        "chain": chain,
        "config": cfg,
    })
}

/// Writes `error.json` into `dir`, creating it if needed.
pub fn write_error_report(dir: &Path, e: &SimError, cfg: Option<&ScenarioConfig>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|err| SimError::io(dir, err))?;
    write_json(&dir.join("error.json"), &error_report(e, cfg))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let s = serde_json::to_string_pretty(v).expect("json serializes");
    fs::write(path, s + "\n").map_err(|e| SimError::io(path, e))
}
