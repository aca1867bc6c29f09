//! The counter-propagating pump-probe experiment: pulse timing for a given
//! probe delay, the perturbative run, the ΔT_n(ω) map and the |ΔT| profile
//! used for transport fits.

use polaritrans_core::dynamics::{evolve, MeanFieldState, PHOTON};
use polaritrans_core::hierarchy::{evolve_hierarchy, Truncation, ALPHA01, ALPHA21};
use polaritrans_core::integrate::IntegratorConfig;
use polaritrans_core::model::{group_velocity_lp, LatticeGrid};
use polaritrans_core::pulses::{probe_arrival_for_delay, TRUNCATION_WIDTHS};
use polaritrans_core::record::FieldData;
use polaritrans_core::transport::{fit_velocities, TransportFit, COUNTER_PROPAGATING_SCALE};
use polaritrans_core::{ModelParams, PulseSpec, SpatioTemporalRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectrum::{differential_transmission, time_fft, transmitted_intensity, Apodization, Detection, SpectrumMap, Window};

/// Post-processing choices for pump-probe runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct AnalysisOptions {
    /// Probe delays in fs.
    pub delays: Vec<f64>,
    /// The FFT window opens this many probe σ_t after the probe arrival.
    pub window_offset_widths: f64,
    pub apodization: Apodization,
    pub detection: Detection,
    /// ΔT maps and profiles keep ω within this distance (eV) of the pump carrier.
    pub band_half_width: f64,
    /// Derive tEnd from the pulse geometry instead of the integrator setting.
    pub auto_t_end: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            delays: default_delays(),
            window_offset_widths: 4.0,
            apodization: Apodization::Rectangular,
            detection: Detection::Local,
            band_half_width: 0.1,
            auto_t_end: true,
        }
    }
}

/// Nine delays spanning ±0.8 ps.
pub fn default_delays() -> Vec<f64> {
    (0..9).map(|i| -800.0 + 200.0 * i as f64).collect()
}

/// Everything needed to run the experiment at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpProbeSetup {
    pub params: ModelParams,
    pub pump: PulseSpec,
    pub probe: PulseSpec,
    pub integrator: IntegratorConfig,
    pub analysis: AnalysisOptions,
}

/// Pulse timings and integration span for one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub delay: f64,
    pub pump: PulseSpec,
    pub probe: PulseSpec,
    pub integrator: IntegratorConfig,
    pub window: Window,
}

impl PumpProbeSetup {
    /// Places the earlier pulse where its truncated envelope starts at t = 0
    /// and the later one according to the delay; with `auto_t_end` the run
    /// lasts until the probe has crossed the pump spot by 4σ_r.
    pub fn timing(&self, delay: f64) -> Timing {
        let offset = probe_arrival_for_delay(&self.pump, &self.probe, delay, &self.params) - self.pump.arrival;
        let lead_pump = TRUNCATION_WIDTHS * self.pump.sigma_t;
        let lead_probe = TRUNCATION_WIDTHS * self.probe.sigma_t;
        let pump_arrival = lead_pump.max(lead_probe - offset);
        let probe_arrival = pump_arrival + offset;
        let pump = PulseSpec {
            arrival: pump_arrival,
            ..self.pump.clone()
        };
        let probe = PulseSpec {
            arrival: probe_arrival,
            ..self.probe.clone()
        };
        let window_start = probe_arrival + self.analysis.window_offset_widths * probe.sigma_t;
        let mut integrator = self.integrator.clone();
        if self.analysis.auto_t_end {
            let v = group_velocity_lp(probe.k_center, &self.params).abs().max(1e-6);
            let distance = (probe.center - pump.center).abs() + 4.0 * pump.sigma_r;
            let t_end = window_start + distance / v;
            integrator.t_end = (t_end / integrator.snapshot_dt()).ceil() * integrator.snapshot_dt();
        }
        let window = Window {
            t_start: snap_up(window_start, integrator.snapshot_dt()),
            t_end: snap_down(integrator.t_end, integrator.snapshot_dt()),
            apodization: self.analysis.apodization,
        };
        Timing {
            delay,
            pump,
            probe,
            integrator,
            window,
        }
    }

    fn band(&self) -> (f64, f64) {
        let w = self.pump.omega_drive;
        (w - self.analysis.band_half_width, w + self.analysis.band_half_width)
    }

    /// Perturbative run for one delay, reduced to the ΔT map and profile.
    pub fn run_delay(&self, delay: f64) -> Result<DelayResult> {
        let timing = self.timing(delay);
        let record = self.hierarchy_record(&timing)?;
        self.reduce(&timing, &record)
    }

    /// The α01/α21 record of one delay.
    pub fn hierarchy_record(&self, timing: &Timing) -> Result<SpatioTemporalRecord> {
        Ok(evolve_hierarchy(
            Some(&timing.pump),
            Some(&timing.probe),
            &timing.integrator,
            &self.params,
            &[ALPHA01, ALPHA21],
            Truncation::Full,
        )?)
    }

    /// ΔT map and ω-integrated |ΔT| profile from a hierarchy record.
    pub fn reduce(&self, timing: &Timing, record: &SpatioTemporalRecord) -> Result<DelayResult> {
        let full = differential_transmission(
            record,
            &timing.window,
            &self.analysis.detection,
            self.params.kappa,
            self.params.length,
        )?;
        let (lo, hi) = self.band();
        let map = full.band(lo, hi);
        let profile = map.integrated_magnitude();
        Ok(DelayResult {
            timing: timing.clone(),
            map,
            profile,
        })
    }

    /// Runs every configured delay (in parallel) and returns results in
    /// delay order.
    pub fn scan(&self) -> Result<Vec<DelayResult>> {
        self.analysis.delays.par_iter().map(|&d| self.run_delay(d)).collect()
    }

    /// Velocity fit over a finished scan; the rms is taken about the pump spot.
    pub fn fit(&self, results: &[DelayResult]) -> Result<TransportFit> {
        let grid = LatticeGrid::new(&self.params);
        let profiles: Vec<(f64, Vec<f64>)> = results.iter().map(|r| (r.timing.delay, r.profile.clone())).collect();
        Ok(fit_velocities(
            &profiles,
            &grid.positions,
            self.pump.center,
            self.pump.k_center,
            &self.params,
            COUNTER_PROPAGATING_SCALE,
        )?)
    }

    /// Pump-on minus pump-off transmitted intensity of the full nonlinear
    /// equations, divided by η_p²η_p'², on the same window, detection and
    /// band as the ΔT map. The pump-only field is subtracted coherently from
    /// the pump-on field first, so pump-only nonlinear scattering into the
    /// detection aperture does not enter. Converges to ΔT as the amplitudes
    /// go to zero.
    pub fn nonlinear_difference(&self, delay: f64, eta_pump: f64, eta_probe: f64) -> Result<SpectrumMap> {
        let timing = self.timing(delay);
        let pump = timing.pump.with_amplitude(eta_pump);
        let probe = timing.probe.with_amplitude(eta_probe);
        let vacuum = MeanFieldState::vacuum(self.params.num_sites);
        let spectra = [vec![pump.clone(), probe.clone()], vec![probe], vec![pump]]
            .par_iter()
            .map(|pulses| -> Result<SpectrumMap> {
                let record = evolve(&vacuum, pulses, &timing.integrator, &self.params)?;
                let mut map = time_fft(&record, PHOTON, &timing.window)?;
                self.analysis.detection.apply(&mut map, self.params.length);
                Ok(map)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut on = spectra[0].clone();
        if let (FieldData::Complex(a), FieldData::Complex(b)) = (&mut on.values, &spectra[2].values) {
            for (x, y) in a.iter_mut().zip(b) {
                *x -= y;
            }
        }
        let on = transmitted_intensity(&on, self.params.kappa);
        let off = transmitted_intensity(&spectra[1], self.params.kappa);
        let norm = 1.0 / (eta_pump * eta_pump * eta_probe * eta_probe);
        let values = on.iter().zip(&off).map(|(a, b)| (a - b) * norm).collect();
        let full = SpectrumMap {
            omegas: spectra[0].omegas.clone(),
            num_sites: spectra[0].num_sites,
            values: FieldData::Real(values),
            window: timing.window,
        };
        let (lo, hi) = self.band();
        Ok(full.band(lo, hi))
    }
}

/// Reduced output of one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayResult {
    pub timing: Timing,
    /// ΔT_n(ω) restricted to the analysis band.
    pub map: SpectrumMap,
    /// ∫ |ΔT_n(ω)| dω over the band, per site.
    pub profile: Vec<f64>,
}

impl DelayResult {
    /// The assembled signal η_p²η_p'² ΔT for given drive amplitudes.
    pub fn scaled_map(&self, eta_pump: f64, eta_probe: f64) -> Vec<f64> {
        let s = eta_pump * eta_pump * eta_probe * eta_probe;
        self.map.real().unwrap_or(&[]).iter().map(|v| v * s).collect()
    }
}

/// ‖a − b‖₂ / ‖b‖₂ over two maps of equal shape.
pub fn relative_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn snap_up(t: f64, h: f64) -> f64 {
    (t / h - 1e-9).ceil() * h
}

fn snap_down(t: f64, h: f64) -> f64 {
    (t / h + 1e-9).floor() * h
}
