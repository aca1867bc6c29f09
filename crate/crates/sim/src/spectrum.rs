//! Time-windowed Fourier transforms of recorded fields and the
//! differential-transmission map built from them.
//!
//! Convention: X_n(ω) = Σ_j x_n(t_j) w(t_j) e^{+iωt_j/ħ} Δt, with ω in eV,
//! so a field oscillating as e^{−iω₀t/ħ} peaks at +ω₀.

use std::f64::consts::PI;

use polaritrans_core::hierarchy::{ALPHA01, ALPHA21};
use polaritrans_core::record::FieldData;
use polaritrans_core::units::HBAR;
use polaritrans_core::{SpatioTemporalRecord, C64};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Relative slack when matching window edges to snapshot times.
const EDGE_SLACK: f64 = 1e-9;

/// Taper applied inside the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Apodization {
    Rectangular,
    /// e^{−(t − t_start)/τ}, τ in fs.
    Exponential { tau: f64 },
}

impl Apodization {
    /// Exponential taper with τ = 4ħ/κ.
    pub fn cavity_lifetime(kappa: f64) -> Self {
        Self::Exponential { tau: 4.0 * HBAR / kappa }
    }

    fn weight(&self, dt_from_start: f64) -> f64 {
        match *self {
            Self::Rectangular => 1.0,
            Self::Exponential { tau } => (-dt_from_start / tau).exp(),
        }
    }
}

/// Time segment `[t_start, t_end]` (fs) entering a transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Window {
    pub t_start: f64,
    pub t_end: f64,
    pub apodization: Apodization,
}

impl Window {
    pub fn rectangular(t_start: f64, t_end: f64) -> Self {
        Self {
            t_start,
            t_end,
            apodization: Apodization::Rectangular,
        }
    }

    /// Indices of the snapshots inside the window.
    fn select(&self, times: &[f64]) -> Result<std::ops::Range<usize>, SimError> {
        let out_of_range = || SimError::WindowOutOfRange {
            t_start: self.t_start,
            t_end: self.t_end,
            first: times.first().copied().unwrap_or(f64::NAN),
            last: times.last().copied().unwrap_or(f64::NAN),
        };
        let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
            return Err(out_of_range());
        };
        let slack = EDGE_SLACK * last.abs().max(1.0);
        if !(self.t_start < self.t_end) || self.t_start < first - slack || self.t_end > last + slack {
            return Err(out_of_range());
        }
        let lo = times.partition_point(|&t| t < self.t_start - slack);
        let hi = times.partition_point(|&t| t <= self.t_end + slack);
        if hi < lo + 2 {
            return Err(out_of_range());
        }
        Ok(lo..hi)
    }
}

/// A per-site spectrum on a uniform, ascending frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    /// Frequencies in eV.
    pub omegas: Vec<f64>,
    pub num_sites: usize,
    /// Row-major, frequency × site.
    pub values: FieldData,
    pub window: Window,
}

impl SpectrumMap {
    pub fn num_freqs(&self) -> usize {
        self.omegas.len()
    }

    pub fn d_omega(&self) -> f64 {
        if self.omegas.len() < 2 {
            0.0
        } else {
            self.omegas[1] - self.omegas[0]
        }
    }

    pub fn complex(&self) -> Option<&[C64]> {
        match &self.values {
            FieldData::Complex(v) => Some(v),
            FieldData::Real(_) => None,
        }
    }

    pub fn real(&self) -> Option<&[f64]> {
        match &self.values {
            FieldData::Real(v) => Some(v),
            FieldData::Complex(_) => None,
        }
    }

    /// Keeps only the frequencies inside `[lo, hi]` eV.
    pub fn band(&self, lo: f64, hi: f64) -> SpectrumMap {
        let a = self.omegas.partition_point(|&w| w < lo);
        let b = self.omegas.partition_point(|&w| w <= hi).max(a);
        let n = self.num_sites;
        let values = match &self.values {
            FieldData::Complex(v) => FieldData::Complex(v[a * n..b * n].to_vec()),
            FieldData::Real(v) => FieldData::Real(v[a * n..b * n].to_vec()),
        };
        SpectrumMap {
            omegas: self.omegas[a..b].to_vec(),
            num_sites: n,
            values,
            window: self.window,
        }
    }

    /// Index of the frequency closest to `omega`.
    pub fn nearest_freq(&self, omega: f64) -> usize {
        let mut best = 0;
        for (i, w) in self.omegas.iter().enumerate() {
            if (w - omega).abs() < (self.omegas[best] - omega).abs() {
                best = i;
            }
        }
        best
    }

    /// ∫ |S_n(ω)| dω for each site (real or complex values).
    pub fn integrated_magnitude(&self) -> Vec<f64> {
        let n = self.num_sites;
        let dw = self.d_omega();
        let mut out = vec![0.0; n];
        match &self.values {
            FieldData::Real(v) => {
                for row in v.chunks_exact(n) {
                    for (o, x) in out.iter_mut().zip(row) {
                        *o += x.abs() * dw;
                    }
                }
            }
            FieldData::Complex(v) => {
                for row in v.chunks_exact(n) {
                    for (o, x) in out.iter_mut().zip(row) {
                        *o += x.norm() * dw;
                    }
                }
            }
        }
        out
    }

    /// Values of site `site` across frequency (real maps only).
    pub fn site_trace(&self, site: usize) -> Option<Vec<f64>> {
        let v = self.real()?;
        Some(v.iter().skip(site).step_by(self.num_sites).copied().collect())
    }
}

/// Windowed transform of one recorded field.
pub fn time_fft(record: &SpatioTemporalRecord, field: &str, window: &Window) -> Result<SpectrumMap, SimError> {
    let data = record.field(field)?;
    let range = window.select(&record.times)?;
    let dt = record
        .time_step()
        .ok_or_else(|| SimError::Numerical(polaritrans_core::Error::Shape("record has no time step".into())))?;
    let n = record.num_sites;
    let m = range.len();
    let t0 = record.times[range.start];

    let weights: Vec<f64> = range
        .clone()
        .map(|j| window.apodization.weight(record.times[j] - t0) * dt)
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);

    // ω_k = 2πħk/(mΔt) for k = −⌊m/2⌋ … ⌈m/2⌉ − 1
    let shift = m / 2;
    let omegas: Vec<f64> = (0..m)
        .map(|i| 2.0 * PI * HBAR * (i as f64 - shift as f64) / (m as f64 * dt))
        .collect();
    // e^{iω t0/ħ} restores the absolute time origin
    let phase: Vec<C64> = omegas.iter().map(|w| C64::from_polar(1.0, w * t0 / HBAR)).collect();

    let mut out = vec![C64::new(0.0, 0.0); m * n];
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for site in 0..n {
        for (b, (j, w)) in buf.iter_mut().zip(range.clone().zip(&weights)) {
            let x = match data {
                FieldData::Complex(v) => v[j * n + site],
                FieldData::Real(v) => C64::new(v[j * n + site], 0.0),
            };
            *b = x * *w;
        }
        fft.process(&mut buf);
        for (i, ph) in phase.iter().enumerate() {
            let k = (i + m - shift) % m;
            out[i * n + site] = buf[k] * ph;
        }
    }
    Ok(SpectrumMap {
        omegas,
        num_sites: n,
        values: FieldData::Complex(out),
        window: *window,
    })
}

/// Spatial detection applied to fields before they are combined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Detection {
    /// Site-resolved fields as they are.
    #[default]
    Local,
    /// Only wavevectors with |k − kCenter| ≤ halfWidth (μm⁻¹) are kept.
    #[serde(rename_all = "camelCase")]
    Aperture { k_center: f64, half_width: f64 },
}

impl Detection {
    /// Aperture around the probe wavevector that excludes the pump
    /// wavevector and the other four-wave-mixing directions k_probe ± (k_pump − k_probe).
    pub fn probe_direction(k_pump: f64, k_probe: f64) -> Self {
        Self::Aperture {
            k_center: k_probe,
            half_width: 0.5 * (k_pump - k_probe).abs(),
        }
    }

    /// Applies the detection to every frequency row of a complex map defined
    /// on a lattice of length `length` (μm).
    pub fn apply(&self, map: &mut SpectrumMap, length: f64) {
        let Self::Aperture { k_center, half_width } = *self else {
            return;
        };
        let n = map.num_sites;
        let FieldData::Complex(values) = &mut map.values else {
            return;
        };
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        // bin q holds e^{+i k_q r} with signed q
        let keep: Vec<bool> = (0..n)
            .map(|q| {
                let signed = if q <= n / 2 { q as f64 } else { q as f64 - n as f64 };
                (2.0 * PI * signed / length - k_center).abs() <= half_width
            })
            .collect();
        let norm = 1.0 / n as f64;
        for row in values.chunks_exact_mut(n) {
            fwd.process(row);
            for (x, k) in row.iter_mut().zip(&keep) {
                *x = if *k { *x * norm } else { C64::new(0.0, 0.0) };
            }
            inv.process(row);
        }
    }
}

/// ΔT_n(ω) = (κ²/2) Re[α01_n(ω) conj α21_n(ω)], both fields transformed
/// over the same window and passed through the same detection.
pub fn differential_transmission(
    record: &SpatioTemporalRecord,
    window: &Window,
    detection: &Detection,
    kappa: f64,
    length: f64,
) -> Result<SpectrumMap, SimError> {
    let mut probe = time_fft(record, ALPHA01, window)?;
    let mut signal = time_fft(record, ALPHA21, window)?;
    detection.apply(&mut probe, length);
    detection.apply(&mut signal, length);
    let (a, b) = (probe.complex().unwrap_or(&[]), signal.complex().unwrap_or(&[]));
    let scale = 0.5 * kappa * kappa;
    let values = a.iter().zip(b).map(|(x, y)| scale * (x * y.conj()).re).collect();
    Ok(SpectrumMap {
        omegas: probe.omegas,
        num_sites: probe.num_sites,
        values: FieldData::Real(values),
        window: *window,
    })
}

/// Transmitted intensity (κ²/4)|α_n(ω)|² of a detected complex spectrum,
/// the quantity whose pump-on/pump-off difference reproduces ΔT.
pub fn transmitted_intensity(map: &SpectrumMap, kappa: f64) -> Vec<f64> {
    let scale = 0.25 * kappa * kappa;
    map.complex()
        .map(|v| v.iter().map(|x| scale * x.norm_sqr()).collect())
        .unwrap_or_default()
}
