//! Gaussian pump and probe drives √κ⟨ã_n^in(t)⟩.
//!
//! A pulse contributes `η f(t) e^{−iωt} D_n` to the photon equation with
//! `f(t) = exp(−(t−t_β)²/2σ_t²)` and
//! `D_n = exp(−(r_n−r_β)²/2σ_r²) e^{i k_β r_n}`. The drive has units of fs⁻¹
//! per unit amplitude.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{invalid, Result};
use crate::model::{group_velocity_lp, polariton_frequencies, LatticeGrid, ModelParams};
use crate::units::HBAR;
use crate::C64;

/// Envelopes are cut to zero beyond this many temporal widths.
pub const TRUNCATION_WIDTHS: f64 = 8.0;

/// Declarative description of one Gaussian pulse.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase", deny_unknown_fields))]
pub struct PulseSpec {
    /// Drive strength η (≥ 0).
    pub amplitude: f64,
    /// Carrier energy in eV.
    pub omega_drive: f64,
    /// Temporal width σ_t in fs.
    pub sigma_t: f64,
    /// Spatial width σ_r in μm.
    pub sigma_r: f64,
    /// Central in-plane wavevector in μm⁻¹.
    pub k_center: f64,
    /// Spot center r_β in μm.
    pub center: f64,
    /// Temporal center t_β in fs.
    pub arrival: f64,
}

impl PulseSpec {
    /// A pulse resonant with the lower polariton at `k_center`, with the
    /// default widths σ_t = 25 fs and σ_r = 5 μm.
    pub fn resonant_lp(
        p: &ModelParams,
        amplitude: f64,
        k_center: f64,
        center: f64,
        arrival: f64,
    ) -> Self {
        Self {
            amplitude,
            omega_drive: polariton_frequencies(k_center, p).1,
            sigma_t: 25.0,
            sigma_r: 5.0,
            k_center,
            center,
            arrival,
        }
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.sigma_t > 0.0 && self.sigma_r > 0.0) {
            return Err(invalid("pulse", "sigmaT and sigmaR must be positive"));
        }
        if !(self.amplitude >= 0.0) {
            return Err(invalid("pulse", "amplitude must be non-negative"));
        }
        if !(self.k_center.abs() <= p.k_max()) {
            return Err(invalid(
                "pulse",
                alloc::format!(
                    "|kCenter| = {} exceeds the grid limit pi/dr = {}",
                    self.k_center.abs(),
                    p.k_max()
                ),
            ));
        }
        let all_finite = [
            self.omega_drive,
            self.k_center,
            self.center,
            self.arrival,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("pulse", "pulse parameters must be finite"));
        }
        Ok(())
    }

    /// Same pulse with a different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }

    /// Temporal envelope f(t), zero outside the truncation window.
    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.arrival) / self.sigma_t;
        if x.abs() > TRUNCATION_WIDTHS {
            0.0
        } else {
            (-0.5 * x * x).exp()
        }
    }

    /// Time after which the envelope is identically zero.
    pub fn switch_off(&self) -> f64 {
        self.arrival + TRUNCATION_WIDTHS * self.sigma_t
    }
}

/// Spatial profile D_n of a pulse, precomputed once per grid.
#[derive(Debug, Clone)]
pub struct PulseProfile {
    spec: PulseSpec,
    shape: Vec<C64>,
}

impl PulseProfile {
    pub fn new(spec: &PulseSpec, grid: &LatticeGrid) -> Self {
        let shape = grid
            .positions
            .iter()
            .map(|&r| {
                let x = (r - spec.center) / spec.sigma_r;
                C64::from_polar((-0.5 * x * x).exp(), spec.k_center * r)
            })
            .collect();
        Self {
            spec: spec.clone(),
            shape,
        }
    }

    pub fn spec(&self) -> &PulseSpec {
        &self.spec
    }

    pub fn shape(&self) -> &[C64] {
        &self.shape
    }

    /// Complex prefactor η f(t) e^{−i(ω−ω_frame)t}; zero when switched off.
    #[inline]
    pub fn prefactor(&self, t: f64, frame_omega: f64) -> C64 {
        let env = self.spec.amplitude * self.spec.envelope(t);
        if env == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar(env, -(self.spec.omega_drive - frame_omega) * t / HBAR)
    }

    /// Adds the drive at time `t` (in the frame rotating at `frame_omega`)
    /// into `out`.
    pub fn add_into(&self, t: f64, frame_omega: f64, out: &mut [C64]) {
        let pre = self.prefactor(t, frame_omega);
        if pre.re == 0.0 && pre.im == 0.0 {
            return;
        }
        for (o, d) in out.iter_mut().zip(&self.shape) {
            *o += pre * d;
        }
    }
}

/// Lab-frame drive of a single pulse at time `t` over all sites.
pub fn drive_field(t: f64, spec: &PulseSpec, grid: &LatticeGrid) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    PulseProfile::new(spec, grid).add_into(t, 0.0, &mut out);
    out
}

/// Elementwise sum of the pump and probe drives at time `t`.
pub fn two_pulse_drive(
    t: f64,
    pump: &PulseSpec,
    probe: &PulseSpec,
    grid: &LatticeGrid,
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    PulseProfile::new(pump, grid).add_into(t, 0.0, &mut out);
    PulseProfile::new(probe, grid).add_into(t, 0.0, &mut out);
    out
}

/// Probe arrival time realizing probe delay `delay` (fs).
///
/// At zero delay the pump and probe wavepackets, each travelling at the
/// lower-polariton group velocity of its own wavevector, reach r = 0 at the
/// same instant. Positive delays bring the probe in later.
pub fn probe_arrival_for_delay(
    pump: &PulseSpec,
    probe: &PulseSpec,
    delay: f64,
    p: &ModelParams,
) -> f64 {
    let v_pump = group_velocity_lp(pump.k_center, p);
    let v_probe = group_velocity_lp(probe.k_center, p);
    let reach = |spec: &PulseSpec, v: f64| {
        if v == 0.0 {
            0.0
        } else {
            -spec.center / v
        }
    };
    pump.arrival + reach(pump, v_pump) - reach(probe, v_probe) + delay
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn setup() -> (ModelParams, LatticeGrid, PulseSpec) {
        let p = ModelParams::default();
        let g = LatticeGrid::new(&p);
        let s = PulseSpec::resonant_lp(&p, 0.7, PI / 2.0, 0.0, 100.0);
        (p, g, s)
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let (_, g, s) = setup();
        let f = drive_field(100.0, &s.with_amplitude(0.0), &g);
        assert!(f.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn tails_are_negligible() {
        let (_, g, s) = setup();
        for t in [100.0 - 8.01 * 25.0, 100.0 + 8.5 * 25.0] {
            let f = drive_field(t, &s, &g);
            let m = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(m < 1e-13 * s.amplitude);
        }
        // just inside the window the Gaussian is already below 1e-13
        let f = drive_field(100.0 + 7.99 * 25.0, &s, &g);
        assert!(f.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-13 * s.amplitude);
    }

    #[test]
    fn peak_magnitude_equals_amplitude() {
        let (_, g, s) = setup();
        let f = drive_field(s.arrival, &s, &g);
        let i = g.nearest_site(s.center);
        assert_relative_eq!(f[i].norm(), s.amplitude, max_relative = 1e-14);
    }

    #[test]
    fn linear_in_amplitude() {
        let (_, g, s) = setup();
        let a = drive_field(93.0, &s, &g);
        let b = drive_field(93.0, &s.with_amplitude(2.0 * s.amplitude), &g);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*y, *x * 2.0);
        }
    }

    #[test]
    fn two_pulse_sum() {
        let (p, g, s) = setup();
        let probe = PulseSpec {
            center: 50.0,
            k_center: -PI / 2.0,
            ..s.clone()
        };
        let silent = probe.with_amplitude(0.0);
        assert_eq!(two_pulse_drive(97.0, &s, &silent, &g), drive_field(97.0, &s, &g));
        let doubled = two_pulse_drive(97.0, &s, &s, &g);
        for (x, y) in doubled.iter().zip(drive_field(97.0, &s, &g)) {
            assert_relative_eq!(x.re, 2.0 * y.re, epsilon = 1e-15);
            assert_relative_eq!(x.im, 2.0 * y.im, epsilon = 1e-15);
        }
        assert!(probe.validate(&p).is_ok());
    }

    #[test]
    fn spatial_spectrum_peaks_at_center_wavevector() {
        let (_, g, s) = setup();
        let prof = PulseProfile::new(&s, &g);
        // direct DFT with the e^{-ikr} kernel
        let mut best = (0.0, 0.0);
        for &k in &g.momenta {
            let amp: C64 = prof
                .shape()
                .iter()
                .zip(&g.positions)
                .map(|(d, &r)| d * C64::from_polar(1.0, -k * r))
                .sum();
            if amp.norm() > best.1 {
                best = (k, amp.norm());
            }
        }
        let dk = 2.0 * PI / 200.0;
        assert!((best.0 - s.k_center).abs() <= 0.5 * dk + 1e-12);
    }

    #[test]
    fn symmetric_geometry_has_no_arrival_offset() {
        let (p, _, s) = setup();
        let pump = PulseSpec {
            center: -50.0,
            ..s.clone()
        };
        let probe = PulseSpec {
            center: 50.0,
            k_center: -PI / 2.0,
            ..s
        };
        assert_relative_eq!(
            probe_arrival_for_delay(&pump, &probe, 0.0, &p),
            pump.arrival,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            probe_arrival_for_delay(&pump, &probe, 300.0, &p),
            pump.arrival + 300.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn validation() {
        let (p, _, s) = setup();
        assert!(s.validate(&p).is_ok());
        assert!(PulseSpec { sigma_t: 0.0, ..s.clone() }.validate(&p).is_err());
        assert!(PulseSpec { k_center: 20.0, ..s.clone() }.validate(&p).is_err());
        assert!(PulseSpec { amplitude: -1.0, ..s }.validate(&p).is_err());
    }
}
