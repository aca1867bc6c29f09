//! Transport-renormalization sweeps over the pump wavevector or the
//! dephasing rate. Every (point, delay) pair is an independent job; results
//! are gathered by index so the output does not depend on scheduling.

use polaritrans_core::model::polariton_frequencies;
use polaritrans_core::transport::{SweepAxis, SweepPoint, SweepResult};
use rayon::prelude::*;

use crate::pipeline::{DelayResult, PumpProbeSetup};

impl PumpProbeSetup {
    /// The setup at one sweep point. A momentum point drives both pulses
    /// at ±k on the lower polariton and moves the rotating frame with them.
    pub fn at_point(&self, axis: SweepAxis, value: f64) -> PumpProbeSetup {
        let mut s = self.clone();
        match axis {
            SweepAxis::Momentum => {
                let omega = polariton_frequencies(value, &s.params).1;
                s.pump.k_center = value;
                s.pump.omega_drive = omega;
                s.probe.k_center = -value;
                s.probe.omega_drive = omega;
                s.integrator.frame_omega = omega;
            }
            SweepAxis::Dephasing => s.params.gamma_phi = value,
        }
        s
    }
}

/// Runs the full pump-probe pipeline at every axis value. Failed points
/// carry the error message instead of aborting the sweep.
pub fn sweep(base: &PumpProbeSetup, axis: SweepAxis, values: &[f64]) -> SweepResult {
    let setups: Vec<PumpProbeSetup> = values.iter().map(|&v| base.at_point(axis, v)).collect();
    let jobs: Vec<(usize, f64)> = setups
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.analysis.delays.iter().map(move |&d| (i, d)))
        .collect();
    let runs: Vec<_> = jobs.par_iter().map(|&(i, d)| setups[i].run_delay(d)).collect();

    let mut runs = runs.into_iter();
    let points = setups
        .iter()
        .zip(values)
        .map(|(s, &v)| {
            let mine: Vec<_> = runs.by_ref().take(s.analysis.delays.len()).collect();
            let fit = mine
                .into_iter()
                .collect::<crate::Result<Vec<DelayResult>>>()
                .and_then(|r| s.fit(&r))
                .map_err(|e| e.to_string());
            SweepPoint::new(v, s.pump.k_center, &s.params, fit)
        })
        .collect();
    SweepResult { axis, points }
}

/// Sweep over k_p at the base setup's γ_φ.
pub fn sweep_momentum(base: &PumpProbeSetup, k_values: &[f64]) -> SweepResult {
    sweep(base, SweepAxis::Momentum, k_values)
}

/// Sweep over γ_φ at the base setup's k_p.
pub fn sweep_dephasing(base: &PumpProbeSetup, gamma_values: &[f64]) -> SweepResult {
    sweep(base, SweepAxis::Dephasing, gamma_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::tests::small_setup;
    use polaritrans_core::model::exciton_fraction_lp;
    use std::f64::consts::PI;

    #[test]
    fn momentum_point_moves_both_pulses() {
        let s = small_setup().at_point(SweepAxis::Momentum, PI / 4.0);
        assert_eq!(s.pump.k_center, PI / 4.0);
        assert_eq!(s.probe.k_center, -PI / 4.0);
        assert_eq!(s.pump.omega_drive, polariton_frequencies(PI / 4.0, &s.params).1);
        assert_eq!(s.integrator.frame_omega, s.pump.omega_drive);
    }

    #[test]
    fn failed_points_are_annotated() {
        let mut base = small_setup();
        base.analysis.delays = vec![0.0, 100.0];
        let r = sweep_dephasing(&base, &[0.0, 0.005]);
        assert_eq!(r.points.len(), 2);
        for p in &r.points {
            assert!(p.fit.as_ref().unwrap_err().contains("delays"));
            assert!(p.renormalization().is_none());
        }
    }

    #[test]
    fn exciton_fraction_is_attached() {
        let mut base = small_setup();
        base.analysis.delays = vec![0.0];
        let r = sweep_momentum(&base, &[PI / 4.0, PI / 2.0]);
        for p in &r.points {
            assert_eq!(p.exciton_fraction, exciton_fraction_lp(p.k_pump, &base.params));
        }
    }
}
