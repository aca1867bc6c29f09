//! Transport velocities from delay-resolved differential-transmission
//! profiles, and the containers for parameter sweeps.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::model::{exciton_fraction_lp, group_velocity_lp, ModelParams};
use crate::observables::{peak_of_profile, rms_of_profile};

/// Minimum number of probe delays for a velocity fit.
pub const MIN_DELAYS: usize = 5;
/// Minimum delay span (fs) for a velocity fit.
pub const MIN_DELAY_SPAN: f64 = 1000.0;

/// The pump-induced feature sits where the counter-propagating pump and
/// probe fronts meet. With equal speeds that point moves by v/2 per unit of
/// probe delay, so fitted slopes are scaled by 2 to recover the pump speed.
pub const COUNTER_PROPAGATING_SCALE: f64 = 2.0;

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when the data are exactly on the line
    /// (including constant data).
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} abscissae for {} ordinates", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("abscissae have no spread".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Velocities extracted from one delay scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportFit {
    /// Speed of the |ΔT| maximum, μm/fs.
    pub v_peak: f64,
    /// Speed of the rms displacement about the pump spot, μm/fs.
    pub v_rms: f64,
    /// Lower-polariton group velocity at the pump wavevector, μm/fs.
    pub v_grp: f64,
    pub r_squared_peak: f64,
    pub r_squared_rms: f64,
    pub delays: Vec<f64>,
    pub peak_positions: Vec<f64>,
    pub rms_positions: Vec<f64>,
}

impl TransportFit {
    /// v_rms / v_grp
    pub fn renormalization(&self) -> f64 {
        self.v_rms / self.v_grp
    }
}

/// One `(delay, profile)` pair: a non-negative spatial weight per site.
pub type DelayProfile = (f64, Vec<f64>);

/// Straight-line fits of the peak position and rms displacement of the
/// |ΔT_n| profiles against probe delay.
///
/// Slopes are multiplied by `geometry_scale` (use
/// [`COUNTER_PROPAGATING_SCALE`] for the counter-propagating setup) and the
/// rms is taken about `origin`, the pump spot.
pub fn fit_velocities(
    profiles: &[DelayProfile],
    positions: &[f64],
    origin: f64,
    k_pump: f64,
    p: &ModelParams,
    geometry_scale: f64,
) -> Result<TransportFit> {
    if profiles.len() < MIN_DELAYS {
        return Err(invalid(
            "delay scan",
            format!("need at least {MIN_DELAYS} delays, got {}", profiles.len()),
        ));
    }
    let (lo, hi) = profiles
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (d, _)| (lo.min(*d), hi.max(*d)));
    if hi - lo < MIN_DELAY_SPAN {
        return Err(invalid(
            "delay scan",
            format!("delays span {} fs, need at least {MIN_DELAY_SPAN}", hi - lo),
        ));
    }
    let mut delays = Vec::with_capacity(profiles.len());
    let mut peaks = Vec::with_capacity(profiles.len());
    let mut rms = Vec::with_capacity(profiles.len());
    for (delay, profile) in profiles {
        if profile.len() != positions.len() {
            return Err(Error::Shape(format!(
                "profile at delay {delay} has {} sites, grid has {}",
                profile.len(),
                positions.len()
            )));
        }
        let weights: Vec<f64> = profile.iter().map(|v| v.abs()).collect();
        delays.push(*delay);
        peaks.push(peak_of_profile(&weights, positions)?);
        rms.push(rms_of_profile(&weights, positions, origin)?);
    }
    let peak_fit = linear_fit(&delays, &peaks)?;
    let rms_fit = linear_fit(&delays, &rms)?;
    Ok(TransportFit {
        v_peak: geometry_scale * peak_fit.slope,
        v_rms: geometry_scale * rms_fit.slope,
        v_grp: group_velocity_lp(k_pump, p),
        r_squared_peak: peak_fit.r_squared,
        r_squared_rms: rms_fit.r_squared,
        delays,
        peak_positions: peaks,
        rms_positions: rms,
    })
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SweepAxis {
    /// Pump wavevector k_p (μm⁻¹); the probe uses −k_p.
    Momentum,
    /// Dephasing rate γ_φ (eV).
    Dephasing,
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    /// Pump wavevector used at this point.
    pub k_pump: f64,
    /// Lower-polariton excitonic fraction at `k_pump`.
    pub exciton_fraction: f64,
    /// The fit, or the error that prevented it.
    pub fit: core::result::Result<TransportFit, String>,
}

impl SweepPoint {
    pub fn new(
        axis_value: f64,
        k_pump: f64,
        p: &ModelParams,
        fit: core::result::Result<TransportFit, String>,
    ) -> Self {
        Self {
            axis_value,
            k_pump,
            exciton_fraction: exciton_fraction_lp(k_pump, p),
            fit,
        }
    }

    pub fn renormalization(&self) -> Option<f64> {
        self.fit.as_ref().ok().map(TransportFit::renormalization)
    }
}

/// Fits gathered along a sweep axis, in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn axis_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.axis_value).collect()
    }

    /// 1 − v_rms/v_grp for each point (NaN for failed points).
    pub fn slowdown(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.renormalization().map_or(f64::NAN, |r| 1.0 - r))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LatticeGrid;
    use alloc::vec;
    use proptest::prelude::*;

    fn gaussian_scan(v: f64, delays: &[f64], positions: &[f64], scale: f64) -> Vec<DelayProfile> {
        delays
            .iter()
            .map(|&d| {
                let c = -10.0 + v * d;
                let prof = positions
                    .iter()
                    .map(|r| scale * (-(r - c) * (r - c) / 18.0).exp())
                    .collect();
                (d, prof)
            })
            .collect()
    }

    fn delays() -> Vec<f64> {
        (0..9).map(|i| -800.0 + 200.0 * i as f64).collect()
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let f = linear_fit(&x, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
        assert!(matches!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
        assert_eq!(linear_fit(&x, &[2.0; 4]).unwrap().slope, 0.0);
    }

    #[test]
    fn translating_fixture() {
        let p = ModelParams::default();
        let g = LatticeGrid::new(&p);
        let scan = gaussian_scan(0.06, &delays(), &g.positions, 1.0);
        let fit = fit_velocities(&scan, &g.positions, -10.0, 1.0, &p, 1.0).unwrap();
        assert!((fit.v_peak - 0.06).abs() < 1e-3);
        assert!(fit.v_grp > 0.0);
    }

    #[test]
    fn stationary_fixture() {
        let p = ModelParams::default();
        let g = LatticeGrid::new(&p);
        let scan = gaussian_scan(0.0, &delays(), &g.positions, 1.0);
        let fit = fit_velocities(&scan, &g.positions, -10.0, 1.0, &p, 1.0).unwrap();
        assert_eq!(fit.v_peak, 0.0);
        assert_eq!(fit.v_rms, 0.0);
    }

    #[test]
    fn rejects_short_scans() {
        let p = ModelParams::default();
        let g = LatticeGrid::new(&p);
        let few = gaussian_scan(0.05, &[0.0, 300.0, 600.0, 900.0], &g.positions, 1.0);
        assert!(fit_velocities(&few, &g.positions, 0.0, 1.0, &p, 1.0).is_err());
        let narrow: Vec<f64> = (0..6).map(|i| 100.0 * i as f64).collect();
        let narrow = gaussian_scan(0.05, &narrow, &g.positions, 1.0);
        assert!(fit_velocities(&narrow, &g.positions, 0.0, 1.0, &p, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn recovers_injected_velocity(v in 0.01f64..0.1) {
            let p = ModelParams::default();
            let g = LatticeGrid::new(&p);
            let scan = gaussian_scan(v, &delays(), &g.positions, 1.0);
            // rms about the launch point of a translating symmetric profile
            // grows with the same speed once it is well separated
            let fit = fit_velocities(&scan, &g.positions, -10.0 - 80.0, 1.0, &p, 1.0).unwrap();
            prop_assert!((fit.v_peak - v).abs() < 1e-3);
            prop_assert!((fit.v_rms - v).abs() < 1e-3);
        }

        #[test]
        fn invariant_under_profile_scaling(scale in 1e-6f64..1e6) {
            let p = ModelParams::default();
            let g = LatticeGrid::new(&p);
            let a = fit_velocities(&gaussian_scan(0.04, &delays(), &g.positions, 1.0), &g.positions, -30.0, 1.0, &p, 2.0).unwrap();
            let b = fit_velocities(&gaussian_scan(0.04, &delays(), &g.positions, scale), &g.positions, -30.0, 1.0, &p, 2.0).unwrap();
            prop_assert!((a.v_peak - b.v_peak).abs() < 1e-12);
            prop_assert!((a.v_rms - b.v_rms).abs() < 1e-9 * a.v_rms.abs().max(1e-12));
        }
    }

    #[test]
    fn sweep_helpers() {
        let p = ModelParams::default();
        let ok = TransportFit {
            v_peak: 0.07,
            v_rms: 0.05,
            v_grp: 0.1,
            r_squared_peak: 1.0,
            r_squared_rms: 1.0,
            delays: vec![],
            peak_positions: vec![],
            rms_positions: vec![],
        };
        let s = SweepResult {
            axis: SweepAxis::Momentum,
            points: vec![
                SweepPoint::new(1.0, 1.0, &p, Ok(ok)),
                SweepPoint::new(2.0, 2.0, &p, Err("boom".into())),
            ],
        };
        let slow = s.slowdown();
        assert!((slow[0] - 0.5).abs() < 1e-12);
        assert!(slow[1].is_nan());
        assert_eq!(s.points[1].exciton_fraction, exciton_fraction_lp(2.0, &p));
    }
}
