//! Perturbative pump-probe hierarchy.
//!
//! Every mean-field variable is expanded in the pump and probe amplitudes,
//! `⟨ã_n⟩ = Σ η_p^a η_p'^b α^{(a,b)}_n` (likewise σ and z). Starting from the
//! vacuum only eight coefficients are nontrivial up to second order in the
//! pump and first order in the probe; `z^{(0,0)} ≡ −1` throughout.
//!
//! Drives enter with unit amplitude: the physical amplitudes are factored
//! out, so a pulse only contributes its shape. A pulse with zero amplitude (or
//! no pulse at all) contributes nothing.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::photon_linear;
use crate::error::{invalid, Result};
use crate::integrate::{integrate, IntegratorConfig, OdeSystem, PackedState};
use crate::model::{LatticeGrid, ModelParams};
use crate::pulses::{PulseProfile, PulseSpec};
use crate::record::{RecordMeta, SpatioTemporalRecord};
use crate::units::HBAR;
use crate::C64;

pub const ALPHA10: &str = "alpha10";
pub const SIGMA10: &str = "sigma10";
pub const Z20: &str = "z20";
pub const ALPHA01: &str = "alpha01";
pub const SIGMA01: &str = "sigma01";
pub const Z11: &str = "z11";
pub const ALPHA21: &str = "alpha21";
pub const SIGMA21: &str = "sigma21";

/// Complex fields in packed order.
pub const COMPLEX_FIELDS: [&str; 6] = [ALPHA10, SIGMA10, ALPHA01, SIGMA01, ALPHA21, SIGMA21];
/// Real fields in packed order.
pub const REAL_FIELDS: [&str; 2] = [Z20, Z11];
/// Every field of the hierarchy.
pub const ALL_FIELDS: [&str; 8] = [ALPHA10, SIGMA10, Z20, ALPHA01, SIGMA01, Z11, ALPHA21, SIGMA21];

const Z00: f64 = -1.0;

/// Expansion coefficients of every site at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeState {
    pub alpha10: Vec<C64>,
    pub sigma10: Vec<C64>,
    pub alpha01: Vec<C64>,
    pub sigma01: Vec<C64>,
    pub alpha21: Vec<C64>,
    pub sigma21: Vec<C64>,
    pub z20: Vec<f64>,
    pub z11: Vec<f64>,
    pub time: f64,
}

impl PerturbativeState {
    pub fn zeros(n: usize) -> Self {
        let c = vec![C64::new(0.0, 0.0); n];
        Self {
            alpha10: c.clone(),
            sigma10: c.clone(),
            alpha01: c.clone(),
            sigma01: c.clone(),
            alpha21: c.clone(),
            sigma21: c,
            z20: vec![0.0; n],
            z11: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha10.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha10.is_empty()
    }

    fn pack(&self) -> PackedState {
        let mut complex = Vec::with_capacity(6 * self.len());
        for f in [
            &self.alpha10,
            &self.sigma10,
            &self.alpha01,
            &self.sigma01,
            &self.alpha21,
            &self.sigma21,
        ] {
            complex.extend_from_slice(f);
        }
        let mut real = self.z20.clone();
        real.extend_from_slice(&self.z11);
        PackedState { complex, real }
    }

    fn unpack(p: &PackedState, time: f64) -> Self {
        let n = p.real.len() / 2;
        let c = |i: usize| p.complex[i * n..(i + 1) * n].to_vec();
        Self {
            alpha10: c(0),
            sigma10: c(1),
            alpha01: c(2),
            sigma01: c(3),
            alpha21: c(4),
            sigma21: c(5),
            z20: p.real[..n].to_vec(),
            z11: p.real[n..].to_vec(),
            time,
        }
    }
}

/// Which orders to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Only the (1,0), (0,1), (2,0) and (1,1) coefficients.
    FirstOrderSectors,
    /// Everything up to (2,1).
    Full,
}

struct Kernel<'a> {
    p: &'a ModelParams,
    frame: f64,
    truncation: Truncation,
}

impl Kernel<'_> {
    /// Writes the derivative of `state` (packed) into `out`, without drives.
    fn apply(&self, state: &PackedState, out: &mut PackedState) {
        let n = state.real.len() / 2;
        let p = self.p;
        let inv_hbar = 1.0 / HBAR;
        let hop = p.hopping();
        let half_kappa = 0.5 * p.kappa;
        let half_gamma = 0.5 * p.gamma_phi;
        let rabi = p.rabi;
        let detuning_c = p.omega_c - self.frame;

        let (a10, rest) = state.complex.split_at(n);
        let (s10, rest) = rest.split_at(n);
        let (a01, rest) = rest.split_at(n);
        let (s01, rest) = rest.split_at(n);
        let (a21, s21) = rest.split_at(n);
        let (z20, z11) = state.real.split_at(n);

        let (da10, rest) = out.complex.split_at_mut(n);
        let (ds10, rest) = rest.split_at_mut(n);
        let (da01, rest) = rest.split_at_mut(n);
        let (ds01, rest) = rest.split_at_mut(n);
        let (da21, ds21) = rest.split_at_mut(n);
        let (dz20, dz11) = out.real.split_at_mut(n);

        let neg_i_rabi = C64::new(0.0, -rabi);
        let i_rabi = C64::new(0.0, rabi);
        let full = self.truncation == Truncation::Full;
        for i in 0..n {
            let mol = C64::new(half_gamma, p.site_omega0(i) - self.frame);

            da10[i] = (photon_linear(a10, i, detuning_c, half_kappa, hop) + neg_i_rabi * s10[i]) * inv_hbar;
            ds10[i] = (-s10[i] * mol + i_rabi * Z00 * a10[i]) * inv_hbar;
            dz20[i] = -4.0 * rabi * im_product(s10[i], a10[i]) * inv_hbar;

            da01[i] = (photon_linear(a01, i, detuning_c, half_kappa, hop) + neg_i_rabi * s01[i]) * inv_hbar;
            ds01[i] = (-s01[i] * mol + i_rabi * Z00 * a01[i]) * inv_hbar;
            dz11[i] = -4.0 * rabi * (im_product(s10[i], a01[i]) + im_product(s01[i], a10[i])) * inv_hbar;

            if full {
                da21[i] = (photon_linear(a21, i, detuning_c, half_kappa, hop) + neg_i_rabi * s21[i]) * inv_hbar;
                let source = a21[i] * Z00 + a10[i] * z11[i] + a01[i] * z20[i];
                ds21[i] = (-s21[i] * mol + i_rabi * source) * inv_hbar;
            } else {
                da21[i] = C64::new(0.0, 0.0);
                ds21[i] = C64::new(0.0, 0.0);
            }
        }
    }
}

/// Im[s · conj(a)]
#[inline]
fn im_product(s: C64, a: C64) -> f64 {
    s.im * a.re - s.re * a.im
}

/// Lab-frame derivative of the hierarchy for given pump and probe drive
/// arrays (unit amplitude).
pub fn hierarchy_rhs(
    state: &PerturbativeState,
    pump_drive: &[C64],
    probe_drive: &[C64],
    p: &ModelParams,
) -> PerturbativeState {
    let kernel = Kernel {
        p,
        frame: 0.0,
        truncation: Truncation::Full,
    };
    let packed = state.pack();
    let mut out = PackedState::zeros(packed.complex.len(), packed.real.len());
    kernel.apply(&packed, &mut out);
    let mut d = PerturbativeState::unpack(&out, state.time);
    for (o, x) in d.alpha10.iter_mut().zip(pump_drive) {
        *o += x;
    }
    for (o, x) in d.alpha01.iter_mut().zip(probe_drive) {
        *o += x;
    }
    d
}

struct HierarchySystem<'a> {
    kernel: Kernel<'a>,
    pump: Option<PulseProfile>,
    probe: Option<PulseProfile>,
}

impl OdeSystem for HierarchySystem<'_> {
    fn rhs(&self, t: f64, state: &PackedState, out: &mut PackedState) {
        self.kernel.apply(state, out);
        let n = state.real.len() / 2;
        let frame = self.kernel.frame;
        if let Some(pump) = &self.pump {
            pump.add_into(t, frame, &mut out.complex[..n]);
        }
        if let Some(probe) = &self.probe {
            probe.add_into(t, frame, &mut out.complex[2 * n..3 * n]);
        }
    }

    fn name(&self) -> &'static str {
        "perturbative state"
    }
}

fn unit_profile(spec: Option<&PulseSpec>, grid: &LatticeGrid) -> Option<PulseProfile> {
    spec.filter(|s| s.amplitude != 0.0)
        .map(|s| PulseProfile::new(&s.with_amplitude(1.0), grid))
}

/// Integrates the hierarchy from the zero initial condition and records the
/// requested fields (lab frame) at every snapshot.
pub fn evolve_hierarchy(
    pump: Option<&PulseSpec>,
    probe: Option<&PulseSpec>,
    cfg: &IntegratorConfig,
    p: &ModelParams,
    fields: &[&str],
    truncation: Truncation,
) -> Result<SpatioTemporalRecord> {
    p.validate()?;
    cfg.validate(p)?;
    for spec in pump.iter().chain(probe.iter()) {
        spec.validate(p)?;
    }
    for f in fields {
        if !ALL_FIELDS.contains(f) {
            return Err(invalid("hierarchy field", alloc::format!("unknown field `{f}`")));
        }
    }
    let grid = LatticeGrid::new(p);
    let sys = HierarchySystem {
        kernel: Kernel {
            p,
            frame: cfg.frame_omega,
            truncation,
        },
        pump: unit_profile(pump, &grid),
        probe: unit_profile(probe, &grid),
    };

    let n = p.num_sites;
    let mut record = SpatioTemporalRecord::new(n);
    let mut selected: Vec<(&str, Option<usize>, Option<usize>)> = Vec::new();
    for f in fields {
        if let Some(i) = COMPLEX_FIELDS.iter().position(|c| c == f) {
            record.declare(f, true);
            selected.push((f, Some(i), None));
        } else if let Some(i) = REAL_FIELDS.iter().position(|c| c == f) {
            record.declare(f, false);
            selected.push((f, None, Some(i)));
        }
    }
    let mut pulses = Vec::new();
    if let Some(s) = pump {
        pulses.push(("pump".into(), s.clone()));
    }
    if let Some(s) = probe {
        pulses.push(("probe".into(), s.clone()));
    }
    record.meta = Some(RecordMeta {
        params: p.clone(),
        pulses,
        integrator: cfg.clone(),
    });

    let mut state = PerturbativeState::zeros(n).pack();
    let mut row = vec![C64::new(0.0, 0.0); n];
    integrate(&sys, cfg, &mut state, |_, t, s| {
        record.times.push(t);
        let to_lab = cfg.to_lab(t);
        for &(name, ci, ri) in &selected {
            if let Some(i) = ci {
                for (r, x) in row.iter_mut().zip(&s.complex[i * n..(i + 1) * n]) {
                    *r = x * to_lab;
                }
                record.push_complex(name, &row);
            } else if let Some(i) = ri {
                record.push_real(name, &s.real[i * n..(i + 1) * n]);
            }
        }
    })?;
    Ok(record)
}

/// Final lab-frame hierarchy state at `cfg.t_end`.
pub fn evolve_hierarchy_final(
    pump: Option<&PulseSpec>,
    probe: Option<&PulseSpec>,
    cfg: &IntegratorConfig,
    p: &ModelParams,
    truncation: Truncation,
) -> Result<PerturbativeState> {
    p.validate()?;
    cfg.validate(p)?;
    let grid = LatticeGrid::new(p);
    let sys = HierarchySystem {
        kernel: Kernel {
            p,
            frame: cfg.frame_omega,
            truncation,
        },
        pump: unit_profile(pump, &grid),
        probe: unit_profile(probe, &grid),
    };
    let mut state = PerturbativeState::zeros(p.num_sites).pack();
    let sparse = IntegratorConfig {
        snapshot_stride: usize::MAX,
        ..cfg.clone()
    };
    integrate(&sys, &sparse, &mut state, |_, _, _| {})?;
    let t = cfg.num_steps() as f64 * cfg.dt;
    let to_lab = cfg.to_lab(t);
    for x in state.complex.iter_mut() {
        *x *= to_lab;
    }
    Ok(PerturbativeState::unpack(&state, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn small() -> ModelParams {
        ModelParams {
            num_sites: 81,
            length: 27.0,
            ..ModelParams::default()
        }
    }

    fn pulses(p: &ModelParams) -> (PulseSpec, PulseSpec) {
        let pump = PulseSpec {
            sigma_r: 2.0,
            ..PulseSpec::resonant_lp(p, 1.0, PI / 2.0, -5.0, 60.0)
        };
        let probe = PulseSpec {
            center: 5.0,
            k_center: -PI / 2.0,
            arrival: 80.0,
            ..pump.clone()
        };
        (pump, probe)
    }

    fn cfg(frame: f64) -> IntegratorConfig {
        IntegratorConfig {
            dt: 0.1,
            t_end: 200.0,
            snapshot_stride: 50,
            frame_omega: frame,
            record_start: 0.0,
        }
    }

    #[test]
    fn zero_state_zero_drive() {
        let p = small();
        let z = PerturbativeState::zeros(p.num_sites);
        let zero = vec![C64::new(0.0, 0.0); p.num_sites];
        let d = hierarchy_rhs(&z, &zero, &zero, &p);
        assert_eq!(d, PerturbativeState::zeros(p.num_sites));
    }

    #[test]
    fn no_probe_means_no_third_order() {
        let p = small();
        let (pump, _) = pulses(&p);
        let s = evolve_hierarchy_final(Some(&pump), None, &cfg(pump.omega_drive), &p, Truncation::Full).unwrap();
        assert!(s.alpha21.iter().chain(&s.sigma21).chain(&s.alpha01).all(|x| x.norm() == 0.0));
        assert!(s.z11.iter().all(|x| *x == 0.0));
        assert!(s.alpha10.iter().any(|x| x.norm() > 0.0));
    }

    #[test]
    fn no_pump_leaves_pump_sector_empty() {
        let p = small();
        let (_, probe) = pulses(&p);
        let s = evolve_hierarchy_final(None, Some(&probe), &cfg(probe.omega_drive), &p, Truncation::Full).unwrap();
        assert!(s.alpha10.iter().chain(&s.sigma10).chain(&s.alpha21).all(|x| x.norm() == 0.0));
        assert!(s.z20.iter().chain(&s.z11).all(|x| *x == 0.0));
    }

    #[test]
    fn pump_and_probe_sectors_swap() {
        let p = small();
        let (pump, probe) = pulses(&p);
        let c = cfg(pump.omega_drive);
        let a = evolve_hierarchy_final(Some(&pump), Some(&probe), &c, &p, Truncation::Full).unwrap();
        let b = evolve_hierarchy_final(Some(&probe), Some(&pump), &c, &p, Truncation::Full).unwrap();
        assert_eq!(a.alpha10, b.alpha01);
        assert_eq!(a.sigma01, b.sigma10);
        assert_eq!(a.z20.len(), b.z20.len());
    }

    #[test]
    fn first_order_sectors_are_decoupled() {
        let p = small();
        let (pump, probe) = pulses(&p);
        let c = cfg(pump.omega_drive);
        let full = evolve_hierarchy_final(Some(&pump), Some(&probe), &c, &p, Truncation::Full).unwrap();
        let low = evolve_hierarchy_final(Some(&pump), Some(&probe), &c, &p, Truncation::FirstOrderSectors).unwrap();
        assert_eq!(full.alpha10, low.alpha10);
        assert_eq!(full.alpha01, low.alpha01);
        assert_eq!(full.z20, low.z20);
        assert_eq!(full.z11, low.z11);
    }

    #[test]
    fn pump_scaling() {
        // rhs linearity in the pump drive: α10 ∝ c, z20 ∝ |c|² for c = 2, i
        let p = small();
        let n = p.num_sites;
        let mut s = PerturbativeState::zeros(n);
        for i in 0..n {
            let x = i as f64 * 0.3;
            s.alpha10[i] = C64::new(x.sin(), x.cos()) * 0.1;
            s.sigma10[i] = C64::new(0.2 * x.cos(), -0.1 * x.sin());
        }
        let zero = vec![C64::new(0.0, 0.0); n];
        let base = hierarchy_rhs(&s, &zero, &zero, &p);
        for c in [C64::new(2.0, 0.0), C64::new(0.0, 1.0)] {
            let mut t = s.clone();
            t.alpha10.iter_mut().for_each(|x| *x *= c);
            t.sigma10.iter_mut().for_each(|x| *x *= c);
            let d = hierarchy_rhs(&t, &zero, &zero, &p);
            for i in 0..n {
                assert!((d.alpha10[i] - base.alpha10[i] * c).norm() < 1e-12);
                assert!((d.z20[i] - base.z20[i] * c.norm_sqr()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn record_selects_fields() {
        let p = small();
        let (pump, probe) = pulses(&p);
        let rec = evolve_hierarchy(
            Some(&pump),
            Some(&probe),
            &cfg(pump.omega_drive),
            &p,
            &[ALPHA01, ALPHA21, Z20],
            Truncation::Full,
        )
        .unwrap();
        assert_eq!(rec.fields.len(), 3);
        assert!(rec.validate().is_ok());
        assert!(rec.real(Z20).unwrap().iter().all(|z| z.is_finite()));
        assert!(evolve_hierarchy(Some(&pump), None, &cfg(0.9), &p, &["alpha99"], Truncation::Full).is_err());
    }
}
