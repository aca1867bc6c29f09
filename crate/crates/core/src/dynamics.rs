//! Nonlinear coarse-grained mean-field equations of motion.
//!
//! Per site `n`, with the periodic second difference
//! `∂²a_n = a_{n+1} − 2a_n + a_{n−1}` and all energies divided by ħ:
//!
//! ```text
//! ∂t a_n = −(iω_c + κ/2) a_n − iΩ σ_n + iC ∂²a_n + drive_n
//! ∂t σ_n = −(iω₀ + γ_φ/2) σ_n + iΩ z_n a_n
//! ∂t z_n = −4Ω Im[σ_n a_n*]
//! ```
//!
//! The integrator carries the excitation 1 + z_n rather than z_n, so weak
//! excitations near the ground state keep full relative precision. Records
//! store it as the molecular population p^m_n = (1 + z_n)/2 next to z_n.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{invalid, Result};
use crate::integrate::{integrate, IntegratorConfig, OdeSystem, PackedState};
use crate::model::{LatticeGrid, ModelParams};
use crate::pulses::{PulseProfile, PulseSpec};
use crate::record::{RecordMeta, SpatioTemporalRecord};
use crate::units::HBAR;
use crate::C64;

/// Record field holding ⟨ã_n⟩.
pub const PHOTON: &str = "photon";
/// Record field holding ⟨σ⁻_n⟩.
pub const COHERENCE: &str = "coherence";
/// Record field holding ⟨σ^z_n⟩.
pub const INVERSION: &str = "inversion";
/// Record field holding p^m_n = (1 + ⟨σ^z_n⟩)/2 at full relative precision.
pub const EXCITATION: &str = "excitation";

/// Mean-field amplitudes of every site at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    /// Rescaled photon amplitude ⟨ã_n⟩.
    pub photon: Vec<C64>,
    /// Molecular coherence ⟨σ⁻_n⟩.
    pub coherence: Vec<C64>,
    /// Inversion ⟨σ^z_n⟩.
    pub inversion: Vec<f64>,
    /// Time in fs.
    pub time: f64,
}

impl MeanFieldState {
    /// All molecules in the ground state, empty cavity.
    pub fn vacuum(num_sites: usize) -> Self {
        Self {
            photon: vec![C64::new(0.0, 0.0); num_sites],
            coherence: vec![C64::new(0.0, 0.0); num_sites],
            inversion: vec![-1.0; num_sites],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.photon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.photon.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.photon.len();
        if self.coherence.len() != n || self.inversion.len() != n {
            return Err(invalid("mean-field state", "field lengths differ"));
        }
        Ok(())
    }

    /// Σ_n |a_n|² + (1 + z_n)/2, conserved when κ = γ_φ = 0 and undriven.
    pub fn total_excitation(&self) -> f64 {
        let photons: f64 = self.photon.iter().map(|a| a.norm_sqr()).sum();
        let molecules: f64 = self.inversion.iter().map(|z| 0.5 * (1.0 + z)).sum();
        photons + molecules
    }

    fn pack(&self, frame_factor: C64) -> PackedState {
        let mut complex = Vec::with_capacity(2 * self.len());
        complex.extend(self.photon.iter().map(|a| a * frame_factor));
        complex.extend(self.coherence.iter().map(|s| s * frame_factor));
        PackedState {
            complex,
            real: self.inversion.iter().map(|z| 1.0 + z).collect(),
        }
    }

    fn unpack(packed: &PackedState, to_lab: C64, time: f64) -> Self {
        let n = packed.real.len();
        Self {
            photon: packed.complex[..n].iter().map(|a| a * to_lab).collect(),
            coherence: packed.complex[n..].iter().map(|s| s * to_lab).collect(),
            inversion: packed.real.iter().map(|w| w - 1.0).collect(),
            time,
        }
    }
}

/// Photon-equation linear part −(i(ω_c − ω_f) + κ/2)a + iC ∂²a, in eV.
#[inline]
pub(crate) fn photon_linear(a: &[C64], n: usize, detuning_c: f64, half_kappa: f64, hop: f64) -> C64 {
    let len = a.len();
    let left = a[(n + len - 1) % len];
    let right = a[(n + 1) % len];
    let lap = left + right - a[n] * 2.0;
    -a[n] * C64::new(half_kappa, detuning_c) + lap * C64::new(0.0, hop)
}

/// Derivative of the full state, lab frame: the right-hand side of the
/// mean-field equations for a given drive array.
pub fn rhs(state: &MeanFieldState, drive: &[C64], p: &ModelParams) -> MeanFieldState {
    let n = state.len();
    let mut out = MeanFieldState {
        photon: vec![C64::new(0.0, 0.0); n],
        coherence: vec![C64::new(0.0, 0.0); n],
        inversion: vec![0.0; n],
        time: state.time,
    };
    let excitation: Vec<f64> = state.inversion.iter().map(|z| 1.0 + z).collect();
    site_rhs(
        p,
        0.0,
        &state.photon,
        &state.coherence,
        &excitation,
        &mut out.photon,
        &mut out.coherence,
        &mut out.inversion,
    );
    for (o, d) in out.photon.iter_mut().zip(drive) {
        *o += d;
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn site_rhs(
    p: &ModelParams,
    frame: f64,
    a: &[C64],
    s: &[C64],
    w: &[f64],
    da: &mut [C64],
    ds: &mut [C64],
    dw: &mut [f64],
) {
    let inv_hbar = 1.0 / HBAR;
    let hop = p.hopping();
    let half_kappa = 0.5 * p.kappa;
    let half_gamma = 0.5 * p.gamma_phi;
    let rabi = p.rabi;
    let neg_i_rabi = C64::new(0.0, -rabi);
    for n in 0..a.len() {
        let lin = photon_linear(a, n, p.omega_c - frame, half_kappa, hop);
        da[n] = (lin + neg_i_rabi * s[n]) * inv_hbar;
        let detuning = p.site_omega0(n) - frame;
        ds[n] = (-s[n] * C64::new(half_gamma, detuning) + a[n] * C64::new(0.0, rabi * (w[n] - 1.0)))
            * inv_hbar;
        // Im[σ a*]
        let im = s[n].im * a[n].re - s[n].re * a[n].im;
        dw[n] = -4.0 * rabi * im * inv_hbar;
    }
}

/// Mean-field equations with pulse driving, as an [`OdeSystem`] in the
/// rotating frame of `frame_omega`.
pub struct MeanFieldSystem<'a> {
    params: &'a ModelParams,
    pulses: Vec<PulseProfile>,
    frame_omega: f64,
}

impl<'a> MeanFieldSystem<'a> {
    pub fn new(params: &'a ModelParams, grid: &LatticeGrid, pulses: &[PulseSpec], frame_omega: f64) -> Self {
        Self {
            params,
            pulses: pulses.iter().map(|s| PulseProfile::new(s, grid)).collect(),
            frame_omega,
        }
    }
}

impl OdeSystem for MeanFieldSystem<'_> {
    fn rhs(&self, t: f64, state: &PackedState, out: &mut PackedState) {
        let n = state.real.len();
        let (a, s) = state.complex.split_at(n);
        let (da, ds) = out.complex.split_at_mut(n);
        site_rhs(self.params, self.frame_omega, a, s, &state.real, da, ds, &mut out.real);
        for pulse in &self.pulses {
            pulse.add_into(t, self.frame_omega, da);
        }
    }

    fn name(&self) -> &'static str {
        "mean-field state"
    }
}

/// Integrates the driven mean-field equations from `initial` (taken at
/// t = 0) and records photon, coherence and inversion snapshots.
pub fn evolve(
    initial: &MeanFieldState,
    pulses: &[PulseSpec],
    cfg: &IntegratorConfig,
    p: &ModelParams,
) -> Result<SpatioTemporalRecord> {
    p.validate()?;
    cfg.validate(p)?;
    initial.validate()?;
    if initial.len() != p.num_sites {
        return Err(invalid("mean-field state", "length differs from numSites"));
    }
    for pulse in pulses {
        pulse.validate(p)?;
    }
    let grid = LatticeGrid::new(p);
    let sys = MeanFieldSystem::new(p, &grid, pulses, cfg.frame_omega);

    let mut record = SpatioTemporalRecord::new(p.num_sites);
    record.declare(PHOTON, true);
    record.declare(COHERENCE, true);
    record.declare(INVERSION, false);
    record.declare(EXCITATION, false);
    let labels = ["pump", "probe"];
    record.meta = Some(RecordMeta {
        params: p.clone(),
        pulses: pulses
            .iter()
            .enumerate()
            .map(|(i, s)| (labels.get(i).copied().unwrap_or("pulse").into(), s.clone()))
            .collect(),
        integrator: cfg.clone(),
    });

    let n = p.num_sites;
    let mut state = initial.pack(C64::new(1.0, 0.0));
    let mut row = vec![C64::new(0.0, 0.0); n];
    let mut real_row = vec![0.0; n];
    integrate(&sys, cfg, &mut state, |_, t, s| {
        let to_lab = cfg.to_lab(t);
        record.times.push(t);
        for (r, x) in row.iter_mut().zip(&s.complex[..n]) {
            *r = x * to_lab;
        }
        record.push_complex(PHOTON, &row);
        for (r, x) in row.iter_mut().zip(&s.complex[n..]) {
            *r = x * to_lab;
        }
        record.push_complex(COHERENCE, &row);
        for (r, w) in real_row.iter_mut().zip(&s.real) {
            *r = w - 1.0;
        }
        record.push_real(INVERSION, &real_row);
        for (r, w) in real_row.iter_mut().zip(&s.real) {
            *r = 0.5 * w;
        }
        record.push_real(EXCITATION, &real_row);
    })?;
    Ok(record)
}

/// Final lab-frame state after integrating to `cfg.t_end`, without storing
/// snapshots.
pub fn evolve_final(
    initial: &MeanFieldState,
    pulses: &[PulseSpec],
    cfg: &IntegratorConfig,
    p: &ModelParams,
) -> Result<MeanFieldState> {
    p.validate()?;
    cfg.validate(p)?;
    initial.validate()?;
    let grid = LatticeGrid::new(p);
    let sys = MeanFieldSystem::new(p, &grid, pulses, cfg.frame_omega);
    let mut state = initial.pack(C64::new(1.0, 0.0));
    let sparse = IntegratorConfig {
        snapshot_stride: usize::MAX,
        ..cfg.clone()
    };
    integrate(&sys, &sparse, &mut state, |_, _, _| {})?;
    let t = cfg.num_steps() as f64 * cfg.dt;
    Ok(MeanFieldState::unpack(&state, cfg.to_lab(t), t))
}

/// Reads snapshot `i` of a mean-field record back into a state.
pub fn snapshot(record: &SpatioTemporalRecord, i: usize) -> Result<MeanFieldState> {
    Ok(MeanFieldState {
        photon: record.complex_row(PHOTON, i)?.to_vec(),
        coherence: record.complex_row(COHERENCE, i)?.to_vec(),
        inversion: record.real_row(INVERSION, i)?.to_vec(),
        time: record.times[i],
    })
}

/// Pump-only dynamics from the vacuum.
pub fn pump_only(
    p: &ModelParams,
    pump: &PulseSpec,
    cfg: &IntegratorConfig,
) -> Result<SpatioTemporalRecord> {
    evolve(&MeanFieldState::vacuum(p.num_sites), core::slice::from_ref(pump), cfg, p)
}
