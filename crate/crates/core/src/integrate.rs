//! Fixed-step classical Runge–Kutta integration of packed complex/real
//! state vectors.
//!
//! Systems are integrated in a frame rotating at `frame_omega`: every complex
//! amplitude is carried as `x e^{+iω_f t/ħ}`. Both the mean-field equations
//! and the perturbative hierarchy are invariant under this global phase
//! rotation, so the transformation is exact; it only removes the fast carrier
//! oscillation that would otherwise dominate the RK4 truncation error.
//! Snapshots are always converted back to the lab frame.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::units::HBAR;
use crate::C64;

/// Fields whose magnitude exceeds this abort the integration.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Largest allowed fraction of ħ/(4C) for the time step.
pub const STABILITY_SAFETY: f64 = 0.5;

/// Time stepping controls.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase", deny_unknown_fields))]
pub struct IntegratorConfig {
    /// Time step in fs.
    pub dt: f64,
    /// Final time in fs (integration starts at t = 0).
    pub t_end: f64,
    /// A snapshot is stored every `snapshot_stride` steps.
    pub snapshot_stride: usize,
    /// Energy (eV) of the rotating frame used internally; 0 integrates in
    /// the lab frame.
    #[cfg_attr(feature = "serde", serde(default))]
    pub frame_omega: f64,
    /// Snapshots are stored only from this time (fs) on; the stride grid
    /// still starts at t = 0.
    #[cfg_attr(feature = "serde", serde(default))]
    pub record_start: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_end: 1000.0,
            snapshot_stride: 10,
            frame_omega: 0.0,
            record_start: 0.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("integrator", "dt must be positive"));
        }
        let bound = p.stable_dt(STABILITY_SAFETY);
        if self.dt >= bound {
            return Err(invalid(
                "integrator",
                alloc::format!("dt = {} fs is not below the stability bound {bound:.4} fs", self.dt),
            ));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("integrator", "tEnd must be non-negative"));
        }
        if self.snapshot_stride == 0 {
            return Err(invalid("integrator", "snapshotStride must be at least 1"));
        }
        if !self.frame_omega.is_finite() {
            return Err(invalid("integrator", "frameOmega must be finite"));
        }
        if !(self.record_start >= 0.0 && self.record_start <= self.t_end) {
            return Err(invalid("integrator", "recordStart must lie in [0, tEnd]"));
        }
        Ok(())
    }

    /// Number of RK4 steps needed to reach `t_end`.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Snapshot spacing in fs.
    pub fn snapshot_dt(&self) -> f64 {
        self.dt * self.snapshot_stride as f64
    }

    /// Lab-frame factor e^{−iω_f t/ħ} for converting a rotating-frame
    /// amplitude back.
    pub fn to_lab(&self, t: f64) -> C64 {
        C64::from_polar(1.0, -self.frame_omega * t / HBAR)
    }
}

/// A state made of complex amplitudes and real populations.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedState {
    pub complex: Vec<C64>,
    pub real: Vec<f64>,
}

impl PackedState {
    pub fn zeros(num_complex: usize, num_real: usize) -> Self {
        Self {
            complex: vec![C64::new(0.0, 0.0); num_complex],
            real: vec![0.0; num_real],
        }
    }

    fn zeros_like(other: &Self) -> Self {
        Self::zeros(other.complex.len(), other.real.len())
    }

    /// `self = base + h * k`
    fn set_axpy(&mut self, base: &Self, h: f64, k: &Self) {
        for ((o, b), d) in self.complex.iter_mut().zip(&base.complex).zip(&k.complex) {
            *o = b + d * h;
        }
        for ((o, b), d) in self.real.iter_mut().zip(&base.real).zip(&k.real) {
            *o = b + d * h;
        }
    }

    /// Largest magnitude across all entries (NaN propagates as infinity).
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for z in &self.complex {
            let a = z.norm_sqr();
            if !(a <= m) {
                m = if a.is_nan() { f64::INFINITY } else { a };
            }
        }
        let mut m = m.sqrt();
        for x in &self.real {
            let a = x.abs();
            if !(a <= m) {
                m = if a.is_nan() { f64::INFINITY } else { a };
            }
        }
        m
    }
}

/// A first-order system ẋ = f(t, x) over a [`PackedState`].
pub trait OdeSystem {
    /// Writes f(t, x) into `out`.
    fn rhs(&self, t: f64, state: &PackedState, out: &mut PackedState);

    /// Name reported when the state blows up.
    fn name(&self) -> &'static str {
        "state"
    }
}

/// Classical fourth-order Runge–Kutta stepper with reusable buffers.
pub struct Rk4 {
    k1: PackedState,
    k2: PackedState,
    k3: PackedState,
    k4: PackedState,
    tmp: PackedState,
}

impl Rk4 {
    pub fn new(shape: &PackedState) -> Self {
        Self {
            k1: PackedState::zeros_like(shape),
            k2: PackedState::zeros_like(shape),
            k3: PackedState::zeros_like(shape),
            k4: PackedState::zeros_like(shape),
            tmp: PackedState::zeros_like(shape),
        }
    }

    /// Advances `state` from `t` to `t + dt`.
    pub fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, dt: f64, state: &mut PackedState) {
        let half = 0.5 * dt;
        sys.rhs(t, state, &mut self.k1);
        self.tmp.set_axpy(state, half, &self.k1);
        sys.rhs(t + half, &self.tmp, &mut self.k2);
        self.tmp.set_axpy(state, half, &self.k2);
        sys.rhs(t + half, &self.tmp, &mut self.k3);
        self.tmp.set_axpy(state, dt, &self.k3);
        sys.rhs(t + dt, &self.tmp, &mut self.k4);

        let w = dt / 6.0;
        let (k1, k2, k3, k4) = (&self.k1, &self.k2, &self.k3, &self.k4);
        for (i, x) in state.complex.iter_mut().enumerate() {
            *x += (k1.complex[i] + (k2.complex[i] + k3.complex[i]) * 2.0 + k4.complex[i]) * w;
        }
        for (i, x) in state.real.iter_mut().enumerate() {
            *x += (k1.real[i] + 2.0 * (k2.real[i] + k3.real[i]) + k4.real[i]) * w;
        }
    }
}

/// Integrates `sys` from t = 0 according to `cfg`, calling `observe(step,
/// t, state)` at every multiple of `snapshot_stride` steps (including step
/// 0) whose time is not before `record_start`.
pub fn integrate<S, F>(
    sys: &S,
    cfg: &IntegratorConfig,
    state: &mut PackedState,
    mut observe: F,
) -> Result<()>
where
    S: OdeSystem + ?Sized,
    F: FnMut(usize, f64, &PackedState),
{
    let mut rk = Rk4::new(state);
    let steps = cfg.num_steps();
    if cfg.record_start <= 0.0 {
        observe(0, 0.0, state);
    }
    for step in 1..=steps {
        let t = (step - 1) as f64 * cfg.dt;
        rk.step(sys, t, cfg.dt, state);
        let t_new = step as f64 * cfg.dt;
        let norm = state.max_abs();
        if !(norm <= BLOWUP_THRESHOLD) {
            return Err(Error::Instability {
                time: t_new,
                field: sys.name(),
                norm,
            });
        }
        if step % cfg.snapshot_stride == 0 && t_new >= cfg.record_start {
            observe(step, t_new, state);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator {
        omega: f64,
        decay: f64,
    }

    impl OdeSystem for Oscillator {
        fn rhs(&self, _t: f64, s: &PackedState, out: &mut PackedState) {
            out.complex[0] = s.complex[0] * C64::new(-self.decay, -self.omega);
            out.real[0] = -2.0 * self.decay * s.real[0];
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let sys = Oscillator {
            omega: 1.3,
            decay: 0.2,
        };
        let err = |dt: f64| {
            let cfg = IntegratorConfig {
                dt,
                t_end: 4.0,
                snapshot_stride: 1,
                frame_omega: 0.0,
                record_start: 0.0,
            };
            let mut s = PackedState::zeros(1, 1);
            s.complex[0] = C64::new(1.0, 0.0);
            s.real[0] = 1.0;
            integrate(&sys, &cfg, &mut s, |_, _, _| {}).unwrap();
            let exact = C64::from_polar((-0.2 * 4.0f64).exp(), -1.3 * 4.0);
            (s.complex[0] - exact).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn detects_blowup() {
        let sys = Oscillator {
            omega: 0.0,
            decay: -10.0,
        };
        let cfg = IntegratorConfig {
            dt: 0.01,
            t_end: 10.0,
            snapshot_stride: 1,
            frame_omega: 0.0,
            record_start: 0.0,
        };
        let mut s = PackedState::zeros(1, 1);
        s.complex[0] = C64::new(1.0, 0.0);
        let err = integrate(&sys, &cfg, &mut s, |_, _, _| {}).unwrap_err();
        assert!(matches!(err, Error::Instability { .. }));
    }

    #[test]
    fn stability_bound_enforced() {
        let p = ModelParams::default();
        let mut cfg = IntegratorConfig::default();
        assert!(cfg.validate(&p).is_ok());
        cfg.dt = 0.5;
        assert!(cfg.validate(&p).is_err());
        cfg.dt = 0.1;
        cfg.snapshot_stride = 0;
        assert!(cfg.validate(&p).is_err());
    }
}
