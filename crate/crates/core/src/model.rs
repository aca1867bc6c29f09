//! Physical parameters, the real-space lattice, cavity and polariton
//! dispersions, and the linear-response quantities χ(ω) and λ(ω).

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::error::{invalid, Error, Result};
use crate::units::{HBAR, HBAR_C};
use crate::C64;

/// Physical constants and rates of the coarse-grained Tavis–Cummings model.
///
/// Energies in eV, `length` in μm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase", deny_unknown_fields))]
pub struct ModelParams {
    /// Molecular transition energy ω₀.
    pub omega0: f64,
    /// Cavity cutoff ω_c (dispersion minimum).
    pub omega_c: f64,
    /// Collective coupling Ω = g√N.
    pub rabi: f64,
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Pure dephasing rate γ_φ.
    pub gamma_phi: f64,
    /// Chain length L.
    #[cfg_attr(feature = "serde", serde(rename = "lengthL"))]
    pub length: f64,
    /// Number of lattice sites N_k (odd).
    pub num_sites: usize,
    /// Number of molecules N.
    pub num_molecules: u64,
    /// Optional per-site offsets added to ω₀.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub disorder: Option<Vec<f64>>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            omega_c: 0.9,
            rabi: 0.05,
            kappa: 0.01,
            gamma_phi: 0.005,
            length: 200.0,
            num_sites: 601,
            num_molecules: 1_000_000,
            disorder: None,
        }
    }
}

impl ModelParams {
    /// Checks every invariant of the parameter set.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega0,
            self.omega_c,
            self.rabi,
            self.kappa,
            self.gamma_phi,
            self.length,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("model", "all energies and lengths must be finite"));
        }
        if self.omega0 <= 0.0 || self.omega_c <= 0.0 || self.rabi <= 0.0 {
            return Err(invalid("model", "omega0, omegaC and rabi must be positive"));
        }
        if self.kappa < 0.0 || self.gamma_phi < 0.0 {
            return Err(invalid("model", "kappa and gammaPhi must be non-negative"));
        }
        if self.num_sites < 3 || self.num_sites % 2 == 0 {
            return Err(invalid(
                "model",
                format!("numSites must be odd and >= 3 (got {})", self.num_sites),
            ));
        }
        if self.num_molecules < self.num_sites as u64 {
            return Err(invalid("model", "numMolecules must be >= numSites"));
        }
        if self.length <= 0.0 {
            return Err(invalid("model", "lengthL must be positive"));
        }
        let c = self.hopping();
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid("model", "hopping constant C must be finite and positive"));
        }
        if let Some(d) = &self.disorder {
            if d.len() != self.num_sites {
                return Err(invalid(
                    "model",
                    format!(
                        "disorder has {} entries but numSites is {}",
                        d.len(),
                        self.num_sites
                    ),
                ));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(invalid("model", "disorder offsets must be finite"));
            }
        }
        Ok(())
    }

    /// Lattice spacing Δr = L / N_k in μm.
    pub fn delta_r(&self) -> f64 {
        self.length / self.num_sites as f64
    }

    /// Photon hopping energy C = (ħc)² / (2 ω_c Δr²) in eV.
    pub fn hopping(&self) -> f64 {
        let dr = self.delta_r();
        HBAR_C * HBAR_C / (2.0 * self.omega_c * dr * dr)
    }

    /// Molecules per site, N_E = N / N_k.
    pub fn molecules_per_site(&self) -> f64 {
        self.num_molecules as f64 / self.num_sites as f64
    }

    /// Single-molecule coupling g = Ω/√N.
    pub fn single_coupling(&self) -> f64 {
        self.rabi / (self.num_molecules as f64).sqrt()
    }

    /// Transition energy at `site`, including any disorder offset.
    #[inline]
    pub fn site_omega0(&self, site: usize) -> f64 {
        match &self.disorder {
            Some(d) => self.omega0 + d[site],
            None => self.omega0,
        }
    }

    /// Largest stable RK4 step for the hopping scale, ħ/(4C) times `safety`.
    pub fn stable_dt(&self, safety: f64) -> f64 {
        safety * HBAR / (4.0 * self.hopping())
    }

    /// Largest wavevector resolvable on the lattice, π/Δr.
    pub fn k_max(&self) -> f64 {
        PI / self.delta_r()
    }
}

/// Real-space sites and grid momenta of the periodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGrid {
    /// Site positions in μm, centered on r = 0.
    pub positions: Vec<f64>,
    /// Grid momenta k_Q = 2πQ/L in μm⁻¹, Q = -(N_k-1)/2 ..= (N_k-1)/2.
    pub momenta: Vec<f64>,
    /// Lattice spacing in μm.
    pub delta_r: f64,
}

impl LatticeGrid {
    pub fn new(p: &ModelParams) -> Self {
        let n = p.num_sites;
        let dr = p.delta_r();
        let half = (n as f64 - 1.0) / 2.0;
        let positions = (0..n).map(|i| (i as f64 - half) * dr).collect();
        let momenta = (0..n)
            .map(|i| 2.0 * PI * (i as f64 - half) / p.length)
            .collect();
        Self {
            positions,
            momenta,
            delta_r: dr,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the site closest to `r` (ties go to the lower index).
    pub fn nearest_site(&self, r: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &x) in self.positions.iter().enumerate() {
            let d = (x - r).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Bare cavity dispersion ω_k = ω_c + (ħck)²/(2ω_c).
pub fn omega_cavity(k: f64, p: &ModelParams) -> f64 {
    let e = HBAR_C * k;
    p.omega_c + e * e / (2.0 * p.omega_c)
}

/// Upper and lower polariton energies `(ω_UP, ω_LP)` at wavevector `k`.
pub fn polariton_frequencies(k: f64, p: &ModelParams) -> (f64, f64) {
    let wk = omega_cavity(k, p);
    let mean = 0.5 * (p.omega0 + wk);
    let half_split = 0.5 * splitting(wk - p.omega0, p.rabi);
    (mean + half_split, mean - half_split)
}

#[inline]
fn splitting(detuning: f64, rabi: f64) -> f64 {
    detuning.hypot(2.0 * rabi)
}

/// Excitonic (Hopfield) fraction X² of the lower polariton,
/// ½(1 + δ/√(δ² + 4Ω²)) with δ = ω_k − ω₀.
pub fn exciton_fraction_lp(k: f64, p: &ModelParams) -> f64 {
    let delta = omega_cavity(k, p) - p.omega0;
    0.5 * (1.0 + delta / splitting(delta, p.rabi))
}

/// Excitonic fraction of the upper polariton, 1 − X²_LP.
pub fn exciton_fraction_up(k: f64, p: &ModelParams) -> f64 {
    let delta = omega_cavity(k, p) - p.omega0;
    0.5 * (1.0 - delta / splitting(delta, p.rabi))
}

/// Lower-polariton group velocity ∂ω_LP/∂k in μm/fs.
pub fn group_velocity_lp(k: f64, p: &ModelParams) -> f64 {
    // dω_k/dk = (ħc)² k / ω_c in eV·μm, weighted by the photon fraction.
    let photon_slope = HBAR_C * HBAR_C * k / p.omega_c;
    (1.0 - exciton_fraction_lp(k, p)) * photon_slope / HBAR
}

/// Linear molecular susceptibility χ(ω) = z₀ / ((ω − ω₀) + iγ_φ/2) in eV⁻¹.
pub fn susceptibility(omega: f64, z0: f64, p: &ModelParams) -> Result<C64> {
    let detuning = omega - p.omega0;
    if detuning == 0.0 && p.gamma_phi == 0.0 {
        return Err(Error::Pole { omega });
    }
    Ok(C64::new(z0, 0.0) / C64::new(detuning, 0.5 * p.gamma_phi))
}

/// λ²(ω) = −(1/C)[(ω − ω_c) + iκ/2 + Ω²χ(ω)], per site².
pub fn lambda_squared(omega: f64, z0: f64, p: &ModelParams) -> Result<C64> {
    let chi = susceptibility(omega, z0, p)?;
    let bracket = C64::new(omega - p.omega_c, 0.5 * p.kappa) + chi * (p.rabi * p.rabi);
    Ok(-bracket / p.hopping())
}

/// Spatial propagation constant λ(ω) per site: the root of λ² with
/// Re λ ≤ 0, so that e^{λ|n−n₀|} decays away from the source.
///
/// Divide by Δr for a per-μm constant; the intensity decays with 2 Re λ.
pub fn lambda_of_omega(omega: f64, z0: f64, p: &ModelParams) -> Result<C64> {
    let root = lambda_squared(omega, z0, p)?.sqrt();
    Ok(if root.re > 0.0 { -root } else { root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn cavity_dispersion_values() {
        let p = paper();
        assert_eq!(omega_cavity(0.0, &p), 0.9);
        // (ħc·π/2)²/1.8 with ħc = 0.19732698 eV·μm
        let hand = 0.9 + (0.658_211_956_9 * 0.299_792_458 * PI / 2.0).powi(2) / 1.8;
        assert_relative_eq!(omega_cavity(PI / 2.0, &p), hand, max_relative = 1e-15);
        assert!((omega_cavity(PI / 2.0, &p) - 0.95337).abs() < 1e-5);
        assert_eq!(omega_cavity(-1.3, &p), omega_cavity(1.3, &p));
    }

    #[test]
    fn resonance_splitting_is_two_rabi() {
        let p = paper();
        // ω_k = ω₀ at (ħck)² = 2ω_c(ω₀ − ω_c)
        let k_res = (2.0 * p.omega_c * (p.omega0 - p.omega_c)).sqrt() / HBAR_C;
        let (up, lp) = polariton_frequencies(k_res, &p);
        assert_relative_eq!(up - lp, 0.1, max_relative = 1e-12);
        assert_relative_eq!(exciton_fraction_lp(k_res, &p), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn lower_polariton_at_pump_momentum() {
        let (_, lp) = polariton_frequencies(PI / 2.0, &paper());
        assert!((lp - 0.922).abs() < 1e-3, "lp = {lp}");
    }

    #[test]
    fn decoupled_limit() {
        let mut p = paper();
        p.rabi = 1e-300;
        for k in [0.0, 1.0, 2.0, 4.0] {
            let wk = omega_cavity(k, &p);
            let (up, lp) = polariton_frequencies(k, &p);
            assert_relative_eq!(up, wk.max(p.omega0), max_relative = 1e-14);
            assert_relative_eq!(lp, wk.min(p.omega0), max_relative = 1e-14);
        }
    }

    #[test]
    fn exciton_fraction_at_pump_momentum() {
        let p = paper();
        // δ = 0.953375 − 1 = −0.046625; √(δ² + 0.01) = 0.110335
        let x2 = exciton_fraction_lp(PI / 2.0, &p);
        assert!((x2 - 0.289).abs() < 1e-3, "x2 = {x2}");
        assert!(exciton_fraction_lp(1e3, &p) > 1.0 - 1e-9);
    }

    #[test]
    fn group_velocity_matches_central_difference() {
        let p = paper();
        let k = PI / 2.0;
        let h = 1e-4;
        let fd = (polariton_frequencies(k + h, &p).1 - polariton_frequencies(k - h, &p).1)
            / (2.0 * h)
            / HBAR;
        let v = group_velocity_lp(k, &p);
        assert!((v - fd).abs() < 1e-6);
        assert!((v - 0.073).abs() < 1e-3, "v = {v}");
        assert_eq!(group_velocity_lp(0.0, &p), 0.0);
    }

    #[test]
    fn group_velocity_falls_off_past_crossover() {
        let p = paper();
        let mut last = f64::INFINITY;
        for i in 0..40 {
            let k = 4.0 + 0.5 * i as f64;
            let v = group_velocity_lp(k, &p);
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn susceptibility_limits() {
        let mut p = paper();
        let chi = susceptibility(p.omega0, -1.0, &p).unwrap();
        assert_relative_eq!(chi.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(chi.im, 2.0 / p.gamma_phi, max_relative = 1e-14);

        // independent arithmetic: −1/(−0.08 + 0.0025i) = (0.08 + 0.0025i)/(0.0064 + 6.25e-6)
        let chi = susceptibility(0.92, -1.0, &p).unwrap();
        let den = 0.08 * 0.08 + 0.0025 * 0.0025;
        assert_relative_eq!(chi.re, 0.08 / den, max_relative = 1e-12);
        assert_relative_eq!(chi.im, 0.0025 / den, max_relative = 1e-12);

        p.gamma_phi = 0.0;
        let chi = susceptibility(0.95, -1.0, &p).unwrap();
        assert_eq!(chi.im, 0.0);
        assert_relative_eq!(chi.re, -1.0 / (0.95 - 1.0), max_relative = 1e-14);
        assert!(matches!(
            susceptibility(p.omega0, -1.0, &p),
            Err(Error::Pole { .. })
        ));
        assert!(matches!(
            lambda_of_omega(p.omega0, -1.0, &p),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn lambda_bare_cavity_is_lossless() {
        let mut p = paper();
        p.kappa = 0.0;
        p.gamma_phi = 0.0;
        p.rabi = 1e-200;
        let l = lambda_of_omega(0.95, -1.0, &p).unwrap();
        assert_eq!(l.re, 0.0);
        assert_relative_eq!(
            l.im.abs(),
            ((0.95 - p.omega_c) / p.hopping()).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn lambda_round_trip_and_branch() {
        let p = paper();
        for i in 0..50 {
            let w = 0.85 + 0.004 * i as f64;
            let l = lambda_of_omega(w, -1.0, &p).unwrap();
            assert!(l.re <= 0.0);
            let chi = susceptibility(w, -1.0, &p).unwrap();
            let residual = l * l * p.hopping()
                + C64::new(w - p.omega_c, p.kappa / 2.0)
                + chi * (p.rabi * p.rabi);
            assert!(residual.norm() < 1e-14, "{residual}");
        }
    }

    #[test]
    fn lambda_conjugate_symmetry_under_loss_reversal() {
        let p = paper();
        let mut q = paper();
        q.kappa = -p.kappa;
        q.gamma_phi = -p.gamma_phi;
        let l2 = lambda_squared(0.93, -1.0, &p).unwrap();
        let l2r = lambda_squared(0.93, -1.0, &q).unwrap();
        assert_relative_eq!(l2.re, l2r.re, max_relative = 1e-14);
        assert_relative_eq!(l2.im, -l2r.im, max_relative = 1e-14);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let mut p = paper();
        assert!(p.validate().is_ok());
        p.num_sites = 600;
        let err = p.validate().unwrap_err();
        assert!(alloc::format!("{err}").contains("odd"));
        let mut p = paper();
        p.kappa = -1.0;
        assert!(p.validate().is_err());
        let mut p = paper();
        p.num_molecules = 10;
        assert!(p.validate().is_err());
        let mut p = paper();
        p.disorder = Some(alloc::vec![0.0; 3]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn grid_is_centered_and_symmetric() {
        let p = paper();
        let g = LatticeGrid::new(&p);
        assert_eq!(g.len(), 601);
        assert_eq!(g.positions[300], 0.0);
        for i in 0..601 {
            assert_relative_eq!(g.momenta[i], -g.momenta[600 - i], epsilon = 1e-12);
            assert_relative_eq!(g.positions[i], -g.positions[600 - i], epsilon = 1e-12);
        }
        assert_eq!(g.nearest_site(0.1), 300);
    }
}
