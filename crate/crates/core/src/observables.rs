//! Populations, bright/dark decomposition, spatial moments and the
//! polaritonic Beer–Lambert comparison.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;


use crate::dynamics::{COHERENCE, EXCITATION, INVERSION, PHOTON};
use crate::error::{Error, Result};
use crate::model::{lambda_of_omega, ModelParams};
use crate::record::SpatioTemporalRecord;
use crate::transport::linear_fit;
use crate::units::HBAR;
use crate::C64;

/// Snapshots below this total weight have no defined moments.
pub const MIN_TOTAL_WEIGHT: f64 = 1e-300;

/// A real value per snapshot and site, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMap {
    pub num_sites: usize,
    pub values: Vec<f64>,
}

impl SiteMap {
    pub fn num_rows(&self) -> usize {
        if self.num_sites == 0 {
            0
        } else {
            self.values.len() / self.num_sites
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.num_sites..(i + 1) * self.num_sites]
    }

    /// Sum over sites for every row.
    pub fn totals(&self) -> Vec<f64> {
        (0..self.num_rows()).map(|i| self.row(i).iter().sum()).collect()
    }

    fn from_fn(num_sites: usize, len: usize, f: impl Fn(usize) -> f64) -> Self {
        Self {
            num_sites,
            values: (0..len).map(f).collect(),
        }
    }
}

/// Per-molecule excitation p^m = (1 + ⟨σ^z⟩)/2, read from the dedicated
/// field when present (it avoids the cancellation in 1 + z near z = −1).
fn molecular_excitation(record: &SpatioTemporalRecord) -> Result<Vec<f64>> {
    if let Ok(pm) = record.real(EXCITATION) {
        return Ok(pm.to_vec());
    }
    Ok(record.real(INVERSION)?.iter().map(|z| 0.5 * (1.0 + z)).collect())
}

/// Photon population |⟨ã_n⟩|² and molecular excitation probability
/// (1 + ⟨σ^z_n⟩)/2 per molecule. Multiply the latter by N_E for totals.
pub fn populations(record: &SpatioTemporalRecord) -> Result<(SiteMap, SiteMap)> {
    let a = record.complex(PHOTON)?;
    let pm = molecular_excitation(record)?;
    let n = record.num_sites;
    Ok((
        SiteMap::from_fn(n, a.len(), |i| a[i].norm_sqr()),
        SiteMap {
            num_sites: n,
            values: pm,
        },
    ))
}

/// Bright population |⟨σ⁻⟩|², dark population (1 + ⟨σ^z⟩)/2 − |⟨σ⁻⟩|² and
/// the light–matter correlation Im Π = Im[⟨ã⟩⟨σ⁺⟩], per site.
pub fn bright_dark(record: &SpatioTemporalRecord) -> Result<(SiteMap, SiteMap, SiteMap)> {
    let a = record.complex(PHOTON)?;
    let s = record.complex(COHERENCE)?;
    let pm = molecular_excitation(record)?;
    let n = record.num_sites;
    let len = a.len();
    Ok((
        SiteMap::from_fn(n, len, |i| s[i].norm_sqr()),
        SiteMap::from_fn(n, len, |i| pm[i] - s[i].norm_sqr()),
        SiteMap::from_fn(n, len, |i| im_pi(a[i], s[i])),
    ))
}

/// Im[a · conj(σ)]
#[inline]
pub fn im_pi(a: C64, s: C64) -> f64 {
    a.im * s.re - a.re * s.im
}

/// Right-hand sides of the bright/dark rate equations at one site, in fs⁻¹:
///
/// ```text
/// ∂t p^B = −γ_φ p^B + 2Ω Im Π (1 − 2p^m)
/// ∂t p^D = +γ_φ p^B + 2Ω Im Π · 2p^m
/// ```
///
/// with Im Π = Im[⟨ã⟩⟨σ⁺⟩] and p^m = (1 + ⟨σ^z⟩)/2. These follow directly
/// from the coherence and inversion equations of motion.
pub fn rate_terms(p: &ModelParams, bright: f64, im_pi: f64, p_m: f64) -> RateTerms {
    let dephase = p.gamma_phi * bright / HBAR;
    let source = 2.0 * p.rabi * im_pi / HBAR;
    RateTerms {
        bright_loss: -dephase,
        bright_source: source * (1.0 - 2.0 * p_m),
        dark_gain: dephase,
        dark_source: source * 2.0 * p_m,
    }
}

/// The individual terms of the bright/dark rate equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub bright_loss: f64,
    pub bright_source: f64,
    pub dark_gain: f64,
    pub dark_source: f64,
}

/// Worst residual of the rate equations at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResidual {
    pub time: f64,
    /// max_n |∂t p^B − rhs|
    pub bright: f64,
    /// max_n of the largest term magnitude in the bright equation
    pub bright_scale: f64,
    pub dark: f64,
    pub dark_scale: f64,
}

impl RateResidual {
    pub fn bright_relative(&self) -> f64 {
        relative(self.bright, self.bright_scale)
    }

    pub fn dark_relative(&self) -> f64 {
        relative(self.dark, self.dark_scale)
    }
}

/// residual/scale, with an exactly vanishing equation counting as satisfied.
fn relative(residual: f64, scale: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else {
        residual / scale
    }
}

/// Compares a fourth-order central finite-difference time derivative of
/// p^B and p^D with the rate-equation right-hand sides, at every snapshot
/// that has two neighbours on each side.
pub fn rate_equation_residuals(
    record: &SpatioTemporalRecord,
    p: &ModelParams,
) -> Result<Vec<RateResidual>> {
    let (bright, dark, impi) = bright_dark(record)?;
    let pm = molecular_excitation(record)?;
    let h = record
        .time_step()
        .ok_or_else(|| Error::Shape("need at least five snapshots".into()))?;
    let n = record.num_sites;
    let rows = record.num_snapshots();
    if rows < 5 {
        return Err(Error::Shape("need at least five snapshots".into()));
    }
    let d5 = |m: &SiteMap, i: usize, s: usize| {
        (m.values[(i - 2) * n + s] - 8.0 * m.values[(i - 1) * n + s] + 8.0 * m.values[(i + 1) * n + s]
            - m.values[(i + 2) * n + s])
            / (12.0 * h)
    };
    let mut out = Vec::with_capacity(rows - 4);
    for i in 2..rows - 2 {
        let mut res = RateResidual {
            time: record.times[i],
            bright: 0.0,
            bright_scale: 0.0,
            dark: 0.0,
            dark_scale: 0.0,
        };
        for s in 0..n {
            let k = i * n + s;
            let t = rate_terms(p, bright.values[k], impi.values[k], pm[k]);
            let db = d5(&bright, i, s);
            let dd = d5(&dark, i, s);
            res.bright = res.bright.max((db - t.bright_loss - t.bright_source).abs());
            res.dark = res.dark.max((dd - t.dark_gain - t.dark_source).abs());
            res.bright_scale = res
                .bright_scale
                .max(db.abs())
                .max(t.bright_loss.abs())
                .max(t.bright_source.abs());
            res.dark_scale = res
                .dark_scale
                .max(dd.abs())
                .max(t.dark_gain.abs())
                .max(t.dark_source.abs());
        }
        out.push(res);
    }
    Ok(out)
}

fn check_weights(weights: &SiteMap, positions: &[f64]) -> Result<()> {
    if positions.len() != weights.num_sites {
        return Err(Error::Shape(format!(
            "{} positions for {} sites",
            positions.len(),
            weights.num_sites
        )));
    }
    Ok(())
}

/// Root-mean-square displacement from `origin` for every row of `weights`.
pub fn rms_displacement(weights: &SiteMap, positions: &[f64], origin: f64) -> Result<Vec<f64>> {
    check_weights(weights, positions)?;
    (0..weights.num_rows())
        .map(|i| rms_of_profile(weights.row(i), positions, origin).map_err(|_| Error::EmptyWeight { snapshot: i }))
        .collect()
}

/// Root-mean-square displacement of one non-negative profile.
pub fn rms_of_profile(weights: &[f64], positions: &[f64], origin: f64) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if !(total >= MIN_TOTAL_WEIGHT) {
        return Err(Error::EmptyWeight { snapshot: 0 });
    }
    let second: f64 = weights
        .iter()
        .zip(positions)
        .map(|(w, r)| w * (r - origin) * (r - origin))
        .sum();
    Ok((second / total).sqrt())
}

/// Position of the largest |weight| in every row, refined with a three-point
/// parabola. Ties resolve to the leftmost site.
pub fn peak_position(weights: &SiteMap, positions: &[f64]) -> Result<Vec<f64>> {
    check_weights(weights, positions)?;
    (0..weights.num_rows())
        .map(|i| peak_of_profile(weights.row(i), positions).map_err(|_| Error::EmptyWeight { snapshot: i }))
        .collect()
}

/// Parabolically refined position of the maximum of |profile|.
pub fn peak_of_profile(profile: &[f64], positions: &[f64]) -> Result<f64> {
    let mut best = 0;
    let mut best_v = -1.0;
    for (i, v) in profile.iter().enumerate() {
        let a = v.abs();
        if a > best_v {
            best = i;
            best_v = a;
        }
    }
    let total: f64 = profile.iter().map(|v| v.abs()).sum();
    if !(total >= MIN_TOTAL_WEIGHT) {
        return Err(Error::EmptyWeight { snapshot: 0 });
    }
    if best == 0 || best + 1 == profile.len() {
        return Ok(positions[best]);
    }
    let (l, c, r) = (profile[best - 1].abs(), best_v, profile[best + 1].abs());
    let curvature = l - 2.0 * c + r;
    if curvature >= 0.0 {
        return Ok(positions[best]);
    }
    let offset = 0.5 * (l - r) / curvature;
    let spacing = positions[best + 1] - positions[best];
    Ok(positions[best] + offset * spacing)
}

/// Time-maximum of each site's value over all rows.
pub fn time_maximum(map: &SiteMap) -> Vec<f64> {
    let mut env = alloc::vec![f64::NEG_INFINITY; map.num_sites];
    for i in 0..map.num_rows() {
        for (e, v) in env.iter_mut().zip(map.row(i)) {
            *e = e.max(*v);
        }
    }
    env
}

/// Result of a Beer–Lambert comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeerLambert {
    /// Fitted slope of ln n_ph against distance from the source, μm⁻¹.
    pub sim_slope: f64,
    /// 2 Re λ(ω)/Δr, μm⁻¹.
    pub pred_slope: f64,
    pub r_squared: f64,
}

impl BeerLambert {
    pub fn ratio(&self) -> f64 {
        self.sim_slope / self.pred_slope
    }
}

/// Fits the spatial decay of the photon population's time-maximum envelope
/// over sites `fit_range` (half-open) against the distance from `origin`,
/// and compares it with the intensity decay constant 2 Re λ(ω)/Δr.
pub fn beer_lambert_check(
    record: &SpatioTemporalRecord,
    p: &ModelParams,
    omega: f64,
    origin: f64,
    positions: &[f64],
    fit_range: core::ops::Range<usize>,
) -> Result<BeerLambert> {
    let (photons, _) = populations(record)?;
    check_weights(&photons, positions)?;
    if fit_range.end > photons.num_sites || fit_range.len() < 8 {
        return Err(Error::FitRange(format!(
            "need at least 8 sites inside the grid, got {fit_range:?}"
        )));
    }
    let envelope = time_maximum(&photons);
    let mut xs = Vec::with_capacity(fit_range.len());
    let mut ys = Vec::with_capacity(fit_range.len());
    for i in fit_range {
        let v = envelope[i];
        if !(v > 0.0) {
            return Err(Error::FitRange(format!("non-positive population at site {i}")));
        }
        xs.push((positions[i] - origin).abs());
        ys.push(v.ln());
    }
    let fit = linear_fit(&xs, &ys)?;
    let lambda = lambda_of_omega(omega, -1.0, p)?;
    Ok(BeerLambert {
        sim_slope: fit.slope,
        pred_slope: 2.0 * lambda.re / p.delta_r(),
        r_squared: fit.r_squared,
    })
}
