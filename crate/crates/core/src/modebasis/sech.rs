// SPDX-License-Identifier: Apache-2.0

//! Hyperbolic-secant mode family.
//!
//! Raw functions are `v_m(t) = √N_m sech(κt/2) t^m`. Writing `x = κt`,
//! `√N_m t^m = √(κ / (8 (2m)! η(2m))) x^m` where `η` is the Dirichlet eta
//! function; this equals the textbook `N_m` with `(1 - 2^{1-2m}) ζ(2m) = η(2m)`
//! and avoids overflowing `κ^{2m+1}`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{apply_sign_convention, gram_schmidt, overlap, BasisFamily, ModeBasis, ORTHOGONALITY_LIMIT};
use crate::error::{Error, Result};
use crate::grid::{cumulative_forward, SampledWaveform, TimeGrid, WaveformKind};
use crate::special::{dirichlet_eta_even, factorial, zeta_even};

/// Highest raw order for which the normalisation is evaluated.
pub const MAX_SECH_ORDER: usize = 20;

/// Highest order with a closed-form polynomial cross-check.
pub const MAX_ANALYTIC_ORDER: usize = 3;

/// Energy that may fall outside the grid.
pub const CONTAINMENT_LOSS: f64 = 1e-6;

/// Analytic deviation tolerance, relative to the mode's peak amplitude.
pub const ANALYTIC_MATCH_TOL: f64 = 1e-6;

/// Normalisation constant `N_m = κ^{2m+1} / (8 (1 - 2^{1-2m}) Γ(2m+1) ζ(2m))`.
///
/// Overflows to infinity for large `κ` and `m`; [`sech_raw`] uses the scaled
/// form instead.
pub fn sech_norm_constant(m: usize, kappa_ph: f64) -> Result<f64> {
    check_order(m)?;
    let l = 2 * m as u32;
    let denom = 8.0 * (1.0 - 2f64.powi(1 - l as i32)) * factorial(l) * zeta_even(l);
    Ok(kappa_ph.powi(l as i32 + 1) / denom)
}

fn check_order(m: usize) -> Result<()> {
    if m > MAX_SECH_ORDER {
        return Err(Error::ModeOrderTooLarge { order: m, max: MAX_SECH_ORDER });
    }
    Ok(())
}

fn check_kappa(kappa_ph: f64) -> Result<()> {
    if !(kappa_ph > 0.0) || !kappa_ph.is_finite() {
        return Err(Error::param(format!("kappa_ph must be positive, got {kappa_ph}")));
    }
    Ok(())
}

/// `sech(y)` without overflow for large `|y|`.
#[inline]
pub(crate) fn sech(y: f64) -> f64 {
    let e = (-y.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Dimensionless moment `∫ sech²(x/2) x^k dx`.
fn moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        8.0 * factorial(k as u32) * dirichlet_eta_even(k as u32)
    }
}

/// The analytically normalised raw function `v_m` sampled on `grid`.
pub fn sech_raw(m: usize, kappa_ph: f64, grid: &TimeGrid) -> Result<SampledWaveform> {
    check_order(m)?;
    check_kappa(kappa_ph)?;
    let scale = (kappa_ph / moment(2 * m)).sqrt();
    let w = SampledWaveform::from_fn(*grid, WaveformKind::ModeFunction, |t| {
        let x = kappa_ph * t;
        C64::new(scale * sech(x / 2.0) * x.powi(m as i32), 0.0)
    })?;
    let lost = 1.0 - w.energy();
    if lost > CONTAINMENT_LOSS {
        return Err(Error::GridTooNarrow { lost });
    }
    Ok(w)
}

/// Orthonormal sech modes `0..n_modes` by numeric Gram–Schmidt, with the
/// leading-lobe-positive sign convention.
pub fn sech_basis(n_modes: usize, kappa_ph: f64, grid: &TimeGrid) -> Result<ModeBasis> {
    if n_modes == 0 {
        return Err(Error::param("n_modes must be at least 1"));
    }
    let raw = (0..n_modes)
        .map(|m| sech_raw(m, kappa_ph, grid))
        .collect::<Result<Vec<_>>>()?;
    let basis = gram_schmidt(&raw, BasisFamily::SechOrthogonal, kappa_ph)?;
    let modes = basis.into_modes().iter().map(apply_sign_convention).collect();
    let basis = ModeBasis::new(modes, BasisFamily::SechOrthogonal, kappa_ph)?;
    let worst = basis.overlap_matrix()?.max_off_diagonal_sq();
    debug_assert!(worst <= ORTHOGONALITY_LIMIT, "sech basis off-diagonal {worst}");
    Ok(basis)
}

/// Default grid for sech modes up to `max_mode`.
///
/// Spacing satisfies `κ·dt = 2π/400`; the window is the smallest symmetric
/// interval holding `1 - 1e-6` of the highest mode's energy.
pub fn default_grid(kappa_ph: f64, max_mode: usize) -> Result<TimeGrid> {
    default_grid_with_spacing(kappa_ph, max_mode, 2.0 * PI / (400.0 * kappa_ph))
}

pub fn default_grid_with_spacing(kappa_ph: f64, max_mode: usize, dt: f64) -> Result<TimeGrid> {
    check_order(max_mode)?;
    check_kappa(kappa_ph)?;
    let generous = TimeGrid::symmetric((40.0 + 6.0 * max_mode as f64) / kappa_ph, dt)?;
    let basis = sech_basis(max_mode + 1, kappa_ph, &generous)?;
    let top = &basis.modes()[max_mode];
    let density: Vec<f64> = top.samples().iter().map(|s| s.norm_sqr()).collect();
    let cumulative = cumulative_forward(&density, dt);
    let total = *cumulative.last().unwrap();
    let centre = generous.len() / 2;
    for half in 1..centre {
        let inside = cumulative[centre + half] - cumulative[centre - half];
        if total - inside <= CONTAINMENT_LOSS * total {
            return TimeGrid::symmetric(half as f64 * dt, dt);
        }
    }
    Err(Error::GridTooNarrow { lost: f64::NAN })
}

/// Polynomial coefficients (in `x = κt`) and squared-norm reciprocal `Z_m` of
/// the analytic sech modes up to `max_order`.
fn analytic_polynomials(max_order: usize) -> Vec<(Vec<f64>, f64)> {
    let inner = |p: &[f64], q: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (j, pj) in p.iter().enumerate() {
            for (l, ql) in q.iter().enumerate() {
                acc += pj * ql * moment(j + l);
            }
        }
        acc
    };
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for m in 0..=max_order {
        let mut a = vec![0.0; m + 1];
        a[m] = 1.0;
        let mut monomial = vec![0.0; m + 1];
        monomial[m] = 1.0;
        // Only lower modes of equal parity contribute.
        for i in 1..=m / 2 {
            let (lower, z_lower) = &out[m - 2 * i];
            let proj = inner(lower, &monomial) * z_lower;
            for (k, c) in lower.iter().enumerate() {
                a[k] -= proj * c;
            }
        }
        let z = 1.0 / inner(&a, &a);
        out.push((a, z));
    }
    out
}

/// Closed-form sech mode `ξ_m(t) = √(Z_m κ) sech(κt/2) A_m(κt)` for `m <= 3`,
/// verified against the numeric Gram–Schmidt construction.
pub fn sech_mode_analytic(m: usize, kappa_ph: f64, grid: &TimeGrid) -> Result<SampledWaveform> {
    if m > MAX_ANALYTIC_ORDER {
        return Err(Error::ModeOrderTooLarge { order: m, max: MAX_ANALYTIC_ORDER });
    }
    check_kappa(kappa_ph)?;
    let polys = analytic_polynomials(m);
    let (coeffs, z) = &polys[m];
    let scale = (z * kappa_ph).sqrt();
    let analytic = SampledWaveform::from_fn(*grid, WaveformKind::ModeFunction, |t| {
        let x = kappa_ph * t;
        let poly = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        C64::new(scale * sech(x / 2.0) * poly, 0.0)
    })?;
    let analytic = apply_sign_convention(&analytic);

    let numeric = sech_basis(m + 1, kappa_ph, grid)?;
    let reference = &numeric.modes()[m];
    let sign = if overlap(reference, &analytic)?.re < 0.0 { -1.0 } else { 1.0 };
    let peak = reference.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
    let deviation = analytic
        .samples()
        .iter()
        .zip(reference.samples())
        .map(|(a, r)| (a * sign - r).norm())
        .fold(0.0, f64::max)
        / peak;
    if deviation > ANALYTIC_MATCH_TOL {
        return Err(Error::ConstructionInconsistency { mode: m, deviation });
    }
    Ok(analytic)
}

/// Polynomial coefficients of `A_m(x)` (ascending powers of `x = κt`).
pub fn analytic_polynomial(m: usize) -> Result<Vec<f64>> {
    if m > MAX_ANALYTIC_ORDER {
        return Err(Error::ModeOrderTooLarge { order: m, max: MAX_ANALYTIC_ORDER });
    }
    Ok(analytic_polynomials(m).pop().unwrap().0)
}
