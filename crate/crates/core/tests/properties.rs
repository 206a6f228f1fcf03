// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use tempomux::modebasis::{
    default_grid, fourier_transform, gram_schmidt, hermite_gaussian_basis, sech_basis, BasisFamily,
};
use tempomux::pulsesynth::{decay_rate, quantize, source_coupling, time_reverse_waveform, DacModel, DriveOptions};
use tempomux::tfplan::{mode_count, wigner, ModeFootprints, ResourceBudget, Scheme};
use tempomux::tomography::{
    amplitude_damping_chi, measurement_settings, mle_state, process_fidelity, process_matrix, simulate_counts,
    Confusion, MleOptions, Preparation, ProcessMatrix,
};
use tempomux::{SampledWaveform, TimeGrid, WaveformKind};

const MHZ: f64 = 2.0 * PI * 1e6;

fn random_density(re: &[f64], im: &[f64]) -> Matrix3<C64> {
    let a = Matrix3::from_fn(|i, j| C64::new(re[3 * i + j], im[3 * i + j]));
    let rho = a * a.adjoint();
    rho / rho.trace()
}

fn embed(rho: &Matrix2<C64>) -> Matrix3<C64> {
    Matrix3::from_fn(|i, j| if i < 2 && j < 2 { rho[(i, j)] } else { C64::new(0.0, 0.0) })
}

fn amplitude_damping(gamma: f64, rho: &Matrix2<C64>) -> Matrix2<C64> {
    let k0 = Matrix2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new((1.0 - gamma).sqrt(), 0.0));
    let k1 = Matrix2::new(C64::new(0.0, 0.0), C64::new(gamma.sqrt(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint()
}

fn footprints() -> &'static ModeFootprints {
    static F: std::sync::OnceLock<ModeFootprints> = std::sync::OnceLock::new();
    F.get_or_init(|| ModeFootprints::sech(21).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sech_basis_is_orthonormal(kappa_mhz in 1.0f64..20.0, n in 1usize..=8) {
        let kappa = kappa_mhz * MHZ;
        let grid = default_grid(kappa, n - 1).unwrap();
        let basis = sech_basis(n, kappa, &grid).unwrap();
        prop_assert!(basis.overlap_matrix().unwrap().max_off_diagonal_sq() <= 1e-10);
        prop_assert!(basis.overlap_matrix().unwrap().max_deviation_from_identity() <= 1e-8);
    }

    #[test]
    fn gram_schmidt_is_idempotent(kappa_mhz in 1.0f64..20.0, n in 1usize..=6) {
        let kappa = kappa_mhz * MHZ;
        let grid = default_grid(kappa, n - 1).unwrap();
        let basis = sech_basis(n, kappa, &grid).unwrap();
        let again = gram_schmidt(basis.modes(), BasisFamily::SechOrthogonal, kappa).unwrap();
        for (a, b) in basis.modes().iter().zip(again.modes()) {
            let scale = a.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!((x - y).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn parseval_holds_for_superpositions(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        kappa_mhz in 2.0f64..10.0,
    ) {
        let kappa = kappa_mhz * MHZ;
        let grid = default_grid(kappa, 3).unwrap();
        let basis = sech_basis(4, kappa, &grid).unwrap();
        let mut samples = vec![C64::new(0.0, 0.0); grid.len()];
        for ((re, im), mode) in coeffs.iter().zip(basis.modes()) {
            for (s, m) in samples.iter_mut().zip(mode.samples()) {
                *s += C64::new(*re, *im) * m;
            }
        }
        let w = SampledWaveform::new_unchecked(grid, samples, WaveformKind::FieldRecord).unwrap();
        prop_assume!(w.energy() > 1e-3);
        let spectrum = fourier_transform(&w).unwrap();
        prop_assert!((spectrum.energy() - w.energy()).abs() <= 1e-6 * w.energy());
    }

    #[test]
    fn time_reversal_is_an_involution(m in 0usize..4, shift in -20i32..20) {
        let kappa = 5.0 * MHZ;
        let grid = default_grid(kappa, 3).unwrap();
        let mode = sech_basis(4, kappa, &grid).unwrap().into_modes().swap_remove(m);
        let delta_t = shift as f64 * grid.dt();
        let back = time_reverse_waveform(&time_reverse_waveform(&mode, delta_t).unwrap(), delta_t).unwrap();
        // Samples shifted past either edge are dropped.
        let edge = shift.unsigned_abs() as usize;
        let n = grid.len();
        for i in edge..n - edge {
            prop_assert_eq!(mode.samples()[i], back.samples()[i]);
        }
    }

    #[test]
    fn rate_respects_cap(m in 0usize..6, cap_mhz in 1.0f64..16.0) {
        let kappa = 5.0 * MHZ;
        let grid = default_grid(kappa, 5).unwrap();
        let mode = &sech_basis(6, kappa, &grid).unwrap().into_modes()[m];
        let rate = decay_rate(mode, &DriveOptions { cap: cap_mhz * MHZ, ..Default::default() }).unwrap();
        prop_assert!(rate.gamma.iter().all(|&g| g >= 0.0 && g <= cap_mhz * MHZ * (1.0 + 1e-12)));
    }

    #[test]
    fn quantisation_is_idempotent(m in 0usize..4, bits in 2u32..14) {
        let kappa = 5.0 * MHZ;
        let kappa_f = 164.0 * MHZ;
        let grid = default_grid(kappa, 3).unwrap();
        let mode = &sech_basis(4, kappa, &grid).unwrap().into_modes()[m];
        let opts = DriveOptions::default();
        let drive = source_coupling(mode, kappa_f, &opts).unwrap();
        let dac = DacModel { bits, ..DacModel::default_for(kappa_f, opts.cap) };
        let once = quantize(&drive, &dac).unwrap();
        let twice = quantize(&once, &dac).unwrap();
        prop_assert_eq!(once.g, twice.g);
    }

    #[test]
    fn mle_reconstruction_is_physical(
        re in prop::collection::vec(-1.0f64..1.0, 9),
        im in prop::collection::vec(-1.0f64..1.0, 9),
        shots in 50u64..5000,
        seed in any::<u64>(),
    ) {
        let rho = random_density(&re, &im);
        let settings = measurement_settings();
        let confusion = Confusion::ideal();
        let table = simulate_counts(&[rho], &[Preparation::Ground], &settings, &confusion, shots, seed).unwrap();
        for c in &table.counts[0] {
            prop_assert_eq!(c[0] + c[1] + c[2], shots);
        }
        let est = mle_state(&table.counts[0], &settings, &confusion, &MleOptions::default()).unwrap().state;
        prop_assert!((est.trace() - C64::new(1.0, 0.0)).norm() <= 1e-8);
        let herm = (est + est.adjoint()) * C64::new(0.5, 0.0);
        prop_assert!(herm.symmetric_eigenvalues().min() >= -1e-8);
    }

    #[test]
    fn amplitude_damping_fidelity_matches_closed_form(gamma in 0.0f64..0.9) {
        let inputs: Vec<Matrix2<C64>> =
            Preparation::ALL.iter().map(|p| { let d = p.density(); Matrix2::from_fn(|i, j| d[(i, j)]) }).collect();
        let outputs: Vec<Matrix3<C64>> = inputs.iter().map(|r| embed(&amplitude_damping(gamma, r))).collect();
        let est = process_matrix(&inputs, &outputs).unwrap();
        let f = process_fidelity(&est.chi, &ProcessMatrix::identity()).unwrap();
        let expected = ((1.0 + (1.0 - gamma).sqrt()) / 2.0).powi(2);
        prop_assert!((f - expected).abs() < 1e-9, "{} vs {}", f, expected);
        let oracle = amplitude_damping_chi(gamma).unwrap();
        prop_assert!((est.chi.entries() - oracle.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-9);
    }

    #[test]
    fn wigner_time_marginal_matches_intensity(a in -1.0f64..1.0, b in -1.0f64..1.0, sigma_ns in 30.0f64..60.0) {
        prop_assume!(a.abs() + b.abs() > 0.1);
        let grid = TimeGrid::symmetric(16.0 * sigma_ns * 1e-9, 5e-9).unwrap();
        let hg = hermite_gaussian_basis(2, 0.0, sigma_ns * 1e-9, &grid).unwrap();
        let samples: Vec<C64> = hg.modes()[0].samples().iter().zip(hg.modes()[1].samples())
            .map(|(x, y)| x * a + y * C64::new(0.0, b)).collect();
        let w = SampledWaveform::new_unchecked(grid, samples, WaveformKind::FieldRecord).unwrap().normalized().unwrap();
        let wg = wigner(&w).unwrap();
        let tm = wg.time_marginal();
        let peak = w.samples().iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
        for (m, s) in tm.iter().zip(w.samples()) {
            prop_assert!((m - s.norm_sqr()).abs() <= 1e-4 * peak);
        }
    }

    #[test]
    fn mode_counts_are_monotone(
        t1 in 0.2f64..20.0, dt in 0.0f64..10.0,
        b1 in 0.5f64..150.0, db in 0.0f64..50.0,
    ) {
        let budget = |t: f64, b: f64| ResourceBudget {
            t_window: t * 1e-6, bandwidth: b * MHZ, kappa_min: 0.008 * MHZ, kappa_max: 8.0 * MHZ,
        };
        let f = footprints();
        for scheme in [Scheme::Temporal, Scheme::TimeBin, Scheme::FrequencyBin, Scheme::Combined] {
            let base = mode_count(f, scheme, &budget(t1, b1), 64).unwrap().n;
            prop_assert!(mode_count(f, scheme, &budget(t1 + dt, b1), 64).unwrap().n >= base);
            prop_assert!(mode_count(f, scheme, &budget(t1, b1 + db), 64).unwrap().n >= base);
        }
    }
}
