// SPDX-License-Identifier: Apache-2.0

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use tempomux::dynamics::{DeviceParams, TransferConfig, TransferModel};
use tempomux::tomography::*;

fn test_state() -> Matrix3<C64> {
    let psi = [C64::new(0.8, 0.0), C64::new(0.36, 0.3), C64::new(0.1, -0.2)];
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pure = Matrix3::from_fn(|i, j| psi[i] * psi[j].conj() / (norm * norm));
    pure * C64::new(0.9, 0.0) + Matrix3::identity() * C64::new(0.1 / 3.0, 0.0)
}

#[test]
fn reconstruction_error_shrinks_with_shots() {
    let rho = test_state();
    let settings = measurement_settings();
    let confusion = Confusion::ideal();
    let mean_error = |shots: u64| {
        (0..10u64)
            .map(|seed| {
                let t = simulate_counts(&[rho], &[Preparation::Ground], &settings, &confusion, shots, seed).unwrap();
                let est = mle_state(&t.counts[0], &settings, &confusion, &MleOptions::default()).unwrap().state;
                (est - rho).norm()
            })
            .sum::<f64>()
            / 10.0
    };
    let errors: Vec<f64> = [1_000, 10_000, 100_000].iter().map(|&s| mean_error(s)).collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    // 1/√shots predicts a factor of 10 over two decades.
    let ratio = errors[0] / errors[2];
    assert!((5.0..20.0).contains(&ratio), "{ratio}");
}

#[test]
fn decohered_transfer_beats_classical_threshold() {
    let model = TransferModel::new(TransferConfig { receiver: DeviceParams::receiver(), ..Default::default() }).unwrap();
    let states = simulate_receiver_states(&model, 1, 2e-9).unwrap();
    let report = reconstruct_process(&states, None, &Confusion::ideal(), &MleOptions::default()).unwrap();
    assert!(report.fidelity > 0.5, "{}", report.fidelity);
    assert!(report.chi.min_eigenvalue() >= -1e-8);
}

#[test]
fn counts_feed_the_process_pipeline() {
    let model = TransferModel::new(TransferConfig { receiver: DeviceParams::receiver().without_decoherence(), ..Default::default() }).unwrap();
    let states = simulate_receiver_states(&model, 0, 2e-9).unwrap();
    let counts = simulate_tomography_counts(&states, 20_000, 7, &Confusion::ideal()).unwrap();
    let again = simulate_tomography_counts(&states, 20_000, 7, &Confusion::ideal()).unwrap();
    assert_eq!(counts.counts, again.counts);
    let report = reconstruct_process(&states, Some(&counts), &Confusion::ideal(), &MleOptions::default()).unwrap();
    assert!(report.fidelity > 0.98, "{}", report.fidelity);
    assert_eq!(report.reconstructed.len(), 6);
}
