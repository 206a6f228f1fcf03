// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as C64;
use tempomux::dynamics::hilbert::pure_state;
use tempomux::dynamics::*;
use tempomux::modebasis::overlap;
use tempomux::SampledWaveform;
use tempomux::pulsesynth::{receiver_coupling, source_coupling, DriveOptions};

fn ideal_config() -> TransferConfig {
    TransferConfig { receiver: DeviceParams::receiver().without_decoherence(), ..Default::default() }
}

fn ideal() -> TransferModel {
    TransferModel::new(ideal_config()).unwrap()
}

fn delays(from_ns: i32, to_ns: i32) -> Vec<f64> {
    (from_ns..=to_ns).map(|k| k as f64 * 1e-9).collect()
}

// Sub-sample optimum of a uniformly spaced sweep from a parabola through the best three points.
fn parabolic_optimum(points: &[DelayPoint]) -> f64 {
    let k = (1..points.len() - 1)
        .max_by(|&a, &b| points[a].efficiency.partial_cmp(&points[b].efficiency).unwrap())
        .unwrap();
    let (a, b, c) = (points[k - 1].efficiency, points[k].efficiency, points[k + 1].efficiency);
    let h = points[1].delta_t - points[0].delta_t;
    points[k].delta_t + 0.5 * h * (a - c) / (a - 2.0 * b + c)
}

// Local maxima of |v(t)| reaching at least half the global maximum.
fn prominent_peaks(w: &SampledWaveform) -> usize {
    let mag: Vec<f64> = w.samples().iter().map(|s| s.norm()).collect();
    let top = mag.iter().cloned().fold(0.0, f64::max);
    mag.windows(3).filter(|v| v[1] > v[0] && v[1] >= v[2] && v[1] >= 0.5 * top).count()
}

#[test]
fn vacuum_without_drives_is_stationary() {
    let model = ideal();
    let layout = HilbertLayout::transfer(3, false).unwrap();
    let setup = TransferSetup::new(model.grid, layout.clone(), model.config.receiver, model.config.model);
    let eq = MasterEquation::build(&setup).unwrap();
    let rho0 = DensityMatrix::vacuum(&layout);
    let rec = evolve(&rho0, &eq, &EvolveOptions::default(), "vacuum").unwrap();
    assert!((rec.final_state.entries() - rho0.entries()).norm() < 1e-14);
    assert!(rec.i_out.iter().all(|&i| i.abs() < 1e-14));
}

#[test]
fn released_photon_reproduces_mode() {
    let model = ideal();
    for m in 0..4 {
        let (energy, shape) = model.emission_round_trip(m).unwrap();
        assert!((energy - 1.0).abs() < 1e-3, "m = {m}: energy {energy}");
        assert!(shape >= 1.0 - 1e-4, "m = {m}: |I|² {shape}");
    }
}

#[test]
fn matched_absorption_leaves_little_residual() {
    let model = ideal();
    let best = model.optimal_delay(0, &delays(-4, 8)).unwrap();
    assert!(best.efficiency >= 0.99);
    let drive = ReceiverDrive { mode: 0, delta_t: best.delta_t };
    let residual = model.run(0, Some(drive), [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    assert!(residual.output_energy() <= 0.01);
}

#[test]
fn undriven_receiver_absorbs_nothing() {
    let model = ideal();
    let base = model.baseline(1).unwrap();
    assert_eq!(absorption_efficiency(&base, &base).unwrap(), 0.0);
}

#[test]
fn predicted_overlap_examples() {
    let model = ideal();
    let m0 = model.mode(0).unwrap();
    let m1 = model.mode(1).unwrap();
    assert!(predicted_overlap(m0, m0, 0.0).unwrap().norm_sqr() >= 0.999);
    assert!(predicted_overlap(m0, m1, 0.0).unwrap().norm_sqr() <= 1e-6);
}

#[test]
fn delay_response_is_unimodal_and_vanishes_far_away() {
    let model = ideal();
    let pts = model.sweep_delay(0, 0, &delays(-40, 40).into_iter().step_by(4).collect::<Vec<_>>()).unwrap();
    let peak = (0..pts.len()).max_by(|&a, &b| pts[a].efficiency.partial_cmp(&pts[b].efficiency).unwrap()).unwrap();
    assert!(pts[peak].efficiency >= 0.99);
    for w in pts[..=peak].windows(2) {
        assert!(w[1].efficiency >= w[0].efficiency - 1e-9);
    }
    for w in pts[peak..].windows(2) {
        assert!(w[1].efficiency <= w[0].efficiency + 1e-9);
    }
    // Ten pulse widths away there is no temporal overlap.
    let far = model.sweep_delay(0, 0, &[400e-9]).unwrap()[0].efficiency;
    assert!(far.abs() < 1e-3, "{far}");
}

#[test]
fn optimal_delay_moves_with_truncation_floor() {
    let fine: Vec<f64> = (-8..=24).map(|k| k as f64 * 0.25e-9).collect();
    let optimum = |floor: f64| {
        let cfg = TransferConfig { drive: DriveOptions { floor, ..Default::default() }, ..ideal_config() };
        parabolic_optimum(&TransferModel::new(cfg).unwrap().sweep_delay(0, 0, &fine).unwrap())
    };
    let shift = optimum(1e-4) - optimum(1e-6);
    assert!(shift.abs() > 0.02e-9, "shift {shift}");
}

#[test]
fn absorption_tracks_predicted_overlap() {
    let model = ideal();
    let best = model.optimal_delay(3, &delays(-4, 8)).unwrap();
    for m in 0..4 {
        let p = model.sweep_delay(m, 3, &[best.delta_t]).unwrap()[0];
        assert!((p.efficiency - p.predicted).abs() <= 0.02, "m = {m}: {p:?}");
    }
}

#[test]
fn excitation_is_conserved_without_dissipation() {
    let mut cfg = ideal_config();
    cfg.receiver.alpha = 0.0;
    let model = TransferModel::new(cfg).unwrap();
    let rec = model.run(1, Some(ReceiverDrive { mode: 1, delta_t: 2e-9 }), [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    // Without decoherence the only sink of excitation is the output line.
    let retained = &rec.excitation;
    let dt = rec.record_grid.dt();
    let mut emitted = 0.0;
    for s in 0..retained.len() {
        if s > 0 {
            emitted += 0.5 * dt * (rec.i_out[s] + rec.i_out[s - 1]);
        }
        assert!((retained[s] + emitted - 1.0).abs() < 1e-3, "s = {s}");
    }
    assert!(rec.dissipated.last().unwrap().abs() < 1e-6);
}

#[test]
fn energy_budget_closes_with_decoherence_and_loss() {
    let cfg = TransferConfig { receiver: DeviceParams::receiver().with_loss(0.33), ..Default::default() };
    let model = TransferModel::new(cfg).unwrap();
    let rec = model.run(2, Some(ReceiverDrive { mode: 2, delta_t: 2e-9 }), [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    assert!(rec.energy_budget_error().abs() < 1e-3, "{}", rec.energy_budget_error());
    assert!(rec.max_trace_error < 1e-6);
    assert!(rec.min_eigenvalue >= -1e-8);
}

#[test]
fn global_phase_leaves_absorption_unchanged() {
    let model = ideal();
    let phase = C64::from_polar(1.0, 0.7);
    let kappa_f = model.config.receiver.kappa_f;
    let opts = model.config.drive;
    let efficiency = |rot: C64| {
        let mut rec = Vec::new();
        for drive in [false, true] {
            let layout = HilbertLayout::transfer(3, false).unwrap();
            let mut setup = TransferSetup::new(model.grid, layout.clone(), model.config.receiver, model.config.model)
                .with_source(source_coupling(&model.mode(2).unwrap().scaled(rot), kappa_f, &opts).unwrap());
            if drive {
                setup = setup.with_receiver(receiver_coupling(&model.mode(1).unwrap().scaled(rot), kappa_f, 2e-9, &opts).unwrap());
            }
            let eq = MasterEquation::build(&setup).unwrap();
            let rho0 = DensityMatrix::product(&layout, &[(Subsystem::SourceCavity, pure_state(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap())]).unwrap();
            rec.push(evolve(&rho0, &eq, &EvolveOptions::default(), "phase").unwrap());
        }
        absorption_efficiency(&rec[1], &rec[0]).unwrap()
    };
    let plain = efficiency(C64::new(1.0, 0.0));
    let rotated = efficiency(phase);
    assert!((plain - rotated).abs() < 1e-10, "{plain} vs {rotated}");
}

#[test]
fn fock_cutoff_is_converged() {
    let drive = ReceiverDrive { mode: 0, delta_t: 2e-9 };
    let r = |n_fock: usize| {
        let mut cfg = TransferConfig::default();
        cfg.model.n_fock = n_fock;
        TransferModel::new(cfg).unwrap().absorption_efficiency(1, drive).unwrap()
    };
    assert!((r(3) - r(4)).abs() < 1e-6);
}

#[test]
fn vacuum_input_is_captured_trivially() {
    let model = ideal();
    let out = model.capture(3, Some(ReceiverDrive { mode: 0, delta_t: 2e-9 }), &[[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]).unwrap();
    assert!((out[0].fidelity - 1.0).abs() < 1e-9);
}

#[test]
fn undriven_receiver_passes_the_photon_to_the_sink() {
    let model = ideal();
    let f = model.capture_fidelity(2, None).unwrap();
    assert!(f > 0.999, "{f}");
}

#[test]
fn undriven_receiver_output_is_a_pure_mode() {
    let model = ideal();
    let opts = CoherenceOptions::default();
    let (_, g1) = model.coherence(1, None, &opts).unwrap();
    assert!((g1.occupations[0] - 1.0).abs() < 1e-3);
    assert!(g1.occupations[1..].iter().all(|&n| n.abs() <= 1e-3));
    let rejected = rejected_waveform(&g1).unwrap();
    let emitted = model.mode(1).unwrap().decimated(2 * opts.decimation).unwrap();
    let o = overlap(&rejected.normalized().unwrap(), &emitted).unwrap().norm_sqr();
    assert!(o > 0.99, "{o}");
}

#[test]
fn rejected_shapes_depend_on_order() {
    let model = ideal();
    let opts = CoherenceOptions::default();
    let stride = 2 * opts.decimation;

    let low = model.rejected(0, ReceiverDrive { mode: 3, delta_t: 2e-9 }, &opts).unwrap();
    let xi0 = model.mode(0).unwrap().decimated(stride).unwrap();
    let o = overlap(&low.waveform.normalized().unwrap(), &xi0).unwrap().norm_sqr();
    assert!(o >= 0.95, "{o}");

    // A receiver driven on mode 0 merges the first two lobes of ξ_3.
    let high = model.rejected(3, ReceiverDrive { mode: 0, delta_t: 2e-9 }, &opts).unwrap();
    let xi3 = model.mode(3).unwrap().decimated(stride).unwrap();
    let (a, b) = (prominent_peaks(&high.waveform), prominent_peaks(&xi3));
    assert_eq!(b, 4);
    assert!(a < b, "{a} vs {b}");
}
