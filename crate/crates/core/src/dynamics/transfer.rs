// SPDX-License-Identifier: Apache-2.0

//! Release, mode-selective absorption and re-capture experiments on a common
//! sech-mode basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coherence::{first_order_coherence, rejected_waveform, CoherenceOptions, FirstOrderCoherence};
use super::hilbert::{pure_state, DensityMatrix, HilbertLayout, Subsystem};
use super::model::{MasterEquation, TransferSetup};
use super::params::{DeviceParams, ModelOptions};
use super::solver::{evolve, EvolveOptions, SimulationRecord};
use crate::error::{Error, Result};
use crate::grid::{SampledWaveform, TimeGrid, WaveformKind};
use crate::modebasis::{default_grid_with_spacing, overlap, sech_basis, ModeBasis};
use crate::pulsesynth::{
    absorbing_coupling, receiver_coupling, shape_infidelity, source_coupling, time_reverse_waveform, CouplingEnvelope,
    CouplingRole,
    DriveOptions,
};

/// Baseline output energy below which an absorption efficiency is undefined.
pub const MIN_BASELINE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    /// Photon linewidth, rad/s.
    pub kappa_ph: f64,
    /// Number of basis modes prepared.
    pub n_modes: usize,
    /// Waveform sample spacing; the integrator steps twice this.
    pub dt: f64,
    pub receiver: DeviceParams,
    pub model: ModelOptions,
    pub drive: DriveOptions,
    pub evolve: EvolveOptions,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            kappa_ph: 2.0 * PI * 5e6,
            n_modes: 4,
            dt: 0.25e-9,
            receiver: DeviceParams::receiver(),
            model: ModelOptions::default(),
            drive: DriveOptions::default(),
            evolve: EvolveOptions::default(),
        }
    }
}

/// Receiver drive: absorb mode `mode` with delay offset `delta_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverDrive {
    pub mode: usize,
    pub delta_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayPoint {
    pub delta_t: f64,
    /// Simulated absorption efficiency.
    pub efficiency: f64,
    /// `|⟨ξ_m, ξ_n(-t + Δt)⟩|²` between the released mode and the drive target.
    pub predicted: f64,
}

/// Sink-cavity state after a re-capture run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaptureResult {
    pub input: [C64; 2],
    pub sink_state: DMatrix<C64>,
    pub fidelity: f64,
}

/// Mode basis, grid and device model shared by a family of runs.
#[derive(Debug, Clone)]
pub struct TransferModel {
    pub config: TransferConfig,
    pub grid: TimeGrid,
    pub basis: ModeBasis,
}

fn source_state(amplitudes: [C64; 2]) -> Result<DMatrix<C64>> {
    pure_state(&amplitudes)
}

impl TransferModel {
    pub fn new(config: TransferConfig) -> Result<Self> {
        if config.n_modes == 0 {
            return Err(Error::param("n_modes must be positive"));
        }
        config.receiver.validate()?;
        config.model.validate()?;
        config.drive.validate()?;
        let grid = default_grid_with_spacing(config.kappa_ph, config.n_modes - 1, config.dt)?;
        let basis = sech_basis(config.n_modes, config.kappa_ph, &grid)?;
        Ok(Self { config, grid, basis })
    }

    pub fn mode(&self, m: usize) -> Result<&SampledWaveform> {
        self.basis
            .mode(m)
            .ok_or_else(|| Error::param(format!("mode {m} outside a basis of {}", self.basis.len())))
    }

    /// Subsystem holding the absorbed excitation (the `b̂` role).
    pub fn storage_subsystem(&self) -> Subsystem {
        match self.config.model.roles {
            super::params::RoleAssignment::AsPrinted => Subsystem::Transmon,
            super::params::RoleAssignment::TextLabels => Subsystem::Resonator,
        }
    }

    pub fn source_envelope(&self, m: usize) -> Result<CouplingEnvelope> {
        source_coupling(self.mode(m)?, self.config.receiver.kappa_f, &self.config.drive)
    }

    pub fn receiver_envelope(&self, drive: ReceiverDrive) -> Result<CouplingEnvelope> {
        receiver_coupling(self.mode(drive.mode)?, self.config.receiver.kappa_f, drive.delta_t, &self.config.drive)
    }

    fn setup(&self, m: usize, drive: Option<ReceiverDrive>, with_sink: bool) -> Result<TransferSetup> {
        let layout = HilbertLayout::transfer(self.config.model.n_fock, with_sink)?;
        let mut setup = TransferSetup::new(self.grid, layout, self.config.receiver, self.config.model)
            .with_source(self.source_envelope(m)?);
        if let Some(d) = drive {
            setup = setup.with_receiver(self.receiver_envelope(d)?);
        }
        Ok(setup)
    }

    fn initial(&self, layout: &HilbertLayout, input: [C64; 2]) -> Result<DensityMatrix> {
        DensityMatrix::product(layout, &[(Subsystem::SourceCavity, source_state(input)?)])
    }

    /// Single photon in mode `m` crossing the receiver; drive off when `drive` is `None`.
    pub fn run(&self, m: usize, drive: Option<ReceiverDrive>, input: [C64; 2]) -> Result<SimulationRecord> {
        let setup = self.setup(m, drive, false)?;
        let eq = MasterEquation::build(&setup)?;
        let label = match drive {
            Some(d) => format!("m{m}_n{}_dt{:.3e}", d.mode, d.delta_t),
            None => format!("m{m}_baseline"),
        };
        evolve(&self.initial(&setup.layout, input)?, &eq, &self.config.evolve, &label)
    }

    /// Virtual-cavity release of mode `m` straight into the line, no receiver.
    pub fn emit(&self, m: usize, input: [C64; 2]) -> Result<SimulationRecord> {
        let layout = HilbertLayout::source_only();
        let setup = TransferSetup::new(self.grid, layout, self.config.receiver, self.config.model)
            .with_source(self.source_envelope(m)?);
        let eq = MasterEquation::build(&setup)?;
        evolve(&self.initial(&setup.layout, input)?, &eq, &self.config.evolve, &format!("m{m}_emit"))
    }

    /// Emitted energy and shape fidelity `|⟨ξ_m, field⟩|²` of a released photon.
    pub fn emission_round_trip(&self, m: usize) -> Result<(f64, f64)> {
        let energy = self.emit(m, ONE_PHOTON)?.output_energy();
        let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let record = self.emit(m, [amp, amp])?;
        let field: Vec<C64> = record.field_mean.iter().map(|f| f / (amp * amp)).collect();
        let field = SampledWaveform::new_unchecked(record.record_grid, field, WaveformKind::FieldRecord)?;
        let target = self.mode(m)?.decimated(2)?;
        Ok((energy, 1.0 - shape_infidelity(&field, &target)?))
    }

    pub fn baseline(&self, m: usize) -> Result<SimulationRecord> {
        self.run(m, None, ONE_PHOTON)
    }

    /// `R = 1 - E_out / E_baseline` for a released mode `m` and a drive on `n`.
    pub fn absorption_efficiency(&self, m: usize, drive: ReceiverDrive) -> Result<f64> {
        let base = self.baseline(m)?;
        let with = self.run(m, Some(drive), ONE_PHOTON)?;
        absorption_efficiency(&with, &base)
    }

    /// `|I′|²` between released mode `m` and the drive's target waveform.
    pub fn predicted_overlap_sq(&self, m: usize, drive: ReceiverDrive) -> Result<f64> {
        Ok(predicted_overlap(self.mode(m)?, self.mode(drive.mode)?, drive.delta_t)?.norm_sqr())
    }

    /// Efficiency and predicted overlap over a list of delay offsets.
    pub fn sweep_delay(&self, m: usize, n: usize, delays: &[f64]) -> Result<Vec<DelayPoint>> {
        let base = self.baseline(m)?.output_energy();
        delays
            .par_iter()
            .map(|&delta_t| {
                let drive = ReceiverDrive { mode: n, delta_t };
                let out = self.run(m, Some(drive), ONE_PHOTON)?.output_energy();
                Ok(DelayPoint {
                    delta_t,
                    efficiency: efficiency_from_energies(out, base)?,
                    predicted: self.predicted_overlap_sq(m, drive)?,
                })
            })
            .collect()
    }

    /// Delay offset maximising matched absorption of mode `n`: a coarse sweep
    /// followed by a sample-level refinement.
    pub fn optimal_delay(&self, n: usize, coarse: &[f64]) -> Result<DelayPoint> {
        let best = |pts: Vec<DelayPoint>| {
            pts.into_iter()
                .max_by(|a, b| a.efficiency.partial_cmp(&b.efficiency).unwrap())
                .ok_or_else(|| Error::param("empty delay list"))
        };
        let first = best(self.sweep_delay(n, n, coarse)?)?;
        let h = self.grid.dt();
        let fine: Vec<f64> = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0].iter().map(|k| first.delta_t + k * h).collect();
        let second = best(self.sweep_delay(n, n, &fine)?)?;
        Ok(if second.efficiency > first.efficiency { second } else { first })
    }

    /// Evolves with snapshots and returns the field coherence of the output.
    pub fn coherence(
        &self,
        m: usize,
        drive: Option<ReceiverDrive>,
        opts: &CoherenceOptions,
    ) -> Result<(SimulationRecord, FirstOrderCoherence)> {
        let setup = self.setup(m, drive, false)?;
        let eq = MasterEquation::build(&setup)?;
        let evolve_opts = EvolveOptions { snapshot_stride: opts.decimation, ..self.config.evolve };
        let record = evolve(&self.initial(&setup.layout, ONE_PHOTON)?, &eq, &evolve_opts, "coherence")?;
        let g1 = first_order_coherence(&eq, &record, opts)?;
        Ok((record, g1))
    }

    /// Sink coupling that captures mode `m` as it leaves an undriven
    /// receiver, calibrated on a superposition input so the reflection phase
    /// and delay are included.
    pub fn sink_envelope(&self, m: usize) -> Result<CouplingEnvelope> {
        let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let record = self.run(m, None, [amp, amp])?;
        let scale = 1.0 / (amp.conj() * amp);
        let field: Vec<C64> = record.field_mean.iter().map(|f| f * scale).collect();
        let field = upsample_midpoints(&field, &self.grid)?;
        let target = field.scaled(C64::new(-1.0, 0.0));
        absorbing_coupling(&target, self.config.receiver.kappa_f, CouplingRole::VirtualCavitySink, &self.config.drive)
    }

    /// Sends each input qubit state of the source cavity through the receiver
    /// and captures the output in a sink tuned to the undisturbed mode `m`.
    pub fn capture(&self, m: usize, drive: Option<ReceiverDrive>, inputs: &[[C64; 2]]) -> Result<Vec<CaptureResult>> {
        let sink = self.sink_envelope(m)?;
        let mut setup = self.setup(m, drive, true)?;
        setup = setup.with_sink(sink);
        let eq = MasterEquation::build(&setup)?;
        inputs
            .par_iter()
            .map(|&input| {
                let norm = (input[0].norm_sqr() + input[1].norm_sqr()).sqrt();
                if !(norm > 0.0) {
                    return Err(Error::param("input state has zero norm"));
                }
                let input = [input[0] / norm, input[1] / norm];
                let record = evolve(&self.initial(&setup.layout, input)?, &eq, &self.config.evolve, "capture")?;
                let sink_state = record.final_state.reduced(Subsystem::SinkCavity)?;
                Ok(CaptureResult { input, fidelity: state_fidelity(&sink_state, &input), sink_state })
            })
            .collect()
    }

    /// Mean capture fidelity over the six cardinal qubit states.
    pub fn capture_fidelity(&self, m: usize, drive: Option<ReceiverDrive>) -> Result<f64> {
        let results = self.capture(m, drive, &cardinal_states())?;
        Ok(results.iter().map(|r| r.fidelity).sum::<f64>() / results.len() as f64)
    }

    /// Field rejected by a receiver driven on `drive`, from the dominant
    /// coherence mode.
    pub fn rejected(&self, m: usize, drive: ReceiverDrive, opts: &CoherenceOptions) -> Result<RejectedField> {
        let (_, g1) = self.coherence(m, Some(drive), opts)?;
        let waveform = rejected_waveform(&g1)?;
        Ok(RejectedField { occupation: g1.occupations[0], total: g1.total_occupation(), waveform })
    }
}

const ONE_PHOTON: [C64; 2] = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedField {
    /// Occupation of the dominant mode.
    pub occupation: f64,
    /// Sum of all coherence occupations.
    pub total: f64,
    /// Dominant mode scaled by `√occupation`.
    pub waveform: SampledWaveform,
}

/// `R = 1 - E_res / E_base` from a driven run and its receiver-off baseline.
pub fn absorption_efficiency(residual: &SimulationRecord, baseline: &SimulationRecord) -> Result<f64> {
    efficiency_from_energies(residual.output_energy(), baseline.output_energy())
}

fn efficiency_from_energies(output_energy: f64, baseline_energy: f64) -> Result<f64> {
    if !(baseline_energy >= MIN_BASELINE) {
        return Err(Error::BaselineTooSmall(baseline_energy));
    }
    Ok(1.0 - output_energy / baseline_energy)
}

/// `I′ = ⟨released, target(-t + Δt)⟩`.
pub fn predicted_overlap(released: &SampledWaveform, target: &SampledWaveform, delta_t: f64) -> Result<C64> {
    let reversed = time_reverse_waveform(target, delta_t)?;
    overlap(released, &reversed)
}

/// Pairwise `|I|²` of rejected waveforms, each normalised first.
pub fn rejected_orthogonality(rejected: &[SampledWaveform]) -> Result<DMatrix<f64>> {
    let unit: Vec<SampledWaveform> = rejected.iter().map(|w| w.normalized()).collect::<Result<_>>()?;
    let n = unit.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = if i == j { 1.0 } else { overlap(&unit[i], &unit[j])?.norm_sqr() };
        }
    }
    Ok(out)
}

/// `⟨ψ|ρ|ψ⟩` for a qubit state vector.
pub fn state_fidelity(rho: &DMatrix<C64>, psi: &[C64; 2]) -> f64 {
    let mut f = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            f += psi[i].conj() * rho[(i, j)] * psi[j];
        }
    }
    f.re
}

/// `|0⟩, |1⟩, |0⟩±|1⟩, |0⟩±i|1⟩`, normalised.
pub fn cardinal_states() -> Vec<[C64; 2]> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let o = C64::new(0.0, 0.0);
    let r = C64::new(h, 0.0);
    let i = C64::new(0.0, h);
    vec![[C64::new(1.0, 0.0), o], [o, C64::new(1.0, 0.0)], [r, r], [r, -r], [r, i], [r, -i]]
}

/// Lifts samples on a grid of twice the spacing back onto `grid` with
/// four-point midpoint interpolation.
fn upsample_midpoints(coarse: &[C64], grid: &TimeGrid) -> Result<SampledWaveform> {
    let n = grid.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let nc = coarse.len();
    for (s, &c) in coarse.iter().enumerate() {
        if 2 * s < n {
            out[2 * s] = c;
        }
    }
    for s in 0..nc.saturating_sub(1) {
        let k = 2 * s + 1;
        if k >= n {
            break;
        }
        out[k] = if s >= 1 && s + 2 < nc {
            (coarse[s] * 9.0 + coarse[s + 1] * 9.0 - coarse[s - 1] - coarse[s + 2]) / 16.0
        } else {
            (coarse[s] + coarse[s + 1]) * 0.5
        };
    }
    SampledWaveform::new_unchecked(*grid, out, WaveformKind::FieldRecord)
}
