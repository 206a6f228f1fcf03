// SPDX-License-Identifier: Apache-2.0

//! Operator assembly for the cascaded source → receiver → sink network.
//!
//! The propagating field is the sum of the cascade channel amplitudes
//! `L_0 = λ_s ĉ + √κ_f â + λ_v ĉ_v`. Cascading adds
//! `(1/2i)(L_j† L_i - L_i† L_j)` for every channel `i` upstream of `j`, which
//! together with the anti-Hermitian part of `L_0† L_0` leaves
//! `-i λ_j* λ_i A_j† A_i` in the effective Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::hilbert::{diagonal, lowering, projector, HilbertLayout, Subsystem};
use super::params::{DeviceParams, F0g1Normalization, ModelOptions, RoleAssignment};
use super::sparse::{OpSum, SparseOp};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::pulsesynth::CouplingEnvelope;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Inputs of one transfer simulation.
#[derive(Debug, Clone)]
pub struct TransferSetup {
    pub grid: TimeGrid,
    pub layout: HilbertLayout,
    /// Receiver node parameters; `loss` attenuates the source channel.
    pub params: DeviceParams,
    pub options: ModelOptions,
    /// Virtual source cavity coupling (`VirtualCavitySource`).
    pub source: Option<CouplingEnvelope>,
    /// f0g1 drive of the receiver (`F0g1Receiver`).
    pub receiver: Option<CouplingEnvelope>,
    /// Virtual sink cavity coupling (`VirtualCavitySink`).
    pub sink: Option<CouplingEnvelope>,
}

impl TransferSetup {
    pub fn new(grid: TimeGrid, layout: HilbertLayout, params: DeviceParams, options: ModelOptions) -> Self {
        Self { grid, layout, params, options, source: None, receiver: None, sink: None }
    }

    pub fn with_source(mut self, env: CouplingEnvelope) -> Self {
        self.source = Some(env);
        self
    }

    pub fn with_receiver(mut self, env: CouplingEnvelope) -> Self {
        self.receiver = Some(env);
        self
    }

    pub fn with_sink(mut self, env: CouplingEnvelope) -> Self {
        self.sink = Some(env);
        self
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.options.validate()?;
        for env in [&self.source, &self.receiver, &self.sink].into_iter().flatten() {
            self.grid.ensure_matches(&env.grid)?;
        }
        if self.sink.is_some() && !self.layout.contains(Subsystem::SinkCavity) {
            return Err(Error::param("sink coupling given but the layout has no sink cavity"));
        }
        if self.receiver.is_some() && !self.layout.contains(Subsystem::Transmon) {
            return Err(Error::param("receiver drive given but the layout has no transmon"));
        }
        if let Some(d) = self.layout.dim_of(Subsystem::Resonator) {
            if d != self.options.n_fock {
                return Err(Error::DimensionMismatch { expected: self.options.n_fock, found: d });
            }
        }
        Ok(())
    }

    fn has_receiver_node(&self) -> bool {
        self.layout.contains(Subsystem::Transmon) && self.layout.contains(Subsystem::Resonator)
    }

    /// Subsystems acting as `â` (line-coupled) and `b̂` under the role assignment.
    pub fn role_subsystems(&self) -> (Subsystem, Subsystem) {
        match self.options.roles {
            RoleAssignment::AsPrinted => (Subsystem::Resonator, Subsystem::Transmon),
            RoleAssignment::TextLabels => (Subsystem::Transmon, Subsystem::Resonator),
        }
    }

    /// Weight of each subsystem's number operator in the conserved excitation count.
    pub fn excitation_weight(&self, s: Subsystem) -> f64 {
        if self.has_receiver_node() && s == self.role_subsystems().1 {
            0.5
        } else {
            1.0
        }
    }
}

/// Time-dependent scalar attached to an operator.
#[derive(Debug, Clone)]
pub enum Coeff {
    Const(C64),
    Samples(Vec<C64>),
}

impl Coeff {
    #[inline]
    pub fn at(&self, k: usize) -> C64 {
        match self {
            Coeff::Const(c) => *c,
            Coeff::Samples(v) => v[k],
        }
    }
}

/// `Σ_k c_k(t) A_k` evaluated on grid samples.
#[derive(Debug, Clone)]
pub struct TimeDependentOp {
    sum: OpSum,
    coeffs: Vec<Coeff>,
}

impl TimeDependentOp {
    pub fn new(dim: usize, terms: Vec<(SparseOp, Coeff)>) -> Result<Self> {
        let (ops, coeffs): (Vec<_>, Vec<_>) = terms.into_iter().unzip();
        Ok(Self { sum: OpSum::new(dim, &ops)?, coeffs })
    }

    pub fn empty(&self) -> SparseOp {
        self.sum.empty()
    }

    /// True when some coefficient switches between zero and non-zero within
    /// samples `from..=to` (a drive turning on or off between samples).
    pub fn switches(&self, from: usize, to: usize) -> bool {
        self.coeffs.iter().any(|c| match c {
            Coeff::Const(_) => false,
            Coeff::Samples(v) => {
                let zero = v[from] == C64::new(0.0, 0.0);
                v[from + 1..=to].iter().any(|x| (*x == C64::new(0.0, 0.0)) != zero)
            }
        })
    }

    pub fn assemble_into(&self, k: usize, scratch: &mut Vec<C64>, out: &mut SparseOp) {
        scratch.clear();
        scratch.extend(self.coeffs.iter().map(|c| c.at(k)));
        self.sum.assemble_into(scratch, out);
    }

    pub fn at(&self, k: usize) -> SparseOp {
        let mut out = self.empty();
        let mut scratch = Vec::new();
        self.assemble_into(k, &mut scratch, &mut out);
        out
    }
}

/// A collapse operator and the excitation it removes per jump.
#[derive(Debug, Clone)]
pub struct Jump {
    pub op: TimeDependentOp,
    pub excitation: f64,
    pub label: &'static str,
}

/// Compiled generator `dX/dt = M X + X M† + Σ L X L†` with `M = -i H_eff`.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    pub layout: HilbertLayout,
    pub grid: TimeGrid,
    /// `-i H_eff`.
    pub generator: TimeDependentOp,
    /// Hermitian Hamiltonian (diagnostics only).
    pub hamiltonian: TimeDependentOp,
    /// Field operator reaching the detector.
    pub field: TimeDependentOp,
    /// All collapse operators, the field first.
    pub jumps: Vec<Jump>,
    /// Conserved excitation operator.
    pub excitation: SparseOp,
}

fn envelope_amplitude(env: &Option<CouplingEnvelope>, n: usize) -> Option<Vec<C64>> {
    env.as_ref().map(|e| {
        let a = e.collapse_amplitude();
        debug_assert_eq!(a.len(), n);
        a
    })
}

impl MasterEquation {
    pub fn build(setup: &TransferSetup) -> Result<Self> {
        setup.validate()?;
        let layout = &setup.layout;
        let dim = layout.dim();
        let n = setup.grid.len();
        let p = &setup.params;

        // Cascade channels in propagation order: (operator, amplitude).
        let mut channels: Vec<(SparseOp, Coeff)> = Vec::new();
        let mut loss_channel: Option<(SparseOp, Coeff)> = None;
        let mut h_terms: Vec<(SparseOp, Coeff)> = Vec::new();
        let mut decay: Vec<(SparseOp, f64, &'static str, f64)> = Vec::new();

        if let Some(lambda) = envelope_amplitude(&setup.source, n) {
            let c = SparseOp::embed(layout, Subsystem::SourceCavity, &lowering(2))?;
            let t = (1.0 - p.loss).sqrt();
            channels.push((c.clone(), Coeff::Samples(lambda.iter().map(|l| l * t).collect())));
            if p.loss > 0.0 {
                let s = p.loss.sqrt();
                loss_channel = Some((c, Coeff::Samples(lambda.iter().map(|l| l * s).collect())));
            }
        }

        let mut excitation = SparseOp::zeros(dim);
        for (&s, &d) in layout.subsystems().iter().zip(layout.dims()) {
            let w = setup.excitation_weight(s);
            let num = SparseOp::embed(layout, s, &diagonal(d, |k| k as f64 * w))?;
            excitation = excitation.add(&num);
        }

        if setup.has_receiver_node() {
            let (sa, sb) = setup.role_subsystems();
            let da = layout.dim_of(sa).unwrap();
            let db = layout.dim_of(sb).unwrap();
            let a = SparseOp::embed(layout, sa, &lowering(da))?;
            let b = SparseOp::embed(layout, sb, &lowering(db))?;
            let ad = a.adjoint();
            let bd = b.adjoint();
            let nb = bd.mul(&b);
            let na = ad.mul(&a);
            let mut h_static = nb.scale(C64::new(-p.alpha / 2.0, 0.0));
            h_static = h_static.add(&bd.mul(&bd).mul(&b).mul(&b).scale(C64::new(p.alpha / 2.0, 0.0)));
            h_static = h_static.add(&ad.mul(&ad).mul(&a).mul(&a).scale(C64::new(p.kerr / 2.0, 0.0)));
            h_static = h_static.add(&na.mul(&nb).scale(C64::new(2.0 * p.chi, 0.0)));
            h_terms.push((h_static, Coeff::Const(C64::new(1.0, 0.0))));

            if let Some(drive) = &setup.receiver {
                let scale = match setup.options.f0g1_normalization {
                    F0g1Normalization::Transition => 1.0 / 2f64.sqrt(),
                    F0g1Normalization::AsPrinted => 1.0,
                };
                let x = bd.mul(&bd).mul(&a);
                let xd = x.adjoint();
                h_terms.push((x, Coeff::Samples(drive.g.iter().map(|g| g * scale).collect())));
                h_terms.push((xd, Coeff::Samples(drive.g.iter().map(|g| g.conj() * scale).collect())));
            }

            channels.push((a, Coeff::Const(C64::new(p.kappa_f.sqrt(), 0.0))));

            let transmon_w = setup.excitation_weight(Subsystem::Transmon);
            let q = |i, j| SparseOp::embed(layout, Subsystem::Transmon, &projector(3, i, j));
            if let Some(t1) = p.t1_ge {
                decay.push((q(0, 1)?, (1.0 / t1).sqrt(), "transmon_ge_decay", transmon_w));
            }
            if let Some(t1) = p.t1_ef {
                decay.push((q(1, 2)?, (1.0 / t1).sqrt(), "transmon_ef_decay", transmon_w));
            }
            if let Some(gamma_phi) = p.pure_dephasing_rate()? {
                if gamma_phi > 0.0 {
                    // g–e coherence decays at γ_φ, g–f at 2γ_φ.
                    let levels = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                        C64::new(0.0, 0.0),
                        C64::new(1.0, 0.0),
                        C64::new(2f64.sqrt(), 0.0),
                    ]));
                    let op = SparseOp::embed(layout, Subsystem::Transmon, &levels)?;
                    decay.push((op, (2.0 * gamma_phi).sqrt(), "transmon_dephasing", 0.0));
                }
            }
        }

        if let Some(lambda) = envelope_amplitude(&setup.sink, n) {
            let v = SparseOp::embed(layout, Subsystem::SinkCavity, &lowering(2))?;
            channels.push((v, Coeff::Samples(lambda)));
        }

        // Effective Hamiltonian contributions of the cascade and the jumps.
        let mut gen_terms: Vec<(SparseOp, Coeff)> = h_terms
            .iter()
            .map(|(op, c)| (op.clone(), scale_coeff(c, -I, n)))
            .collect();
        let mut all_jumps: Vec<(SparseOp, Coeff)> = channels.clone();
        if let Some(l) = &loss_channel {
            all_jumps.push(l.clone());
        }
        for (op, rate, _, _) in &decay {
            all_jumps.push((op.clone(), Coeff::Const(C64::new(*rate, 0.0))));
        }
        for (op, c) in &all_jumps {
            let coeff = map_coeff(c, n, |x| C64::new(-0.5 * x.norm_sqr(), 0.0));
            gen_terms.push((op.adjoint().mul(op), coeff));
        }
        for j in 0..channels.len() {
            for i in 0..j {
                let (ai, ci) = &channels[i];
                let (aj, cj) = &channels[j];
                let op = aj.adjoint().mul(ai);
                let coeff = combine(cj, ci, n, |lj, li| -(lj.conj() * li));
                gen_terms.push((op, coeff));
            }
        }
        // Hermitian cascade part, for diagnostics.
        let mut ham_terms = h_terms.clone();
        for j in 0..channels.len() {
            for i in 0..j {
                let (ai, ci) = &channels[i];
                let (aj, cj) = &channels[j];
                let fwd = aj.adjoint().mul(ai);
                let bwd = ai.adjoint().mul(aj);
                ham_terms.push((fwd, combine(cj, ci, n, |lj, li| -0.5 * I * lj.conj() * li)));
                ham_terms.push((bwd, combine(cj, ci, n, |lj, li| 0.5 * I * li.conj() * lj)));
            }
        }
        if ham_terms.is_empty() {
            ham_terms.push((SparseOp::zeros(dim), Coeff::Const(ZERO)));
        }
        if gen_terms.is_empty() {
            gen_terms.push((SparseOp::zeros(dim), Coeff::Const(ZERO)));
        }

        let field = if channels.is_empty() {
            TimeDependentOp::new(dim, vec![(SparseOp::zeros(dim), Coeff::Const(ZERO))])?
        } else {
            TimeDependentOp::new(dim, channels.clone())?
        };
        let mut jumps = vec![Jump { op: field.clone(), excitation: 1.0, label: "field" }];
        if let Some(l) = loss_channel {
            jumps.push(Jump { op: TimeDependentOp::new(dim, vec![l])?, excitation: 1.0, label: "propagation_loss" });
        }
        for (op, rate, label, w) in decay {
            jumps.push(Jump {
                op: TimeDependentOp::new(dim, vec![(op, Coeff::Const(C64::new(rate, 0.0)))])?,
                excitation: w,
                label,
            });
        }

        Ok(Self {
            layout: layout.clone(),
            grid: setup.grid,
            generator: TimeDependentOp::new(dim, gen_terms)?,
            hamiltonian: TimeDependentOp::new(dim, ham_terms)?,
            field,
            jumps,
            excitation,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Hermitian Hamiltonian at grid sample `k`.
    pub fn hamiltonian_at(&self, k: usize) -> DMatrix<C64> {
        self.hamiltonian.at(k).to_dense()
    }
}

fn scale_coeff(c: &Coeff, s: C64, _n: usize) -> Coeff {
    match c {
        Coeff::Const(x) => Coeff::Const(x * s),
        Coeff::Samples(v) => Coeff::Samples(v.iter().map(|x| x * s).collect()),
    }
}

fn map_coeff(c: &Coeff, _n: usize, f: impl Fn(C64) -> C64) -> Coeff {
    match c {
        Coeff::Const(x) => Coeff::Const(f(*x)),
        Coeff::Samples(v) => Coeff::Samples(v.iter().map(|x| f(*x)).collect()),
    }
}

fn combine(a: &Coeff, b: &Coeff, n: usize, f: impl Fn(C64, C64) -> C64) -> Coeff {
    match (a, b) {
        (Coeff::Const(x), Coeff::Const(y)) => Coeff::Const(f(*x, *y)),
        _ => Coeff::Samples((0..n).map(|k| f(a.at(k), b.at(k))).collect()),
    }
}

/// Hermitian Hamiltonian of the network at grid sample `k`.
pub fn build_hamiltonian(setup: &TransferSetup, k: usize) -> Result<DMatrix<C64>> {
    if k >= setup.grid.len() {
        return Err(Error::param(format!("sample {k} outside the grid")));
    }
    Ok(MasterEquation::build(setup)?.hamiltonian_at(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsesynth::CouplingRole;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.0, 1e-9, 11).unwrap()
    }

    fn envelope(role: CouplingRole, phase: f64) -> CouplingEnvelope {
        let g = grid();
        let samples = (0..g.len()).map(|k| C64::from_polar(1e7 * (1.0 + k as f64), phase + 0.1 * k as f64)).collect();
        CouplingEnvelope { grid: g, g: samples, role, kappa_f: 2.0 * std::f64::consts::PI * 164e6 }
    }

    fn full_setup(options: ModelOptions) -> TransferSetup {
        let params = DeviceParams::receiver().with_loss(0.1);
        let mut p = params;
        p.kerr = 1e6;
        p.chi = 3e6;
        TransferSetup::new(grid(), HilbertLayout::transfer(options.n_fock, true).unwrap(), p, options)
            .with_source(envelope(CouplingRole::VirtualCavitySource, 0.3))
            .with_receiver(envelope(CouplingRole::F0g1Receiver, -0.7))
            .with_sink(envelope(CouplingRole::VirtualCavitySink, 1.1))
    }

    fn all_options() -> Vec<ModelOptions> {
        let mut out = Vec::new();
        for roles in [RoleAssignment::AsPrinted, RoleAssignment::TextLabels] {
            for f0g1_normalization in [F0g1Normalization::Transition, F0g1Normalization::AsPrinted] {
                out.push(ModelOptions { roles, f0g1_normalization, n_fock: 3 });
            }
        }
        out
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        for opts in all_options() {
            let setup = full_setup(opts);
            for k in [0, 5, 10] {
                let h = build_hamiltonian(&setup, k).unwrap();
                assert!((&h - h.adjoint()).norm() < 1e-9 * h.norm().max(1.0));
            }
        }
    }

    #[test]
    fn hamiltonian_conserves_excitations() {
        for opts in all_options() {
            let setup = full_setup(opts);
            let eq = MasterEquation::build(&setup).unwrap();
            let n = eq.excitation.to_dense();
            for k in [0, 7] {
                let h = eq.hamiltonian_at(k);
                let comm = &h * &n - &n * &h;
                assert!(comm.norm() < 1e-9 * h.norm(), "{opts:?}");
            }
        }
    }

    #[test]
    fn undriven_source_has_zero_generator() {
        let g = grid();
        let setup = TransferSetup::new(g, HilbertLayout::source_only(), DeviceParams::ideal(1e9, 0.0), ModelOptions::default())
            .with_source(CouplingEnvelope::off(g, CouplingRole::VirtualCavitySource, 1e9));
        let eq = MasterEquation::build(&setup).unwrap();
        for k in 0..g.len() {
            assert!(eq.generator.at(k).to_dense().norm() == 0.0);
            assert!(eq.hamiltonian_at(k).norm() == 0.0);
        }
    }

    #[test]
    fn vacuum_is_annihilated_by_every_jump() {
        let setup = full_setup(ModelOptions::default());
        let eq = MasterEquation::build(&setup).unwrap();
        let dim = eq.dim();
        for jump in &eq.jumps {
            let op = jump.op.at(3).to_dense();
            assert!(op.column(0).norm() == 0.0, "{}", jump.label);
        }
        // -iH_eff maps the vacuum to zero as well.
        let m = eq.generator.at(3).to_dense();
        assert!(m.column(0).norm() < 1e-12 * m.norm());
        assert_eq!(dim, 2 * 3 * 3 * 2);
    }

    #[test]
    fn sink_requires_sink_layout() {
        let g = grid();
        let setup = TransferSetup::new(g, HilbertLayout::transfer(3, false).unwrap(), DeviceParams::receiver(), ModelOptions::default())
            .with_sink(envelope(CouplingRole::VirtualCavitySink, 0.0));
        assert!(MasterEquation::build(&setup).is_err());
    }
}
