// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tempomux::dynamics::{DeviceParams, ReceiverDrive, TransferConfig, TransferModel};
use tempomux::modebasis::{default_grid, sech_basis};
use tempomux::tfplan::wigner;
use tempomux::TimeGrid;

const KAPPA: f64 = 2.0 * PI * 5e6;

fn basis(c: &mut Criterion) {
    let grid = default_grid(KAPPA, 7).unwrap();
    c.bench_function("sech_basis_8_modes", |b| b.iter(|| sech_basis(8, black_box(KAPPA), &grid).unwrap()));
}

fn transfer(c: &mut Criterion) {
    let cfg = TransferConfig { receiver: DeviceParams::receiver().without_decoherence(), ..Default::default() };
    let model = TransferModel::new(cfg).unwrap();
    let mut group = c.benchmark_group("transfer");
    group.sample_size(10);
    group.bench_function("matched_absorption_m0", |b| {
        b.iter(|| model.absorption_efficiency(0, ReceiverDrive { mode: 0, delta_t: 2e-9 }).unwrap())
    });
    group.finish();
}

fn wigner_grid(c: &mut Criterion) {
    let grid = TimeGrid::symmetric(60.0 / KAPPA, 5e-9).unwrap();
    let mode = sech_basis(4, KAPPA, &grid).unwrap().into_modes().swap_remove(3);
    c.bench_function("wigner_sech_3", |b| b.iter(|| wigner(black_box(&mode)).unwrap()));
}

criterion_group!(benches, basis, transfer, wigner_grid);
criterion_main!(benches);
