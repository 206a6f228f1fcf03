// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use tempomux::modebasis::{hermite_gaussian_basis, overlap, sech_basis};
use tempomux::tfplan::*;
use tempomux::TimeGrid;

#[test]
fn moyal_identity_across_families() {
    let kappa = 2.0 * PI * 1e6;
    let grid = TimeGrid::symmetric(5e-6, 5e-9).unwrap();
    let mut modes = sech_basis(4, kappa, &grid).unwrap().into_modes();
    modes.extend(hermite_gaussian_basis(4, 0.0, 250e-9, &grid).unwrap().into_modes());
    let wigners: Vec<WignerGrid> = modes.iter().map(|m| wigner(m).unwrap()).collect();
    for i in 0..modes.len() {
        for j in 0..modes.len() {
            let direct = overlap(&modes[i], &modes[j]).unwrap().norm_sqr();
            let phase_space = wigner_overlap(&wigners[i], &wigners[j]).unwrap();
            assert!((direct - phase_space).abs() <= 1e-3, "({i},{j}): {direct} vs {phase_space}");
        }
    }
}

#[test]
fn time_bins_grow_linearly_with_window() {
    let f = ModeFootprints::sech(21).unwrap();
    let kappa = 2.0 * PI * 1e6;
    let spacing = f.time_bin_spacing / kappa;
    let n = |t: f64| f.count_at(Scheme::TimeBin, kappa, t, 1e12) as f64;
    let t0 = 20e-6;
    for k in 1..10 {
        let t = t0 + k as f64 * 5e-6;
        let predicted = n(t0) + (t - t0) / spacing;
        assert!((n(t) - predicted).abs() <= 1.0);
    }
}

#[test]
fn capacity_map_writes_one_row_per_cell() {
    let f = ModeFootprints::sech(10).unwrap();
    let ts = [1e-6, 5e-6, 20e-6];
    let bs = [1e6, 20e6];
    let map = capacity_map(&f, &ts, &bs, 2.0 * PI * 1e4, 2.0 * PI * 8e6, 32).unwrap();
    assert_eq!(map.len(), 6);
    let mut out = Vec::new();
    write_capacity_csv(&mut out, &map, 1e-6, 1e6).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 7);
}
