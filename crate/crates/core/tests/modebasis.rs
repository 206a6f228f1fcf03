// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use tempomux::modebasis::{
    bin_basis, default_grid, io, sech_basis, sech_mode_analytic, sech_raw, gram_schmidt, BinScheme, BIN_OVERLAP_LIMIT,
};
use tempomux::{BasisFamily, TimeGrid};

const KAPPA: f64 = 2.0 * PI * 5e6;

#[test]
fn refining_the_grid_leaves_overlaps_unchanged() {
    let coarse = default_grid(KAPPA, 7).unwrap();
    let fine = coarse.refined();
    let a = sech_basis(8, KAPPA, &coarse).unwrap().overlap_matrix().unwrap();
    let b = sech_basis(8, KAPPA, &fine).unwrap().overlap_matrix().unwrap();
    let diff = (a.entries() - b.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn analytic_modes_agree_with_numeric_construction() {
    let grid = default_grid(KAPPA, 3).unwrap();
    let raw: Vec<_> = (0..4).map(|m| sech_raw(m, KAPPA, &grid).unwrap()).collect();
    let numeric = gram_schmidt(&raw, BasisFamily::SechOrthogonal, KAPPA).unwrap();
    for m in 0..4 {
        let analytic = sech_mode_analytic(m, KAPPA, &grid).unwrap();
        let peak = analytic.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
        let worst = analytic
            .samples()
            .iter()
            .zip(numeric.modes()[m].samples())
            .map(|(a, b)| (a - b).norm().min((a + b).norm()))
            .fold(0.0, f64::max)
            / peak;
        assert!(worst < 1e-6, "m = {m}: {worst}");
    }
}

#[test]
fn basis_survives_a_file_round_trip() {
    let grid = default_grid(KAPPA, 4).unwrap();
    let basis = sech_basis(5, KAPPA, &grid).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("modes.csv");
    let mut file = std::fs::File::create(&path).unwrap();
    io::write_basis(&mut file, &basis).unwrap();
    drop(file);
    let back = io::read_basis(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back.len(), 5);
    assert!(back.overlap_matrix().unwrap().max_off_diagonal_sq() <= 1e-10);
}

#[test]
fn bins_at_certified_spacing_are_nearly_orthogonal() {
    let grid = TimeGrid::symmetric(3e-6, 0.5e-9).unwrap();
    for scheme in [BinScheme::TimeBin, BinScheme::FrequencyBin] {
        let spacing = tempomux::modebasis::min_bin_spacing(scheme, KAPPA);
        let basis = bin_basis(scheme, 4, KAPPA, spacing, &grid).unwrap();
        let worst = basis.overlap_matrix().unwrap().max_off_diagonal_sq();
        assert!(worst <= BIN_OVERLAP_LIMIT, "{scheme:?}: {worst}");
    }
}
