// SPDX-License-Identifier: Apache-2.0

//! Time–frequency analysis of mode families and capacity planning.

mod capacity;
mod wigner;

pub use capacity::{
    capacity_map, energy_bandwidth, energy_window, mode_count, write_capacity_csv, CapacityPoint, ModeCount,
    ModeFootprints, ResourceBudget, Scheme, DEFAULT_KAPPA_SCAN, ENERGY_FRACTION,
};
pub use wigner::{spectral_density, wigner, wigner_overlap, write_wigner, WignerGrid, ALIASING_LIMIT};
