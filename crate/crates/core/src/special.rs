// SPDX-License-Identifier: Apache-2.0

//! Special functions needed by the sech-family normalisation constants.

/// Dirichlet eta function at a non-negative even integer.
///
/// `eta(0)` is the Abel-summed value 1/2. For `s >= 2` the alternating series
/// is summed with Cohen–Villegas–Zagier acceleration.
pub fn dirichlet_eta_even(s: u32) -> f64 {
    assert!(s % 2 == 0, "dirichlet_eta_even expects an even argument");
    if s == 0 {
        return 0.5;
    }
    let n = 40;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        c = b - c;
        sum += c / ((k + 1) as f64).powi(s as i32);
        let kf = k as f64;
        let nf = n as f64;
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// Riemann zeta at a non-negative even integer.
///
/// `zeta_even(0) = -1/2`; this value is hard-coded because the generic
/// `eta / (1 - 2^(1-s))` route is 0/0-adjacent there.
pub fn zeta_even(s: u32) -> f64 {
    assert!(s % 2 == 0, "zeta_even expects an even argument");
    if s == 0 {
        return -0.5;
    }
    dirichlet_eta_even(s) / (1.0 - 2f64.powi(1 - s as i32))
}

/// `n!` as a float. Exact up to 22!, correctly rounded well beyond.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
