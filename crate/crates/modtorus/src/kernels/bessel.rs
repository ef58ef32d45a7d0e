//! Bessel functions `J0` and `J1` in double precision.
//!
//! Two regimes, switching at `x = 8`:
//!
//! * `x < 8`: the Maclaurin series with compensated term accumulation. The
//!   largest intermediate terms near the switch point are ~4e2, so the
//!   worst-case rounding is a few 1e-13 absolute, inside the 1e-12 contract.
//! * `x >= 8`: phase-amplitude form
//!   `sqrt(2/(pi x)) [P(x) cos(phase) - Q(x) sin(phase)]` with
//!   `phase = x - pi/4` (`J0`) or `x - 3pi/4` (`J1`). The amplitude `P` and
//!   scaled phase-correction `x·Q` are Chebyshev expansions in `u = 64/x²`
//!   over `[0, 1]`; the coefficients below were generated from 40-digit
//!   reference values at 30 Chebyshev nodes and truncated at 18 terms, where
//!   the fit error is below 6e-17 across `x ∈ [8, 1e8]`.
//!
//! Tests compare both branches against frozen high-precision references.

use crate::{Error, Result};

/// Chebyshev coefficients (first coefficient halved at evaluation) of the
/// asymptotic amplitude `P0(x)` as a function of `u = 64/x²` on `[0, 1]`.
const CHEB_P0: [f64; 18] = [
    1.9989206986950373307,
    -0.00053652204681321174247,
    3.0751847875194746219e-6,
    -5.1705945376060977010e-8,
    1.6306464635151383095e-9,
    -7.8640913772370699990e-11,
    5.1682623873491924622e-12,
    -4.3045788699253912224e-13,
    4.3265957431549405642e-14,
    -5.0690340959352360775e-15,
    6.7480722157338737040e-16,
    -1.0011513723467785833e-16,
    1.6305919233744184716e-17,
    -2.8808661694828711555e-18,
    5.4680827832590372722e-19,
    -1.1062036496829690508e-19,
    2.3694957934720688488e-20,
    -5.3442156878444808897e-21,
];

/// Chebyshev coefficients of `x·Q0(x)` in `u = 64/x²`; limit value `-1/8`.
const CHEB_Q0X: [f64; 18] = [
    -0.24889367368539214559,
    0.00054708159540893196795,
    -5.9315987288485178116e-6,
    1.4377965798375193428e-7,
    -5.8175327494930559835e-9,
    3.3760975237349907551e-10,
    -2.5653979367973077957e-11,
    2.4049161002813650490e-12,
    -2.6690625482579415976e-13,
    3.4041800321963688986e-14,
    -4.8799441053120400078e-15,
    7.7297031762426053886e-16,
    -1.3348852171502517003e-16,
    2.4865952389390514611e-17,
    -4.9528926298865139420e-18,
    1.0473158973776050203e-18,
    -2.3369301722113101718e-19,
    5.4745819157079201003e-20,
];

/// Chebyshev coefficients of `P1(x)` in `u = 64/x²`.
const CHEB_P1: [f64; 18] = [
    2.0018060817200273998,
    0.00089898983308594085557,
    -3.9872843004889085228e-6,
    6.1776339606442985349e-8,
    -1.8718907491063066087e-9,
    8.8168986595823388985e-11,
    -5.7048636403956447019e-12,
    4.6991955152305423752e-13,
    -4.6842237839904892216e-14,
    5.4526748960447171683e-15,
    -7.2211808422740179188e-16,
    1.0667689114335412456e-16,
    -1.7312313216116334953e-17,
    3.0492991197665871784e-18,
    -5.7724216549874525322e-19,
    1.1650571755711463699e-19,
    -2.4904268041400819234e-20,
    5.6066532164779838734e-21,
];

/// Chebyshev coefficients of `x·Q1(x)` in `u = 64/x²`; limit value `3/8`.
const CHEB_Q1X: [f64; 18] = [
    0.74844459311256520385,
    -0.00077021788393256634594,
    7.3108922063643632996e-6,
    -1.6767825107266737968e-7,
    6.5833546621204433032e-9,
    -3.7490909505415561844e-10,
    2.8121750359748864681e-11,
    -2.6114525394623199408e-12,
    2.8774212663332233544e-13,
    -3.6490019160618377554e-14,
    5.2066263662267071630e-15,
    -8.2153180254585942891e-16,
    1.4141084390211833244e-16,
    -2.6267615898385290803e-17,
    5.2192649196714061885e-18,
    -1.1012617187879542102e-18,
    2.4525932320261966972e-19,
    -5.7356747754694659884e-20,
];

const SERIES_SWITCH: f64 = 8.0;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Clenshaw evaluation of a Chebyshev series on `u ∈ [0, 1]`.
#[inline]
fn clenshaw(coeffs: &[f64], u: f64) -> f64 {
    let x = 2.0 * u - 1.0;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs[1..].iter().rev() {
        let t = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = t;
    }
    x * b1 - b2 + 0.5 * coeffs[0]
}

fn j0_series(x: f64) -> f64 {
    let v = 0.25 * x * x;
    let mut acc = crate::numeric::CompensatedSum::new();
    let mut term = 1.0f64;
    acc.add(term);
    let mut k = 1.0f64;
    loop {
        term *= -v / (k * k);
        acc.add(term);
        if term.abs() < 1e-19 && k * k > v {
            break;
        }
        k += 1.0;
    }
    acc.value()
}

fn j1_series(x: f64) -> f64 {
    let v = 0.25 * x * x;
    let mut acc = crate::numeric::CompensatedSum::new();
    let mut term = 0.5 * x;
    acc.add(term);
    let mut k = 1.0f64;
    loop {
        term *= -v / (k * (k + 1.0));
        acc.add(term);
        if term.abs() < 1e-19 && k * (k + 1.0) > v {
            break;
        }
        k += 1.0;
    }
    acc.value()
}

/// `J0(x)` for finite `x >= 0`; no argument checking.
pub(crate) fn j0_raw(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        return j0_series(x);
    }
    let u = 64.0 / (x * x);
    let p = clenshaw(&CHEB_P0, u);
    let qx = clenshaw(&CHEB_Q0X, u);
    let (s, c) = x.sin_cos();
    // cos(x - pi/4), sin(x - pi/4)
    let cos_ph = (c + s) * FRAC_1_SQRT_2;
    let sin_ph = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_ph - (qx / x) * sin_ph)
}

/// `J1(x)` for finite `x >= 0`; no argument checking.
pub(crate) fn j1_raw(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        return j1_series(x);
    }
    let u = 64.0 / (x * x);
    let p = clenshaw(&CHEB_P1, u);
    let qx = clenshaw(&CHEB_Q1X, u);
    let (s, c) = x.sin_cos();
    // cos(x - 3pi/4), sin(x - 3pi/4)
    let cos_ph = (s - c) * FRAC_1_SQRT_2;
    let sin_ph = -(s + c) * FRAC_1_SQRT_2;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_ph - (qx / x) * sin_ph)
}

fn check_arg(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument must be finite and nonnegative, got {x}"
        )));
    }
    Ok(x)
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    Ok(j0_raw(check_arg(x)?))
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> Result<f64> {
    Ok(j1_raw(check_arg(x)?))
}

/// Envelope constants relied on by tail bounds, validated on a grid:
/// `|J1(x)| <= min(x/2, 1/sqrt(x))` and `x·J1(x)² <= 0.7`.
pub const J1_SQUARED_ENVELOPE: f64 = 0.7;

/// Grid self-check of the `J1` envelope with an arbitrary evaluator
/// (the indirection lets tests inject a corrupted evaluator).
pub fn j1_envelope_holds_for(eval: impl Fn(f64) -> f64) -> bool {
    let lo: f64 = 1e-4;
    let hi: f64 = 1e6;
    let n = 2000usize;
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    for i in 0..n {
        let x = lo * ((i as f64) * ratio).exp();
        let j = eval(x);
        let env = (0.5 * x).min(1.0 / x.sqrt());
        if j.abs() > env || x * j * j > J1_SQUARED_ENVELOPE {
            return false;
        }
    }
    true
}

/// Grid self-check of the `J1` envelope for the shipped evaluator.
pub fn j1_envelope_holds() -> bool {
    j1_envelope_holds_for(j1_raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 40-digit arithmetic.
    const J0_REFS: [(f64, f64); 15] = [
        (0.0, 1.0),
        (1e-8, 0.999999999999999975),
        (0.001, 0.9999997500000156),
        (0.5, 0.9384698072408129),
        (1.0, 0.7651976865579666),
        (2.0, 0.22389077914123567),
        (2.404825557695773, -1.2011950073676861e-16),
        (5.4, -0.04121010124499131),
        (7.9, 0.19436184484127832),
        (8.0, 0.17165080713755391),
        (8.1, 0.14751745404437758),
        (12.5, 0.1468840547004211),
        (100.0, 0.019985850304223122),
        (12345.6789, 3.704950529619395e-5),
        (1e8, 3.2060295340412076e-5),
    ];

    const J1_REFS: [(f64, f64); 15] = [
        (0.0, 0.0),
        (1e-8, 4.99999999999999994e-9),
        (0.001, 0.0004999999375000026),
        (0.5, 0.24226845767487388),
        (1.0, 0.44005058574493352),
        (2.0, 0.5767248077568734),
        (3.8317059702, 3.0256556972000165e-12),
        (3.831705970207512, 1.2711667947257163e-16),
        (5.4, -0.34534479077958633),
        (7.9, 0.21917939992175114),
        (8.0, 0.23463634685391462),
        (8.1, 0.24760776698159292),
        (25.0, -0.1253502495802899),
        (1e6, -0.0007259683568137630),
        (1e8, 7.306391181551855e-5),
    ];

    #[test]
    fn j0_matches_references() {
        for &(x, want) in J0_REFS.iter() {
            let got = bessel_j0(x).unwrap();
            let tol = 1e-12 * want.abs().max(1.0);
            assert!(
                (got - want).abs() <= tol,
                "J0({x}): got {got}, want {want}, err {:.2e}",
                (got - want).abs()
            );
        }
    }

    #[test]
    fn j1_matches_references() {
        for &(x, want) in J1_REFS.iter() {
            let got = bessel_j1(x).unwrap();
            let tol = 1e-12 * want.abs().max(1.0);
            assert!(
                (got - want).abs() <= tol,
                "J1({x}): got {got}, want {want}, err {:.2e}",
                (got - want).abs()
            );
        }
    }

    #[test]
    fn first_zeros_within_tolerance() {
        assert!(bessel_j0(2.404825557695773).unwrap().abs() < 1e-10);
        assert!(bessel_j1(3.8317059702).unwrap().abs() < 1e-10);
    }

    #[test]
    fn branch_switch_is_continuous() {
        // Series just below 8 and asymptotic just above agree through the refs;
        // also check directly around the seam.
        let below = j0_raw(7.999999999);
        let above = j0_raw(8.000000001);
        assert!((below - above).abs() < 1e-8);
        let below = j1_raw(7.999999999);
        let above = j1_raw(8.000000001);
        assert!((below - above).abs() < 1e-8);
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(bessel_j0(-1.0).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j1(f64::INFINITY).is_err());
    }

    #[test]
    fn envelope_grid_check() {
        assert!(j1_envelope_holds());
    }

    #[test]
    fn envelope_rejects_corrupted_evaluator() {
        assert!(!j1_envelope_holds_for(|x| j1_raw(x) + 0.05));
    }
}
