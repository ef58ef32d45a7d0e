//! Variance of `μ(B_R(x))` over uniformly random centers, by three
//! independent routes.
//!
//! * geometric: the defining integral collapses to pair geometry:
//!   `Var = (1/n²) Σ_{i,j} lens(dist(p_i, p_j), R) − vol²`, with the diagonal
//!   contributing `vol/n`. Exact up to floating error for `R < 1/4`.
//! * spectral: `(R²/φ²) Σ_{mode ≠ 0} J1(2πR‖mode‖)²/‖mode‖² · S(m,n;q)²`
//!   with a certified tail from the Weil bound and the `J1` envelope.
//! * Monte Carlo: direct sampling of the defining integral.

use rayon::prelude::*;

use crate::arith::Modulus;
use crate::expsum::KloostermanTable;
use crate::kernels::bessel::J1_SQUARED_ENVELOPE;
use crate::kernels::{self, bessel};
use crate::numeric::CompensatedSum;
use crate::torusgeo::{lens_area, rng, toroidal_distance, BallSpec, PointSet, TorusPoint};
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMethod {
    Geometric,
    Spectral,
    Montecarlo,
    RandomBaseline,
}

/// One variance computation with its certified accuracy.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VarianceReport {
    /// Provenance of the point set (`s_q(q)`, `random(n, seed)`).
    pub label: String,
    /// The modulus when the set is `S_q`.
    pub q: Option<u64>,
    pub radius: f64,
    pub method: VarianceMethod,
    pub value: f64,
    pub certified_error: f64,
    pub diagonal_part: f64,
    pub offdiagonal_part: f64,
    /// Measured, not part of the deterministic report payload.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

fn label_of(ps: &PointSet) -> (String, Option<u64>) {
    let q = match ps.label() {
        crate::torusgeo::SetLabel::SQ { q } => Some(*q),
        _ => None,
    };
    (ps.label().to_string(), q)
}

/// Exact pair-geometry variance for `R < 1/4`.
pub fn variance_geometric(ps: &PointSet, radius: f64) -> Result<VarianceReport> {
    let start = std::time::Instant::now();
    if ps.is_empty() {
        return Err(Error::InvalidArgument("variance of an empty set".into()));
    }
    if !(0.0 < radius && radius < 0.25) {
        return Err(Error::UnsupportedRadius(format!(
            "geometric variance needs R in (0, 1/4), got {radius}; use the spectral method"
        )));
    }
    let n = ps.len() as f64;
    let vol = PI * radius * radius;
    let diagonal = vol / n;
    // Ordered pairs i != j at distance < 2R, found through the grid.
    let per_point: Vec<f64> = (0..ps.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = CompensatedSum::new();
            let pi = ps.points()[i];
            for j in ps.indices_within(pi, 2.0 * radius) {
                if j as usize == i {
                    continue;
                }
                let d = toroidal_distance(pi, ps.points()[j as usize]);
                acc.add(lens_area(d, radius).expect("radius validated"));
            }
            acc.value()
        })
        .collect();
    let mut off = CompensatedSum::new();
    for v in per_point {
        off.add(v);
    }
    let offdiagonal = off.value() / (n * n);
    let value = diagonal + offdiagonal - vol * vol;
    // Each lens evaluation is accurate to a few ulps; the certified error
    // budget charges 1e-13 of the summed magnitudes.
    let certified = 1e-13 * (diagonal + offdiagonal + vol * vol);
    let (label, q) = label_of(ps);
    Ok(VarianceReport {
        label,
        q,
        radius,
        method: VarianceMethod::Geometric,
        value,
        certified_error: certified,
        diagonal_part: diagonal,
        offdiagonal_part: offdiagonal,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// What the squared Kloosterman factor in the spectral sum is driven by.
pub enum SpectralWeights<'a> {
    /// The real table `S(m mod q, n mod q; q)²`.
    Kloosterman(&'a KloostermanTable),
    /// Test hook: replaces `S²` by `φ(q)`, isolating the Parseval diagonal
    /// `vol/φ − vol²/φ`.
    DiagonalOnly,
}

/// Spectral variance with a certified truncation tail.
pub fn variance_spectral(modulus: &Modulus, radius: f64, epsilon: f64) -> Result<VarianceReport> {
    let table = KloostermanTable::build(modulus)?;
    variance_spectral_with(SpectralWeights::Kloosterman(&table), modulus, radius, epsilon)
}

/// Weil-driven certified tail of the spectral sum beyond cutoff `t`:
/// `S² ≤ τ²·gcd(m,n,q)·q` with `gcd = Σ_{d | gcd} φ(d)`, the envelope
/// `J1(x)² ≤ 0.7/x`, and the lattice-to-integral comparison per class `d|q`.
fn weil_tail(modulus: &Modulus, radius: f64, t: f64) -> f64 {
    let q = modulus.q() as f64;
    let phi = modulus.phi() as f64;
    let tau = modulus.tau() as f64;
    let mut divisors: Vec<u64> = vec![1];
    for &(p, e) in modulus.factors() {
        let mut next = Vec::new();
        for &d in &divisors {
            let mut pk = 1u64;
            for _ in 0..=e {
                next.push(d * pk);
                pk = pk.saturating_mul(p);
                if pk > modulus.q() {
                    break;
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        divisors = next;
    }
    let prefactor = J1_SQUARED_ENVELOPE * radius * tau * tau * q / (2.0 * PI * phi * phi);
    let mut tail = 0.0;
    for &d in &divisors {
        if d > modulus.q() || modulus.q() % d != 0 {
            continue;
        }
        let phi_d = Modulus::new(d).expect("divisor is positive").phi() as f64;
        let df = d as f64;
        tail += prefactor * phi_d / (df * df * df) * kernels::lattice_norm3_tail(t / df);
    }
    tail
}

/// As [`variance_spectral`], with caller-controlled weights (test hook).
pub fn variance_spectral_with(
    weights: SpectralWeights<'_>,
    modulus: &Modulus,
    radius: f64,
    epsilon: f64,
) -> Result<VarianceReport> {
    let start = std::time::Instant::now();
    if !(0.0 < radius && radius < 0.5) {
        return Err(Error::UnsupportedRadius(format!(
            "spectral variance needs R in (0, 1/2), got {radius}"
        )));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let q = modulus.q();
    let phi = modulus.phi() as f64;
    let vol = PI * radius * radius;
    let diagonal = (vol - vol * vol) / phi;

    let report = |value: f64, certified: f64| {
        VarianceReport {
            label: format!("s_q({q})"),
            q: Some(q),
            radius,
            method: VarianceMethod::Spectral,
            value,
            certified_error: certified,
            diagonal_part: diagonal,
            offdiagonal_part: value - diagonal,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    };

    match weights {
        SpectralWeights::DiagonalOnly => {
            // S² → φ collapses the sum to (R²/φ)·Σ J1²/r², which completes to
            // (vol − vol²)/φ through the exact radial tail.
            let (t, margin) = kernels::hard_squared_cutoff(radius, epsilon * phi)?;
            let mass = kernels::hard_squared_partial_sum(radius, t)
                + kernels::hard_squared_tail_integral(radius, t as f64);
            Ok(report(mass / phi, margin / phi))
        }
        SpectralWeights::Kloosterman(table) => {
            if table.modulus().q() != q {
                return Err(Error::InvalidArgument(
                    "table modulus does not match".into(),
                ));
            }
            // Smallest cutoff with Weil tail below ε·0.9 (the remainder of
            // the budget absorbs floating error).
            let mut t = 64u64;
            while weil_tail(modulus, radius, t as f64) >= 0.9 * epsilon {
                t *= 2;
                if t > 1 << 22 {
                    return Err(Error::ResourceLimit(format!(
                        "spectral cutoff for q={q}, R={radius}, eps={epsilon} too large"
                    )));
                }
            }
            let mut lo = t / 2;
            while t - lo > 1 && lo >= 64 {
                let mid = lo + (t - lo) / 2;
                if weil_tail(modulus, radius, mid as f64) < 0.9 * epsilon {
                    t = mid;
                } else {
                    lo = mid;
                }
            }
            let tail = weil_tail(modulus, radius, t as f64);

            // Half-plane enumeration: (m, n) and (-m, -n) carry equal terms.
            let t_i = t as i64;
            let t2 = t_i * t_i;
            let scale = radius * radius / (phi * phi);
            let rows: Vec<f64> = (0..=t_i)
                .into_par_iter()
                .map(|m| {
                    let mut acc = CompensatedSum::new();
                    let n_max = ((t2 - m * m) as f64).sqrt().floor() as i64;
                    let n_lo = if m == 0 { 1 } else { -n_max };
                    for n in n_lo..=n_max {
                        if m == 0 && n == 0 {
                            continue;
                        }
                        let r2 = (m * m + n * n) as f64;
                        let r = r2.sqrt();
                        let j = bessel::j1_raw(2.0 * PI * radius * r);
                        let s = table.entry(m, n);
                        acc.add(2.0 * scale * j * j / r2 * s * s);
                    }
                    acc.value()
                })
                .collect();
            let mut total = CompensatedSum::new();
            for row in rows {
                total.add(row);
            }
            let value = total.value();
            let certified = tail + 1e-13 * value.abs().max(vol / phi);
            Ok(report(value, certified))
        }
    }
}

/// Monte Carlo estimate of the defining integral over `samples` uniform
/// centers; `certified_error` is the 1σ standard error.
pub fn variance_montecarlo(
    ps: &PointSet,
    radius: f64,
    samples: u64,
    seed: u64,
) -> Result<VarianceReport> {
    let start = std::time::Instant::now();
    if ps.is_empty() {
        return Err(Error::InvalidArgument("variance of an empty set".into()));
    }
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 1000 samples, got {samples}"
        )));
    }
    if !(0.0 < radius && radius < 0.5) {
        return Err(Error::UnsupportedRadius(format!(
            "ball radius must lie in (0, 1/2), got {radius}"
        )));
    }
    let n = ps.len() as f64;
    let vol = PI * radius * radius;
    // Fixed-size chunks keep the reduction independent of thread count.
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<(CompensatedSum, CompensatedSum)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = CompensatedSum::new();
            let mut sum_sq = CompensatedSum::new();
            let hi = ((c + 1) * CHUNK).min(samples);
            for j in (c * CHUNK)..hi {
                let (x, y) = rng::unit_pair_at(seed, j);
                let ball = BallSpec {
                    center: TorusPoint::new(x, y),
                    radius,
                };
                let dev = ps.ball_count(&ball) as f64 / n - vol;
                let v = dev * dev;
                sum.add(v);
                sum_sq.add(v * v);
            }
            (sum, sum_sq)
        })
        .collect();
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for (s, s2) in partials {
        sum.merge(s);
        sum_sq.merge(s2);
    }
    let nf = samples as f64;
    let mean = sum.value() / nf;
    let var_of_samples = (sum_sq.value() / nf - mean * mean).max(0.0);
    let stderr = (var_of_samples / nf).sqrt();
    let (label, q) = label_of(ps);
    Ok(VarianceReport {
        label,
        q,
        radius,
        method: VarianceMethod::Montecarlo,
        value: mean,
        certified_error: stderr,
        diagonal_part: 0.0,
        offdiagonal_part: 0.0,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Expected variance for `n` iid uniform points: the ball count is
/// Binomial(n, vol), so `Var(count/n − vol) = vol(1 − vol)/n`.
pub fn random_variance_baseline(n: u64, radius: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    if !(0.0 < radius && radius < 0.5) {
        return Err(Error::UnsupportedRadius(format!(
            "ball radius must lie in (0, 1/2), got {radius}"
        )));
    }
    let vol = PI * radius * radius;
    Ok(vol * (1.0 - vol) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torusgeo::generate_s_q;

    fn modulus(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn geometric_examples() {
        // S_5 balls at R = 0.1 are pairwise disjoint.
        let s5 = generate_s_q(&modulus(5));
        let rep = variance_geometric(&s5, 0.1).unwrap();
        assert!((rep.value - 0.006867021193865547).abs() < 1e-14);
        assert!((rep.diagonal_part - PI * 0.01 / 4.0).abs() < 1e-16);
        assert_eq!(rep.offdiagonal_part, 0.0);

        let single = PointSet::from_points(
            vec![TorusPoint::new(0.3, 0.7)],
            crate::torusgeo::SetLabel::Custom,
        );
        let rep = variance_geometric(&single, 0.1).unwrap();
        assert!((rep.value - 0.030428966095789).abs() < 1e-13);

        assert!(matches!(
            variance_geometric(&s5, 0.3),
            Err(Error::UnsupportedRadius(_))
        ));
    }

    #[test]
    fn geometric_invariant_reconstruction() {
        let ps = generate_s_q(&modulus(101));
        let rep = variance_geometric(&ps, 0.03).unwrap();
        let vol = PI * 0.03 * 0.03;
        assert!(
            (rep.value - (rep.diagonal_part + rep.offdiagonal_part - vol * vol)).abs() < 1e-18
        );
        assert!(rep.value >= -rep.certified_error);
    }

    #[test]
    fn spectral_matches_geometric() {
        for (q, radius) in [(101u64, 0.03f64), (101, 0.1), (499, 0.05)] {
            let m = modulus(q);
            let ps = generate_s_q(&m);
            let geo = variance_geometric(&ps, radius).unwrap();
            let spec = variance_spectral(&m, radius, 1e-6).unwrap();
            let budget = geo.certified_error + spec.certified_error;
            assert!(
                (geo.value - spec.value).abs() <= budget,
                "q={q} R={radius}: geo {} vs spec {} (budget {budget})",
                geo.value,
                spec.value
            );
        }
    }

    #[test]
    fn spectral_diagonal_hook_recovers_parseval() {
        let m = modulus(101);
        let radius = 0.07;
        let rep =
            variance_spectral_with(SpectralWeights::DiagonalOnly, &m, radius, 1e-9).unwrap();
        let vol = PI * radius * radius;
        let expected = (vol - vol * vol) / 100.0;
        assert!(
            (rep.value - expected).abs() < 1e-8,
            "diagonal-only value {} vs {expected}",
            rep.value
        );
    }

    #[test]
    fn montecarlo_within_three_sigma() {
        let s5 = generate_s_q(&modulus(5));
        let mc = variance_montecarlo(&s5, 0.1, 100_000, 20260810).unwrap();
        let exact = 0.006867021193865547;
        assert!(
            (mc.value - exact).abs() <= 3.0 * mc.certified_error,
            "mc {} vs exact {exact}, sigma {}",
            mc.value,
            mc.certified_error
        );

        // Determinism.
        let again = variance_montecarlo(&s5, 0.1, 100_000, 20260810).unwrap();
        assert_eq!(mc.value, again.value);
        assert_eq!(mc.certified_error, again.certified_error);

        assert!(variance_montecarlo(&s5, 0.1, 100, 1).is_err());
    }

    #[test]
    fn baseline_examples() {
        assert!((random_variance_baseline(4, 0.1).unwrap() - 0.007607241523947249).abs() < 1e-15);
        assert!((random_variance_baseline(1, 0.1).unwrap() - 0.030428966095789).abs() < 1e-13);
        // Single-point exact variance equals the n = 1 baseline.
        let single = PointSet::from_points(
            vec![TorusPoint::new(0.5, 0.5)],
            crate::torusgeo::SetLabel::Custom,
        );
        let geo = variance_geometric(&single, 0.1).unwrap();
        assert!((geo.value - random_variance_baseline(1, 0.1).unwrap()).abs() < 1e-15);
    }
}
