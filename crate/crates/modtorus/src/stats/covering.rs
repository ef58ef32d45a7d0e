//! Covering radii, covering exponents, and exceptional-set measures, all as
//! two-sided intervals from grid classification.

use crate::arith::Modulus;
use crate::torusgeo::{generate_s_q, PointSet, SetLabel};
use crate::{Error, Result};

use super::{SweepResult, SweepRow};

const PI: f64 = std::f64::consts::PI;

/// `-log n / log(π R²)` when defined: needs `n ≥ 2` and `π R² < 1`.
pub fn covering_exponent(n: usize, radius: f64) -> Option<f64> {
    let vol = PI * radius * radius;
    if n < 2 || vol >= 1.0 || radius <= 0.0 {
        return None;
    }
    Some(-(n as f64).ln() / vol.ln())
}

/// Result of the average-covering bisection.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AvgCoveringResult {
    pub delta: f64,
    /// `+1` compares the uncovered measure against `R^δ`, `-1` against
    /// `R^(-δ)`; the latter is vacuous for `R < 1` and gets flagged.
    pub exponent_sign: i32,
    pub radius_lo: f64,
    pub radius_hi: f64,
    /// Set when the threshold comparison is vacuous at every probed radius.
    pub degenerate: bool,
}

/// Least `R` with uncovered measure at most `R^(sign·δ)`, bracketed through
/// the certified uncovered intervals of a `g × g` classification.
pub fn avg_covering_radius(
    ps: &PointSet,
    delta: f64,
    exponent_sign: i32,
    g: usize,
) -> Result<AvgCoveringResult> {
    if delta <= 0.0 {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if exponent_sign != 1 && exponent_sign != -1 {
        return Err(Error::InvalidArgument(format!(
            "exponent sign must be +1 or -1, got {exponent_sign}"
        )));
    }
    let field = ps.coverage_field(g)?;
    let threshold = |r: f64| r.powf(exponent_sign as f64 * delta);

    let (_, cov_hi) = field.covering_interval();
    if exponent_sign == -1 {
        // R^(-δ) ≥ 1 for every R < 1, so the least sufficient radius is the
        // smallest one probed; report it and flag the degeneracy.
        let tiny = field.half_diagonal();
        return Ok(AvgCoveringResult {
            delta,
            exponent_sign,
            radius_lo: 0.0,
            radius_hi: tiny,
            degenerate: true,
        });
    }

    // Bisection against each side of the uncovered interval. The uncovered
    // measure is nonincreasing in R while R^δ increases, so both brackets
    // are well defined.
    let bisect = |sufficient: &dyn Fn(f64) -> bool| -> f64 {
        let mut lo = 0.0f64;
        let mut hi = cov_hi.max(field.half_diagonal());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if sufficient(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    // Certainly sufficient: even the upper uncovered estimate is below R^δ.
    let hi = bisect(&|r: f64| field.uncovered_interval(r).1 <= threshold(r));
    // Possibly sufficient: the lower uncovered estimate is below R^δ.
    let lo = bisect(&|r: f64| field.uncovered_interval(r).0 <= threshold(r));
    Ok(AvgCoveringResult {
        delta,
        exponent_sign,
        radius_lo: lo.min(hi),
        radius_hi: hi,
        degenerate: false,
    })
}

/// Covering statistics of one point set.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoveringReport {
    pub label: String,
    pub q: Option<u64>,
    pub n: usize,
    pub grid: usize,
    pub radius_lo: f64,
    pub radius_hi: f64,
    /// `-log n / log(π·R²)` at the interval endpoints.
    pub exponent_from_hi: Option<f64>,
    pub exponent_from_lo: Option<f64>,
    pub avg: AvgCoveringResult,
    pub avg_exponent_from_hi: Option<f64>,
    pub avg_exponent_from_lo: Option<f64>,
}

/// Covering radius interval, covering exponents, and the average-covering
/// quantities for one point set.
pub fn covering_report(
    ps: &PointSet,
    g: usize,
    delta: f64,
    exponent_sign: i32,
) -> Result<CoveringReport> {
    let (radius_lo, radius_hi) = ps.covering_radius(g)?;
    let avg = avg_covering_radius(ps, delta, exponent_sign, g)?;
    let q = match ps.label() {
        SetLabel::SQ { q } => Some(*q),
        _ => None,
    };
    Ok(CoveringReport {
        label: ps.label().to_string(),
        q,
        n: ps.len(),
        grid: g,
        radius_lo,
        radius_hi,
        exponent_from_hi: covering_exponent(ps.len(), radius_hi),
        exponent_from_lo: covering_exponent(ps.len(), radius_lo),
        avg_exponent_from_hi: covering_exponent(ps.len(), avg.radius_hi),
        avg_exponent_from_lo: covering_exponent(ps.len(), avg.radius_lo.max(f64::MIN_POSITIVE)),
        avg,
    })
}

/// Covering sweep over primes: per-`q` reports plus the log-log trend of the
/// covering radius (upper endpoints).
pub fn covering_exponent_sweep(
    primes: &[u64],
    g: usize,
    delta: f64,
    exponent_sign: i32,
) -> Result<(Vec<CoveringReport>, SweepResult)> {
    if primes.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "covering sweep needs at least 5 primes, got {}",
            primes.len()
        )));
    }
    let mut reports = Vec::with_capacity(primes.len());
    for &q in primes {
        let m = Modulus::new(q)?;
        let ps = generate_s_q(&m);
        reports.push(covering_report(&ps, g, delta, exponent_sign)?);
    }
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow {
            q: r.q.expect("sweep sets are S_q"),
            value: r.radius_hi,
            aux: vec![
                ("radius_lo".into(), r.radius_lo),
                ("exponent_hi".into(), r.exponent_from_hi.unwrap_or(f64::NAN)),
                (
                    "avg_exponent_hi".into(),
                    r.avg_exponent_from_hi.unwrap_or(f64::NAN),
                ),
                ("avg_radius_hi".into(), r.avg.radius_hi),
            ],
        })
        .collect();
    Ok((reports, SweepResult::from_rows("covering", rows)))
}

/// Two-sided grid estimate of
/// `vol{ y : |μ_q(B_R(y)) − πR²| > threshold }`.
///
/// Each cell is classified through counts at `R ± half-diagonal`, which
/// bracket the count for every center inside the cell.
pub fn exceptional_set_measure(
    modulus: &Modulus,
    radius: f64,
    threshold: f64,
    g: usize,
) -> Result<(f64, f64)> {
    use rayon::prelude::*;
    if g < 16 {
        return Err(Error::InvalidArgument(format!(
            "exceptional-set grid must be at least 16, got {g}"
        )));
    }
    if threshold <= 0.0 {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    if !(0.0 < radius && radius < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "ball radius must lie in (0, 1/2), got {radius}"
        )));
    }
    if threshold > 1.0 {
        // Deviations of a probability against a sub-1 volume never exceed 1.
        return Ok((0.0, 0.0));
    }
    let ps = generate_s_q(modulus);
    let n = ps.len() as f64;
    let vol = PI * radius * radius;
    let half_diag = std::f64::consts::SQRT_2 / (2.0 * g as f64);
    let step = 1.0 / g as f64;
    let counts: Vec<(u32, u32)> = (0..g * g)
        .into_par_iter()
        .map(|ci| {
            let center = crate::torusgeo::TorusPoint::new(
                ((ci % g) as f64 + 0.5) * step,
                ((ci / g) as f64 + 0.5) * step,
            );
            let r_lo = (radius - half_diag).max(0.0);
            let lo = if r_lo > 0.0 {
                ps.indices_within(center, r_lo).len() as u32
            } else {
                0
            };
            let hi = ps.indices_within(center, radius + half_diag).len() as u32;
            (lo, hi)
        })
        .collect();
    let mut definite = 0usize;
    let mut possible = 0usize;
    for (lo, hi) in counts {
        let mu_lo = lo as f64 / n;
        let mu_hi = hi as f64 / n;
        // Deviation range over the cell.
        let dev_min = (mu_lo - vol).max(vol - mu_hi).max(0.0);
        let dev_max = (mu_hi - vol).max(vol - mu_lo);
        if dev_min > threshold {
            definite += 1;
        }
        if dev_max > threshold {
            possible += 1;
        }
    }
    let cells = (g * g) as f64;
    Ok((definite as f64 / cells, possible as f64 / cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torusgeo::{random_pointset, PointSet, TorusPoint};

    #[test]
    fn exceptional_trivial_threshold() {
        let m = Modulus::new(5).unwrap();
        assert_eq!(
            exceptional_set_measure(&m, 0.1, 1.5, 64).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn exceptional_mod_five_small() {
        // Deviations are 0.0314 (empty) or 0.2186 (one point in ball), both
        // below 0.5, so the measure is zero up to boundary cells.
        let m = Modulus::new(5).unwrap();
        let (lo, hi) = exceptional_set_measure(&m, 0.1, 0.5, 200).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi < 0.02, "hi = {hi}");
    }

    #[test]
    fn exceptional_catches_imbalance() {
        // Threshold below the deviation of cells inside the balls: those
        // cells are definitely exceptional.
        let m = Modulus::new(5).unwrap();
        let (lo, hi) = exceptional_set_measure(&m, 0.1, 0.1, 200).unwrap();
        // Four balls of volume ~0.0314 carry deviation 0.2186 > 0.1.
        assert!(lo > 0.08 && hi < 0.25, "[{lo},{hi}]");
    }

    #[test]
    fn avg_covering_minus_sign_is_degenerate() {
        let ps = random_pointset(100, 5);
        let res = avg_covering_radius(&ps, 0.1, -1, 32).unwrap();
        assert!(res.degenerate);
        assert!(res.radius_hi <= 0.05);
    }

    #[test]
    fn avg_covering_single_point_root() {
        // One point: uncovered(R) = 1 - πR² (for R < 1/2); the bisection
        // solves 1 - πR² = R^0.5 whose root is ~0.3457980.
        let ps = PointSet::from_points(
            vec![TorusPoint::new(0.5, 0.5)],
            crate::torusgeo::SetLabel::Custom,
        );
        let res = avg_covering_radius(&ps, 0.5, 1, 256).unwrap();
        let root = 0.34579800893; // solves 1 - pi r^2 = sqrt(r)
        assert!(
            res.radius_lo - 0.01 <= root && root <= res.radius_hi + 0.01,
            "[{}, {}] vs {root}",
            res.radius_lo,
            res.radius_hi
        );
        assert!(!res.degenerate);
    }

    #[test]
    fn covering_report_s101() {
        let m = Modulus::new(101).unwrap();
        let ps = generate_s_q(&m);
        let rep = covering_report(&ps, 256, 0.05, 1).unwrap();
        assert!(rep.radius_lo <= rep.radius_hi);
        let e_hi = rep.exponent_from_hi.unwrap();
        let e_lo = rep.exponent_from_lo.unwrap();
        // Exponents recompute exactly from the stored endpoints.
        assert_eq!(e_hi, covering_exponent(100, rep.radius_hi).unwrap());
        assert!(e_lo <= e_hi, "smaller radius, smaller exponent");
        // The average-covering radius cannot exceed the covering radius.
        assert!(rep.avg.radius_hi <= rep.radius_hi + 1e-12);
    }

    #[test]
    fn covering_exponent_guards() {
        assert!(covering_exponent(1, 0.3).is_none());
        assert!(covering_exponent(10, 0.7).is_none());
        assert!(covering_exponent(10, 0.1).is_some());
    }
}
