//! The statistics as executable, report-producing operations: variance of
//! ball measures (three independent methods plus the random baseline),
//! ball and box discrepancy, small-scale counts and exceptional sets,
//! covering radii and exponents, sparse coset and mixing reports, and
//! log-log exponent fits.

mod covering;
mod discrepancy;
mod sparse;
mod variance;

pub use covering::{
    avg_covering_radius, covering_exponent_sweep, covering_report, exceptional_set_measure,
    AvgCoveringResult, CoveringReport,
};
pub use discrepancy::{
    box_discrepancy_estimate, discrepancy_estimate, BallWitness, BoxDiscrepancyReport,
    BoxWitness, DiscrepancyReport, RadiiMode,
};
pub use sparse::{mixing_report, sparse_report, MixingModeRow, MixingReport, SparseModeRow, SparseReport};
pub use variance::{
    random_variance_baseline, variance_geometric, variance_montecarlo, variance_spectral,
    variance_spectral_with, SpectralWeights, VarianceMethod, VarianceReport,
};

use crate::arith::Modulus;
use crate::numeric::{least_squares, LineFit};
use crate::torusgeo::{generate_s_q, BallSpec, PointSet, TorusPoint};
use crate::{Error, Result};

/// `μ_q(B)`: the fraction of the modular-inverse points inside a ball.
pub fn mu_ball(modulus: &Modulus, ball: &BallSpec) -> f64 {
    let ps = generate_s_q(modulus);
    mu_ball_in(&ps, ball)
}

/// Empirical measure of a ball under any point set.
pub fn mu_ball_in(ps: &PointSet, ball: &BallSpec) -> f64 {
    ps.ball_count(ball) as f64 / ps.len() as f64
}

/// `|μ_q(B_R(y)) − vol(B_R)|` for the small-scale checks.
pub fn small_scale_deviation(ps: &PointSet, y: TorusPoint, radius: f64) -> Result<f64> {
    let ball = BallSpec::new(y, radius)?;
    Ok((mu_ball_in(ps, &ball) - std::f64::consts::PI * radius * radius).abs())
}

/// One sweep observation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub q: u64,
    pub value: f64,
    /// Named auxiliary values (bounds, intervals, ratios).
    pub aux: Vec<(String, f64)>,
}

/// Sweep rows with the least-squares trend of `log(value)` against `log(q)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepResult {
    pub statistic: String,
    pub rows: Vec<SweepRow>,
    pub fit: Option<LineFit>,
}

impl SweepResult {
    pub fn from_rows(statistic: impl Into<String>, rows: Vec<SweepRow>) -> SweepResult {
        let fit = if rows.iter().all(|r| r.value > 0.0) && rows.len() >= 2 {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| ((r.q as f64).ln(), r.value.ln()))
                .collect();
            least_squares(&pts)
        } else {
            None
        };
        SweepResult {
            statistic: statistic.into(),
            rows,
            fit,
        }
    }
}

/// Ordinary least squares of `log(value)` on `log(q)`.
pub fn exponent_fit(rows: &[(f64, f64)]) -> Result<LineFit> {
    if rows.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    if let Some(&(q, v)) = rows.iter().find(|&&(q, v)| q <= 0.0 || v <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs positive data, got ({q}, {v})"
        )));
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(q, v)| (q.ln(), v.ln())).collect();
    least_squares(&pts).ok_or_else(|| {
        Error::InvalidArgument("exponent fit needs at least two distinct q".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_ball_examples() {
        let m5 = Modulus::new(5).unwrap();
        let ball = BallSpec::new(TorusPoint::new(0.2, 0.2), 0.05).unwrap();
        assert!((mu_ball(&m5, &ball) - 0.25).abs() < 1e-15);

        // Empty corner at primes.
        for q in [53u64, 997] {
            let m = Modulus::new(q).unwrap();
            let r = 1.0 / (2.0 * (q as f64).sqrt());
            let ball = BallSpec::new(TorusPoint::new(r, r), r).unwrap();
            assert_eq!(mu_ball(&m, &ball), 0.0, "q={q}");
        }
    }

    #[test]
    fn exponent_fit_exact_power_laws() {
        let rows: Vec<(f64, f64)> = (1..=8)
            .map(|i| {
                let q = (10.0f64).powi(i);
                (q, q.powf(-0.5))
            })
            .collect();
        let fit = exponent_fit(&rows).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);

        let rows: Vec<(f64, f64)> = (1..=8)
            .map(|i| {
                let q = (7.0f64).powi(i);
                (q, 3.25 * q.powf(-1.0 / 3.0))
            })
            .collect();
        let fit = exponent_fit(&rows).unwrap();
        assert!((fit.slope + 1.0 / 3.0).abs() < 1e-12);

        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, -0.5), (3.0, 0.2)]).is_err());
    }
}
