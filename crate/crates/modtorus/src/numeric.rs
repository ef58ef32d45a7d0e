//! Small numeric helpers: compensated summation and least squares.

use num_complex::Complex64;

/// Neumaier-compensated accumulator.
///
/// Summation order is fixed by the caller, so results are reproducible
/// run-to-run; the compensation term keeps the rounding error at the level of
/// a couple of ulps of the final sum rather than growing with the term count.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Merge another accumulator; used to combine per-chunk partial sums in
    /// deterministic index order.
    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator (componentwise Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Ordinary least squares fit of `y` against `x`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate.
    pub slope_stderr: f64,
    /// Residual standard error of the regression.
    pub residual_stderr: f64,
}

/// Least-squares line through `(x_i, y_i)`. Requires at least two distinct x.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    for &(x, y) in points {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
    }
    let dof = if n > 2 { (n - 2) as f64 } else { 1.0 };
    let residual_stderr = (ss_res / dof).sqrt();
    let slope_stderr = residual_stderr / sxx.sqrt();
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        residual_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        let expected = 1e-12;
        assert!((acc.value() - expected).abs() < 1e-24);
    }

    #[test]
    fn least_squares_exact_line() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let fit = least_squares(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.residual_stderr < 1e-12);
    }
}
