//! Sparse-coset and mixing equidistribution reports.

use num_complex::Complex64;

use crate::arith::{Modulus, SubgroupCoset};
use crate::expsum::{
    bourgain_condition, coset_weyl_sum, mixing_fourier_with, mixing_frequencies,
    BourgainReport, KloostermanEvaluator, Mode4,
};
use crate::{Error, Result};

/// One probed Weyl-sum mode.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SparseModeRow {
    pub m: i64,
    pub n: i64,
    pub abs: f64,
}

/// Weyl sums of a coset over all nonzero modes up to a cutoff.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SparseReport {
    pub q: u64,
    pub representative: u64,
    pub subgroup_order: u64,
    pub max_mode: i64,
    /// Max |Weyl sum| over probed nonzero modes.
    pub max_abs: f64,
    pub argmax: (i64, i64),
    /// `τ(q)·sqrt(q)/#H`, from the character-orthogonality route and the
    /// Weil bound (gcd term is 1 for the probed modes of a prime modulus).
    pub theoretical_bound: f64,
    pub bourgain: Option<BourgainReport>,
    pub rows: Vec<SparseModeRow>,
}

/// Evaluates all coset Weyl sums with `0 < max(|m|, |n|) ≤ max_mode`.
pub fn sparse_report(
    coset: &SubgroupCoset,
    max_mode: i64,
    bourgain_delta: f64,
) -> Result<SparseReport> {
    if max_mode < 1 {
        return Err(Error::InvalidArgument(format!(
            "mode cutoff must be at least 1, got {max_mode}"
        )));
    }
    let modulus = coset.modulus();
    let q = modulus.q();
    let mut rows = Vec::with_capacity(((2 * max_mode + 1) * (2 * max_mode + 1) - 1) as usize);
    let mut max_abs = f64::MIN;
    let mut argmax = (0i64, 0i64);
    for m in -max_mode..=max_mode {
        for n in -max_mode..=max_mode {
            if m == 0 && n == 0 {
                continue;
            }
            let abs = coset_weyl_sum(coset, m, n).norm();
            if abs > max_abs {
                max_abs = abs;
                argmax = (m, n);
            }
            rows.push(SparseModeRow { m, n, abs });
        }
    }
    let theoretical_bound =
        modulus.tau() as f64 * (q as f64).sqrt() / coset.subgroup_order() as f64;
    let bourgain = if modulus.is_prime() && (q - 1) % coset.subgroup_order() == 0 {
        Some(bourgain_condition(
            coset.subgroup_order(),
            modulus,
            bourgain_delta,
        )?)
    } else {
        None
    };
    Ok(SparseReport {
        q,
        representative: coset.representative(),
        subgroup_order: coset.subgroup_order(),
        max_mode,
        max_abs,
        argmax,
        theoretical_bound,
        bourgain,
        rows,
    })
}

/// One probed mixing mode.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MixingModeRow {
    pub mode: Mode4,
    pub abs: f64,
    /// Set when both combined frequencies vanish mod `q` (coefficient 1).
    pub degenerate: bool,
}

/// Fourier coefficients of the mixing measure over a 4-dimensional mode box.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MixingReport {
    pub q: u64,
    pub a: u64,
    pub max_mode: i64,
    pub rows: Vec<MixingModeRow>,
    /// Max |coefficient| over nonzero, nondegenerate probed modes.
    pub max_nondegenerate: f64,
    pub degenerate_count: usize,
}

/// Table of `|S(m + a·m', n + ā·n'; q)|/φ(q)` over all nonzero modes with
/// `max(|m|,|n|,|m'|,|n'|) ≤ max_mode`, flagging the degenerate ones.
pub fn mixing_report(modulus: &Modulus, a: u64, max_mode: i64) -> Result<MixingReport> {
    if max_mode < 1 {
        return Err(Error::InvalidArgument(format!(
            "mode cutoff must be at least 1, got {max_mode}"
        )));
    }
    if !modulus.is_unit(a) {
        return Err(Error::NotAUnit {
            d: a,
            q: modulus.q(),
        });
    }
    let eval = KloostermanEvaluator::new(modulus);
    let range = -max_mode..=max_mode;
    let mut rows = Vec::new();
    let mut max_nondegenerate = 0.0f64;
    let mut degenerate_count = 0usize;
    for m in range.clone() {
        for n in range.clone() {
            for mp in range.clone() {
                for np in range.clone() {
                    let mode = Mode4::new(m, n, mp, np);
                    if mode.is_zero() {
                        continue;
                    }
                    let (fm, fn_) = mixing_frequencies(a, mode, modulus)?;
                    let degenerate = fm == 0 && fn_ == 0;
                    let z: Complex64 = mixing_fourier_with(&eval, a, mode)?;
                    let abs = z.norm();
                    if degenerate {
                        degenerate_count += 1;
                    } else if abs > max_nondegenerate {
                        max_nondegenerate = abs;
                    }
                    rows.push(MixingModeRow {
                        mode,
                        abs,
                        degenerate,
                    });
                }
            }
        }
    }
    Ok(MixingReport {
        q: modulus.q(),
        a,
        max_mode,
        rows,
        max_nondegenerate,
        degenerate_count,
    })
}
