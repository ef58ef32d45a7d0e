//! Batch evaluation of all `S(m, n; q)` at once.
//!
//! Writing `d = b̄` turns the sum into `S(m, n; q) = Σ_b e(m·b̄/q) e(n·b/q)`,
//! so for fixed `m` the values over all `n` are one length-`q` inverse DFT of
//! the sparse vector `b ↦ e(m·b̄/q)` supported on the units. Total cost
//! `O(q² log q)` instead of `O(q·φ(q)·q)` for entrywise direct summation,
//! which the tests keep around as the oracle.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{roots_of_unity, weil_rhs, IMAG_TOL};
use crate::arith::{gcd, unit_group, DirichletCharacter, Modulus};
use crate::{Error, Result};

/// Default ceiling on `q` for dense `q × q` tables (200 MB of f64 at the cap).
pub const DEFAULT_TABLE_CAP: u64 = 5000;

/// Dense table of all Kloosterman sums modulo `q`, row-major in `(m, n)`.
pub struct KloostermanTable {
    modulus: Modulus,
    values: Vec<f64>,
}

impl KloostermanTable {
    /// Builds the full table with the default size cap.
    pub fn build(m: &Modulus) -> Result<KloostermanTable> {
        Self::build_with_cap(m, DEFAULT_TABLE_CAP)
    }

    pub fn build_with_cap(m: &Modulus, cap: u64) -> Result<KloostermanTable> {
        let q = m.q();
        if q > cap {
            return Err(Error::ResourceLimit(format!(
                "table for q = {q} exceeds the cap {cap}"
            )));
        }
        let qs = q as usize;
        let ug = unit_group(m);
        let inv_of_unit: Vec<(usize, usize)> = ug
            .units()
            .iter()
            .map(|&b| (b as usize, ug.inverse_of(b).expect("unit") as usize))
            .collect();
        let roots = roots_of_unity(q);
        let fft = FftPlanner::new().plan_fft_inverse(qs);
        let imag_tol = IMAG_TOL * (m.phi() as f64).max(1.0);

        let mut values = vec![0.0f64; qs * qs];
        values
            .par_chunks_mut(qs)
            .enumerate()
            .for_each(|(row_m, row)| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); qs];
                for &(b, b_inv) in &inv_of_unit {
                    scratch[b] = roots[(row_m * b_inv) % qs];
                }
                fft.process(&mut scratch);
                for (n, z) in scratch.iter().enumerate() {
                    assert!(
                        z.im.abs() <= imag_tol,
                        "table entry ({row_m},{n}) has imaginary part {}",
                        z.im
                    );
                    row[n] = z.re;
                }
            });
        Ok(KloostermanTable {
            modulus: m.clone(),
            values,
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// `S(m, n; q)` for signed arguments, reduced mod `q`.
    #[inline]
    pub fn entry(&self, m: i64, n: i64) -> f64 {
        self.entry_mod(self.modulus.reduce_signed(m), self.modulus.reduce_signed(n))
    }

    /// `S(m, n; q)` for residues already in `[0, q)`.
    #[inline]
    pub fn entry_mod(&self, m: u64, n: u64) -> f64 {
        let q = self.modulus.q() as usize;
        self.values[(m as usize) * q + n as usize]
    }

    /// One table row, all `n` for a fixed residue `m`.
    pub fn row(&self, m: u64) -> &[f64] {
        let q = self.modulus.q() as usize;
        &self.values[(m as usize) * q..(m as usize + 1) * q]
    }

    /// Max of `|S(m, n; q)| / (τ(q)·sqrt(gcd(m,n,q)·q))` over all residue
    /// pairs, with the attaining pair.
    pub fn max_weil_ratio(&self) -> (f64, (u64, u64)) {
        let q = self.modulus.q();
        let per_row: Vec<(f64, (u64, u64))> = (0..q)
            .into_par_iter()
            .map(|m| {
                let mut best = (f64::MIN, (0u64, 0u64));
                for n in 0..q {
                    let ratio =
                        self.entry_mod(m, n).abs() / weil_rhs(m as i64, n as i64, &self.modulus);
                    if ratio > best.0 {
                        best = (ratio, (m, n));
                    }
                }
                best
            })
            .collect();
        per_row
            .into_iter()
            .fold((f64::MIN, (0, 0)), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

/// Max of `|S_χ(m, n; q)| / (τ(q)·sqrt(gcd(m,n,q)·q))` over all residue
/// pairs, streaming one FFT row at a time.
pub fn twisted_weil_max_ratio(chi: &DirichletCharacter) -> f64 {
    let m = chi.modulus();
    let q = m.q();
    let qs = q as usize;
    let ug = unit_group(m);
    let inv_of_unit: Vec<(usize, usize)> = ug
        .units()
        .iter()
        .map(|&b| (b as usize, ug.inverse_of(b).expect("unit") as usize))
        .collect();
    let roots = roots_of_unity(q);
    let fft = FftPlanner::new().plan_fft_inverse(qs);
    let tau = m.tau() as f64;
    let qf = q as f64;

    let per_row: Vec<f64> = (0..qs)
        .into_par_iter()
        .map(|row_m| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); qs];
            for &(b, b_inv) in &inv_of_unit {
                // chi(d) at d = b̄.
                scratch[b] = chi.value(b_inv as u64) * roots[(row_m * b_inv) % qs];
            }
            fft.process(&mut scratch);
            let gm = gcd(row_m as u64, q);
            let mut best = f64::MIN;
            for (n, z) in scratch.iter().enumerate() {
                let g = gcd(gm, gcd(n as u64, q));
                let rhs = tau * ((g as f64) * qf).sqrt();
                let ratio = z.norm() / rhs;
                if ratio > best {
                    best = ratio;
                }
            }
            best
        })
        .collect();
    per_row.into_iter().fold(f64::MIN, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::KloostermanEvaluator;

    #[test]
    fn table_examples_mod_five() {
        let m = Modulus::new(5).unwrap();
        let t = KloostermanTable::build(&m).unwrap();
        assert!((t.entry(1, 1) - 0.3819660112501052).abs() < 1e-9);
        assert!((t.entry(0, 0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn table_matches_direct_summation() {
        for q in [1u64, 2, 3, 8, 12, 29, 45, 60] {
            let m = Modulus::new(q).unwrap();
            let t = KloostermanTable::build(&m).unwrap();
            let eval = KloostermanEvaluator::new(&m);
            for mm in 0..q {
                for nn in 0..q {
                    let direct = eval.eval(mm as i64, nn as i64);
                    let batch = t.entry_mod(mm, nn);
                    assert!(
                        (direct - batch).abs() < 1e-9,
                        "q={q} m={mm} n={nn}: {direct} vs {batch}"
                    );
                }
            }
        }
    }

    #[test]
    fn table_symmetry_mod_seven() {
        let m = Modulus::new(7).unwrap();
        let t = KloostermanTable::build(&m).unwrap();
        for mm in 0..7 {
            for nn in 0..7 {
                assert!((t.entry_mod(mm, nn) - t.entry_mod(nn, mm)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = Modulus::new(100).unwrap();
        assert!(matches!(
            KloostermanTable::build_with_cap(&m, 50),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn twisted_ratio_matches_direct_at_small_q() {
        let m = Modulus::new(15).unwrap();
        let chars = crate::arith::all_characters(&m).unwrap();
        let eval = KloostermanEvaluator::new(&m);
        for chi in &chars {
            let fast = twisted_weil_max_ratio(chi);
            let mut slow = f64::MIN;
            for mm in 0..15i64 {
                for nn in 0..15i64 {
                    let r = eval.eval_twisted(chi, mm, nn).norm() / weil_rhs(mm, nn, &m);
                    slow = slow.max(r);
                }
            }
            assert!((fast - slow).abs() < 1e-9);
        }
    }
}
