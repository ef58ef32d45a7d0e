//! Kloosterman sums and their relatives.
//!
//! The basic object is `S(m, n; q) = Σ_d e((m·d + n·d̄)/q)` over the units
//! `d` modulo `q`; pairing `d` with `-d` shows the sum is real. Everything
//! here reduces to evaluating such sums: twisted by a Dirichlet character,
//! restricted to a coset, or reindexed by a multiplicative translate.

mod table;

pub use table::{twisted_weil_max_ratio, KloostermanTable, DEFAULT_TABLE_CAP};

use num_complex::Complex64;

use crate::arith::{gcd, mod_inverse, unit_group, DirichletCharacter, Modulus, UnitGroupView};
use crate::numeric::ComplexSum;
use crate::{Error, Result};

/// Relative bound on the imaginary part a real Kloosterman sum is allowed to
/// pick up from floating-point noise.
const IMAG_TOL: f64 = 1e-9;

/// Precomputed state for repeated direct summation at one modulus: the
/// `(d, d̄)` pairs and the `q`-th roots of unity.
pub struct KloostermanEvaluator {
    modulus: Modulus,
    pairs: Vec<(u64, u64)>,
    roots: Vec<Complex64>,
}

impl KloostermanEvaluator {
    pub fn new(m: &Modulus) -> KloostermanEvaluator {
        let ug = unit_group(m);
        Self::from_units(&ug)
    }

    pub fn from_units(ug: &UnitGroupView) -> KloostermanEvaluator {
        let m = ug.modulus();
        let pairs: Vec<(u64, u64)> = ug
            .units()
            .iter()
            .map(|&d| (d, ug.inverse_of(d).expect("unit")))
            .collect();
        KloostermanEvaluator {
            modulus: m.clone(),
            pairs,
            roots: roots_of_unity(m.q()),
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// `Σ_d e((m·d + n·d̄)/q)` as a complex number, compensated, ascending `d`.
    pub fn eval_complex(&self, m: i64, n: i64) -> Complex64 {
        let q = self.modulus.q();
        let mu = self.modulus.reduce_signed(m);
        let nu = self.modulus.reduce_signed(n);
        let mut acc = ComplexSum::new();
        for &(d, dinv) in &self.pairs {
            let idx = ((mu as u128 * d as u128 + nu as u128 * dinv as u128) % q as u128) as usize;
            acc.add(self.roots[idx]);
        }
        acc.value()
    }

    /// The real value of `S(m, n; q)`; asserts the imaginary part is noise.
    pub fn eval(&self, m: i64, n: i64) -> f64 {
        let z = self.eval_complex(m, n);
        let scale = (self.modulus.phi() as f64).max(1.0);
        assert!(
            z.im.abs() <= IMAG_TOL * scale,
            "Kloosterman sum S({m},{n};{}) has non-negligible imaginary part {}",
            self.modulus.q(),
            z.im
        );
        z.re
    }

    /// Character-twisted sum `Σ_d χ(d) e((m·d + n·d̄)/q)`.
    pub fn eval_twisted(&self, chi: &DirichletCharacter, m: i64, n: i64) -> Complex64 {
        let q = self.modulus.q();
        let mu = self.modulus.reduce_signed(m);
        let nu = self.modulus.reduce_signed(n);
        let mut acc = ComplexSum::new();
        for &(d, dinv) in &self.pairs {
            let idx = ((mu as u128 * d as u128 + nu as u128 * dinv as u128) % q as u128) as usize;
            acc.add(chi.value(d) * self.roots[idx]);
        }
        acc.value()
    }
}

/// `e(j/q)` for `j` in `[0, q)`.
pub(crate) fn roots_of_unity(q: u64) -> Vec<Complex64> {
    let step = 2.0 * std::f64::consts::PI / q as f64;
    (0..q)
        .map(|j| {
            let angle = step * j as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// The Kloosterman sum `S(m, n; q)` by direct summation.
pub fn kloosterman(m: i64, n: i64, modulus: &Modulus) -> f64 {
    KloostermanEvaluator::new(modulus).eval(m, n)
}

/// The twisted Kloosterman sum `S_χ(m, n; q)` by direct summation.
pub fn twisted_kloosterman(
    chi: &DirichletCharacter,
    m: i64,
    n: i64,
    modulus: &Modulus,
) -> Complex64 {
    KloostermanEvaluator::new(modulus).eval_twisted(chi, m, n)
}

/// Right-hand side of the Weil bound: `τ(q) · sqrt(gcd(m, n, q) · q)`.
pub fn weil_rhs(m: i64, n: i64, modulus: &Modulus) -> f64 {
    let g = gcd(
        modulus.reduce_signed(m),
        gcd(modulus.reduce_signed(n), modulus.q()),
    );
    modulus.tau() as f64 * ((g as f64) * (modulus.q() as f64)).sqrt()
}

/// Normalized Weyl sum over a coset: `(1/#H) Σ_{d ∈ aH} e((m·d + n·d̄)/q)`.
pub fn coset_weyl_sum(coset: &crate::arith::SubgroupCoset, m: i64, n: i64) -> Complex64 {
    let modulus = coset.modulus();
    let q = modulus.q();
    let roots = roots_of_unity(q);
    let mu = modulus.reduce_signed(m);
    let nu = modulus.reduce_signed(n);
    let mut acc = ComplexSum::new();
    for &d in coset.elements() {
        let dinv = mod_inverse(d, modulus).expect("coset elements are units");
        let idx = ((mu as u128 * d as u128 + nu as u128 * dinv as u128) % q as u128) as usize;
        acc.add(roots[idx]);
    }
    acc.value() / coset.subgroup_order() as f64
}

/// Cross-check route for [`coset_weyl_sum`] through character orthogonality:
/// `(1/φ(q)) Σ_{χ|_H = 1} χ̄(a) S_χ(m, n; q)`, summing over the characters
/// trivial on the subgroup.
pub fn coset_weyl_sum_via_characters(
    coset: &crate::arith::SubgroupCoset,
    m: i64,
    n: i64,
) -> Result<Complex64> {
    let modulus = coset.modulus();
    let chars = crate::arith::all_characters(modulus)?;
    let eval = KloostermanEvaluator::new(modulus);
    let a = coset.representative();
    let a_inv = mod_inverse(a, modulus)?;
    let h: Vec<u64> = coset
        .elements()
        .iter()
        .map(|&x| crate::arith::mul_mod(a_inv, x, modulus.q().max(1)))
        .collect();
    let mut acc = ComplexSum::new();
    for chi in &chars {
        let trivial_on_h = h
            .iter()
            .all(|&x| (chi.value(x) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        if trivial_on_h {
            acc.add(chi.value(a).conj() * eval.eval_twisted(chi, m, n));
        }
    }
    Ok(acc.value() / modulus.phi() as f64)
}

/// A frequency mode on the 4-torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Mode4 {
    pub m: i64,
    pub n: i64,
    pub m_prime: i64,
    pub n_prime: i64,
}

impl Mode4 {
    pub fn new(m: i64, n: i64, m_prime: i64, n_prime: i64) -> Mode4 {
        Mode4 {
            m,
            n,
            m_prime,
            n_prime,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.n == 0 && self.m_prime == 0 && self.n_prime == 0
    }

    pub fn max_component(&self) -> i64 {
        self.m
            .abs()
            .max(self.n.abs())
            .max(self.m_prime.abs())
            .max(self.n_prime.abs())
    }
}

/// Combined frequencies `(m + a·m', n + ā·n')` of the mixing measure at a mode.
pub fn mixing_frequencies(a: u64, mode: Mode4, modulus: &Modulus) -> Result<(u64, u64)> {
    if !modulus.is_unit(a) {
        return Err(Error::NotAUnit {
            d: a,
            q: modulus.q(),
        });
    }
    let q = modulus.q().max(1);
    let a = a % q;
    let a_inv = mod_inverse(a, modulus)?;
    let fm =
        (modulus.reduce_signed(mode.m) as u128 + a as u128 * modulus.reduce_signed(mode.m_prime) as u128) % q as u128;
    let fn_ = (modulus.reduce_signed(mode.n) as u128
        + a_inv as u128 * modulus.reduce_signed(mode.n_prime) as u128)
        % q as u128;
    Ok((fm as u64, fn_ as u64))
}

/// Fourier coefficient of the mixing measure at a 4-torus mode:
/// `S(m + a·m', n + ā·n'; q) / φ(q)`.
pub fn mixing_fourier(a: u64, mode: Mode4, modulus: &Modulus) -> Result<Complex64> {
    let eval = KloostermanEvaluator::new(modulus);
    mixing_fourier_with(&eval, a, mode)
}

/// As [`mixing_fourier`], reusing a prepared evaluator.
pub fn mixing_fourier_with(
    eval: &KloostermanEvaluator,
    a: u64,
    mode: Mode4,
) -> Result<Complex64> {
    let modulus = eval.modulus().clone();
    let (fm, fn_) = mixing_frequencies(a, mode, &modulus)?;
    let z = eval.eval_complex(fm as i64, fn_ as i64);
    Ok(z / modulus.phi() as f64)
}

/// Cross-check route for [`mixing_fourier`]: the Weyl sum straight from the
/// definition of the mixing measure,
/// `(1/φ) Σ_d e((m·d + n·d̄ + m'·(ad) + n'·(ad)⁻)/q)`.
pub fn mixing_weyl_direct(a: u64, mode: Mode4, modulus: &Modulus) -> Result<Complex64> {
    if !modulus.is_unit(a) {
        return Err(Error::NotAUnit {
            d: a,
            q: modulus.q(),
        });
    }
    let q = modulus.q().max(1);
    let ug = unit_group(modulus);
    let roots = roots_of_unity(modulus.q());
    let a = a % q;
    let a_inv = mod_inverse(a, modulus)?;
    let (m, n) = (modulus.reduce_signed(mode.m), modulus.reduce_signed(mode.n));
    let (mp, np) = (
        modulus.reduce_signed(mode.m_prime),
        modulus.reduce_signed(mode.n_prime),
    );
    let mut acc = ComplexSum::new();
    for &d in ug.units() {
        let dinv = ug.inverse_of(d).expect("unit");
        let ad = crate::arith::mul_mod(a, d, q);
        let ad_inv = crate::arith::mul_mod(a_inv, dinv, q);
        let idx = ((m as u128 * d as u128
            + n as u128 * dinv as u128
            + mp as u128 * ad as u128
            + np as u128 * ad_inv as u128)
            % q as u128) as usize;
        acc.add(roots[idx]);
    }
    Ok(acc.value() / modulus.phi() as f64)
}

/// Report of the gcd conditions used for sparse equidistribution over a
/// prime-field subgroup of given order.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BourgainReport {
    pub q: u64,
    pub subgroup_order: u64,
    pub k1: u64,
    pub k2: u64,
    pub gcd_k1: u64,
    pub gcd_k2: u64,
    pub gcd_diff: u64,
    /// The required common value `(q-1)/#H` for the first two gcds.
    pub expected_gcd: u64,
    /// The allowed ceiling `2(q-1)/#H` for `gcd(k1 - k2, q - 1)`.
    pub diff_bound: u64,
    pub gcds_ok: bool,
    pub delta: f64,
    /// Whether `#H >= q^delta`.
    pub size_ok: bool,
}

impl BourgainReport {
    pub fn all_ok(&self) -> bool {
        self.gcds_ok && self.size_ok
    }
}

/// Checks the exponent-pair gcd conditions for the monomial sum
/// `Σ_x e((a₁ x^{k₁} + a₂ x^{k₂})/q)` induced by a subgroup of order `#H`
/// inside the units of a prime field: `k₁ = (q-1)/#H`,
/// `k₂ = (q-1)(#H-1)/#H`, both gcds with `q-1` must equal `(q-1)/#H` and
/// `gcd(k₁-k₂, q-1)` may not exceed twice that.
pub fn bourgain_condition(
    subgroup_order: u64,
    modulus: &Modulus,
    delta: f64,
) -> Result<BourgainReport> {
    if !modulus.is_prime() {
        return Err(Error::UnsupportedModulus(format!(
            "{} is not prime",
            modulus.q()
        )));
    }
    let q = modulus.q();
    let group = q - 1;
    if subgroup_order == 0 || group % subgroup_order != 0 {
        return Err(Error::InvalidIndex(format!(
            "subgroup order {subgroup_order} does not divide {group}"
        )));
    }
    let k1 = group / subgroup_order;
    let k2 = group / subgroup_order * (subgroup_order - 1);
    let gcd_k1 = gcd(k1, group);
    let gcd_k2 = if k2 == 0 { group } else { gcd(k2, group) };
    let gcd_diff = gcd(k1.abs_diff(k2), group);
    let expected = group / subgroup_order;
    let gcds_ok = gcd_k1 == expected && gcd_k2 == expected && gcd_diff <= 2 * expected;
    let size_ok = (subgroup_order as f64) >= (q as f64).powf(delta);
    Ok(BourgainReport {
        q,
        subgroup_order,
        k1,
        k2,
        gcd_k1,
        gcd_k2,
        gcd_diff,
        expected_gcd: expected,
        diff_bound: 2 * expected,
        gcds_ok,
        delta,
        size_ok,
    })
}

/// `𝒮(c₁, c₂)`: the number of unit pairs `(d₁, d₂)` with `d₁ - d₂ ≡ c₁` and
/// `d̄₁ - d̄₂ ≡ c₂ (mod q)`, by brute force over `d₁`.
pub fn pair_count(c1: u64, c2: u64, modulus: &Modulus) -> u64 {
    let ug = unit_group(modulus);
    pair_count_with_units(&ug, c1, c2)
}

/// As [`pair_count`], reusing a prepared unit-group view.
pub fn pair_count_with_units(ug: &UnitGroupView, c1: u64, c2: u64) -> u64 {
    let m = ug.modulus();
    let q = m.q();
    if q == 1 {
        return 1;
    }
    let c1 = c1 % q;
    let c2 = c2 % q;
    let inv = ug.inverse_table();
    let mut count = 0u64;
    for &d1 in ug.units() {
        let d2 = (d1 + q - c1) % q;
        let d2_inv = inv[d2 as usize];
        if d2_inv == u64::MAX {
            continue;
        }
        let d1_inv = inv[d1 as usize];
        if (d1_inv + q - d2_inv) % q == c2 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{subgroup_by_index, Modulus};

    fn modulus(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn kloosterman_direct_examples() {
        assert!((kloosterman(0, 0, &modulus(12)) - 4.0).abs() < 1e-12);
        assert!((kloosterman(1, 1, &modulus(3)) + 1.0).abs() < 1e-12);
        assert!((kloosterman(1, 1, &modulus(5)) - 0.3819660112501052).abs() < 1e-12);
        // Negative arguments reduce mod q.
        assert!((kloosterman(-4, 6, &modulus(5)) - kloosterman(1, 1, &modulus(5))).abs() < 1e-12);
    }

    #[test]
    fn twisted_examples() {
        let m5 = modulus(5);
        let chars = crate::arith::all_characters(&m5).unwrap();
        let principal = &chars[0];
        let t = twisted_kloosterman(principal, 1, 1, &m5);
        assert!((t.re - 0.3819660112501052).abs() < 1e-12);
        assert!(t.im.abs() < 1e-12);

        // The character with chi(2) = i.
        let chi = chars
            .iter()
            .find(|c| (c.value(2) - Complex64::new(0.0, 1.0)).norm() < 1e-12)
            .unwrap();
        let t = twisted_kloosterman(chi, 1, 1, &m5);
        assert!(t.re.abs() < 1e-12);
        assert!((t.im - 1.1755705045849463).abs() < 1e-12);

        for chi in &chars {
            let z = twisted_kloosterman(chi, 0, 0, &m5);
            let expected = if chi.is_principal() { 4.0 } else { 0.0 };
            assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn weil_rhs_examples() {
        let m5 = modulus(5);
        assert!((weil_rhs(1, 1, &m5) - 4.4721359549995794).abs() < 1e-12);
        let m12 = modulus(12);
        assert!((weil_rhs(0, 0, &m12) - 6.0 * 12.0).abs() < 1e-12);
        assert!((weil_rhs(5, 10, &m5) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn coset_weyl_examples() {
        let m5 = modulus(5);
        let squares = subgroup_by_index(&m5, 2, 1).unwrap();
        let w = coset_weyl_sum(&squares, 1, 1);
        assert!((w.re + 0.8090169943749474).abs() < 1e-12);
        assert!(w.im.abs() < 1e-12);

        let full = subgroup_by_index(&m5, 1, 1).unwrap();
        let w = coset_weyl_sum(&full, 1, 1);
        assert!((w.re - 0.0954915028125263).abs() < 1e-12);

        let any = subgroup_by_index(&m5, 2, 2).unwrap();
        let w = coset_weyl_sum(&any, 0, 0);
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coset_weyl_matches_character_route() {
        for (q, k, a) in [(13u64, 2u64, 1u64), (13, 3, 2), (17, 4, 3), (29, 7, 5)] {
            let m = modulus(q);
            let coset = subgroup_by_index(&m, k, a).unwrap();
            for (mm, nn) in [(1i64, 1i64), (2, 5), (0, 3), (-1, 4)] {
                let direct = coset_weyl_sum(&coset, mm, nn);
                let via_chars = coset_weyl_sum_via_characters(&coset, mm, nn).unwrap();
                assert!(
                    (direct - via_chars).norm() < 1e-9,
                    "q={q} k={k} a={a} mode=({mm},{nn}): {direct} vs {via_chars}"
                );
            }
        }
    }

    #[test]
    fn mixing_examples() {
        for q in [7u64, 13, 101] {
            let m = modulus(q);
            let z = mixing_fourier(1, Mode4::new(1, 1, -1, -1), &m).unwrap();
            assert!(
                (z - Complex64::new(1.0, 0.0)).norm() < 1e-12,
                "q={q}"
            );
        }
        let m5 = modulus(5);
        let z = mixing_fourier(2, Mode4::new(1, 0, 0, 1), &m5).unwrap();
        assert!((z.re - 0.3090169943749474).abs() < 1e-12);
        assert!(z.im.abs() < 1e-12);
        let z = mixing_fourier(3, Mode4::new(0, 0, 0, 0), &m5).unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            mixing_fourier(5, Mode4::new(1, 0, 0, 0), &m5),
            Err(Error::NotAUnit { .. })
        ));
    }

    #[test]
    fn mixing_degenerate_mode_is_one() {
        // Fixed-mode witness for equidistribution failure at bounded a:
        // mode (-a, 0, 1, 0) has combined frequencies (0, 0), so the
        // coefficient equals S(0,0;q)/phi(q) = 1 for every unit a.
        for q in [11u64, 97, 499] {
            let m = modulus(q);
            let eval = KloostermanEvaluator::new(&m);
            for a in [1u64, 2, 3, (q - 1) / 2, q - 1] {
                let mode = Mode4::new(-(a as i64), 0, 1, 0);
                let z = mixing_fourier_with(&eval, a, mode).unwrap();
                assert!(
                    (z - Complex64::new(1.0, 0.0)).norm() < 1e-9,
                    "q={q} a={a}"
                );
            }
        }
    }

    #[test]
    fn mixing_matches_direct_weyl_sum() {
        let m = modulus(13);
        for a in [1u64, 2, 5] {
            for mode in [
                Mode4::new(1, 0, 0, 0),
                Mode4::new(1, 2, -1, 1),
                Mode4::new(0, 1, 2, -2),
            ] {
                let via_kloosterman = mixing_fourier(a, mode, &m).unwrap();
                let direct = mixing_weyl_direct(a, mode, &m).unwrap();
                assert!(
                    (via_kloosterman - direct).norm() < 1e-12,
                    "a={a} mode={mode:?}"
                );
            }
        }
    }

    #[test]
    fn bourgain_examples() {
        let m13 = modulus(13);
        let r = bourgain_condition(6, &m13, 0.4).unwrap();
        assert_eq!((r.k1, r.k2), (2, 10));
        assert_eq!((r.gcd_k1, r.gcd_k2, r.gcd_diff), (2, 2, 4));
        assert_eq!(r.diff_bound, 4);
        assert!(r.gcds_ok && r.size_ok);

        let m5 = modulus(5);
        let r = bourgain_condition(4, &m5, 0.5).unwrap();
        assert_eq!((r.k1, r.k2), (1, 3));
        assert_eq!((r.gcd_k1, r.gcd_k2, r.gcd_diff), (1, 1, 2));
        assert!(r.gcds_ok);

        assert!(matches!(
            bourgain_condition(13, &m13, 0.5),
            Err(Error::InvalidIndex(_))
        ));
        assert!(matches!(
            bourgain_condition(2, &modulus(12), 0.5),
            Err(Error::UnsupportedModulus(_))
        ));
    }

    #[test]
    fn pair_count_examples() {
        let m5 = modulus(5);
        assert_eq!(pair_count(1, 2, &m5), 2);
        assert_eq!(pair_count(1, 4, &m5), 1);
        assert_eq!(pair_count(0, 0, &m5), 4);
        let m12 = modulus(12);
        assert_eq!(pair_count(0, 0, &m12), 4);
    }

    #[test]
    fn pair_count_bounded_by_two_small_primes() {
        for q in [5u64, 7, 11, 13, 17, 19, 23] {
            let m = modulus(q);
            let ug = unit_group(&m);
            for c1 in 1..q {
                for c2 in 1..q {
                    assert!(
                        pair_count_with_units(&ug, c1, c2) <= 2,
                        "q={q} c1={c1} c2={c2}"
                    );
                }
            }
        }
    }

    #[test]
    fn weil_bound_small_cubefree() {
        for q in 2..=100u64 {
            let m = modulus(q);
            if !m.is_cubefree() {
                continue;
            }
            let eval = KloostermanEvaluator::new(&m);
            for mm in 0..q {
                for nn in 0..q {
                    let s = eval.eval(mm as i64, nn as i64).abs();
                    let rhs = weil_rhs(mm as i64, nn as i64, &m);
                    assert!(s <= rhs + 1e-6, "q={q} m={mm} n={nn}: |S|={s} rhs={rhs}");
                }
            }
        }
    }

    #[test]
    fn reindexing_symmetry() {
        for q in [7u64, 12, 35] {
            let m = modulus(q);
            let ug = unit_group(&m);
            let eval = KloostermanEvaluator::new(&m);
            for &u in ug.units() {
                let u_inv = ug.inverse_of(u).unwrap();
                for (mm, nn) in [(1u64, 2u64), (3, 1), (0, 4 % q)] {
                    let lhs = eval.eval(mm as i64, nn as i64);
                    let rhs = eval.eval(
                        crate::arith::mul_mod(u, mm, q) as i64,
                        crate::arith::mul_mod(u_inv, nn, q) as i64,
                    );
                    assert!((lhs - rhs).abs() < 1e-9, "q={q} u={u}");
                }
            }
        }
    }
}
