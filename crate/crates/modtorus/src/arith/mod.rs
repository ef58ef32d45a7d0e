//! Exact integer and multiplicative-group arithmetic.
//!
//! Everything is computed over `u64` residues canonicalized to `[0, q)`, with
//! 128-bit widening on every product, so moduli up to desk scale (`q <= 1e7`)
//! are handled without overflow anywhere.

mod character;
mod factor;

pub use character::{all_characters, character, DirichletCharacter};
pub use factor::{gcd, is_prime as is_prime_u64, mul_mod, pow_mod};

use crate::{Error, Result};

/// A positive modulus with cached multiplicative data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    q: u64,
    factors: Vec<(u64, u32)>,
    phi: u64,
    tau: u64,
    is_prime: bool,
    is_cubefree: bool,
}

impl Modulus {
    /// Factorizes `q` (trial division up to 10^6, deterministic rho beyond)
    /// and caches `phi`, `tau` and the primality/cubefree flags.
    pub fn new(q: u64) -> Result<Modulus> {
        if q == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let factors = factor::factorize(q);
        let mut phi: u64 = 1;
        let mut tau: u64 = 1;
        let mut cubefree = true;
        for &(p, e) in &factors {
            phi *= p.pow(e - 1) * (p - 1);
            tau *= (e + 1) as u64;
            if e > 2 {
                cubefree = false;
            }
        }
        let is_prime = factors.len() == 1 && factors[0].1 == 1;
        Ok(Modulus {
            q,
            factors,
            phi,
            tau,
            is_prime,
            is_cubefree: cubefree,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Prime factorization, primes strictly increasing.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Euler totient.
    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Divisor count.
    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn is_prime(&self) -> bool {
        self.is_prime
    }

    /// True when no prime cube divides `q`.
    pub fn is_cubefree(&self) -> bool {
        self.is_cubefree
    }

    /// Canonical residue of a signed integer in `[0, q)`.
    pub fn reduce_signed(&self, x: i64) -> u64 {
        let q = self.q as i64;
        ((x % q + q) % q) as u64
    }

    pub fn is_unit(&self, d: u64) -> bool {
        if self.q == 1 {
            return true;
        }
        factor::gcd(d % self.q, self.q) == 1
    }

    /// True when the unit group is cyclic and supported here:
    /// `q ∈ {1, 2, 4}` or an odd prime power.
    pub fn has_cyclic_units(&self) -> bool {
        matches!(self.q, 1 | 2 | 4)
            || (self.factors.len() == 1 && self.factors[0].0 % 2 == 1)
    }
}

/// Multiplicative inverse of `d` modulo `q` via extended Euclid; the result
/// is canonical in `[0, q)`.
pub fn mod_inverse(d: u64, m: &Modulus) -> Result<u64> {
    let q = m.q;
    if q == 1 {
        return Ok(0);
    }
    let d = d % q;
    let (mut old_r, mut r) = (d as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotAUnit { d, q });
    }
    let q128 = q as i128;
    Ok(((old_s % q128 + q128) % q128) as u64)
}

/// The full unit group with its inverse table.
#[derive(Debug, Clone)]
pub struct UnitGroupView {
    modulus: Modulus,
    units: Vec<u64>,
    /// Dense table: `inverse[d]` is `d̄` when `d` is a unit, `u64::MAX` otherwise.
    inverse: Vec<u64>,
}

impl UnitGroupView {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Sorted unit residues; `phi(q)` of them.
    pub fn units(&self) -> &[u64] {
        &self.units
    }

    /// Inverse of a unit residue; `None` for non-units.
    pub fn inverse_of(&self, d: u64) -> Option<u64> {
        let d = d % self.modulus.q.max(1);
        match self.inverse.get(d as usize) {
            Some(&v) if v != u64::MAX => Some(v),
            _ => None,
        }
    }

    /// Inverse table indexed by residue, `u64::MAX` marking non-units.
    pub fn inverse_table(&self) -> &[u64] {
        &self.inverse
    }
}

/// Enumerates all units and their inverses in `O(q log q)`.
pub fn unit_group(m: &Modulus) -> UnitGroupView {
    let q = m.q;
    if q == 1 {
        return UnitGroupView {
            modulus: m.clone(),
            units: vec![0],
            inverse: vec![0],
        };
    }
    let mut units = Vec::with_capacity(m.phi as usize);
    let mut inverse = vec![u64::MAX; q as usize];
    for d in 1..q {
        if factor::gcd(d, q) == 1 {
            units.push(d);
        }
    }
    // Inverses via the involution d -> d̄: one extended Euclid per unit.
    for &d in &units {
        if inverse[d as usize] != u64::MAX {
            continue;
        }
        let inv = mod_inverse(d, m).expect("unit by construction");
        inverse[d as usize] = inv;
        inverse[inv as usize] = d;
    }
    UnitGroupView {
        modulus: m.clone(),
        units,
        inverse,
    }
}

/// Least generator of the cyclic unit group.
///
/// Supported moduli: `q ∈ {1, 2, 4}` and odd prime powers. The candidate `g`
/// is accepted once `g^(phi/p) != 1` for every prime `p | phi`.
pub fn primitive_root(m: &Modulus) -> Result<u64> {
    if !m.has_cyclic_units() {
        return Err(Error::UnsupportedModulus(format!(
            "unit group of {} is not cyclic (supported: 1, 2, 4, odd prime powers)",
            m.q
        )));
    }
    match m.q {
        1 => return Ok(0),
        2 => return Ok(1),
        4 => return Ok(3),
        _ => {}
    }
    let phi = m.phi;
    let phi_primes: Vec<u64> = factor::factorize(phi).into_iter().map(|(p, _)| p).collect();
    for g in 2..m.q {
        if factor::gcd(g, m.q) != 1 {
            continue;
        }
        if phi_primes
            .iter()
            .all(|&p| factor::pow_mod(g, phi / p, m.q) != 1)
        {
            return Ok(g);
        }
    }
    unreachable!("cyclic unit group always has a generator")
}

/// A coset `a·H` of a subgroup `H` of the unit group.
#[derive(Debug, Clone)]
pub struct SubgroupCoset {
    modulus: Modulus,
    representative: u64,
    elements: Vec<u64>,
    subgroup_order: u64,
}

impl SubgroupCoset {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn representative(&self) -> u64 {
        self.representative
    }

    /// Sorted coset elements, `subgroup_order` of them.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn subgroup_order(&self) -> u64 {
        self.subgroup_order
    }
}

/// Smallest prime `>= n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n.max(2);
    while !factor::is_prime(c) {
        c += 1;
    }
    c
}

/// `count` primes spread log-uniformly over `[lo, hi]`: the smallest prime at
/// or above each geometric anchor, deduplicated and ascending.
pub fn log_spaced_primes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let lo = lo.max(2);
    let hi = hi.max(lo);
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![next_prime(lo)];
    }
    let (lo_f, hi_f) = (lo as f64, hi as f64);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let anchor = (lo_f.ln() + t * (hi_f.ln() - lo_f.ln())).exp();
        out.push(next_prime(anchor.round() as u64));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// The `count` smallest primes `>= lo`.
pub fn first_primes_from(lo: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = lo.max(2);
    while out.len() < count {
        c = next_prime(c);
        out.push(c);
        c += 1;
    }
    out
}

/// The coset `a·H` where `H` is the unique index-`k` subgroup of a cyclic
/// unit group: `H = { g^(k·j) : 0 <= j < phi/k }`.
pub fn subgroup_by_index(m: &Modulus, k: u64, a: u64) -> Result<SubgroupCoset> {
    if k == 0 || m.phi % k != 0 {
        return Err(Error::InvalidIndex(format!(
            "index {k} does not divide phi({}) = {}",
            m.q, m.phi
        )));
    }
    let a = a % m.q.max(1);
    if !m.is_unit(a) {
        return Err(Error::NotAUnit { d: a, q: m.q });
    }
    let g = primitive_root(m)?;
    let order = m.phi / k;
    let step = factor::pow_mod(g, k, m.q.max(1));
    let mut elements = Vec::with_capacity(order as usize);
    let mut h = 1 % m.q.max(1);
    for _ in 0..order {
        elements.push(factor::mul_mod(a, h, m.q.max(1)));
        h = factor::mul_mod(h, step, m.q.max(1));
    }
    elements.sort_unstable();
    elements.dedup();
    debug_assert_eq!(elements.len() as u64, order);
    Ok(SubgroupCoset {
        modulus: m.clone(),
        representative: a,
        elements,
        subgroup_order: order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_twelve() {
        let m = Modulus::new(12).unwrap();
        assert_eq!(m.factors(), &[(2, 2), (3, 1)]);
        assert_eq!(m.phi(), 4);
        assert_eq!(m.tau(), 6);
        assert!(m.is_cubefree());
        assert!(!m.is_prime());
    }

    #[test]
    fn modulus_prime_and_cube() {
        let m = Modulus::new(997).unwrap();
        assert!(m.is_prime());
        assert_eq!(m.phi(), 996);
        let m8 = Modulus::new(8).unwrap();
        assert!(!m8.is_cubefree());
        assert!(Modulus::new(0).is_err());
    }

    #[test]
    fn mod_inverse_examples() {
        let m10 = Modulus::new(10).unwrap();
        assert_eq!(mod_inverse(3, &m10).unwrap(), 7);
        let m7 = Modulus::new(7).unwrap();
        assert_eq!(mod_inverse(1, &m7).unwrap(), 1);
        let m4 = Modulus::new(4).unwrap();
        assert_eq!(
            mod_inverse(2, &m4).unwrap_err(),
            Error::NotAUnit { d: 2, q: 4 }
        );
    }

    #[test]
    fn unit_group_examples() {
        let m5 = Modulus::new(5).unwrap();
        let ug = unit_group(&m5);
        assert_eq!(ug.units(), &[1, 2, 3, 4]);
        assert_eq!(ug.inverse_of(1), Some(1));
        assert_eq!(ug.inverse_of(2), Some(3));
        assert_eq!(ug.inverse_of(3), Some(2));
        assert_eq!(ug.inverse_of(4), Some(4));

        let m2 = Modulus::new(2).unwrap();
        assert_eq!(unit_group(&m2).units(), &[1]);

        let m12 = Modulus::new(12).unwrap();
        let ug12 = unit_group(&m12);
        assert_eq!(ug12.units(), &[1, 5, 7, 11]);
        for &d in ug12.units() {
            assert_eq!(ug12.inverse_of(d), Some(d), "units mod 12 are involutions");
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(&Modulus::new(5).unwrap()).unwrap(), 2);
        assert_eq!(primitive_root(&Modulus::new(13).unwrap()).unwrap(), 2);
        assert_eq!(primitive_root(&Modulus::new(4).unwrap()).unwrap(), 3);
        assert_eq!(primitive_root(&Modulus::new(9).unwrap()).unwrap(), 2);
        assert!(matches!(
            primitive_root(&Modulus::new(12).unwrap()),
            Err(Error::UnsupportedModulus(_))
        ));
    }

    #[test]
    fn subgroup_examples() {
        let m13 = Modulus::new(13).unwrap();
        let h = subgroup_by_index(&m13, 2, 1).unwrap();
        assert_eq!(h.elements(), &[1, 3, 4, 9, 10, 12]);
        assert_eq!(h.subgroup_order(), 6);

        let m5 = Modulus::new(5).unwrap();
        let h5 = subgroup_by_index(&m5, 2, 1).unwrap();
        assert_eq!(h5.elements(), &[1, 4]);

        let full = subgroup_by_index(&m13, 1, 1).unwrap();
        assert_eq!(full.elements().len(), 12);

        assert!(matches!(
            subgroup_by_index(&m13, 5, 1),
            Err(Error::InvalidIndex(_))
        ));
        assert!(matches!(
            subgroup_by_index(&Modulus::new(12).unwrap(), 2, 1),
            Err(Error::UnsupportedModulus(_))
        ));
    }

    #[test]
    fn coset_closure_under_translate_back() {
        let m13 = Modulus::new(13).unwrap();
        let coset = subgroup_by_index(&m13, 3, 2).unwrap();
        assert_eq!(coset.subgroup_order(), 4);
        // a^{-1} * coset must contain 1 and be multiplicatively closed.
        let a_inv = mod_inverse(2, &m13).unwrap();
        let h: Vec<u64> = coset
            .elements()
            .iter()
            .map(|&x| mul_mod(a_inv, x, 13))
            .collect();
        assert!(h.contains(&1));
        for &x in &h {
            for &y in &h {
                assert!(h.contains(&mul_mod(x, y, 13)));
            }
        }
    }

    #[test]
    fn prime_selection_helpers() {
        assert_eq!(next_prime(1), 2);
        assert_eq!(next_prime(10), 11);
        assert_eq!(next_prime(11), 11);
        assert_eq!(first_primes_from(10_000, 3), vec![10_007, 10_009, 10_037]);
        let ps = log_spaced_primes(1000, 100_000, 10);
        assert_eq!(ps.first(), Some(&1009));
        assert_eq!(ps.last(), Some(&100_003));
        assert_eq!(ps.len(), 10);
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn phi_cross_check_and_involution_smoke() {
        for q in 1..=400u64 {
            let m = Modulus::new(q).unwrap();
            let ug = unit_group(&m);
            assert_eq!(ug.units().len() as u64, m.phi(), "q={q}");
            for &d in ug.units() {
                let inv = ug.inverse_of(d).unwrap();
                if q > 1 {
                    assert_eq!(mul_mod(d, inv, q), 1, "q={q}, d={d}");
                }
                assert_eq!(ug.inverse_of(inv), Some(d));
            }
        }
    }
}
