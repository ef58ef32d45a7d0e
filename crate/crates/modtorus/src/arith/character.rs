//! Dirichlet characters modulo `q`, assembled from cyclic components per
//! prime-power factor via the Chinese remainder theorem.
//!
//! Supported moduli are products of odd prime powers with at most one factor
//! of 2 or 4; an even part divisible by 8 is rejected (the unit group mod 2^k
//! needs two generators there and nothing downstream requires it: cubefree
//! moduli never carry a factor of 8).

use num_complex::Complex64;

use super::factor::{gcd, mul_mod};
use super::{primitive_root, Modulus};
use crate::{Error, Result};

/// One cyclic component of the unit group: the units modulo `p^e`.
#[derive(Debug, Clone)]
struct Component {
    /// `p^e` for this factor.
    prime_power: u64,
    generator: u64,
    /// Order of the cyclic component, `phi(p^e)`.
    order: u64,
    /// Character index on this component, in `[0, order)`.
    index: u64,
    /// Discrete-log table: residue modulo `p^e` -> exponent of the generator,
    /// `u32::MAX` for non-units.
    dlog: Vec<u32>,
}

impl Component {
    fn build(prime_power: u64, generator: u64, order: u64, index: u64) -> Component {
        let mut dlog = vec![u32::MAX; prime_power as usize];
        let mut x = 1 % prime_power;
        for t in 0..order {
            dlog[x as usize] = t as u32;
            x = mul_mod(x, generator, prime_power);
        }
        Component {
            prime_power,
            generator,
            order,
            index,
            dlog,
        }
    }
}

/// A Dirichlet character modulo `q`, with dense value table.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: Modulus,
    components: Vec<Component>,
    values: Vec<Complex64>,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// `(prime_power, generator, order, index)` per component, factor order.
    pub fn component_data(&self) -> Vec<(u64, u64, u64, u64)> {
        self.components
            .iter()
            .map(|c| (c.prime_power, c.generator, c.order, c.index))
            .collect()
    }

    /// Value at a residue; zero for non-units, a complex unit otherwise.
    #[inline]
    pub fn value(&self, d: u64) -> Complex64 {
        let q = self.modulus.q().max(1);
        self.values[(d % q) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_principal(&self) -> bool {
        self.components.iter().all(|c| c.index == 0)
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.components
            .iter()
            .map(|c| c.order / gcd(c.order, c.index))
            .fold(1u64, lcm)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn components_for(m: &Modulus) -> Result<Vec<(u64, u64, u64)>> {
    // (prime_power, generator, order) per factor.
    let mut out = Vec::new();
    for &(p, e) in m.factors() {
        if p == 2 {
            match e {
                1 => out.push((2, 1, 1)),
                2 => out.push((4, 3, 2)),
                _ => {
                    return Err(Error::UnsupportedModulus(format!(
                        "characters modulo {} unsupported: even part divisible by 8",
                        m.q()
                    )))
                }
            }
        } else {
            let pe = p.pow(e);
            let comp = Modulus::new(pe).expect("prime power is positive");
            let g = primitive_root(&comp)?;
            out.push((pe, g, comp.phi()));
        }
    }
    Ok(out)
}

/// The character determined by one index per prime-power factor (factor
/// order, indices reduced modulo the component orders). On a component with
/// generator `g` of order `n` and index `j`, the value at `g^t` is `e(jt/n)`.
pub fn character(m: &Modulus, index_spec: &[u64]) -> Result<DirichletCharacter> {
    let comps = components_for(m)?;
    if index_spec.len() != comps.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} component indices for q = {}, got {}",
            comps.len(),
            m.q(),
            index_spec.len()
        )));
    }
    let components: Vec<Component> = comps
        .iter()
        .zip(index_spec)
        .map(|(&(pe, g, ord), &j)| Component::build(pe, g, ord, j % ord))
        .collect();
    Ok(assemble(m, components))
}

fn assemble(m: &Modulus, components: Vec<Component>) -> DirichletCharacter {
    let q = m.q().max(1);
    // Common denominator for the phase fractions.
    let den = components.iter().map(|c| c.order).fold(1u64, lcm);
    let roots: Vec<Complex64> = (0..den)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * (j as f64) / (den as f64);
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); q as usize];
    'res: for d in 0..q {
        let mut num: u64 = 0;
        for c in &components {
            let t = c.dlog[(d % c.prime_power) as usize];
            if t == u32::MAX {
                continue 'res;
            }
            // j * t / order contributes (j * t * (den/order)) mod den.
            let contrib = (c.index as u128 * t as u128 % den as u128)
                * (den / c.order) as u128
                % den as u128;
            num = ((num as u128 + contrib) % den as u128) as u64;
        }
        values[d as usize] = roots[num as usize];
    }
    DirichletCharacter {
        modulus: m.clone(),
        components,
        values,
    }
}

/// All `phi(q)` characters modulo `q`, in lexicographic index order
/// (first factor's index varies slowest). The first entry is principal.
pub fn all_characters(m: &Modulus) -> Result<Vec<DirichletCharacter>> {
    let comps = components_for(m)?;
    let orders: Vec<u64> = comps.iter().map(|c| c.2).collect();
    let total: u64 = orders.iter().product();
    debug_assert_eq!(total, m.phi());
    let mut out = Vec::with_capacity(total as usize);
    let mut indices = vec![0u64; orders.len()];
    loop {
        let components: Vec<Component> = comps
            .iter()
            .zip(&indices)
            .map(|(&(pe, g, ord), &j)| Component::build(pe, g, ord, j))
            .collect();
        out.push(assemble(m, components));
        // Increment the mixed-radix counter, last component fastest.
        let mut pos = orders.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < orders[pos] {
                break;
            }
            indices[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::unit_group;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn principal_character_mod_five() {
        let m = Modulus::new(5).unwrap();
        let chi = character(&m, &[0]).unwrap();
        assert!(chi.is_principal());
        for d in 1..5 {
            assert!(close(chi.value(d), Complex64::new(1.0, 0.0)));
        }
        assert!(close(chi.value(0), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn order_four_character_mod_five() {
        let m = Modulus::new(5).unwrap();
        let chi = character(&m, &[1]).unwrap();
        assert!(close(chi.value(2), Complex64::new(0.0, 1.0)));
        assert!(close(chi.value(4), Complex64::new(-1.0, 0.0)));
        assert!(close(chi.value(3), Complex64::new(0.0, -1.0)));
        assert_eq!(chi.order(), 4);
    }

    #[test]
    fn legendre_character_mod_five() {
        let m = Modulus::new(5).unwrap();
        let chi = character(&m, &[2]).unwrap();
        assert!(close(chi.value(2), Complex64::new(-1.0, 0.0)));
        assert!(close(chi.value(4), Complex64::new(1.0, 0.0)));
        assert_eq!(chi.order(), 2);
    }

    #[test]
    fn eight_divides_q_rejected() {
        let m = Modulus::new(8).unwrap();
        assert!(matches!(
            character(&m, &[0]),
            Err(Error::UnsupportedModulus(_))
        ));
        let m24 = Modulus::new(24).unwrap();
        assert!(all_characters(&m24).is_err());
    }

    #[test]
    fn characters_are_multiplicative_and_unimodular() {
        for q in [5u64, 12, 45, 60, 97] {
            let m = Modulus::new(q).unwrap();
            let chars = all_characters(&m).unwrap();
            assert_eq!(chars.len() as u64, m.phi());
            let ug = unit_group(&m);
            for chi in &chars {
                for &d in ug.units() {
                    assert!((chi.value(d).norm() - 1.0).abs() < 1e-12);
                }
                for &d1 in ug.units().iter().take(12) {
                    for &d2 in ug.units().iter().take(12) {
                        let lhs = chi.value(mul_mod(d1, d2, q));
                        let rhs = chi.value(d1) * chi.value(d2);
                        assert!(close(lhs, rhs), "q={q} d1={d1} d2={d2}");
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_column_sums() {
        // sum over all characters of chi(x) is phi(q) at x = 1 and 0 elsewhere;
        // this is the (d, e) pair orthogonality after substituting x = d * ē.
        for q in [5u64, 13, 97, 499] {
            let m = Modulus::new(q).unwrap();
            let chars = all_characters(&m).unwrap();
            let ug = unit_group(&m);
            for &x in ug.units() {
                let mut s = Complex64::new(0.0, 0.0);
                for chi in &chars {
                    s += chi.value(x);
                }
                let expected = if x == 1 { m.phi() as f64 } else { 0.0 };
                assert!(
                    (s - Complex64::new(expected, 0.0)).norm() < 1e-10 * m.phi() as f64,
                    "q={q} x={x} sum={s}"
                );
            }
        }
    }

    #[test]
    fn pairwise_orthogonality_mod_thirteen() {
        let m = Modulus::new(13).unwrap();
        let chars = all_characters(&m).unwrap();
        let ug = unit_group(&m);
        for &d in ug.units() {
            for &e in ug.units() {
                let mut s = Complex64::new(0.0, 0.0);
                for chi in &chars {
                    s += chi.value(d) * chi.value(e).conj();
                }
                s /= m.phi() as f64;
                let expected = if d == e { 1.0 } else { 0.0 };
                assert!((s - Complex64::new(expected, 0.0)).norm() < 1e-10);
            }
        }
    }
}
