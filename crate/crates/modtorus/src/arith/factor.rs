//! Deterministic integer factorization: trial division through 10^6, then a
//! fixed-parameter Pollard rho fallback with Miller–Rabin primality tests on
//! a base set that is exact for all 64-bit integers.

const TRIAL_BOUND: u64 = 1_000_000;

/// Deterministic Miller–Rabin witnesses, exact for all `u64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc: u64 = 1;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in MR_BASES.iter() {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho with the polynomial x^2 + c; `c` is swept deterministically
/// from 1 upward, so the factor found for a given `n` never changes between
/// runs. Callers must pass an odd composite.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 != 0);
    for c in 1..128u64 {
        let f = |x: u64| {
            let y = mul_mod(x, x, n) + c;
            if y >= n {
                y - n
            } else {
                y
            }
        };
        let mut x = 2u64;
        let mut y = 2u64;
        loop {
            x = f(x);
            y = f(f(y));
            let d = gcd(x.abs_diff(y), n);
            if d == n {
                break; // cycle collapsed; retry with the next c
            }
            if d != 1 {
                return d;
            }
        }
    }
    // Unreachable for 64-bit composites in practice.
    let mut d = 3u64;
    while n % d != 0 {
        d += 2;
    }
    d
}

/// Full factorization of `n >= 1`, primes strictly increasing.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut factors: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return factors;
    }
    let mut rem = n;
    let mut p = 2u64;
    while p <= TRIAL_BOUND && p * p <= rem {
        if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p = if p == 2 { 3 } else { p + 2 };
    }
    if rem > 1 {
        // The part left after trial division: either prime, or a composite of
        // primes above the trial bound. Split it with rho.
        let mut stack = vec![rem];
        let mut extra: Vec<u64> = Vec::new();
        while let Some(m) = stack.pop() {
            if is_prime(m) {
                extra.push(m);
            } else {
                let d = pollard_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
        extra.sort_unstable();
        let mut i = 0;
        while i < extra.len() {
            let q = extra[i];
            let mut e = 0;
            while i < extra.len() && extra[i] == q {
                e += 1;
                i += 1;
            }
            factors.push((q, e));
        }
    }
    factors.sort_unstable_by_key(|&(p, _)| p);
    debug_assert_eq!(factors.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
    factors
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(12), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(997), vec![(997, 1)]);
        assert_eq!(factorize(8), vec![(2, 3)]);
        assert_eq!(factorize(720), vec![(2, 4), (3, 2), (5, 1)]);
    }

    #[test]
    fn factorize_beyond_trial_bound() {
        // 1000003 * 1000033 exceeds the trial bound and forces the rho path.
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(factorize(n), vec![(1_000_003, 1), (1_000_033, 1)]);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let mut sieve = vec![true; 2000];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..2000usize {
            if sieve[i] {
                let mut j = i * i;
                while j < 2000 {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        for n in 0..2000u64 {
            assert_eq!(is_prime(n), sieve[n as usize], "n={n}");
        }
    }
}
