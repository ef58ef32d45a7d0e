//! Reproducible pseudo-randomness.
//!
//! Frozen generator family, never to change without a breaking release:
//!
//! * stream seeding: SplitMix64 with increment `0x9E3779B97F4A7C15`,
//!   finalizer multipliers `0xBF58476D1CE4E5B9`, `0x94D049BB133111EB`,
//!   shifts 30/27/31;
//! * generation: xoshiro256++ (rotl 23 / shift 17 / rotl 45), state
//!   initialized from four consecutive SplitMix64 outputs;
//! * unit doubles: upper 53 bits, `(x >> 11) · 2⁻⁵³`.

/// SplitMix64 stream.
#[derive(Debug, Clone, Copy)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    /// Jump directly to the `k`-th element of the stream for this seed.
    pub fn at_offset(seed: u64, k: u64) -> SplitMix64 {
        SplitMix64 {
            state: seed.wrapping_add(k.wrapping_mul(0x9E3779B97F4A7C15)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256++ generator.
#[derive(Debug, Clone)]
pub struct Xoshiro256PlusPlus {
    s: [u64; 4],
}

impl Xoshiro256PlusPlus {
    pub fn new(seed: u64) -> Xoshiro256PlusPlus {
        let mut sm = SplitMix64::new(seed);
        Xoshiro256PlusPlus {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        to_unit(self.next_u64())
    }
}

#[inline]
pub fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The `index`-th uniform point of the stream for `seed`, independent of
/// evaluation order: sample `k` reads SplitMix64 outputs `2k` and `2k + 1`.
pub fn unit_pair_at(seed: u64, index: u64) -> (f64, f64) {
    let mut sm = SplitMix64::at_offset(seed, 2 * index);
    (to_unit(sm.next_u64()), to_unit(sm.next_u64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xoshiro_frozen_outputs() {
        // Reference outputs generated from an independent implementation of
        // the same algorithm constants.
        let mut g = Xoshiro256PlusPlus::new(1);
        let got: Vec<u64> = (0..6).map(|_| g.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                0xcfc5d07f6f03c29b,
                0xbf424132963fe08d,
                0x19a37d5757aaf520,
                0xbf08119f05cd56d6,
                0x2f47184b86186fa4,
                0x97299fcae7202345,
            ]
        );
        let mut g = Xoshiro256PlusPlus::new(0xDEADBEEF);
        assert_eq!(g.next_u64(), 0x0c520eb8fea98ede);
    }

    #[test]
    fn unit_doubles_frozen() {
        let mut g = Xoshiro256PlusPlus::new(1);
        let got: Vec<f64> = (0..4).map(|_| g.next_unit()).collect();
        let want = [
            0.8116121588818848,
            0.7471047161582187,
            0.10015090353378375,
            0.7462168706168104,
        ];
        for (g, w) in got.iter().zip(want.iter()) {
            assert_eq!(g, w);
        }
    }

    #[test]
    fn indexed_pairs_match_sequential_stream() {
        let seed = 42u64;
        let mut sm = SplitMix64::new(seed);
        let seq: Vec<f64> = (0..10).map(|_| to_unit(sm.next_u64())).collect();
        for k in 0..5u64 {
            let (a, b) = unit_pair_at(seed, k);
            assert_eq!(a, seq[2 * k as usize]);
            assert_eq!(b, seq[2 * k as usize + 1]);
        }
    }
}
