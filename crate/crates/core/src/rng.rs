//! Deterministic pseudo-random number generation for simulations.
//!
//! The generator is xoshiro256++ (Blackman & Vigna, public domain), seeded by
//! expanding a single 64-bit seed with SplitMix64. Both algorithms are fully
//! specified here in integer arithmetic, so a given seed produces the same
//! stream on every platform and toolchain. Bounded draws use rejection
//! sampling rather than a modulo reduction, so they are exactly uniform.

/// Splittable, seedable PRNG with a pinned algorithm (xoshiro256++).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRng {
    state: [u64; 4],
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let state = [
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
        ];
        SimRng { state }
    }

    /// Next value of the xoshiro256++ sequence.
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    ///
    /// Draws are rejected until they fall below the largest multiple of the
    /// span, which removes modulo bias entirely.
    pub fn gen_range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let span = hi.wrapping_sub(lo).wrapping_add(1);
        if span == 0 {
            // [0, u64::MAX]: every draw is acceptable.
            return self.next_u64();
        }
        // 2^64 mod span; draws in [2^64 - rem, 2^64) would bias the result.
        let rem = ((u64::MAX % span) + 1) % span;
        loop {
            let r = self.next_u64();
            if r <= u64::MAX - rem {
                return lo + r % span;
            }
        }
    }

    /// Uniform index into a collection of `len` elements.
    pub fn gen_index(&mut self, len: usize) -> usize {
        assert!(len > 0, "cannot pick from an empty collection");
        self.gen_range(0, len as u64 - 1) as usize
    }

    /// Uniform `f64` in `[0, 1)` using the high 53 bits of one draw.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Derive the seed of an independent stream from a master seed.
///
/// Experiments give every grid cell its own stream so that cells can run in
/// any order (or in parallel) and still reproduce bit-identical results.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut x = master ^ stream.wrapping_mul(0xA0761D6478BD642F);
    splitmix64(&mut x)
}
