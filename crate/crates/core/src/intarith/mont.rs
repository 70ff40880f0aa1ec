//! Montgomery arithmetic for odd moduli below 2^127.
//!
//! Residues are kept in Montgomery form `a·R mod n` with `R = 2^128`.
//! The bound `n < 2^127` keeps every intermediate REDC sum below `2^256`
//! without an extra carry word.

/// Full 128x128 -> 256 bit product, returned as `(hi, lo)`.
#[inline]
pub(crate) fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 as u64 as u128) + (p10 as u64 as u128);
    let lo = (p00 as u64 as u128) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Mont {
    pub n: u128,
    /// -n^{-1} mod 2^128
    ninv: u128,
    /// R^2 mod n
    r2: u128,
    /// R mod n, the Montgomery form of 1
    pub one: u128,
}

impl Mont {
    pub fn new(n: u128) -> Self {
        assert!(n & 1 == 1 && n >> 127 == 0 && n > 1, "modulus must be odd and below 2^127");
        let mut inv = n; // correct to 3 bits
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(n.wrapping_mul(inv)));
        }
        let ninv = inv.wrapping_neg();
        let one = (u128::MAX % n + 1) % n;
        let mut r2 = one;
        for _ in 0..128 {
            r2 <<= 1;
            if r2 >= n {
                r2 -= n;
            }
        }
        Mont { n, ninv, r2, one }
    }

    #[inline]
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let m = lo.wrapping_mul(self.ninv);
        let (mh, ml) = mul_wide(m, self.n);
        let (_, carry) = lo.overflowing_add(ml);
        let t = hi + mh + carry as u128;
        if t >= self.n {
            t - self.n
        } else {
            t
        }
    }

    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    #[inline]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.n {
            s - self.n
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.n - b
        }
    }

    pub fn enter(&self, a: u128) -> u128 {
        self.mul(a % self.n, self.r2)
    }

    #[cfg(test)]
    pub fn leave(&self, a: u128) -> u128 {
        self.redc(0, a)
    }

    pub fn pow(&self, base: u128, mut e: u128) -> u128 {
        let mut acc = self.one;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_product_matches_small_cases() {
        assert_eq!(mul_wide(u64::MAX as u128, u64::MAX as u128), (0, (u64::MAX as u128) * (u64::MAX as u128)));
        let (hi, lo) = mul_wide(u128::MAX, 2);
        assert_eq!(hi, 1);
        assert_eq!(lo, u128::MAX - 1);
    }

    #[test]
    fn montgomery_multiplication_agrees_with_u128_reference() {
        let n: u128 = 1_000_000_007;
        let m = Mont::new(n);
        for (a, b) in [(3u128, 5u128), (999_999_999, 123_456_789), (0, 17), (n - 1, n - 1)] {
            let got = m.leave(m.mul(m.enter(a), m.enter(b)));
            assert_eq!(got, a * b % n);
        }
    }

    #[test]
    fn fermat_holds_for_large_prime() {
        // 2^89 - 1 is a Mersenne prime
        let n: u128 = (1u128 << 89) - 1;
        let m = Mont::new(n);
        let a = m.enter(123_456_789_123_456_789);
        assert_eq!(m.pow(a, n - 1), m.one);
    }
}
