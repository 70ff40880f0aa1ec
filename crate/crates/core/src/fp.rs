//! Point counting over prime fields.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::intarith::{add_mod, inv_mod, jacobi, mul_mod, sqrt_mod, sub_mod};

/// Primes below this are counted by enumerating `x` against a table of squares.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 11;

/// Below this bound a single point need not pin down the group order on the
/// curve or on its twist, so the baby-step/giant-step path is never used.
const MESTRE_MIN: u64 = 230;

pub fn reduce_mod(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in u64")
}

/// `#E(F_p)` including the point at infinity for a model with good reduction at `p`.
pub fn count_points_mod_p(c: &WeierstrassCurve, p: u64) -> Result<u64> {
    if reduce_mod(&c.discriminant(), p) == 0 {
        return Err(Error::BadReduction { p });
    }
    if p < 5 {
        return Ok(count_general_small(c, p));
    }
    let (c4, c6) = c.c_invariants();
    let a = sub_mod(0, mul_mod(27, reduce_mod(&c4, p), p), p);
    let b = sub_mod(0, mul_mod(54, reduce_mod(&c6, p), p), p);
    Ok(count_points_short(a, b, p))
}

/// Brute force on the full Weierstrass equation; used for p = 2, 3.
fn count_general_small(c: &WeierstrassCurve, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = c.coefficients().map(|v| reduce_mod(v, p));
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let lhs = (y * y + a1 * x * y + a3 * y) % p;
            let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// `#E(F_p)` for `y^2 = x^3 + a x + b`, `p >= 5`, nonzero discriminant.
pub fn count_points_short(a: u64, b: u64, p: u64) -> u64 {
    debug_assert!(p >= 5);
    if p < EXHAUSTIVE_LIMIT || p < MESTRE_MIN {
        count_exhaustive(a, b, p)
    } else {
        count_bsgs(a, b, p)
    }
}

pub fn count_exhaustive(a: u64, b: u64, p: u64) -> u64 {
    assert!(p < 1 << 32, "enumeration is for small primes");
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    let mut sq = 0u64;
    for i in 1..=(p - 1) / 2 {
        // i^2 = (i-1)^2 + 2i - 1
        sq += 2 * i - 1;
        if sq >= p {
            sq %= p;
        }
        chi[sq as usize] = 1;
    }
    // f(x) = x^3 + a x + b by forward differences:
    // f(x+1) - f(x) = 3x^2 + 3x + 1 + a, whose own difference is 6x + 6
    let step = |v: u64, d: u64| {
        let s = v + d;
        if s >= p {
            s - p
        } else {
            s
        }
    };
    let (mut f, mut d1, mut d2) = (b % p, (1 + a) % p, 6 % p);
    let six = 6 % p;
    let mut sum: i64 = 0;
    for _ in 0..p {
        sum += chi[f as usize] as i64;
        f = step(f, d1);
        d1 = step(d1, d2);
        d2 = step(d2, six);
    }
    (p as i64 + 1 + sum) as u64
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Pt {
    Inf,
    A(u64, u64),
}

#[derive(Clone, Copy)]
struct Short {
    a: u64,
    b: u64,
    p: u64,
}

impl Short {
    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        add_mod(mul_mod(add_mod(mul_mod(x, x, p), self.a, p), x, p), self.b, p)
    }

    fn add(&self, u: Pt, v: Pt) -> Pt {
        let p = self.p;
        let (x1, y1, x2, y2) = match (u, v) {
            (Pt::Inf, _) => return v,
            (_, Pt::Inf) => return u,
            (Pt::A(x1, y1), Pt::A(x2, y2)) => (x1, y1, x2, y2),
        };
        let l = if x1 == x2 {
            if add_mod(y1, y2, p) == 0 {
                return Pt::Inf;
            }
            let num = add_mod(mul_mod(3, mul_mod(x1, x1, p), p), self.a, p);
            mul_mod(num, inv_mod(add_mod(y1, y1, p), p).expect("nonzero"), p)
        } else {
            mul_mod(sub_mod(y2, y1, p), inv_mod(sub_mod(x2, x1, p), p).expect("nonzero"), p)
        };
        let x3 = sub_mod(sub_mod(mul_mod(l, l, p), x1, p), x2, p);
        let y3 = sub_mod(mul_mod(l, sub_mod(x1, x3, p), p), y1, p);
        Pt::A(x3, y3)
    }

    fn mul(&self, q: Pt, mut k: u64) -> Pt {
        let mut acc = Pt::Inf;
        let mut base = q;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Pt {
        loop {
            let x = rng.gen_range(0..self.p);
            if let Some(y) = sqrt_mod(self.rhs(x), self.p) {
                if y != 0 {
                    return Pt::A(x, y);
                }
            }
        }
    }

    /// The unique `m` in `[lo, hi]` with `m q = 0`, if there is exactly one.
    fn unique_annihilator(&self, q: Pt, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo + 1;
        let s = ((width as f64).sqrt().ceil() as u64).max(1);
        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(s as usize + 1);
        let mut cur = Pt::Inf;
        for j in 0..=s {
            match cur {
                Pt::Inf if j > 0 => return None,
                Pt::Inf => {}
                Pt::A(x, y) => {
                    if baby.insert(x, (j, y)).is_some() {
                        return None;
                    }
                }
            }
            cur = self.add(cur, q);
        }
        let step = self.mul(q, 2 * s + 1);
        let mut giant = self.mul(q, lo + s);
        let mut found: Option<u64> = None;
        let mut base = lo + s;
        // giant covers base - s ..= base + s
        while base - s <= hi {
            let hit = match giant {
                Pt::Inf => Some(base),
                // giant == j q gives (base - j) q = 0, giant == -j q gives (base + j) q = 0
                Pt::A(x, y) => baby.get(&x).map(|&(j, yj)| if yj == y { base - j } else { base + j }),
            };
            if let Some(m) = hit.filter(|m| (lo..=hi).contains(m) && found != Some(*m)) {
                if found.is_some() {
                    return None;
                }
                found = Some(m);
            }
            giant = self.add(giant, step);
            base += 2 * s + 1;
        }
        found
    }
}

fn hasse_interval(p: u64) -> (u64, u64) {
    let w = num_integer::sqrt(4 * p as u128) as u64;
    (p + 1 - w, p + 1 + w)
}

/// Baby-step/giant-step order finding, alternating between the curve and a
/// quadratic twist until one point has a single multiple in the Hasse interval.
pub fn count_bsgs(a: u64, b: u64, p: u64) -> u64 {
    assert!(p >= MESTRE_MIN);
    let e = Short { a, b, p };
    let mut d = 2;
    while jacobi(d, p) != -1 {
        d += 1;
    }
    let d2 = mul_mod(d, d, p);
    let twist = Short { a: mul_mod(a, d2, p), b: mul_mod(b, mul_mod(d2, d, p), p), p };
    let (lo, hi) = hasse_interval(p);
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ a.rotate_left(21) ^ b.rotate_left(42));
    for _ in 0..256 {
        let q = e.random_point(&mut rng);
        if let Some(m) = e.unique_annihilator(q, lo, hi) {
            return m;
        }
        let q = twist.random_point(&mut rng);
        if let Some(m) = twist.unique_annihilator(q, lo, hi) {
            return 2 * p + 2 - m;
        }
    }
    log::warn!("order finding slow to settle at p = {p}");
    for _ in 0..65_536 {
        let q = e.random_point(&mut rng);
        if let Some(m) = e.unique_annihilator(q, lo, hi) {
            return m;
        }
        let q = twist.random_point(&mut rng);
        if let Some(m) = twist.unique_annihilator(q, lo, hi) {
            return 2 * p + 2 - m;
        }
    }
    panic!("no point with a unique multiple in the Hasse interval at p = {p}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intarith::primes_up_to;
    use proptest::prelude::{any, prop_assert, prop_assume, proptest};

    #[test]
    fn congruent_number_curve_small_primes() {
        let e = WeierstrassCurve::from_ints([0, 0, 0, -1, 0]);
        assert_eq!(count_points_mod_p(&e, 5).unwrap(), 8);
        assert_eq!(count_points_mod_p(&e, 3).unwrap(), 4);
        assert_eq!(count_points_mod_p(&e, 2), Err(Error::BadReduction { p: 2 }));
    }

    #[test]
    fn eleven_a_counts() {
        // a_p of 11a1 for p = 2, 3, 5, 7, 13: -2, -1, 1, -2, 4
        let e = WeierstrassCurve::from_ints([0, -1, 1, -10, -20]);
        for (p, ap) in [(2u64, -2i64), (3, -1), (5, 1), (7, -2), (13, 4)] {
            assert_eq!(count_points_mod_p(&e, p).unwrap() as i64, p as i64 + 1 - ap);
        }
        assert_eq!(count_points_mod_p(&e, 11), Err(Error::BadReduction { p: 11 }));
    }

    #[test]
    fn p_two_counts_lie_in_hasse_range() {
        for a in 0..2i64 {
            for b in 0..2i64 {
                for c in 0..2i64 {
                    for d in 0..2i64 {
                        for f in 0..2i64 {
                            let e = WeierstrassCurve::from_ints([a, b, c, d, f]);
                            if let Ok(n) = count_points_mod_p(&e, 2) {
                                assert!((1..=5).contains(&n));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_matches_character_sum() {
        for p in [5u64, 7, 11, 13, 101, 1009] {
            for (a, b) in [(1u64, 1u64), (0, 3), (p - 1, 0), (2, p - 5)] {
                let naive: i64 = (0..p)
                    .map(|x| {
                        let f = (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(a, x, p) + b) % p;
                        if f == 0 {
                            0
                        } else {
                            jacobi(f, p) as i64
                        }
                    })
                    .sum();
                assert_eq!(count_exhaustive(a % p, b % p, p) as i64, p as i64 + 1 + naive);
            }
        }
    }

    #[test]
    fn bsgs_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in primes_up_to(20_000).into_iter().filter(|&p| p >= 230).step_by(37) {
            for _ in 0..3 {
                let (a, b) = (rng.gen_range(0..p), rng.gen_range(0..p));
                let disc = add_mod(mul_mod(4, mul_mod(a, mul_mod(a, a, p), p), p), mul_mod(27, mul_mod(b, b, p), p), p);
                if disc == 0 {
                    continue;
                }
                assert_eq!(count_bsgs(a, b, p), count_exhaustive(a, b, p), "p={p} a={a} b={b}");
            }
        }
    }

    #[test]
    fn bsgs_on_supersingular_and_special_curves() {
        // j = 0 and j = 1728 curves have large automorphism groups
        for p in [233u64, 239, 1009, 1013, 65_537, 1_000_003] {
            for (a, b) in [(0u64, 1u64), (1, 0), (p - 1, 0), (0, p - 1), (0, 2)] {
                if p < 100_000 {
                    assert_eq!(count_bsgs(a, b, p), count_exhaustive(a, b, p));
                } else {
                    let n = count_bsgs(a, b, p) as i64;
                    let t = p as i64 + 1 - n;
                    assert!(t * t <= 4 * p as i64);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn hasse_bound_holds(a in any::<u32>(), b in any::<u32>(), idx in 0usize..2000) {
            let p = [5u64, 7, 101, 65_521, 65_537, 1_000_003, 10_000_019, 99_999_989][idx % 8];
            let (a, b) = (a as u64 % p, b as u64 % p);
            let disc = add_mod(mul_mod(4, mul_mod(a, mul_mod(a, a, p), p), p), mul_mod(27, mul_mod(b, b, p), p), p);
            prop_assume!(disc != 0);
            let n = count_points_short(a, b, p) as i128;
            let t = p as i128 + 1 - n;
            prop_assert!(t * t <= 4 * p as i128);
        }
    }
}
