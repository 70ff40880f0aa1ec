//! Exact integer services: primality, factorization, integer roots.
//!
//! Factoring is trial division up to 10^6 followed by Brent's variant of
//! Pollard rho on whatever cofactor remains.  Cofactors below 2^127 run in
//! Montgomery form on `u128`; larger ones fall back to `BigUint`.  Every
//! random choice is seeded from the input, so factorizations are
//! reproducible across runs and threads.

mod modp;
mod mont;

pub use modp::{add_mod, inv_mod, jacobi, mul_mod, pow_mod, sqrt_mod, sub_mod};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use mont::Mont;

/// Trial division limit.
pub const TRIAL_LIMIT: u32 = 1_000_000;

/// Default effort bound in decimal digits.
pub const DEFAULT_EFFORT_DIGITS: u32 = 30;

/// Below this bound the first 13 prime bases make Miller-Rabin exact.
const DETERMINISTIC_MR_BOUND: u128 = 3_317_044_064_679_887_385_961_981;
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
/// Extra random rounds above the deterministic bound: 4^-64 = 2^-128.
const MR_RANDOM_ROUNDS: usize = 64;

/// Rho iterations spent on a cofactor larger than the effort bound before
/// giving up.
const RHO_BUDGET_ABOVE_BOUND: u64 = 1 << 22;

/// Simple sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(n / 10 + 10);
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in `[lo, hi)` using the base primes `base` (which must cover
/// `sqrt(hi)`).
pub fn primes_in_range(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    if hi <= lo {
        return Vec::new();
    }
    let lo = lo.max(2);
    if hi <= lo {
        return Vec::new();
    }
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut start = lo.div_ceil(p) * p;
        if start < p * p {
            start = p * p;
        }
        let mut j = start;
        while j < hi {
            composite[(j - lo) as usize] = true;
            j += p;
        }
    }
    composite.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| lo + i as u64).collect()
}

fn trial_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(TRIAL_LIMIT as u64))
}

/// Complete factorization of a nonzero integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigInt,
    /// `(prime, exponent)` with strictly increasing primes.
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    pub fn sign(&self) -> Sign {
        self.value.sign()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    /// Product of `prime^exponent`, i.e. `|value|`.
    pub fn product(&self) -> BigUint {
        self.factors.iter().fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors.iter().find(|(q, _)| q == p).map_or(0, |(_, e)| *e)
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn miller_rabin_mont(m: &Mont, n: u128, base: u128) -> bool {
    let a = base % n;
    if a == 0 {
        return true;
    }
    let d0 = n - 1;
    let s = d0.trailing_zeros();
    let d = d0 >> s;
    let minus_one = m.sub(0, m.one);
    let mut x = m.pow(m.enter(a), d);
    if x == m.one || x == minus_one {
        return true;
    }
    for _ in 1..s {
        x = m.mul(x, x);
        if x == minus_one {
            return true;
        }
        if x == m.one {
            return false;
        }
    }
    false
}

fn miller_rabin_big(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n1 = n - &one;
    let a = base % n;
    if a.is_zero() {
        return true;
    }
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

fn seed_of(n: &BigUint) -> u64 {
    n.iter_u64_digits().fold(0x9e37_79b9_7f4a_7c15u64, |h, d| (h ^ d).wrapping_mul(0x100_0000_01b3))
}

/// Primality test.  Exact below 3.3·10^24, error below 2^-128 above.
pub fn is_prime(q: &BigUint) -> bool {
    match q.to_u128() {
        Some(small) if small >> 127 == 0 => is_prime_u128(small),
        _ => is_prime_big(q),
    }
}

pub fn is_prime_u64(q: u64) -> bool {
    is_prime_u128(q as u128)
}

fn is_prime_big(q: &BigUint) -> bool {
    for &p in &MR_BASES {
        if (q % p).is_zero() {
            return false;
        }
    }
    if !MR_BASES.iter().all(|&b| miller_rabin_big(q, &BigUint::from(b))) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed_of(q));
    (0..MR_RANDOM_ROUNDS).all(|_| {
        let b = BigUint::from(rng.gen::<u128>()) % (q - 3u32) + 2u32;
        miller_rabin_big(q, &b)
    })
}

fn is_prime_u128(q: u128) -> bool {
    if q < 2 {
        return false;
    }
    for &p in &MR_BASES {
        let p = p as u128;
        if q == p {
            return true;
        }
        if q.is_multiple_of(p) {
            return false;
        }
    }
    if q < 43 * 43 {
        return true;
    }
    if q >> 127 != 0 {
        return is_prime_big(&BigUint::from(q));
    }
    let m = Mont::new(q);
    if !MR_BASES.iter().all(|&b| miller_rabin_mont(&m, q, b as u128)) {
        return false;
    }
    if q < DETERMINISTIC_MR_BOUND {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(q as u64 ^ (q >> 64) as u64);
    (0..MR_RANDOM_ROUNDS).all(|_| {
        let b = rng.gen::<u128>() % (q - 3) + 2;
        miller_rabin_mont(&m, q, b)
    })
}

/// `(floor(sqrt(v)), v is a perfect square)`.
pub fn isqrt(v: &BigUint) -> (BigUint, bool) {
    let r = v.sqrt();
    let exact = &r * &r == *v;
    (r, exact)
}

/// If `n = r^k` with `k >= 2` prime, returns `(r, k)`.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    // every factor left here exceeds the trial limit (> 2^19)
    let max_k = bits / 19;
    for k in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if k > max_k.max(2) {
            break;
        }
        let r = n.nth_root(k);
        if r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

fn brent_u128(n: u128, c: u128, max_iter: u64) -> Option<u128> {
    let m = Mont::new(n);
    let cm = m.enter(c);
    let f = |x: u128| m.add(m.mul(x, x), cm);
    let diff = |a: u128, b: u128| a.abs_diff(b);
    const BATCH: u64 = 128;
    let mut y = m.enter(2);
    let mut x = y;
    let mut ys = y;
    let mut q = m.one;
    let mut g: u128 = 1;
    let mut r: u64 = 1;
    let mut spent: u64 = 0;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let lim = BATCH.min(r - k);
            for _ in 0..lim {
                y = f(y);
                q = m.mul(q, diff(x, y));
            }
            g = gcd_u128(q, n);
            k += lim;
        }
        spent += 2 * r;
        r *= 2;
        if g == 1 && spent > max_iter {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd_u128(diff(x, ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn brent_big(n: &BigUint, c: u64, max_iter: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    const BATCH: u64 = 128;
    let mut y = BigUint::from(2u32);
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut r: u64 = 1;
    let mut spent: u64 = 0;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let lim = BATCH.min(r - k);
            for _ in 0..lim {
                y = f(&y);
                q = (q * diff(&x, &y)) % n;
            }
            g = q.gcd(n);
            k += lim;
        }
        spent += 2 * r;
        r *= 2;
        if g.is_one() && spent > max_iter {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// One nontrivial divisor of the composite `n` (no factors below the trial
/// limit), or `None` once the iteration budget is spent.
fn split(n: &BigUint, budget: Option<u64>) -> Option<BigUint> {
    let per_attempt = budget.unwrap_or(u64::MAX);
    let attempts = if budget.is_some() { 4 } else { u64::MAX };
    let mut c = 1u64;
    while c <= attempts {
        let found = match n.to_u128() {
            Some(small) if small >> 127 == 0 => brent_u128(small, c as u128, per_attempt).map(BigUint::from),
            _ => brent_big(n, c, per_attempt),
        };
        if found.is_some() {
            return found;
        }
        c += 1;
    }
    None
}

fn trial_divide(n: &mut BigUint, found: &mut BTreeMap<BigUint, u32>) {
    let mut primes = trial_primes().iter();
    // big phase: until the cofactor fits a machine word
    while n.to_u128().is_none() {
        let Some(&p) = primes.next() else { return };
        let mut e = 0;
        while (&*n % p).is_zero() {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            *found.entry(BigUint::from(p)).or_default() += e;
        }
    }
    let mut small = n.to_u128().unwrap();
    for &p in primes {
        let p = p as u128;
        if p * p > small {
            break;
        }
        let mut e = 0;
        while small.is_multiple_of(p) {
            small /= p;
            e += 1;
        }
        if e > 0 {
            *found.entry(BigUint::from(p)).or_default() += e;
        }
    }
    *n = BigUint::from(small);
}

fn digits(n: &BigUint) -> usize {
    n.to_str_radix(10).len()
}

/// Factor `v` completely.
///
/// Composite cofactors at most `10^effort_digits` are always split; larger
/// ones get a bounded rho attempt and otherwise yield `FactorTooHard`.
pub fn factor(v: &BigInt, effort_digits: u32) -> Result<Factorization> {
    factor_with_hints(v, &[], effort_digits)
}

/// Like [`factor`], but first divides out the given candidate primes.
/// Useful when several related numbers share large prime factors.
pub fn factor_with_hints(v: &BigInt, hints: &[BigUint], effort_digits: u32) -> Result<Factorization> {
    assert!(!v.is_zero(), "cannot factor zero");
    let mut n = v.magnitude().clone();
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();

    for h in hints {
        if h <= &BigUint::one() {
            continue;
        }
        let mut e = 0;
        while (&n % h).is_zero() {
            n /= h;
            e += 1;
        }
        if e > 0 {
            // hints may be composite; factor them on their own
            let sub = factor(&BigInt::from(h.clone()), effort_digits)?;
            for (p, k) in sub.factors {
                *found.entry(p).or_default() += k * e;
            }
        }
    }

    trial_divide(&mut n, &mut found);

    let bound = BigUint::from(10u32).pow(effort_digits);
    let mut stack = vec![(n, 1u32)];
    while let Some((c, e)) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if c < BigUint::from(TRIAL_LIMIT as u64 * TRIAL_LIMIT as u64) || is_prime(&c) {
            // below the square of the trial limit a surviving cofactor is prime
            *found.entry(c).or_default() += e;
            continue;
        }
        if let Some((r, k)) = perfect_power(&c) {
            stack.push((r, e * k));
            continue;
        }
        let budget = (c > bound).then_some(RHO_BUDGET_ABOVE_BOUND);
        match split(&c, budget) {
            Some(d) => {
                let other = &c / &d;
                stack.push((d, e));
                stack.push((other, e));
            }
            None => return Err(Error::FactorTooHard { digits: digits(&c) }),
        }
    }

    // merge duplicates that may arise from splitting into non-coprime parts
    let factors: Vec<(BigUint, u32)> = found.into_iter().collect();
    Ok(Factorization { value: v.clone(), factors })
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(v: &BigInt, p: &BigUint) -> u32 {
    debug_assert!(!v.is_zero());
    let mut n = v.magnitude().clone();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return e;
        }
        n = q;
        e += 1;
    }
}
