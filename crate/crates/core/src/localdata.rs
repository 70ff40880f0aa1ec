//! Tate's algorithm and the assembly of conductor and Tamagawa product.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::{minimal_model_at, Transform, WeierstrassCurve};
use crate::error::Result;
use crate::intarith::{self, valuation, Factorization, DEFAULT_EFFORT_DIGITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kodaira {
    I0,
    I(u32),
    II,
    III,
    IV,
    I0Star,
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reduction {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl Reduction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reduction::Good => "good",
            Reduction::SplitMultiplicative => "split-mult",
            Reduction::NonsplitMultiplicative => "nonsplit-mult",
            Reduction::Additive => "additive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub p: BigUint,
    pub kodaira: Kodaira,
    /// conductor exponent
    pub f_p: u32,
    /// Tamagawa number
    pub c_p: u32,
    pub reduction: Reduction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalArithData {
    pub minimal: WeierstrassCurve,
    /// change of coordinates from the input model to `minimal`
    pub transform: Transform,
    pub conductor: BigUint,
    pub c_fin: BigUint,
    pub locals: Vec<LocalData>,
    pub disc_min: BigInt,
}

impl GlobalArithData {
    pub fn local_at(&self, p: &BigUint) -> Option<&LocalData> {
        self.locals.iter().find(|l| &l.p == p)
    }

    pub fn bad_primes(&self) -> impl Iterator<Item = &BigUint> {
        self.locals.iter().map(|l| &l.p)
    }
}

/// Arithmetic in F_p for a prime of any size.
struct Fp {
    p: BigInt,
}

impl Fp {
    fn red(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.p)
    }

    fn divides(&self, x: &BigInt) -> bool {
        self.red(x).is_zero()
    }

    fn inv(&self, x: &BigInt) -> BigInt {
        let e = x.extended_gcd(&self.p);
        assert!(e.gcd.is_one(), "inverting a multiple of p");
        self.red(&e.x)
    }

    fn is_two(&self) -> bool {
        self.p == BigInt::from(2)
    }

    fn is_three(&self) -> bool {
        self.p == BigInt::from(3)
    }

    /// Whether `a x^2 + b x + c` has a root in F_p.
    fn quad_roots(&self, a: &BigInt, b: &BigInt, c: &BigInt) -> bool {
        let (a, b, c) = (self.red(a), self.red(b), self.red(c));
        if self.p <= BigInt::from(3) {
            let mut x = BigInt::zero();
            while x < self.p {
                if self.divides(&((&a * &x + &b) * &x + &c)) {
                    return true;
                }
                x += 1;
            }
            return false;
        }
        if a.is_zero() {
            return !b.is_zero() || c.is_zero();
        }
        let d = self.red(&(&b * &b - 4 * &a * &c));
        d.is_zero() || self.is_square(&d)
    }

    fn is_square(&self, d: &BigInt) -> bool {
        let e = (&self.p - 1) / 2;
        d.modpow(&e, &self.p).is_one()
    }

    fn polmulmod(&self, u: &[BigInt], v: &[BigInt], f: &[BigInt; 3]) -> Vec<BigInt> {
        // reduce modulo the monic cubic x^3 + f2 x^2 + f1 x + f0
        let mut prod = vec![BigInt::zero(); u.len() + v.len() - 1];
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                prod[i + j] += ui * vj;
            }
        }
        for k in (3..prod.len()).rev() {
            let lead = self.red(&prod[k]);
            if lead.is_zero() {
                continue;
            }
            prod[k - 1] -= &lead * &f[2];
            prod[k - 2] -= &lead * &f[1];
            prod[k - 3] -= &lead * &f[0];
        }
        prod.truncate(3);
        prod.iter().map(|c| self.red(c)).collect()
    }

    fn poly_gcd_degree(&self, a: Vec<BigInt>, b: Vec<BigInt>) -> usize {
        let trim = |mut v: Vec<BigInt>| {
            while v.last().is_some_and(|c| c.is_zero()) {
                v.pop();
            }
            v
        };
        let (mut a, mut b) = (trim(a), trim(b));
        while !b.is_empty() {
            let inv = self.inv(b.last().unwrap());
            while a.len() >= b.len() {
                let q = self.red(&(a.last().unwrap() * &inv));
                let shift = a.len() - b.len();
                for (i, bi) in b.iter().enumerate() {
                    a[i + shift] = self.red(&(&a[i + shift] - &q * bi));
                }
                a = trim(a);
                if a.is_empty() {
                    break;
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        a.len().saturating_sub(1)
    }

    /// Number of distinct roots of `x^3 + b x^2 + c x + d` in F_p.
    fn cubic_roots(&self, b: &BigInt, c: &BigInt, d: &BigInt) -> u32 {
        let (b, c, d) = (self.red(b), self.red(c), self.red(d));
        if self.p < BigInt::from(1000) {
            let mut n = 0;
            let mut x = BigInt::zero();
            while x < self.p {
                if self.divides(&(((&x + &b) * &x + &c) * &x + &d)) {
                    n += 1;
                }
                x += 1;
            }
            return n;
        }
        let f = [d.clone(), c.clone(), b.clone()];
        // x^p mod f by square and multiply
        let mut acc = vec![BigInt::one()];
        let x = [BigInt::zero(), BigInt::one()];
        let e = self.p.magnitude().clone();
        for i in (0..e.bits()).rev() {
            acc = self.polmulmod(&acc, &acc, &f);
            if e.bit(i) {
                acc = self.polmulmod(&acc, &x, &f);
            }
        }
        acc.resize(3, BigInt::zero());
        acc[1] = self.red(&(&acc[1] - 1));
        let cubic = vec![d, c, b, BigInt::one()];
        self.poly_gcd_degree(cubic, acc) as u32
    }
}

fn pdiv_k(x: &BigInt, pk: &BigInt) -> bool {
    (x % pk).is_zero()
}

/// Tate's algorithm at `p` for a model that is integral (and normally
/// minimal) at `p`.  Non-minimal input is scaled down and re-run.
pub fn tate_local(c: &WeierstrassCurve, p: &BigUint) -> LocalData {
    let pi = BigInt::from_biguint(Sign::Plus, p.clone());
    let fp = Fp { p: pi.clone() };
    let pi2 = &pi * &pi;
    let pi3 = &pi2 * &pi;
    let pi4 = &pi2 * &pi2;
    let pi6 = &pi3 * &pi3;
    let half = if fp.is_two() { BigInt::zero() } else { fp.inv(&BigInt::from(2)) };
    let mut cur = c.clone();
    let done = |kodaira, f_p: u32, c_p: u32, reduction| LocalData { p: p.clone(), kodaira, f_p, c_p, reduction };
    loop {
        let disc = cur.discriminant();
        let vd = valuation(&disc, p);
        if vd == 0 {
            return done(Kodaira::I0, 0, 1, Reduction::Good);
        }
        let (b2, b4, b6, _) = cur.b_invariants();
        let (c4, c6) = cur.c_invariants();
        let (r, t);
        if fp.is_two() {
            if fp.divides(&b2) {
                r = fp.red(&cur.a4);
                t = fp.red(&(((&r + &cur.a2) * &r + &cur.a4) * &r + &cur.a6));
            } else {
                let inv = fp.inv(&cur.a1);
                let rr = &inv * &cur.a3;
                t = fp.red(&(&inv * (&cur.a4 + &rr * &rr)));
                r = fp.red(&rr);
            }
        } else if fp.is_three() {
            r = if fp.divides(&b2) { fp.red(&-&b6) } else { fp.red(&(-fp.inv(&b2) * &b4)) };
            t = fp.red(&(&cur.a1 * &r + &cur.a3));
        } else {
            r = if fp.divides(&c4) {
                fp.red(&(-fp.inv(&BigInt::from(12)) * &b2))
            } else {
                fp.red(&(-fp.inv(&(12 * &c4)) * (&c6 + &b2 * &c4)))
            };
            t = fp.red(&(-&half * (&cur.a1 * &r + &cur.a3)));
        }
        cur = cur.rst(&r, &BigInt::zero(), &t);
        let (b2, _, b6, b8) = cur.b_invariants();

        if !fp.divides(&b2) {
            let (c_p, red) = if fp.quad_roots(&BigInt::one(), &cur.a1, &-&cur.a2) {
                (vd, Reduction::SplitMultiplicative)
            } else if vd.is_multiple_of(2) {
                (2, Reduction::NonsplitMultiplicative)
            } else {
                (1, Reduction::NonsplitMultiplicative)
            };
            return done(Kodaira::I(vd), 1, c_p, red);
        }
        if !pdiv_k(&cur.a6, &pi2) {
            return done(Kodaira::II, vd, 1, Reduction::Additive);
        }
        if !pdiv_k(&b8, &pi3) {
            return done(Kodaira::III, vd - 1, 2, Reduction::Additive);
        }
        if !pdiv_k(&b6, &pi3) {
            let c_p = if fp.quad_roots(&BigInt::one(), &(&cur.a3 / &pi), &(-&cur.a6 / &pi2)) { 3 } else { 1 };
            return done(Kodaira::IV, vd - 2, c_p, Reduction::Additive);
        }

        let (s, t) = if fp.is_two() {
            (fp.red(&cur.a2), &pi * fp.red(&(&cur.a6 / &pi2)))
        } else if fp.is_three() {
            (cur.a1.clone(), cur.a3.clone())
        } else {
            (fp.red(&(-&cur.a1 * &half)), fp.red(&(-&cur.a3 * &half)))
        };
        cur = cur.rst(&BigInt::zero(), &s, &t);

        let b = &cur.a2 / &pi;
        let cc = &cur.a4 / &pi2;
        let d = &cur.a6 / &pi3;
        let (bb, c2, bc) = (&b * &b, &cc * &cc, &b * &cc);
        let w = 27 * &d * &d - &bb * &c2 + 4 * &b * &bb * &d - 18 * &bc * &d + 4 * &cc * &c2;
        let x = 3 * &cc - &bb;
        let sw = if fp.divides(&w) {
            if fp.divides(&x) {
                3
            } else {
                2
            }
        } else {
            1
        };

        if sw == 1 {
            let c_p = 1 + fp.cubic_roots(&b, &cc, &d);
            return done(Kodaira::I0Star, vd - 4, c_p, Reduction::Additive);
        }

        if sw == 2 {
            let r0 = if fp.is_two() {
                fp.red(&cc)
            } else if fp.is_three() {
                fp.red(&(&cc * fp.inv(&b)))
            } else {
                fp.red(&((&bc - 9 * &d) * fp.inv(&(2 * &x))))
            };
            cur = cur.rst(&(&pi * r0), &BigInt::zero(), &BigInt::zero());
            let (mut ix, mut iy) = (3u32, 3u32);
            let mut mx = pi2.clone();
            let mut my = pi2.clone();
            let c_p;
            loop {
                let a3t = &cur.a3 / &my;
                let a6t = &cur.a6 / (&mx * &my);
                if fp.divides(&(&a3t * &a3t + 4 * &a6t)) {
                    let t = if fp.is_two() { &my * fp.red(&a6t) } else { &my * fp.red(&(-&a3t * &half)) };
                    cur = cur.rst(&BigInt::zero(), &BigInt::zero(), &t);
                    my *= &pi;
                    iy += 1;
                    let a2t = &cur.a2 / &pi;
                    let a4t = &cur.a4 / (&pi * &mx);
                    let a6t = &cur.a6 / (&mx * &my);
                    if fp.divides(&(&a4t * &a4t - 4 * &a6t * &a2t)) {
                        let r = if fp.is_two() {
                            &mx * fp.red(&(&a6t * fp.inv(&a2t)))
                        } else {
                            &mx * fp.red(&(-&a4t * fp.inv(&(2 * &a2t))))
                        };
                        cur = cur.rst(&r, &BigInt::zero(), &BigInt::zero());
                        mx *= &pi;
                        ix += 1;
                    } else {
                        c_p = if fp.quad_roots(&a2t, &a4t, &a6t) { 4 } else { 2 };
                        break;
                    }
                } else {
                    c_p = if fp.quad_roots(&BigInt::one(), &a3t, &-&a6t) { 4 } else { 2 };
                    break;
                }
            }
            return done(Kodaira::IStar(ix + iy - 5), vd + 1 - ix - iy, c_p, Reduction::Additive);
        }

        // triple root
        let r0 = if fp.is_two() {
            fp.red(&b)
        } else if fp.is_three() {
            fp.red(&-&d)
        } else {
            fp.red(&(-&b * fp.inv(&BigInt::from(3))))
        };
        cur = cur.rst(&(&pi * r0), &BigInt::zero(), &BigInt::zero());
        let a3t = &cur.a3 / &pi2;
        let a6t = &cur.a6 / &pi4;
        if !fp.divides(&(&a3t * &a3t + 4 * &a6t)) {
            let c_p = if fp.quad_roots(&BigInt::one(), &a3t, &-&a6t) { 3 } else { 1 };
            return done(Kodaira::IVStar, vd - 6, c_p, Reduction::Additive);
        }
        let t = if fp.is_two() { -&pi2 * fp.red(&a6t) } else { &pi2 * fp.red(&(-&a3t * &half)) };
        cur = cur.rst(&BigInt::zero(), &BigInt::zero(), &t);
        if !pdiv_k(&cur.a4, &pi4) {
            return done(Kodaira::IIIStar, vd - 7, 2, Reduction::Additive);
        }
        if !pdiv_k(&cur.a6, &pi6) {
            return done(Kodaira::IIStar, vd - 8, 1, Reduction::Additive);
        }
        log::debug!("model not minimal at {p}; scaling down");
        cur = cur.scale_down(&pi).expect("divisibility established by Tate's algorithm");
    }
}

/// Conductor, Tamagawa product and local data from the minimal model.
pub fn global_data(c: &WeierstrassCurve) -> Result<GlobalArithData> {
    global_data_with_hints(c, &[])
}

/// As [`global_data`], with known divisors of the discriminant to speed up
/// factoring.
pub fn global_data_with_hints(c: &WeierstrassCurve, hints: &[BigUint]) -> Result<GlobalArithData> {
    let disc = c.invariants()?.disc;
    let fact: Factorization = intarith::factor_with_hints(&disc, hints, DEFAULT_EFFORT_DIGITS)?;
    let primes: Vec<BigUint> = fact.primes().cloned().collect();
    let (minimal, transform) = minimal_model_at(c, &primes)?;
    let disc_min = minimal.discriminant();
    let mut locals = Vec::new();
    let mut conductor = BigUint::one();
    let mut c_fin = BigUint::one();
    for p in &primes {
        if valuation(&disc_min, p) == 0 {
            continue;
        }
        let ld = tate_local(&minimal, p);
        conductor *= p.pow(ld.f_p);
        c_fin *= ld.c_p;
        locals.push(ld);
    }
    debug_assert!(disc_min.abs() > BigInt::zero());
    Ok(GlobalArithData { minimal, transform, conductor, c_fin, locals, disc_min })
}
