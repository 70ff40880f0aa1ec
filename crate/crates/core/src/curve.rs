//! Integral Weierstrass models, their invariants, and global minimal models.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intarith::{self, valuation, DEFAULT_EFFORT_DIGITS};

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeierstrassCurve {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
}

/// Standard invariants of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveInvariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    /// j-invariant as a reduced fraction with positive denominator.
    pub j_num: BigInt,
    pub j_den: BigInt,
}

/// Coordinate change `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    pub u: BigInt,
    pub r: BigInt,
    pub s: BigInt,
    pub t: BigInt,
}

impl Transform {
    pub fn identity() -> Self {
        Transform { u: BigInt::one(), r: BigInt::zero(), s: BigInt::zero(), t: BigInt::zero() }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transform) -> Transform {
        let u2 = &self.u * &self.u;
        Transform {
            u: &self.u * &next.u,
            r: &self.r + &u2 * &next.r,
            s: &self.s + &self.u * &next.s,
            t: &self.t + &self.s * &u2 * &next.r + &u2 * &self.u * &next.t,
        }
    }
}

fn exact_div(a: BigInt, b: &BigInt) -> Option<BigInt> {
    let (q, r) = a.div_rem(b);
    r.is_zero().then_some(q)
}

impl WeierstrassCurve {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Self {
        WeierstrassCurve { a1, a2, a3, a4, a6 }
    }

    pub fn from_ints(a: [i64; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
        WeierstrassCurve { a1, a2, a3, a4, a6 }
    }

    pub fn coefficients(&self) -> [&BigInt; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn b_invariants(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        (b2, b4, b6, b8)
    }

    pub fn c_invariants(&self) -> (BigInt, BigInt) {
        let (b2, b4, b6, _) = self.b_invariants();
        let c4 = &b2 * &b2 - 24 * &b4;
        let c6 = -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * &b6;
        (c4, c6)
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = self.b_invariants();
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    pub fn invariants(&self) -> Result<CurveInvariants> {
        let (b2, b4, b6, b8) = self.b_invariants();
        let (c4, c6) = self.c_invariants();
        let disc = self.discriminant();
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        let c4_cubed = &c4 * &c4 * &c4;
        let g = c4_cubed.gcd(&disc);
        let mut j_num = &c4_cubed / &g;
        let mut j_den = &disc / &g;
        if j_den.is_negative() {
            j_num = -j_num;
            j_den = -j_den;
        }
        Ok(CurveInvariants { b2, b4, b6, b8, c4, c6, disc, j_num, j_den })
    }

    /// Apply a coordinate change; `None` if the result is not integral.
    pub fn transform(&self, tr: &Transform) -> Option<WeierstrassCurve> {
        let (u, r, s, t) = (&tr.u, &tr.r, &tr.s, &tr.t);
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let u2 = u * u;
        let u3 = &u2 * u;
        let n1 = a1 + 2 * s;
        let n2 = a2 - s * a1 + 3 * r - s * s;
        let n3 = a3 + r * a1 + 2 * t;
        let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        Some(WeierstrassCurve {
            a1: exact_div(n1, u)?,
            a2: exact_div(n2, &u2)?,
            a3: exact_div(n3, &u3)?,
            a4: exact_div(n4, &(&u2 * &u2))?,
            a6: exact_div(n6, &(&u3 * &u3))?,
        })
    }

    /// Translation-only change (u = 1); always integral.
    pub fn rst(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> WeierstrassCurve {
        self.transform(&Transform { u: BigInt::one(), r: r.clone(), s: s.clone(), t: t.clone() })
            .expect("u = 1 keeps the model integral")
    }

    /// Divide `a_i` by `u^i`; `None` if not integral.
    pub fn scale_down(&self, u: &BigInt) -> Option<WeierstrassCurve> {
        self.transform(&Transform { u: u.clone(), r: BigInt::zero(), s: BigInt::zero(), t: BigInt::zero() })
    }

    /// Model with `a1, a3 in {0,1}` and `a2 in {-1,0,1}` having the given
    /// c-invariants.  The invariants must satisfy Kraus' conditions.
    fn from_c_invariants(c4: &BigInt, c6: &BigInt) -> Option<WeierstrassCurve> {
        let mut b2 = (-c6).mod_floor(&BigInt::from(12));
        if b2 > BigInt::from(6) {
            b2 -= 12;
        }
        let b4 = exact_div(&b2 * &b2 - c4, &BigInt::from(24))?;
        let b6 = exact_div(-(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - c6, &BigInt::from(216))?;
        let two = BigInt::from(2);
        let a1 = b2.mod_floor(&two);
        let a3 = b6.mod_floor(&two);
        let a2 = exact_div(&b2 - &a1, &BigInt::from(4))?;
        let a4 = exact_div(&b4 - &a1 * &a3, &two)?;
        let a6 = exact_div(&b6 - &a3, &BigInt::from(4))?;
        Some(WeierstrassCurve { a1, a2, a3, a4, a6 })
    }

    fn transform_to(&self, target: &WeierstrassCurve, u: &BigInt) -> Option<Transform> {
        for u in [u.clone(), -u] {
            let Some(s) = exact_div(&u * &target.a1 - &self.a1, &BigInt::from(2)) else { continue };
            let Some(r) = exact_div(&u * &u * &target.a2 - &self.a2 + &s * &self.a1 + &s * &s, &BigInt::from(3)) else {
                continue;
            };
            let Some(t) = exact_div(&u * &u * &u * &target.a3 - &self.a3 - &r * &self.a1, &BigInt::from(2)) else {
                continue;
            };
            let tr = Transform { u, r, s, t };
            if self.transform(&tr).as_ref() == Some(target) {
                return Some(tr);
            }
        }
        None
    }
}

/// Kraus' conditions at 2 for a pair of c-invariants.
fn kraus_at_2(c4: &BigInt, c6: &BigInt) -> bool {
    let b = c6.mod_floor(&BigInt::from(32));
    let a = c4.mod_floor(&BigInt::from(16));
    let b4 = c6.mod_floor(&BigInt::from(4));
    b4 == BigInt::from(3) || (a.is_zero() && (b.is_zero() || b == BigInt::from(8)))
}

/// Global minimal model, using `primes` as the candidate primes of
/// non-minimality (any superset of the primes dividing `gcd(c6, disc)`).
pub fn minimal_model_at(c: &WeierstrassCurve, primes: &[BigUint]) -> Result<(WeierstrassCurve, Transform)> {
    let inv = c.invariants()?;
    let mut u = BigInt::one();
    for p in primes {
        let pb = BigInt::from(p.clone());
        let vd = valuation(&inv.disc, p);
        let v = if inv.c6.is_zero() { vd } else { vd.min(2 * valuation(&inv.c6, p)) };
        let mut d = v / 12;
        if d == 0 {
            continue;
        }
        if p == &BigUint::from(2u32) {
            let c4d = &inv.c4 / pb.pow(4 * d);
            let c6d = &inv.c6 / pb.pow(6 * d);
            if !kraus_at_2(&c4d, &c6d) {
                d -= 1;
            }
        } else if p == &BigUint::from(3u32) && !inv.c6.is_zero() && valuation(&inv.c6, p) == 6 * d + 2 {
            d -= 1;
        }
        u *= pb.pow(d);
    }
    if u.is_one() {
        return Ok((c.clone(), Transform::identity()));
    }
    let c4m = &inv.c4 / u.pow(4);
    let c6m = &inv.c6 / u.pow(6);
    let target = WeierstrassCurve::from_c_invariants(&c4m, &c6m)
        .expect("Kraus conditions hold after dividing by the minimal scaling");
    let tr = c.transform_to(&target, &u).expect("integral change to the minimal model exists");
    Ok((target, tr))
}

/// Global minimal model and the change of coordinates reaching it.
/// A model that is already minimal is returned unchanged.
pub fn minimal_model(c: &WeierstrassCurve) -> Result<(WeierstrassCurve, Transform)> {
    let inv = c.invariants()?;
    let g = if inv.c6.is_zero() { inv.disc.abs() } else { inv.c6.gcd(&inv.disc) };
    let f = intarith::factor(&g, DEFAULT_EFFORT_DIGITS)?;
    let primes: Vec<BigUint> = f.primes().cloned().collect();
    minimal_model_at(c, &primes)
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl FromStr for WeierstrassCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected [a1,a2,a3,a4,a6], got {s:?}")))?;
        let coeffs: Vec<BigInt> = body
            .split(',')
            .map(|t| t.trim().parse::<BigInt>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let [a1, a2, a3, a4, a6]: [BigInt; 5] = coeffs
            .try_into()
            .map_err(|v: Vec<BigInt>| Error::Parse(format!("expected 5 coefficients, got {}", v.len())))?;
        Ok(WeierstrassCurve { a1, a2, a3, a4, a6 })
    }
}
