//! Rational points and the group law.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::curve::WeierstrassCurve;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AffinePointQ {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

impl AffinePointQ {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        AffinePointQ::Affine { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        AffinePointQ::Affine { x: BigRational::from_integer(x.into()), y: BigRational::from_integer(y.into()) }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, AffinePointQ::Infinity)
    }
}

fn q(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

impl WeierstrassCurve {
    pub fn is_on_curve(&self, p: &AffinePointQ) -> bool {
        match p {
            AffinePointQ::Infinity => true,
            AffinePointQ::Affine { x, y } => {
                let lhs = y * y + q(&self.a1) * x * y + q(&self.a3) * y;
                let rhs = x * x * x + q(&self.a2) * x * x + q(&self.a4) * x + q(&self.a6);
                lhs == rhs
            }
        }
    }

    pub fn negate(&self, p: &AffinePointQ) -> AffinePointQ {
        match p {
            AffinePointQ::Infinity => AffinePointQ::Infinity,
            AffinePointQ::Affine { x, y } => {
                AffinePointQ::Affine { x: x.clone(), y: -y - q(&self.a1) * x - q(&self.a3) }
            }
        }
    }

    pub fn add_points(&self, p: &AffinePointQ, r: &AffinePointQ) -> AffinePointQ {
        let (x1, y1, x2, y2) = match (p, r) {
            (AffinePointQ::Infinity, _) => return r.clone(),
            (_, AffinePointQ::Infinity) => return p.clone(),
            (AffinePointQ::Affine { x: x1, y: y1 }, AffinePointQ::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let (a1, a2, a3, a4) = (q(&self.a1), q(&self.a2), q(&self.a3), q(&self.a4));
        let lambda = if x1 == x2 {
            let denom = BigRational::from_integer(2.into()) * y1 + &a1 * x1 + &a3;
            if y1 != y2 || denom.is_zero() {
                return AffinePointQ::Infinity;
            }
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            (three * x1 * x1 + two * &a2 * x1 + &a4 - &a1 * y1) / denom
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let nu = y1 - &lambda * x1;
        let x3 = &lambda * &lambda + &a1 * &lambda - &a2 - x1 - x2;
        let y3 = -(&lambda + &a1) * &x3 - &nu - &a3;
        AffinePointQ::Affine { x: x3, y: y3 }
    }

    pub fn multiply(&self, p: &AffinePointQ, k: i64) -> AffinePointQ {
        let mut base = if k < 0 { self.negate(p) } else { p.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = AffinePointQ::Infinity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add_points(&acc, &base);
            }
            base = self.add_points(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Order of a point if it is at most `bound`.
    pub fn point_order(&self, p: &AffinePointQ, bound: u32) -> Option<u32> {
        let mut acc = p.clone();
        for n in 1..=bound {
            if acc.is_infinity() {
                return Some(n);
            }
            acc = self.add_points(&acc, p);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn congruent() -> WeierstrassCurve {
        WeierstrassCurve::from_ints([0, 0, 0, -1, 0])
    }

    #[test]
    fn two_torsion_sum() {
        let e = congruent();
        let p = AffinePointQ::from_ints(1, 0);
        let r = AffinePointQ::from_ints(-1, 0);
        assert_eq!(e.add_points(&p, &r), AffinePointQ::from_ints(0, 0));
        assert_eq!(e.add_points(&p, &p), AffinePointQ::Infinity);
        assert_eq!(e.point_order(&p, 12), Some(2));
    }

    #[test]
    fn eleven_a_torsion_point_has_order_five() {
        let e = WeierstrassCurve::from_ints([0, -1, 1, -10, -20]);
        let p = AffinePointQ::from_ints(5, 5);
        assert!(e.is_on_curve(&p));
        assert_eq!(e.point_order(&p, 12), Some(5));
        assert_eq!(e.multiply(&p, -2), e.multiply(&p, 3));
    }

    // y^2 + y = x^3 - x has rank one, generated by (0, 0)
    fn rank_one() -> WeierstrassCurve {
        WeierstrassCurve::from_ints([0, 0, 1, -1, 0])
    }

    proptest! {
        #[test]
        fn group_law_on_multiples(a in -6i64..6, b in -6i64..6, c in -6i64..6) {
            let e = rank_one();
            let g = AffinePointQ::from_ints(0, 0);
            let (pa, pb, pc) = (e.multiply(&g, a), e.multiply(&g, b), e.multiply(&g, c));
            prop_assert!(e.is_on_curve(&pa));
            prop_assert_eq!(e.add_points(&pa, &pb), e.add_points(&pb, &pa));
            let left = e.add_points(&e.add_points(&pa, &pb), &pc);
            let right = e.add_points(&pa, &e.add_points(&pb, &pc));
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(left, e.multiply(&g, a + b + c));
            prop_assert_eq!(e.add_points(&pa, &e.negate(&pa)), AffinePointQ::Infinity);
        }
    }
}
