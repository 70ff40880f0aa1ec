//! Thin layer over astro-float: a precision context and exact conversions.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub const RM: RoundingMode = RoundingMode::ToEven;

/// Bits needed to carry `digits` decimal digits, plus one guard word.
pub fn bits_for_digits(digits: u32) -> usize {
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
    bits.div_ceil(64) * 64
}

pub struct Ctx {
    pub p: usize,
    pub cc: Consts,
}

impl Ctx {
    pub fn new(p: usize) -> Self {
        Ctx { p, cc: Consts::new().expect("constants cache") }
    }

    pub fn with_digits(digits: u32) -> Self {
        Self::new(bits_for_digits(digits))
    }

    pub fn int(&self, i: i64) -> BigFloat {
        BigFloat::from_i64(i, self.p)
    }

    pub fn big(&mut self, n: &BigInt) -> BigFloat {
        BigFloat::parse(&n.to_string(), Radix::Dec, self.p, RM, &mut self.cc)
    }

    pub fn f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, RM)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }
}

/// Rational value of a finite BigFloat, accurate to its precision.
pub fn to_rational(x: &BigFloat) -> BigRational {
    assert!(!x.is_nan() && !x.is_inf(), "non-finite value");
    if x.is_zero() {
        return BigRational::zero();
    }
    // Display is `[-]d.ddde[+-]x`
    let s = x.to_string();
    let (mant, exp) = s.split_once('e').expect("scientific notation");
    let exp: i64 = exp.parse().expect("exponent");
    let (int_part, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: BigInt = format!("{int_part}{frac}").parse().expect("mantissa");
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string().parse().expect("decimal float")
}

/// `10^-k` as a BigFloat.
pub fn ten_pow_neg(ctx: &Ctx, k: u32) -> BigFloat {
    let ten = ctx.int(10);
    ctx.div(&ctx.int(1), &ten.powi(k as usize, ctx.p, RM))
}

/// Nearest integer to a rational, ties away from zero.
pub fn round_rational(x: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if x >= &BigRational::zero() {
        (x + &half).floor().to_integer()
    } else {
        (x - &half).ceil().to_integer()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn rational_roundtrip() {
        let mut ctx = Ctx::with_digits(40);
        let x = ctx.big(&"123456789012345678901234567890".parse().unwrap());
        assert_eq!(to_rational(&x), BigRational::from_integer("123456789012345678901234567890".parse().unwrap()));
        let third = ctx.div(&ctx.int(1), &ctx.int(3));
        let r = to_rational(&third);
        let err = (r - BigRational::new(1.into(), 3.into())) * BigRational::from_integer(BigInt::from(10).pow(40));
        assert!(err.abs() < BigRational::one());
        assert_eq!(to_rational(&ctx.int(-12)), BigRational::from_integer((-12).into()));
        assert_eq!(to_rational(&ctx.int(0)), BigRational::zero());
    }

    #[test]
    fn f64_conversion_and_rounding() {
        let ctx = Ctx::with_digits(30);
        let x = ctx.div(&ctx.int(-7), &ctx.int(8));
        assert_eq!(to_f64(&x), -0.875);
        assert_eq!(round_rational(&BigRational::new(5.into(), 2.into())), 3.into());
        assert_eq!(round_rational(&BigRational::new((-5).into(), 2.into())), (-3).into());
        assert_eq!(round_rational(&BigRational::new(7.into(), 3.into())), 2.into());
        assert!((to_f64(&ten_pow_neg(&ctx, 5)) - 1e-5).abs() < 1e-20);
    }
}
