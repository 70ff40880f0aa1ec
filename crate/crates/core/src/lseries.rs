//! Real period and the truncated L-series at s = 1.

use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::ap::{AnSieve, ApTable, DEFAULT_BLOCK};
use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::localdata::GlobalArithData;
use crate::numeric::{bits_for_digits, to_f64, Ctx, RM};

pub const DEFAULT_MAX_TERMS: u64 = 100_000_000;

/// Real period data of a minimal model.
#[derive(Clone, Debug)]
pub struct PeriodData {
    /// least positive real period of the Néron differential
    pub omega: BigFloat,
    /// `omega` if E(R) is connected, `2 omega` otherwise
    pub c_infty: BigFloat,
    pub connected: bool,
    pub agm_iterations: u32,
}

impl PeriodData {
    pub fn omega_f64(&self) -> f64 {
        to_f64(&self.omega)
    }

    pub fn c_infty_f64(&self) -> f64 {
        to_f64(&self.c_infty)
    }
}

fn horner(ctx: &Ctx, coeffs: &[BigFloat], x: &BigFloat) -> BigFloat {
    let mut acc = coeffs[0].clone();
    for c in &coeffs[1..] {
        acc = ctx.add(&ctx.mul(&acc, x), c);
    }
    acc
}

/// Root of `f` in `[lo, hi]` given a sign change, by bisection.
fn bisect(ctx: &Ctx, f: &[BigFloat], mut lo: BigFloat, mut hi: BigFloat, iters: usize) -> BigFloat {
    let two = ctx.int(2);
    let lo_neg = horner(ctx, f, &lo).is_negative();
    for _ in 0..iters {
        let mid = ctx.div(&ctx.add(&lo, &hi), &two);
        let v = horner(ctx, f, &mid);
        if v.is_zero() {
            return mid;
        }
        if v.is_negative() == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ctx.div(&ctx.add(&lo, &hi), &two)
}

fn agm(ctx: &Ctx, mut a: BigFloat, mut b: BigFloat) -> (BigFloat, u32) {
    let two = ctx.int(2);
    let mut it = 0;
    loop {
        let diff = ctx.sub(&a, &b);
        let close = match (diff.exponent(), a.exponent()) {
            (Some(ed), Some(ea)) => !diff.is_zero() && (ea as i64 - ed as i64) >= ctx.p as i64 - 8,
            _ => true,
        };
        if close || diff.is_zero() || it >= 200 {
            return (a, it);
        }
        let an = ctx.div(&ctx.add(&a, &b), &two);
        b = ctx.sqrt(&ctx.mul(&a, &b));
        a = an;
        it += 1;
    }
}

/// Real period of a minimal model, to about `digits` decimal digits.
pub fn real_period(c: &WeierstrassCurve, digits: u32) -> Result<PeriodData> {
    let inv = c.invariants()?;
    let r_int: BigInt = [inv.b2.abs(), inv.b4.abs() * 2, inv.b6.abs()].into_iter().max().unwrap() / 4 + 2;
    let log2_r = r_int.bits() as usize;
    // extra room so root differences of size ~1/R^2 keep `digits` digits
    let p = bits_for_digits(digits) + 4 * log2_r + 64;
    let mut ctx = Ctx::new(p.div_ceil(64) * 64);
    let b2 = ctx.big(&inv.b2);
    let b4 = ctx.big(&inv.b4);
    let b6 = ctx.big(&inv.b6);
    let cubic = [ctx.int(4), b2.clone(), ctx.mul(&ctx.int(2), &b4), b6];
    let pi = ctx.pi();
    let r = ctx.big(&r_int);
    let neg_r = r.neg();
    let iters = p + 2 * log2_r + 16;
    let twelve = ctx.int(12);
    let c4f = ctx.big(&inv.c4);
    let sqrt_c4 = if inv.c4.is_positive() { ctx.sqrt(&c4f) } else { ctx.int(0) };
    let crit = |ctx: &Ctx, sign: i64| ctx.div(&ctx.add(&b2.neg(), &ctx.mul(&ctx.int(sign), &sqrt_c4)), &twelve);
    let connected = inv.disc.is_negative();
    let (omega, its) = if !connected {
        let (xm, xp) = (crit(&ctx, -1), crit(&ctx, 1));
        let e3 = bisect(&ctx, &cubic, neg_r, xm.clone(), iters);
        let e2 = bisect(&ctx, &cubic, xm, xp.clone(), iters);
        let e1 = bisect(&ctx, &cubic, xp, r, iters);
        let (g, its) = agm(&ctx, ctx.sqrt(&ctx.sub(&e1, &e3)), ctx.sqrt(&ctx.sub(&e1, &e2)));
        (ctx.div(&pi, &g), its)
    } else {
        let e1 = if inv.c4.is_positive() {
            let (xm, xp) = (crit(&ctx, -1), crit(&ctx, 1));
            if horner(&ctx, &cubic, &xm).is_positive() {
                bisect(&ctx, &cubic, neg_r, xm, iters)
            } else {
                bisect(&ctx, &cubic, xp, r, iters)
            }
        } else {
            bisect(&ctx, &cubic, neg_r, r, iters)
        };
        let three = ctx.int(3);
        let four = ctx.int(4);
        let two = ctx.int(2);
        let a = ctx.add(&ctx.mul(&three, &e1), &ctx.div(&b2, &four));
        let bsq = ctx.add(
            &ctx.add(&ctx.mul(&three, &ctx.mul(&e1, &e1)), &ctx.mul(&ctx.div(&b2, &two), &e1)),
            &ctx.div(&b4, &two),
        );
        let b = ctx.sqrt(&bsq);
        let (g, its) = agm(&ctx, ctx.mul(&two, &ctx.sqrt(&b)), ctx.sqrt(&ctx.add(&ctx.mul(&two, &b), &a)));
        (ctx.div(&ctx.mul(&two, &pi), &g), its)
    };
    let c_infty = if connected { omega.clone() } else { ctx.mul(&ctx.int(2), &omega) };
    Ok(PeriodData { omega, c_infty, connected, agm_iterations: its })
}

/// Smallest `m` with `(s/2pi)(2 log 2 + k log 10 - log(1 - e^{-2pi/s})) <= m`
/// where `s` is the given square root of the conductor.
fn terms_for_sqrt(ctx: &mut Ctx, s: &BigFloat, k: u32) -> u64 {
    let pi = ctx.pi();
    let two_pi = ctx.mul(&ctx.int(2), &pi);
    let x = ctx.div(&two_pi, s);
    let e = ctx.exp(&x.neg());
    let one_minus = ctx.sub(&ctx.int(1), &e);
    let ln2 = ctx.ln(&ctx.int(2));
    let ln10 = ctx.ln(&ctx.int(10));
    let ln_tail = ctx.ln(&one_minus);
    let inner = ctx.sub(&ctx.add(&ctx.mul(&ctx.int(2), &ln2), &ctx.mul(&ctx.int(k as i64), &ln10)), &ln_tail);
    let bound = ctx.mul(&ctx.div(s, &two_pi), &inner);
    let rat = crate::numeric::to_rational(&bound);
    rat.ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(1)
}

fn sqrt_ctx(n: &BigUint, k: u32) -> Ctx {
    Ctx::with_digits(n.to_string().len() as u32 / 2 + k + 40)
}

/// Number of terms needed so the truncated sum is within `10^-k` of L(E,1).
pub fn terms_needed(n: &BigUint, k: u32) -> u64 {
    let mut ctx = sqrt_ctx(n, k);
    let nf = ctx.big(&BigInt::from(n.clone()));
    let s = ctx.sqrt(&nf);
    terms_for_sqrt(&mut ctx, &s, k)
}

/// Result of summing the truncated series.
#[derive(Clone, Debug)]
pub struct LTruncation {
    pub m: u64,
    /// `2 sum_{n<=m} a_n/n exp(-2 pi n / sqrt N)`
    pub s_m: BigFloat,
    /// `(1 + w) sum_{n<=m} a_n/n exp(-2 pi n / sqrt N)`, the approximation of
    /// L(E,1) for either root number `w`
    pub value: BigFloat,
    pub root_number: i32,
    pub k: u32,
    pub work_digits: u32,
    /// truncation plus rounding allowance
    pub error_bound: f64,
}

impl LTruncation {
    pub fn s_m_f64(&self) -> f64 {
        to_f64(&self.s_m)
    }

    pub fn value_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

/// Scales used to pin down the root number through the functional equation
/// `L(E,1) = G(A) + w G(1/A)` with `G(A) = sum a_n/n exp(-2 pi n / (A sqrt N))`.
const SCALE_NUM: i64 = 6;
const SCALE_DEN: i64 = 5;

/// Truncation lengths for the three sums: scale 1/A, 1, A.
pub struct SumPlan {
    pub m_inv: u64,
    pub m: u64,
    pub m_a: u64,
}

pub fn sum_plan(n: &BigUint, k: u32) -> SumPlan {
    let mut ctx = sqrt_ctx(n, k);
    let nf = ctx.big(&BigInt::from(n.clone()));
    let s = ctx.sqrt(&nf);
    let ratio = ctx.div(&ctx.int(SCALE_NUM), &ctx.int(SCALE_DEN));
    let s_inv = ctx.div(&s, &ratio);
    let s_a = ctx.mul(&s, &ratio);
    SumPlan {
        m_inv: terms_for_sqrt(&mut ctx, &s_inv, k),
        m: terms_for_sqrt(&mut ctx, &s, k),
        m_a: terms_for_sqrt(&mut ctx, &s_a, k),
    }
}

#[derive(Clone)]
struct Neumaier {
    sum: BigFloat,
    comp: BigFloat,
}

impl Neumaier {
    fn new(p: usize) -> Self {
        Neumaier { sum: BigFloat::from_i64(0, p), comp: BigFloat::from_i64(0, p) }
    }

    fn add(&mut self, x: &BigFloat, p: usize) {
        let t = self.sum.add(x, p, RM);
        let d = if self.sum.abs_cmp(x).is_some_and(|c| c >= 0) {
            self.sum.sub(&t, p, RM).add(x, p, RM)
        } else {
            x.sub(&t, p, RM).add(&self.sum, p, RM)
        };
        self.comp = self.comp.add(&d, p, RM);
        self.sum = t;
    }

    fn total(&self, p: usize) -> BigFloat {
        self.sum.add(&self.comp, p, RM)
    }
}

/// Approximates L(E,1) to `10^-k`, computing the a_p table.
pub fn approximate_l1(g: &GlobalArithData, k: u32, max_terms: u64) -> Result<LTruncation> {
    approximate_l1_with_table(g, k, max_terms, None)
}

/// As [`approximate_l1`], reusing a precomputed table when it is long enough.
pub fn approximate_l1_with_table(
    g: &GlobalArithData,
    k: u32,
    max_terms: u64,
    table: Option<&ApTable>,
) -> Result<LTruncation> {
    let plan = sum_plan(&g.conductor, k);
    if plan.m > max_terms {
        return Err(Error::BudgetExceeded { m: plan.m, max_terms });
    }
    let owned;
    let table = match table {
        Some(t) if t.m >= plan.m_a => t,
        _ => {
            owned = ApTable::compute(g, plan.m_a);
            &owned
        }
    };
    let work_digits = k + (plan.m_a as f64).log10().ceil() as u32 + 10;
    let p = bits_for_digits(work_digits);
    let mut ctx = Ctx::new(p);
    let nf = ctx.big(&BigInt::from(g.conductor.clone()));
    let sqrt_n = ctx.sqrt(&nf);
    let pi = ctx.pi();
    let two_pi = ctx.mul(&ctx.int(2), &pi);
    let ratio = ctx.div(&ctx.int(SCALE_NUM), &ctx.int(SCALE_DEN));
    let x = ctx.div(&two_pi, &sqrt_n);
    let (xa, xi) = (ctx.mul(&x, &ratio).neg(), ctx.div(&x, &ratio).neg());
    let qs = [ctx.exp(&xa), ctx.exp(&x.neg()), ctx.exp(&xi)];
    let limits = [plan.m_inv, plan.m, plan.m_a];
    let sieve = AnSieve::new(table, plan.m_a);
    let nblocks = plan.m_a.div_ceil(DEFAULT_BLOCK);
    let partials: Vec<[BigFloat; 3]> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let start = 1 + b * DEFAULT_BLOCK;
            let block = sieve.block(start, DEFAULT_BLOCK);
            let mut pw: Vec<BigFloat> = qs.iter().map(|q| q.powi(start as usize, p, RM)).collect();
            let mut acc = [Neumaier::new(p), Neumaier::new(p), Neumaier::new(p)];
            for (i, &a) in block.values.iter().enumerate() {
                let n = start + i as u64;
                if a != 0 {
                    let c = BigFloat::from_i64(a, p).div(&BigFloat::from_u64(n, p), p, RM);
                    for j in 0..3 {
                        if n <= limits[j] {
                            acc[j].add(&c.mul(&pw[j], p, RM), p);
                        }
                    }
                }
                for j in 0..3 {
                    if n < limits[j] {
                        pw[j] = pw[j].mul(&qs[j], p, RM);
                    }
                }
            }
            [acc[0].total(p), acc[1].total(p), acc[2].total(p)]
        })
        .collect();
    let mut tot = [Neumaier::new(p), Neumaier::new(p), Neumaier::new(p)];
    for part in &partials {
        for j in 0..3 {
            tot[j].add(&part[j], p);
        }
    }
    let [g_inv, g1, g_a] = tot.map(|t| t.total(p));
    let plus = ctx.sub(&ctx.add(&g_a, &g_inv), &ctx.mul(&ctx.int(2), &g1)).abs();
    let minus = ctx.sub(&g_a, &g_inv).abs();
    let root_number = if plus.cmp(&minus).is_some_and(|c| c <= 0) { 1 } else { -1 };
    log::debug!("root number test: |G(A)+G(1/A)-2G(1)| = {}, |G(A)-G(1/A)| = {}", to_f64(&plus), to_f64(&minus));
    let s_m = ctx.mul(&ctx.int(2), &g1);
    let value = if root_number == 1 { s_m.clone() } else { ctx.int(0) };
    Ok(LTruncation { m: plan.m, s_m, value, root_number, k, work_digits, error_bound: 1.1 * 10f64.powi(-(k as i32)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localdata::global_data;

    fn curve(a: [i64; 5]) -> WeierstrassCurve {
        WeierstrassCurve::from_ints(a)
    }

    #[test]
    fn terms_needed_examples() {
        assert_eq!(terms_needed(&11u32.into(), 10), 13);
        assert_eq!(terms_needed(&11u32.into(), 2), 4);
        assert_eq!(terms_needed(&1u32.into(), 1), 1);
        let n: BigUint = "42551829106699251024".parse().unwrap();
        assert_eq!(terms_needed(&n, 2), 27_774_035_742);
    }

    #[test]
    fn terms_needed_monotone() {
        let mut prev_n = 0;
        for n in [1u32, 2, 11, 37, 100, 5077, 10_000, 1_000_000] {
            let m = terms_needed(&n.into(), 5);
            assert!(m >= prev_n);
            prev_n = m;
            let mut prev_k = 0;
            for k in 1..15 {
                let mk = terms_needed(&n.into(), k);
                assert!(mk >= prev_k);
                prev_k = mk;
            }
        }
    }

    #[test]
    fn period_of_congruent_number_curve() {
        let pd = real_period(&curve([0, 0, 0, -1, 0]), 30).unwrap();
        assert!(!pd.connected);
        assert!((pd.omega_f64() - 2.622_057_554_292_119_6).abs() < 1e-14);
        assert!((pd.c_infty_f64() - 5.24411510858424).abs() < 1e-13);
        assert!(pd.agm_iterations <= (30f64.log2().ceil() as u32) + 5);
    }

    #[test]
    fn period_of_eleven_a() {
        let pd = real_period(&curve([0, -1, 1, -10, -20]), 30).unwrap();
        assert!(pd.connected);
        assert!((pd.omega_f64() - 1.2692093042795534).abs() < 1e-14);
        assert_eq!(pd.omega_f64(), pd.c_infty_f64());
        let r = crate::numeric::to_rational(&pd.omega);
        let expect: num_rational::BigRational =
            num_rational::BigRational::new("12692093042795534216887946168".parse().unwrap(), BigInt::from(10).pow(28));
        let err = (r - expect) * num_rational::BigRational::from_integer(BigInt::from(10).pow(27));
        assert!(err.abs() < num_rational::BigRational::from_integer(1.into()));
    }

    #[test]
    fn l_values_of_small_curves() {
        let g = global_data(&curve([0, -1, 1, -10, -20])).unwrap();
        let t = approximate_l1(&g, 10, DEFAULT_MAX_TERMS).unwrap();
        assert_eq!(t.m, 13);
        assert_eq!(t.root_number, 1);
        assert!((t.s_m_f64() - 0.253_841_860_855_910_7).abs() < 1e-10);

        let g = global_data(&curve([0, 0, 0, -1, 0])).unwrap();
        let t = approximate_l1(&g, 8, DEFAULT_MAX_TERMS).unwrap();
        assert!((t.s_m_f64() - 0.655_514_388_573_029_9).abs() < 1e-8);
        assert_eq!(t.value_f64(), t.s_m_f64());
    }

    #[test]
    fn rank_one_curve_has_vanishing_value() {
        let g = global_data(&curve([0, 0, 1, -1, 0])).unwrap();
        let t = approximate_l1(&g, 8, DEFAULT_MAX_TERMS).unwrap();
        assert_eq!(t.root_number, -1);
        assert!(t.value_f64().abs() < 1e-6);
        // the plain sum is not small for this curve
        assert!((t.s_m_f64() - 0.3837774351482057).abs() < 1e-8);
    }

    #[test]
    fn budget_is_enforced() {
        let g = global_data(&curve([0, -1, 1, -10, -20])).unwrap();
        assert_eq!(approximate_l1(&g, 10, 5).unwrap_err(), Error::BudgetExceeded { m: 13, max_terms: 5 });
    }
}
