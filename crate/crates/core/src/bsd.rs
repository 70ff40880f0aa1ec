//! Torsion, the analytic Sha quotient, square recognition and the
//! Goldfeld-Szpiro ratio.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::fp::{count_points_mod_p, reduce_mod};
use crate::intarith::{inv_mod, isqrt, primes_up_to};
use crate::localdata::GlobalArithData;
use crate::lseries::{LTruncation, PeriodData};
use crate::numeric::{round_rational, to_rational, Ctx};

const TORSION_SAMPLE_PRIMES: usize = 30;
const TORSION_PRIME_LIMIT: u64 = 500;

type Poly = Vec<BigInt>;

fn trim(mut f: Poly) -> Poly {
    while f.len() > 1 && f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

fn poly_mul(f: &[BigInt], g: &[BigInt]) -> Poly {
    let mut out = vec![BigInt::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    trim(out)
}

fn poly_sub(f: &[BigInt], g: &[BigInt]) -> Poly {
    let n = f.len().max(g.len());
    let z = BigInt::zero();
    trim((0..n).map(|i| f.get(i).unwrap_or(&z) - g.get(i).unwrap_or(&z)).collect())
}

fn poly_eval(f: &[BigInt], x: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn poly_eval_mod(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter().rev().fold(0u64, |acc, &c| ((acc as u128 * x as u128 + c as u128) % p as u128) as u64)
}

/// Division polynomials of `y^2 = x^3 + a x + b` with the factor `y` removed
/// at even index, so every entry is a polynomial in `x`.
struct DivisionPolys {
    f2: Poly,
    memo: HashMap<u32, Poly>,
}

impl DivisionPolys {
    fn new(a: &BigInt, b: &BigInt) -> Self {
        let f = vec![b.clone(), a.clone(), BigInt::zero(), BigInt::one()];
        let f2 = poly_mul(&f, &f);
        let mut memo = HashMap::new();
        let i = |v: i64| BigInt::from(v);
        memo.insert(0, vec![BigInt::zero()]);
        memo.insert(1, vec![BigInt::one()]);
        memo.insert(2, vec![i(2)]);
        let (a2, ab, b2) = (a * a, a * b, b * b);
        memo.insert(3, vec![-&a2, b * 12, a * 6, BigInt::zero(), i(3)]);
        let a3 = &a2 * a;
        memo.insert(
            4,
            vec![(-(b2 * 8i64) - a3) * 4i64, -(ab * 16i64), -(a2 * 20i64), b * 80, a * 20, BigInt::zero(), i(4)],
        );
        DivisionPolys { f2, memo }
    }

    fn get(&mut self, n: u32) -> Poly {
        if let Some(p) = self.memo.get(&n) {
            return p.clone();
        }
        let m = n / 2;
        let out = if n % 2 == 1 {
            let (gm2, gm, gm1, gp1) = (self.get(m + 2), self.get(m), self.get(m - 1), self.get(m + 1));
            let left = poly_mul(&gm2, &poly_mul(&gm, &poly_mul(&gm, &gm)));
            let right = poly_mul(&gm1, &poly_mul(&gp1, &poly_mul(&gp1, &gp1)));
            if m.is_multiple_of(2) {
                poly_sub(&poly_mul(&self.f2, &left), &right)
            } else {
                poly_sub(&left, &poly_mul(&self.f2, &right))
            }
        } else {
            let (gm, gm2, gmm1, gmm2, gp1) =
                (self.get(m), self.get(m + 2), self.get(m - 1), self.get(m - 2), self.get(m + 1));
            let inner = poly_sub(&poly_mul(&gm2, &poly_mul(&gmm1, &gmm1)), &poly_mul(&gmm2, &poly_mul(&gp1, &gp1)));
            poly_mul(&gm, &inner).into_iter().map(|c| c / 2).collect()
        };
        self.memo.insert(n, out.clone());
        out
    }
}

/// Upper bound on |x| for real roots of `f` (Fujiwara).
fn root_bound(f: &[BigInt]) -> BigUint {
    let d = f.len() - 1;
    let lc = f[d].magnitude();
    let mut best = BigUint::one();
    for i in 1..=d {
        let q = f[d - i].magnitude() / lc + 1u32;
        let r = q.nth_root(i as u32) + 1u32;
        best = best.max(r);
    }
    best * 2u32
}

/// Integer roots of a squarefree polynomial, by Hensel lifting simple roots
/// modulo a small prime.
fn integer_roots(f: &[BigInt]) -> Vec<BigInt> {
    let mut f = trim(f.to_vec());
    let mut roots = Vec::new();
    if f.len() <= 1 {
        return roots;
    }
    if f[0].is_zero() {
        roots.push(BigInt::zero());
        while f.len() > 1 && f[0].is_zero() {
            f.remove(0);
        }
        if f.len() <= 1 {
            return roots;
        }
    }
    let d = f.len() - 1;
    let bound = BigInt::from(root_bound(&f));
    let df: Poly = (1..=d).map(|i| &f[i] * i).collect();
    for p in primes_up_to(100_000).into_iter().skip(2) {
        if reduce_mod(&f[d], p) == 0 {
            continue;
        }
        let fp: Vec<u64> = f.iter().map(|c| reduce_mod(c, p)).collect();
        let dfp: Vec<u64> = df.iter().map(|c| reduce_mod(c, p)).collect();
        let residues: Vec<u64> = (0..p).filter(|&r| poly_eval_mod(&fp, r, p) == 0).collect();
        if residues.iter().any(|&r| poly_eval_mod(&dfp, r, p) == 0) {
            continue;
        }
        let pb = BigInt::from(p);
        for r0 in residues {
            let inv = BigInt::from(inv_mod(poly_eval_mod(&dfp, r0, p), p).expect("simple root"));
            let mut r = BigInt::from(r0);
            let mut modulus = pb.clone();
            while modulus <= &bound * 2 {
                let next = &modulus * &pb;
                let v = poly_eval(&f, &r);
                r = (&r - v * &inv).mod_floor(&next);
                modulus = next;
            }
            if &r * 2 > modulus {
                r -= &modulus;
            }
            if poly_eval(&f, &r).is_zero() {
                roots.push(r);
            }
        }
        return roots;
    }
    panic!("no prime with simple roots for a squarefree polynomial")
}

fn square_root(v: &BigInt) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let (r, exact) = isqrt(v.magnitude());
    exact.then(|| BigInt::from(r))
}

/// Gcd of `#E(F_p)` over sampled good odd primes; a multiple of the torsion order.
pub fn torsion_bound(c: &WeierstrassCurve) -> Result<u64> {
    let disc = c.invariants()?.disc;
    let mut g = 0u64;
    let mut used = 0;
    for p in primes_up_to(TORSION_PRIME_LIMIT).into_iter().skip(1) {
        if reduce_mod(&disc, p) == 0 {
            continue;
        }
        g = g.gcd(&count_points_mod_p(c, p)?);
        used += 1;
        if used == TORSION_SAMPLE_PRIMES {
            break;
        }
    }
    Ok(g)
}

/// Order of the rational torsion subgroup.
pub fn torsion_order(c: &WeierstrassCurve) -> Result<u32> {
    let bound = torsion_bound(c)?;
    let (c4, c6) = c.c_invariants();
    let a: BigInt = c4 * -27;
    let b: BigInt = c6 * -54;
    let f = [b.clone(), a.clone(), BigInt::zero(), BigInt::one()];
    let mut polys = DivisionPolys::new(&a, &b);
    let mut order = 1u32;
    // largest point orders allowed by Mazur's theorem
    for (l, cap) in [(2u64, 8u64), (3, 9), (5, 5), (7, 7)] {
        if bound % l != 0 {
            continue;
        }
        let mut n = 1;
        while bound % (n * l) == 0 && n * l <= cap {
            n *= l;
        }
        let mut count = 1u32;
        if l == 2 {
            count += integer_roots(&f).len() as u32;
        }
        if n > 2 {
            for x in integer_roots(&polys.get(n as u32)) {
                match square_root(&poly_eval(&f, &x)) {
                    Some(y) if !y.is_zero() => count += 2,
                    _ => {}
                }
            }
        }
        debug_assert!(
            (0..8).any(|e| (l as u32).pow(e) == count),
            "{l}-primary torsion count {count} is not a power of {l}"
        );
        order *= count;
    }
    debug_assert!(bound % order as u64 == 0);
    Ok(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShaStatus {
    Ok,
    ApparentPositiveRank,
    NotASquare,
    BudgetExceeded,
    Unfactored,
}

impl ShaStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShaStatus::Ok => "ok",
            ShaStatus::ApparentPositiveRank => "apparent-positive-rank",
            ShaStatus::NotASquare => "not-a-square",
            ShaStatus::BudgetExceeded => "budget-exceeded",
            ShaStatus::Unfactored => "unfactored",
        }
    }
}

impl fmt::Display for ShaStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShaReport {
    pub l_value: f64,
    pub sha_real: f64,
    /// nearest integer to `sha_real`
    pub sha_int: BigUint,
    /// floor of the square root of `sha_int`
    pub sha_sqrt: BigUint,
    pub residual: f64,
    pub square_tol: f64,
    /// certified radius around `sha_real` from the L-value error bound
    pub radius: f64,
    pub gs_ratio: f64,
    pub torsion: u32,
    pub status: ShaStatus,
}

impl ShaReport {
    pub fn into_result(self) -> Result<ShaReport> {
        match self.status {
            ShaStatus::Ok => Ok(self),
            ShaStatus::ApparentPositiveRank => Err(Error::ApparentPositiveRank),
            ShaStatus::NotASquare => {
                Err(Error::NotASquare { value: format!("{:.6}", self.sha_real), residual: self.residual })
            }
            ShaStatus::BudgetExceeded | ShaStatus::Unfactored => unreachable!("not produced by analytic_sha"),
        }
    }
}

/// `torsion^2 / (C_inf * C_fin)`, the factor turning L(E,1) into Sha.
pub fn condition_factor(g: &GlobalArithData, period: &PeriodData, torsion: u32) -> f64 {
    (torsion as f64).powi(2) / (period.c_infty_f64() * g.c_fin.to_f64().unwrap_or(f64::INFINITY))
}

/// Assembles `L(E,1) |T|^2 / (C_inf C_fin)` and recognizes it as a square.
pub fn analytic_sha(g: &GlobalArithData, period: &PeriodData, l: &LTruncation, torsion: u32) -> ShaReport {
    let factor = condition_factor(g, period, torsion);
    let l_value = l.value_f64();
    let square_tol = 10f64.powi(1 - l.k as i32) * factor;
    let radius = l.error_bound * factor;
    if l_value.abs() < 10.0 * 10f64.powi(-(l.k as i32)) {
        return ShaReport {
            l_value,
            sha_real: l_value * factor,
            sha_int: BigUint::zero(),
            sha_sqrt: BigUint::zero(),
            residual: (l_value * factor).abs(),
            square_tol,
            radius,
            gs_ratio: 0.0,
            torsion,
            status: ShaStatus::ApparentPositiveRank,
        };
    }
    let digits = l.work_digits + g.c_fin.to_string().len() as u32 + 10;
    let mut ctx = Ctx::with_digits(digits);
    let t2 = ctx.int(torsion as i64 * torsion as i64);
    let cfin = ctx.big(&BigInt::from(g.c_fin.clone()));
    let num = ctx.mul(&l.value, &t2);
    let den = ctx.mul(&period.c_infty, &cfin);
    let sha = to_rational(&ctx.div(&num, &den));
    let nearest = round_rational(&sha);
    let residual = (&sha - BigRational::from_integer(nearest.clone())).abs().to_f64().unwrap_or(f64::INFINITY);
    let sha_int = nearest.to_biguint().unwrap_or_default();
    let (sha_sqrt, exact) = isqrt(&sha_int);
    let status =
        if residual < square_tol && exact && !sha_int.is_zero() { ShaStatus::Ok } else { ShaStatus::NotASquare };
    ShaReport {
        l_value,
        sha_real: sha.to_f64().unwrap_or(f64::NAN),
        sha_int,
        sha_sqrt,
        residual,
        square_tol,
        radius,
        gs_ratio: 0.0,
        torsion,
        status,
    }
    .with_gs(&g.conductor)
}

impl ShaReport {
    fn with_gs(mut self, n: &BigUint) -> Self {
        self.gs_ratio = goldfeld_szpiro(&self.sha_int, n);
        self
    }
}

/// `sha / sqrt(n)` truncated (not rounded) to `decimals` places.
pub fn goldfeld_szpiro_decimal(sha: &BigUint, n: &BigUint, decimals: u32) -> String {
    assert!(!n.is_zero());
    let scale = BigUint::from(10u32).pow(2 * decimals);
    // floor(sqrt(floor(x))) == floor(sqrt(x))
    let (q, _) = isqrt(&(sha * sha * scale / n));
    let s = q.to_string();
    let d = decimals as usize;
    let s = if s.len() <= d { format!("{}{}", "0".repeat(d + 1 - s.len()), s) } else { s };
    let (int_part, frac) = s.split_at(s.len() - d);
    if d == 0 {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac}")
    }
}

/// Goldfeld-Szpiro ratio `|Sha| / sqrt(N)`.
pub fn goldfeld_szpiro(sha: &BigUint, n: &BigUint) -> f64 {
    goldfeld_szpiro_decimal(sha, n, 20).parse().expect("decimal")
}

/// Sha orders across an isogeny class, each as a multiple of the smallest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub shas: Vec<BigUint>,
    pub ratios: Vec<BigUint>,
}

impl ClassSummary {
    pub fn max_ratio(&self) -> BigUint {
        self.ratios.iter().max().cloned().unwrap_or_else(BigUint::one)
    }
}

impl fmt::Display for ClassSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self
            .shas
            .iter()
            .map(|s| match isqrt(s) {
                (r, true) => format!("{r}^2"),
                _ => s.to_string(),
            })
            .collect();
        f.write_str(&cells.join(" & "))
    }
}

fn is_power_of_four(v: &BigUint) -> bool {
    let bits = v.bits();
    bits > 0 && v.count_ones() == 1 && (bits - 1).is_multiple_of(2)
}

/// Checks that Sha orders in a 2-isogeny class differ by powers of 4.
pub fn class_ratios(shas: &[BigUint]) -> Result<ClassSummary> {
    let min = shas
        .iter()
        .min()
        .filter(|m| !m.is_zero())
        .ok_or_else(|| Error::ClassInconsistent("empty class or zero Sha".into()))?;
    let mut ratios = Vec::with_capacity(shas.len());
    for s in shas {
        let (q, r) = s.div_rem(min);
        if !r.is_zero() || !is_power_of_four(&q) {
            return Err(Error::ClassInconsistent(format!("{s} / {min} is not a power of 4")));
        }
        ratios.push(q);
    }
    Ok(ClassSummary { shas: shas.to_vec(), ratios })
}

pub fn isogeny_class_report(reports: &[ShaReport]) -> Result<ClassSummary> {
    if let Some(r) = reports.iter().find(|r| r.status != ShaStatus::Ok) {
        return Err(Error::ClassInconsistent(format!("member with status {}", r.status)));
    }
    let shas: Vec<BigUint> = reports.iter().map(|r| r.sha_int.clone()).collect();
    class_ratios(&shas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localdata::global_data;
    use crate::lseries::{approximate_l1, real_period, DEFAULT_MAX_TERMS};
    use crate::points::AffinePointQ;

    fn curve(a: [i64; 5]) -> WeierstrassCurve {
        WeierstrassCurve::from_ints(a)
    }

    fn big(s: &str) -> BigUint {
        s.parse().unwrap()
    }

    /// Torsion by enumerating integral points of the short model.
    fn brute_torsion(c: &WeierstrassCurve, x_max: i64) -> u32 {
        let (c4, c6) = c.c_invariants();
        let short = WeierstrassCurve::new(0.into(), 0.into(), 0.into(), c4 * -27, c6 * -54);
        let mut count = 1;
        for x in -x_max..=x_max {
            let xb = BigInt::from(x);
            let rhs = &xb * &xb * &xb + short.a4.clone() * &xb + &short.a6;
            if let Some(y) = square_root(&rhs) {
                let pt = AffinePointQ::new(BigRational::from_integer(xb), BigRational::from_integer(y.clone()));
                if short.point_order(&pt, 12).is_some() {
                    count += if y.is_zero() { 1 } else { 2 };
                }
            }
        }
        count
    }

    #[test]
    fn division_polynomials_vanish_on_torsion() {
        // 11a1 has four points of order 5, so psi_5 has two integral roots
        let c = curve([0, -1, 1, -10, -20]);
        let (c4, c6) = c.c_invariants();
        let mut dp = DivisionPolys::new(&(c4 * -27), &(c6 * -54));
        let roots = integer_roots(&dp.get(5));
        assert_eq!(roots.len(), 2);
        assert_eq!(dp.get(5).len(), 13);
        assert_eq!(dp.get(8).len(), 31);
        assert_eq!(dp.get(9).len(), 41);
    }

    #[test]
    fn integer_roots_of_products() {
        let f: Poly = [(-7i64), 3, 100_000_000_007]
            .iter()
            .fold(vec![BigInt::one()], |acc, &r| poly_mul(&acc, &[BigInt::from(-r), BigInt::one()]));
        let mut roots = integer_roots(&f);
        roots.sort();
        assert_eq!(roots, vec![BigInt::from(-7), BigInt::from(3), BigInt::from(100_000_000_007i64)]);
        // (2x - 1)(x^2 + 1): no integer roots
        let g = poly_mul(&[BigInt::from(-1), BigInt::from(2)], &[BigInt::one(), BigInt::zero(), BigInt::one()]);
        assert!(integer_roots(&g).is_empty());
        assert_eq!(integer_roots(&[BigInt::zero(), BigInt::one()]), vec![BigInt::zero()]);
    }

    #[test]
    fn torsion_examples() {
        assert_eq!(torsion_order(&curve([0, 0, 0, -1, 0])).unwrap(), 4);
        assert_eq!(torsion_order(&curve([0, -1, 1, -10, -20])).unwrap(), 5);
        assert_eq!(torsion_order(&curve([0, 0, 1, -1, 0])).unwrap(), 1);
    }

    #[test]
    fn torsion_matches_point_enumeration() {
        let curves = [
            [1, 1, 1, -10, -10],
            [1, 0, 1, 4, -6],
            [1, -1, 1, -3, 3],
            [1, -1, 1, -14, 29],
            [1, 0, 0, -45, 81],
            [1, -1, 1, -122, 1721],
            [1, 0, 0, -1070, 7812],
            [1, 0, 1, -19, 26],
            [0, 1, 0, -1, 0],
            [0, 0, 1, 0, 0],
            [0, 0, 0, 0, 1],
            [0, 0, 0, 4, 0],
        ];
        for a in curves {
            let c = curve(a);
            let t = torsion_order(&c).unwrap();
            assert_eq!(t, brute_torsion(&c, 30_000), "{c}");
            assert_eq!(torsion_bound(&c).unwrap() % t as u64, 0);
        }
    }

    #[test]
    fn family_one_has_full_two_torsion() {
        for (n, p) in [(0u32, -1i64), (0, 5), (1, 7), (2, -50), (3, 11)] {
            let t4 = 4 * 3i64.pow(2 * n + 1);
            let c = curve([0, 2 * p - t4, 0, p * (p - t4), 0]);
            let g = global_data(&c).unwrap();
            assert_eq!(torsion_order(&g.minimal).unwrap() % 4, 0, "n={n} p={p}");
        }
    }

    #[test]
    fn eleven_a_sha_is_one() {
        let g = global_data(&curve([0, -1, 1, -10, -20])).unwrap();
        let period = real_period(&g.minimal, 30).unwrap();
        let l = approximate_l1(&g, 10, DEFAULT_MAX_TERMS).unwrap();
        let t = torsion_order(&g.minimal).unwrap();
        let rep = analytic_sha(&g, &period, &l, t);
        assert_eq!(rep.status, ShaStatus::Ok);
        assert_eq!(rep.sha_int, BigUint::one());
        assert!(rep.residual < 1e-9);
        assert!((rep.gs_ratio - 1.0 / 11f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rank_one_is_flagged() {
        let g = global_data(&curve([0, 0, 1, -1, 0])).unwrap();
        let period = real_period(&g.minimal, 30).unwrap();
        let l = approximate_l1(&g, 8, DEFAULT_MAX_TERMS).unwrap();
        let rep = analytic_sha(&g, &period, &l, 1);
        assert_eq!(rep.status, ShaStatus::ApparentPositiveRank);
        assert_eq!(rep.into_result().unwrap_err().kind(), "apparent-positive-rank");
    }

    #[test]
    fn goldfeld_szpiro_table() {
        let rows = [
            (408480u64, "7441767284139709375008", "1.9342096803"),
            (824292, "302272836922885300534872", "1.2358410273"),
            (369982, "17448909423065861532624", "1.0362798350"),
            (83880, "60788327295284644080", "0.9024159172"),
            (102144, "281363114909603209392", "0.6220025144"),
            (222792, "6451697601805864768272", "0.6179625870"),
            (327040, "30637316956823460343320", "0.6110494864"),
            (261228, "15756334434937779726048", "0.5436405656"),
            (151794, "1969541804367222468066", "0.5191903468"),
            (1029212, "37011629587668844576720608", "0.1741167606"),
        ];
        for (s, n, want) in rows {
            let sha = BigUint::from(s) * s;
            assert_eq!(goldfeld_szpiro_decimal(&sha, &big(n), 10), want);
        }
        assert_eq!(goldfeld_szpiro(&BigUint::one(), &BigUint::one()), 1.0);
        assert_eq!(goldfeld_szpiro_decimal(&BigUint::one(), &BigUint::one(), 10), "1.0000000000");
        assert_eq!(goldfeld_szpiro_decimal(&BigUint::one(), &big("100"), 3), "0.100");
    }

    #[test]
    fn class_ratio_checks() {
        let sq = |v: u64| BigUint::from(v) * v;
        let s = class_ratios(&[sq(27993), sq(55986), sq(27993), sq(27993)]).unwrap();
        assert_eq!(s.ratios, vec![1u32.into(), 4u32.into(), 1u32.into(), 1u32.into()]);
        assert_eq!(s.to_string(), "27993^2 & 55986^2 & 27993^2 & 27993^2");
        let s = class_ratios(&[sq(102120), sq(204240), sq(51060), sq(408480)]).unwrap();
        assert_eq!(s.max_ratio(), 64u32.into());
        assert_eq!(class_ratios(&vec![sq(7); 4]).unwrap().max_ratio(), BigUint::one());
        let err = class_ratios(&[sq(3), sq(6), BigUint::from(18u32), sq(3)]).unwrap_err();
        assert_eq!(err.kind(), "class-inconsistent");
        assert!(class_ratios(&[sq(3), sq(9)]).is_err());
    }
}
