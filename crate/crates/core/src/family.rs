//! The four 2-isogenous curves E_1..E_4(n,p).

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::ap::ap;
use crate::curve::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::intarith::{factor, primes_up_to, DEFAULT_EFFORT_DIGITS};
use crate::localdata::{global_data_with_hints, GlobalArithData};

/// Good primes compared when checking that class members share a_q.
pub const CLASS_CHECK_PRIMES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilyId {
    pub i: u8,
    pub n: u32,
    pub p: i64,
}

/// `3^(2n+1)`
pub fn family_t(n: u32) -> BigInt {
    BigInt::from(3).pow(2 * n + 1)
}

fn is_degenerate(n: u32, p: i64) -> bool {
    p == 0 || BigInt::from(p) == family_t(n) * 4
}

impl FamilyId {
    pub fn new(i: u8, n: u32, p: i64) -> Result<Self> {
        if !(1..=4).contains(&i) {
            return Err(Error::Parse(format!("family index {i} not in 1..=4")));
        }
        if is_degenerate(n, p) {
            return Err(Error::DegenerateParameters { n, p });
        }
        Ok(FamilyId { i, n, p })
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}({},{})", self.i, self.n, self.p)
    }
}

/// Parses `i,n,p`.
impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [i, n, p] = parts[..] else {
            return Err(Error::Parse(format!("expected i,n,p but got {s:?}")));
        };
        let bad = |what: &str| Error::Parse(format!("bad {what} in {s:?}"));
        FamilyId::new(
            i.parse().map_err(|_| bad("i"))?,
            n.parse().map_err(|_| bad("n"))?,
            p.parse().map_err(|_| bad("p"))?,
        )
    }
}

/// The literal integral model of E_i(n,p), before minimalization.
pub fn family_curve(id: FamilyId) -> Result<WeierstrassCurve> {
    if is_degenerate(id.n, id.p) {
        return Err(Error::DegenerateParameters { n: id.n, p: id.p });
    }
    let t = family_t(id.n);
    let p = BigInt::from(id.p);
    let z = BigInt::zero;
    let (a2, a4) = match id.i {
        1 => (&p * 2 - &t * 4, &p * (&p - &t * 4)),
        2 => ((&t * 2 - &p) * 4, &t * &t * 16),
        3 => ((&t * 4 + &p) * 2, (&t * 4i64 - &p).pow(2u32)),
        4 => ((&p - &t * 8) * 2, &p * &p),
        i => return Err(Error::Parse(format!("family index {i} not in 1..=4"))),
    };
    Ok(WeierstrassCurve::new(z(), a2, z(), a4, z()))
}

/// Primes dividing every member's discriminant: those of 2, 3, p and p - 4T.
pub fn discriminant_primes(n: u32, p: i64) -> Result<Vec<BigUint>> {
    let mut out: Vec<BigUint> = vec![2u32.into(), 3u32.into()];
    for v in [BigInt::from(p), BigInt::from(p) - family_t(n) * 4] {
        if v.abs() > BigInt::from(1) {
            out.extend(factor(&v, DEFAULT_EFFORT_DIGITS)?.primes().cloned());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ClassMember {
    pub id: FamilyId,
    pub curve: WeierstrassCurve,
    pub data: GlobalArithData,
}

#[derive(Clone, Debug)]
pub struct IsogenyClass {
    pub n: u32,
    pub p: i64,
    pub members: Vec<ClassMember>,
}

impl IsogenyClass {
    pub fn conductor(&self) -> &BigUint {
        &self.members[0].data.conductor
    }
}

/// Builds and minimalizes E_1..E_4(n,p) and checks they agree on the
/// conductor and on a_q for the first good primes.
pub fn isogeny_class(n: u32, p: i64) -> Result<IsogenyClass> {
    isogeny_class_checked(n, p, CLASS_CHECK_PRIMES)
}

pub fn isogeny_class_checked(n: u32, p: i64, check_primes: usize) -> Result<IsogenyClass> {
    let hints = discriminant_primes(n, p)?;
    let mut members = Vec::with_capacity(4);
    for i in 1..=4 {
        let id = FamilyId::new(i, n, p)?;
        let curve = family_curve(id)?;
        let data = global_data_with_hints(&curve, &hints)?;
        members.push(ClassMember { id, curve, data });
    }
    let class = IsogenyClass { n, p, members };
    verify_class(&class, check_primes)?;
    Ok(class)
}

fn verify_class(class: &IsogenyClass, check_primes: usize) -> Result<()> {
    let first = &class.members[0];
    for m in &class.members[1..] {
        if m.data.conductor != first.data.conductor {
            return Err(Error::ClassInconsistent(format!(
                "conductor of {} is {} but {} has {}",
                m.id, m.data.conductor, first.id, first.data.conductor
            )));
        }
    }
    let mut checked = 0;
    for q in primes_up_to(1 << 20) {
        if checked == check_primes {
            break;
        }
        if first.data.local_at(&q.into()).is_some() {
            continue;
        }
        let a = ap(&first.data, q);
        for m in &class.members[1..] {
            let b = ap(&m.data, q);
            if a != b {
                return Err(Error::ClassInconsistent(format!("a_{q} is {a} on {} but {b} on {}", first.id, m.id)));
            }
        }
        checked += 1;
    }
    Ok(())
}

/// Scan order: ascending n, then ascending |p| with the negative value first.
/// Degenerate parameters are left out.
pub fn scan_grid(n_range: (u32, u32), p_range: (i64, i64)) -> Vec<(u32, i64)> {
    let mut out = Vec::new();
    for n in n_range.0..=n_range.1 {
        let mut ps: Vec<i64> = (p_range.0..=p_range.1).filter(|&p| !is_degenerate(n, p)).collect();
        ps.sort_by_key(|&p| (p.unsigned_abs(), p > 0));
        out.extend(ps.into_iter().map(|p| (n, p)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(s: &str) -> BigUint {
        s.parse().unwrap()
    }

    #[test]
    fn literal_models() {
        let c = family_curve(FamilyId::new(1, 0, -1).unwrap()).unwrap();
        assert_eq!(c, WeierstrassCurve::from_ints([0, -14, 0, 13, 0]));
        let c = family_curve(FamilyId::new(2, 0, 3).unwrap()).unwrap();
        assert_eq!(c, WeierstrassCurve::from_ints([0, 12, 0, 144, 0]));
        let c = family_curve(FamilyId::new(3, 0, 3).unwrap()).unwrap();
        assert_eq!(c, WeierstrassCurve::from_ints([0, 30, 0, 81, 0]));
        let c = family_curve(FamilyId::new(4, 0, 3).unwrap()).unwrap();
        assert_eq!(c, WeierstrassCurve::from_ints([0, -42, 0, 9, 0]));
    }

    #[test]
    fn degenerate_parameters() {
        assert_eq!(FamilyId::new(1, 0, 12).unwrap_err().kind(), "degenerate-parameters");
        assert_eq!(FamilyId::new(3, 1, 108).unwrap_err().kind(), "degenerate-parameters");
        assert_eq!(FamilyId::new(2, 5, 0).unwrap_err().kind(), "degenerate-parameters");
        let raw = FamilyId { i: 4, n: 0, p: 12 };
        assert!(matches!(family_curve(raw), Err(Error::DegenerateParameters { n: 0, p: 12 })));
        assert!(isogeny_class(0, 12).is_err());
        assert!(FamilyId::new(5, 0, 1).is_err());
    }

    #[test]
    fn parse_and_display() {
        let id: FamilyId = "2, 23, -348".parse().unwrap();
        assert_eq!(id, FamilyId { i: 2, n: 23, p: -348 });
        assert_eq!(id.to_string(), "E2(23,-348)");
        assert!("2,23".parse::<FamilyId>().is_err());
        assert!("x,1,2".parse::<FamilyId>().is_err());
    }

    #[test]
    fn members_are_nonsingular_with_full_two_torsion_on_e1() {
        for n in 0..3 {
            for p in [-50i64, -7, -1, 1, 2, 13, 50] {
                for i in 1..=4 {
                    let c = family_curve(FamilyId::new(i, n, p).unwrap()).unwrap();
                    assert!(c.invariants().is_ok());
                }
            }
        }
    }

    #[test]
    fn small_class_agrees_on_coefficients() {
        let class = isogeny_class(0, -1).unwrap();
        assert_eq!(class.members.len(), 4);
        let n = class.conductor().clone();
        assert!(class.members.iter().all(|m| m.data.conductor == n));
        for q in primes_up_to(547) {
            if class.members[0].data.local_at(&q.into()).is_none() {
                let a = ap(&class.members[0].data, q);
                assert!(class.members.iter().all(|m| ap(&m.data, q) == a));
            }
        }
    }

    #[test]
    fn record_conductor() {
        let class = isogeny_class_checked(20, -756, 10).unwrap();
        assert_eq!(class.conductor(), &big("42551829106699251024"));
    }

    #[test]
    fn grid_order() {
        let g = scan_grid((0, 1), (-2, 13));
        let first: Vec<i64> = g.iter().filter(|(n, _)| *n == 0).map(|&(_, p)| p).collect();
        assert_eq!(first, vec![-1, 1, -2, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13]);
        assert_eq!(g.iter().filter(|(n, _)| *n == 1).count(), 15);
        assert!(g.windows(2).all(|w| w[0].0 <= w[1].0));
    }
}
