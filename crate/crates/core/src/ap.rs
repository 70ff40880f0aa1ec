//! Dirichlet coefficients a_n of the L-series.

use std::io::{Read, Write};

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fp::{count_points_mod_p, count_points_short, reduce_mod};
use crate::intarith::{mul_mod, primes_up_to, sub_mod};
use crate::localdata::{GlobalArithData, Reduction};

/// a_p at a single prime.
pub fn ap(g: &GlobalArithData, p: u64) -> i64 {
    if let Some(l) = g.locals.iter().find(|l| l.p == p.into()) {
        return match l.reduction {
            Reduction::SplitMultiplicative => 1,
            Reduction::NonsplitMultiplicative => -1,
            Reduction::Additive => 0,
            Reduction::Good => unreachable!("bad primes only"),
        };
    }
    let n = count_points_mod_p(&g.minimal, p).expect("good reduction");
    p as i64 + 1 - n as i64
}

/// a_p for every prime up to `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApTable {
    pub m: u64,
    primes: Vec<u64>,
    values: Vec<i32>,
    bad: Vec<u64>,
}

fn bad_primes(g: &GlobalArithData) -> Vec<u64> {
    let mut bad: Vec<u64> = g.locals.iter().filter_map(|l| u64::try_from(&l.p).ok()).collect();
    bad.sort_unstable();
    bad
}

const PRIME_CHUNK: usize = 512;

impl ApTable {
    /// Counts points at all good primes up to `m` on the current rayon pool.
    pub fn compute(g: &GlobalArithData, m: u64) -> ApTable {
        let primes = primes_up_to(m);
        let bad = bad_primes(g);
        let (c4, c6) = g.minimal.c_invariants();
        let values: Vec<i32> = primes
            .par_chunks(PRIME_CHUNK)
            .flat_map_iter(|chunk| {
                chunk
                    .iter()
                    .map(|&p| {
                        if p < 5 || bad.binary_search(&p).is_ok() {
                            return ap(g, p) as i32;
                        }
                        let a = sub_mod(0, mul_mod(27, reduce_mod(&c4, p), p), p);
                        let b = sub_mod(0, mul_mod(54, reduce_mod(&c6, p), p), p);
                        (p as i64 + 1 - count_points_short(a, b, p) as i64) as i32
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        ApTable { m, primes, values, bad }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn is_bad(&self, p: u64) -> bool {
        self.bad.binary_search(&p).is_ok()
    }

    pub fn get(&self, p: u64) -> Option<i64> {
        self.primes.binary_search(&p).ok().map(|i| self.values[i] as i64)
    }

    /// A table for a smaller bound, sharing the counts.
    pub fn truncated(&self, m: u64) -> ApTable {
        let k = self.primes.partition_point(|&p| p <= m);
        ApTable {
            m: m.min(self.m),
            primes: self.primes[..k].to_vec(),
            values: self.values[..k].to_vec(),
            bad: self.bad.clone(),
        }
    }

    pub fn write_cache<W: Write>(&self, g: &GlobalArithData, mut w: W) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(16 + 3 * self.values.len());
        buf.extend_from_slice(b"APC1");
        for a in g.minimal.coefficients() {
            let bytes = a.to_signed_bytes_le();
            put_varint(&mut buf, bytes.len() as u64);
            buf.extend_from_slice(&bytes);
        }
        put_varint(&mut buf, self.m);
        put_varint(&mut buf, self.values.len() as u64);
        for &v in &self.values {
            put_varint(&mut buf, zigzag(v as i64));
        }
        w.write_all(&buf)
    }

    /// Reads a cache written for the minimal model of `g`; the stored bound
    /// must reach `m`.
    pub fn read_cache<R: Read>(g: &GlobalArithData, m: u64, mut r: R) -> Result<ApTable> {
        let curve = &g.minimal;
        let mut buf = Vec::new();
        r.read_to_end(&mut buf).map_err(|e| Error::Parse(format!("a_p cache: {e}")))?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(4)? != b"APC1" {
            return Err(Error::Parse("a_p cache: bad magic".into()));
        }
        for a in curve.coefficients() {
            let len = cur.varint()? as usize;
            if &BigInt::from_signed_bytes_le(cur.take(len)?) != a {
                return Err(Error::Parse("a_p cache: written for another curve".into()));
            }
        }
        let stored_m = cur.varint()?;
        if stored_m < m {
            return Err(Error::Parse(format!("a_p cache covers {stored_m} < {m}")));
        }
        let count = cur.varint()? as usize;
        let primes = primes_up_to(stored_m);
        if primes.len() != count {
            return Err(Error::Parse("a_p cache: prime count mismatch".into()));
        }
        let values = (0..count).map(|_| cur.varint().map(|z| unzigzag(z) as i32)).collect::<Result<Vec<_>>>()?;
        if cur.pos != buf.len() {
            return Err(Error::Parse("a_p cache: trailing bytes".into()));
        }
        Ok(ApTable { m: stored_m, primes, values, bad: bad_primes(g) }.truncated(m))
    }
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(z: u64) -> i64 {
    (z >> 1) as i64 ^ -((z & 1) as i64)
}

fn put_varint(buf: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        buf.push((v as u8) | 0x80);
        v >>= 7;
    }
    buf.push(v as u8);
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Parse("a_p cache: truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.take(1)?[0];
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::Parse("a_p cache: varint overflow".into()))
    }
}

/// a_n for `n` in `[start, start + values.len())`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientBlock {
    pub start: u64,
    pub values: Vec<i64>,
}

impl CoefficientBlock {
    pub fn get(&self, n: u64) -> i64 {
        self.values[(n - self.start) as usize]
    }
}

/// Fills blocks of a_n from an a_p table by sieving with the primes up to
/// `sqrt(m)`; whatever cofactor survives is a single large prime.
pub struct AnSieve<'a> {
    table: &'a ApTable,
    m: u64,
    small: Vec<(u64, Vec<i64>)>,
}

pub const DEFAULT_BLOCK: u64 = 1 << 16;

impl<'a> AnSieve<'a> {
    pub fn new(table: &'a ApTable, m: u64) -> Self {
        assert!(m <= table.m, "a_p table covers {} < {}", table.m, m);
        let root = num_integer::sqrt(m);
        let small = primes_up_to(root)
            .into_iter()
            .map(|q| {
                let aq = table.get(q).expect("prime in table");
                let bad = table.is_bad(q);
                let mut pw = vec![1i64, aq];
                let mut qk = q;
                while qk <= m / q {
                    qk *= q;
                    let k = pw.len();
                    let next = if bad { pw[k - 1] * aq } else { aq * pw[k - 1] - q as i64 * pw[k - 2] };
                    pw.push(next);
                }
                (q, pw)
            })
            .collect();
        AnSieve { table, m, small }
    }

    pub fn block(&self, start: u64, len: u64) -> CoefficientBlock {
        assert!(start >= 1);
        let end = (start + len).min(self.m + 1);
        let n = (end - start) as usize;
        let mut rem: Vec<u64> = (start..end).collect();
        let mut val = vec![1i64; n];
        for (q, pw) in &self.small {
            let q = *q;
            let mut j = start.div_ceil(q) * q;
            while j < end {
                let i = (j - start) as usize;
                let mut k = 0;
                while rem[i].is_multiple_of(q) {
                    rem[i] /= q;
                    k += 1;
                }
                val[i] *= pw[k];
                j += q;
            }
        }
        for i in 0..n {
            if rem[i] > 1 {
                val[i] *= self.table.get(rem[i]).expect("cofactor is a prime in the table");
            }
        }
        CoefficientBlock { start, values: val }
    }

    /// Blocks covering `[1, m]` in order.
    pub fn stream(&self, block_len: u64) -> impl Iterator<Item = CoefficientBlock> + '_ {
        let m = self.m;
        (0..m.div_ceil(block_len)).map(move |b| self.block(1 + b * block_len, block_len))
    }
}

/// a_1..a_m in one vector (index 0 holds 0).
pub fn an_vec(table: &ApTable, m: u64) -> Vec<i64> {
    let sieve = AnSieve::new(table, m);
    let mut out = vec![0i64];
    for b in sieve.stream(DEFAULT_BLOCK) {
        out.extend(b.values);
    }
    out
}
