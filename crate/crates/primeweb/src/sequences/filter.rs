//! Filtered prime families and their counting functions.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::PrimeIndexer;
use crate::error::{Error, Result};

/// A strictly increasing set `A ⊂ ℕ` with counting function `g(n)` (the
/// `n`-th member) and its inverse `g₋₁`.
pub trait CountingSet: Send + Sync {
    fn name(&self) -> String;
    fn contains(&self, a: u64) -> Result<bool>;
    /// `g(n)`, 1-based.
    fn nth(&self, n: u64) -> Result<u64>;
    /// Number of members `<= x`.
    fn count_upto(&self, x: u64) -> Result<u64>;

    /// `g₋₁(a)`: the position of the member `a`.
    fn index_of(&self, a: u64) -> Result<u64> {
        if !self.contains(a)? {
            return Err(Error::NotMember { value: a, filter: self.name() });
        }
        self.count_upto(a)
    }

    /// Members `<= x` in increasing order.
    fn members_upto(&self, x: u64) -> Result<Vec<u64>> {
        let n = self.count_upto(x)?;
        (1..=n).map(|k| self.nth(k)).collect()
    }

    /// The `n`-th generator: `1` followed by the non-members in increasing order.
    fn nth_generator(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Domain("generator index 0".into()));
        }
        // position of m among non-members of A, counting 1 even when 1 ∈ A
        let rank = |m: u64| -> Result<u64> {
            let below = m - self.count_upto(m)?;
            Ok(if self.contains(1)? { below + 1 } else { below })
        };
        if n == 1 {
            return Ok(1);
        }
        let (mut lo, mut hi) = (2u64, 2u64);
        while rank(hi)? < n {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if rank(mid)? < n {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Whether `m` is a generator (`1` or a non-member).
    fn is_generator(&self, m: u64) -> Result<bool> {
        Ok(m == 1 || (m > 1 && !self.contains(m)?))
    }
}

/// The named families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FilterKind {
    /// All primes.
    Primes,
    /// Smaller members of twin pairs.
    TwinLower,
    /// Larger members of twin pairs.
    TwinUpper,
    /// Members of twin pairs.
    Twin,
    /// Smaller members of twin pairs whose midpoint is six times a prime.
    TwinSixPrime,
    /// Primes belonging to no twin pair.
    Isolated,
    /// Primes `4n - 1`.
    FourNMinusOne,
    /// Primes `4n + 1`.
    FourNPlusOne,
    /// Primes `6n - 1`.
    SixNMinusOne,
    /// Primes `6n + 1`.
    SixNPlusOne,
    /// Primes `n² + n + 41`, `n >= 0`.
    Euler,
    /// Primes `n² + 1`, `n >= 1`.
    SquarePlusOne,
}

impl FilterKind {
    pub const ALL: [FilterKind; 12] = [
        Self::Primes,
        Self::TwinLower,
        Self::TwinUpper,
        Self::Twin,
        Self::TwinSixPrime,
        Self::Isolated,
        Self::FourNMinusOne,
        Self::FourNPlusOne,
        Self::SixNMinusOne,
        Self::SixNPlusOne,
        Self::Euler,
        Self::SquarePlusOne,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Primes => "P",
            Self::TwinLower => "T1",
            Self::TwinUpper => "T2",
            Self::Twin => "T3",
            Self::TwinSixPrime => "T4",
            Self::Isolated => "S",
            Self::FourNMinusOne => "D4n-1",
            Self::FourNPlusOne => "D4n+1",
            Self::SixNMinusOne => "D6n-1",
            Self::SixNPlusOne => "D6n+1",
            Self::Euler => "E",
            Self::SquarePlusOne => "H",
        }
    }

    fn polynomial(self) -> Option<fn(u64) -> u64> {
        match self {
            Self::Euler => Some(|n| n * n + n + 41),
            Self::SquarePlusOne => Some(|n| n * n + 1),
            _ => None,
        }
    }

    fn first_argument(self) -> u64 {
        match self {
            Self::SquarePlusOne => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown filter {s:?}")))
    }
}

enum Index {
    Primes,
    /// Prefix member counts per sieve segment.
    Blocks(RwLock<Vec<u64>>),
    /// Members generated by a polynomial; `next` is the next argument to test.
    Listed(RwLock<Listed>),
}

struct Listed {
    members: Vec<u64>,
    next: u64,
}

/// A prime family backed by a shared [`PrimeIndexer`].
pub struct Filter {
    kind: FilterKind,
    engine: Arc<PrimeIndexer>,
    index: Index,
    /// Sieve-derived families are enumerated below this bound only.
    reach: u64,
}

impl fmt::Debug for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Filter").field("kind", &self.kind).field("reach", &self.reach).finish()
    }
}

/// Default enumeration bound of sieve-derived families.
pub const DEFAULT_FILTER_REACH: u64 = 1 << 32;

impl Filter {
    pub fn new(kind: FilterKind, engine: Arc<PrimeIndexer>) -> Self {
        let index = match kind {
            FilterKind::Primes => Index::Primes,
            FilterKind::Euler | FilterKind::SquarePlusOne => {
                Index::Listed(RwLock::new(Listed { members: Vec::new(), next: kind.first_argument() }))
            }
            _ => Index::Blocks(RwLock::new(vec![0])),
        };
        let reach = DEFAULT_FILTER_REACH.min(engine.config().hard_limit);
        Self { kind, engine, index, reach }
    }

    pub fn with_reach(mut self, reach: u64) -> Self {
        self.reach = reach.min(self.engine.config().hard_limit);
        self
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn engine(&self) -> &Arc<PrimeIndexer> {
        &self.engine
    }

    fn check_reach(&self, x: u64) -> Result<()> {
        if x > self.reach {
            return Err(Error::Capacity { value: x, limit: self.reach });
        }
        Ok(())
    }

    /// Membership test for a prime `p` given a primality oracle for `p ± 2`
    /// and `(p + 1) / 6`.
    fn admits(&self, p: u64, prime_at: &dyn Fn(u64) -> bool) -> bool {
        let below = p >= 2 && prime_at(p.wrapping_sub(2));
        let above = prime_at(p + 2);
        match self.kind {
            FilterKind::Primes => true,
            FilterKind::TwinLower => above,
            FilterKind::TwinUpper => p >= 5 && below,
            FilterKind::Twin => above || (p >= 5 && below),
            FilterKind::TwinSixPrime => {
                above && (p + 1) % 6 == 0 && self.engine.is_prime((p + 1) / 6).unwrap_or(false)
            }
            FilterKind::Isolated => !above && !(p >= 5 && below),
            FilterKind::FourNMinusOne => p % 4 == 3,
            FilterKind::FourNPlusOne => p % 4 == 1,
            FilterKind::SixNMinusOne => p % 6 == 5,
            FilterKind::SixNPlusOne => p % 6 == 1 && p > 1,
            FilterKind::Euler | FilterKind::SquarePlusOne => unreachable!("listed families"),
        }
    }

    fn segment(&self) -> u64 {
        self.engine.config().segment_size
    }

    /// Members in `[lo, hi)` for sieve-derived families.
    fn block_members(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        let pad_lo = lo.saturating_sub(2);
        let block = self.engine.sieve(pad_lo, hi + 2)?;
        let prime_at = |x: u64| x >= block.lo() && x < block.hi() && block.is_prime(x);
        Ok(block.primes().filter(|&p| p >= lo && p < hi && self.admits(p, &prime_at)).collect())
    }

    fn block_count(&self, k: u64) -> Result<u64> {
        let seg = self.segment();
        Ok(self.block_members(k * seg, (k + 1) * seg)?.len() as u64)
    }

    fn extend_blocks(&self, table: &RwLock<Vec<u64>>, blocks: u64, target: u64) -> Result<()> {
        let max_blocks = self.reach / self.segment() + 1;
        let blocks = blocks.min(max_blocks);
        {
            let t = table.read().expect("filter index lock");
            if t.len() as u64 > blocks || *t.last().unwrap_or(&0) >= target {
                return Ok(());
            }
        }
        let mut t = table.write().expect("filter index lock");
        loop {
            let have = t.len() as u64 - 1;
            if have >= blocks || *t.last().unwrap_or(&0) >= target {
                return Ok(());
            }
            let end = (have + 64).min(blocks);
            let counts: Vec<u64> = (have..end).into_par_iter().map(|k| self.block_count(k)).collect::<Result<_>>()?;
            for c in counts {
                let last = *t.last().unwrap_or(&0);
                t.push(last + c);
            }
        }
    }

    fn extend_listed(&self, listed: &RwLock<Listed>, upto_value: u64, upto_count: u64) -> Result<()> {
        let f = self.kind.polynomial().expect("listed family");
        let done = |l: &Listed| l.members.len() as u64 >= upto_count || f(l.next) > upto_value;
        if done(&listed.read().expect("listed lock")) {
            return Ok(());
        }
        let mut l = listed.write().expect("listed lock");
        while !done(&l) {
            let v = f(l.next);
            if self.engine.is_prime(v)? {
                l.members.push(v);
            }
            l.next += 1;
        }
        Ok(())
    }
}

impl CountingSet for Filter {
    fn name(&self) -> String {
        self.kind.tag().to_string()
    }

    fn contains(&self, a: u64) -> Result<bool> {
        if a < 2 || !self.engine.is_prime(a)? {
            return Ok(false);
        }
        match &self.index {
            Index::Primes => Ok(true),
            Index::Listed(_) => {
                let f = self.kind.polynomial().expect("listed family");
                // invert the increasing polynomial
                let first = self.kind.first_argument();
                let mut n = ((a as f64).sqrt() as u64).max(first);
                while n > first && f(n) > a {
                    n -= 1;
                }
                while f(n) < a {
                    n += 1;
                }
                Ok(f(n) == a)
            }
            Index::Blocks(_) => {
                let prime_at = |x: u64| self.engine.is_prime(x).unwrap_or(false);
                Ok(self.admits(a, &prime_at))
            }
        }
    }

    fn nth(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Domain("g(0)".into()));
        }
        match &self.index {
            Index::Primes => self.engine.nth_prime(n),
            Index::Listed(listed) => {
                self.extend_listed(listed, self.engine.config().hard_limit, n)?;
                let l = listed.read().expect("listed lock");
                l.members.get(n as usize - 1).copied().ok_or(Error::Capacity {
                    value: n,
                    limit: l.members.len() as u64,
                })
            }
            Index::Blocks(table) => {
                self.extend_blocks(table, u64::MAX, n)?;
                let t = table.read().expect("filter index lock");
                if *t.last().unwrap_or(&0) < n {
                    return Err(Error::Capacity { value: (t.len() as u64 - 1) * self.segment(), limit: self.reach });
                }
                let k = t.partition_point(|&c| c < n) as u64;
                let before = t[k as usize - 1];
                drop(t);
                let seg = self.segment();
                let members = self.block_members((k - 1) * seg, k * seg)?;
                let v = members[(n - before - 1) as usize];
                self.check_reach(v)?;
                Ok(v)
            }
        }
    }

    fn count_upto(&self, x: u64) -> Result<u64> {
        match &self.index {
            Index::Primes => self.engine.prime_pi(x),
            Index::Listed(listed) => {
                self.extend_listed(listed, x, u64::MAX)?;
                let l = listed.read().expect("listed lock");
                Ok(l.members.partition_point(|&v| v <= x) as u64)
            }
            Index::Blocks(table) => {
                self.check_reach(x)?;
                let seg = self.segment();
                let k = x / seg;
                self.extend_blocks(table, k, u64::MAX)?;
                let before = table.read().expect("filter index lock")[k as usize];
                let partial = self.block_members(k * seg, x + 1)?.len() as u64;
                Ok(before + partial)
            }
        }
    }

    fn members_upto(&self, x: u64) -> Result<Vec<u64>> {
        match &self.index {
            Index::Primes => self.engine.primes_in_range(2, x + 1),
            Index::Listed(listed) => {
                self.extend_listed(listed, x, u64::MAX)?;
                let l = listed.read().expect("listed lock");
                Ok(l.members.iter().copied().take_while(|&v| v <= x).collect())
            }
            Index::Blocks(_) => {
                self.check_reach(x)?;
                let seg = self.segment();
                let chunks: Vec<u64> = (0..=x / seg).collect();
                let parts: Vec<Vec<u64>> = chunks
                    .into_par_iter()
                    .map(|k| self.block_members(k * seg, ((k + 1) * seg).min(x + 1)))
                    .collect::<Result<_>>()?;
                Ok(parts.concat())
            }
        }
    }
}

/// The odd numbers, `g(n) = 2n - 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OddNumbers;

impl CountingSet for OddNumbers {
    fn name(&self) -> String {
        "odd".into()
    }

    fn contains(&self, a: u64) -> Result<bool> {
        Ok(a % 2 == 1)
    }

    fn nth(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Domain("g(0)".into()));
        }
        Ok(2 * n - 1)
    }

    fn count_upto(&self, x: u64) -> Result<u64> {
        Ok(x.div_ceil(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Arc<PrimeIndexer> {
        Arc::new(PrimeIndexer::default())
    }

    fn brute(kind: FilterKind, upto: u64) -> Vec<u64> {
        let is_p = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        (2..=upto)
            .filter(|&p| is_p(p))
            .filter(|&p| {
                let tw_up = is_p(p + 2);
                let tw_dn = p >= 2 && is_p(p - 2);
                match kind {
                    FilterKind::Primes => true,
                    FilterKind::TwinLower => tw_up,
                    FilterKind::TwinUpper => tw_dn,
                    FilterKind::Twin => tw_up || tw_dn,
                    FilterKind::TwinSixPrime => tw_up && (p + 1) % 6 == 0 && is_p((p + 1) / 6),
                    FilterKind::Isolated => !tw_up && !tw_dn,
                    FilterKind::FourNMinusOne => p % 4 == 3,
                    FilterKind::FourNPlusOne => p % 4 == 1,
                    FilterKind::SixNMinusOne => p % 6 == 5,
                    FilterKind::SixNPlusOne => p % 6 == 1,
                    FilterKind::Euler => (0..=p).any(|n| n * n + n + 41 == p),
                    FilterKind::SquarePlusOne => (1..=p).any(|n| n * n + 1 == p),
                }
            })
            .collect()
    }

    #[test]
    fn every_family_matches_brute_force() {
        let e = engine();
        for kind in FilterKind::ALL {
            let f = Filter::new(kind, e.clone());
            let expect = brute(kind, 3000);
            assert_eq!(f.members_upto(3000).unwrap(), expect, "{kind}");
            for (i, &v) in expect.iter().enumerate() {
                assert_eq!(f.nth(i as u64 + 1).unwrap(), v, "{kind} nth");
                assert_eq!(f.index_of(v).unwrap(), i as u64 + 1, "{kind} index");
            }
            for x in 0..3000 {
                assert_eq!(f.contains(x).unwrap(), expect.binary_search(&x).is_ok(), "{kind} contains {x}");
            }
        }
    }

    #[test]
    fn first_members() {
        let e = engine();
        let isolated = Filter::new(FilterKind::Isolated, e.clone());
        assert_eq!(isolated.members_upto(60).unwrap(), vec![2, 23, 37, 47, 53]);
        let h = Filter::new(FilterKind::SquarePlusOne, e.clone());
        assert_eq!(h.members_upto(101).unwrap(), vec![2, 5, 17, 37, 101]);
        assert_eq!(h.nth(3).unwrap(), 17);
        let t1 = Filter::new(FilterKind::TwinLower, e.clone());
        assert_eq!(t1.nth(2).unwrap(), 5);
        assert_eq!(t1.index_of(11).unwrap(), 3);
        assert!(isolated.index_of(3).is_err());
        let d = Filter::new(FilterKind::SixNMinusOne, e.clone());
        assert_eq!(d.members_upto(20).unwrap(), vec![5, 11, 17]);
        let d = Filter::new(FilterKind::SixNPlusOne, e);
        assert_eq!(d.members_upto(20).unwrap(), vec![7, 13, 19]);
    }

    #[test]
    fn generators_are_one_then_non_members() {
        let e = engine();
        let p = Filter::new(FilterKind::Primes, e.clone());
        let gens: Vec<u64> = (1..=7).map(|n| p.nth_generator(n).unwrap()).collect();
        assert_eq!(gens, vec![1, 4, 6, 8, 9, 10, 12]);
        let d = Filter::new(FilterKind::SixNMinusOne, e);
        assert_eq!(d.nth_generator(2).unwrap(), 2);
        assert_eq!(OddNumbers.nth_generator(2).unwrap(), 2);
    }

    #[test]
    fn parse_tags() {
        for k in FilterKind::ALL {
            assert_eq!(k.tag().parse::<FilterKind>().unwrap(), k);
        }
        assert!("Q".parse::<FilterKind>().is_err());
    }
}
