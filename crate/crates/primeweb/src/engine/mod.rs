//! Prime enumeration, counting and indexing.
//!
//! [`PrimeIndexer`] answers `p(n)`, `π(x)`, primality and Möbius queries up to
//! a configurable hard limit. Counts below the dense limit come from per-block
//! prefix counts of a segmented sieve; above it, from the exact Lucy–Hedgehog
//! count refined by a local sieve.

mod lucy;
mod miller_rabin;
mod sieve;

use std::collections::BTreeMap;
use std::sync::{Mutex, RwLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::riemann_r_inverse;

pub use lucy::isqrt;
pub use miller_rabin::is_prime_u64;
pub use sieve::SieveBlock;

/// Tunables of a [`PrimeIndexer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Largest value any query may touch.
    pub hard_limit: u64,
    /// Integers per sieve segment.
    pub segment_size: u64,
    /// Below this bound `π` is served from sieve prefix counts.
    pub dense_limit: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { hard_limit: 1 << 46, segment_size: 1 << 20, dense_limit: 1 << 30 }
    }
}

/// Distance from a memoised exact count within which a local sieve beats a
/// fresh sublinear count.
const CHECKPOINT_REACH: u64 = 1 << 27;

pub struct PrimeIndexer {
    config: EngineConfig,
    base_limit: u64,
    base: Vec<u64>,
    /// `block_prefix[k]` = number of primes below `k * segment_size`.
    block_prefix: RwLock<Vec<u64>>,
    /// Exact `π(x)` values computed above the dense limit.
    count_cache: Mutex<BTreeMap<u64, u64>>,
}

impl std::fmt::Debug for PrimeIndexer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrimeIndexer").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Default for PrimeIndexer {
    fn default() -> Self {
        Self::new(EngineConfig::default())
    }
}

impl PrimeIndexer {
    pub fn new(config: EngineConfig) -> Self {
        assert!(config.segment_size >= 64, "segment size too small");
        let base_limit = (isqrt(config.hard_limit) + 1).max(1 << 24);
        let base = sieve::small_primes(base_limit);
        Self {
            config,
            base_limit,
            base,
            block_prefix: RwLock::new(vec![0]),
            count_cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    fn check(&self, x: u64) -> Result<()> {
        if x > self.config.hard_limit {
            return Err(Error::Capacity { value: x, limit: self.config.hard_limit });
        }
        Ok(())
    }

    /// Sieves `[lo, hi)`.
    pub fn sieve(&self, lo: u64, hi: u64) -> Result<SieveBlock> {
        self.check(hi.saturating_sub(1))?;
        Ok(SieveBlock::new(lo, hi, &self.base))
    }

    /// Primes in `[lo, hi)`.
    pub fn primes_in_range(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        if hi <= lo {
            return Ok(Vec::new());
        }
        self.check(hi - 1)?;
        let seg = self.config.segment_size;
        let mut out = Vec::new();
        let mut a = lo;
        while a < hi {
            let b = hi.min(a.saturating_add(seg));
            out.extend(SieveBlock::new(a, b, &self.base).primes());
            a = b;
        }
        Ok(out)
    }

    pub fn is_prime(&self, x: u64) -> Result<bool> {
        self.check(x)?;
        if x <= self.base_limit {
            return Ok(self.base.binary_search(&x).is_ok());
        }
        Ok(miller_rabin::is_prime_u64(x))
    }

    /// Number of primes `<= x`.
    pub fn prime_pi(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        if x <= self.base_limit {
            return Ok(self.base.partition_point(|&p| p <= x) as u64);
        }
        if x < self.config.dense_limit {
            return Ok(self.dense_pi(x));
        }
        Ok(self.sparse_pi(x))
    }

    /// `π(x)` by the sublinear method alone, bypassing every cache.
    pub fn prime_pi_sublinear(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        Ok(lucy::prime_pi(x))
    }

    /// `π(x)` by sieving `[0, x]` segment by segment, bypassing every cache.
    pub fn prime_pi_sieved(&self, x: u64) -> Result<u64> {
        self.check(x)?;
        let seg = self.config.segment_size;
        let blocks = x / seg + 1;
        Ok((0..blocks)
            .into_par_iter()
            .map(|k| {
                let lo = k * seg;
                SieveBlock::new(lo, (lo + seg).min(x + 1), &self.base).count()
            })
            .sum())
    }

    /// The `n`-th prime, `p(1) = 2`.
    pub fn nth_prime(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Domain("p(0)".into()));
        }
        if n <= self.base.len() as u64 {
            return Ok(self.base[n as usize - 1]);
        }
        if let Some(p) = self.dense_nth(n) {
            return Ok(p);
        }
        self.sparse_nth(n)
    }

    /// `π(p)` for a prime `p`; errors when `p` is composite.
    pub fn prime_index(&self, p: u64) -> Result<u64> {
        if !self.is_prime(p)? {
            return Err(Error::NotMember { value: p, filter: "P".into() });
        }
        self.prime_pi(p)
    }

    pub fn mobius(&self, k: u64) -> Result<i8> {
        if k == 0 {
            return Err(Error::Domain("mobius(0)".into()));
        }
        let mut k = k;
        let mut sign = 1i8;
        for &p in &self.base {
            if p * p > k {
                break;
            }
            if k % p == 0 {
                k /= p;
                if k % p == 0 {
                    return Ok(0);
                }
                sign = -sign;
            }
        }
        if k > 1 {
            sign = -sign;
        }
        Ok(sign)
    }

    // ---- dense region -------------------------------------------------

    fn block_count(&self, k: u64) -> u64 {
        let seg = self.config.segment_size;
        let lo = k * seg;
        let hi = lo + seg;
        if hi <= self.base_limit {
            let a = self.base.partition_point(|&p| p < lo);
            let b = self.base.partition_point(|&p| p < hi);
            return (b - a) as u64;
        }
        SieveBlock::new(lo, hi, &self.base).count()
    }

    fn dense_blocks(&self) -> u64 {
        self.config.dense_limit.div_ceil(self.config.segment_size)
    }

    /// Extends the prefix table until it covers `k` blocks or the count
    /// reaches `target`, whichever comes first; returns the table length.
    fn extend_prefix(&self, blocks: u64, target: u64) {
        {
            let table = self.block_prefix.read().expect("prefix lock");
            let have = table.len() as u64 - 1;
            if have >= blocks || *table.last().unwrap_or(&0) >= target {
                return;
            }
        }
        let mut table = self.block_prefix.write().expect("prefix lock");
        let batch = 64u64;
        loop {
            let have = table.len() as u64 - 1;
            if have >= blocks || *table.last().unwrap_or(&0) >= target {
                return;
            }
            let end = (have + batch).min(blocks);
            let counts: Vec<u64> = (have..end).into_par_iter().map(|k| self.block_count(k)).collect();
            for c in counts {
                let last = *table.last().unwrap_or(&0);
                table.push(last + c);
            }
        }
    }

    fn dense_pi(&self, x: u64) -> u64 {
        let seg = self.config.segment_size;
        let k = x / seg;
        self.extend_prefix(k, u64::MAX);
        let before = self.block_prefix.read().expect("prefix lock")[k as usize];
        let lo = k * seg;
        before + SieveBlock::new(lo, x + 1, &self.base).count()
    }

    fn dense_nth(&self, n: u64) -> Option<u64> {
        let blocks = self.dense_blocks();
        self.extend_prefix(blocks, n);
        let table = self.block_prefix.read().expect("prefix lock");
        if *table.last()? < n {
            return None;
        }
        // first k with prefix[k] >= n; the prime lies in block k-1
        let k = table.partition_point(|&c| c < n);
        let before = table[k - 1];
        drop(table);
        let seg = self.config.segment_size;
        let lo = (k as u64 - 1) * seg;
        let block = SieveBlock::new(lo, lo + seg, &self.base);
        let p = block.primes().nth((n - before - 1) as usize)?;
        (p < self.config.dense_limit).then_some(p)
    }

    // ---- sparse region ------------------------------------------------

    fn memo_near(&self, x: u64) -> Option<(u64, u64)> {
        let cache = self.count_cache.lock().expect("count cache");
        let below = cache.range(..=x).next_back().map(|(&a, &b)| (a, b));
        let above = cache.range(x..).next().map(|(&a, &b)| (a, b));
        [below, above]
            .into_iter()
            .flatten()
            .filter(|&(a, _)| a.abs_diff(x) <= CHECKPOINT_REACH)
            .min_by_key(|&(a, _)| a.abs_diff(x))
    }

    fn remember(&self, x: u64, count: u64) {
        self.count_cache.lock().expect("count cache").insert(x, count);
    }

    fn count_between(&self, lo: u64, hi: u64) -> u64 {
        // primes in (lo, hi]
        let seg = self.config.segment_size;
        let mut total = 0;
        let mut a = lo + 1;
        while a <= hi {
            let b = (hi + 1).min(a + seg);
            total += SieveBlock::new(a, b, &self.base).count();
            a = b;
        }
        total
    }

    fn sparse_pi(&self, x: u64) -> u64 {
        if let Some((a, c)) = self.memo_near(x) {
            return if a <= x { c + self.count_between(a, x) } else { c - self.count_between(x, a) };
        }
        let c = lucy::prime_pi(x);
        self.remember(x, c);
        c
    }

    fn sparse_nth(&self, n: u64) -> Result<u64> {
        let guess = riemann_r_inverse(n as f64).round() as u64;
        self.check(guess)?;
        let mut x = guess;
        let mut count = self.sparse_pi(x);
        let seg = self.config.segment_size;
        // walk forward: find the prime with count n
        while count < n {
            let hi = x.saturating_add(seg);
            self.check(hi - 1)?;
            let block = SieveBlock::new(x + 1, hi, &self.base);
            let in_block = block.count();
            if count + in_block >= n {
                let p = block.primes().nth((n - count - 1) as usize).expect("prime within block");
                return Ok(p);
            }
            count += in_block;
            x = hi - 1;
        }
        // walk backward: count >= n; the answer is <= x
        loop {
            let lo = x.saturating_sub(seg - 1).max(2);
            let block = SieveBlock::new(lo, x + 1, &self.base);
            let in_block = block.count();
            if count - in_block < n {
                let primes: Vec<u64> = block.primes().collect();
                let idx = (n - (count - in_block) - 1) as usize;
                return Ok(primes[idx]);
            }
            count -= in_block;
            x = lo - 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_engine() -> PrimeIndexer {
        PrimeIndexer::new(EngineConfig { hard_limit: 1 << 40, segment_size: 1 << 16, dense_limit: 1 << 26 })
    }

    #[test]
    fn reference_values() {
        let e = PrimeIndexer::default();
        assert_eq!(e.nth_prime(31).unwrap(), 127);
        assert_eq!(e.prime_pi(709).unwrap(), 127);
        assert_eq!(e.prime_pi(5381).unwrap(), 709);
        assert!(e.is_prime(746497).unwrap());
        assert_eq!(e.primes_in_range(113, 128).unwrap(), vec![113, 127]);
        assert!(e.primes_in_range(24, 29).unwrap().is_empty());
        assert_eq!(e.mobius(12).unwrap(), 0);
        assert_eq!(e.mobius(30).unwrap(), -1);
        assert_eq!(e.mobius(1).unwrap(), 1);
        assert_eq!(e.prime_index(127).unwrap(), 31);
        assert!(e.prime_index(128).is_err());
        assert!(e.nth_prime(0).is_err());
    }

    #[test]
    fn dense_and_sparse_regions_agree() {
        let e = small_engine();
        for n in [1_100_000u64, 3_000_000, 3_957_809, 3_957_810, 4_000_000, 10_000_000] {
            let p = e.nth_prime(n).unwrap();
            assert!(e.is_prime(p).unwrap());
            assert_eq!(e.prime_pi(p).unwrap(), n, "n = {n}");
            assert_eq!(e.prime_pi(p - 1).unwrap(), n - 1);
        }
        assert_eq!(e.nth_prime(10_000_000).unwrap(), 179_424_673);
        assert_eq!(e.prime_pi(1_000_000_000).unwrap(), 50_847_534);
    }

    #[test]
    fn capacity_is_enforced() {
        let e = small_engine();
        assert!(matches!(e.prime_pi((1 << 40) + 1), Err(Error::Capacity { .. })));
        assert!(matches!(e.is_prime(u64::MAX), Err(Error::Capacity { .. })));
    }

    #[test]
    fn sieved_and_sublinear_counts_agree() {
        let e = small_engine();
        for x in [0u64, 1, 2, 3, 100, 65_535, 65_536, 1 << 20, 12_345_678, 99_999_989] {
            assert_eq!(e.prime_pi_sieved(x).unwrap(), e.prime_pi_sublinear(x).unwrap(), "x = {x}");
        }
    }
}
