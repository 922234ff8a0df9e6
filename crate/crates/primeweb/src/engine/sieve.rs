//! Segmented, odd-only sieve blocks.

/// Primality flags for the half-open range `[lo, hi)`.
#[derive(Debug, Clone)]
pub struct SieveBlock {
    lo: u64,
    hi: u64,
    /// First odd number `>= lo`; bit `i` stands for `odd_lo + 2 i`.
    odd_lo: u64,
    bits: Vec<u64>,
}

impl SieveBlock {
    /// Sieves `[lo, hi)` with `base`, which must hold every prime up to `sqrt(hi)`.
    pub fn new(lo: u64, hi: u64, base: &[u64]) -> Self {
        let hi = hi.max(lo);
        let odd_lo = lo | 1;
        let n_odd = if hi > odd_lo { (hi - odd_lo).div_ceil(2) } else { 0 };
        let words = n_odd.div_ceil(64) as usize;
        let mut bits = vec![!0u64; words];
        if n_odd % 64 != 0 {
            if let Some(last) = bits.last_mut() {
                *last = (1u64 << (n_odd % 64)) - 1;
            }
        }
        if odd_lo == 1 && n_odd > 0 {
            bits[0] &= !1;
        }
        for &p in base.iter().skip(1) {
            let p2 = p * p;
            if p2 >= hi {
                break;
            }
            let mut start = if p2 >= odd_lo { p2 } else { odd_lo.div_ceil(p) * p };
            if start % 2 == 0 {
                start += p;
            }
            let mut i = (start - odd_lo) / 2;
            while i < n_odd {
                bits[(i / 64) as usize] &= !(1u64 << (i % 64));
                i += p;
            }
        }
        Self { lo, hi, odd_lo, bits }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    fn has_two(&self) -> bool {
        self.lo <= 2 && 2 < self.hi
    }

    pub fn is_prime(&self, x: u64) -> bool {
        assert!(x >= self.lo && x < self.hi, "{x} outside sieve block");
        if x == 2 {
            return true;
        }
        if x % 2 == 0 {
            return false;
        }
        let i = (x - self.odd_lo) / 2;
        self.bits[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Number of primes in `[lo, x]`.
    pub fn count_upto(&self, x: u64) -> u64 {
        if x < self.lo {
            return 0;
        }
        let x = x.min(self.hi - 1);
        let mut count = u64::from(self.has_two() && x >= 2);
        if x < self.odd_lo {
            return count;
        }
        let last = (x - self.odd_lo) / 2;
        let full = (last / 64) as usize;
        count += self.bits[..full].iter().map(|w| u64::from(w.count_ones())).sum::<u64>();
        let rem = last % 64;
        let mask = if rem == 63 { !0 } else { (1u64 << (rem + 1)) - 1 };
        count + u64::from((self.bits[full] & mask).count_ones())
    }

    pub fn count(&self) -> u64 {
        if self.hi == self.lo {
            return 0;
        }
        self.count_upto(self.hi - 1)
    }

    /// Primes of the block in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = self.has_two().then_some(2);
        let odd_lo = self.odd_lo;
        let odds = self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as u64;
                word &= word - 1;
                Some(odd_lo + 2 * (w as u64 * 64 + b))
            })
        });
        two.into_iter().chain(odds)
    }
}

/// All primes `<= limit` by a plain sieve of Eratosthenes.
pub fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(if n > 10 { (1.3 * n as f64 / (n as f64).ln()) as usize } else { 8 });
    let mut i = 2;
    while i <= n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_matches_small_table() {
        let base = small_primes(1000);
        for (lo, hi) in [(0, 1), (0, 2), (0, 3), (0, 100), (1, 2), (2, 3), (24, 29), (113, 128), (500, 999)] {
            let block = SieveBlock::new(lo, hi, &base);
            let expect: Vec<u64> = base.iter().copied().filter(|&p| p >= lo && p < hi).collect();
            assert_eq!(block.primes().collect::<Vec<_>>(), expect, "[{lo},{hi})");
            assert_eq!(block.count(), expect.len() as u64);
            for x in lo..hi {
                assert_eq!(block.is_prime(x), base.binary_search(&x).is_ok(), "{x}");
                let c = expect.iter().filter(|&&p| p <= x).count() as u64;
                assert_eq!(block.count_upto(x), c, "count to {x}");
            }
        }
    }

    #[test]
    fn empty_gap_block() {
        let base = small_primes(100);
        let block = SieveBlock::new(24, 29, &base);
        assert_eq!(block.count(), 0);
    }
}
