//! Exact prime counting by the Lucy–Hedgehog dynamic program over the
//! values `⌊x / k⌋`, a Legendre-style sieve in `O(x^{3/4})` time.

pub fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |s| s > x) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= x) {
        r += 1;
    }
    r
}

pub fn prime_pi(x: u64) -> u64 {
    if x < 2 {
        return 0;
    }
    let r = isqrt(x) as usize;
    // small[v] = S(v), large[i] = S(x / i)
    let mut small: Vec<u64> = (0..=r as u64).map(|v| v.saturating_sub(1)).collect();
    let mut large: Vec<u64> = (0..=r as u64).map(|i| x.checked_div(i).map_or(0, |q| q - 1)).collect();
    for p in 2..=r {
        if small[p] == small[p - 1] {
            continue;
        }
        let sp = small[p - 1];
        let p64 = p as u64;
        let p2 = p64 * p64;
        let lim = (x / p2).min(r as u64) as usize;
        let xp = x / p64;
        for i in 1..=lim {
            let d = i * p;
            let v = if d <= r { large[d] } else { small[(xp / i as u64) as usize] };
            large[i] -= v - sp;
        }
        let lo = p * p;
        for v in (lo..=r).rev() {
            small[v] -= small[v / p] - sp;
        }
    }
    large[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_counts() {
        assert_eq!(prime_pi(1), 0);
        assert_eq!(prime_pi(2), 1);
        assert_eq!(prime_pi(10), 4);
        assert_eq!(prime_pi(709), 127);
        assert_eq!(prime_pi(5381), 709);
        assert_eq!(prime_pi(1_000_000), 78_498);
        assert_eq!(prime_pi(1_000_000_000), 50_847_534);
        assert_eq!(prime_pi(10_000_000_000), 455_052_511);
    }

    #[test]
    fn isqrt_edges() {
        for x in [0u64, 1, 3, 4, 15, 16, 17, u32::MAX as u64, (1 << 46) - 1, 1 << 46, u64::MAX] {
            let r = isqrt(x);
            assert!(r as u128 * r as u128 <= x as u128);
            assert!((r as u128 + 1) * (r as u128 + 1) > x as u128);
        }
    }
}
