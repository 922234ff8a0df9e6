//! Engine and families against brute force.

use std::sync::{Arc, OnceLock};

use primeweb::engine::{is_prime_u64, PrimeIndexer};
use primeweb::sequences::{build_matrix, CountingSet, Filter, FilterKind, Ray};

const LIMIT: u64 = 2_000_000;

fn sieve() -> &'static Vec<bool> {
    static S: OnceLock<Vec<bool>> = OnceLock::new();
    S.get_or_init(|| {
        let n = LIMIT as usize;
        let mut s = vec![true; n + 1];
        s[0] = false;
        s[1] = false;
        let mut i = 2;
        while i * i <= n {
            if s[i] {
                (i * i..=n).step_by(i).for_each(|j| s[j] = false);
            }
            i += 1;
        }
        s
    })
}

fn naive_primes() -> Vec<u64> {
    sieve().iter().enumerate().filter(|(_, &p)| p).map(|(i, _)| i as u64).collect()
}

fn trial_division(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn engine() -> Arc<PrimeIndexer> {
    static E: OnceLock<Arc<PrimeIndexer>> = OnceLock::new();
    E.get_or_init(|| Arc::new(PrimeIndexer::default())).clone()
}

#[test]
fn ranges_counts_and_indices() {
    let e = engine();
    let primes = naive_primes();
    assert_eq!(e.primes_in_range(0, LIMIT + 1).unwrap(), primes);
    assert_eq!(e.primes_in_range(999_983, 1_000_004).unwrap(), [999_983, 1_000_003]);
    for x in [0, 1, 2, 3, 100, 65_535, 1_000_000, LIMIT] {
        let expected = primes.partition_point(|&p| p <= x) as u64;
        assert_eq!(e.prime_pi(x).unwrap(), expected, "pi({x})");
    }
    for n in [1u64, 2, 1000, 100_000, primes.len() as u64] {
        assert_eq!(e.nth_prime(n).unwrap(), primes[n as usize - 1]);
    }
}

#[test]
fn primality_near_word_boundaries() {
    for base in [1u64 << 32, 1 << 40, 1_000_000_000_000] {
        for n in base - 200..base + 200 {
            assert_eq!(is_prime_u64(n), trial_division(n), "{n}");
        }
    }
    assert!(is_prime_u64(18_446_744_073_709_551_557));
    assert!(!is_prime_u64(3_215_031_751));
}

#[test]
fn sublinear_counts_match_the_sieve_and_published_values() {
    let e = engine();
    for x in [1u64 << 31, 3_000_000_017] {
        assert_eq!(e.prime_pi_sublinear(x).unwrap(), e.prime_pi_sieved(x).unwrap(), "{x}");
    }
    assert_eq!(e.prime_pi(10_000_000_000).unwrap(), 455_052_511);
    assert_eq!(e.prime_pi(1_000_000_000_000).unwrap(), 37_607_912_018);
    assert_eq!(e.nth_prime(455_052_511).unwrap(), 9_999_999_967);
}

fn brute_members(kind: FilterKind, bound: u64) -> Vec<u64> {
    let s = sieve();
    let p = |n: u64| n <= LIMIT && s[n as usize];
    let twin_low = |n: u64| p(n) && p(n + 2);
    let in_twin = |n: u64| p(n) && (p(n + 2) || (n >= 2 && p(n - 2)));
    (2..=bound)
        .filter(|&n| match kind {
            FilterKind::Primes => p(n),
            FilterKind::TwinLower => twin_low(n),
            FilterKind::TwinUpper => n >= 2 && twin_low(n - 2),
            FilterKind::Twin => in_twin(n),
            FilterKind::TwinSixPrime => twin_low(n) && (n + 1) % 6 == 0 && p((n + 1) / 6),
            FilterKind::Isolated => p(n) && !in_twin(n),
            FilterKind::FourNMinusOne => p(n) && n % 4 == 3,
            FilterKind::FourNPlusOne => p(n) && n % 4 == 1,
            FilterKind::SixNMinusOne => p(n) && n % 6 == 5,
            FilterKind::SixNPlusOne => p(n) && n % 6 == 1,
            FilterKind::Euler => p(n) && (0..=n).take_while(|k| k * k <= n).any(|k| k * k + k + 41 == n),
            FilterKind::SquarePlusOne => p(n) && (1..=n).take_while(|k| k * k < n).any(|k| k * k + 1 == n),
        })
        .collect()
}

#[test]
fn families_match_their_definitions() {
    let e = engine();
    for kind in FilterKind::ALL {
        let f = Filter::new(kind, e.clone());
        let bound = 100_000;
        let expected = brute_members(kind, bound);
        assert_eq!(f.members_upto(bound).unwrap(), expected, "{kind}");
        for (i, &m) in expected.iter().enumerate().step_by(97) {
            assert_eq!(f.nth(i as u64 + 1).unwrap(), m, "{kind} nth");
            assert_eq!(f.count_upto(m).unwrap(), i as u64 + 1, "{kind} count");
            assert!(f.contains(m).unwrap());
        }
    }
}

#[test]
fn rays_follow_repeated_indexing() {
    let e = engine();
    let primes = naive_primes();
    let p = Filter::new(FilterKind::Primes, e);
    for g in [1u64, 4, 6, 8, 9, 10, 12, 14, 15, 16, 18, 20, 21, 22, 24, 25, 26, 27, 28] {
        let ray = Ray::extend_within(&p, g, 64, LIMIT).unwrap().0;
        let mut v = g;
        let mut naive = Vec::new();
        while let Some(&next) = primes.get(v as usize - 1) {
            naive.push(next);
            v = next;
        }
        assert_eq!(ray.elements, naive, "ray {g}");
    }
}

#[test]
fn printed_matrix_corners() {
    let e = engine();
    let p = Filter::new(FilterKind::Primes, e.clone());
    let m = build_matrix(&p, 7, 4, u64::MAX).unwrap();
    let rows: Vec<(u64, Vec<u64>)> = m.rows.iter().map(|r| (r.generator, r.elements.clone())).collect();
    assert_eq!(
        rows,
        [
            (1, vec![2, 3, 5, 11]),
            (4, vec![7, 17, 59, 277]),
            (6, vec![13, 41, 179, 1063]),
            (8, vec![19, 67, 331, 2221]),
            (9, vec![23, 83, 431, 3001]),
            (10, vec![29, 109, 599, 4397]),
            (12, vec![37, 157, 919, 7193]),
        ]
    );
    let t1 = Filter::new(FilterKind::TwinLower, e.clone());
    let m = build_matrix(&t1, 2, 6, u64::MAX).unwrap();
    assert_eq!(m.rows[0].elements, [3, 11, 137, 5639, 641_129, 152_921_807]);
    assert_eq!(m.rows[1].elements[..4], [5, 29, 641, 44381]);
    let h = Filter::new(FilterKind::SquarePlusOne, e);
    assert_eq!(Ray::extend(&h, 1, 3).unwrap().elements, [2, 5, 101]);
}
