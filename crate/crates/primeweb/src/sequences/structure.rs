//! Composite segments between consecutive primes, their prime-index images
//! (clusters), the twin classification and the multiplicative sets of rows.

use serde::{Deserialize, Serialize};

use super::{Address, CountingSet, Filter, Ray};
use crate::engine::PrimeIndexer;
use crate::error::{Error, Result};

/// Tagged reference to a prime that closes off a composite segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ghost {
    /// The prime referred to.
    pub prime: u64,
    /// Its index, `π(prime)`.
    pub index: u64,
}

/// The composites strictly between `p(μ)` and `p(μ+1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeSegment {
    pub mu: u64,
    pub members: Vec<u64>,
    pub left: Ghost,
    pub right: Ghost,
}

impl CompositeSegment {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn segment(engine: &PrimeIndexer, mu: u64) -> Result<CompositeSegment> {
    let a = engine.nth_prime(mu)?;
    let b = engine.nth_prime(mu + 1)?;
    Ok(CompositeSegment {
        mu,
        members: (a + 1..b).collect(),
        left: Ghost { prime: a, index: mu },
        right: Ghost { prime: b, index: mu + 1 },
    })
}

/// Non-empty segments `m̄_μ` for `μ >= 2` with `p(μ+1) <= bound`.
pub fn composite_segments(engine: &PrimeIndexer, bound: u64) -> Result<Vec<CompositeSegment>> {
    let last = engine.prime_pi(bound)?;
    (2..last).map(|mu| segment(engine, mu)).collect()
}

/// Image of a composite segment under `m ↦ p(m)`, with its completing ghosts
/// `p(p(μ))` and `p(p(μ+1))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub mu: u64,
    pub primes: Vec<u64>,
    pub left: Ghost,
    pub right: Ghost,
}

impl Cluster {
    /// The completed cluster: left ghost, members, right ghost.
    pub fn completed(&self) -> Vec<u64> {
        let mut v = vec![self.left.prime];
        v.extend(&self.primes);
        v.push(self.right.prime);
        v
    }
}

/// Clusters for `μ = 1 ..` while the right ghost stays `<= bound`.
pub fn clusters(engine: &PrimeIndexer, bound: u64) -> Result<Vec<Cluster>> {
    let mut out = Vec::new();
    for mu in 1.. {
        let a = engine.nth_prime(mu)?;
        let b = engine.nth_prime(mu + 1)?;
        let right = engine.nth_prime(b)?;
        if right > bound {
            break;
        }
        let primes = (a + 1..b).map(|m| engine.nth_prime(m)).collect::<Result<Vec<_>>>()?;
        out.push(Cluster {
            mu,
            primes,
            left: Ghost { prime: engine.nth_prime(a)?, index: a },
            right: Ghost { prime: right, index: b },
        });
    }
    Ok(out)
}

/// Coverage of the primes up to a bound by completed clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterUnionReport {
    pub bound: u64,
    pub clusters: usize,
    /// Primes covered by the union.
    pub covered: u64,
    /// Primes `<= bound` with index `>= 2` that no completed cluster contains.
    pub missing: Vec<u64>,
    /// Primes found in the interior of two clusters.
    pub repeated: Vec<u64>,
    /// Ghosts shared by neighbouring clusters.
    pub junctions: u64,
}

impl ClusterUnionReport {
    pub fn exact(&self) -> bool {
        self.missing.is_empty() && self.repeated.is_empty()
    }
}

/// Checks that the completed clusters cover every prime `p(k)`, `k >= 2`, up
/// to `bound`, members once each and ghosts at most twice. `p(1) = 2` is the
/// image of the generator 1 and lies in no cluster.
pub fn cluster_union_check(engine: &PrimeIndexer, bound: u64) -> Result<ClusterUnionReport> {
    let primes = engine.primes_in_range(2, bound + 1)?;
    let mut interior = vec![0u8; primes.len()];
    let mut ghost = vec![0u8; primes.len()];
    let slot = |p: u64| primes.binary_search(&p).ok();
    let cs = clusters(engine, bound)?;
    for c in &cs {
        for &p in &c.primes {
            if let Some(i) = slot(p) {
                interior[i] += 1;
            }
        }
        for g in [c.left.prime, c.right.prime] {
            if let Some(i) = slot(g) {
                ghost[i] += 1;
            }
        }
    }
    // the union is complete up to the last right ghost
    let reach = cs.last().map_or(0, |c| c.right.prime);
    let mut missing = Vec::new();
    let mut repeated = Vec::new();
    let mut junctions = 0;
    for (i, &p) in primes.iter().enumerate().skip(1) {
        if p > reach {
            break;
        }
        match (interior[i], ghost[i]) {
            (0, 0) => missing.push(p),
            (1, 0) => {}
            (0, 1) | (0, 2) => junctions += u64::from(ghost[i] == 2),
            _ => repeated.push(p),
        }
    }
    let covered = primes.iter().skip(1).take_while(|&&p| p <= reach).count() as u64 - missing.len() as u64;
    Ok(ClusterUnionReport { bound, clusters: cs.len(), covered, missing, repeated, junctions })
}

/// Kind of a twin pair by how many of its elements start a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwinClass {
    /// Both elements start rows.
    Unbound,
    /// Only the upper element starts a row; the lower continues an older row.
    BoundRight,
    /// Only the lower element starts a row; the upper continues an older row.
    BoundLeft,
    /// Neither element starts a row: the pair (3, 5).
    Special,
}

/// Where a composite index sits inside its segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentPosition {
    Start,
    End,
    /// The segment has this index as its only member.
    Single,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinClassification {
    pub pair: (u64, u64),
    pub indices: (u64, u64),
    pub class: TwinClass,
    /// `μ` of the composite segment holding the composite index (or indices).
    pub segment_mu: Option<u64>,
    pub position: Option<SegmentPosition>,
    /// The prime index of the element that continues an older row.
    pub ghost: Option<Ghost>,
    /// First-column element of the row containing the continuing element.
    pub host_row_start: Option<u64>,
    /// Address of each element in the prime matrix.
    pub addresses: (Address, Address),
}

fn in_first_column(engine: &PrimeIndexer, index: u64) -> Result<bool> {
    Ok(index == 1 || !engine.is_prime(index)?)
}

/// The first-column element of the row through `p`.
fn row_start(engine: &PrimeIndexer, p: u64) -> Result<u64> {
    let mut v = p;
    loop {
        let i = engine.prime_pi(v)?;
        if in_first_column(engine, i)? {
            return Ok(v);
        }
        v = i;
    }
}

fn prime_address(engine: &PrimeIndexer, p: u64) -> Result<Address> {
    let mut v = p;
    let mut depth = 0;
    loop {
        v = engine.prime_pi(v)?;
        depth += 1;
        if in_first_column(engine, v)? {
            return Ok(Address::new(v, depth));
        }
    }
}

/// Classifies the twin pair `(t, t + 2)`.
pub fn classify_twin(engine: &PrimeIndexer, t: u64) -> Result<TwinClassification> {
    if !engine.is_prime(t)? || !engine.is_prime(t + 2)? {
        return Err(Error::Domain(format!("({t}, {}) is not a twin pair", t + 2)));
    }
    let i1 = engine.prime_pi(t)?;
    let i2 = i1 + 1;
    let c1 = in_first_column(engine, i1)?;
    let c2 = in_first_column(engine, i2)?;
    let class = match (c1, c2) {
        (true, true) => TwinClass::Unbound,
        (false, true) => TwinClass::BoundRight,
        (true, false) => TwinClass::BoundLeft,
        (false, false) => TwinClass::Special,
    };
    let composite = match class {
        TwinClass::Unbound | TwinClass::BoundLeft => Some(i1),
        TwinClass::BoundRight => Some(i2),
        TwinClass::Special => None,
    };
    let (segment_mu, position) = match composite {
        Some(k) if k > 1 => {
            let mu = engine.prime_pi(k)?;
            let lo = engine.nth_prime(mu)?;
            let hi = engine.nth_prime(mu + 1)?;
            let pos = match (k == lo + 1, k == hi - 1) {
                (true, true) => SegmentPosition::Single,
                (true, false) => SegmentPosition::Start,
                (false, true) => SegmentPosition::End,
                (false, false) => SegmentPosition::Interior,
            };
            (Some(mu), Some(pos))
        }
        _ => (None, None),
    };
    let (ghost, host) = match class {
        TwinClass::BoundRight => (Some(Ghost { prime: i1, index: engine.prime_pi(i1)? }), Some(row_start(engine, t)?)),
        TwinClass::BoundLeft => {
            (Some(Ghost { prime: i2, index: engine.prime_pi(i2)? }), Some(row_start(engine, t + 2)?))
        }
        _ => (None, None),
    };
    Ok(TwinClassification {
        pair: (t, t + 2),
        indices: (i1, i2),
        class,
        segment_mu,
        position,
        ghost,
        host_row_start: host,
        addresses: (prime_address(engine, t)?, prime_address(engine, t + 2)?),
    })
}

/// Classifies every twin pair with upper element `<= bound`.
pub fn classify_twins(engine: &PrimeIndexer, bound: u64) -> Result<Vec<TwinClassification>> {
    let primes = engine.primes_in_range(2, bound + 1)?;
    primes
        .windows(2)
        .filter(|w| w[1] - w[0] == 2)
        .map(|w| classify_twin(engine, w[0]))
        .collect()
}

/// All products of elements of row `generator` of the prime matrix, up to
/// `bound`, with 1 omitted.
pub fn multiplicative_set(primes: &Filter, generator: u64, bound: u64) -> Result<Vec<u64>> {
    if primes.name() != "P" {
        return Err(Error::Domain("multiplicative sets are defined over the prime matrix".into()));
    }
    let (ray, _) = Ray::extend_within(primes, generator, 64, bound)?;
    let base = ray.elements;
    let mut out = Vec::new();
    fn grow(base: &[u64], from: usize, acc: u64, bound: u64, out: &mut Vec<u64>) {
        for (i, &p) in base.iter().enumerate().skip(from) {
            let Some(next) = acc.checked_mul(p).filter(|&v| v <= bound) else { break };
            out.push(next);
            grow(base, i, next, bound, out);
        }
    }
    grow(&base, 0, 1, bound, &mut out);
    out.sort_unstable();
    Ok(out)
}
