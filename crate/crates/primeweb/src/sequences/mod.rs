//! Counting progressions `a(n+1) = g(a(n))` over a counting set, their
//! matrices and the identities they satisfy.

mod filter;
mod matrix;
mod structure;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::{CountingSet, Filter, FilterKind, OddNumbers, DEFAULT_FILTER_REACH};
pub use matrix::{build_matrix, MatrixRow, MesmMatrix, TRUNCATION_MARKER};
pub use structure::{
    classify_twin, classify_twins, cluster_union_check, clusters, composite_segments, multiplicative_set, Cluster,
    ClusterUnionReport, CompositeSegment, Ghost, SegmentPosition, TwinClass, TwinClassification,
};

/// Position of a member inside the matrix: the generator of its row and its
/// depth along the row (depth 1 is the first column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Address {
    pub generator: u64,
    pub depth: u32,
}

impl Address {
    pub fn new(generator: u64, depth: u32) -> Self {
        Self { generator, depth }
    }
}

/// A progression from one generator; `elements[k]` is the value at depth `k+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ray {
    pub filter: String,
    pub generator: u64,
    pub elements: Vec<u64>,
}

impl Ray {
    /// Extends the progression from `generator` to `depth` elements.
    pub fn extend<S: CountingSet + ?Sized>(set: &S, generator: u64, depth: usize) -> Result<Self> {
        let (ray, _) = Self::extend_within(set, generator, depth, u64::MAX)?;
        Ok(ray)
    }

    /// Like [`Ray::extend`] but stops before the first value above
    /// `value_limit`; the flag reports whether the ray was cut short.
    pub fn extend_within<S: CountingSet + ?Sized>(
        set: &S,
        generator: u64,
        depth: usize,
        value_limit: u64,
    ) -> Result<(Self, bool)> {
        if !set.is_generator(generator)? {
            return Err(Error::Domain(format!("{generator} is a member of {}, not a generator", set.name())));
        }
        let reachable = if value_limit == u64::MAX { u64::MAX } else { set.count_upto(value_limit)? };
        let mut elements = Vec::with_capacity(depth);
        let mut current = generator;
        let mut truncated = false;
        while elements.len() < depth {
            if current > reachable {
                truncated = true;
                break;
            }
            current = set.nth(current)?;
            elements.push(current);
        }
        Ok((Self { filter: set.name(), generator, elements }, truncated))
    }

    /// Signed value at `depth`: the generator at 0 and `−g_n(a₀)` at `−n`.
    pub fn value_at(&self, depth: i64) -> Option<i64> {
        match depth {
            0 => Some(self.generator as i64),
            d if d > 0 => self.elements.get(d as usize - 1).map(|&v| v as i64),
            d => self.elements.get((-d) as usize - 1).map(|&v| -(v as i64)),
        }
    }
}

/// `g_n(a₀)` for signed `n`, with `g_{-n}(a₀) = −g_n(a₀)`.
pub fn ray_value<S: CountingSet + ?Sized>(set: &S, generator: u64, depth: i64) -> Result<i64> {
    let ray = Ray::extend(set, generator, depth.unsigned_abs() as usize)?;
    Ok(ray.value_at(depth).expect("materialised depth"))
}

/// Moves `steps` positions along the ray through `value`, which sits at depth
/// `depth`; forward steps apply `g`, backward steps apply `g₋₁`, and the sign
/// flips when the walk crosses the generator.
fn walk<S: CountingSet + ?Sized>(set: &S, value: i64, depth: i64, steps: i64) -> Result<(i64, i64)> {
    let mut v = value;
    let mut d = depth;
    let forward = steps > 0;
    for _ in 0..steps.unsigned_abs() {
        let away_from_zero = (d >= 0) == forward;
        let magnitude = v.unsigned_abs();
        let next = if d == 0 || away_from_zero { set.nth(magnitude)? } else { set.index_of(magnitude)? };
        d += if forward { 1 } else { -1 };
        v = if d < 0 { -(next as i64) } else { next as i64 };
    }
    Ok((v, d))
}

/// `g_{n₂}(g_{n₁}(a₀))` computed by walking the ray, cross-checked against
/// `g_{n₁+n₂}(a₀)`.
pub fn depth_compose<S: CountingSet + ?Sized>(set: &S, generator: u64, n1: i64, n2: i64) -> Result<i64> {
    let (v1, d1) = walk(set, generator as i64, 0, n1)?;
    let (v2, _) = walk(set, v1, d1, n2)?;
    let direct = ray_value(set, generator, n1 + n2)?;
    if v2 != direct {
        return Err(Error::Degenerate(format!("composition {v2} differs from direct value {direct}")));
    }
    Ok(v2)
}

/// `g_n(a₀)` obtained from row 1 by stripping `g_n(1)` back to 1 and
/// re-applying `g` `n` times from `a₀`.
pub fn row_isomorphism<S: CountingSet + ?Sized>(set: &S, generator: u64, n: u32) -> Result<u64> {
    let head = Ray::extend(set, 1, n as usize)?;
    let mut v = head.elements.last().copied().unwrap_or(1);
    for _ in 0..n {
        v = set.index_of(v)?;
    }
    if v != 1 {
        return Err(Error::Degenerate(format!("stripping row 1 ended at {v}")));
    }
    let ray = Ray::extend(set, generator, n as usize)?;
    Ok(ray.elements.last().copied().unwrap_or(generator))
}

/// Row number of generator `m`: its rank among `{1} ∪ (ℕ ∖ A)`.
pub fn generator_rank<S: CountingSet + ?Sized>(set: &S, m: u64) -> Result<u64> {
    if !set.is_generator(m)? {
        return Err(Error::Domain(format!("{m} is not a generator of {}", set.name())));
    }
    let non_members = m - set.count_upto(m)?;
    Ok(if set.contains(1)? { non_members + 1 } else { non_members })
}

/// Address of a member, found by applying `g₋₁` until a generator appears.
pub fn address_of<S: CountingSet + ?Sized>(set: &S, value: u64) -> Result<Address> {
    let mut v = value;
    let mut depth = 0;
    loop {
        v = set.index_of(v)?;
        depth += 1;
        if set.is_generator(v)? {
            return Ok(Address::new(v, depth));
        }
    }
}

/// Value stored at an address.
pub fn value_at<S: CountingSet + ?Sized>(set: &S, address: Address) -> Result<u64> {
    if address.depth == 0 {
        return Err(Error::Domain("depth 0 holds the generator, not a member".into()));
    }
    let ray = Ray::extend(set, address.generator, address.depth as usize)?;
    Ok(*ray.elements.last().expect("depth >= 1"))
}

/// Both sides of the interval identity between two addressed members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalIdentity {
    pub first: u64,
    pub second: u64,
    /// Members strictly between the two values, counted directly.
    pub members_between: u64,
    /// `|a(ν₁−1) − a(ν₂−1)| − 1` from the predecessors on each ray.
    pub predecessor_gap: u64,
}

impl IntervalIdentity {
    pub fn holds(&self) -> bool {
        self.members_between == self.predecessor_gap
    }
}

/// The interval identity for two distinct addresses.
pub fn interval_identity<S: CountingSet + ?Sized>(set: &S, a: Address, b: Address) -> Result<IntervalIdentity> {
    if a.depth == 0 || b.depth == 0 {
        return Err(Error::Domain("addresses start at depth 1".into()));
    }
    let ra = Ray::extend(set, a.generator, a.depth as usize)?;
    let rb = Ray::extend(set, b.generator, b.depth as usize)?;
    let va = ra.value_at(a.depth as i64).expect("materialised") as u64;
    let vb = rb.value_at(b.depth as i64).expect("materialised") as u64;
    if va == vb {
        return Err(Error::Degenerate(format!("both addresses hold {va}")));
    }
    let pa = ra.value_at(a.depth as i64 - 1).expect("materialised") as u64;
    let pb = rb.value_at(b.depth as i64 - 1).expect("materialised") as u64;
    let (lo, hi) = (va.min(vb), va.max(vb));
    let members_between = set.count_upto(hi - 1)? - set.count_upto(lo)?;
    Ok(IntervalIdentity { first: va, second: vb, members_between, predecessor_gap: pa.abs_diff(pb) - 1 })
}

/// The first-column identity for one generator, in the consistent and the
/// printed readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstColumnIdentity {
    pub generator: u64,
    pub first_element: u64,
    /// Members strictly below the first element.
    pub members_below: u64,
    /// `members_below == generator − 1`.
    pub consistent_holds: bool,
    /// `generator == first_element − 1`, the subscript as printed.
    pub printed_holds: bool,
}

pub fn first_column_identity<S: CountingSet + ?Sized>(set: &S, generator: u64) -> Result<FirstColumnIdentity> {
    let first = value_at(set, Address::new(generator, 1))?;
    let below = set.count_upto(first - 1)?;
    Ok(FirstColumnIdentity {
        generator,
        first_element: first,
        members_below: below,
        consistent_holds: below == generator - 1,
        printed_holds: generator == first - 1,
    })
}

/// Result of checking that the rows partition the members up to a bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub filter: String,
    pub bound: u64,
    pub members: Vec<u64>,
    /// `addresses[k]` locates `members[k]`.
    pub addresses: Vec<Address>,
    pub rows_used: u64,
    /// Members reached by more than one row.
    pub duplicates: Vec<u64>,
    /// Members reached by no row.
    pub missing: Vec<u64>,
}

impl PartitionReport {
    pub fn exact(&self) -> bool {
        self.duplicates.is_empty() && self.missing.is_empty()
    }

    pub fn address(&self, value: u64) -> Option<Address> {
        let k = self.members.binary_search(&value).ok()?;
        Some(self.addresses[k])
    }
}

/// Runs every row forward over the members `<= bound` and records which row
/// reaches each member.
pub fn verify_partition<S: CountingSet + ?Sized>(set: &S, bound: u64) -> Result<PartitionReport> {
    let members = set.members_upto(bound)?;
    let n = members.len() as u64;
    let mut slots: Vec<Option<Address>> = vec![None; members.len()];
    let mut duplicates = Vec::new();
    let mut rows_used = 0;
    // g(m) <= bound exactly when m <= n; membership below n via the list
    let is_member = |m: u64| members.binary_search(&m).is_ok();
    for generator in 1..=n {
        if generator != 1 && is_member(generator) {
            continue;
        }
        rows_used += 1;
        let mut index = generator;
        let mut depth = 0;
        while index <= n {
            depth += 1;
            let slot = &mut slots[index as usize - 1];
            if slot.is_some() {
                duplicates.push(members[index as usize - 1]);
            } else {
                *slot = Some(Address::new(generator, depth));
            }
            index = members[index as usize - 1];
        }
    }
    let missing: Vec<u64> = slots.iter().zip(&members).filter(|(s, _)| s.is_none()).map(|(_, &m)| m).collect();
    let addresses = slots.into_iter().map(|s| s.unwrap_or(Address::new(0, 0))).collect();
    Ok(PartitionReport { filter: set.name(), bound, members, addresses, rows_used, duplicates, missing })
}

/// The progression from 2 over the odd numbers.
pub fn odd_progression(depth: usize) -> Vec<u64> {
    Ray::extend(&OddNumbers, 2, depth).expect("2 is a generator of the odd numbers").elements
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::PrimeIndexer;

    fn primes() -> Filter {
        Filter::new(FilterKind::Primes, Arc::new(PrimeIndexer::default()))
    }

    #[test]
    fn rays_from_generators() {
        let p = primes();
        assert_eq!(Ray::extend(&p, 1, 5).unwrap().elements, vec![2, 3, 5, 11, 31]);
        assert_eq!(Ray::extend(&p, 4, 3).unwrap().elements, vec![7, 17, 59]);
        assert!(Ray::extend(&p, 7, 2).is_err());
        let e = p.engine().clone();
        let t1 = Filter::new(FilterKind::TwinLower, e.clone());
        assert_eq!(Ray::extend(&t1, 1, 3).unwrap().elements, vec![3, 11, 137]);
        let h = Filter::new(FilterKind::SquarePlusOne, e);
        assert_eq!(Ray::extend(&h, 1, 3).unwrap().elements, vec![2, 5, 101]);
    }

    #[test]
    fn signed_depths_and_composition() {
        let p = primes();
        assert_eq!(depth_compose(&p, 4, 2, -1).unwrap(), 7);
        assert_eq!(ray_value(&p, 4, -2).unwrap(), -17);
        assert_eq!(depth_compose(&p, 4, -1, -1).unwrap(), -17);
        assert_eq!(depth_compose(&p, 4, -2, 3).unwrap(), 7);
        assert_eq!(depth_compose(&p, 4, 1, -1).unwrap(), 4);
        assert_eq!(ray_value(&p, 4, 0).unwrap(), 4);
    }

    #[test]
    fn row_isomorphism_examples() {
        let p = primes();
        assert_eq!(row_isomorphism(&p, 4, 2).unwrap(), 17);
        assert_eq!(row_isomorphism(&p, 6, 3).unwrap(), 179);
    }

    #[test]
    fn generator_rank_is_m_minus_pi() {
        let p = primes();
        assert_eq!(generator_rank(&p, 12).unwrap(), 7);
        assert_eq!(generator_rank(&p, 1).unwrap(), 1);
        assert!(generator_rank(&p, 13).is_err());
    }

    #[test]
    fn addresses_and_partition() {
        let p = primes();
        let report = verify_partition(&p, 100).unwrap();
        assert!(report.exact());
        assert_eq!(address_of(&p, 127).unwrap(), Address::new(1, 6));
        assert_eq!(report.address(97), Some(address_of(&p, 97).unwrap()));
        let report = verify_partition(&p, 1000).unwrap();
        assert_eq!(report.address(127), Some(Address::new(1, 6)));
    }

    #[test]
    fn interval_identity_examples() {
        let p = primes();
        let a = address_of(&p, 7).unwrap();
        let b = address_of(&p, 13).unwrap();
        let id = interval_identity(&p, a, b).unwrap();
        assert_eq!(id.members_between, 1);
        assert!(id.holds());
        let id = interval_identity(&p, address_of(&p, 17).unwrap(), address_of(&p, 41).unwrap()).unwrap();
        assert_eq!((id.members_between, id.predecessor_gap), (5, 5));
        assert!(matches!(interval_identity(&p, a, a), Err(Error::Degenerate(_))));
    }

    #[test]
    fn first_column_readings() {
        let p = primes();
        let c = first_column_identity(&p, 4).unwrap();
        assert_eq!(c.first_element, 7);
        assert_eq!(c.members_below, 3);
        assert!(c.consistent_holds);
        assert!(!c.printed_holds);
    }

    #[test]
    fn odd_progression_from_two() {
        assert_eq!(odd_progression(7), vec![3, 5, 9, 17, 33, 65, 129]);
        assert_eq!(odd_progression(1), vec![3]);
    }
}
