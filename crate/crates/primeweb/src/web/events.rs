use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Rotations, Web, ROTATION_RAY};
use crate::engine::PrimeIndexer;
use crate::error::Result;
use crate::sequences::{classify_twin, TwinClass};
use crate::spiral::PlanePoint;

/// A ray whose first element is placed on the web.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayStart {
    pub generator: u64,
    pub prime: u64,
    pub rotation: Option<usize>,
}

/// Rays of the web that start at their first-column element, with the
/// rotation each start falls on.
pub fn ray_start_events(web: &Web, engine: &PrimeIndexer) -> Result<Vec<RayStart>> {
    let rotations = Rotations::from_ray(engine, ROTATION_RAY, 6)?;
    let mut out: Vec<RayStart> = web
        .rays
        .iter()
        .filter_map(|r| r.points.first().filter(|p| p.depth == 1).map(|p| (r.generator, p.prime)))
        .map(|(generator, prime)| RayStart { generator, prime, rotation: rotations.rotation_of(prime) })
        .collect();
    out.sort_unstable_by_key(|s| s.prime);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwinSide {
    Left,
    Right,
}

/// A twin pair placed on the web and the ray that opens between the rays
/// through its images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinEvent {
    pub pair: (u64, u64),
    pub class: TwinClass,
    /// `p(t + 1)`, the start of the ray between `p(t)` and `p(t + 2)`.
    pub mid: u64,
    /// First-column element of the older ray a bound pair is sewn to.
    pub host: Option<u64>,
    pub side: Option<TwinSide>,
    /// Inner corners `(t, t + 2)` and outer corners `(p(t), p(t + 2))`.
    pub trapezoid: ((u64, u64), (u64, u64)),
}

pub fn twin_event(engine: &PrimeIndexer, t: u64) -> Result<TwinEvent> {
    let c = classify_twin(engine, t)?;
    let side = match c.class {
        TwinClass::BoundRight => Some(TwinSide::Right),
        TwinClass::BoundLeft => Some(TwinSide::Left),
        _ => None,
    };
    Ok(TwinEvent {
        pair: c.pair,
        class: c.class,
        mid: engine.nth_prime(t + 1)?,
        host: c.host_row_start,
        side,
        trapezoid: (c.pair, (engine.nth_prime(t)?, engine.nth_prime(t + 2)?)),
    })
}

/// One event per twin pair with both elements placed.
pub fn twin_events(web: &Web, engine: &PrimeIndexer) -> Result<Vec<TwinEvent>> {
    let placed: BTreeSet<u64> = web.primes().into_iter().collect();
    placed
        .iter()
        .filter(|&&t| placed.contains(&(t + 2)))
        .map(|&t| twin_event(engine, t))
        .collect()
}

/// The closed region bounded by the spiral between two consecutive elements
/// of the rotation ray and the chord joining them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitosRegion {
    pub arc: (u64, u64),
    pub boundary: Vec<PlanePoint>,
    /// The skipped primes and whether each lies inside.
    pub skipped: Vec<(u64, bool)>,
    /// Placed primes off the boundary arc that lie inside.
    pub intruders: Vec<u64>,
}

impl MitosRegion {
    pub fn holds(&self) -> bool {
        self.skipped.iter().all(|s| s.1) && self.intruders.is_empty()
    }

    pub fn contains(&self, p: &PlanePoint) -> bool {
        let b = &self.boundary;
        let mut inside = false;
        let mut j = b.len() - 1;
        for i in 0..b.len() {
            let (a, c) = (&b[i], &b[j]);
            if (a.v > p.v) != (c.v > p.v) && p.u < (c.u - a.u) * (p.v - a.v) / (c.v - a.v) + a.u {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

const MITOS_SAMPLES: usize = 512;

fn mitos_region(web: &Web, engine: &PrimeIndexer) -> Result<Option<MitosRegion>> {
    let starts = Rotations::from_ray(engine, ROTATION_RAY, 1)?;
    let (a, b) = (starts.starts()[0], starts.starts()[1]);
    if web.spiral.total_arc() < b as f64 {
        return Ok(None);
    }
    let boundary = (0..=MITOS_SAMPLES)
        .map(|k| web.spiral.isometric_map(a as f64 + (b - a) as f64 * k as f64 / MITOS_SAMPLES as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut region = MitosRegion { arc: (a, b), boundary, skipped: Vec::new(), intruders: Vec::new() };
    let cut = if web.skipped == 0 { 0 } else { engine.nth_prime(web.skipped)? };
    for q in engine.primes_in_range(2, cut + 1)? {
        let inside = region.contains(&web.spiral.isometric_map(q as f64)?);
        region.skipped.push((q, inside));
    }
    for x in web.primes() {
        if (x < a || x > b) && region.contains(&web.point(x).expect("placed").point) {
            region.intruders.push(x);
        }
    }
    Ok(Some(region))
}

/// Coverage of a web by elementary trapezoids `[(p(j), p(j+1)),
/// (p(p(j)), p(p(j+1)))]` with all four corners placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosaicReport {
    /// Indices `j` of the complete pieces.
    pub pieces: Vec<u64>,
    /// Indices between the first index after the skipped primes and the last
    /// piece that have no complete piece.
    pub gaps: Vec<u64>,
    /// Placed primes that are no corner of a complete piece.
    pub uncovered: Vec<u64>,
    pub mitos: Option<MitosRegion>,
}

impl MosaicReport {
    pub fn holds(&self) -> bool {
        self.gaps.is_empty() && self.uncovered.is_empty() && self.mitos.as_ref().map_or(true, MitosRegion::holds)
    }
}

pub fn mosaic_check(web: &Web, engine: &PrimeIndexer) -> Result<MosaicReport> {
    let placed: BTreeSet<u64> = web.primes().into_iter().collect();
    let Some(&top) = placed.last() else {
        return Ok(MosaicReport { pieces: Vec::new(), gaps: Vec::new(), uncovered: Vec::new(), mitos: None });
    };
    let first = web.skipped + 1;
    let last = engine.prime_pi(top)?;
    let mut pieces = Vec::new();
    let mut corners = BTreeSet::new();
    for j in first..last {
        let inner = (engine.nth_prime(j)?, engine.nth_prime(j + 1)?);
        if !placed.contains(&inner.0) || !placed.contains(&inner.1) {
            continue;
        }
        let outer = (engine.nth_prime(inner.0)?, engine.nth_prime(inner.1)?);
        if placed.contains(&outer.0) && placed.contains(&outer.1) {
            pieces.push(j);
            corners.extend([inner.0, inner.1, outer.0, outer.1]);
        }
    }
    let gaps = match pieces.last() {
        Some(&end) => (first..=end).filter(|j| pieces.binary_search(j).is_err()).collect(),
        None => Vec::new(),
    };
    let uncovered = placed.difference(&corners).copied().collect();
    Ok(MosaicReport { pieces, gaps, uncovered, mitos: mitos_region(web, engine)? })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{primes, w3};
    use super::*;
    use crate::web::{build_approx_web, Composition, APPROX_PITCH_DEGREES};

    #[test]
    fn twin_events_on_the_three_turn_web() {
        let e = primes().engine().clone();
        let events = twin_events(w3(), &e).unwrap();
        let find = |t: u64| events.iter().find(|ev| ev.pair.0 == t).copied().unwrap();
        let a = find(71);
        assert_eq!((a.class, a.mid), (TwinClass::Unbound, 359));
        assert_eq!(find(101).mid, 557);
        let b = find(617);
        assert_eq!((b.class, b.host, b.side, b.mid), (TwinClass::BoundRight, Some(113), Some(TwinSide::Right), 4561));
        assert_eq!(b.trapezoid, ((617, 619), (4549, 4567)));
        let placed: BTreeSet<u64> = w3().primes().into_iter().collect();
        let twins = placed.iter().filter(|&&t| placed.contains(&(t + 2))).count();
        assert_eq!(events.len(), twins);

        let c = twin_event(&e, 857).unwrap();
        assert_eq!((c.side, c.host, c.mid), (Some(TwinSide::Left), Some(149), 6659));
        assert_eq!(c.trapezoid.1, (6653, 6661));
    }

    #[test]
    fn ray_starts_by_rotation() {
        let e = primes().engine().clone();
        let starts = ray_start_events(w3(), &e).unwrap();
        assert!(starts.iter().all(|s| s.prime == e.nth_prime(s.generator).unwrap()));
        assert_eq!(starts.first().map(|s| (s.generator, s.prime, s.rotation)), Some((12, 37, Some(1))));
        let second: Vec<u64> = starts.iter().filter(|s| s.rotation == Some(2)).map(|s| s.prime).collect();
        assert!(second.contains(&619) && second.contains(&701));
    }

    #[test]
    fn three_turn_mosaic_holds_and_breaks_without_a_ray() {
        let e = primes().engine().clone();
        let report = mosaic_check(w3(), &e).unwrap();
        assert_eq!(report.pieces.first().copied(), Some(12));
        assert_eq!(report.pieces.len(), 115);
        let mitos = report.mitos.as_ref().unwrap();
        assert_eq!(mitos.skipped.len(), 11);
        assert!(report.holds(), "{:?} {:?} {:?}", report.gaps, report.uncovered, mitos);

        let broken = mosaic_check(&w3().without_ray(20), &e).unwrap();
        assert!(!broken.gaps.is_empty());
        assert!(!broken.holds());

        let mut empty = w3().clone();
        empty.rays.clear();
        assert!(mosaic_check(&empty, &e).unwrap().holds());
    }

    #[test]
    fn four_turn_web_counts() {
        let web = build_approx_web(&primes(), Composition::FourTurns, APPROX_PITCH_DEGREES).unwrap();
        assert_eq!(web.primes().len(), 308);
        let c = web.fit_counts();
        assert_eq!(c.total(), 116);
        assert!(c.exact.abs_diff(94) <= 5, "{c:?}");
    }
}
