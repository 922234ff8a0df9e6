//! Spider webs: rays drawn as straight lines through primes placed on a
//! spiral at arc length equal to their value.
//!
//! The pure web places primes on one logarithmic spiral and joins the
//! elements of each ray by a polyline. The approximate webs start from a
//! logarithmic spiral and append one spline segment per constrained prime so
//! that the prime lands on the line of its ray.

mod compose;
mod events;
mod solve;
mod svg;
mod system;
mod trapezoid;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use compose::{
    composition_rays, truncated_ray, truncated_rays, Composition, TruncatedRay, DEFAULT_SKIPPED, ROTATION_RAY,
};
pub use events::{
    mosaic_check, ray_start_events, twin_event, twin_events, MitosRegion, MosaicReport, RayStart, TwinEvent, TwinSide,
};
pub use solve::{solve_segment, Fit, SegmentSolve, SegmentTarget, SolveMethod, APPROX_ANGLE_TOL, EXACT_ANGLE_TOL};
pub use svg::{to_svg, SvgOptions};
pub use system::{assemble_w3_system, Constraint, RayLine, W3Knot, W3System};
pub use trapezoid::{pi_geometric, PiGeometric, Rotations, Trapezoid, TrapezoidLevel};

use crate::error::{Error, Result};
use crate::numeric::NewtonOptions;
use crate::sequences::{CountingSet, Filter};
use crate::spiral::{LogSpiral, PlanePoint, SplineSpiral};
use solve::wrap_angle;

/// Pitch of the spiral carrying the pure web.
pub const PURE_PITCH_DEGREES: f64 = 74.69;
/// Pitch of the logarithmic part of the approximate webs.
pub const APPROX_PITCH_DEGREES: f64 = 74.18896;
/// Largest relative gap between a prime and the arc length at its point.
pub const ISOMETRY_TOL: f64 = 1e-9;
/// Rays closer than this in direction count as sharing an angle.
pub const INJECTIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WebVariant {
    PureLog,
    Approximate(Composition),
    /// The primes of [`Composition::ThreeTurns`] with successive segments of
    /// each ray pointing in opposite directions along its line.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedPrime {
    pub prime: u64,
    /// Depth in the full ray.
    pub depth: usize,
    pub point: PlanePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebRay {
    pub generator: u64,
    pub points: Vec<PlacedPrime>,
}

impl WebRay {
    /// Direction from the first to the second point.
    pub fn direction(&self) -> Option<f64> {
        let [a, b, ..] = self.points.as_slice() else { return None };
        Some((b.point.v - a.point.v).atan2(b.point.u - a.point.u))
    }

    /// Largest deviation of the directions from the first point to each
    /// later point, relative to the first of them.
    pub fn angular_spread(&self) -> f64 {
        let Some(base) = self.direction() else { return 0.0 };
        let first = self.points[0].point;
        self.points[2..]
            .iter()
            .map(|p| wrap_angle((p.point.v - first.v).atan2(p.point.u - first.u) - base).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitCounts {
    pub exact: usize,
    pub approximate: usize,
    pub failed: usize,
}

impl FitCounts {
    pub fn total(&self) -> usize {
        self.exact + self.approximate + self.failed
    }
}

/// Straightness of one ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayStraightness {
    pub generator: u64,
    pub spread: f64,
    /// Every segment placing an element of the ray was solved exactly.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Web {
    pub variant: WebVariant,
    pub pitch_degrees: f64,
    pub rotations: usize,
    pub skipped: u64,
    pub spiral: SplineSpiral,
    pub rays: Vec<WebRay>,
    pub solves: Vec<SegmentSolve>,
}

impl Web {
    pub fn ray(&self, generator: u64) -> Option<&WebRay> {
        self.rays.iter().find(|r| r.generator == generator)
    }

    /// All placed primes in increasing order.
    pub fn primes(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.rays.iter().flat_map(|r| r.points.iter().map(|p| p.prime)).collect();
        set.into_iter().collect()
    }

    pub fn point(&self, prime: u64) -> Option<&PlacedPrime> {
        self.rays.iter().flat_map(|r| &r.points).find(|p| p.prime == prime)
    }

    pub fn fit_counts(&self) -> FitCounts {
        let mut c = FitCounts::default();
        for s in &self.solves {
            match s.fit {
                Fit::Exact => c.exact += 1,
                Fit::Approximate => c.approximate += 1,
                Fit::Failed => c.failed += 1,
            }
        }
        c
    }

    /// Largest `|λ(θ) − p| / p` over the placed primes, with `λ` recomputed
    /// from each point's angle.
    pub fn isometry_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in self.rays.iter().flat_map(|r| &r.points) {
            let arc = self.spiral.lss_arc(0.0, p.point.theta)?;
            worst = worst.max((arc - p.prime as f64).abs() / p.prime as f64);
        }
        Ok(worst)
    }

    pub fn straightness(&self) -> Vec<RayStraightness> {
        self.rays
            .iter()
            .map(|r| RayStraightness {
                generator: r.generator,
                spread: r.angular_spread(),
                exact: self.solves.iter().filter(|s| s.generator == r.generator).all(|s| s.fit == Fit::Exact),
            })
            .collect()
    }

    /// Pairs of rays whose directions agree within `tol` radians.
    pub fn shared_directions(&self, tol: f64) -> Vec<(u64, u64)> {
        let dirs: Vec<(u64, f64)> = self.rays.iter().filter_map(|r| Some((r.generator, r.direction()?))).collect();
        let mut out = Vec::new();
        for (i, a) in dirs.iter().enumerate() {
            for b in &dirs[i + 1..] {
                if wrap_angle(a.1 - b.1).abs() <= tol {
                    out.push((a.0, b.0));
                }
            }
        }
        out
    }

    /// Pairs of rays whose polylines cross.
    pub fn crossings(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for (i, a) in self.rays.iter().enumerate() {
            for b in &self.rays[i + 1..] {
                let hit = a.points.windows(2).any(|s| {
                    b.points.windows(2).any(|t| segments_cross(&s[0].point, &s[1].point, &t[0].point, &t[1].point))
                });
                if hit {
                    out.push((a.generator, b.generator));
                }
            }
        }
        out
    }

    /// The web with one ray removed.
    pub fn without_ray(&self, generator: u64) -> Self {
        let mut web = self.clone();
        web.rays.retain(|r| r.generator != generator);
        web
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Export(e.to_string()))
    }
}

fn cross(o: &PlanePoint, a: &PlanePoint, b: &PlanePoint) -> f64 {
    (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u)
}

/// Proper crossing of segments `ab` and `cd`; shared endpoints do not count.
fn segments_cross(a: &PlanePoint, b: &PlanePoint, c: &PlanePoint, d: &PlanePoint) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn place(spiral: &SplineSpiral, ray: &TruncatedRay) -> Result<WebRay> {
    let points = ray
        .elements
        .iter()
        .enumerate()
        .map(|(k, &x)| Ok(PlacedPrime { prime: x, depth: ray.first_depth + k, point: spiral.isometric_map(x as f64)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(WebRay { generator: ray.generator, points })
}

/// Primes of the given rays placed on one logarithmic spiral over
/// `rotations` full turns; rays are polylines through their elements.
pub fn build_pure_log_web(primes: &Filter, pitch_degrees: f64, rotations: usize, generators: &[u64]) -> Result<Web> {
    let log = LogSpiral::from_degrees(pitch_degrees)?;
    let theta_end = std::f64::consts::TAU * rotations as f64;
    let spiral = SplineSpiral::from_log(&log, theta_end)?;
    let limit = spiral.total_arc();
    let mut rays = Vec::with_capacity(generators.len());
    for &g in generators {
        if !primes.is_generator(g)? {
            return Err(Error::Domain(format!("{g} is not a generator")));
        }
        let mut elements = Vec::new();
        let mut v = g;
        loop {
            v = primes.nth(v)?;
            if v as f64 > limit {
                break;
            }
            elements.push(v);
        }
        rays.push(place(&spiral, &TruncatedRay { generator: g, first_depth: 1, elements })?);
    }
    Ok(Web {
        variant: WebVariant::PureLog,
        pitch_degrees,
        rotations,
        skipped: 0,
        spiral,
        rays,
        solves: Vec::new(),
    })
}

/// Web over the rays of `composition` with the first [`DEFAULT_SKIPPED`]
/// primes left out.
pub fn build_approx_web(primes: &Filter, composition: Composition, pitch_degrees: f64) -> Result<Web> {
    build_lined_web(primes, composition, pitch_degrees, false)
}

/// Same primes as the three-turn web, with successive segments of each ray
/// pointing in opposite directions along its line.
pub fn build_degenerate_web(primes: &Filter, pitch_degrees: f64) -> Result<Web> {
    build_lined_web(primes, Composition::ThreeTurns, pitch_degrees, true)
}

fn build_lined_web(primes: &Filter, composition: Composition, pitch_degrees: f64, alternate: bool) -> Result<Web> {
    let skipped = DEFAULT_SKIPPED;
    let rays = composition_rays(primes, skipped, composition)?;
    // elements from the third on fix a segment each
    let mut constrained: Vec<(u64, usize, usize)> = rays
        .iter()
        .enumerate()
        .flat_map(|(r, ray)| ray.elements.iter().enumerate().skip(2).map(move |(k, &x)| (x, r, k)))
        .collect();
    constrained.sort_unstable();
    let first = constrained.first().map(|c| c.0).ok_or_else(|| Error::Degenerate("no constrained primes".into()))?;
    let pure_end = rays
        .iter()
        .flat_map(|r| r.elements.iter().copied())
        .filter(|&x| x < first)
        .max()
        .ok_or_else(|| Error::Degenerate("nothing below the first constrained prime".into()))?;

    let log = LogSpiral::from_degrees(pitch_degrees)?;
    let mut spiral = SplineSpiral::from_log(&log, log.theta_for_value(pure_end as f64)?)?;
    let mut solves = Vec::with_capacity(constrained.len());
    for &(x, r, k) in &constrained {
        let ray = &rays[r];
        let p1 = spiral.isometric_map(ray.elements[0] as f64)?;
        let p2 = spiral.isometric_map(ray.elements[1] as f64)?;
        let anchor = spiral.isometric_map(ray.elements[k - 1] as f64)?;
        let mut direction = (p2.v - p1.v).atan2(p2.u - p1.u);
        // each later segment of a ray turns back along the line
        if alternate && k % 2 == 0 {
            direction += std::f64::consts::PI;
        }
        let target = SegmentTarget { prime: x, generator: ray.generator, anchor, direction };
        let s = solve_segment(&spiral, &target, NewtonOptions::default());
        spiral.push_segment(s.slope, s.intercept, s.theta_end)?;
        solves.push(s);
    }
    let placed = rays.iter().map(|r| place(&spiral, r)).collect::<Result<Vec<_>>>()?;
    let (variant, rotations) = match (alternate, composition) {
        (true, _) => (WebVariant::Degenerate, 3),
        (false, Composition::FourTurns) => (WebVariant::Approximate(composition), 4),
        (false, _) => (WebVariant::Approximate(composition), 3),
    };
    Ok(Web { variant, pitch_degrees, rotations, skipped, spiral, rays: placed, solves })
}
