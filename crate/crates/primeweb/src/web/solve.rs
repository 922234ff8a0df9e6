use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::numeric::{newton3, NewtonOptions};
use crate::spiral::{segment_arc, PlanePoint, SplineSpiral};

/// Angle residual up to which a segment counts as exactly solved.
pub const EXACT_ANGLE_TOL: f64 = 1e-9;
/// Angle residual up to which a segment counts as approximately solved.
pub const APPROX_ANGLE_TOL: f64 = 1e-3;

const SCAN_SLOPES: (f64, f64) = (1e-7, 50.0);
const SCAN_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fit {
    Exact,
    Approximate,
    Failed,
}

impl Fit {
    pub fn classify(angle_residual: f64) -> Self {
        let r = angle_residual.abs();
        if r <= EXACT_ANGLE_TOL {
            Self::Exact
        } else if r <= APPROX_ANGLE_TOL {
            Self::Approximate
        } else {
            Self::Failed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveMethod {
    Newton,
    /// Slope scan with bisection, or the best grid point when no sign change
    /// is found.
    Scan,
}

/// One appended spline segment and how well it hit its ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSolve {
    pub prime: u64,
    pub generator: u64,
    pub slope: f64,
    pub intercept: f64,
    pub theta_end: f64,
    /// Wrapped difference between the reached and the required direction.
    pub angle_residual: f64,
    pub fit: Fit,
    pub method: SolveMethod,
    pub iterations: usize,
}

/// What a new segment has to reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentTarget {
    pub prime: u64,
    pub generator: u64,
    /// The previous element of the same ray.
    pub anchor: PlanePoint,
    /// Direction of the ray line.
    pub direction: f64,
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

struct Start {
    theta: f64,
    exponent: f64,
    arc: f64,
    slope: f64,
}

impl Start {
    fn of(spline: &SplineSpiral) -> Self {
        let last = spline.segments().last().expect("spline has a first segment");
        Self {
            theta: last.theta_end,
            exponent: last.slope * last.theta_end + last.intercept,
            arc: spline.total_arc(),
            slope: last.slope,
        }
    }

    /// `(θ, β)` of the segment with slope `slope` that is continuous at the
    /// start and has arc length `remaining`.
    fn landing(&self, slope: f64, remaining: f64) -> Option<(f64, f64)> {
        let intercept = self.exponent - slope * self.theta;
        let e = remaining / (1.0 + 1.0 / (slope * slope)).sqrt() + self.exponent.exp();
        let theta = (e.ln() - intercept) / slope;
        (theta.is_finite() && theta > self.theta).then_some((theta, intercept))
    }
}

fn direction_residual(slope: f64, intercept: f64, theta: f64, target: &SegmentTarget) -> f64 {
    let p = PlanePoint::polar((slope * theta + intercept).exp(), theta);
    wrap_angle((p.v - target.anchor.v).atan2(p.u - target.anchor.u) - target.direction)
}

/// Finds slope, end angle and intercept of the segment placing
/// `target.prime` at its arc length on the ray line. Newton from the previous
/// slope first, then a slope scan; the better of the two is returned and
/// classified by its angle residual.
pub fn solve_segment(spline: &SplineSpiral, target: &SegmentTarget, opts: NewtonOptions) -> SegmentSolve {
    let start = Start::of(spline);
    let remaining = target.prime as f64 - start.arc;
    let pack = |slope: f64, intercept: f64, theta_end: f64, method, iterations| {
        let angle_residual = direction_residual(slope, intercept, theta_end, target);
        SegmentSolve {
            prime: target.prime,
            generator: target.generator,
            slope,
            intercept,
            theta_end,
            angle_residual,
            fit: Fit::classify(angle_residual),
            method,
            iterations,
        }
    };

    let mut best: Option<SegmentSolve> = None;
    if let Some((theta0, intercept0)) = start.landing(start.slope, remaining) {
        let residual = |x: &Vector3<f64>| -> Option<Vector3<f64>> {
            let (slope, theta, intercept) = (x[0], x[1], x[2]);
            if !(slope > 0.0) || !(theta > start.theta) {
                return None;
            }
            let arc = segment_arc(slope, intercept, start.theta, theta);
            let r = Vector3::new(
                slope * start.theta + intercept - start.exponent,
                (arc - remaining) / remaining,
                direction_residual(slope, intercept, theta, target),
            );
            r.iter().all(|v| v.is_finite()).then_some(r)
        };
        let report = newton3(residual, Vector3::new(start.slope, theta0, intercept0), opts);
        if report.converged {
            let x = report.x;
            best = Some(pack(x[0], x[2], x[1], SolveMethod::Newton, report.iterations));
        }
    }
    if best.map_or(true, |b| b.fit != Fit::Exact) {
        if let Some((slope, _)) = scan(&start, remaining, target) {
            if let Some((theta, intercept)) = start.landing(slope, remaining) {
                let s = pack(slope, intercept, theta, SolveMethod::Scan, 0);
                if best.map_or(true, |b| s.angle_residual.abs() < b.angle_residual.abs()) {
                    best = Some(s);
                }
            }
        }
    }
    best.unwrap_or_else(|| {
        // keep the previous slope so the web can continue
        let (theta, intercept) = start
            .landing(start.slope, remaining)
            .unwrap_or((start.theta + 1e-9, start.exponent - start.slope * start.theta));
        pack(start.slope, intercept, theta, SolveMethod::Scan, 0)
    })
}

/// Slope with the smallest angle residual on a log grid: the first sign
/// change is bisected; without one the best grid point is refined by golden
/// section between its neighbours.
fn scan(start: &Start, remaining: f64, target: &SegmentTarget) -> Option<(f64, f64)> {
    let f = |slope: f64| -> Option<f64> {
        let (theta, intercept) = start.landing(slope, remaining)?;
        Some(direction_residual(slope, intercept, theta, target))
    };
    let (lo, hi) = (SCAN_SLOPES.0.ln(), SCAN_SLOPES.1.ln());
    let grid: Vec<f64> =
        (0..SCAN_POINTS).map(|k| (lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64).exp()).collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&a| f(a)).collect();
    for k in 0..SCAN_POINTS - 1 {
        let (Some(fa), Some(fb)) = (values[k], values[k + 1]) else { continue };
        if fa == 0.0 {
            return Some((grid[k], 0.0));
        }
        // a jump of about 2π is the branch cut, not a root
        if fa * fb < 0.0 && (fa - fb).abs() < 1.0 {
            let (mut a, mut b, mut fa) = (grid[k], grid[k + 1], fa);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m)?;
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let (fa, fb) = (f(a)?, f(b)?);
            return Some(if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) });
        }
    }
    let (k, _) = values
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.map(|v| (k, v.abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN_POINTS - 1)]);
    let g = |x: f64| f(x).map_or(f64::INFINITY, f64::abs);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    let r = g(x);
    Some(if r <= g(grid[k]) { (x, r) } else { (grid[k], g(grid[k])) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiral::LogSpiral;

    #[test]
    fn wrap_into_half_open_interval() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(TAU + 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn solves_a_reachable_target() {
        let log = LogSpiral::from_degrees(74.18896).unwrap();
        let mut spline = SplineSpiral::from_log(&log, log.theta_for_value(100.0).unwrap()).unwrap();
        let anchor = spline.isometric_map(60.0).unwrap();
        let start = Start::of(&spline);
        let (theta, intercept) = start.landing(0.2, 180.0 - start.arc).unwrap();
        let end = PlanePoint::polar((0.2 * theta + intercept).exp(), theta);
        let direction = (end.v - anchor.v).atan2(end.u - anchor.u);
        let target = SegmentTarget { prime: 180, generator: 1, anchor, direction };
        assert!(direction_residual(0.2, intercept, theta, &target).abs() < 1e-12);

        let s = solve_segment(&spline, &target, NewtonOptions::default());
        assert_eq!(s.fit, Fit::Exact);
        spline.push_segment(s.slope, s.intercept, s.theta_end).unwrap();
        assert!((spline.total_arc() - 180.0).abs() < 1e-9 * 180.0);
        let p = spline.isometric_map(180.0).unwrap();
        assert!(wrap_angle((p.v - anchor.v).atan2(p.u - anchor.u) - direction).abs() < 1e-9);
    }
}
