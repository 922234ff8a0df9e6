//! Logarithmic spirals parametrised by arc length, the collinearity equation
//! for three primes on one spiral, and piecewise logarithmic spline-spirals.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::sequences::Ray;

/// A point of the plane in polar and Cartesian form. `theta` is unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub rho: f64,
    pub theta: f64,
    pub u: f64,
    pub v: f64,
}

impl PlanePoint {
    pub fn polar(rho: f64, theta: f64) -> Self {
        Self { rho, theta, u: rho * theta.cos(), v: rho * theta.sin() }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// `ρ = e^{(cot φ) θ}` with pitch angle `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSpiral {
    pitch: f64,
}

impl LogSpiral {
    pub fn new(pitch: f64) -> Result<Self> {
        if !(pitch > 0.0 && pitch < FRAC_PI_2) {
            return Err(Error::Domain(format!("pitch {pitch} outside (0, π/2)")));
        }
        Ok(Self { pitch })
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    /// The spiral with `cos φ = x`.
    pub fn from_cosine(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("cos φ = {x} outside (0, 1)")));
        }
        Self::new(x.acos())
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn pitch_degrees(&self) -> f64 {
        self.pitch.to_degrees()
    }

    /// `cot φ`, the exponent slope.
    pub fn growth(&self) -> f64 {
        1.0 / self.pitch.tan()
    }

    pub fn radius(&self, theta: f64) -> f64 {
        (self.growth() * theta).exp()
    }

    /// `λ(0, θ) = (e^{(cot φ) θ} − 1) / cos φ`.
    pub fn arc_length(&self, theta: f64) -> f64 {
        (self.growth() * theta).exp_m1() / self.pitch.cos()
    }

    /// The angle at which the arc length reaches `x`.
    pub fn theta_for_value(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("arc length {x} is negative")));
        }
        Ok(self.pitch.tan() * (x * self.pitch.cos()).ln_1p())
    }

    pub fn point_for_value(&self, x: f64) -> Result<PlanePoint> {
        let theta = self.theta_for_value(x)?;
        Ok(PlanePoint::polar(1.0 + x * self.pitch.cos(), theta))
    }
}

/// Signed arc length `λ(0, θ)` for `θ <= 0`; it tends to `−1/cos φ`.
pub fn negative_moustache(spiral: &LogSpiral, theta: f64) -> Result<f64> {
    if theta > 0.0 {
        return Err(Error::Domain(format!("θ = {theta} must be <= 0")));
    }
    Ok(spiral.arc_length(theta))
}

/// Left side of the collinearity equation for the points at arc lengths
/// `p1, p2, p3` on the spiral with `cos φ = x`; it equals twice the signed
/// triangle area.
pub fn triplet_equation(x: f64, p: [f64; 3]) -> f64 {
    let t = (1.0 / (x * x) - 1.0).sqrt();
    let term = |a: f64, b: f64| (a * x + 1.0) * (b * x + 1.0) * (t * ((a * x + 1.0) / (b * x + 1.0)).ln()).sin();
    term(p[0], p[1]) + term(p[1], p[2]) + term(p[2], p[0])
}

/// Window holding the roots of interest.
pub const TRIPLET_WINDOW: (f64, f64) = (0.202, 0.326);
const SCAN: (f64, f64, f64) = (0.01, 0.99, 1e-3);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletRoots {
    pub triplet: [u64; 3],
    /// Every sign change found in the scan range, ascending.
    pub roots: Vec<f64>,
    /// The largest root inside [`TRIPLET_WINDOW`].
    pub primary: Option<f64>,
}

impl TripletRoots {
    pub fn pitch_degrees(&self) -> Option<f64> {
        self.primary.map(|x| x.acos().to_degrees())
    }
}

/// All roots of the collinearity equation in `(0.01, 0.99)`; the trivial
/// root at `x = 1` is outside the scan.
pub fn triplet_roots(triplet: [u64; 3]) -> Result<TripletRoots> {
    if !(0 < triplet[0] && triplet[0] < triplet[1] && triplet[1] < triplet[2]) {
        return Err(Error::Domain(format!("{triplet:?} is not strictly increasing and positive")));
    }
    let p = triplet.map(|v| v as f64);
    let f = |x: f64| triplet_equation(x, p);
    let (lo, hi, step) = SCAN;
    let steps = ((hi - lo) / step).round() as usize;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=steps {
        let b = lo + i as f64 * step;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect(f, a, b, 0.0)?);
        }
        a = b;
        fa = fb;
    }
    let primary = roots.iter().rev().copied().find(|&r| r > TRIPLET_WINDOW.0 && r < TRIPLET_WINDOW.1);
    Ok(TripletRoots { triplet, roots, primary })
}

/// The primary root, or a bracket error when none lies in the window.
pub fn triplet_root(p1: u64, p2: u64, p3: u64) -> Result<f64> {
    let r = triplet_roots([p1, p2, p3])?;
    r.primary.ok_or_else(|| Error::Bracket(format!("no root of ({p1}, {p2}, {p3}) in {TRIPLET_WINDOW:?}")))
}

/// Sine of the angle at the first point between the chords to the other two,
/// computed in Cartesian coordinates; zero for collinear points.
pub fn collinearity_defect(x: f64, triplet: [u64; 3]) -> Result<f64> {
    let spiral = LogSpiral::from_cosine(x)?;
    let [a, b, c] = triplet.map(|p| spiral.point_for_value(p as f64));
    let (a, b, c) = (a?, b?, c?);
    let (ux, uy) = (b.u - a.u, b.v - a.v);
    let (wx, wy) = (c.u - a.u, c.v - a.v);
    Ok((ux * wy - uy * wx) / (ux.hypot(uy) * wx.hypot(wy)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletSurvey {
    pub triplets: Vec<TripletRoots>,
    pub solved: usize,
    pub mean: f64,
    pub mean_pitch_degrees: f64,
    pub min: f64,
    pub max: f64,
}

impl TripletSurvey {
    pub fn unsolved(&self) -> impl Iterator<Item = &TripletRoots> {
        self.triplets.iter().filter(|t| t.primary.is_none())
    }

    /// `p1,p2,p3,x,phi_deg`, one line per solved triplet.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["p1", "p2", "p3", "x", "phi_deg"]).map_err(|e| Error::Export(e.to_string()))?;
        for t in &self.triplets {
            if let Some(x) = t.primary {
                let [a, b, c] = t.triplet;
                w.write_record([a.to_string(), b.to_string(), c.to_string(), format!("{x:.12}"), format!("{:.9}", x.acos().to_degrees())])
                    .map_err(|e| Error::Export(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
    }
}

/// Roots for every run of three consecutive elements on each ray, keeping
/// only elements above `skip_upto`.
pub fn triplet_survey(rays: &[Ray], skip_upto: u64) -> Result<TripletSurvey> {
    let triplets: Vec<[u64; 3]> = rays
        .iter()
        .flat_map(|r| {
            let kept: Vec<u64> = r.elements.iter().copied().filter(|&v| v > skip_upto).collect();
            kept.windows(3).map(|w| [w[0], w[1], w[2]]).collect::<Vec<_>>()
        })
        .collect();
    let solved: Vec<TripletRoots> = triplets.par_iter().map(|&t| triplet_roots(t)).collect::<Result<_>>()?;
    let xs: Vec<f64> = solved.iter().filter_map(|t| t.primary).collect();
    let mean = xs.iter().sum::<f64>() / xs.len().max(1) as f64;
    Ok(TripletSurvey {
        solved: xs.len(),
        mean,
        mean_pitch_degrees: mean.acos().to_degrees(),
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        triplets: solved,
    })
}

/// One piece `ρ = e^{slope·θ + intercept}` on `[theta_start, theta_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplineSegment {
    pub slope: f64,
    pub intercept: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    /// Cumulative arc length at `theta_start`.
    pub arc_start: f64,
}

impl SplineSegment {
    fn exponent(&self, theta: f64) -> f64 {
        self.slope * theta + self.intercept
    }

    /// Arc length over `[a, b]` inside the segment.
    pub fn arc(&self, a: f64, b: f64) -> f64 {
        segment_arc(self.slope, self.intercept, a, b)
    }

    pub fn arc_end(&self) -> f64 {
        self.arc_start + self.arc(self.theta_start, self.theta_end)
    }
}

/// `√(1 + 1/α²) (e^{αb+β} − e^{αa+β})`.
pub fn segment_arc(slope: f64, intercept: f64, a: f64, b: f64) -> f64 {
    let ea = slope * a + intercept;
    (1.0 + 1.0 / (slope * slope)).sqrt() * ea.exp() * (slope * (b - a)).exp_m1()
}

/// Piecewise logarithmic spiral with a continuous radius, starting at
/// `ρ(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSpiral {
    segments: Vec<SplineSegment>,
}

/// Relative tolerance on radius continuity at a knot.
pub const KNOT_CONTINUITY_TOL: f64 = 1e-12;

impl SplineSpiral {
    /// The pure logarithmic spiral up to `theta_end` as a single segment.
    pub fn from_log(spiral: &LogSpiral, theta_end: f64) -> Result<Self> {
        let mut s = Self { segments: Vec::new() };
        s.push(spiral.growth(), theta_end)?;
        Ok(s)
    }

    /// Appends a segment of slope `slope` from the current end to `theta_end`;
    /// the intercept follows from continuity.
    pub fn push(&mut self, slope: f64, theta_end: f64) -> Result<&SplineSegment> {
        let (theta_start, arc_start, exponent) = match self.segments.last() {
            Some(last) => (last.theta_end, last.arc_end(), last.exponent(last.theta_end)),
            None => (0.0, 0.0, 0.0),
        };
        self.push_with_intercept(slope, exponent - slope * theta_start, theta_end, theta_start, arc_start)
    }

    /// Appends a segment with an explicit intercept, checking continuity.
    pub fn push_segment(&mut self, slope: f64, intercept: f64, theta_end: f64) -> Result<&SplineSegment> {
        let (theta_start, arc_start, exponent) = match self.segments.last() {
            Some(last) => (last.theta_end, last.arc_end(), last.exponent(last.theta_end)),
            None => (0.0, 0.0, 0.0),
        };
        let here = slope * theta_start + intercept;
        if (here - exponent).abs() > KNOT_CONTINUITY_TOL * exponent.abs().max(1.0) {
            return Err(Error::Degenerate(format!("radius jumps at θ = {theta_start}: exponent {exponent} vs {here}")));
        }
        self.push_with_intercept(slope, intercept, theta_end, theta_start, arc_start)
    }

    fn push_with_intercept(
        &mut self,
        slope: f64,
        intercept: f64,
        theta_end: f64,
        theta_start: f64,
        arc_start: f64,
    ) -> Result<&SplineSegment> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::Degenerate(format!("segment slope {slope} must be positive")));
        }
        if !(theta_end > theta_start) {
            return Err(Error::Degenerate(format!("knot {theta_end} does not follow {theta_start}")));
        }
        self.segments.push(SplineSegment { slope, intercept, theta_start, theta_end, arc_start });
        Ok(self.segments.last().expect("just pushed"))
    }

    pub fn segments(&self) -> &[SplineSegment] {
        &self.segments
    }

    pub fn theta_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.theta_end)
    }

    pub fn total_arc(&self) -> f64 {
        self.segments.last().map_or(0.0, SplineSegment::arc_end)
    }

    fn segment_at(&self, theta: f64) -> Result<&SplineSegment> {
        if self.segments.is_empty() || theta < 0.0 || theta > self.theta_end() {
            return Err(Error::Domain(format!("θ = {theta} outside [0, {}]", self.theta_end())));
        }
        let i = self.segments.partition_point(|s| s.theta_end < theta);
        Ok(&self.segments[i.min(self.segments.len() - 1)])
    }

    /// Radius at `theta`.
    pub fn lss_eval(&self, theta: f64) -> Result<f64> {
        Ok(self.segment_at(theta)?.exponent(theta).exp())
    }

    /// Arc length between two angles, summed over the segments in between.
    pub fn lss_arc(&self, a: f64, b: f64) -> Result<f64> {
        if a > b {
            return Err(Error::Domain(format!("θ range [{a}, {b}] is reversed")));
        }
        self.segment_at(a)?;
        self.segment_at(b)?;
        Ok(self
            .segments
            .iter()
            .filter(|s| s.theta_end > a && s.theta_start < b)
            .map(|s| s.arc(a.max(s.theta_start), b.min(s.theta_end)))
            .sum())
    }

    /// The point at arc length `x` from the origin of the spiral.
    pub fn isometric_map(&self, x: f64) -> Result<PlanePoint> {
        if !(x >= 0.0) || x > self.total_arc() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("arc length {x} outside [0, {}]", self.total_arc())));
        }
        let i = self.segments.partition_point(|s| s.arc_end() < x).min(self.segments.len() - 1);
        let s = &self.segments[i];
        let a = s.slope;
        // ρ(x) = ρ_start (1 + α/√(1+α²) (x − arc_start) / ρ_start)
        let rho_start = s.exponent(s.theta_start).exp();
        let growth = a / (1.0 + a * a).sqrt() * (x - s.arc_start) / rho_start;
        let theta = s.theta_start + growth.ln_1p() / a;
        Ok(PlanePoint::polar(rho_start * (1.0 + growth), theta))
    }
}
