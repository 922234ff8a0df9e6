use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{build_approx_web, truncated_ray, Composition, Web, ROTATION_RAY};
use crate::error::{Error, Result};
use crate::sequences::{CountingSet, Filter};

/// Rays contributing knots to the system: generators up to this bound.
const SYSTEM_RAY_BOUND: u64 = 36;
/// Lower bound used for the strict inequalities.
pub const SYSTEM_EPS: f64 = 1e-9;

/// A straight ray line `u sin ψ − v cos ψ = offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayLine {
    pub generator: u64,
    pub angle: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct W3Knot {
    pub prime: u64,
    pub generator: u64,
}

/// One relation over the segment unknowns `α_i, θ_i, β_i`, `i = 1..=n`,
/// with `θ_0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `β_1 = 0`: the spline starts at radius 1.
    Origin,
    /// Radius continuity between segments `knot` and `knot + 1`.
    Continuity { knot: usize },
    /// Arc length of the segment equals the gap between its knot primes.
    Arc { segment: usize },
    /// The knot lies on its ray line.
    OnLine { segment: usize },
    Slope { segment: usize },
    Order { segment: usize },
    /// The knot stays on one side of a neighbouring ray line.
    Side { segment: usize, ray: u64, positive: bool },
}

/// The nonlinear system fixing a spline through the first three elements of
/// the rays up to 36 and the fourth element of the rotation ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W3System {
    pub knots: Vec<W3Knot>,
    pub lines: Vec<RayLine>,
    pub equations: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
    pub skipped: u64,
}

impl W3System {
    pub fn variables(&self) -> usize {
        3 * self.knots.len()
    }

    /// Primes up to the last knot, split as `(skipped, knots, between)`.
    pub fn coverage(&self, primes: &Filter) -> Result<(u64, u64, u64)> {
        let top = self.knots.last().map_or(0, |k| k.prime);
        let all = primes.count_upto(top)?;
        let knots = self.knots.len() as u64;
        Ok((self.skipped, knots, all - knots - self.skipped))
    }

    fn line(&self, generator: u64) -> Result<&RayLine> {
        self.lines
            .iter()
            .find(|l| l.generator == generator)
            .ok_or_else(|| Error::Domain(format!("no line for ray {generator}")))
    }

    fn radius(i: usize) -> String {
        format!("exp(alpha_{i}*theta_{i} + beta_{i})")
    }

    fn name(c: &Constraint) -> String {
        match *c {
            Constraint::Origin => "origin".into(),
            Constraint::Continuity { knot } => format!("cont_{knot}"),
            Constraint::Arc { segment } => format!("arc_{segment}"),
            Constraint::OnLine { segment } => format!("line_{segment}"),
            Constraint::Slope { segment } => format!("slope_{segment}"),
            Constraint::Order { segment } => format!("order_{segment}"),
            Constraint::Side { segment, ray, positive } => {
                format!("side_{segment}_{ray}_{}", if positive { "pos" } else { "neg" })
            }
        }
    }

    fn body(&self, c: &Constraint) -> Result<String> {
        let knot = |i: usize| -> Result<&W3Knot> {
            i.checked_sub(1)
                .and_then(|k| self.knots.get(k))
                .ok_or_else(|| Error::Domain(format!("segment {i} out of range")))
        };
        Ok(match *c {
            Constraint::Origin => "beta_1 = 0".into(),
            Constraint::Continuity { knot: i } => {
                knot(i + 1)?;
                format!("alpha_{i}*theta_{i} + beta_{i} = alpha_{j}*theta_{i} + beta_{j}", j = i + 1)
            }
            Constraint::Arc { segment: i } => {
                let prev = if i == 1 { 0 } else { knot(i - 1)?.prime };
                let start = if i == 1 { format!("exp(beta_{i})") } else { format!("exp(alpha_{i}*theta_{} + beta_{i})", i - 1) };
                format!("sqrt(1 + 1/alpha_{i}^2)*({} - {start}) = {}", Self::radius(i), knot(i)?.prime - prev)
            }
            Constraint::OnLine { segment: i } => {
                let g = knot(i)?.generator;
                self.line(g)?;
                format!("{}*sin(psi_{g} - theta_{i}) = c_{g}", Self::radius(i))
            }
            Constraint::Slope { segment: i } => {
                knot(i)?;
                format!("alpha_{i} >= eps")
            }
            Constraint::Order { segment: i } => {
                knot(i)?;
                if i == 1 {
                    "theta_1 >= eps".into()
                } else {
                    format!("theta_{i} - theta_{} >= eps", i - 1)
                }
            }
            Constraint::Side { segment: i, ray, positive } => {
                knot(i)?;
                self.line(ray)?;
                let f = format!("{}*sin(psi_{ray} - theta_{i})", Self::radius(i));
                if positive {
                    format!("{f} - c_{ray} >= eps")
                } else {
                    format!("c_{ray} - {f} >= eps")
                }
            }
        })
    }

    /// Model text: parameters, variables and one named line per constraint.
    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "# spline system over {} knots", self.knots.len());
        let _ = writeln!(
            s,
            "# variables {} equations {} inequalities {}",
            self.variables(),
            self.equations.len(),
            self.inequalities.len()
        );
        let _ = writeln!(s, "param eps := {SYSTEM_EPS:?};");
        let _ = writeln!(s, "param skipped := {};", self.skipped);
        for l in &self.lines {
            let _ = writeln!(s, "param psi_{g} := {:?};", l.angle, g = l.generator);
            let _ = writeln!(s, "param c_{g} := {:?};", l.offset, g = l.generator);
        }
        for (k, knot) in self.knots.iter().enumerate() {
            let _ = writeln!(s, "param knot_{} := {}; # ray {}", k + 1, knot.prime, knot.generator);
        }
        for i in 1..=self.knots.len() {
            let _ = writeln!(s, "var alpha_{i}; var theta_{i}; var beta_{i};");
        }
        for c in self.equations.iter().chain(&self.inequalities) {
            let _ = writeln!(s, "s.t. {}: {};", Self::name(c), self.body(c)?);
        }
        Ok(s)
    }

    /// Reads text written by [`W3System::to_text`]. Every constraint line is
    /// re-rendered from its name and must match exactly.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        let mut knot_rays: BTreeMap<usize, u64> = BTreeMap::new();
        let mut vars = 0usize;
        let mut constraints: Vec<(usize, String, String)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            if let Some(rest) = raw.strip_prefix("param ") {
                let (decl, comment) = rest.split_once(';').ok_or_else(|| err(line, "missing ';'".into()))?;
                let (name, value) = decl.split_once(" := ").ok_or_else(|| err(line, "missing ':='".into()))?;
                if let Some(k) = name.strip_prefix("knot_") {
                    let ray = comment
                        .trim()
                        .strip_prefix("# ray ")
                        .and_then(|g| g.parse().ok())
                        .ok_or_else(|| err(line, "knot without ray".into()))?;
                    knot_rays.insert(k.parse().map_err(|_| err(line, format!("bad knot {k}")))?, ray);
                }
                params.insert(name.to_string(), value.to_string());
            } else if raw.starts_with("var ") {
                vars += raw.matches("var ").count();
            } else if let Some(rest) = raw.strip_prefix("s.t. ") {
                let (name, body) = rest.split_once(": ").ok_or_else(|| err(line, "missing ':'".into()))?;
                let body = body.strip_suffix(';').ok_or_else(|| err(line, "missing ';'".into()))?;
                constraints.push((line, name.to_string(), body.to_string()));
            } else if !raw.starts_with('#') && !raw.trim().is_empty() {
                return Err(err(line, format!("unexpected line {raw:?}")));
            }
        }
        let get = |name: &str| -> Result<&String> {
            params.get(name).ok_or_else(|| err(0, format!("parameter {name} missing")))
        };
        let float = |name: &str| -> Result<f64> {
            get(name)?.parse().map_err(|_| err(0, format!("parameter {name} is not a number")))
        };
        let mut knots = Vec::with_capacity(knot_rays.len());
        for (k, (&i, &generator)) in knot_rays.iter().enumerate() {
            if i != k + 1 {
                return Err(err(0, format!("knot {} missing", k + 1)));
            }
            let prime = get(&format!("knot_{i}"))?.parse().map_err(|_| err(0, format!("knot {i} is not an integer")))?;
            knots.push(W3Knot { prime, generator });
        }
        if vars != 3 * knots.len() {
            return Err(err(0, format!("{vars} variables for {} knots", knots.len())));
        }
        let mut lines = Vec::new();
        for name in params.keys().filter_map(|k| k.strip_prefix("psi_")) {
            let generator: u64 = name.parse().map_err(|_| err(0, format!("bad ray {name}")))?;
            lines.push(RayLine { generator, angle: float(&format!("psi_{name}"))?, offset: float(&format!("c_{name}"))? });
        }
        lines.sort_by_key(|l| l.generator);
        let skipped = get("skipped")?.parse().map_err(|_| err(0, "bad skipped count".into()))?;
        let mut sys = Self { knots, lines, equations: Vec::new(), inequalities: Vec::new(), skipped };
        for (line, name, body) in constraints {
            let c = parse_name(&name).ok_or_else(|| err(line, format!("unknown constraint {name}")))?;
            if sys.body(&c)? != body {
                return Err(err(line, format!("constraint {name} does not match its definition")));
            }
            if body.contains(">=") {
                sys.inequalities.push(c);
            } else {
                sys.equations.push(c);
            }
        }
        Ok(sys)
    }
}

fn parse_name(name: &str) -> Option<Constraint> {
    if name == "origin" {
        return Some(Constraint::Origin);
    }
    let (kind, rest) = name.split_once('_')?;
    let num = |s: &str| s.parse::<usize>().ok();
    Some(match kind {
        "cont" => Constraint::Continuity { knot: num(rest)? },
        "arc" => Constraint::Arc { segment: num(rest)? },
        "line" => Constraint::OnLine { segment: num(rest)? },
        "slope" => Constraint::Slope { segment: num(rest)? },
        "order" => Constraint::Order { segment: num(rest)? },
        "side" => {
            let mut parts = rest.split('_');
            let segment = num(parts.next()?)?;
            let ray = parts.next()?.parse().ok()?;
            let positive = match parts.next()? {
                "pos" => true,
                "neg" => false,
                _ => return None,
            };
            if parts.next().is_some() {
                return None;
            }
            Constraint::Side { segment, ray, positive }
        }
        _ => return None,
    })
}

fn line_value(line: &RayLine, u: f64, v: f64) -> f64 {
    u * line.angle.sin() - v * line.angle.cos() - line.offset
}

/// Builds the system with ray lines taken from the web over the full third
/// turn. The side constraints keep each knot between the lines of its two
/// angular neighbours, on the side where the seed web has it.
pub fn assemble_w3_system(primes: &Filter, skipped: u64) -> Result<W3System> {
    let seed: Web = build_approx_web(primes, Composition::FullThirdTurn, super::APPROX_PITCH_DEGREES)?;
    let mut rays = Vec::new();
    for g in 1..=SYSTEM_RAY_BOUND {
        if primes.is_generator(g)? {
            let depth = if g == ROTATION_RAY { 4 } else { 3 };
            rays.push(truncated_ray(primes, skipped, g, depth)?);
        }
    }
    let mut lines = Vec::with_capacity(rays.len());
    for r in &rays {
        let w = seed.ray(r.generator).ok_or_else(|| Error::Domain(format!("seed web lacks ray {}", r.generator)))?;
        let angle = w.direction().ok_or_else(|| Error::Degenerate(format!("ray {} has one point", r.generator)))?;
        let p = w.points[0].point;
        lines.push(RayLine { generator: r.generator, angle, offset: p.u * angle.sin() - p.v * angle.cos() });
    }
    let mut knots: Vec<W3Knot> =
        rays.iter().flat_map(|r| r.elements.iter().map(|&prime| W3Knot { prime, generator: r.generator })).collect();
    knots.sort_unstable_by_key(|k| k.prime);

    let mut by_angle: Vec<&RayLine> = lines.iter().collect();
    by_angle.sort_by(|a, b| a.angle.rem_euclid(std::f64::consts::TAU).total_cmp(&b.angle.rem_euclid(std::f64::consts::TAU)));
    let n = knots.len();
    let mut equations = vec![Constraint::Origin];
    equations.extend((1..n).map(|knot| Constraint::Continuity { knot }));
    equations.extend((1..=n).map(|segment| Constraint::Arc { segment }));
    equations.extend((1..=n).map(|segment| Constraint::OnLine { segment }));
    let mut inequalities = Vec::with_capacity(4 * n);
    for (k, knot) in knots.iter().enumerate() {
        let segment = k + 1;
        inequalities.push(Constraint::Slope { segment });
        inequalities.push(Constraint::Order { segment });
        let at = by_angle.iter().position(|l| l.generator == knot.generator).expect("knot ray has a line");
        // the seed point of the knot, or of the last placed element of its ray
        let w = seed.ray(knot.generator).expect("checked above");
        let p = w.points.iter().rev().find(|p| p.prime <= knot.prime).expect("ray starts below its knots").point;
        for step in [by_angle.len() - 1, 1] {
            let nb = by_angle[(at + step) % by_angle.len()];
            let positive = line_value(nb, p.u, p.v) >= 0.0;
            inequalities.push(Constraint::Side { segment, ray: nb.generator, positive });
        }
    }
    Ok(W3System { knots, lines, equations, inequalities, skipped })
}

#[cfg(test)]
mod tests {
    use super::super::tests::primes;
    use super::*;

    #[test]
    fn counts_and_round_trip() {
        let p = primes();
        let sys = assemble_w3_system(&p, 11).unwrap();
        assert_eq!(sys.knots.len(), 76);
        assert_eq!(sys.variables(), 228);
        assert_eq!(sys.equations.len(), 228);
        assert_eq!(sys.inequalities.len(), 304);
        assert_eq!(sys.knots.first().map(|k| k.prime), Some(37));
        assert_eq!(sys.knots.last().map(|k| (k.prime, k.generator)), Some((7193, 12)));
        assert_eq!(sys.coverage(&p).unwrap(), (11, 76, 832));

        let text = sys.to_text().unwrap();
        assert!(text.contains("# variables 228 equations 228 inequalities 304"));
        let back = W3System::parse(&text).unwrap();
        assert_eq!(back, sys);
        assert_eq!(back.to_text().unwrap(), text);
    }

    #[test]
    fn parse_rejects_edited_constraints() {
        let text = assemble_w3_system(&primes(), 11).unwrap().to_text().unwrap();
        let bad = text.replacen("beta_1 = 0", "beta_1 = 1", 1);
        assert!(matches!(W3System::parse(&bad), Err(Error::Parse { .. })));
        let bad = text.replacen("s.t. arc_1:", "s.t. arc_x:", 1);
        assert!(W3System::parse(&bad).is_err());
    }
}
