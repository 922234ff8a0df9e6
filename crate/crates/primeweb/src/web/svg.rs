use std::fmt::Write as _;

use super::{Trapezoid, Web, ROTATION_RAY};
use crate::error::{Error, Result};
use crate::spiral::PlanePoint;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Width and height of the image in pixels.
    pub size: f64,
    /// Points sampled along the spiral.
    pub spiral_samples: usize,
    pub label_primes: bool,
    /// Trapezoids drawn as filled quadrilaterals under the rays.
    pub trapezoids: Vec<Trapezoid>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { size: 1200.0, spiral_samples: 4000, label_primes: false, trapezoids: Vec::new() }
    }
}

/// Renders the spiral, the rays and the placed primes. The rotation ray is
/// stroked thick and black; the others thin and grey.
pub fn to_svg(web: &Web, opts: &SvgOptions) -> Result<String> {
    let total = web.spiral.total_arc();
    let samples = opts.spiral_samples.max(2);
    let curve = (0..=samples)
        .map(|k| web.spiral.isometric_map(total * k as f64 / samples as f64))
        .collect::<Result<Vec<_>>>()?;
    let extent = curve
        .iter()
        .chain(web.rays.iter().flat_map(|r| r.points.iter().map(|p| &p.point)))
        .map(|p| p.u.abs().max(p.v.abs()))
        .fold(1.0f64, f64::max);
    let half = opts.size / 2.0;
    let scale = 0.95 * half / extent;
    let xy = |p: &PlanePoint| (half + p.u * scale, half - p.v * scale);
    let path = |pts: &mut dyn Iterator<Item = &PlanePoint>| -> String {
        let mut d = String::new();
        for (k, p) in pts.enumerate() {
            let (x, y) = xy(p);
            let _ = write!(d, "{}{x:.3},{y:.3}", if k == 0 { "M" } else { " L" });
        }
        d
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        opts.size
    );
    let _ = writeln!(s, "<!-- primeweb {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for t in &opts.trapezoids {
        let corners = [t.inner.0, t.inner.1, t.outer.1, t.outer.0];
        let pts = corners
            .iter()
            .map(|&c| {
                web.point(c)
                    .map(|p| p.point)
                    .ok_or_else(|| Error::Export(format!("trapezoid corner {c} is not placed")))
            })
            .collect::<Result<Vec<_>>>()?;
        let _ = writeln!(s, r##"<path d="{} Z" fill="#f4c542" fill-opacity="0.5" stroke="none"/>"##, path(&mut pts.iter()));
    }
    let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#3060c0" stroke-width="0.8"/>"##, path(&mut curve.iter()));
    for r in &web.rays {
        let (stroke, width) = if r.generator == ROTATION_RAY { ("black", 3.0) } else { ("#888888", 0.6) };
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="{width}"><title>ray {}</title></path>"#,
            path(&mut r.points.iter().map(|p| &p.point)),
            r.generator
        );
    }
    for p in web.rays.iter().flat_map(|r| &r.points) {
        let (x, y) = xy(&p.point);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="1.6" fill="#c03030"/>"##);
        if opts.label_primes {
            let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" font-size="7">{}</text>"#, x + 2.0, y - 2.0, p.prime);
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{primes, w3};
    use super::*;
    use crate::web::Rotations;

    #[test]
    fn draws_rays_and_overlay() {
        let e = primes().engine().clone();
        let rot = Rotations::from_ray(&e, ROTATION_RAY, 4).unwrap();
        let t = Trapezoid::new(&e, &rot, 1, 19, 1, 1).unwrap();
        let opts = SvgOptions { trapezoids: vec![t], ..SvgOptions::default() };
        let svg = to_svg(w3(), &opts).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"stroke="black" stroke-width="3"><title>ray 12</title>"#));
        assert_eq!(svg.matches("<circle").count(), 212);
        assert_eq!(svg.matches("fill-opacity").count(), 1);
        let far = Trapezoid::new(&e, &rot, 3, 200, 1, 1).unwrap();
        assert!(to_svg(w3(), &SvgOptions { trapezoids: vec![far], ..SvgOptions::default() }).is_err());
    }
}
