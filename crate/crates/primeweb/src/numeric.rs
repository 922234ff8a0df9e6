//! Quadrature, bracketed root finding, monotone interpolation and a damped
//! Newton solver for 3×3 systems.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integration rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureMethod {
    /// Adaptive 7/15-point Gauss–Kronrod.
    GaussKronrod15,
}

/// How a removable or logarithmic singularity inside the range is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Singularity {
    None,
    /// Symmetric principal value at `ln s = 0`.
    PrincipalValueAtOne,
    /// The integrand is singular at `s = e`; the range must stay above it.
    AboveE,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub singularity: Singularity,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, singularity: Singularity) -> Self {
        Self { method: QuadratureMethod::GaussKronrod15, abs_tol, rel_tol: 1e-13, singularity }
    }
}

/// Value and error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut stack = vec![(lo, hi, gk15(&f, lo, hi))];
    let mut done_value = 0.0;
    let mut done_error = 0.0;
    let mut evaluations = 0usize;
    while let Some((x0, x1, (v, e))) = stack.pop() {
        let total_est = done_value + v + stack.iter().map(|s| s.2 .0).sum::<f64>();
        let budget = spec.abs_tol.max(spec.rel_tol * total_est.abs()) * (x1 - x0) / (hi - lo);
        if e <= budget || (x1 - x0) < 1e-14 * hi.abs().max(1.0) {
            done_value += v;
            done_error += e;
            continue;
        }
        evaluations += 1;
        if evaluations > 200_000 {
            return Err(Error::NoConvergence("quadrature subdivision limit".into()));
        }
        let mid = 0.5 * (x0 + x1);
        stack.push((x0, mid, gk15(&f, x0, mid)));
        stack.push((mid, x1, gk15(&f, mid, x1)));
    }
    if !done_value.is_finite() {
        return Err(Error::Domain("non-finite integral".into()));
    }
    Ok(Integral { value: sign * done_value, error: done_error })
}

/// Root of `f` in `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket(format!("f({lo})={flo}, f({hi})={fhi}")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of an increasing `f` with `f(lo) < target`, growing `hi` geometrically
/// until the bracket closes or `cap` is passed.
pub fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, lo: f64, cap: f64, rel_tol: f64) -> Result<f64> {
    let g = |x: f64| f(x) - target;
    if g(lo) > 0.0 {
        return Err(Error::Bracket(format!("value already above target at {lo}")));
    }
    let mut hi = (lo * 2.0).max(lo + 1.0);
    while g(hi) < 0.0 {
        if hi >= cap {
            return Err(Error::Bracket(format!("no bracket below {cap}")));
        }
        hi = (hi * 2.0).min(cap);
    }
    bisect(g, lo, hi, rel_tol * hi)
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Carlson).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Degenerate("pchip needs >= 2 strictly increasing knots".into()));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = delta[0];
            ds[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            ds[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, ds })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&k| k <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_slope(x).0
    }

    /// Value and first derivative.
    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        let slope = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (value, slope)
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Settings of [`newton3`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { damping: 0.5, max_iter: 100, tol: 1e-12 }
    }
}

/// Outcome of [`newton3`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonReport {
    pub x: Vector3<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton iteration with a forward-difference Jacobian. A full step is
/// tried first and halved until the residual norm drops, down to `damping`;
/// beyond that the damped step is taken regardless.
pub fn newton3<F>(f: F, x0: Vector3<f64>, opts: NewtonOptions) -> NewtonReport
where
    F: Fn(&Vector3<f64>) -> Option<Vector3<f64>>,
{
    let mut x = x0;
    let mut fx = match f(&x) {
        Some(v) => v,
        None => return NewtonReport { x, residual: f64::INFINITY, iterations: 0, converged: false },
    };
    for it in 0..opts.max_iter {
        let norm = fx.amax();
        if norm <= opts.tol {
            return NewtonReport { x, residual: norm, iterations: it, converged: true };
        }
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let h = 1e-7 * x[j].abs().max(1e-3);
            let mut xh = x;
            xh[j] += h;
            let Some(fh) = f(&xh) else {
                return NewtonReport { x, residual: norm, iterations: it, converged: false };
            };
            jac.set_column(j, &((fh - fx) / h));
        }
        let Some(step) = jac.lu().solve(&(-fx)) else {
            return NewtonReport { x, residual: norm, iterations: it, converged: false };
        };
        let mut scale = 1.0;
        loop {
            let trial = x + step * scale;
            match f(&trial) {
                Some(ft) if ft.amax() < norm || scale <= opts.damping => {
                    x = trial;
                    fx = ft;
                    break;
                }
                _ if scale <= opts.damping / 64.0 => {
                    return NewtonReport { x, residual: norm, iterations: it, converged: false };
                }
                _ => scale *= 0.5,
            }
        }
    }
    let norm = fx.amax();
    NewtonReport { x, residual: norm, iterations: opts.max_iter, converged: norm <= opts.tol }
}
