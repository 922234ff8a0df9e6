//! Quantitative laws along the rows and columns of the prime matrix: gap
//! growth, the eta and zeta analogues, the logarithmic integral and `R(x)`,
//! next-element prediction, the ray and column distribution laws and the
//! asymptotic nth-prime rod.

use std::f64::consts::E;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::PrimeIndexer;
use crate::error::{Error, Result};
use crate::numeric::{integrate, solve_increasing, Integral, Pchip, QuadratureSpec, Singularity};
use crate::sequences::{multiplicative_set, CountingSet, Filter, Ray};
use crate::special;

/// Tolerance used for every quadrature in this module.
pub const LAW_QUADRATURE_TOL: f64 = 1e-11;

/// One residual of a law, with the bound it is held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub label: String,
    pub value: f64,
    /// `None` means reported only.
    pub threshold: Option<f64>,
}

impl Residual {
    pub fn within(&self) -> bool {
        self.threshold.map_or(true, |t| self.value.abs() <= t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub residuals: Vec<Residual>,
    pub max_abs: f64,
    pub argmax: Option<String>,
    pub pass: bool,
}

impl LawReport {
    pub fn new(law: impl Into<String>, residuals: Vec<Residual>) -> Self {
        let (max_abs, argmax) = residuals.iter().fold((0.0_f64, None), |(m, a), r| {
            if r.value.abs() > m {
                (r.value.abs(), Some(r.label.clone()))
            } else {
                (m, a)
            }
        });
        let pass = residuals.iter().all(Residual::within);
        Self { law: law.into(), residuals, max_abs, argmax, pass }
    }

    /// Largest `|ε|` among residuals whose label passes `keep`.
    pub fn max_where(&self, keep: impl Fn(&Residual) -> bool) -> f64 {
        self.residuals.iter().filter(|r| keep(r)).fold(0.0, |m, r| m.max(r.value.abs()))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.within())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Export(e.to_string()))
    }
}

fn element(ray: &Ray, depth: usize) -> Result<u64> {
    if depth == 0 {
        return Err(Error::Domain("depth starts at 1".into()));
    }
    ray.elements.get(depth - 1).copied().ok_or(Error::Capacity { value: depth as u64, limit: ray.elements.len() as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    pub lower: u64,
    pub upper: u64,
    pub bound: f64,
    pub holds: bool,
    /// `gap − bound`.
    pub margin: f64,
}

/// Checks `p_{n+1} − p_n > p_n (ln p_n − 1)` on a ray.
pub fn gap_bound_check(ray: &Ray, depth: usize) -> Result<GapBound> {
    let lower = element(ray, depth)?;
    let upper = element(ray, depth + 1)?;
    let p = lower as f64;
    let bound = p * (p.ln() - 1.0);
    let gap = (upper - lower) as f64;
    Ok(GapBound { lower, upper, bound, holds: gap > bound, margin: gap - bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub value: f64,
    /// Rigorous upper bound on the omitted terms.
    pub tail_bound: f64,
    pub terms: usize,
}

/// Upper bound for `Σ_{k>=1} q_k^{-s}` over the ray elements after `last`,
/// using `p(n) > n ln n`, so each later element exceeds the previous one by a
/// factor of at least `ln last`.
fn ray_tail(last: f64, s: f64) -> f64 {
    let ratio = last.ln().powf(-s);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    last.powf(-s) * ratio / (1.0 - ratio)
}

/// `Σ_{n<=terms} p_n^{-s}` along a ray.
pub fn eta_partial(ray: &Ray, s: f64, terms: usize) -> Result<PartialSum> {
    if !(s >= 1.0) {
        return Err(Error::Domain(format!("eta needs s >= 1, got {s}")));
    }
    if terms == 0 {
        return Err(Error::Domain("eta needs at least one term".into()));
    }
    let last = element(ray, terms)?;
    let value = ray.elements[..terms].iter().map(|&p| (p as f64).powf(-s)).sum();
    Ok(PartialSum { value, tail_bound: ray_tail(last as f64, s), terms })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaRay {
    pub generator: u64,
    pub s: f64,
    pub bound: u64,
    /// `1 + Σ n^{-s}` over the multiplicative set up to `bound`.
    pub sum: f64,
    /// `Π (1 − p^{-s})^{-1}` over ray primes up to `bound`.
    pub product: f64,
    pub sum_tail: f64,
    pub product_tail: f64,
    pub set_size: usize,
    pub primes: Vec<u64>,
}

impl ZetaRay {
    /// Both truncations approach the same limit from below.
    pub fn consistent(&self) -> bool {
        (self.sum - self.product).abs() <= self.sum_tail.max(self.product_tail)
    }
}

/// The sum and product forms of the zeta analogue of one ray.
pub fn zeta_ray(primes: &Filter, s: f64, generator: u64, bound: u64) -> Result<ZetaRay> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
    }
    let set = multiplicative_set(primes, generator, bound)?;
    let (ray, _) = Ray::extend_within(primes, generator, 64, bound)?;
    let sum = 1.0 + set.iter().map(|&n| (n as f64).powf(-s)).sum::<f64>();
    let product = ray.elements.iter().map(|&p| 1.0 / (1.0 - (p as f64).powf(-s))).product::<f64>();
    let b = bound.max(1) as f64;
    let sum_tail = b.powf(1.0 - s) / (s - 1.0);
    let first_omitted = (bound + 1).max(3) as f64;
    let log_tail = (first_omitted.powf(-s) + ray_tail(first_omitted, s)) / (1.0 - first_omitted.powf(-s));
    let product_tail = product * log_tail.exp_m1();
    Ok(ZetaRay {
        generator,
        s,
        bound,
        sum,
        product,
        sum_tail,
        product_tail,
        set_size: set.len(),
        primes: ray.elements,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaGlobal {
    pub s: f64,
    pub prime_bound: u64,
    pub rays: usize,
    pub primes: usize,
    /// Product of the per-ray factors, taken in ascending prime order.
    pub value: f64,
    /// Product of the per-ray products, ray by ray.
    pub ray_grouped: f64,
    /// The plain Euler product over every prime up to `prime_bound`.
    pub euler_product: f64,
    /// `ζ(s) − value` lies in `[0, truncation_bound]` when the rays cover all
    /// primes up to `prime_bound`.
    pub truncation_bound: f64,
    /// The rays hit each prime up to `prime_bound` exactly once.
    pub disjoint_cover: bool,
    pub bit_identical: bool,
}

/// Product of the ray zeta analogues over generators up to
/// `generator_bound`, each truncated at `prime_bound`.
pub fn zeta_global(primes: &Filter, s: f64, generator_bound: u64, prime_bound: u64) -> Result<ZetaGlobal> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
    }
    let mut generators = Vec::new();
    let mut n = 1;
    loop {
        let g = primes.nth_generator(n)?;
        if g > generator_bound || primes.nth(g)? > prime_bound {
            break;
        }
        generators.push(g);
        n += 1;
    }
    let rays: Vec<Vec<u64>> = generators
        .par_iter()
        .map(|&g| Ray::extend_within(primes, g, 64, prime_bound).map(|(r, _)| r.elements))
        .collect::<Result<_>>()?;
    let factor = |p: u64| 1.0 / (1.0 - (p as f64).powf(-s));
    let ray_grouped = rays.iter().map(|r| r.iter().map(|&p| factor(p)).product::<f64>()).product();
    let mut collected: Vec<u64> = rays.concat();
    collected.sort_unstable();
    let all = primes.members_upto(prime_bound)?;
    let disjoint_cover = collected == all;
    let value = collected.iter().map(|&p| factor(p)).product::<f64>();
    let euler_product = all.iter().map(|&p| factor(p)).product::<f64>();
    let truncation_bound = (prime_bound as f64).powf(1.0 - s) / (s - 1.0);
    Ok(ZetaGlobal {
        s,
        prime_bound,
        rays: rays.len(),
        primes: collected.len(),
        value,
        ray_grouped,
        euler_product,
        truncation_bound,
        disjoint_cover,
        bit_identical: value.to_bits() == euler_product.to_bits(),
    })
}

/// `1/ln s − 1/(s − 1)`, smooth across `s = 1`.
fn log_integrand_regular(s: f64) -> f64 {
    let u = s - 1.0;
    if u.abs() < 1e-3 {
        0.5 - u / 12.0 + u * u / 24.0 - 19.0 * u * u * u / 720.0 + 3.0 * u.powi(4) / 160.0
    } else if s == 0.0 {
        1.0
    } else {
        1.0 / s.ln() - 1.0 / u
    }
}

/// Quadrature evaluation of the principal-value logarithmic integral
/// `L(x) = PV ∫₀ˣ ds / ln s`.
pub fn log_integral(x: f64) -> Result<Integral> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("L({x})")));
    }
    if x == 1.0 {
        return Err(Error::Domain("L is singular at 1".into()));
    }
    if x == 0.0 {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let spec = QuadratureSpec::new(LAW_QUADRATURE_TOL, Singularity::PrincipalValueAtOne);
    // ∫ 1/(s−1) has the principal value ln|x − 1|
    let mut total = Integral { value: (x - 1.0).abs().ln(), error: 0.0 };
    let mut a = 0.0;
    let mut b = x.min(2.0);
    loop {
        let part = integrate(log_integrand_regular, a, b, &spec)?;
        total.value += part.value;
        total.error += part.error;
        if b >= x {
            break;
        }
        a = b;
        b = (2.0 * b).min(x);
    }
    Ok(total)
}

/// `R(x) = Σ μ(k)/k · L(x^{1/k})` cut where `x^{1/k} < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannR {
    pub x: f64,
    pub value: f64,
    /// Number of Möbius terms kept.
    pub terms: u32,
    /// Remainder up to the fully converged series.
    pub tail: f64,
}

impl RiemannR {
    pub fn converged(&self) -> f64 {
        self.value + self.tail
    }
}

pub fn riemann_r(engine: &PrimeIndexer, x: f64) -> Result<RiemannR> {
    if !(x >= 2.0) {
        return Err(Error::Domain(format!("R({x}) needs x >= 2")));
    }
    let mut value = 0.0;
    let mut k = 1u32;
    while x.powf(1.0 / k as f64) >= 2.0 {
        let mu = engine.mobius(u64::from(k))?;
        if mu != 0 {
            value += f64::from(mu) / f64::from(k) * log_integral(x.powf(1.0 / k as f64))?.value;
        }
        k += 1;
    }
    let terms = k - 1;
    Ok(RiemannR { x, value, terms, tail: special::riemann_r_gram(x) - value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predictor {
    LogIntegral,
    RiemannR,
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LogIntegral => "L",
            Self::RiemannR => "R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub generator: u64,
    pub depth: usize,
    pub current: u64,
    pub predicted: f64,
    pub actual: u64,
    pub relative_error: f64,
}

/// Predicts the element after depth `depth` as the root of `L(x) = p_n` or
/// `R(x) = p_n`.
pub fn predict_next(engine: &PrimeIndexer, ray: &Ray, depth: usize, method: Predictor) -> Result<Prediction> {
    let current = element(ray, depth)?;
    let actual = element(ray, depth + 1)?;
    let target = current as f64;
    let cap = (engine.config().hard_limit as f64) * 4.0;
    let predicted = match method {
        Predictor::LogIntegral => {
            solve_increasing(|x| log_integral(x).map_or(f64::NAN, |v| v.value), target, 2.0, cap, 1e-13)?
        }
        Predictor::RiemannR => solve_increasing(special::riemann_r_gram, target, 2.0, cap, 1e-13)?,
    };
    Ok(Prediction {
        generator: ray.generator,
        depth,
        current,
        predicted,
        actual,
        relative_error: (predicted - actual as f64).abs() / actual as f64,
    })
}

/// One evaluation of the ray distribution law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayLawPoint {
    pub generator: u64,
    pub depth: usize,
    pub element: u64,
    /// Lower integration limit.
    pub start: u64,
    /// Ray elements at or below `start`, not counted by the integral.
    pub offset: usize,
    pub count: usize,
    pub integral: f64,
    pub residual: f64,
}

/// Lower integration limit of the ray law: 11 for ray 1, 7 for ray 4 and
/// the generator otherwise.
pub fn ray_law_start(generator: u64) -> u64 {
    match generator {
        1 => 11,
        4 => 7,
        m => m,
    }
}

/// `ε = #{ray elements in (start, p_n]} − ∫_start^{p_n} ds / (s ln ln s)`.
pub fn ray_distribution_law(ray: &Ray, depth: usize) -> Result<RayLawPoint> {
    let p = element(ray, depth)?;
    let start = ray_law_start(ray.generator);
    if (start as f64) <= E {
        return Err(Error::Domain(format!("integration start {start} must exceed e")));
    }
    if p <= start {
        return Err(Error::Domain(format!("element {p} does not exceed the start {start}")));
    }
    let offset = ray.elements.iter().take_while(|&&v| v <= start).count();
    let spec = QuadratureSpec::new(LAW_QUADRATURE_TOL, Singularity::AboveE);
    // substitute s = e^t to flatten the integrand
    let integral = integrate(|t: f64| 1.0 / t.ln(), (start as f64).ln(), (p as f64).ln(), &spec)?.value;
    let count = depth - offset;
    Ok(RayLawPoint {
        generator: ray.generator,
        depth,
        element: p,
        start,
        offset,
        count,
        integral,
        residual: count as f64 - integral,
    })
}

/// Threshold of the ray law: 0.2 up to depth 3 and 0.06 from depth 4.
pub fn ray_law_threshold(depth: usize) -> f64 {
    if depth <= 3 {
        0.2
    } else {
        0.06
    }
}

/// The ray law over every element beyond the integration start of each ray.
pub fn ray_law_report(rays: &[Ray]) -> Result<(LawReport, Vec<RayLawPoint>)> {
    let mut points = Vec::new();
    for ray in rays {
        let start = ray_law_start(ray.generator);
        for depth in 1..=ray.elements.len() {
            if ray.elements[depth - 1] > start {
                points.push(ray_distribution_law(ray, depth)?);
            }
        }
    }
    let residuals = points
        .iter()
        .map(|p| Residual {
            label: format!("ray {} depth {}", p.generator, p.depth),
            value: p.residual,
            threshold: Some(ray_law_threshold(p.depth)),
        })
        .collect();
    Ok((LawReport::new("ray distribution", residuals), points))
}

/// CSV of `(depth, element, integral, residual)` for one ray.
pub fn ray_law_csv(points: &[RayLawPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["depth", "element", "integral", "residual"]).map_err(|e| Error::Export(e.to_string()))?;
    for p in points {
        w.write_record([p.depth.to_string(), p.element.to_string(), format!("{:.9}", p.integral), format!("{:.9}", p.residual)])
            .map_err(|e| Error::Export(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnLaw {
    pub generator: u64,
    /// Row of the generator, `m − π(m)`.
    pub row: u64,
    /// `m − ∫₂^m ds / ln s`, defined for `m >= 2`.
    pub asymptotic: Option<f64>,
    pub relative_deviation: Option<f64>,
}

pub fn column_distribution_law(primes: &Filter, engine: &PrimeIndexer, m: u64) -> Result<ColumnLaw> {
    if !primes.is_generator(m)? {
        return Err(Error::NotMember { value: m, filter: "generators".into() });
    }
    let row = m - engine.prime_pi(m)?;
    let asymptotic = if m >= 2 {
        let x = m as f64;
        Some(x - (log_integral(x)?.value - log_integral(2.0)?.value))
    } else {
        None
    };
    let relative_deviation = asymptotic.map(|a| (row as f64 - a).abs() / row as f64);
    Ok(ColumnLaw { generator: m, row, asymptotic, relative_deviation })
}

/// Asymptotic expansion of the nth prime, defined for `x > e`.
pub fn pbar(x: f64) -> Result<f64> {
    if !(x > E) {
        return Err(Error::Domain(format!("pbar({x}) needs x > e")));
    }
    let l = x.ln();
    let ll = l.ln();
    Ok(x * (l + ll + (ll - 2.0) / l - (ll * ll / 2.0 - 3.0 * ll + 5.5) / (l * l) - 1.0))
}

fn pbar_slope(x: f64) -> f64 {
    let l = x.ln();
    let ll = l.ln();
    let inner = l + ll + (ll - 2.0) / l - (ll * ll / 2.0 - 3.0 * ll + 5.5) / (l * l) - 1.0;
    // x times the derivative of `inner`
    let q = ll * ll / 2.0 - 3.0 * ll + 5.5;
    let d = 1.0 + 1.0 / l + (3.0 - ll) / (l * l) - ((ll - 3.0) - 2.0 * q) / (l * l * l);
    inner + d
}

/// Below this point the rod continues `pbar` as a power law with matching
/// value and slope, since `pbar` itself turns negative under 8.
pub const ROD_JOIN: f64 = 16.0;

fn rod(x: f64) -> f64 {
    if x >= ROD_JOIN {
        return pbar(x).expect("above e");
    }
    let v = pbar(ROD_JOIN).expect("above e");
    let k = ROD_JOIN * pbar_slope(ROD_JOIN) / v;
    v * (x / ROD_JOIN).powf(k)
}

/// `p̃(x) = s(x) · rod(x)`, with `s` a monotone C¹ interpolant of the ratio
/// `p(n) / rod(n)` through `n = 1..=limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodSpline {
    ratio: Pchip,
    limit: u64,
}

impl RodSpline {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.ratio.eval(x) * rod(x)
    }
}

pub fn rod_spline(engine: &PrimeIndexer, limit: u64) -> Result<RodSpline> {
    if limit < 2 {
        return Err(Error::Domain("the rod spline needs at least two knots".into()));
    }
    let last = engine.nth_prime(limit)?;
    let primes = engine.primes_in_range(2, last + 1)?;
    let xs: Vec<f64> = (1..=limit).map(|n| n as f64).collect();
    let ys: Vec<f64> = xs.iter().zip(&primes).map(|(&x, &p)| p as f64 / rod(x)).collect();
    Ok(RodSpline { ratio: Pchip::new(xs, ys)?, limit })
}

/// One point of the scan `|L(p_{n+1}) − p_n| / (√p_{n+1} ln p_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub generator: u64,
    pub depth: usize,
    pub numerator: f64,
    pub ratio: f64,
    /// `π(p_{n+1}) = p_n`, so the numerator is `|L − π|` at a ray point.
    pub counting_identity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub points: Vec<ScanPoint>,
    pub max_ratio: f64,
    pub argmax: Option<(u64, usize)>,
}

pub fn conjecture3_scan(engine: &PrimeIndexer, rays: &[Ray]) -> Result<ScanSummary> {
    let pairs: Vec<(&Ray, usize)> =
        rays.iter().flat_map(|r| (1..r.elements.len()).map(move |d| (r, d))).collect();
    let points: Vec<ScanPoint> = pairs
        .par_iter()
        .map(|&(ray, depth)| {
            let lower = ray.elements[depth - 1];
            let upper = ray.elements[depth];
            let x = upper as f64;
            let numerator = (log_integral(x)?.value - lower as f64).abs();
            Ok(ScanPoint {
                generator: ray.generator,
                depth,
                numerator,
                ratio: numerator / (x.sqrt() * x.ln()),
                counting_identity: engine.prime_pi(upper)? == lower,
            })
        })
        .collect::<Result<_>>()?;
    let best = points.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio));
    Ok(ScanSummary {
        max_ratio: best.map_or(0.0, |p| p.ratio),
        argmax: best.map(|p| (p.generator, p.depth)),
        points,
    })
}
