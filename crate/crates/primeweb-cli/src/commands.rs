use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use primeweb::appendix::{self, Comparison, DEEP_LIMIT, DESK_LIMIT};
use primeweb::engine::{EngineConfig, PrimeIndexer};
use primeweb::laws::{self, Predictor};
use primeweb::numeric::{integrate, QuadratureSpec, Singularity};
use primeweb::sequences::{
    build_matrix, classify_twins, cluster_union_check, verify_partition, Address, CountingSet, Filter, FilterKind,
    Ray, TwinClass,
};
use primeweb::spiral::{collinearity_defect, triplet_survey, TRIPLET_WINDOW};
use primeweb::web::{self, Composition, Fit, Rotations, SvgOptions, Trapezoid, Web, DEFAULT_SKIPPED, ROTATION_RAY};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::cache::RayCache;
use crate::config::RunConfig;
use crate::error::CliError;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
        }
    }
}

/// Exit code of an operational error.
pub const EXIT_ERROR: u8 = 2;

/// Shared state of one run.
pub struct Session {
    pub config: RunConfig,
    pub engine: Arc<PrimeIndexer>,
}

impl Session {
    pub fn new(config: RunConfig) -> Self {
        let engine = PrimeIndexer::new(EngineConfig { hard_limit: config.hard_limit, ..EngineConfig::default() });
        Self { config, engine: Arc::new(engine) }
    }

    pub fn filter(&self, kind: FilterKind) -> Filter {
        Filter::new(kind, self.engine.clone())
    }

    fn primes(&self) -> Filter {
        self.filter(FilterKind::Primes)
    }

    pub fn cache_path(&self) -> PathBuf {
        self.config.cache_path.clone().unwrap_or_else(|| self.config.output_dir.join("ray_cache.tsv"))
    }

    /// Writes `body` to `name` under the output directory.
    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let dir = &self.config.output_dir;
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let body = serde_json::to_string_pretty(value).map_err(|e| primeweb::Error::Export(e.to_string()))?;
        self.write(name, &(body + "\n"))
    }

    /// Desk-scale rays of the printed prime matrix.
    fn table_rays(&self) -> Result<Vec<Ray>, CliError> {
        Ok(appendix::table_rays(&self.primes(), DESK_LIMIT)?)
    }
}

fn file_tag(kind: FilterKind) -> String {
    kind.tag().replace('+', "p").replace('-', "m")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct MatrixArgs {
    pub filter: FilterKind,
    pub rows: usize,
    pub cols: usize,
    pub value_limit: u64,
    pub format: MatrixFormat,
    /// Also compare with the printed table of the family.
    pub appendix: bool,
    pub deep: bool,
    pub budget: Option<Duration>,
}

#[derive(Serialize)]
struct AppendixReport<'a> {
    comparison: &'a Comparison,
    seconds: f64,
}

pub fn matrix(s: &Session, a: &MatrixArgs) -> Result<Outcome, CliError> {
    let filter = s.filter(a.filter);
    let limit = if a.deep { a.value_limit.max(DEEP_LIMIT) } else { a.value_limit };
    if !a.deep && limit > DESK_LIMIT {
        return Err(CliError::Usage(format!("values above {DESK_LIMIT} need --deep")));
    }
    let m = build_matrix(&filter, a.rows, a.cols, limit)?;
    let tag = file_tag(a.filter);
    let path = match a.format {
        MatrixFormat::Csv => s.write(&format!("matrix_{tag}.csv"), &m.to_csv()?)?,
        MatrixFormat::Json => s.write(&format!("matrix_{tag}.json"), &(m.to_json()? + "\n"))?,
    };
    let truncated = m.rows.iter().filter(|r| r.truncated).count();
    println!("matrix {} {}x{} -> {} ({truncated} rows truncated at {limit})", a.filter, a.rows, a.cols, path.display());
    if !a.appendix {
        return Ok(Outcome::Pass);
    }
    let printed = if a.filter == FilterKind::Primes {
        appendix::prime_table()?
    } else {
        appendix::family_tables()?
            .into_iter()
            .find(|t| t.family == a.filter)
            .ok_or_else(|| CliError::Usage(format!("no printed table for {}", a.filter)))?
    };
    let started = Instant::now();
    let c = appendix::compare(&printed, &filter, limit, a.budget)?;
    let seconds = started.elapsed().as_secs_f64();
    let path = s.write_json(&format!("appendix_{tag}.json"), &AppendixReport { comparison: &c, seconds })?;
    println!(
        "appendix {}: {} matched, {} flagged, {} mismatched, {} beyond {limit}, {} rows unchecked, {seconds:.1} s -> {}",
        a.filter,
        c.matched,
        c.flagged.len(),
        c.mismatches.len(),
        c.beyond_limit,
        c.unchecked_rows.len(),
        path.display()
    );
    Ok(Outcome::from_pass(c.exact() && c.complete()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyTarget {
    Partition,
    Eq6,
    Theorem2,
    Theorem3,
    Q1,
}

#[derive(Serialize)]
struct PartitionSummary {
    filter: String,
    bound: u64,
    members: usize,
    rows_used: u64,
    duplicates: Vec<u64>,
    missing: Vec<u64>,
}

#[derive(Serialize)]
struct IntervalCheck {
    first: Address,
    second: Address,
    members_between: u64,
    predecessor_gap: u64,
}

#[derive(Serialize)]
struct IntervalSummary {
    filter: String,
    bound: u64,
    pairs: usize,
    seed: u64,
    evicted_on_load: usize,
    failures: Vec<IntervalCheck>,
}

#[derive(Serialize)]
struct TwinSummary {
    bound: u64,
    pairs: usize,
    unbound: usize,
    bound_right: usize,
    bound_left: usize,
    outside_first_column: Vec<(u64, u64)>,
    examples: Vec<web::TwinEvent>,
    examples_match: bool,
}

#[derive(Serialize)]
struct GapSummary {
    rays: usize,
    checked: usize,
    violations: Vec<(u64, usize)>,
    min_margin: f64,
}

/// Runs one identity check up to `bound`; the report goes to
/// `verify_<target>.json`.
pub fn verify(s: &Session, target: VerifyTarget, kind: FilterKind, bound: u64, pairs: usize, seed: u64) -> Result<Outcome, CliError> {
    let (name, pass) = match target {
        VerifyTarget::Partition => {
            let f = s.filter(kind);
            let r = verify_partition(&f, bound)?;
            let pass = r.exact();
            let summary = PartitionSummary {
                filter: r.filter,
                bound,
                members: r.members.len(),
                rows_used: r.rows_used,
                duplicates: r.duplicates,
                missing: r.missing,
            };
            println!("partition {kind} <= {bound}: {} members in {} rows", summary.members, summary.rows_used);
            (s.write_json(&format!("verify_partition_{}.json", file_tag(kind)), &summary)?, pass)
        }
        VerifyTarget::Eq6 => {
            let summary = interval_pairs(s, kind, bound, pairs, seed)?;
            let pass = summary.failures.is_empty() && summary.evicted_on_load == 0;
            println!(
                "interval identity {kind}: {} pairs, {} failures, {} cache entries evicted",
                summary.pairs,
                summary.failures.len(),
                summary.evicted_on_load
            );
            (s.write_json("verify_eq6.json", &summary)?, pass)
        }
        VerifyTarget::Theorem2 => {
            let r = cluster_union_check(&s.engine, bound)?;
            println!("cluster union <= {bound}: {} clusters, {} primes covered", r.clusters, r.covered);
            (s.write_json("verify_theorem2.json", &r)?, r.exact())
        }
        VerifyTarget::Theorem3 => {
            let summary = twin_summary(s, bound)?;
            let pass = summary.outside_first_column.is_empty() && summary.examples_match;
            println!(
                "twins <= {bound}: {} pairs, {} unbound, {} bound",
                summary.pairs,
                summary.unbound,
                summary.bound_left + summary.bound_right
            );
            (s.write_json("verify_theorem3.json", &summary)?, pass)
        }
        VerifyTarget::Q1 => {
            let summary = gap_summary(s)?;
            println!("gap bound: {} steps on {} rays, {} violations", summary.checked, summary.rays, summary.violations.len());
            (s.write_json("verify_q1.json", &summary)?, summary.violations.is_empty())
        }
    };
    println!("{} -> {}", if pass { "PASS" } else { "FAIL" }, name.display());
    Ok(Outcome::from_pass(pass))
}

/// Checks the interval identity on random pairs of members up to `bound`,
/// reading ray values through the cache.
fn interval_pairs(s: &Session, kind: FilterKind, bound: u64, pairs: usize, seed: u64) -> Result<IntervalSummary, CliError> {
    let f = s.filter(kind);
    let mut cache = RayCache::open(s.cache_path())?;
    let evicted_on_load = cache.stats().evicted;
    let members = f.members_upto(bound)?;
    if members.len() < 2 {
        return Err(CliError::Usage(format!("fewer than two {kind} members up to {bound}")));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let value = |cache: &mut RayCache, a: Address| -> Result<u64, CliError> {
        if a.depth == 0 {
            Ok(a.generator)
        } else {
            cache.value(&f, a.generator, a.depth)
        }
    };
    let mut done = 0;
    while done < pairs {
        let (i, j) = (rng.gen_range(0..members.len()), rng.gen_range(0..members.len()));
        if i == j {
            continue;
        }
        let a = primeweb::sequences::address_of(&f, members[i])?;
        let b = primeweb::sequences::address_of(&f, members[j])?;
        let (va, vb) = (value(&mut cache, a)?, value(&mut cache, b)?);
        let pa = value(&mut cache, Address::new(a.generator, a.depth - 1))?;
        let pb = value(&mut cache, Address::new(b.generator, b.depth - 1))?;
        let (lo, hi) = (va.min(vb), va.max(vb));
        let members_between = if hi > lo { f.count_upto(hi - 1)? - f.count_upto(lo)? } else { u64::MAX };
        let predecessor_gap = pa.abs_diff(pb).saturating_sub(1);
        if members_between != predecessor_gap {
            failures.push(IntervalCheck { first: a, second: b, members_between, predecessor_gap });
        }
        done += 1;
    }
    Ok(IntervalSummary { filter: kind.tag().to_string(), bound, pairs, seed, evicted_on_load, failures })
}

/// Worked examples: lower twin, class, ray start between the pair and the
/// row a bound pair is sewn to.
pub const TWIN_EXAMPLES: [(u64, TwinClass, u64, Option<u64>); 3] = [
    (71, TwinClass::Unbound, 359, None),
    (101, TwinClass::Unbound, 557, None),
    (617, TwinClass::BoundRight, 4561, Some(113)),
];

fn twin_summary(s: &Session, bound: u64) -> Result<TwinSummary, CliError> {
    let all = classify_twins(&s.engine, bound)?;
    let count = |c: TwinClass| all.iter().filter(|t| t.class == c).count();
    let outside_first_column =
        all.iter().filter(|t| t.class == TwinClass::Special && t.pair != (3, 5)).map(|t| t.pair).collect();
    let mut examples = Vec::new();
    let mut examples_match = true;
    for (t, class, mid, host) in TWIN_EXAMPLES {
        let ev = web::twin_event(&s.engine, t)?;
        examples_match &= (ev.class, ev.mid, ev.host) == (class, mid, host);
        examples.push(ev);
    }
    Ok(TwinSummary {
        bound,
        pairs: all.len(),
        unbound: count(TwinClass::Unbound),
        bound_right: count(TwinClass::BoundRight),
        bound_left: count(TwinClass::BoundLeft),
        outside_first_column,
        examples,
        examples_match,
    })
}

fn gap_summary(s: &Session) -> Result<GapSummary, CliError> {
    let rays = s.table_rays()?;
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    for ray in &rays {
        for depth in 1..ray.elements.len() {
            let g = laws::gap_bound_check(ray, depth)?;
            checked += 1;
            min_margin = min_margin.min(g.margin);
            if !g.holds {
                violations.push((ray.generator, depth));
            }
        }
    }
    Ok(GapSummary { rays: rays.len(), checked, violations, min_margin })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// Ray distribution law over the printed rays; also writes the ray-9 CSV.
    RayDistribution,
    /// Column distribution law for generators up to a bound.
    ColumnDistribution { bound: u64 },
    Eta { generator: u64, s: f64, terms: usize },
    Zeta { s: f64, generator_bound: u64, prime_bound: u64 },
    Predict,
    Conjecture3,
    Triplets,
}

#[derive(Serialize)]
struct RayLawSummary {
    points: usize,
    max_shallow: f64,
    max_deep: f64,
    failures: Vec<String>,
    quadrature_tol: f64,
    quadrature_disagreement: f64,
}

#[derive(Serialize)]
struct ColumnSummary {
    bound: u64,
    generators: usize,
    max_relative_deviation: f64,
    at: Option<u64>,
}

#[derive(Serialize)]
struct PredictSummary {
    predictions: usize,
    max_error_li: f64,
    max_error_r: f64,
    mean_error_li: f64,
    mean_error_r: f64,
}

#[derive(Serialize)]
struct ScanReport {
    points: usize,
    max_ratio: f64,
    argmax: Option<(u64, usize)>,
    counting_identity: bool,
}

#[derive(Serialize)]
struct TripletReport {
    triplets: usize,
    solved: usize,
    mean: f64,
    mean_pitch_degrees: f64,
    min: f64,
    max: f64,
    max_collinearity_defect: f64,
    root_tol: f64,
}

/// Largest gap between the ray law integrals at the configured tolerance
/// and at the library tolerance.
fn quadrature_agreement(s: &Session, rays: &[Ray]) -> Result<f64, CliError> {
    let spec = QuadratureSpec::new(s.config.quadrature_tol, Singularity::AboveE);
    let mut worst: f64 = 0.0;
    for ray in rays.iter().filter(|r| r.generator == 9) {
        for depth in 1..=ray.elements.len() {
            let Ok(p) = laws::ray_distribution_law(ray, depth) else { continue };
            let direct = integrate(|t: f64| 1.0 / t.ln(), (p.start as f64).ln(), (p.element as f64).ln(), &spec)?.value;
            worst = worst.max((direct - p.integral).abs());
        }
    }
    Ok(worst)
}

/// Self-agreement bound between two quadrature tolerances.
pub const QUADRATURE_AGREEMENT: f64 = 1e-8;

pub fn laws(s: &Session, law: Law) -> Result<Outcome, CliError> {
    let primes = s.primes();
    let (name, pass) = match law {
        Law::RayDistribution => {
            let rays = s.table_rays()?;
            let (report, points) = laws::ray_law_report(&rays)?;
            let ray9: Vec<_> = points.iter().filter(|p| p.generator == 9).copied().collect();
            let csv = s.write("ray9_law.csv", &laws::ray_law_csv(&ray9)?)?;
            let disagreement = quadrature_agreement(s, &rays)?;
            let summary = RayLawSummary {
                points: points.len(),
                max_shallow: report.max_where(|r| r.threshold == Some(0.2)),
                max_deep: report.max_where(|r| r.threshold == Some(0.06)),
                failures: report.failures().map(|r| format!("{}: {:.4}", r.label, r.value)).collect(),
                quadrature_tol: s.config.quadrature_tol,
                quadrature_disagreement: disagreement,
            };
            println!(
                "ray law: {} points, max |e| {:.4} (depth <= 3), {:.4} (depth >= 4); ray 9 -> {}",
                summary.points,
                summary.max_shallow,
                summary.max_deep,
                csv.display()
            );
            for f in &summary.failures {
                println!("  over threshold: {f}");
            }
            let pass = report.pass && disagreement <= QUADRATURE_AGREEMENT;
            (s.write_json("laws_eq7.json", &summary)?, pass)
        }
        Law::ColumnDistribution { bound } => {
            let mut generators = 0;
            let mut worst: (f64, Option<u64>) = (0.0, None);
            for m in 2..=bound {
                if !primes.is_generator(m)? {
                    continue;
                }
                generators += 1;
                let c = laws::column_distribution_law(&primes, &s.engine, m)?;
                if let Some(d) = c.relative_deviation.filter(|&d| d > worst.0) {
                    worst = (d, Some(m));
                }
            }
            let summary = ColumnSummary { bound, generators, max_relative_deviation: worst.0, at: worst.1 };
            println!("column law: {generators} generators, max relative deviation {:.4} at {:?}", worst.0, worst.1);
            (s.write_json("laws_eq8.json", &summary)?, true)
        }
        Law::Eta { generator, s: exponent, terms } => {
            let ray = Ray::extend(&primes, generator, terms)?;
            let sum = laws::eta_partial(&ray, exponent, terms)?;
            println!("eta ray {generator} s={exponent}: {:.12} (+ tail <= {:.3e})", sum.value, sum.tail_bound);
            (s.write_json("laws_eta.json", &sum)?, true)
        }
        Law::Zeta { s: exponent, generator_bound, prime_bound } => {
            let z = laws::zeta_global(&primes, exponent, generator_bound, prime_bound)?;
            let exact = (exponent.fract() == 0.0 && exponent >= 2.0)
                .then(|| primeweb::special::zeta_int(exponent as u32));
            let within = exact.map_or(true, |v| (z.value - v).abs() <= z.truncation_bound);
            println!(
                "zeta({exponent}) over {} rays, {} primes: {:.9} (bound {:.3e}), product bit-equal: {}",
                z.rays, z.primes, z.value, z.truncation_bound, z.bit_identical
            );
            (s.write_json("laws_zeta.json", &z)?, within && z.bit_identical && z.disjoint_cover)
        }
        Law::Predict => {
            let rays = s.table_rays()?;
            let mut li = Vec::new();
            let mut r = Vec::new();
            for ray in &rays {
                for depth in 1..ray.elements.len() {
                    li.push(laws::predict_next(&s.engine, ray, depth, Predictor::LogIntegral)?.relative_error);
                    r.push(laws::predict_next(&s.engine, ray, depth, Predictor::RiemannR)?.relative_error);
                }
            }
            let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
            let summary = PredictSummary {
                predictions: li.len(),
                max_error_li: max(&li),
                max_error_r: max(&r),
                mean_error_li: mean(&li),
                mean_error_r: mean(&r),
            };
            println!(
                "predict: {} steps, mean relative error {:.3e} (L), {:.3e} (R)",
                summary.predictions, summary.mean_error_li, summary.mean_error_r
            );
            (s.write_json("laws_predict.json", &summary)?, true)
        }
        Law::Conjecture3 => {
            let rays = s.table_rays()?;
            let scan = laws::conjecture3_scan(&s.engine, &rays)?;
            let counting_identity = scan.points.iter().all(|p| p.counting_identity);
            let report =
                ScanReport { points: scan.points.len(), max_ratio: scan.max_ratio, argmax: scan.argmax, counting_identity };
            println!("conjecture 3 scan: {} points, max ratio {:.6} at {:?}", report.points, report.max_ratio, report.argmax);
            (s.write_json("laws_conj3.json", &report)?, counting_identity)
        }
        Law::Triplets => {
            let rays = s.table_rays()?;
            let survey = triplet_survey(&rays, s.engine.nth_prime(DEFAULT_SKIPPED)?)?;
            let mut defect: f64 = 0.0;
            for t in &survey.triplets {
                if let Some(x) = t.primary {
                    defect = defect.max(collinearity_defect(x, t.triplet)?);
                }
            }
            let report = TripletReport {
                triplets: survey.triplets.len(),
                solved: survey.solved,
                mean: survey.mean,
                mean_pitch_degrees: survey.mean_pitch_degrees,
                min: survey.min,
                max: survey.max,
                max_collinearity_defect: defect,
                root_tol: s.config.root_tol,
            };
            println!(
                "triplets: {}/{} solved in ({}, {}), mean {:.5}, pitch {:.3} deg, max defect {:.1e}",
                report.solved, report.triplets, TRIPLET_WINDOW.0, TRIPLET_WINDOW.1, report.mean, report.mean_pitch_degrees, defect
            );
            let pass = report.solved == report.triplets && defect <= s.config.root_tol;
            (s.write_json("laws_triplets.json", &report)?, pass)
        }
    };
    println!("{} -> {}", if pass { "PASS" } else { "FAIL" }, name.display());
    Ok(Outcome::from_pass(pass))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WebKind {
    Pure,
    ThreeTurns,
    FourTurns,
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct WebArgs {
    pub kind: WebKind,
    pub pitch_degrees: Option<f64>,
    /// Overlay the three-rotation trapezoid starting at this index.
    pub trapezoid: Option<u64>,
    pub rotations: usize,
    pub labels: bool,
}

#[derive(Serialize)]
struct WebSummary {
    variant: String,
    primes: usize,
    rays: usize,
    solves: usize,
    exact: usize,
    approximate: usize,
    failed: usize,
    exact_within_angle_tol: usize,
    isometry_residual: f64,
    crossings: Vec<(u64, u64)>,
}

/// Builds the requested web.
pub fn build_web(s: &Session, kind: WebKind, pitch: Option<f64>, rotations: usize) -> Result<Web, CliError> {
    let primes = s.primes();
    let approx = pitch.unwrap_or(web::APPROX_PITCH_DEGREES);
    Ok(match kind {
        WebKind::Pure => {
            let generators = (1..=40).filter(|&g| primes.is_generator(g).unwrap_or(false)).collect::<Vec<_>>();
            web::build_pure_log_web(&primes, pitch.unwrap_or(web::PURE_PITCH_DEGREES), rotations, &generators)?
        }
        WebKind::ThreeTurns => web::build_approx_web(&primes, Composition::ThreeTurns, approx)?,
        WebKind::FourTurns => web::build_approx_web(&primes, Composition::FourTurns, approx)?,
        WebKind::Degenerate => web::build_degenerate_web(&primes, approx)?,
    })
}

pub fn web(s: &Session, a: &WebArgs) -> Result<Outcome, CliError> {
    let built = build_web(s, a.kind, a.pitch_degrees, a.rotations)?;
    let mut opts = SvgOptions { label_primes: a.labels, ..SvgOptions::default() };
    if let Some(mu) = a.trapezoid {
        let rotations = Rotations::from_ray(&s.engine, ROTATION_RAY, 5)?;
        let z = Trapezoid::new(&s.engine, &rotations, 1, mu, 1, 2)?;
        for level in z.decompose(&s.engine, &rotations)? {
            opts.trapezoids.extend(level.pieces);
        }
    }
    let tag = match a.kind {
        WebKind::Pure => "pure",
        WebKind::ThreeTurns => "w3",
        WebKind::FourTurns => "w4",
        WebKind::Degenerate => "degenerate",
    };
    let svg = s.write(&format!("web_{tag}.svg"), &web::to_svg(&built, &opts)?)?;
    s.write(&format!("web_{tag}.json"), &(built.to_json()? + "\n"))?;
    let fits = built.fit_counts();
    let summary = WebSummary {
        variant: tag.to_string(),
        primes: built.primes().len(),
        rays: built.rays.len(),
        solves: built.solves.len(),
        exact: fits.exact,
        approximate: fits.approximate,
        failed: fits.failed,
        exact_within_angle_tol: built.solves.iter().filter(|x| x.angle_residual.abs() <= s.config.angle_tol).count(),
        isometry_residual: built.isometry_residual()?,
        crossings: built.crossings(),
    };
    s.write_json(&format!("web_{tag}_summary.json"), &summary)?;
    println!(
        "web {tag}: {} primes on {} rays, {} solves ({} exact, {} approximate, {} failed), isometry {:.1e} -> {}",
        summary.primes,
        summary.rays,
        summary.solves,
        summary.exact,
        summary.approximate,
        summary.failed,
        summary.isometry_residual,
        svg.display()
    );
    debug_assert!(built.solves.iter().all(|x| x.fit == Fit::classify(x.angle_residual)));
    Ok(Outcome::from_pass(summary.isometry_residual <= web::ISOMETRY_TOL))
}

/// Equation count, variable count and inequality count of the exported
/// system must match these.
pub const W3_VARIABLES: usize = 228;
pub const W3_EQUATIONS: usize = 228;
pub const W3_INEQUALITIES: usize = 304;

pub fn export_w3_system(s: &Session, path: &Path) -> Result<Outcome, CliError> {
    let primes = s.primes();
    let system = web::assemble_w3_system(&primes, DEFAULT_SKIPPED)?;
    let text = system.to_text()?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
    let back = web::W3System::parse(&text)?;
    let counts = (system.variables(), system.equations.len(), system.inequalities.len());
    let (skipped, knots, between) = system.coverage(&primes)?;
    println!(
        "w3 system: {} variables, {} equations, {} inequalities (target {W3_INEQUALITIES}); primes {skipped} skipped + {knots} knots + {between} between -> {}",
        counts.0,
        counts.1,
        counts.2,
        path.display()
    );
    let pass = back == system && counts == (W3_VARIABLES, W3_EQUATIONS, W3_INEQUALITIES);
    Ok(Outcome::from_pass(pass))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheAction {
    Audit,
    Clear,
    Stats,
}

#[derive(Serialize)]
struct CacheAuditSummary {
    filter: String,
    entries: usize,
    sampled: usize,
    mismatches: usize,
}

/// One audited entry per this many.
pub const AUDIT_STRIDE: usize = 100;

pub fn cache(s: &Session, action: CacheAction) -> Result<Outcome, CliError> {
    let mut cache = RayCache::open(s.cache_path())?;
    match action {
        CacheAction::Stats => {
            let st = cache.stats();
            println!("{} entries, {} evicted on load ({})", st.entries, st.evicted, cache.path().display());
            for (name, n) in cache.filters() {
                println!("  {name}: {n}");
            }
            Ok(Outcome::Pass)
        }
        CacheAction::Clear => {
            cache.clear()?;
            println!("cleared {}", cache.path().display());
            Ok(Outcome::Pass)
        }
        CacheAction::Audit => {
            let evicted = cache.stats().evicted;
            let mut clean = evicted == 0;
            let mut lines = Vec::new();
            for (name, _) in cache.filters() {
                let kind: FilterKind = name.parse()?;
                let r = cache.audit(&s.filter(kind), AUDIT_STRIDE)?;
                clean &= r.clean();
                lines.push(CacheAuditSummary {
                    filter: name,
                    entries: r.entries,
                    sampled: r.sampled,
                    mismatches: r.mismatches.len(),
                });
            }
            for l in &lines {
                println!("{}: {} of {} entries recomputed, {} mismatches", l.filter, l.sampled, l.entries, l.mismatches);
            }
            println!("{evicted} corrupted entries evicted on load");
            Ok(Outcome::from_pass(clean))
        }
    }
}
