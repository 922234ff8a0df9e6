//! One PASS/FAIL line per acceptance criterion. Tolerances are the constants
//! below; the test fails when the set of failing criteria differs from
//! `EXPECTED_FAILURES`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use primeweb::appendix::{self, DEEP_LIMIT, DESK_LIMIT};
use primeweb::engine::PrimeIndexer;
use primeweb::laws;
use primeweb::numeric::{integrate, QuadratureSpec, Singularity};
use primeweb::sequences::{
    address_of, classify_twins, cluster_union_check, interval_identity, verify_partition, CountingSet, Filter,
    FilterKind, TwinClass,
};
use primeweb::spiral::{collinearity_defect, triplet_survey, TRIPLET_WINDOW};
use primeweb::web::{
    self, build_approx_web, twin_event, Composition, Rotations, Trapezoid, APPROX_PITCH_DEGREES, DEFAULT_SKIPPED,
    ROTATION_RAY,
};
use primeweb_cli::commands::{self, MatrixArgs, MatrixFormat, Outcome, Session, TWIN_EXAMPLES};
use primeweb_cli::config::RunConfig;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const DESK_SECONDS: f64 = 60.0;
const DEEP_BUDGET: Duration = Duration::from_secs(30 * 60);
const SHALLOW_LAW_BOUND: f64 = 0.2;
const DEEP_LAW_BOUND: f64 = 0.06;
const ROOT_MEAN: (f64, f64) = (0.264, 0.005);
const PITCH_MEAN: (f64, f64) = (74.69, 0.1);
const COLLINEARITY_TOL: f64 = 1e-9;
const PARTITION_BOUND: u64 = 1_000_000;
const RANDOM_PAIRS: usize = 1000;
const CLUSTER_BOUND: u64 = 1_000_000;
const TWIN_BOUND: u64 = 10_000_000;
const THREE_TURN_PRIMES: usize = 212;
const ISOMETRY_TOL: f64 = 1e-9;
const SPREAD_TOL: f64 = 1e-9;
const FOUR_TURN_SOLVES: usize = 116;
const FOUR_TURN_EXACT: (usize, usize) = (94, 5);
const QUADRATURE_AGREEMENT: f64 = 1e-8;

/// Ray 4 exceeds the deep ray-law bound at depths 9 and 10.
const EXPECTED_FAILURES: &[u32] = &[3];

struct Line {
    criterion: u32,
    pass: bool,
    detail: String,
}

fn line(criterion: u32, pass: bool, detail: String) -> Line {
    Line { criterion, pass, detail }
}

fn setup() -> (Arc<PrimeIndexer>, Filter) {
    let e = Arc::new(PrimeIndexer::default());
    let p = Filter::new(FilterKind::Primes, e.clone());
    (e, p)
}

fn appendix_reproduction() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let session = Session::new(RunConfig { output_dir: dir.path().to_path_buf(), ..RunConfig::default() });
    let args = MatrixArgs {
        filter: FilterKind::Primes,
        rows: 120,
        cols: 64,
        value_limit: DESK_LIMIT,
        format: MatrixFormat::Csv,
        appendix: true,
        deep: false,
        budget: None,
    };
    let started = Instant::now();
    let desk = commands::matrix(&session, &args).unwrap();
    let desk_secs = started.elapsed().as_secs_f64();
    let (_, p) = setup();
    let started = Instant::now();
    let deep = appendix::compare(&appendix::prime_table().unwrap(), &p, DEEP_LIMIT, Some(DEEP_BUDGET)).unwrap();
    let deep_secs = started.elapsed().as_secs_f64();
    let pass = desk == Outcome::Pass && desk_secs <= DESK_SECONDS && deep.exact() && deep.complete();
    line(
        1,
        pass,
        format!(
            "entries <= 1e9 exact in {desk_secs:.1} s; <= 1e12: {} matched, {} mismatched, {} rows unchecked in {deep_secs:.1} s",
            deep.matched,
            deep.mismatches.len(),
            deep.unchecked_rows.len()
        ),
    )
}

fn family_matrices() -> Line {
    let (e, _) = setup();
    let mut matched = 0;
    let mut flagged = Vec::new();
    let mut exact = true;
    for m in appendix::family_tables().unwrap() {
        let c = appendix::compare(&m, &Filter::new(m.family, e.clone()), DESK_LIMIT, None).unwrap();
        exact &= c.exact() && c.complete();
        matched += c.matched;
        flagged.extend(c.flagged.iter().map(|(err, v)| format!("{} {} -> {:?}", err.family, err.printed, v)));
    }
    let t1 = Filter::new(FilterKind::TwinLower, e);
    let row = primeweb::sequences::Ray::extend(&t1, 1, 6).unwrap();
    let row_ok = row.elements == [3, 11, 137, 5639, 641129, 152921807];
    let euler_flagged = flagged.iter().any(|f| f.starts_with("E 1573316"));
    line(
        2,
        exact && row_ok && euler_flagged,
        format!("{matched} entries exact, T1 row 1 {}; flagged: {}", if row_ok { "ok" } else { "wrong" }, flagged.join(", ")),
    )
}

fn ray_law() -> Line {
    let (_, p) = setup();
    let rays = appendix::table_rays(&p, DESK_LIMIT).unwrap();
    let (report, points) = laws::ray_law_report(&rays).unwrap();
    let shallow = report.max_where(|r| r.threshold == Some(SHALLOW_LAW_BOUND));
    let deep = report.max_where(|r| r.threshold == Some(DEEP_LAW_BOUND));
    let ray9: Vec<_> = points.iter().filter(|x| x.generator == 9).copied().collect();
    let csv = laws::ray_law_csv(&ray9).unwrap();
    let over: Vec<String> = report.failures().map(|r| format!("{} ({:.4})", r.label, r.value)).collect();
    line(
        3,
        shallow <= SHALLOW_LAW_BOUND && deep <= DEEP_LAW_BOUND && csv.lines().count() > 1,
        format!(
            "{} points, max |e| {shallow:.4} (depth <= 3), {deep:.4} (depth >= 4); ray 9 CSV {} rows; over: {}",
            points.len(),
            csv.lines().count() - 1,
            if over.is_empty() { "none".to_string() } else { over.join(", ") }
        ),
    )
}

fn triplets() -> Line {
    let (e, p) = setup();
    let rays = appendix::table_rays(&p, DESK_LIMIT).unwrap();
    let survey = triplet_survey(&rays, e.nth_prime(DEFAULT_SKIPPED).unwrap()).unwrap();
    let in_window = survey.triplets.iter().all(|t| t.primary.is_some_and(|x| x > TRIPLET_WINDOW.0 && x < TRIPLET_WINDOW.1));
    let defect = survey
        .triplets
        .iter()
        .filter_map(|t| t.primary.map(|x| collinearity_defect(x, t.triplet).unwrap()))
        .fold(0.0, f64::max);
    let pass = in_window
        && (survey.mean - ROOT_MEAN.0).abs() <= ROOT_MEAN.1
        && (survey.mean_pitch_degrees - PITCH_MEAN.0).abs() <= PITCH_MEAN.1
        && defect <= COLLINEARITY_TOL;
    line(
        4,
        pass,
        format!(
            "{}/{} roots in window, mean {:.5}, pitch {:.3} deg, max collinearity defect {defect:.1e}",
            survey.solved,
            survey.triplets.len(),
            survey.mean,
            survey.mean_pitch_degrees
        ),
    )
}

fn partitions_and_identities() -> Line {
    let (e, p) = setup();
    let kinds = [
        FilterKind::Primes,
        FilterKind::TwinLower,
        FilterKind::Isolated,
        FilterKind::SixNMinusOne,
        FilterKind::SixNPlusOne,
        FilterKind::SquarePlusOne,
    ];
    let partitions = kinds.iter().all(|&k| verify_partition(&Filter::new(k, e.clone()), PARTITION_BOUND).unwrap().exact());
    let members = p.members_upto(PARTITION_BOUND).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    let mut identity_failures = 0;
    let mut pairs = 0;
    while pairs < RANDOM_PAIRS {
        let (i, j) = (rng.gen_range(0..members.len()), rng.gen_range(0..members.len()));
        if i == j {
            continue;
        }
        let a = address_of(&p, members[i]).unwrap();
        let b = address_of(&p, members[j]).unwrap();
        identity_failures += usize::from(!interval_identity(&p, a, b).unwrap().holds());
        pairs += 1;
    }
    let rays = appendix::table_rays(&p, DESK_LIMIT).unwrap();
    let mut counted = 0;
    let mut counting_failures = 0;
    for r in &rays {
        for w in r.elements.windows(2) {
            counted += 1;
            counting_failures += usize::from(e.prime_pi(w[1]).unwrap() != w[0]);
        }
    }
    line(
        5,
        partitions && identity_failures == 0 && counting_failures == 0,
        format!(
            "partitions of {} families to 1e6 {}; interval identity {}/{pairs} pairs; counting identity {}/{counted} steps",
            kinds.len(),
            if partitions { "exact" } else { "broken" },
            pairs - identity_failures,
            counted - counting_failures
        ),
    )
}

fn clusters_and_twins() -> Line {
    let (e, _) = setup();
    let union = cluster_union_check(&e, CLUSTER_BOUND).unwrap();
    let twins = classify_twins(&e, TWIN_BOUND).unwrap();
    let outside = twins.iter().filter(|t| t.class == TwinClass::Special && t.pair != (3, 5)).count();
    let examples = TWIN_EXAMPLES.iter().all(|&(t, class, mid, host)| {
        let ev = twin_event(&e, t).unwrap();
        (ev.class, ev.mid, ev.host) == (class, mid, host)
    });
    line(
        6,
        union.exact() && outside == 0 && examples,
        format!(
            "cluster union to 1e6 {}; {} twins to 1e7, {outside} outside the first column; worked examples {}",
            if union.exact() { "exact" } else { "broken" },
            twins.len(),
            if examples { "match" } else { "differ" }
        ),
    )
}

fn webs() -> Line {
    let (e, p) = setup();
    let w3 = build_approx_web(&p, Composition::ThreeTurns, APPROX_PITCH_DEGREES).unwrap();
    let placed = w3.primes().len();
    let iso = w3.isometry_residual().unwrap();
    let spread = w3.straightness().iter().filter(|s| s.exact).map(|s| s.spread).fold(0.0, f64::max);
    let rotations = Rotations::from_ray(&e, ROTATION_RAY, 5).unwrap();
    let z = Trapezoid::new(&e, &rotations, 1, 19, 1, 2).unwrap();
    let levels = z.decompose(&e, &rotations).unwrap();
    let expected_starts: Vec<u64> = (114..=126).map(|i| e.nth_prime(i).unwrap()).collect();
    let split = levels.iter().map(|l| l.pieces.len()).collect::<Vec<_>>() == [1, 14]
        && levels[1].ray_starts == expected_starts
        && expected_starts.first() == Some(&619)
        && expected_starts.last() == Some(&701);
    let w4 = build_approx_web(&p, Composition::FourTurns, APPROX_PITCH_DEGREES).unwrap();
    let fits = w4.fit_counts();
    let pass = placed == THREE_TURN_PRIMES
        && iso <= ISOMETRY_TOL
        && spread <= SPREAD_TOL
        && split
        && w4.solves.len() == FOUR_TURN_SOLVES
        && fits.exact.abs_diff(FOUR_TURN_EXACT.0) <= FOUR_TURN_EXACT.1;
    line(
        7,
        pass,
        format!(
            "three-turn web {placed} primes (stated 211; its composition 3*20 + 2*5 + 2*71 gives 212), isometry {iso:.1e}, \
             exact-ray spread {spread:.1e}; 3RET19 splits 1 + {} with starts 619..701 {}; four-turn web {} solves, {} exact",
            levels.get(1).map_or(0, |l| l.pieces.len()),
            if split { "ok" } else { "wrong" },
            w4.solves.len(),
            fits.exact
        ),
    )
}

fn w3_system() -> Line {
    let (_, p) = setup();
    let sys = web::assemble_w3_system(&p, DEFAULT_SKIPPED).unwrap();
    let text = sys.to_text().unwrap();
    let back = web::W3System::parse(&text).unwrap();
    let (v, eq, ineq) = (sys.variables(), sys.equations.len(), sys.inequalities.len());
    line(
        8,
        v == 228 && eq == 228 && back == sys,
        format!("{v} variables, {eq} equations, {ineq} inequalities against 304; text round trip {}", back == sys),
    )
}

fn analytic_sanity() -> Line {
    let (_, p) = setup();
    let mut worst_gap: f64 = 0.0;
    let mut all_within = true;
    let mut bit_equal = true;
    for bound in [10_000u64, 100_000, 1_000_000] {
        let z = laws::zeta_global(&p, 2.0, bound, bound).unwrap();
        let gap = (z.value - std::f64::consts::PI.powi(2) / 6.0).abs();
        worst_gap = worst_gap.max(gap / z.truncation_bound);
        all_within &= gap <= z.truncation_bound;
        bit_equal &= z.bit_identical && z.disjoint_cover;
    }
    let coarse = QuadratureSpec::new(1e-10, Singularity::AboveE);
    let fine = QuadratureSpec::new(1e-13, Singularity::AboveE);
    let mut disagreement: f64 = 0.0;
    for upper in [10.0f64, 1e3, 1e6, 1e9] {
        let f = |t: f64| 1.0 / t.ln();
        let (a, b) = (3f64.ln(), upper.ln());
        let x = integrate(f, a, b, &coarse).unwrap().value;
        let y = integrate(f, a, b, &fine).unwrap().value;
        disagreement = disagreement.max((x - y).abs());
    }
    line(
        9,
        all_within && bit_equal && disagreement <= QUADRATURE_AGREEMENT,
        format!(
            "zeta(2) within its truncation bound ({:.0}% of it at worst); partition product bit-equal {bit_equal}; quadrature disagreement {disagreement:.1e}",
            worst_gap * 100.0
        ),
    )
}

fn conjecture_scan() -> Line {
    let (e, p) = setup();
    let rays = appendix::table_rays(&p, DESK_LIMIT).unwrap();
    let scan = laws::conjecture3_scan(&e, &rays).unwrap();
    let identity = scan.points.iter().all(|x| x.counting_identity);
    line(
        10,
        identity && scan.max_ratio.is_finite(),
        format!("{} ratios, max {:.6} at {:?} (reported, no reference value)", scan.points.len(), scan.max_ratio, scan.argmax),
    )
}

#[test]
fn acceptance() {
    let lines = [
        appendix_reproduction(),
        family_matrices(),
        ray_law(),
        triplets(),
        partitions_and_identities(),
        clusters_and_twins(),
        webs(),
        w3_system(),
        analytic_sanity(),
        conjecture_scan(),
    ];
    for l in &lines {
        println!("criterion {:>2}: {}  {}", l.criterion, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    let failing: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.criterion).collect();
    assert_eq!(failing, EXPECTED_FAILURES);
}
