//! Acceptance criteria, one line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are run in full and reported as
//! FAIL; they do not fail the test binary. Any other failure does.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use frame_extract::counterexamples;
use frame_extract::extraction::{self, ExtractionParams, ExtractionReport, StopReason};
use frame_extract::frame;
use frame_extract::infinite::{self, ProjectedBasis};
use frame_extract::linalg;
use frame_extract::oracle::{self, GREEDY_SLACK};
use frame_extract::{io, random, SelectionConfig};

/// Criteria expected to fail; see the project notes for the analysis.
const KNOWN_FAILURES: &[usize] = &[4, 7];

const IDENTITY_TOL: f64 = 1e-8;
const TIGHT_TOL: f64 = 1e-8;
const RECERTIFY_TOL: f64 = 1e-10;
const PARTIAL_SUM_TOL: f64 = 1e-9;
const DIAGONAL_TOL: f64 = 1e-12;
const MEDIAN_CHANGE: f64 = 0.5;
const FULL_C_MAX: f64 = 4.0;
const TAIL_C_MAX: f64 = 1.1;
const OFF_DIAGONAL_MAX: f64 = 0.2;
const PIPELINE_SEEDS: u64 = 50;
const DOUBLED_SEEDS: u64 = 12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn dimension_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for i in 0..20u64 {
        let k = 1 + (7 * i as usize) % 16;
        let p = random::random_projection::<f64>(i, 16, k);
        let sum: f64 = (0..16).map(|j| linalg::norm(&p.column(j)).powi(2)).sum();
        let via_frame = frame::dimension_identity(&frame::frame_from_projection(&p).unwrap()).unwrap();
        let err = (sum - k as f64).abs().max((via_frame - k as f64).abs());
        worst = worst.max(err / k as f64);
        pass &= err <= IDENTITY_TOL * k as f64;
    }
    outcome(pass, format!("max relative error {worst:.2e}"))
}

fn tightening() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let f = random::random_frame::<f64>(seed, 8, 24);
        let t = frame::tighten(&f).unwrap();
        pass &= frame::is_tight(&t, TIGHT_TOL);
        let tt = frame::tighten(&t).unwrap();
        for (u, v) in t.vectors().iter().zip(tt.vectors()) {
            for (a, b) in u.iter().zip(v) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    pass &= worst <= TIGHT_TOL;
    outcome(pass, format!("idempotence error {worst:.2e}"))
}

fn selection_oracles() -> (Outcome, String) {
    let r = oracle::compare_with_oracles(0, 100).unwrap();
    let worst = r
        .instances
        .iter()
        .map(|x| x.lunin_greedy / x.lunin_exact)
        .fold(0.0, f64::max);
    let pass = r.lunin_within_slack == r.instances.len() && r.bt_within_one >= 90;
    let detail = format!(
        "lunin within {GREEDY_SLACK}x on {}/100 (worst ratio {worst:.3}), bt within one on {}/100",
        r.lunin_within_slack, r.bt_within_one
    );
    (outcome(pass, detail), io::to_json_string(&r).unwrap())
}

fn pipeline_run(seed: u64, n: usize, params: &ExtractionParams) -> (ExtractionReport<f64>, Vec<String>) {
    let f = random::random_tight_frame::<f64>(seed, n, 4 * n);
    let r = extraction::extract_orthogonal_subset(&f, params).unwrap();
    let mut problems = Vec::new();
    if r.stopped_reason != StopReason::TargetReached {
        problems.push(format!("seed {seed}: {:?}", r.stopped_reason));
    }
    if n == 16 && r.final_sigma.len() < 13 {
        problems.push(format!("seed {seed}: |sigma| = {}", r.final_sigma.len()));
    }
    if !r.certificate.is_finite() {
        problems.push(format!("seed {seed}: infinite certificate"));
    }
    if let Err(e) = extraction::verify_report(&f, &r) {
        problems.push(format!("seed {seed}: {e}"));
    }
    match extraction::recertify(&f, &r) {
        Ok(c) if (c.constant - r.certificate.constant).abs() <= RECERTIFY_TOL * c.constant.max(1.0) => {}
        other => problems.push(format!("seed {seed}: recertification {other:?}")),
    }
    if r.steps.iter().any(|s| !s.tau_bound_holds) {
        problems.push(format!("seed {seed}: tau lower bound violated"));
    }
    if r.steps.len() > params.max_steps {
        problems.push(format!("seed {seed}: {} steps", r.steps.len()));
    }
    (r, problems)
}

fn pipeline() -> (Outcome, String) {
    let params = ExtractionParams::new(0.25).unwrap();
    let mut problems = Vec::new();
    let mut c16 = Vec::new();
    let mut reports = Vec::new();
    for seed in 0..PIPELINE_SEEDS {
        let (r, p) = pipeline_run(seed, 16, &params);
        problems.extend(p);
        c16.push(r.certificate.constant);
        reports.push(r);
    }
    let mut c32 = Vec::new();
    for seed in 0..DOUBLED_SEEDS {
        let (r, p) = pipeline_run(seed, 32, &params);
        problems.extend(p);
        c32.push(r.certificate.constant);
        reports.push(r);
    }
    let (m16, m32) = (median(c16), median(c32));
    let change = (m32 - m16).abs() / m16;
    let pass = problems.is_empty() && change <= MEDIAN_CHANGE;
    let mut detail = format!(
        "median C {m16:.3} (n=16), {m32:.3} (n=32), change {:.0}% vs limit {:.0}%",
        100.0 * change,
        100.0 * MEDIAN_CHANGE
    );
    if !problems.is_empty() {
        detail.push_str(&format!("; {} run problems: {}", problems.len(), problems.join(", ")));
    }
    (outcome(pass, detail), io::to_json_string(&reports).unwrap())
}

fn refinement() -> Outcome {
    let cfg = SelectionConfig::default();
    let first_params = ExtractionParams::with_config(0.5, 0.05, cfg.clone(), None).unwrap();
    let mut improved = 0;
    let mut worst_off: f64 = 0.0;
    let (mut c50, mut c90, mut c95) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..PIPELINE_SEEDS {
        let f = random::random_tight_frame::<f64>(seed, 16, 64);
        let first = extraction::extract_orthogonal_subset(&f, &first_params).unwrap();
        let r90 = extraction::refine_from_report(&f, &first, 0.9, &cfg).unwrap();
        let r95 = extraction::refine_from_report(&f, &first, 0.95, &cfg).unwrap();
        if r90.certificate.constant < first.certificate.constant {
            improved += 1;
        }
        worst_off = worst_off.max(r95.max_off_diagonal);
        c50.push(first.certificate.constant);
        c90.push(r90.certificate.constant);
        c95.push(r95.certificate.constant);
    }
    let (m50, m90, m95) = (median(c50), median(c90), median(c95));
    let pass = improved * 10 >= 9 * PIPELINE_SEEDS as usize
        && worst_off <= OFF_DIAGONAL_MAX
        && m95 <= m90
        && m90 <= m50;
    outcome(
        pass,
        format!(
            "C improved on {improved}/{PIPELINE_SEEDS}; median C {m50:.3} -> {m90:.4} (0.9) -> {m95:.4} (0.95); max off-diagonal {worst_off:.4}"
        ),
    )
}

fn lower_bound_example() -> Outcome {
    let mut pass = true;
    let mut checks = 0;
    for n in [8, 16, 32] {
        for eps in [0.5, 0.25, 0.1] {
            let c = counterexamples::cc_partial_sum_check(n, eps, PARTIAL_SUM_TOL).unwrap();
            pass &= c.holds;
            checks += c.holds as usize;
        }
    }
    let constants: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| counterexamples::cc_head_certificate::<f64>(n).unwrap().constant)
        .collect();
    pass &= constants.windows(2).all(|w| w[1] > w[0]);
    outcome(
        pass,
        format!(
            "partial sums {checks}/9; head constants {:.3}, {:.3}, {:.3}",
            constants[0], constants[1], constants[2]
        ),
    )
}

fn combinations3(r: std::ops::Range<usize>) -> Vec<[usize; 3]> {
    let v: Vec<usize> = r.collect();
    let mut out = Vec::new();
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            for c in b + 1..v.len() {
                out.push([v[a], v[b], v[c]]);
            }
        }
    }
    out
}

fn bracketless() -> Outcome {
    const N: usize = 12;
    let (f, layout) = counterexamples::bracketless_frame::<f64>(N).unwrap();
    let s = f.frame_operator();
    let mut off: f64 = 0.0;
    let mut diag_ok = true;
    for i in 0..s.rows() {
        for j in 0..s.cols() {
            if i == j {
                let d = s[(i, i)];
                diag_ok &= (d - 1.0).abs() <= DIAGONAL_TOL || (d - 2.0).abs() <= DIAGONAL_TOL;
            } else {
                off = off.max(s[(i, j)].abs());
            }
        }
    }
    let diagonal = diag_ok && off <= DIAGONAL_TOL;

    let contract = (2..=16).all(|n| counterexamples::either_or_contract::<f64>(n).unwrap().holds());

    let mut removals = 0;
    let mut still_complete = 0;
    for n in 3..=N {
        for drop in combinations3(layout.indices(n)) {
            let kept: Vec<usize> = (0..f.len()).filter(|j| !drop.contains(j)).collect();
            removals += 1;
            if counterexamples::completeness_check(&f, &layout, &kept).unwrap().complete {
                still_complete += 1;
            }
        }
    }

    let diags = counterexamples::midpoint_diagnostics::<f64>(N).unwrap();
    let lbs: Vec<(usize, f64)> = diags
        .iter()
        .filter(|d| (6..=10).contains(&d.block))
        .map(|d| (d.block, d.projection_norm_lb))
        .collect();
    let above = lbs.iter().all(|&(n, lb)| lb >= (n as f64).sqrt() / 8.0);
    let increasing = lbs.windows(2).all(|w| w[1].1 > w[0].1);
    let pass = diagonal && contract && still_complete == 0 && above && increasing;
    let lb_text: Vec<String> = lbs.iter().map(|(n, lb)| format!("{n}:{lb:.3}")).collect();
    outcome(
        pass,
        format!(
            "diagonal {diagonal} (off {off:.1e}); contract n<=16 {contract}; {still_complete}/{removals} three-index removals stay complete; lb >= sqrt(n)/8 {above}; strictly increasing {increasing} [{}]",
            lb_text.join(" ")
        ),
    )
}

fn greedy_infinite() -> (Outcome, String) {
    let g = ProjectedBasis::<f64>::new(0, 200, 40).unwrap();
    let sel = infinite::greedy_subsequence(g, 12, 10_000).unwrap();
    let full = infinite::stability_check(&sel).unwrap();
    let from3 = infinite::stability_check_from(&sel, 3).unwrap();
    let tail = frame::equivalence_certificate(&sel.tail(5)).unwrap();
    let pass = sel.len() == 12
        && sel.thresholds_met()
        && full.certificate.constant <= FULL_C_MAX
        && tail.constant <= TAIL_C_MAX
        && from3.stable;
    let detail = format!(
        "{} terms, thresholds {}, C {:.4}, tail C {:.4}, stable from k=3 {}",
        sel.len(),
        sel.thresholds_met(),
        full.certificate.constant,
        tail.constant,
        from3.stable
    );
    (outcome(pass, detail), io::to_json_string(&(sel, full, from3)).unwrap())
}

fn determinism(first: &[String; 3]) -> Outcome {
    let again = [selection_oracles().1, pipeline().1, greedy_infinite().1];
    let same: Vec<bool> = first.iter().zip(&again).map(|(a, b)| a == b).collect();
    let bytes: usize = first.iter().map(String::len).sum();
    outcome(
        same.iter().all(|&s| s),
        format!("criteria 3, 4, 8 identical: {same:?} ({bytes} bytes)"),
    )
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    let mut report = |id: usize, o: Outcome, took: Duration, budget: Option<Duration>| {
        let in_time = budget.is_none_or(|b| took <= b);
        let pass = o.pass && in_time;
        let budget_text = budget.map_or(String::new(), |b| format!(" / {}s", b.as_secs()));
        let known = if !pass && KNOWN_FAILURES.contains(&id) { " (known)" } else { "" };
        println!(
            "criterion {id}: {}{known} [{:.2}s{budget_text}] {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
        if !pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    };
    let secs = |s| Some(Duration::from_secs(s));

    let (o, t) = timed(dimension_identity);
    report(1, o, t, secs(1));
    let (o, t) = timed(tightening);
    report(2, o, t, secs(1));
    let ((o, j3), t) = timed(selection_oracles);
    report(3, o, t, secs(30));
    let ((o, j4), t) = timed(pipeline);
    report(4, o, t, secs(120));
    let (o, t) = timed(refinement);
    report(5, o, t, None);
    let (o, t) = timed(lower_bound_example);
    report(6, o, t, secs(5));
    let (o, t) = timed(bracketless);
    report(7, o, t, secs(60));
    let ((o, j8), t) = timed(greedy_infinite);
    report(8, o, t, secs(5));
    let (o, t) = timed(|| determinism(&[j3, j4, j8]));
    report(9, o, t, None);

    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
