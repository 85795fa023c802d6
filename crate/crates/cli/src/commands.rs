use std::path::Path;

use serde::Serialize;

use frame_extract::counterexamples::{self, BlockLayout, BracketDiagnostics, PartialSumCheck};
use frame_extract::extraction::{self, ExtractionParams, ExtractionReport, RefinementReport};
use frame_extract::frame::{self, FrameBounds};
use frame_extract::infinite::{self, FrameStream, GreedySelection, ProjectedBasis, StabilityReport};
use frame_extract::{io, linalg, random, Certificate64, Frame64, FrameError, SelectionConfig, SCHEMA};

use crate::{
    AnalyzeArgs, Cli, Command, CounterexampleArgs, CounterexampleKind, ExtractArgs, Failure,
    GeneratorKind, GreedyArgs, InputArgs,
};

#[derive(Serialize)]
struct Envelope<'a, R> {
    schema: &'static str,
    command: &'a str,
    input: String,
    result: R,
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Analyze(a) => analyze(cli, a),
        Command::Extract(a) => extract(cli, a),
        Command::Greedy(a) => greedy(cli, a),
        Command::Counterexample(a) => counterexample(cli, a),
        Command::Selftest(a) => crate::selftest::run(cli, a),
    }
}

pub fn emit<R: Serialize>(cli: &Cli, command: &str, input: String, result: R) -> Result<(), Failure> {
    let text = io::to_json_string(&Envelope {
        schema: SCHEMA,
        command,
        input,
        result,
    })?;
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(FrameError::from)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(input: &InputArgs) -> Result<(Frame64, String), FrameError> {
    match (&input.file, &input.random) {
        (Some(path), _) => Ok((io::read_frame(path)?, path.display().to_string())),
        (None, Some(nm)) => {
            let (n, m) = (nm[0], nm[1]);
            if n == 0 || m < n {
                return Err(FrameError::InvalidParameter(format!(
                    "--random needs 0 < N <= M, got {n} {m}"
                )));
            }
            Ok((
                random::random_tight_frame(input.seed, n, m),
                format!("random tight frame n={n} m={m} seed={}", input.seed),
            ))
        }
        (None, None) => Err(FrameError::InvalidParameter(
            "give a frame file or --random N M".into(),
        )),
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    dim: usize,
    len: usize,
    #[serde(rename = "A")]
    lower: f64,
    #[serde(rename = "B")]
    upper: f64,
    frame_constant: f64,
    tight: bool,
    parseval: bool,
    dimension_identity: Option<f64>,
    squared_norm_sum: f64,
}

fn recertify_bounds(f: &Frame64, b: &FrameBounds<f64>, tol: f64) -> Result<(), FrameError> {
    let values = linalg::sym_eigen(&f.frame_operator()).values;
    let (lo, hi) = (values[values.len() - 1].max(0.0), values[0]);
    let scale = b.upper.max(1.0);
    if (lo - b.lower).abs() > tol * scale || (hi - b.upper).abs() > tol * scale {
        return Err(FrameError::Internal(format!(
            "frame bounds ({}, {}) disagree with the frame operator ({lo}, {hi})",
            b.lower, b.upper
        )));
    }
    Ok(())
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<(), Failure> {
    let (f, input) = load(&a.input)?;
    let b = frame::frame_bounds(&f)?;
    if !b.is_valid() {
        return Err(FrameError::NotAFrame {
            lower: b.lower,
            upper: b.upper,
        }
        .into());
    }
    recertify_bounds(&f, &b, cli.tol.max(1e-10))?;
    let report = AnalyzeReport {
        dim: f.dim(),
        len: f.len(),
        lower: b.lower,
        upper: b.upper,
        frame_constant: b.frame_constant,
        tight: b.is_tight(cli.tol),
        parseval: b.is_parseval(cli.tol),
        dimension_identity: frame::dimension_identity(&f).ok(),
        squared_norm_sum: f.squared_norm_sum(),
    };
    emit(cli, "analyze", input, report)
}

#[derive(Serialize)]
struct ExtractResult {
    report: ExtractionReport<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement: Option<RefinementReport<f64>>,
}

fn extract(cli: &Cli, a: &ExtractArgs) -> Result<(), Failure> {
    let cfg = SelectionConfig {
        c1: a.c1,
        c2: a.c2,
        c5: a.c5,
        exhaustive_limit: a.exhaustive_limit,
        ..SelectionConfig::default()
    };
    let params = ExtractionParams::with_config(a.epsilon, a.nu, cfg.clone(), a.max_steps)?;
    if let Some(e) = a.refine {
        if !(e > 0.0 && e < 1.0) {
            return Err(FrameError::InvalidParameter(format!("--refine {e} outside (0, 1)")).into());
        }
    }
    let (f, input) = load(&a.input)?;
    let report = if cli.timing {
        extraction::extract_timed(&f, &params)?
    } else {
        extraction::extract_orthogonal_subset(&f, &params)?
    };
    extraction::verify_report(&f, &report)?;
    let refinement = match a.refine {
        Some(e) if !report.final_sigma.is_empty() => {
            Some(extraction::refine_from_report(&f, &report, e, &cfg)?)
        }
        _ => None,
    };
    let reached = report.target_reached();
    emit(cli, "extract", input, ExtractResult { report, refinement })?;
    if reached {
        Ok(())
    } else {
        Err(Failure::BudgetExhausted)
    }
}

#[derive(Serialize)]
struct GreedyResult {
    selection: GreedySelection<f64>,
    thresholds_met: bool,
    stability: StabilityReport<f64>,
    stability_from_third: StabilityReport<f64>,
    tail_from_fifth: Option<Certificate64>,
    tail_epsilon: f64,
    tail_index: Option<usize>,
    known_bound: Option<f64>,
}

fn greedy(cli: &Cli, a: &GreedyArgs) -> Result<(), Failure> {
    if a.terms == 0 {
        return Err(FrameError::InvalidParameter("--terms must be at least 1".into()).into());
    }
    let (selection, known_bound, input) = match a.generator {
        GeneratorKind::File => {
            let path = a.file.as_ref().ok_or_else(|| {
                FrameError::InvalidParameter("--generator file needs --file".into())
            })?;
            let f: Frame64 = io::read_frame(path)?;
            let stream = if a.cyclic {
                FrameStream::cyclic(f)
            } else {
                FrameStream::once(f)
            };
            let bound = infinite::FrameSequence::known_bound(&stream);
            let sel = infinite::greedy_subsequence(stream, a.terms, a.scan_limit)?;
            let mode = if a.cyclic { "cyclic" } else { "once" };
            (sel, bound, format!("{} ({mode})", path.display()))
        }
        GeneratorKind::ProjectedBasis => {
            let g = ProjectedBasis::<f64>::new(a.seed, a.ambient, a.rank)?;
            let sel = infinite::greedy_subsequence(g, a.terms, a.scan_limit)?;
            (
                sel,
                Some(1.0),
                format!(
                    "projected basis ambient={} rank={} seed={}",
                    a.ambient, a.rank, a.seed
                ),
            )
        }
    };
    if selection.is_empty() {
        return Err(FrameError::Empty("stream has no nonzero vectors").into());
    }
    let stability = infinite::stability_check(&selection)?;
    // re-certify from a serialized copy
    let copy: GreedySelection<f64> = serde_json::from_str(&io::to_json_string(&selection)?)
        .map_err(|e| FrameError::Internal(e.to_string()))?;
    let again = infinite::stability_check(&copy)?;
    let (c0, c1) = (stability.certificate.constant, again.certificate.constant);
    if !((c0.is_infinite() && c1.is_infinite()) || (c0 - c1).abs() <= 1e-12 * c0.max(1.0)) {
        return Err(FrameError::Internal("certificate changed after reload".into()).into());
    }
    let tail_from_fifth = if selection.len() >= 5 {
        Some(frame::equivalence_certificate(&selection.tail(5))?)
    } else {
        None
    };
    let result = GreedyResult {
        thresholds_met: selection.thresholds_met(),
        stability_from_third: infinite::stability_check_from(&selection, 3)?,
        stability,
        tail_from_fifth,
        tail_epsilon: a.tail_epsilon,
        tail_index: infinite::tail_index(&selection, a.tail_epsilon)?,
        known_bound,
        selection,
    };
    emit(cli, "greedy", input, result)
}

#[derive(Serialize)]
struct BracketlessResult {
    layout: BlockLayout,
    bounds: FrameBounds<f64>,
    frame: Frame64,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<Vec<BracketDiagnostics<f64>>>,
}

#[derive(Serialize)]
struct CcResult {
    n: usize,
    bounds: FrameBounds<f64>,
    frame: Frame64,
    partial_sums: Vec<PartialSumCheck>,
    head_certificate: Certificate64,
}

fn write_frame(path: &Path, f: &Frame64) -> Result<(), FrameError> {
    let csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let text = if csv { io::frame_to_csv(f) } else { io::frame_to_json(f)? };
    std::fs::write(path, text)?;
    Ok(())
}

fn diagnostics_csv(d: &[BracketDiagnostics<f64>]) -> String {
    let mut out = String::from(
        "n,j0,witness,dist_head,dist_tail,min_principal_angle,projection_norm_lb,witness_bound\n",
    );
    for x in d {
        let row = [
            x.block.to_string(),
            x.bracket_point.to_string(),
            x.witness.to_string(),
            io::format_g17(x.dist_head),
            io::format_g17(x.dist_tail),
            io::format_g17(x.min_principal_angle),
            io::format_g17(x.projection_norm_lb),
            io::format_g17(x.witness_bound),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn counterexample(cli: &Cli, a: &CounterexampleArgs) -> Result<(), Failure> {
    match a.kind {
        CounterexampleKind::Bracketless => {
            let (f, layout) = counterexamples::bracketless_frame::<f64>(a.blocks)?;
            let s = f.frame_operator();
            for i in 0..s.rows() {
                for j in 0..s.cols() {
                    let v = s[(i, j)];
                    let ok = if i == j {
                        (v - 1.0).abs() <= 1e-10 || (v - 2.0).abs() <= 1e-10
                    } else {
                        v.abs() <= 1e-12
                    };
                    if !ok {
                        return Err(FrameError::Internal(format!(
                            "frame operator entry ({i}, {j}) = {v}"
                        ))
                        .into());
                    }
                }
            }
            let bounds = frame::frame_bounds(&f)?;
            let diagnostics = if a.diagnose {
                Some(counterexamples::midpoint_diagnostics::<f64>(a.blocks)?)
            } else {
                None
            };
            if let Some(path) = &a.frame_out {
                write_frame(path, &f)?;
            }
            if let (Some(path), Some(d)) = (&a.csv, &diagnostics) {
                std::fs::write(path, diagnostics_csv(d)).map_err(FrameError::from)?;
            }
            emit(
                cli,
                "counterexample",
                format!("bracketless blocks={}", a.blocks),
                BracketlessResult {
                    layout,
                    bounds,
                    frame: f,
                    diagnostics,
                },
            )
        }
        CounterexampleKind::Cc => {
            let f = counterexamples::casazza_christensen_frame::<f64>(a.n)?;
            let bounds = frame::frame_bounds(&f)?;
            if !bounds.is_parseval(1e-10) {
                return Err(FrameError::Internal("frame is not tight".into()).into());
            }
            let partial_sums = a
                .epsilon
                .iter()
                .map(|&e| counterexamples::cc_partial_sum_check(a.n, e, 1e-9))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(path) = &a.frame_out {
                write_frame(path, &f)?;
            }
            emit(
                cli,
                "counterexample",
                format!("cc n={}", a.n),
                CcResult {
                    n: a.n,
                    bounds,
                    head_certificate: counterexamples::cc_head_certificate(a.n)?,
                    frame: f,
                    partial_sums,
                },
            )
        }
    }
}
