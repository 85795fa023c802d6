//! Extraction of a large subsystem of a frame that is equivalent to an
//! orthonormal basis.
//!
//! The pipeline tightens the frame, splits it into a long tight frame with
//! nearly equal norms, then repeatedly
//!
//! 1. keeps the vectors far from the span `P_k` of everything chosen so far
//!    (the set `τ_k`),
//! 2. picks a subset of `τ_k` with small largest singular value,
//! 3. picks, among those, vectors whose normalized residuals against `P_k`
//!    have smallest singular value bounded below,
//!
//! until more than `(1 - ε) n` vectors are chosen. The result is certified by
//! the singular values of the chosen, rescaled vectors.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{self, EquivalenceCertificate, Frame};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::selection::{self, KtSelection, SelectionConfig, SelectionMethod};

/// Tightness required of the input to [`split_equalize`].
pub const SPLIT_TIGHTNESS_TOL: f64 = 1e-6;
/// Relative rank tolerance of the selected span.
pub const SPAN_RANK_TOL: f64 = 1e-10;
/// Agreement required between a report and its recomputed certificate.
pub const RECERTIFY_TOL: f64 = 1e-10;
/// Largest multiplicity tried per vector when `nu = 0`.
const EXACT_SPLIT_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionParams {
    pub epsilon: f64,
    /// Splitting slack: split norms lie in `[λ, (1 + ν) λ]`.
    pub nu: f64,
    /// `√(ε/2)`.
    pub delta: f64,
    pub max_steps: usize,
    pub selection: SelectionConfig,
}

impl ExtractionParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_config(epsilon, 0.05, SelectionConfig::default(), None)
    }

    /// Parameters with explicit slack, constants and step budget; `None`
    /// gives the default budget `floor(4 c1² / (c2 ε²)) + 2`.
    pub fn with_config(
        epsilon: f64,
        nu: f64,
        selection: SelectionConfig,
        max_steps: Option<usize>,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(FrameError::InvalidParameter(format!(
                "epsilon = {epsilon} outside (0, 1)"
            )));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(FrameError::InvalidParameter(format!("nu = {nu} must be >= 0")));
        }
        selection.validate()?;
        let max_steps = match max_steps {
            Some(0) => {
                return Err(FrameError::InvalidParameter("max_steps must be >= 1".into()))
            }
            Some(k) => k,
            None => default_max_steps(epsilon, &selection),
        };
        Ok(Self {
            epsilon,
            nu,
            delta: (epsilon / 2.0).sqrt(),
            max_steps,
            selection,
        })
    }
}

pub fn default_max_steps(epsilon: f64, cfg: &SelectionConfig) -> usize {
    (4.0 * cfg.c1 * cfg.c1 / cfg.c2 / (epsilon * epsilon)).floor() as usize + 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFrame<T> {
    pub dim: usize,
    pub vectors: Vec<Vec<T>>,
    /// Source index in the input frame of each split vector.
    pub origin: Vec<usize>,
    /// Number of copies of each input vector (zero for zero vectors).
    pub multiplicities: Vec<usize>,
    pub lambda: T,
    /// `max ‖y_j‖ / min ‖y_j‖ - 1`.
    pub nu_achieved: T,
}

impl<T: Scalar> SplitFrame<T> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn to_frame(&self) -> Result<Frame<T>> {
        Frame::new(self.dim, self.vectors.clone())
    }
}

/// Splits each vector `x_j` of a tight frame into `k_j` copies of
/// `x_j / √k_j` so that all norms lie in `[λ, (1 + ν) λ]`.
///
/// `λ` is the largest admissible value not above `min ‖x_j‖ / (1 + ν)`, and
/// `k_j` the smallest admissible integer. If the result has fewer than
/// `ceil(2n/ε)` vectors, every multiplicity is multiplied by a common factor.
/// Zero vectors are dropped. The split frame has the same frame operator.
pub fn split_equalize<T: Scalar>(frame: &Frame<T>, params: &ExtractionParams) -> Result<SplitFrame<T>> {
    let bounds = frame::frame_bounds(frame)?;
    if !bounds.is_tight(T::tol(SPLIT_TIGHTNESS_TOL)) {
        let ratio = if bounds.lower > T::zero() {
            (bounds.upper / bounds.lower).to_f64_lossy()
        } else {
            f64::INFINITY
        };
        return Err(FrameError::NotTight { ratio });
    }
    let norms = frame.norms();
    let live: Vec<usize> = frame.nonzero_indices();
    if live.is_empty() {
        return Err(FrameError::Empty("frame has only zero vectors"));
    }
    let nu = T::lit(params.nu);
    let one_nu = T::one() + nu;
    let slack = T::tol(1e-12);
    let min_norm = live
        .iter()
        .map(|&j| norms[j])
        .fold(T::infinity(), |a, b| a.min(b));
    let cap = min_norm / one_nu;

    // k_j admissible for λ iff r²/((1+ν)λ)² <= k_j <= r²/λ²
    let admissible = |r: T, lambda: T| -> Option<usize> {
        let hi = (r / lambda).powi(2) * (T::one() + slack);
        let lo = (r / (one_nu * lambda)).powi(2) * (T::one() - slack);
        let k = lo.ceil().max(T::one());
        if k <= hi {
            k.to_usize()
        } else {
            None
        }
    };
    let feasible = |lambda: T| -> Option<Vec<usize>> {
        live.iter().map(|&j| admissible(norms[j], lambda)).collect()
    };

    // the supremum of the feasible set is `cap` or some ‖x_j‖/√k
    let floor = if params.nu > 0.0 {
        min_norm * (T::one() - one_nu.powi(-2)).sqrt()
    } else {
        T::zero()
    };
    let mut candidates: Vec<T> = vec![cap];
    for &j in &live {
        let r = norms[j];
        let first = ((r / cap).powi(2) * (T::one() - slack)).ceil().max(T::one());
        let mut k = first.to_usize().unwrap_or(usize::MAX);
        let mut tried = 0;
        loop {
            let lambda = r / T::from_usize_lossy(k).sqrt();
            if lambda < floor || tried >= EXACT_SPLIT_LIMIT {
                break;
            }
            if lambda <= cap {
                candidates.push(lambda);
            }
            k += 1;
            tried += 1;
        }
    }
    if params.nu > 0.0 {
        candidates.push(floor);
    }
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    candidates.dedup();

    let mut chosen: Option<(T, Vec<usize>)> = None;
    for &lambda in &candidates {
        if lambda <= T::zero() {
            continue;
        }
        if let Some(ks) = feasible(lambda) {
            chosen = Some((lambda, ks));
            break;
        }
    }
    let (mut lambda, mut ks) = chosen.ok_or_else(|| {
        FrameError::InvalidParameter(
            "no common norm scale splits these norms exactly; use nu > 0".into(),
        )
    })?;

    let n = frame.dim();
    let target = (2.0 * n as f64 / params.epsilon - 1e-9).ceil() as usize;
    let total: usize = ks.iter().sum();
    if total < target {
        let factor = target.div_ceil(total);
        ks.iter_mut().for_each(|k| *k *= factor);
        lambda = lambda / T::from_usize_lossy(factor).sqrt();
    }

    let mut multiplicities = vec![0usize; frame.len()];
    let mut vectors = Vec::new();
    let mut origin = Vec::new();
    for (&j, &k) in live.iter().zip(&ks) {
        multiplicities[j] = k;
        let y = linalg::scaled(frame.vector(j), T::one() / T::from_usize_lossy(k).sqrt());
        for _ in 0..k {
            vectors.push(y.clone());
            origin.push(j);
        }
    }
    let split_norms: Vec<T> = vectors.iter().map(|v| linalg::norm(v)).collect();
    let max = split_norms.iter().copied().fold(T::zero(), T::max);
    let min = split_norms.iter().copied().fold(T::infinity(), T::min);
    Ok(SplitFrame {
        dim: n,
        vectors,
        origin,
        multiplicities,
        lambda,
        nu_achieved: max / min - T::one(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    StepBudgetExhausted,
    /// No vector is left far from the chosen span, or none survived the
    /// invertibility selection.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    /// 1-based step number.
    pub k: usize,
    pub tau_size: usize,
    /// `(1 - δ² - Σ|σ_i|/n) m' - 1` at the start of the step.
    pub tau_lower_bound: f64,
    pub tau_bound_holds: bool,
    pub lunin_size: usize,
    pub lunin_value: T,
    pub lunin_method: SelectionMethod,
    /// Fewer than `n` vectors were available to the restriction-norm step.
    pub degraded: bool,
    /// Split indices chosen at this step.
    pub sigma_k: Vec<usize>,
    pub bt_value: T,
    pub bt_method: SelectionMethod,
    /// `1/δ`.
    pub besselian_scale: T,
    /// Rank of `P_k` before the step.
    pub projection_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport<T> {
    pub params: ExtractionParams,
    pub dim: usize,
    pub frame_len: usize,
    pub split_len: usize,
    pub lambda: T,
    pub nu_achieved: T,
    pub multiplicities: Vec<usize>,
    pub steps: Vec<StepRecord<T>>,
    /// Distinct indices into the input frame, ascending.
    pub final_sigma: Vec<usize>,
    /// Certificate of `(√(m'/n) y_j)` over the chosen split vectors.
    pub certificate: EquivalenceCertificate<T>,
    pub stopped_reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_seconds: Option<f64>,
}

impl<T: Scalar> ExtractionReport<T> {
    pub fn selected_count(&self) -> usize {
        self.final_sigma.len()
    }

    pub fn target_reached(&self) -> bool {
        self.stopped_reason == StopReason::TargetReached
    }
}

fn certified_system<T: Scalar>(
    tight: &Frame<T>,
    multiplicities: &[usize],
    split_len: usize,
    sigma: &[usize],
) -> Vec<Vec<T>> {
    let n = T::from_usize_lossy(tight.dim());
    let scale = (T::from_usize_lossy(split_len) / n).sqrt();
    sigma
        .iter()
        .map(|&j| {
            let k = T::from_usize_lossy(multiplicities[j]);
            linalg::scaled(tight.vector(j), scale / k.sqrt())
        })
        .collect()
}

/// Runs the extraction pipeline.
///
/// Running out of steps is not an error; check
/// [`ExtractionReport::stopped_reason`].
pub fn extract_orthogonal_subset<T: Scalar>(
    frame: &Frame<T>,
    params: &ExtractionParams,
) -> Result<ExtractionReport<T>> {
    let tight = frame::tighten(frame)?;
    let split = split_equalize(&tight, params)?;
    let n = tight.dim();
    let m_split = split.len();
    let nf = T::from_usize_lossy(n);
    let delta = T::lit(params.delta);
    let threshold = delta * (nf / T::from_usize_lossy(m_split)).sqrt();
    let bt_target = T::lit(params.selection.c2) * delta;
    let goal = (1.0 - params.epsilon) * n as f64;

    let mut chosen = vec![false; m_split];
    let mut selected: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut steps: Vec<StepRecord<T>> = Vec::new();
    let mut stalled = false;

    while (selected.len() as f64) <= goal && steps.len() < params.max_steps {
        let residuals: Vec<Option<Vec<T>>> = (0..m_split)
            .map(|j| {
                if chosen[j] {
                    None
                } else {
                    Some(linalg::residual(&split.vectors[j], &basis))
                }
            })
            .collect();
        let tau: Vec<usize> = (0..m_split)
            .filter(|&j| {
                residuals[j]
                    .as_ref()
                    .is_some_and(|r| linalg::norm(r) >= threshold)
            })
            .collect();
        let tau_lower_bound = (1.0 - params.delta * params.delta - selected.len() as f64 / n as f64)
            * m_split as f64
            - 1.0;
        let tau_bound_holds = tau.len() as f64 >= tau_lower_bound;
        if tau.is_empty() {
            log::debug!("no vector left outside the selected span");
            stalled = true;
            break;
        }
        let tau_vectors: Vec<Vec<T>> = tau.iter().map(|&j| split.vectors[j].clone()).collect();
        let lunin_target = n.min(tau.len());
        let lunin = selection::lunin_select(&tau_vectors, lunin_target, &params.selection)?;
        let lunin_set: Vec<usize> = lunin.indices.iter().map(|&i| tau[i]).collect();
        let unit_residuals: Vec<Vec<T>> = lunin_set
            .iter()
            .map(|&j| {
                let r = residuals[j].as_ref().expect("not chosen");
                linalg::scaled(r, T::one() / linalg::norm(r))
            })
            .collect();
        let bt = selection::bt_select(&unit_residuals, bt_target, &params.selection)?;
        let sigma_k: Vec<usize> = bt.indices.iter().map(|&i| lunin_set[i]).collect();
        let projection_rank = basis.len();
        steps.push(StepRecord {
            k: steps.len() + 1,
            tau_size: tau.len(),
            tau_lower_bound,
            tau_bound_holds,
            lunin_size: lunin_set.len(),
            lunin_value: lunin.achieved_value,
            lunin_method: lunin.method,
            degraded: tau.len() < n,
            sigma_k: sigma_k.clone(),
            bt_value: bt.achieved_value,
            bt_method: bt.method,
            besselian_scale: T::one() / delta,
            projection_rank,
        });
        if sigma_k.is_empty() {
            stalled = true;
            break;
        }
        for &j in &sigma_k {
            chosen[j] = true;
            selected.push(j);
            let r = linalg::residual(&split.vectors[j], &basis);
            let nr = linalg::norm(&r);
            if nr > T::tol(SPAN_RANK_TOL) * linalg::norm(&split.vectors[j]) {
                basis.push(linalg::scaled(&r, T::one() / nr));
            }
        }
        log::debug!(
            "step {}: |tau| = {}, |sigma| = {}, total = {}",
            steps.len(),
            tau.len(),
            sigma_k.len(),
            selected.len()
        );
    }

    let stopped_reason = if (selected.len() as f64) > goal {
        StopReason::TargetReached
    } else if stalled {
        StopReason::Stalled
    } else {
        StopReason::StepBudgetExhausted
    };

    let mut final_sigma: Vec<usize> = selected.iter().map(|&j| split.origin[j]).collect();
    final_sigma.sort_unstable();
    if final_sigma.windows(2).any(|w| w[0] == w[1]) {
        return Err(FrameError::Internal(
            "two split copies of one vector were selected".into(),
        ));
    }
    let certificate = if final_sigma.is_empty() {
        EquivalenceCertificate {
            hilbertian: T::zero(),
            besselian: T::infinity(),
            constant: T::infinity(),
        }
    } else {
        frame::equivalence_certificate(&certified_system(
            &tight,
            &split.multiplicities,
            m_split,
            &final_sigma,
        ))?
    };
    Ok(ExtractionReport {
        params: params.clone(),
        dim: n,
        frame_len: frame.len(),
        split_len: m_split,
        lambda: split.lambda,
        nu_achieved: split.nu_achieved,
        multiplicities: split.multiplicities,
        steps,
        final_sigma,
        certificate,
        stopped_reason,
        wall_time_seconds: None,
    })
}

/// Same as [`extract_orthogonal_subset`] with the elapsed time recorded.
pub fn extract_timed<T: Scalar>(frame: &Frame<T>, params: &ExtractionParams) -> Result<ExtractionReport<T>> {
    let started = Instant::now();
    let mut report = extract_orthogonal_subset(frame, params)?;
    report.wall_time_seconds = Some(started.elapsed().as_secs_f64());
    Ok(report)
}

/// Recomputes the certificate of a report from the input frame.
pub fn recertify<T: Scalar>(
    frame: &Frame<T>,
    report: &ExtractionReport<T>,
) -> Result<EquivalenceCertificate<T>> {
    if report.final_sigma.is_empty() {
        return Err(FrameError::Empty("report selects no vectors"));
    }
    if report.multiplicities.len() != frame.len() {
        return Err(FrameError::InvalidParameter(
            "report does not belong to this frame".into(),
        ));
    }
    let tight = frame::tighten(frame)?;
    frame::equivalence_certificate(&certified_system(
        &tight,
        &report.multiplicities,
        report.split_len,
        &report.final_sigma,
    ))
}

/// Checks the structural invariants of a report and that its certificate
/// matches a recomputation within [`RECERTIFY_TOL`].
pub fn verify_report<T: Scalar>(frame: &Frame<T>, report: &ExtractionReport<T>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for s in &report.steps {
        for &j in &s.sigma_k {
            if !seen.insert(j) {
                return Err(FrameError::Internal(format!(
                    "split index {j} chosen in two steps"
                )));
            }
        }
    }
    if report.steps.len() > report.params.max_steps {
        return Err(FrameError::Internal("step budget exceeded".into()));
    }
    if report.final_sigma.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FrameError::Internal(
            "final indices are not distinct and ascending".into(),
        ));
    }
    if report.target_reached()
        && (report.final_sigma.len() as f64) <= (1.0 - report.params.epsilon) * report.dim as f64
    {
        return Err(FrameError::Internal("target reached with too few vectors".into()));
    }
    if report.final_sigma.is_empty() {
        return Ok(());
    }
    let again = recertify(frame, report)?;
    let a = report.certificate.constant;
    let b = again.constant;
    let agree = (a.is_infinite() && b.is_infinite())
        || (a - b).abs() <= T::tol(RECERTIFY_TOL) * a.abs().max(T::one());
    if agree {
        Ok(())
    } else {
        Err(FrameError::Internal(format!(
            "certificate {a} does not match recomputed {b}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport<T> {
    pub epsilon: f64,
    /// Indices of the first extraction, run at `ε = 1/2`.
    pub sigma1: Vec<usize>,
    pub sigma1_certificate: EquivalenceCertificate<T>,
    /// Refined indices into the input frame, a subset of `sigma1`.
    pub sigma: Vec<usize>,
    /// Certificate of the normalized vectors over `sigma`.
    pub certificate: EquivalenceCertificate<T>,
    /// `‖G - I‖` of the normalized vectors over `sigma1`.
    pub gram_deviation: T,
    /// `max |⟨z_i, z_j⟩|`, `i ≠ j`, over `sigma`.
    pub max_off_diagonal: T,
    /// `‖G - I‖ · c5 · δ^(1/2)`.
    pub off_diagonal_bound: T,
    pub within_bound: bool,
    /// `max(1 - ε, 1/|σ₁|)`.
    pub kt_delta: f64,
    pub kt: Option<KtSelection<T>>,
}

/// Shrinks the output of an `ε = 1/2` extraction to a subset that is closer
/// to orthonormal, by restricting the off-diagonal part of its Gram matrix.
pub fn refine_near_isometric<T: Scalar>(
    frame: &Frame<T>,
    epsilon: f64,
    cfg: &SelectionConfig,
) -> Result<RefinementReport<T>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(FrameError::InvalidParameter(format!(
            "epsilon = {epsilon} outside (0, 1)"
        )));
    }
    let params = ExtractionParams::with_config(0.5, 0.05, cfg.clone(), None)?;
    let first = extract_orthogonal_subset(frame, &params)?;
    refine_from_report(frame, &first, epsilon, cfg)
}

/// The refinement step on an existing extraction report.
pub fn refine_from_report<T: Scalar>(
    frame: &Frame<T>,
    first: &ExtractionReport<T>,
    epsilon: f64,
    cfg: &SelectionConfig,
) -> Result<RefinementReport<T>> {
    let tight = frame::tighten(frame)?;
    let sigma1 = first.final_sigma.clone();
    if sigma1.is_empty() {
        return Err(FrameError::Empty("first extraction selected nothing"));
    }
    let z: Vec<Vec<T>> = sigma1
        .iter()
        .map(|&j| {
            let x = tight.vector(j);
            linalg::scaled(x, T::one() / linalg::norm(x))
        })
        .collect();
    let g = frame::gram_matrix(&z);
    let dev = g.sub(&Matrix::identity(z.len()));
    let gram_deviation = dev.spectral_norm();
    let kt_delta = (1.0 - epsilon).max(1.0 / sigma1.len() as f64);
    let (local, kt) = if sigma1.len() < 2 || gram_deviation == T::zero() {
        ((0..sigma1.len()).collect::<Vec<_>>(), None)
    } else {
        let t = dev.scale(T::one() / gram_deviation);
        let kt = selection::kt_select(&t, kt_delta, cfg)?;
        (kt.selection.indices.clone(), Some(kt))
    };
    let sigma: Vec<usize> = local.iter().map(|&i| sigma1[i]).collect();
    let zs: Vec<Vec<T>> = local.iter().map(|&i| z[i].clone()).collect();
    let certificate = frame::equivalence_certificate(&zs)?;
    let mut max_off_diagonal = T::zero();
    for (a, &i) in local.iter().enumerate() {
        for &j in &local[a + 1..] {
            max_off_diagonal = max_off_diagonal.max(g[(i, j)].abs());
        }
    }
    let off_diagonal_bound = gram_deviation * T::lit(cfg.c5 * kt_delta.sqrt());
    Ok(RefinementReport {
        epsilon,
        sigma1,
        sigma1_certificate: first.certificate,
        sigma,
        certificate,
        gram_deviation,
        max_off_diagonal,
        within_bound: max_off_diagonal <= off_diagonal_bound,
        off_diagonal_bound,
        kt_delta,
        kt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    fn params(eps: f64) -> ExtractionParams {
        ExtractionParams::new(eps).unwrap()
    }

    #[test]
    fn params_derive_delta_and_budget() {
        let p = params(0.25);
        assert!((p.delta * p.delta - 0.125).abs() < 1e-12);
        assert_eq!(p.max_steps, 2562);
        assert!(ExtractionParams::new(0.0).is_err());
        assert!(ExtractionParams::new(1.0).is_err());
        assert!(ExtractionParams::with_config(0.5, -1.0, SelectionConfig::default(), None).is_err());
        assert!(ExtractionParams::with_config(0.5, 0.0, SelectionConfig::default(), Some(0)).is_err());
    }

    #[test]
    fn equal_norms_split_trivially() {
        let f = Frame::<f64>::standard_basis(3);
        let s = split_equalize(&f, &params(0.9)).unwrap();
        // m = 3 >= ceil(2*3/0.9) = 7 fails, so the uniform factor applies
        assert_eq!(s.multiplicities, vec![3, 3, 3]);
        let wide = params(0.99);
        let f6 = Frame::new(
            2,
            vec![
                vec![1.0f64, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        let s = split_equalize(&f6, &wide).unwrap();
        assert_eq!(s.multiplicities, vec![1; 6]);
        assert_eq!(s.origin, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn exact_split_of_commensurable_norms() {
        let f = Frame::new(1, vec![vec![1.0f64], vec![2.0]]).unwrap();
        let p = ExtractionParams::with_config(0.5, 0.0, SelectionConfig::default(), None).unwrap();
        let s = split_equalize(&f, &p).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.multiplicities, vec![1, 4]);
        assert!((s.lambda - 1.0).abs() < 1e-14);
        assert!(s.nu_achieved.abs() < 1e-14);
    }

    #[test]
    fn incommensurable_norms_need_slack() {
        let f = Frame::new(1, vec![vec![1.0f64], vec![2f64.sqrt().sqrt()]]).unwrap();
        let p = ExtractionParams::with_config(0.5, 0.0, SelectionConfig::default(), None).unwrap();
        assert!(matches!(
            split_equalize(&f, &p),
            Err(FrameError::InvalidParameter(_))
        ));
    }

    #[test]
    fn split_of_a_random_tight_frame() {
        let f = random::random_tight_frame::<f64>(5, 4, 12);
        let p = params(0.25);
        let s = split_equalize(&f, &p).unwrap();
        assert!(s.len() >= 32);
        assert!(s.nu_achieved <= 0.05 + 1e-12);
        for v in &s.vectors {
            let nv = linalg::norm(v);
            assert!(nv >= s.lambda * (1.0 - 1e-12) && nv <= 1.05 * s.lambda * (1.0 + 1e-12));
            let bracket = (4.0 / s.len() as f64).sqrt();
            assert!(nv >= bracket / 1.05 - 1e-8 && nv <= 1.05 * bracket + 1e-8);
        }
        let b0 = frame::frame_bounds(&f).unwrap();
        let b1 = frame::frame_bounds(&s.to_frame().unwrap()).unwrap();
        assert!((b0.lower - b1.lower).abs() < 1e-8 && (b0.upper - b1.upper).abs() < 1e-8);
    }

    #[test]
    fn split_rejects_non_tight_input() {
        let f = Frame::new(2, vec![vec![1.0f64, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(
            split_equalize(&f, &params(0.5)),
            Err(FrameError::NotTight { .. })
        ));
    }

    #[test]
    fn orthonormal_basis_in_one_step() {
        let f = Frame::<f64>::standard_basis(5);
        let r = extract_orthogonal_subset(&f, &params(0.1)).unwrap();
        assert_eq!(r.stopped_reason, StopReason::TargetReached);
        assert_eq!(r.steps.len(), 1);
        assert_eq!(r.final_sigma, vec![0, 1, 2, 3, 4]);
        assert!((r.certificate.constant - 1.0).abs() < 1e-8);
        verify_report(&f, &r).unwrap();
    }

    #[test]
    fn doubled_basis_in_the_plane() {
        let f = Frame::new(
            2,
            vec![
                vec![1.0f64, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        let r = extract_orthogonal_subset(&f, &params(0.4)).unwrap();
        assert!(r.target_reached());
        assert_eq!(r.final_sigma.len(), 2);
        assert!(r.final_sigma.iter().any(|&j| j < 2) && r.final_sigma.iter().any(|&j| j >= 2));
        assert!(r.certificate.constant <= 1.0 + 1e-6);
        verify_report(&f, &r).unwrap();
    }

    #[test]
    fn random_frame_reaches_target() {
        let f = random::random_frame::<f64>(3, 6, 18);
        let r = extract_orthogonal_subset(&f, &params(0.3)).unwrap();
        assert!(r.target_reached());
        assert!(r.final_sigma.len() as f64 > 0.7 * 6.0);
        assert!(r.certificate.is_finite());
        for s in &r.steps {
            assert!(s.tau_bound_holds);
        }
        verify_report(&f, &r).unwrap();
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = random::random_frame::<f64>(3, 12, 36);
        let p = ExtractionParams::with_config(
            0.05,
            0.05,
            SelectionConfig {
                c2: 0.99,
                ..SelectionConfig::default()
            },
            Some(1),
        )
        .unwrap();
        let r = extract_orthogonal_subset(&f, &p).unwrap();
        assert_eq!(r.stopped_reason, StopReason::StepBudgetExhausted);
        assert_eq!(r.steps.len(), 1);
        verify_report(&f, &r).unwrap();
    }

    #[test]
    fn refinement_of_an_orthonormal_basis() {
        let f = Frame::<f64>::standard_basis(6);
        let r = refine_near_isometric(&f, 0.9, &SelectionConfig::default()).unwrap();
        assert!((r.certificate.constant - 1.0).abs() < 1e-12);
        assert_eq!(r.sigma, r.sigma1);
        assert_eq!(r.max_off_diagonal, 0.0);
    }

    #[test]
    fn refinement_improves_the_certificate() {
        let f = random::random_frame::<f64>(9, 12, 36);
        let r = refine_near_isometric(&f, 0.9, &SelectionConfig::default()).unwrap();
        assert!(r.certificate.constant < r.sigma1_certificate.constant);
        assert!(r.sigma.iter().all(|j| r.sigma1.contains(j)));
        assert!(r.within_bound);
    }
}
