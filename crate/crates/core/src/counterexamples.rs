//! A frame whose complete subsequences have unbounded bracket projections,
//! and a tight frame whose large subsets have badly conditioned partial sums.
//!
//! Indices and coordinates are 0-based throughout. Block `n` (1-based block
//! number, `1 <= n <= N`) owns the vector indices `J(n)` and writes into the
//! coordinates `I(n)`; consecutive coordinate intervals share one coordinate.

use std::ops::Range;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{self, EquivalenceCertificate, Frame};
use crate::linalg;
use crate::scalar::Scalar;

/// Rank tolerance, relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-10;
/// Residual tolerance when completing the either-or basis.
const COMPLETION_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub blocks: usize,
    pub ambient_dim: usize,
}

impl BlockLayout {
    pub fn new(blocks: usize) -> Result<Self> {
        if blocks < 2 {
            return Err(FrameError::InvalidParameter(format!(
                "need at least 2 blocks, got {blocks}"
            )));
        }
        Ok(Self {
            blocks,
            ambient_dim: Self::first_coordinate(blocks) + blocks,
        })
    }

    /// First coordinate of block `n`: 0 for `n = 1`, `(n-2)(n-1)/2` after.
    pub fn first_coordinate(n: usize) -> usize {
        if n <= 1 {
            0
        } else {
            (n - 2) * (n - 1) / 2
        }
    }

    /// Coordinates `I(n)`.
    pub fn coordinates(&self, n: usize) -> Range<usize> {
        let s = Self::first_coordinate(n);
        s..s + n
    }

    /// Vector indices `J(n)`.
    pub fn indices(&self, n: usize) -> Range<usize> {
        n * (n - 1) / 2..n * (n + 1) / 2
    }

    pub fn vector_count(&self) -> usize {
        self.blocks * (self.blocks + 1) / 2
    }

    /// Block containing vector index `j`.
    pub fn block_of(&self, j: usize) -> usize {
        (1..=self.blocks)
            .find(|&n| self.indices(n).contains(&j))
            .unwrap_or(0)
    }

    /// Every index except the last one of each block `n >= 2`. These vectors
    /// form a basis of the ambient space.
    pub fn reduced_indices(&self) -> Vec<usize> {
        (1..=self.blocks)
            .flat_map(|n| {
                let r = self.indices(n);
                let end = if n >= 2 { r.end - 1 } else { r.end };
                r.start..end
            })
            .collect()
    }

    /// Bracket point at 1-based position `ceil(n/2)` inside `J(n)`.
    pub fn midpoint(&self, n: usize) -> usize {
        self.indices(n).start + n.div_ceil(2) - 1
    }
}

/// Orthonormal basis `z_1, …, z_n` of `R^n`, the columns of an orthogonal
/// `U` with `U v = e_1` and `U w = e_n`, where `v` is uniform on the last
/// `ceil(n/2)` coordinates and `w` uniform on the first `floor(n/2)`.
///
/// Tails `[z_j : j >= j0]` with `j0 < n/2` come close to `e_1`, heads
/// `[z_j : j < j0]` with `j0 >= n/2` come close to `e_n`.
pub fn either_or_basis<T: Scalar>(n: usize) -> Result<Vec<Vec<T>>> {
    if n < 2 {
        return Err(FrameError::InvalidParameter(format!(
            "either-or basis needs n >= 2, got {n}"
        )));
    }
    let hi = n.div_ceil(2);
    let lo = n / 2;
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let hv = T::one() / T::from_usize_lossy(hi).sqrt();
    let hw = T::one() / T::from_usize_lossy(lo).sqrt();
    for x in &mut v[n - hi..] {
        *x = hv;
    }
    for x in &mut w[..lo] {
        *x = hw;
    }
    let mut rows = vec![v.clone(), w.clone()];
    for i in 0..n {
        if rows.len() == n {
            break;
        }
        let mut e = vec![T::zero(); n];
        e[i] = T::one();
        let r = linalg::residual(&e, &rows);
        let nr = linalg::norm(&r);
        if nr > T::tol(COMPLETION_TOL) {
            rows.push(linalg::scaled(&r, T::one() / nr));
        }
    }
    if rows.len() != n {
        return Err(FrameError::Internal(format!(
            "completion produced {} rows for n = {n}",
            rows.len()
        )));
    }
    // rows of U: v, completion, w
    let w_row = rows.remove(1);
    rows.push(w_row);
    Ok((0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

fn distance_to_span<T: Scalar>(x: &[T], vectors: &[Vec<T>]) -> T {
    let q = linalg::orthonormal_basis(vectors, T::tol(RANK_TOL));
    linalg::norm(&linalg::residual(x, &q))
}

/// Worst distances in the either-or contract over all index sets missing at
/// most two indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EitherOrContract<T> {
    pub n: usize,
    /// Max of `dist(e_1, [z_j : j in J, j >= j0])` over `1 <= j0 < n/2`.
    pub worst_tail: T,
    /// Max of `dist(e_n, [z_j : j in J, j < j0])` over `n/2 <= j0 <= n`.
    pub worst_head: T,
    /// `4 / √n`.
    pub bound: T,
}

impl<T: Scalar> EitherOrContract<T> {
    pub fn holds(&self) -> bool {
        self.worst_tail <= self.bound && self.worst_head <= self.bound
    }
}

/// Distance from `e_1` to `[z_j : j in kept, j >= j0]` (1-based `j0`,
/// 0-based `kept`).
pub fn either_or_tail_distance<T: Scalar>(z: &[Vec<T>], kept: &[usize], j0: usize) -> T {
    let n = z.len();
    let span: Vec<Vec<T>> = kept.iter().filter(|&&j| j + 1 >= j0).map(|&j| z[j].clone()).collect();
    let mut e = vec![T::zero(); n];
    e[0] = T::one();
    distance_to_span(&e, &span)
}

/// Distance from `e_n` to `[z_j : j in kept, j < j0]`.
pub fn either_or_head_distance<T: Scalar>(z: &[Vec<T>], kept: &[usize], j0: usize) -> T {
    let n = z.len();
    let span: Vec<Vec<T>> = kept.iter().filter(|&&j| j + 1 < j0).map(|&j| z[j].clone()).collect();
    let mut e = vec![T::zero(); n];
    e[n - 1] = T::one();
    distance_to_span(&e, &span)
}

/// Exhaustive check of the either-or contract for one `n`.
pub fn either_or_contract<T: Scalar>(n: usize) -> Result<EitherOrContract<T>> {
    let z = either_or_basis::<T>(n)?;
    let mut missing: Vec<Vec<usize>> = vec![vec![]];
    missing.extend((0..n).map(|a| vec![a]));
    for a in 0..n {
        for b in a + 1..n {
            missing.push(vec![a, b]);
        }
    }
    let mut worst_tail = T::zero();
    let mut worst_head = T::zero();
    for m in &missing {
        let kept: Vec<usize> = (0..n).filter(|j| !m.contains(j)).collect();
        for j0 in 1..=n {
            if 2 * j0 < n {
                worst_tail = worst_tail.max(either_or_tail_distance(&z, &kept, j0));
            } else {
                worst_head = worst_head.max(either_or_head_distance(&z, &kept, j0));
            }
        }
    }
    Ok(EitherOrContract {
        n,
        worst_tail,
        worst_head,
        bound: T::lit(4.0) / T::from_usize_lossy(n).sqrt(),
    })
}

/// The frame `x_j = T_n z_j`, `j in J(n)`, `n <= N`, with `z` the either-or
/// basis of `R^n` placed on the coordinates `I(n)`. Its frame operator is
/// diagonal with entries 1 and 2.
pub fn bracketless_frame<T: Scalar>(blocks: usize) -> Result<(Frame<T>, BlockLayout)> {
    let layout = BlockLayout::new(blocks)?;
    let dim = layout.ambient_dim;
    let mut vectors = Vec::with_capacity(layout.vector_count());
    for n in 1..=blocks {
        let z = if n == 1 {
            vec![vec![T::one()]]
        } else {
            either_or_basis::<T>(n)?
        };
        let coords = layout.coordinates(n);
        for zj in z {
            let mut x = vec![T::zero(); dim];
            for (c, v) in coords.clone().zip(zj) {
                x[c] = v;
            }
            vectors.push(x);
        }
    }
    Ok((Frame::new(dim, vectors)?, layout))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub complete: bool,
    pub rank: usize,
    pub ambient_dim: usize,
    /// `|J(n) ∩ J|` for `n = 1, …, N`.
    pub per_block: Vec<usize>,
    /// Blocks with `|J(n) ∩ J| < n - 2`.
    pub violations: Vec<usize>,
}

/// Rank test for the span of the vectors at `kept`, with per-block counts.
pub fn completeness_check<T: Scalar>(
    frame: &Frame<T>,
    layout: &BlockLayout,
    kept: &[usize],
) -> Result<CompletenessReport> {
    if let Some(&j) = kept.iter().find(|&&j| j >= frame.len()) {
        return Err(FrameError::InvalidParameter(format!(
            "index {j} out of range for {} vectors",
            frame.len()
        )));
    }
    let cols: Vec<Vec<T>> = kept.iter().map(|&j| frame.vector(j).to_vec()).collect();
    let rank = if cols.is_empty() {
        0
    } else {
        let sv = linalg::singular_values(&linalg::Matrix::from_columns(frame.dim(), &cols));
        let top = sv.first().copied().unwrap_or_else(T::zero);
        sv.iter().filter(|&&s| s > T::tol(RANK_TOL) * top).count()
    };
    let per_block: Vec<usize> = (1..=layout.blocks)
        .map(|n| {
            let r = layout.indices(n);
            kept.iter().filter(|j| r.contains(j)).count()
        })
        .collect();
    let violations = per_block
        .iter()
        .enumerate()
        .filter(|&(i, &c)| c + 2 < i + 1)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(CompletenessReport {
        complete: rank == frame.dim(),
        rank,
        ambient_dim: frame.dim(),
        per_block,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketDiagnostics<T> {
    pub block: usize,
    /// 0-based vector index `j0`.
    pub bracket_point: usize,
    /// 0-based coordinate of the witness unit vector.
    pub witness: usize,
    /// Distance of the witness to `F = [x_j : j in J, j < j0]`.
    pub dist_head: T,
    /// Distance of the witness to `E = [x_j : j in J, j >= j0]`.
    pub dist_tail: T,
    pub min_principal_angle: T,
    /// `1 / sin(min_principal_angle)`, the norm of the projection onto `E`
    /// along `F`.
    pub projection_norm_lb: T,
    /// `√(1 - dist_tail²) / (dist_head + dist_tail)`, a lower bound for the
    /// same norm read off the witness alone.
    pub witness_bound: T,
}

/// Bracket at `j0 in J(n) ∩ kept` for a complete `kept`.
///
/// The witness is `e_{i(n)}` when `j0` sits in the first half of `J(n)`
/// (1-based position below `n/2`) and `e_{i(n+1)}` otherwise.
pub fn bracket_diagnostics<T: Scalar>(
    frame: &Frame<T>,
    layout: &BlockLayout,
    kept: &[usize],
    n: usize,
    j0: usize,
) -> Result<BracketDiagnostics<T>> {
    if n < 2 || n + 2 > layout.blocks {
        return Err(FrameError::InvalidParameter(format!(
            "block {n} outside 2..={}",
            layout.blocks.saturating_sub(2)
        )));
    }
    let block = layout.indices(n);
    if !block.contains(&j0) || !kept.contains(&j0) {
        return Err(FrameError::InvalidParameter(format!(
            "bracket point {j0} is not a kept index of block {n}"
        )));
    }
    if !completeness_check(frame, layout, kept)?.complete {
        return Err(FrameError::Precondition("index set is not complete".into()));
    }
    let head: Vec<Vec<T>> = kept
        .iter()
        .filter(|&&j| j < j0)
        .map(|&j| frame.vector(j).to_vec())
        .collect();
    let tail: Vec<Vec<T>> = kept
        .iter()
        .filter(|&&j| j >= j0)
        .map(|&j| frame.vector(j).to_vec())
        .collect();
    let qf = linalg::orthonormal_basis(&head, T::tol(RANK_TOL));
    let qe = linalg::orthonormal_basis(&tail, T::tol(RANK_TOL));
    if qf.is_empty() || qe.is_empty() {
        return Err(FrameError::Precondition("one side of the bracket is trivial".into()));
    }
    let position = j0 - block.start + 1;
    let witness = if 2 * position < n {
        BlockLayout::first_coordinate(n)
    } else {
        BlockLayout::first_coordinate(n + 1)
    };
    let mut x = vec![T::zero(); frame.dim()];
    x[witness] = T::one();
    let dist_head = linalg::norm(&linalg::residual(&x, &qf));
    let dist_tail = linalg::norm(&linalg::residual(&x, &qe));

    // sin of the smallest angle: min over unit f in the smaller space of
    // its distance to the larger one
    let (small, big) = if qf.len() <= qe.len() { (&qf, &qe) } else { (&qe, &qf) };
    let off: Vec<Vec<T>> = small.iter().map(|q| linalg::residual(q, big)).collect();
    let sin = linalg::min_singular_value(frame.dim(), &off).min(T::one());
    let angle = sin.asin();
    let projection_norm_lb = if sin > T::zero() {
        T::one() / sin
    } else {
        T::infinity()
    };
    let denom = dist_head + dist_tail;
    let witness_bound = if denom > T::zero() {
        (T::one() - dist_tail * dist_tail).max(T::zero()).sqrt() / denom
    } else {
        T::infinity()
    };
    Ok(BracketDiagnostics {
        block: n,
        bracket_point: j0,
        witness,
        dist_head,
        dist_tail,
        min_principal_angle: angle,
        projection_norm_lb,
        witness_bound,
    })
}

/// Midpoint-bracket diagnostics for every block `2 <= n <= N - 2`, using the
/// basis [`BlockLayout::reduced_indices`].
pub fn midpoint_diagnostics<T: Scalar>(blocks: usize) -> Result<Vec<BracketDiagnostics<T>>> {
    let (frame, layout) = bracketless_frame::<T>(blocks)?;
    let kept = layout.reduced_indices();
    (2..=blocks.saturating_sub(2))
        .map(|n| bracket_diagnostics(&frame, &layout, &kept, n, layout.midpoint(n)))
        .collect()
}

/// `x_j = e_j - (1/n) Σ e_i` for `j <= n` and `x_{n+1} = n^(-1/2) Σ e_i`.
pub fn casazza_christensen_frame<T: Scalar>(n: usize) -> Result<Frame<T>> {
    if n < 2 {
        return Err(FrameError::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    let inv = T::one() / T::from_usize_lossy(n);
    let mut vectors: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { T::one() - inv } else { -inv })
                .collect()
        })
        .collect();
    vectors.push(vec![inv.sqrt(); n]);
    Frame::new(n, vectors)
}

/// `‖Σ_{j<=k} x_j‖²` for the first `k` vectors of the frame above, in exact
/// arithmetic over any number type that holds `1/n` exactly (for example
/// `Ratio<i64>`).
pub fn cc_partial_sum_sq<R: Clone + Num + FromPrimitive>(n: usize, k: usize) -> R {
    let nn = R::from_usize(n).expect("n fits");
    let mut sum = R::zero();
    for i in 0..n {
        // i-th coordinate of Σ_{j<k} (e_j - (1/n)Σ e)
        let mut c = R::zero();
        for j in 0..k.min(n) {
            let delta = if i == j { R::one() } else { R::zero() };
            c = c + delta - R::one() / nn.clone();
        }
        sum = sum + c.clone() * c;
    }
    sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSumCheck {
    pub n: usize,
    pub epsilon: f64,
    /// `ceil((1 - ε) n) - 1`.
    pub k: usize,
    /// Exact value as numerator and denominator.
    pub value_num: i64,
    pub value_den: i64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares `‖Σ_{j<=k} x_j‖²`, `k = ceil((1 - ε) n) - 1`, with `2 (ε n + 1)`.
pub fn cc_partial_sum_check(n: usize, epsilon: f64, tol: f64) -> Result<PartialSumCheck> {
    if n < 2 || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(FrameError::InvalidParameter(format!(
            "need n >= 2 and epsilon in (0, 1), got n = {n}, epsilon = {epsilon}"
        )));
    }
    let k = (((1.0 - epsilon) * n as f64) - 1e-12).ceil() as usize - 1;
    let exact: num_rational::Ratio<i64> = cc_partial_sum_sq(n, k);
    let value = *exact.numer() as f64 / *exact.denom() as f64;
    let bound = 2.0 * (epsilon * n as f64 + 1.0);
    Ok(PartialSumCheck {
        n,
        epsilon,
        k,
        value_num: *exact.numer(),
        value_den: *exact.denom(),
        bound,
        holds: value <= bound + tol,
    })
}

/// Certificate of `(x_1, …, x_{n-1})`.
pub fn cc_head_certificate<T: Scalar>(n: usize) -> Result<EquivalenceCertificate<T>> {
    let f = casazza_christensen_frame::<T>(n)?;
    frame::equivalence_certificate(&f.vectors()[..n - 1])
}
