//! Greedy almost-orthonormal selection from frames given as streams.
//!
//! A [`FrameSequence`] yields vectors one at a time; their length may grow
//! (missing trailing coordinates are zero). [`greedy_subsequence`] keeps a
//! vector when it is far enough from the span of those already kept, with
//! thresholds tightening geometrically, and [`stability_check`] certifies
//! the result through its Gram matrix.
//!
//! Positions inside a selection are 1-based (`k = 1, 2, …`) because the
//! thresholds depend on them; stream indices are 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{self, EquivalenceCertificate, Frame};
use crate::linalg::{self, Matrix};
use crate::random::Gaussian;
use crate::scalar::Scalar;

/// Relative rank tolerance for spans.
pub const SPAN_TOL: f64 = 1e-10;
/// Tolerance on the unit norm of points passed to [`theta`].
pub const UNIT_TOL: f64 = 1e-8;

/// A frame presented as a stream of finitely supported vectors.
pub trait FrameSequence<T: Scalar> {
    /// Next vector, or `None` once the stream is exhausted.
    fn next_vector(&mut self) -> Option<Vec<T>>;

    /// Upper frame bound, when known.
    fn known_bound(&self) -> Option<T> {
        None
    }
}

impl<T: Scalar, S: FrameSequence<T> + ?Sized> FrameSequence<T> for &mut S {
    fn next_vector(&mut self) -> Option<Vec<T>> {
        (**self).next_vector()
    }

    fn known_bound(&self) -> Option<T> {
        (**self).known_bound()
    }
}

/// Stream produced by a closure of the 0-based index.
pub struct FnSequence<F> {
    next: usize,
    f: F,
}

pub fn from_fn<T: Scalar, F: FnMut(usize) -> Option<Vec<T>>>(f: F) -> FnSequence<F> {
    FnSequence { next: 0, f }
}

impl<T: Scalar, F: FnMut(usize) -> Option<Vec<T>>> FrameSequence<T> for FnSequence<F> {
    fn next_vector(&mut self) -> Option<Vec<T>> {
        let v = (self.f)(self.next);
        self.next += 1;
        v
    }
}

/// The vectors of a finite frame, once or repeated forever.
pub struct FrameStream<T> {
    frame: Frame<T>,
    cyclic: bool,
    pos: usize,
    bound: Option<T>,
}

impl<T: Scalar> FrameStream<T> {
    pub fn once(frame: Frame<T>) -> Self {
        let bound = frame::frame_bounds(&frame).ok().map(|b| b.upper);
        Self {
            frame,
            cyclic: false,
            pos: 0,
            bound,
        }
    }

    /// Repeats the frame; the upper bound is then unbounded.
    pub fn cyclic(frame: Frame<T>) -> Self {
        Self {
            frame,
            cyclic: true,
            pos: 0,
            bound: None,
        }
    }
}

impl<T: Scalar> FrameSequence<T> for FrameStream<T> {
    fn next_vector(&mut self) -> Option<Vec<T>> {
        let m = self.frame.len();
        if m == 0 || (!self.cyclic && self.pos >= m) {
            return None;
        }
        let v = self.frame.vector(self.pos % m).to_vec();
        self.pos += 1;
        Some(v)
    }

    fn known_bound(&self) -> Option<T> {
        self.bound
    }
}

/// Columns `P e_j` of a fixed random orthogonal projection of rank `rank` in
/// `R^ambient`, for `j = 0, …, ambient - 1`.
///
/// The projection is block diagonal: the coordinates are cut into
/// `ceil(rank / 2)` consecutive blocks of near-equal size, each carrying an
/// independent random projection of rank two (rank one in the last block
/// when `rank` is odd). Blocks are drawn in order from one seeded stream.
pub struct ProjectedBasis<T> {
    projection: Matrix<T>,
    pos: usize,
}

impl<T: Scalar> ProjectedBasis<T> {
    pub fn new(seed: u64, ambient: usize, rank: usize) -> Result<Self> {
        if rank == 0 || rank > ambient {
            return Err(FrameError::InvalidParameter(format!(
                "projection rank {rank} must lie in 1..={ambient}"
            )));
        }
        let blocks = rank.div_ceil(2);
        if 2 * blocks > ambient + usize::from(rank % 2 == 1) {
            return Err(FrameError::InvalidParameter(format!(
                "ambient dimension {ambient} too small for rank {rank}"
            )));
        }
        let mut projection = Matrix::zeros(ambient, ambient);
        let mut g = Gaussian::new(seed);
        let mut start = 0;
        for b in 0..blocks {
            let size = ambient / blocks + usize::from(b < ambient % blocks);
            let block_rank = if b + 1 == blocks && rank % 2 == 1 { 1 } else { 2 };
            let rows: Vec<Vec<T>> = loop {
                let draw: Vec<Vec<T>> = (0..block_rank).map(|_| g.vector(size)).collect();
                let q = linalg::orthonormal_basis(&draw, T::tol(1e-8));
                if q.len() == block_rank {
                    break q;
                }
            };
            for i in 0..size {
                for j in 0..size {
                    let v: T = rows.iter().map(|q| q[i] * q[j]).sum();
                    projection[(start + i, start + j)] = v;
                }
            }
            start += size;
        }
        Ok(Self { projection, pos: 0 })
    }

    pub fn projection(&self) -> &Matrix<T> {
        &self.projection
    }
}

impl<T: Scalar> FrameSequence<T> for ProjectedBasis<T> {
    fn next_vector(&mut self) -> Option<Vec<T>> {
        if self.pos >= self.projection.cols() {
            return None;
        }
        let v = self.projection.column(self.pos);
        self.pos += 1;
        Some(v)
    }

    fn known_bound(&self) -> Option<T> {
        Some(T::one())
    }
}

fn padded<T: Scalar>(v: &[T], len: usize) -> Vec<T> {
    let mut out = v.to_vec();
    out.resize(len.max(v.len()), T::zero());
    out
}

/// Incrementally maintained orthonormal basis whose vectors may grow.
#[derive(Default)]
struct GrowingBasis<T> {
    len: usize,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> GrowingBasis<T> {
    fn widen(&mut self, len: usize) {
        if len > self.len {
            self.len = len;
            for q in &mut self.vectors {
                q.resize(len, T::zero());
            }
        }
    }

    fn residual(&mut self, v: &[T]) -> Vec<T> {
        self.widen(v.len());
        linalg::residual(&padded(v, self.len), &self.vectors)
    }

    fn push(&mut self, v: &[T]) {
        let r = self.residual(v);
        let nr = linalg::norm(&r);
        if nr > T::tol(SPAN_TOL) * linalg::norm(v) {
            self.vectors.push(linalg::scaled(&r, T::one() / nr));
        }
    }
}

/// `θ(points, span) = max` distance of a point to the span of
/// `subspace_basis`. Zero for an empty point set.
pub fn theta<T: Scalar>(points: &[Vec<T>], subspace_basis: &[Vec<T>]) -> T {
    let mut basis = GrowingBasis::default();
    let len = points
        .iter()
        .chain(subspace_basis)
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    basis.widen(len);
    for b in subspace_basis {
        basis.push(b);
    }
    points.iter().fold(T::zero(), |acc, p| {
        debug_assert!((linalg::norm(p) - T::one()).abs() <= T::tol(UNIT_TOL));
        acc.max(linalg::norm(&basis.residual(p)))
    })
}

/// Distance threshold for position `k` (1-based): `1 - 2^(-2k)`.
pub fn distance_threshold<T: Scalar>(k: usize) -> T {
    T::one() - T::lit(2f64.powi(-2 * k as i32))
}

/// Inner-product threshold for position `k` (1-based): `2^(-k-1)`.
pub fn stability_threshold<T: Scalar>(k: usize) -> T {
    T::lit(2f64.powi(-(k as i32) - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyStatus {
    Complete,
    /// The stream ended or the scan window closed before enough terms were
    /// found; the input behaves as finite dimensional.
    ThresholdUnattainable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedySelection<T> {
    /// Increasing 0-based stream indices.
    pub indices: Vec<usize>,
    /// Normalized selected vectors, padded to a common length.
    pub vectors: Vec<Vec<T>>,
    /// Distance of each selected vector to the span of the earlier ones;
    /// the first is 1.
    pub distances: Vec<T>,
    pub status: GreedyStatus,
    /// Stream elements consumed.
    pub scanned: usize,
}

impl<T: Scalar> GreedySelection<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Whether every position `k >= 2` beats its distance threshold.
    pub fn thresholds_met(&self) -> bool {
        self.distances
            .iter()
            .enumerate()
            .skip(1)
            .all(|(i, &d)| d > distance_threshold::<T>(i + 1))
    }

    /// The selection from 1-based position `k0` on.
    pub fn tail(&self, k0: usize) -> Vec<Vec<T>> {
        self.vectors[k0.saturating_sub(1).min(self.len())..].to_vec()
    }
}

/// Takes the first nonzero vector, then for `k = 2, …, terms` the next
/// vector at distance more than `1 - 2^(-2k)` from the span of those taken.
///
/// At most `scan_limit` stream elements are read; if that is not enough the
/// partial selection is returned with [`GreedyStatus::ThresholdUnattainable`].
pub fn greedy_subsequence<T: Scalar, S: FrameSequence<T>>(
    mut seq: S,
    terms: usize,
    scan_limit: usize,
) -> Result<GreedySelection<T>> {
    if terms == 0 {
        return Err(FrameError::InvalidParameter("terms must be at least 1".into()));
    }
    let mut basis = GrowingBasis::default();
    let mut indices = Vec::new();
    let mut vectors: Vec<Vec<T>> = Vec::new();
    let mut distances = Vec::new();
    let mut scanned = 0;
    while indices.len() < terms && scanned < scan_limit {
        let Some(x) = seq.next_vector() else { break };
        let j = scanned;
        scanned += 1;
        let nx = linalg::norm(&x);
        if nx == T::zero() || !nx.is_finite() {
            continue;
        }
        let z = linalg::scaled(&x, T::one() / nx);
        let k = indices.len() + 1;
        let dist = if k == 1 {
            T::one()
        } else {
            linalg::norm(&basis.residual(&z))
        };
        if k == 1 || dist > distance_threshold(k) {
            basis.push(&z);
            indices.push(j);
            vectors.push(z);
            distances.push(dist);
        }
    }
    let len = vectors.iter().map(Vec::len).max().unwrap_or(0);
    let vectors = vectors.iter().map(|v| padded(v, len)).collect();
    let status = if indices.len() == terms {
        GreedyStatus::Complete
    } else {
        GreedyStatus::ThresholdUnattainable
    };
    Ok(GreedySelection {
        indices,
        vectors,
        distances,
        status,
        scanned,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityViolation<T> {
    /// 1-based positions `i < k`.
    pub i: usize,
    pub k: usize,
    pub inner_product: T,
    pub threshold: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub certificate: EquivalenceCertificate<T>,
    /// `|⟨z_i, z_k⟩| < 2^(-k-1)` for every checked pair.
    pub stable: bool,
    /// Smallest 1-based `k` whose pairs were checked.
    pub from_position: usize,
    pub violations: Vec<StabilityViolation<T>>,
}

/// Checks `|⟨z_i, z_k⟩| < 2^(-k-1)` for all `i < k` and certifies the
/// selection against an orthonormal basis.
pub fn stability_check<T: Scalar>(selection: &GreedySelection<T>) -> Result<StabilityReport<T>> {
    stability_check_from(selection, 2)
}

/// [`stability_check`] restricted to pairs with `k >= from_position`.
pub fn stability_check_from<T: Scalar>(
    selection: &GreedySelection<T>,
    from_position: usize,
) -> Result<StabilityReport<T>> {
    if selection.is_empty() {
        return Err(FrameError::Empty("selection is empty"));
    }
    let z = &selection.vectors;
    let mut violations = Vec::new();
    for k in from_position.max(2)..=z.len() {
        let threshold = stability_threshold::<T>(k);
        for i in 1..k {
            let ip = linalg::dot(&z[i - 1], &z[k - 1]);
            if ip.abs() >= threshold {
                violations.push(StabilityViolation {
                    i,
                    k,
                    inner_product: ip,
                    threshold,
                });
            }
        }
    }
    Ok(StabilityReport {
        certificate: frame::equivalence_certificate(z)?,
        stable: violations.is_empty(),
        from_position,
        violations,
    })
}

/// Smallest 1-based position `k0` such that the selection from `k0` on has
/// equivalence constant at most `1 / (1 - ε)`.
pub fn tail_index<T: Scalar>(selection: &GreedySelection<T>, epsilon: f64) -> Result<Option<usize>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(FrameError::InvalidParameter(format!(
            "epsilon = {epsilon} outside (0, 1)"
        )));
    }
    let limit = T::lit(1.0 / (1.0 - epsilon));
    for k0 in 1..=selection.len() {
        let c = frame::equivalence_certificate(&selection.tail(k0))?;
        if c.constant <= limit {
            return Ok(Some(k0));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn doubled_basis() -> impl FrameSequence<f64> {
        from_fn(|j| {
            let mut v = vec![0.0; j / 2 + 1];
            v[j / 2] = 1.0;
            Some(v)
        })
    }

    #[test]
    fn theta_examples() {
        let r = 0.5f64.sqrt();
        assert_eq!(theta(&[e(2, 0)], &[e(2, 0), e(2, 1)]), 0.0);
        assert!((theta(&[e(2, 1)], &[e(2, 0)]) - 1.0).abs() < 1e-15);
        assert!((theta(&[vec![r, r]], &[e(2, 0)]) - r).abs() < 1e-15);
        assert!((theta(&[vec![r, r]], &[]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta_pads_short_vectors() {
        assert!((theta(&[vec![0.0f64, 0.0, 1.0]], &[vec![1.0]]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_stream() {
        let s = greedy_subsequence(doubled_basis(), 4, 100).unwrap();
        assert_eq!(s.indices, vec![0, 2, 4, 6]);
        assert!(s.distances.iter().all(|&d| (d - 1.0).abs() < 1e-15));
        assert_eq!(s.status, GreedyStatus::Complete);
        let r = stability_check(&s).unwrap();
        assert!(r.stable);
        assert!((r.certificate.constant - 1.0).abs() < 1e-14);
    }

    #[test]
    fn finite_dimensional_stream_saturates() {
        let f = Frame::<f64>::standard_basis(3);
        let s = greedy_subsequence(FrameStream::cyclic(f), 5, 100).unwrap();
        assert_eq!(s.status, GreedyStatus::ThresholdUnattainable);
        assert_eq!(s.len(), 3);
        assert_eq!(s.scanned, 100);
    }

    #[test]
    fn zero_terms_is_an_error() {
        assert!(greedy_subsequence(doubled_basis(), 0, 10).is_err());
    }

    #[test]
    fn zero_vectors_are_skipped() {
        let seq = from_fn(|j| Some(if j == 0 { vec![0.0] } else { e(j, j - 1) }));
        let s = greedy_subsequence(seq, 2, 10).unwrap();
        assert_eq!(s.indices, vec![1, 2]);
    }

    #[test]
    fn correlated_pair_is_flagged() {
        let c = 0.3f64;
        let sel = GreedySelection {
            indices: vec![0, 1],
            vectors: vec![vec![1.0, 0.0], vec![c, (1.0 - c * c).sqrt()]],
            distances: vec![1.0, (1.0 - c * c).sqrt()],
            status: GreedyStatus::Complete,
            scanned: 2,
        };
        let r = stability_check(&sel).unwrap();
        assert!(!r.stable);
        assert_eq!(r.violations.len(), 1);
        assert!((r.certificate.constant - (1.3f64 / 0.7).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projected_basis_is_a_projection() {
        let g = ProjectedBasis::<f64>::new(0, 20, 5).unwrap();
        let p = g.projection();
        assert!(p.matmul(p).sub(p).max_abs() < 1e-12);
        let tr: f64 = p.diagonal().iter().sum();
        assert!((tr - 5.0).abs() < 1e-12);
        assert!(ProjectedBasis::<f64>::new(0, 4, 5).is_err());
    }

    #[test]
    fn projected_basis_selection() {
        let g = ProjectedBasis::<f64>::new(0, 200, 40).unwrap();
        let s = greedy_subsequence(g, 12, 200).unwrap();
        assert_eq!(s.status, GreedyStatus::Complete);
        assert!(s.thresholds_met());
        let r = stability_check_from(&s, 3).unwrap();
        assert!(r.stable, "{:?}", r.violations);
        assert!(r.certificate.constant <= 4.0);
        assert_eq!(tail_index(&s, 0.1).unwrap().map(|k| k <= 12), Some(true));
    }
}
