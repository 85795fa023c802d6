//! Column subset selection with recomputed certificates.
//!
//! Three selection problems drive the extraction pipeline:
//!
//! * restriction norm: pick `k` columns with small largest singular value
//!   ([`lunin_select`]),
//! * restricted invertibility: pick many unit columns whose smallest singular
//!   value stays above a target ([`bt_select`]),
//! * zero-diagonal restriction: pick a principal submatrix of a
//!   zero-diagonal operator with small norm ([`kt_select`]).
//!
//! Each is solved exactly by lexicographic enumeration when the number of
//! candidate subsets fits under [`SelectionConfig::exhaustive_limit`], and by
//! a greedy pass otherwise. Greedy passes recompute singular values for every
//! candidate; nothing is estimated. Ties are always broken towards the
//! lexicographically smallest index set.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::check_system;
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Steps between full rebuilds of the running frame operator in the greedy
/// restriction-norm pass.
const REFRESH_EVERY: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Lexicographic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSelection<T> {
    /// Sorted, distinct, 0-based column indices.
    pub indices: Vec<usize>,
    /// `σ_max` for restriction-norm problems, `σ_min` for invertibility.
    pub achieved_value: T,
    pub method: SelectionMethod,
}

impl<T: Scalar> SubsetSelection<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Calibration constants for the selection theorems, whose true values are
/// not explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Slack target for the restriction-norm selection.
    pub c1: f64,
    /// Lower singular value target coefficient, in `(0, 1)`.
    pub c2: f64,
    /// Coefficient of the zero-diagonal restriction bound `c5 · δ^(1/2)`.
    pub c5: f64,
    /// Maximum number of subsets an exact search may enumerate.
    pub exhaustive_limit: u64,
    pub tie_break: TieBreak,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 0.1,
            c5: 2.0,
            exhaustive_limit: 2_000_000,
            tie_break: TieBreak::Lexicographic,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c1 > 0.0
            && self.c2 > 0.0
            && self.c2 < 1.0
            && self.c5 > 0.0
            && self.exhaustive_limit >= 1;
        if ok {
            Ok(())
        } else {
            Err(FrameError::InvalidParameter(format!(
                "selection config out of range: {self:?}"
            )))
        }
    }
}

/// What a subset is scored by.
#[derive(Clone, Copy, Debug)]
pub enum Objective<'a, T> {
    /// Minimize the largest singular value of the selected columns.
    MinSigmaMax(&'a [Vec<T>]),
    /// Maximize the smallest singular value of the selected columns.
    MaxSigmaMin(&'a [Vec<T>]),
    /// Minimize `‖R_σ T R_σ‖` for a square matrix `T`.
    MinRestrictedNorm(&'a Matrix<T>),
}

impl<T: Scalar> Objective<'_, T> {
    fn universe(&self) -> usize {
        match self {
            Objective::MinSigmaMax(c) | Objective::MaxSigmaMin(c) => c.len(),
            Objective::MinRestrictedNorm(t) => t.rows(),
        }
    }

    pub fn evaluate(&self, idx: &[usize]) -> T {
        match self {
            Objective::MinSigmaMax(c) => sigma_max_of(c, idx),
            Objective::MaxSigmaMin(c) => sigma_min_of(c, idx),
            Objective::MinRestrictedNorm(t) => restricted_norm(t, idx),
        }
    }

    /// `a` strictly better than `b` beyond rounding.
    fn better(&self, a: T, b: T) -> bool {
        match self {
            Objective::MaxSigmaMin(_) => a > b + tie_tol(a, b),
            _ => a < b - tie_tol(a, b),
        }
    }
}

fn tie_tol<T: Scalar>(a: T, b: T) -> T {
    T::epsilon() * T::lit(64.0) * a.abs().max(b.abs()).max(T::one())
}

fn pick<T: Scalar>(columns: &[Vec<T>], idx: &[usize]) -> Vec<Vec<T>> {
    idx.iter().map(|&j| columns[j].clone()).collect()
}

pub fn sigma_max_of<T: Scalar>(columns: &[Vec<T>], idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::zero();
    }
    let dim = columns[idx[0]].len();
    linalg::max_singular_value(dim, &pick(columns, idx))
}

pub fn sigma_min_of<T: Scalar>(columns: &[Vec<T>], idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::zero();
    }
    let dim = columns[idx[0]].len();
    linalg::min_singular_value(dim, &pick(columns, idx))
}

/// `‖R_σ T R_σ‖`, the norm of the principal submatrix on `idx`.
pub fn restricted_norm<T: Scalar>(t: &Matrix<T>, idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::zero();
    }
    t.principal(idx).spectral_norm()
}

/// Lexicographic enumeration of `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.current);
        }
        let k = self.current.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.current[i] < self.n - k + i {
                self.current[i] += 1;
                for j in (i + 1)..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return Some(&self.current);
            }
        }
        self.done = true;
        None
    }
}

/// Exact optimizer of `objective` over all subsets of size `size`.
///
/// The first optimum in lexicographic order wins; values within a few ulps
/// count as equal.
pub fn brute_force_subset_oracle<T: Scalar>(
    objective: Objective<'_, T>,
    size: usize,
    limit: u64,
) -> Result<SubsetSelection<T>> {
    let n = objective.universe();
    if size > n {
        return Err(FrameError::InvalidParameter(format!(
            "subset size {size} exceeds universe of {n}"
        )));
    }
    let count = linalg::binomial(n, size);
    if count > limit as u128 {
        return Err(FrameError::EnumerationTooLarge { count, limit });
    }
    let mut combos = Combinations::new(n, size);
    let mut best: Option<(Vec<usize>, T)> = None;
    while let Some(c) = combos.next() {
        let v = objective.evaluate(c);
        let replace = match &best {
            None => true,
            Some((_, b)) => objective.better(v, *b),
        };
        if replace {
            best = Some((c.to_vec(), v));
        }
    }
    let (indices, achieved_value) = best.expect("at least one subset");
    Ok(SubsetSelection {
        indices,
        achieved_value,
        method: SelectionMethod::Exhaustive,
    })
}

/// Selects `target_size` columns with small largest singular value.
///
/// Exact when `C(m, target_size)` fits the enumeration limit, otherwise
/// greedy backward elimination ([`lunin_greedy`]).
pub fn lunin_select<T: Scalar>(
    columns: &[Vec<T>],
    target_size: usize,
    cfg: &SelectionConfig,
) -> Result<SubsetSelection<T>> {
    cfg.validate()?;
    check_system(columns)?;
    let m = columns.len();
    if target_size > m {
        return Err(FrameError::InvalidParameter(format!(
            "target size {target_size} exceeds {m} columns"
        )));
    }
    if linalg::binomial(m, target_size) <= cfg.exhaustive_limit as u128 {
        brute_force_subset_oracle(
            Objective::MinSigmaMax(columns),
            target_size,
            cfg.exhaustive_limit,
        )
    } else {
        lunin_greedy(columns, target_size)
    }
}

/// Greedy backward elimination: repeatedly drop the column whose removal
/// leaves the smallest largest singular value.
///
/// With `M = Σ y yᵀ` over the surviving columns, the value after removing `y`
/// is `λ_max(M - y yᵀ)`, found exactly on the secular equation in the
/// eigenbasis of `M`. Candidates are visited in order of a lower bound (the
/// 2x2 compression onto the top two eigenvectors, and `λ₂(M)`), and the scan
/// stops once the bound exceeds the best exact value found. Among equal
/// values the removal that lowers `‖M‖_F` most is preferred, then the
/// lowest index.
pub fn lunin_greedy<T: Scalar>(columns: &[Vec<T>], target_size: usize) -> Result<SubsetSelection<T>> {
    let dim = check_system(columns)?;
    let m = columns.len();
    if target_size > m {
        return Err(FrameError::InvalidParameter(format!(
            "target size {target_size} exceeds {m} columns"
        )));
    }
    let mut alive: Vec<usize> = (0..m).collect();
    let rebuild = |alive: &[usize]| -> Matrix<T> {
        Matrix::from_columns(dim, &pick(columns, alive)).outer_gram()
    };
    let mut op = rebuild(&alive);
    let mut eig = linalg::sym_eigen(&op);
    let mut steps = 0usize;
    while alive.len() > target_size {
        let values = &eig.values;
        let u = &eig.vectors;
        let u_cols: Vec<Vec<T>> = u.columns();
        let second = values.get(1).copied().unwrap_or(T::neg_infinity());
        let mut order: Vec<(T, usize)> = alive
            .iter()
            .enumerate()
            .map(|(pos, &j)| {
                let y = &columns[j];
                let p = linalg::dot(&u_cols[0], y);
                let lb = if dim == 1 {
                    values[0] - p * p
                } else {
                    let q = linalg::dot(&u_cols[1], y);
                    linalg::downdated_top_eigenvalue_2x2(values[0], values[1], p, q).max(second)
                };
                (lb, pos)
            })
            .collect();
        order.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        // (value, secondary score, position)
        let mut best: Option<(T, T, usize)> = None;
        for &(lb, pos) in &order {
            if let Some((bv, _, _)) = best {
                if lb > bv + tie_tol(lb, bv) {
                    break;
                }
            }
            let y = &columns[alive[pos]];
            let z: Vec<T> = u_cols.iter().map(|q| linalg::dot(q, y)).collect();
            let v = linalg::downdated_top_eigenvalue(values, &z);
            // drop in ‖M‖_F² is 2 yᵀMy - ‖y‖⁴
            let quad: T = values.iter().zip(&z).map(|(&l, &zi)| l * zi * zi).sum();
            let yy = linalg::dot(y, y);
            let score = quad + quad - yy * yy;
            let take = match best {
                None => true,
                Some((bv, bs, bpos)) => {
                    if v < bv - tie_tol(v, bv) {
                        true
                    } else if (v - bv).abs() <= tie_tol(v, bv) {
                        score > bs + tie_tol(score, bs)
                            || ((score - bs).abs() <= tie_tol(score, bs) && pos < bpos)
                    } else {
                        false
                    }
                }
            };
            if take {
                best = Some((v, score, pos));
            }
        }
        let (_, _, pos) = best.expect("nonempty candidate set");
        let removed = alive.remove(pos);
        steps += 1;
        if alive.is_empty() {
            break;
        }
        if steps.is_multiple_of(REFRESH_EVERY) {
            op = rebuild(&alive);
            eig = linalg::sym_eigen(&op);
        } else {
            let y = &columns[removed];
            for i in 0..dim {
                for k in 0..dim {
                    op[(i, k)] = op[(i, k)] - y[i] * y[k];
                }
            }
            eig = linalg::sym_eigen_warm(&op, &eig.vectors);
        }
    }
    let achieved_value = sigma_max_of(columns, &alive);
    Ok(SubsetSelection {
        indices: alive,
        achieved_value,
        method: SelectionMethod::Greedy,
    })
}

/// Selects as many unit columns as possible keeping `σ_min >= min_sv_target`.
///
/// Exact search goes down from the largest possible cardinality and returns,
/// at the first feasible size, the subset with the largest `σ_min`. When the
/// enumeration would exceed the limit the greedy forward pass
/// ([`bt_greedy`]) is used. An empty selection means no column is feasible
/// on its own, which only happens for targets above one.
pub fn bt_select<T: Scalar>(
    columns: &[Vec<T>],
    min_sv_target: T,
    cfg: &SelectionConfig,
) -> Result<SubsetSelection<T>> {
    cfg.validate()?;
    let dim = check_system(columns)?;
    check_unit(columns)?;
    let m = columns.len();
    let top = m.min(dim);
    let mut spent: u128 = 0;
    for k in (1..=top).rev() {
        let count = linalg::binomial(m, k);
        spent += count;
        if spent > cfg.exhaustive_limit as u128 {
            return bt_greedy(columns, min_sv_target);
        }
        let mut combos = Combinations::new(m, k);
        let mut best: Option<(Vec<usize>, T)> = None;
        while let Some(c) = combos.next() {
            let v = sigma_min_of(columns, c);
            if v < min_sv_target {
                continue;
            }
            let replace = match &best {
                None => true,
                Some((_, b)) => v > *b + tie_tol(v, *b),
            };
            if replace {
                best = Some((c.to_vec(), v));
            }
        }
        if let Some((indices, achieved_value)) = best {
            return Ok(SubsetSelection {
                indices,
                achieved_value,
                method: SelectionMethod::Exhaustive,
            });
        }
    }
    Ok(SubsetSelection {
        indices: Vec::new(),
        achieved_value: T::zero(),
        method: SelectionMethod::Exhaustive,
    })
}

/// Greedy forward selection: add the column that keeps `σ_min` largest while
/// it stays at or above the target.
pub fn bt_greedy<T: Scalar>(columns: &[Vec<T>], min_sv_target: T) -> Result<SubsetSelection<T>> {
    let dim = check_system(columns)?;
    check_unit(columns)?;
    let m = columns.len();
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = T::zero();
    while chosen.len() < dim.min(m) {
        let mut best: Option<(usize, T)> = None;
        for c in 0..m {
            if chosen.contains(&c) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(c);
            let v = sigma_min_of(columns, &trial);
            let replace = match best {
                None => true,
                Some((_, b)) => v > b + tie_tol(v, b),
            };
            if replace {
                best = Some((c, v));
            }
        }
        match best {
            Some((c, v)) if v >= min_sv_target => {
                chosen.push(c);
                current = v;
            }
            _ => break,
        }
    }
    chosen.sort_unstable();
    let achieved_value = if chosen.is_empty() {
        T::zero()
    } else {
        current
    };
    Ok(SubsetSelection {
        indices: chosen,
        achieved_value,
        method: SelectionMethod::Greedy,
    })
}

fn check_unit<T: Scalar>(columns: &[Vec<T>]) -> Result<()> {
    let tol = T::tol(1e-8);
    for (j, c) in columns.iter().enumerate() {
        let nc = linalg::norm(c);
        if (nc - T::one()).abs() > tol {
            return Err(FrameError::Precondition(format!(
                "column {j} has norm {nc}, expected unit norm"
            )));
        }
    }
    Ok(())
}

/// Result of the zero-diagonal restriction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtSelection<T> {
    pub selection: SubsetSelection<T>,
    /// `c5 · δ^(1/2)`.
    pub bound: T,
    /// Whether `‖R_σ T R_σ‖ <= bound`.
    pub within_bound: bool,
    /// Smallest cardinality the selection was allowed to shrink to.
    pub min_cardinality: usize,
}

/// Minimum cardinality for the zero-diagonal restriction: `ceil(δ n / 4)`,
/// and never below two (a single index always has restricted norm zero).
pub fn kt_min_cardinality(n: usize, delta: f64) -> usize {
    let k = (delta * n as f64 / 4.0 - 1e-12).ceil().max(0.0) as usize;
    k.max(2.min(n)).min(n)
}

/// Restricts a zero-diagonal operator of norm one to a principal submatrix
/// of small norm.
///
/// Exact search minimizes `‖R_σ T R_σ‖` at the minimum cardinality. The
/// greedy pass removes indices one at a time, always the one that lowers
/// the restricted norm most, until the norm meets `c5 · δ^(1/2)` or the
/// minimum cardinality is reached.
pub fn kt_select<T: Scalar>(t: &Matrix<T>, delta: f64, cfg: &SelectionConfig) -> Result<KtSelection<T>> {
    cfg.validate()?;
    if !t.is_square() || t.rows() == 0 {
        return Err(FrameError::InvalidParameter(
            "zero-diagonal restriction needs a nonempty square matrix".into(),
        ));
    }
    let n = t.rows();
    if !(delta >= 1.0 / n as f64 - 1e-15 && delta < 1.0) {
        return Err(FrameError::InvalidParameter(format!(
            "delta = {delta} outside [1/{n}, 1)"
        )));
    }
    let diag_tol = T::tol(1e-12);
    if let Some((i, d)) = t.diagonal().into_iter().enumerate().find(|(_, d)| d.abs() > diag_tol) {
        return Err(FrameError::Precondition(format!(
            "diagonal entry {i} is {d}, expected zero"
        )));
    }
    let bound = T::lit(cfg.c5 * delta.sqrt());
    let min_cardinality = kt_min_cardinality(n, delta);
    let norm = t.spectral_norm();
    if norm == T::zero() {
        return Ok(KtSelection {
            selection: SubsetSelection {
                indices: (0..n).collect(),
                achieved_value: T::zero(),
                method: SelectionMethod::Exhaustive,
            },
            bound,
            within_bound: true,
            min_cardinality,
        });
    }
    if (norm - T::one()).abs() > T::tol(1e-6) {
        return Err(FrameError::Precondition(format!(
            "operator norm is {norm}, normalize to one first"
        )));
    }
    let selection = if linalg::binomial(n, min_cardinality) <= cfg.exhaustive_limit as u128 {
        brute_force_subset_oracle(
            Objective::MinRestrictedNorm(t),
            min_cardinality,
            cfg.exhaustive_limit,
        )?
    } else {
        kt_greedy(t, delta, cfg.c5)?
    };
    let within_bound = selection.achieved_value <= bound;
    Ok(KtSelection {
        selection,
        bound,
        within_bound,
        min_cardinality,
    })
}

/// Greedy backward elimination for the zero-diagonal restriction.
pub fn kt_greedy<T: Scalar>(t: &Matrix<T>, delta: f64, c5: f64) -> Result<SubsetSelection<T>> {
    if !t.is_square() {
        return Err(FrameError::InvalidParameter("matrix is not square".into()));
    }
    let n = t.rows();
    let bound = T::lit(c5 * delta.sqrt());
    let floor = kt_min_cardinality(n, delta);
    let mut alive: Vec<usize> = (0..n).collect();
    let mut current = restricted_norm(t, &alive);
    while current > bound && alive.len() > floor {
        let mut best: Option<(usize, T)> = None;
        for pos in 0..alive.len() {
            let mut trial = alive.clone();
            trial.remove(pos);
            let v = restricted_norm(t, &trial);
            let replace = match best {
                None => true,
                Some((_, b)) => v < b - tie_tol(v, b),
            };
            if replace {
                best = Some((pos, v));
            }
        }
        let (pos, v) = best.expect("nonempty");
        alive.remove(pos);
        current = v;
    }
    Ok(SubsetSelection {
        indices: alive,
        achieved_value: current,
        method: SelectionMethod::Greedy,
    })
}

/// Largest singular value of the selected columns scaled by `√(m/n)`, the
/// restated restriction-norm quantity for a 1-Hilbertian system of `m`
/// vectors in `R^n`.
pub fn scaled_hilbertian<T: Scalar>(columns: &[Vec<T>], selection: &SubsetSelection<T>) -> T {
    let m = T::from_usize_lossy(columns.len());
    let n = T::from_usize_lossy(columns.first().map_or(1, |c| c.len()));
    (m / n).sqrt() * sigma_max_of(columns, &selection.indices)
}
