//! Greedy selections measured against exhaustive optima on small random
//! instances.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Matrix;
use crate::random::{self, Gaussian};
use crate::selection::{self, Objective, SelectionConfig};

/// Allowed ratio between greedy and exhaustive norm objectives.
pub const GREEDY_SLACK: f64 = 2.0;
/// Target used for the restricted-invertibility comparison.
pub const BT_TARGET: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub lunin_greedy: f64,
    pub lunin_exact: f64,
    pub bt_greedy_size: usize,
    pub bt_exact_size: usize,
}

impl OracleInstance {
    pub fn lunin_within_slack(&self) -> bool {
        self.lunin_greedy <= GREEDY_SLACK * self.lunin_exact * (1.0 + 1e-12)
    }

    pub fn bt_within_one(&self) -> bool {
        self.bt_exact_size <= self.bt_greedy_size + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub instances: Vec<OracleInstance>,
    pub lunin_within_slack: usize,
    pub bt_within_one: usize,
}

/// Random instance shape for index `i`: `2 <= n <= 4`, `n < m <= 12`.
fn shape(seed: u64) -> (usize, usize) {
    let mut g = Gaussian::new(seed);
    let n = 2 + (g.uniform() * 3.0) as usize;
    let m = n + 1 + (g.uniform() * (12 - n) as f64) as usize;
    (n.min(4), m.min(12))
}

/// Restriction-norm selection on row-orthonormal `n x m` matrices with
/// target `n`, and restricted invertibility on `m` random unit vectors with
/// target [`BT_TARGET`], greedy against exhaustive.
pub fn compare_with_oracles(seed: u64, count: usize) -> Result<OracleComparison> {
    let exact_cfg = SelectionConfig::default();
    let mut instances = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
        let (n, m) = shape(s);
        let cols = random::random_row_orthonormal::<f64>(s, n, m).columns();
        let greedy = selection::lunin_greedy(&cols, n)?;
        let exact = selection::brute_force_subset_oracle(
            Objective::MinSigmaMax(&cols),
            n,
            exact_cfg.exhaustive_limit,
        )?;
        let units = random::random_unit_vectors::<f64>(s ^ 0x5bd1_e995, n, m);
        let bt_greedy = selection::bt_greedy(&units, BT_TARGET)?;
        let bt_exact = selection::bt_select(&units, BT_TARGET, &exact_cfg)?;
        instances.push(OracleInstance {
            seed: s,
            n,
            m,
            lunin_greedy: greedy.achieved_value,
            lunin_exact: exact.achieved_value,
            bt_greedy_size: bt_greedy.len(),
            bt_exact_size: bt_exact.len(),
        });
    }
    Ok(OracleComparison {
        lunin_within_slack: instances.iter().filter(|x| x.lunin_within_slack()).count(),
        bt_within_one: instances.iter().filter(|x| x.bt_within_one()).count(),
        instances,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtInstance {
    pub seed: u64,
    pub size: usize,
    pub greedy: f64,
    pub exact: f64,
}

/// Random symmetric zero-diagonal matrix of norm one.
pub fn random_zero_diagonal(seed: u64, n: usize) -> Matrix<f64> {
    let mut g = Gaussian::new(seed);
    let mut t = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = g.sample();
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
    }
    let norm = t.spectral_norm();
    t.scale(1.0 / norm)
}

/// Greedy zero-diagonal restriction against the exhaustive optimum at the
/// cardinality the greedy pass stopped at.
pub fn compare_kt(seed: u64, count: usize, n: usize, delta: f64) -> Result<Vec<KtInstance>> {
    let cfg = SelectionConfig::default();
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
            let t = random_zero_diagonal(s, n);
            let greedy = selection::kt_greedy(&t, delta, cfg.c5)?;
            let exact = selection::brute_force_subset_oracle(
                Objective::MinRestrictedNorm(&t),
                greedy.len(),
                cfg.exhaustive_limit,
            )?;
            Ok(KtInstance {
                seed: s,
                size: greedy.len(),
                greedy: greedy.achieved_value,
                exact: exact.achieved_value,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_stay_in_range() {
        for s in 0..200 {
            let (n, m) = shape(s);
            assert!((2..=4).contains(&n) && m > n && m <= 12, "{n} {m}");
        }
    }

    #[test]
    fn comparison_is_deterministic() {
        let a = compare_with_oracles(1, 5).unwrap();
        let b = compare_with_oracles(1, 5).unwrap();
        assert_eq!(a, b);
        for x in &a.instances {
            assert!(x.lunin_exact <= x.lunin_greedy * (1.0 + 1e-12));
            assert!(x.bt_greedy_size <= x.bt_exact_size);
        }
    }

    #[test]
    fn zero_diagonal_instances() {
        let t = random_zero_diagonal(3, 6);
        assert!(t.diagonal().iter().all(|&d| d == 0.0));
        assert!((t.spectral_norm() - 1.0).abs() < 1e-12);
        let r = compare_kt(0, 3, 8, 0.5).unwrap();
        for x in r {
            assert!(x.exact <= x.greedy * (1.0 + 1e-12));
        }
    }
}
