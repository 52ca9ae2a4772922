//! Rank selection from a tolerance and the two rank-`P` approximations of
//! the generator:
//!
//! - **svd**: keep the `P` largest singular triplets, `T = U_P`.
//! - **samp**: copy the rows of `B` at the selected nodes and project every
//!   other row onto their span, `T = B_samp[:, S]`.
//!
//! The samp approximation agrees with `B` on the selected rows, so the
//! sampling term of the reconstruction error vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm2, svd, DenseMatrix};

/// Rows of the selected block are treated as dependent below this
/// `sigma_min / sigma_max` ratio.
pub const ROW_BLOCK_RANK_TOL: f64 = 1e-10;

const GRAM_SCHMIDT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Svd,
    Samp,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Svd => "svd",
            Scheme::Samp => "samp",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSelection {
    pub rank: usize,
    pub epsilon: f64,
    /// `sum_{i > P} sigma_i^2`
    pub discarded_energy: f64,
    /// `sum_i sigma_i^2`
    pub total_energy: f64,
}

/// Smallest `P >= 1` with `sum_{i > P} sigma_i^2 <= epsilon^2 sum_i sigma_i^2`.
pub fn select_rank(singular_values: &[f64], epsilon: f64) -> Result<RankSelection> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if singular_values.is_empty()
        || singular_values.iter().any(|s| !s.is_finite() || *s < 0.0)
        || singular_values.windows(2).any(|w| w[0] < w[1])
    {
        return Err(Error::UnsortedSpectrum);
    }
    let n = singular_values.len();
    // tail[j] = sum_{i >= j} sigma_i^2 (0-based), summed smallest first
    let mut tail = vec![0.0; n + 1];
    for j in (0..n).rev() {
        tail[j] = tail[j + 1] + singular_values[j] * singular_values[j];
    }
    let total = tail[0];
    if total == 0.0 {
        return Err(Error::ZeroSpectrum);
    }
    let budget = epsilon * epsilon * total;
    let rank = (1..=n).find(|&p| tail[p] <= budget).unwrap_or(n);
    Ok(RankSelection {
        rank,
        epsilon,
        discarded_energy: tail[rank],
        total_energy: total,
    })
}

/// A rank-`P` approximation `B_tilde = T F` of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowRankFactorization {
    pub scheme: Scheme,
    pub rank: usize,
    pub b_tilde: DenseMatrix,
    /// `N x P`, full column rank.
    pub t_factor: DenseMatrix,
    /// Required for samp; filled in for svd once selection has run.
    pub selected_set: Option<Vec<usize>>,
}

fn check_rank(b: &DenseMatrix, rank: usize) -> Result<()> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    if rank == 0 || rank > b.rows() {
        return Err(Error::InvalidRank { rank, n: b.rows() });
    }
    Ok(())
}

/// Truncated SVD keeping the `rank` largest singular values.
pub fn approx_svd(b: &DenseMatrix, rank: usize) -> Result<LowRankFactorization> {
    check_rank(b, rank)?;
    let decomposition = svd(b)?;
    let keep: Vec<usize> = (0..rank).collect();
    Ok(LowRankFactorization {
        scheme: Scheme::Svd,
        rank,
        b_tilde: decomposition.truncated(rank),
        t_factor: decomposition.left.select_columns(&keep)?,
        selected_set: None,
    })
}

pub(crate) fn validate_selection(selected: &[usize], n: usize) -> Result<()> {
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut seen = vec![false; n];
    for &i in selected {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// Orthonormal basis of the span of `rows` by Gram-Schmidt with one
/// reorthogonalization pass. Fails if a row is dependent on its predecessors.
fn orthonormal_row_basis(rows: &DenseMatrix, selected: &[usize]) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rows.rows());
    for i in 0..rows.rows() {
        let original = rows.row(i);
        let mut v = original.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, qk)| *x -= c * qk);
            }
        }
        let residual = norm2(&v);
        let scale = norm2(original);
        if scale == 0.0 || residual <= GRAM_SCHMIDT_TOL * scale {
            return Err(Error::RankDeficientRowBlock {
                selected: selected.to_vec(),
                ratio: if scale == 0.0 { 0.0 } else { residual / scale },
            });
        }
        basis.push(v.into_iter().map(|x| x / residual).collect());
    }
    Ok(basis)
}

/// Row-copy-plus-projection approximation for the selected nodes.
pub fn approx_samp(b: &DenseMatrix, selected: &[usize]) -> Result<LowRankFactorization> {
    let n = b.rows();
    check_rank(b, selected.len())?;
    validate_selection(selected, n)?;

    let block = b.select_rows(selected)?;
    let block_svd = svd(&block)?;
    let ratio = if block_svd.largest() == 0.0 {
        0.0
    } else {
        block_svd.smallest() / block_svd.largest()
    };
    if ratio <= ROW_BLOCK_RANK_TOL {
        return Err(Error::RankDeficientRowBlock {
            selected: selected.to_vec(),
            ratio,
        });
    }
    let basis = orthonormal_row_basis(&block, selected)?;

    let mut b_tilde = b.clone();
    for i in (0..n).filter(|i| !selected.contains(i)) {
        let row = b.row(i);
        let mut projected = vec![0.0; b.cols()];
        for q in &basis {
            let c = dot(row, q);
            projected.iter_mut().zip(q).for_each(|(p, qk)| *p += c * qk);
        }
        b_tilde.row_mut(i).copy_from_slice(&projected);
    }
    let t_factor = b_tilde.select_columns(selected)?;
    Ok(LowRankFactorization {
        scheme: Scheme::Samp,
        rank: selected.len(),
        b_tilde,
        t_factor,
        selected_set: Some(selected.to_vec()),
    })
}

/// Least-squares coefficient matrix `F` minimizing `||T F - B_tilde||_F`.
///
/// Diagnostic only; reconstruction never needs `F`.
pub fn compute_f(b_tilde: &DenseMatrix, t_factor: &DenseMatrix) -> Result<DenseMatrix> {
    if t_factor.rows() != b_tilde.rows() {
        return Err(Error::DimensionMismatch {
            op: "compute_f",
            expected: (b_tilde.rows(), t_factor.cols()),
            got: t_factor.shape(),
        });
    }
    let decomposition = svd(t_factor)?;
    let ratio = if decomposition.largest() == 0.0 {
        0.0
    } else {
        decomposition.smallest() / decomposition.largest()
    };
    if decomposition.singular_values.len() < t_factor.cols() || ratio <= ROW_BLOCK_RANK_TOL {
        return Err(Error::RankDeficientFactor { ratio });
    }
    // F = V diag(1/sigma) U^T B_tilde
    let ut_b = decomposition.left.transpose().matmul(b_tilde)?;
    let mut scaled = ut_b;
    for (r, &s) in decomposition.singular_values.iter().enumerate() {
        scaled.row_mut(r).iter_mut().for_each(|v| *v /= s);
    }
    decomposition.right.matmul(&scaled)
}

/// Columns of `f` that equal a standard basis vector within `tol`, as
/// `(column, row of the unit entry)` pairs.
pub fn identity_columns(f: &DenseMatrix, tol: f64) -> Vec<(usize, usize)> {
    (0..f.cols())
        .filter_map(|j| {
            let col = f.column(j);
            let (k, _) = col
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
            let is_unit = col
                .iter()
                .enumerate()
                .all(|(i, &v)| (v - if i == k { 1.0 } else { 0.0 }).abs() <= tol);
            is_unit.then_some((j, k))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_node() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn select_rank_examples() {
        assert_eq!(select_rank(&[2.0, 0.0], 0.1).unwrap().rank, 1);
        assert_eq!(select_rank(&[1.0, 1.0, 1.0, 1.0], 0.01).unwrap().rank, 4);
        let r = select_rank(&[1.0, 0.1], 0.99).unwrap();
        assert_eq!(r.rank, 1);
        assert_abs_diff_eq!(r.discarded_energy, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(r.total_energy, 1.01, epsilon = 1e-15);
    }

    #[test]
    fn select_rank_errors() {
        assert!(matches!(
            select_rank(&[0.0, 0.0], 0.1),
            Err(Error::ZeroSpectrum)
        ));
        assert!(matches!(
            select_rank(&[1.0], 1.5),
            Err(Error::InvalidEpsilon(_))
        ));
        assert!(matches!(
            select_rank(&[1.0], 0.0),
            Err(Error::InvalidEpsilon(_))
        ));
        assert!(matches!(
            select_rank(&[1.0, 2.0], 0.1),
            Err(Error::UnsortedSpectrum)
        ));
    }

    #[test]
    fn svd_full_rank_is_exact() {
        let b = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let f = approx_svd(&b, 2).unwrap();
        assert!(f.b_tilde.sub(&b).unwrap().frobenius_norm() <= 1e-10 * b.frobenius_norm());
    }

    #[test]
    fn svd_truncates_diagonal() {
        let b = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let f = approx_svd(&b, 2).unwrap();
        let expected = DenseMatrix::from_diag(&[3.0, 2.0, 0.0]);
        assert!(f.b_tilde.sub(&expected).unwrap().frobenius_norm() < 1e-14);
        assert_abs_diff_eq!(
            b.sub(&f.b_tilde).unwrap().frobenius_norm(),
            1.0,
            epsilon = 1e-14
        );
        assert_eq!(f.t_factor.shape(), (3, 2));
    }

    #[test]
    fn svd_rank_one_exact() {
        let u = [1.0, 2.0, -1.0];
        let v = [0.5, -1.0, 3.0];
        let rows: Vec<Vec<f64>> = u
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        let b = DenseMatrix::from_rows(&rows).unwrap();
        let f = approx_svd(&b, 1).unwrap();
        assert!(f.b_tilde.sub(&b).unwrap().frobenius_norm() <= 1e-10);
    }

    #[test]
    fn samp_full_selection_is_exact() {
        let b =
            DenseMatrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]).unwrap();
        let f = approx_samp(&b, &[0, 1, 2]).unwrap();
        assert_eq!(f.b_tilde, b);
    }

    #[test]
    fn samp_two_node_collinear() {
        let f = approx_samp(&two_node(), &[0]).unwrap();
        assert_eq!(f.rank, 1);
        assert_eq!(f.b_tilde.row(0), two_node().row(0));
        assert_abs_diff_eq!(f.b_tilde[(1, 0)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.b_tilde[(1, 1)], 1.0, epsilon = 1e-15);
        assert_eq!(f.t_factor.shape(), (2, 1));
    }

    #[test]
    fn samp_rejects_dependent_rows() {
        let err = approx_samp(&two_node(), &[0, 1]).unwrap_err();
        assert!(matches!(err, Error::RankDeficientRowBlock { .. }));
        let dup =
            DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(
            approx_samp(&dup, &[0, 1]),
            Err(Error::RankDeficientRowBlock { .. })
        ));
        assert!(matches!(
            approx_samp(&dup, &[0, 0]),
            Err(Error::DuplicateIndex(0))
        ));
        assert!(matches!(
            approx_samp(&dup, &[5]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn f_for_full_rank_t() {
        let b = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let f = compute_f(&b, &b).unwrap();
        assert!(f.sub(&DenseMatrix::identity(2)).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn f_for_svd_scheme_is_sigma_vt() {
        let b =
            DenseMatrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]]).unwrap();
        let fac = approx_svd(&b, 2).unwrap();
        let f = compute_f(&fac.b_tilde, &fac.t_factor).unwrap();
        let s = svd(&b).unwrap();
        for r in 0..2 {
            for j in 0..3 {
                let expected = s.singular_values[r] * s.right[(j, r)];
                assert_abs_diff_eq!(f[(r, j)], expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn f_for_samp_two_node() {
        let fac = approx_samp(&two_node(), &[0]).unwrap();
        let f = compute_f(&fac.b_tilde, &fac.t_factor).unwrap();
        assert_abs_diff_eq!(f[(0, 0)], 1.0, epsilon = 1e-15);
        let residual = fac
            .t_factor
            .matmul(&f)
            .unwrap()
            .sub(&fac.b_tilde)
            .unwrap()
            .frobenius_norm();
        assert!(residual < 1e-14);
        assert_eq!(identity_columns(&f, 1e-9), vec![(0, 0)]);
    }

    #[test]
    fn f_rejects_rank_deficient_t() {
        let t = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(
            compute_f(&t, &t),
            Err(Error::RankDeficientFactor { .. })
        ));
    }
}
