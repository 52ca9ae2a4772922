//! Dense real-matrix kernel.
//!
//! Everything downstream (Laplacians, generators, low-rank factors, sampling
//! operators) is a small dense matrix, so this module keeps a single
//! row-major [`DenseMatrix`] type plus the handful of decompositions the
//! pipeline needs:
//!
//! - [`svd`]: one-sided (Hestenes) Jacobi SVD. Accurate on the small,
//!   rank-deficient symmetric matrices produced by Laplacian polynomials.
//! - [`solve_square`]: LU with partial pivoting, guarded by a condition
//!   estimate so that singular sampling operators fail loudly.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest condition number accepted by [`solve_square`]: `1 / sqrt(eps)`.
pub const MAX_CONDITION: f64 = 67_108_864.0;

const MAX_SWEEPS: usize = 100;

/// Row-major dense matrix of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "dimensions must be positive, got {rows} x {cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{rows} x {cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != n_cols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(n_rows, n_cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Build from column vectors of equal length.
    pub(crate) fn from_columns(columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let rows = columns[0].len();
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                expected: (self.cols, rhs.cols),
                got: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &DenseMatrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.shape(),
                got: rhs.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm of `self - self^T`.
    pub fn symmetry_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.sub(&self.transpose())?.frobenius_norm())
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    n: self.rows,
                });
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.cols, data)
    }

    /// Columns at `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&j) = indices.iter().find(|&&j| j >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: self.cols,
            });
        }
        let mut data = Vec::with_capacity(indices.len() * self.rows);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(indices.iter().map(|&j| row[j]));
        }
        Self::new(self.rows, indices.len(), data)
    }

    /// Scale each nonzero row to unit l2 norm. All-zero rows stay zero.
    pub fn row_normalize(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.rows {
            let row = out.row_mut(i);
            let norm = norm2(row);
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq((0..self.rows).map(|i| self.row(i)))
    }
}

impl<'de> Deserialize<'de> for DenseMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        DenseMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    // scaled to avoid overflow/underflow on extreme entries
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * sum.sqrt()
}

/// Thin singular value decomposition `M = U diag(sigma) V^T`.
///
/// For an `m x n` input with `k = min(m, n)`, `left` is `m x k` and `right`
/// is `n x k`, both with orthonormal columns. Square inputs therefore get
/// full orthogonal factors.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub left: DenseMatrix,
    pub right: DenseMatrix,
}

impl SvdResult {
    /// `U_P diag(sigma_P) V_P^T` using the leading `rank` triplets.
    pub fn truncated(&self, rank: usize) -> DenseMatrix {
        let (m, n) = (self.left.rows(), self.right.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for r in 0..rank.min(self.singular_values.len()) {
            let s = self.singular_values[r];
            for i in 0..m {
                let us = self.left[(i, r)] * s;
                if us == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += us * self.right[(j, r)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.truncated(self.singular_values.len())
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// `sigma_max / sigma_min`, infinite when the smallest value is zero.
    pub fn condition(&self) -> f64 {
        let (hi, lo) = (self.largest(), self.smallest());
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// One-sided Jacobi SVD.
pub fn svd(m: &DenseMatrix) -> Result<SvdResult> {
    if m.rows() < m.cols() {
        let t = svd_tall(&m.transpose())?;
        return Ok(SvdResult {
            singular_values: t.singular_values,
            left: t.right,
            right: t.left,
        });
    }
    svd_tall(m)
}

fn svd_tall(m: &DenseMatrix) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let tol = f64::EPSILON * (rows as f64).max(4.0);

    let mut converged = cols == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            rows,
            cols,
            sweeps: MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = a.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        let col: Vec<f64> = a[j].iter().map(|x| x / s).collect();
        if s > 0.0 && col.iter().all(|x| x.is_finite()) {
            u_cols.push(col);
        } else {
            u_cols.push(vec![0.0; rows]);
            pending.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &pending);
    let v_cols: Vec<Vec<f64>> = order.iter().map(|&j| v[j].clone()).collect();

    Ok(SvdResult {
        singular_values,
        left: DenseMatrix::from_columns(&u_cols),
        right: DenseMatrix::from_columns(&v_cols),
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fill the columns listed in `pending` with unit vectors orthogonal to all
/// other columns, using the standard basis vector with the largest residual.
fn complete_orthonormal(cols: &mut [Vec<f64>], pending: &[usize]) {
    let rows = cols[0].len();
    for &slot in pending {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..rows {
            let mut e = vec![0.0; rows];
            e[k] = 1.0;
            for _ in 0..2 {
                for (j, other) in cols.iter().enumerate() {
                    // unfilled pending columns are still zero and drop out
                    if j == slot {
                        continue;
                    }
                    let proj = dot(&e, other);
                    e.iter_mut().zip(other).for_each(|(x, o)| *x -= proj * o);
                }
            }
            let n = norm2(&e);
            if best.as_ref().is_none_or(|(b, _)| n > *b) {
                best = Some((n, e));
            }
        }
        let (n, e) = best.expect("at least one row");
        cols[slot] = e.into_iter().map(|x| x / n).collect();
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(svd(m)?.largest())
}

/// 2-norm condition number `sigma_max / sigma_min` of a square matrix.
pub fn condition_number(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(svd(a)?.condition())
}

/// Solve `a x = b` for square `a` using LU with partial pivoting.
///
/// Fails with [`Error::SingularSystem`] when the condition estimate of `a`
/// exceeds [`MAX_CONDITION`].
pub fn solve_square(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "solve_square",
            expected: (n, b.cols()),
            got: b.shape(),
        });
    }
    let condition = condition_number(a)?;
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }

    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
            .unwrap_or(k);
        if lu[(pivot, k)] == 0.0 {
            return Err(Error::SingularSystem { condition });
        }
        if pivot != k {
            swap_rows(&mut lu, k, pivot);
            swap_rows(&mut x, k, pivot);
        }
        for i in k + 1..n {
            let factor = lu[(i, k)] / lu[(k, k)];
            if factor == 0.0 {
                continue;
            }
            lu[(i, k)] = factor;
            for j in k + 1..n {
                lu[(i, j)] -= factor * lu[(k, j)];
            }
            for j in 0..x.cols() {
                x[(i, j)] -= factor * x[(k, j)];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols() {
            let mut acc = x[(k, j)];
            for i in k + 1..n {
                acc -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / lu[(k, k)];
        }
    }
    Ok(x)
}

fn swap_rows(m: &mut DenseMatrix, a: usize, b: usize) {
    let cols = m.cols;
    for j in 0..cols {
        m.data.swap(a * cols + j, b * cols + j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn orthonormality_defect(m: &DenseMatrix) -> f64 {
        let g = m.transpose().matmul(m).unwrap();
        g.sub(&DenseMatrix::identity(g.rows()))
            .unwrap()
            .frobenius_norm()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn svd_of_two_node_laplacian() {
        let m = DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let s = svd(&m).unwrap();
        assert_abs_diff_eq!(s.singular_values[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.singular_values[1], 0.0, epsilon = 1e-14);
        assert!(orthonormality_defect(&s.left) <= 2e-10);
        assert!(orthonormality_defect(&s.right) <= 2e-10);
        assert!(s.reconstruct().sub(&m).unwrap().frobenius_norm() <= 1e-10 * 2.0);
    }

    #[test]
    fn svd_identity_and_zero() {
        let s = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
        let z = svd(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
        assert!(orthonormality_defect(&z.left) <= 1e-12);
        assert!(orthonormality_defect(&z.right) <= 1e-12);
    }

    #[test]
    fn svd_wide_and_tall() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let s = svd(&m).unwrap();
        assert_eq!(s.left.shape(), (2, 2));
        assert_eq!(s.right.shape(), (3, 2));
        assert!(s.reconstruct().sub(&m).unwrap().frobenius_norm() < 1e-12);
        let t = svd(&m.transpose()).unwrap();
        assert_abs_diff_eq!(t.singular_values[0], s.singular_values[0], epsilon = 1e-12);
    }

    #[test]
    fn solve_square_examples() {
        let b = DenseMatrix::from_rows(&[[3.0], [4.0]]).unwrap();
        assert_eq!(solve_square(&DenseMatrix::identity(2), &b).unwrap(), b);

        let a = DenseMatrix::from_diag(&[2.0, 4.0]);
        let b = DenseMatrix::from_rows(&[[2.0], [8.0]]).unwrap();
        let x = solve_square(&a, &b).unwrap();
        assert_abs_diff_eq!(x[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[(1, 0)], 2.0, epsilon = 1e-15);

        let err = solve_square(&DenseMatrix::zeros(2, 2), &b).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { condition } if condition.is_infinite()));
    }

    #[test]
    fn solve_square_needs_pivoting() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[5.0], [7.0]]).unwrap();
        let x = solve_square(&a, &b).unwrap();
        assert_eq!(x.to_rows(), vec![vec![7.0], vec![5.0]]);
    }

    #[test]
    fn row_normalize_keeps_zero_rows() {
        let m = DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        let n = m.row_normalize();
        assert_eq!(n.row(0), &[0.6, 0.8]);
        assert_eq!(n.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn selection_helpers() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(
            m.select_rows(&[2, 0]).unwrap().to_rows(),
            vec![vec![5.0, 6.0], vec![1.0, 2.0]]
        );
        assert_eq!(
            m.select_columns(&[1]).unwrap().column(0),
            vec![2.0, 4.0, 6.0]
        );
        assert!(m.select_rows(&[3]).is_err());
        assert_abs_diff_eq!(
            spectral_norm(&DenseMatrix::from_diag(&[1.0, -5.0])).unwrap(),
            5.0
        );
    }

    #[test]
    fn serde_nested_arrays() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.5]]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[1.0,2.0],[3.0,4.5]]");
        let back: DenseMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
