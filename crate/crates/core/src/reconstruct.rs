//! Subsampling, reconstruction `Y_hat = T (A_S T)^{-1} Y_S`, and error
//! accounting.
//!
//! The reconstruction error splits by the triangle inequality into a
//! low-rank term `||(B - B_tilde) C||_F` and a sampling term
//! `||T (A_S T)^{-1} (Y_tilde_S - Y_S)||_F`; both are aggregated over time
//! with Frobenius norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::SignalMatrix;
use crate::lowrank::{validate_selection, LowRankFactorization, Scheme};
use crate::numerics::{condition_number, solve_square, DenseMatrix};

/// Floor for reported errors in dB; exact reconstructions report this value.
pub const DB_FLOOR: f64 = -400.0;

/// Relative slack for the triangle bound and the interpolation property.
pub const BOUND_SLACK: f64 = 1e-9;

/// Rows of the `N x N` identity indexed by the selected nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsamplingOperator {
    n: usize,
    selected: Vec<usize>,
}

impl SubsamplingOperator {
    pub fn new(n: usize, selected: Vec<usize>) -> Result<Self> {
        validate_selection(&selected, n)?;
        Ok(Self { n, selected })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// The explicit `P x N` selection matrix.
    pub fn to_matrix(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.selected.len(), self.n);
        for (r, &i) in self.selected.iter().enumerate() {
            a[(r, i)] = 1.0;
        }
        a
    }
}

/// `P x T` rows of `y` at the selected nodes, in selection order.
pub fn subsample(y: &SignalMatrix, op: &SubsamplingOperator) -> Result<SignalMatrix> {
    if y.nodes() != op.n() {
        return Err(Error::DimensionMismatch {
            op: "subsample",
            expected: (op.n(), y.samples()),
            got: y.values().shape(),
        });
    }
    Ok(SignalMatrix::new(y.values().select_rows(op.selected())?))
}

fn sampled_t(fac: &LowRankFactorization, op: &SubsamplingOperator) -> Result<DenseMatrix> {
    if fac.t_factor.rows() != op.n() || fac.t_factor.cols() != op.len() {
        return Err(Error::DimensionMismatch {
            op: "A_S T",
            expected: (op.n(), op.len()),
            got: fac.t_factor.shape(),
        });
    }
    fac.t_factor.select_rows(op.selected())
}

fn solve_sampled(
    a_st: &DenseMatrix,
    rhs: &DenseMatrix,
    op: &SubsamplingOperator,
) -> Result<DenseMatrix> {
    solve_square(a_st, rhs).map_err(|e| match e {
        Error::SingularSystem { condition } => Error::SingularSamplingOperator {
            condition,
            selected: op.selected().to_vec(),
        },
        other => other,
    })
}

/// `Y_hat = T (A_S T)^{-1} Y_S`.
pub fn reconstruct(
    y_s: &SignalMatrix,
    fac: &LowRankFactorization,
    op: &SubsamplingOperator,
) -> Result<SignalMatrix> {
    let a_st = sampled_t(fac, op)?;
    if y_s.nodes() != op.len() {
        return Err(Error::DimensionMismatch {
            op: "reconstruct",
            expected: (op.len(), y_s.samples()),
            got: y_s.values().shape(),
        });
    }
    let coefficients = solve_sampled(&a_st, y_s.values(), op)?;
    Ok(SignalMatrix::new(fac.t_factor.matmul(&coefficients)?))
}

/// `20 log10(err / reference)`, clamped to `[DB_FLOOR, -DB_FLOOR]`.
pub fn normalized_error_db(err: f64, reference: f64) -> f64 {
    if err == 0.0 {
        return DB_FLOOR;
    }
    if reference == 0.0 {
        return -DB_FLOOR;
    }
    (20.0 * (err / reference).log10()).clamp(DB_FLOOR, -DB_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSplit {
    /// `||(B - B_tilde) C||_F`
    pub low_rank_term: f64,
    /// `||T (A_S T)^{-1} (Y_tilde_S - Y_S)||_F`
    pub sampling_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub scheme: Scheme,
    pub rank: usize,
    pub selected: Vec<usize>,
    /// `10 log10(||Y - Y_hat||_F^2 / ||Y||_F^2)`
    pub error_db: f64,
    /// `||Y - Y_hat||_F / ||Y||_F`
    pub error_ratio: f64,
    pub per_time_error_db: Vec<f64>,
    pub error_split: ErrorSplit,
    pub condition_ast: f64,
    /// `||A_S Y_hat - Y_S||_F / ||Y_S||_F`
    pub interpolation_residual: f64,
    #[serde(skip)]
    pub y_hat: Option<SignalMatrix>,
}

/// Error accounting for one reconstruction. Fails with
/// [`Error::InvariantViolation`] if the triangle bound, the interpolation
/// property, or (for samp) the vanishing sampling term does not hold.
pub fn error_report(
    y: &SignalMatrix,
    y_hat: &SignalMatrix,
    b: &DenseMatrix,
    fac: &LowRankFactorization,
    c: &SignalMatrix,
    op: &SubsamplingOperator,
) -> Result<ReconstructionReport> {
    if y.values().shape() != y_hat.values().shape() {
        return Err(Error::DimensionMismatch {
            op: "error_report",
            expected: y.values().shape(),
            got: y_hat.values().shape(),
        });
    }
    let y_norm = y.values().frobenius_norm();
    if y_norm == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let residual = y.values().sub(y_hat.values())?;
    let err = residual.frobenius_norm();

    let low_rank_term = b.sub(&fac.b_tilde)?.matmul(c.values())?.frobenius_norm();
    let a_st = sampled_t(fac, op)?;
    let y_tilde = fac.b_tilde.matmul(c.values())?;
    let mismatch = y_tilde
        .select_rows(op.selected())?
        .sub(&y.values().select_rows(op.selected())?)?;
    let sampling_term = fac
        .t_factor
        .matmul(&solve_sampled(&a_st, &mismatch, op)?)?
        .frobenius_norm();
    let condition_ast = condition_number(&a_st)?;

    let y_s = y.values().select_rows(op.selected())?;
    let interpolation_residual = y_hat
        .values()
        .select_rows(op.selected())?
        .sub(&y_s)?
        .frobenius_norm()
        / y_s.frobenius_norm().max(f64::MIN_POSITIVE);

    if err > low_rank_term + sampling_term + BOUND_SLACK * y_norm {
        return Err(Error::InvariantViolation(format!(
            "triangle bound: error {err:e} > {low_rank_term:e} + {sampling_term:e}"
        )));
    }
    if fac.scheme == Scheme::Samp && sampling_term > BOUND_SLACK * y_norm {
        return Err(Error::InvariantViolation(format!(
            "samp sampling term {sampling_term:e} is not negligible"
        )));
    }
    if interpolation_residual > BOUND_SLACK && y_s.frobenius_norm() > 0.0 {
        return Err(Error::InvariantViolation(format!(
            "interpolation residual {interpolation_residual:e}"
        )));
    }

    let per_time_error_db = (0..y.samples())
        .map(|t| {
            normalized_error_db(
                crate::numerics::norm2(&residual.column(t)),
                crate::numerics::norm2(&y.values().column(t)),
            )
        })
        .collect();

    Ok(ReconstructionReport {
        scheme: fac.scheme,
        rank: fac.rank,
        selected: op.selected().to_vec(),
        error_db: normalized_error_db(err, y_norm),
        error_ratio: err / y_norm,
        per_time_error_db,
        error_split: ErrorSplit {
            low_rank_term,
            sampling_term,
        },
        condition_ast,
        interpolation_residual,
        y_hat: Some(y_hat.clone()),
    })
}
