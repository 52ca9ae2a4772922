//! Correlation-based greedy node selection and an exhaustive oracle.
//!
//! The greedy pass starts from every node and repeatedly finds the most
//! correlated remaining pair, then drops whichever member of the pair has
//! the larger total correlation. Ties on the pair go to the
//! lexicographically smallest `(i, j)`; ties on the row sums drop `j`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{generate_signals, SignalMatrix};
use crate::lowrank::{approx_samp, approx_svd, LowRankFactorization, Scheme};
use crate::numerics::DenseMatrix;
use crate::reconstruct::{normalized_error_db, reconstruct, subsample, SubsamplingOperator};

/// Node count above which [`brute_force_select`] refuses to enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// `|<r_i, r_j>|` over unit-normalized rows, with a zero diagonal.
pub fn node_correlation_matrix(b_sel: &DenseMatrix) -> Result<DenseMatrix> {
    if !b_sel.is_square() {
        return Err(Error::NotSquare {
            rows: b_sel.rows(),
            cols: b_sel.cols(),
        });
    }
    let normalized = b_sel.row_normalize();
    let n = normalized.rows();
    let mut corr = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let c = crate::numerics::dot(normalized.row(i), normalized.row(j))
                .abs()
                .min(1.0);
            corr[(i, j)] = c;
            corr[(j, i)] = c;
        }
    }
    Ok(corr)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyOptions {
    /// Sum correlations over the remaining nodes only, instead of the full row.
    #[serde(default)]
    pub rowsum_active_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalStep {
    pub removed: usize,
    pub pair: (usize, usize),
    pub correlation: f64,
    pub rowsum_i: f64,
    pub rowsum_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Kept nodes in increasing index order.
    pub selected: Vec<usize>,
    pub removal_trace: Vec<RemovalStep>,
    /// Which approximation seeded the correlation matrix, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
}

/// Greedy removal down to `rank` nodes.
pub fn greedy_select(
    b_sel: &DenseMatrix,
    rank: usize,
    options: GreedyOptions,
) -> Result<SelectionResult> {
    let n = b_sel.rows();
    if rank == 0 || rank > n {
        return Err(Error::InvalidRank { rank, n });
    }
    let corr = node_correlation_matrix(b_sel)?;
    let full_rowsums: Vec<f64> = (0..n).map(|i| corr.row(i).iter().sum()).collect();
    let mut active = vec![true; n];
    let mut trace = Vec::with_capacity(n - rank);

    for _ in rank..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                let c = corr[(i, j)];
                if best.is_none_or(|(_, _, b)| c > b) {
                    best = Some((i, j, c));
                }
            }
        }
        let (i, j, c) = best.expect("at least two active nodes while |S| > P");
        let rowsum = |k: usize| -> f64 {
            if options.rowsum_active_only {
                (0..n).filter(|&m| active[m]).map(|m| corr[(k, m)]).sum()
            } else {
                full_rowsums[k]
            }
        };
        let (rowsum_i, rowsum_j) = (rowsum(i), rowsum(j));
        let removed = if rowsum_i > rowsum_j { i } else { j };
        active[removed] = false;
        trace.push(RemovalStep {
            removed,
            pair: (i, j),
            correlation: c,
            rowsum_i,
            rowsum_j,
        });
    }

    Ok(SelectionResult {
        selected: (0..n).filter(|&i| active[i]).collect(),
        removal_trace: trace,
        scheme: None,
    })
}

/// Seed the greedy pass per scheme and build the matching approximation:
/// svd selects on `B_svd` and reuses `T = U_P`; samp selects on `B` and
/// then forms `B_samp` from the chosen rows.
pub fn select_and_approximate(
    b: &DenseMatrix,
    rank: usize,
    scheme: Scheme,
    options: GreedyOptions,
) -> Result<(SelectionResult, LowRankFactorization)> {
    match scheme {
        Scheme::Svd => {
            let mut fac = approx_svd(b, rank)?;
            let mut selection = greedy_select(&fac.b_tilde, rank, options)?;
            selection.scheme = Some(Scheme::Svd);
            fac.selected_set = Some(selection.selected.clone());
            Ok((selection, fac))
        }
        Scheme::Samp => {
            let mut selection = greedy_select(b, rank, options)?;
            selection.scheme = Some(Scheme::Samp);
            let fac = approx_samp(b, &selection.selected)?;
            Ok((selection, fac))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub subset: Vec<usize>,
    /// `None` when the subset gives a singular operator or dependent rows.
    pub error_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSelection {
    pub selected: Vec<usize>,
    pub scheme: Scheme,
    /// `||Y - Y_hat||_F` for the best subset.
    pub error_fro: f64,
    pub error_db: f64,
    pub scores: Vec<SubsetScore>,
}

/// Exhaustive search over all `C(N, P)` subsets, scored by the actual
/// reconstruction error of `Y = B C`. Ties keep the lexicographically
/// smallest subset.
pub fn brute_force_select(
    b: &DenseMatrix,
    rank: usize,
    c: &SignalMatrix,
    scheme: Scheme,
) -> Result<OracleSelection> {
    let n = b.rows();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceTooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if rank == 0 || rank > n {
        return Err(Error::InvalidRank { rank, n });
    }
    let y = generate_signals(b, c)?;
    let svd_fac = match scheme {
        Scheme::Svd => Some(approx_svd(b, rank)?),
        Scheme::Samp => None,
    };

    let mut scores = Vec::new();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in (0..n).combinations(rank) {
        let fac = match &svd_fac {
            Some(f) => Ok(f.clone()),
            None => approx_samp(b, &subset),
        };
        let error = fac.and_then(|fac| {
            let op = SubsamplingOperator::new(n, subset.clone())?;
            let y_hat = reconstruct(&subsample(&y, &op)?, &fac, &op)?;
            Ok(y.values().sub(y_hat.values())?.frobenius_norm())
        });
        match error {
            Ok(err) => {
                scores.push(SubsetScore {
                    subset: subset.clone(),
                    error_db: Some(normalized_error_db(err, y.values().frobenius_norm())),
                });
                if best.as_ref().is_none_or(|(_, b)| err < *b) {
                    best = Some((subset, err));
                }
            }
            Err(e) if e.is_numerical() => scores.push(SubsetScore {
                subset,
                error_db: None,
            }),
            Err(e) => return Err(e),
        }
    }
    let (selected, error_fro) = best.ok_or(Error::NoFeasibleSubset { rank })?;
    Ok(OracleSelection {
        selected,
        scheme,
        error_fro,
        error_db: normalized_error_db(error_fro, y.values().frobenius_norm()),
        scores,
    })
}
