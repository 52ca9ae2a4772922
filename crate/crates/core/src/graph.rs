//! Weighted undirected graphs, the graph families used in experiments, and
//! the symmetric normalized Laplacian `D^{-1/2} (D - W) D^{-1/2}`.
//!
//! Node indices are 0-based throughout. The five-node `figure1a` template
//! carries the variable weight `alpha` on node pairs (1, 3) and (0, 4),
//! i.e. nodes 2-4 and 1-5 in 1-based labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{svd, DenseMatrix};

/// Node count of the `figure1a` template.
pub const FIGURE1A_NODES: usize = 5;

/// Pairs of the `figure1a` template that carry `alpha`.
pub const FIGURE1A_ALPHA_PAIRS: [(usize, usize); 2] = [(1, 3), (0, 4)];

fn default_w_lo() -> f64 {
    1.0
}

fn default_w_hi() -> f64 {
    10.0
}

fn default_base_weight() -> f64 {
    1.0
}

/// A graph family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFamily {
    Custom {
        weights: Vec<Vec<f64>>,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
        #[serde(default = "default_w_lo")]
        w_lo: f64,
        #[serde(default = "default_w_hi")]
        w_hi: f64,
    },
    Complete {
        n: usize,
        #[serde(default = "default_w_lo")]
        w_lo: f64,
        #[serde(default = "default_w_hi")]
        w_hi: f64,
    },
    /// Complete bipartite graph with parts `0..left` and `left..left + right`.
    Bipartite {
        left: usize,
        right: usize,
        #[serde(default = "default_w_lo")]
        w_lo: f64,
        #[serde(default = "default_w_hi")]
        w_hi: f64,
    },
    /// Five nodes, every pair connected with `base_weight` except the
    /// [`FIGURE1A_ALPHA_PAIRS`], which carry `alpha`.
    Figure1a {
        alpha: f64,
        #[serde(default = "default_base_weight")]
        base_weight: f64,
    },
}

impl GraphFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            GraphFamily::Custom { .. } => "custom",
            GraphFamily::ErdosRenyi { .. } => "erdos_renyi",
            GraphFamily::Complete { .. } => "complete",
            GraphFamily::Bipartite { .. } => "bipartite",
            GraphFamily::Figure1a { .. } => "figure1a",
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            GraphFamily::Custom { weights } => weights.len(),
            GraphFamily::ErdosRenyi { n, .. } | GraphFamily::Complete { n, .. } => *n,
            GraphFamily::Bipartite { left, right, .. } => left + right,
            GraphFamily::Figure1a { .. } => FIGURE1A_NODES,
        }
    }

    /// Copy of this family with `alpha` replaced; `None` if it has no alpha.
    pub fn with_alpha(&self, alpha: f64) -> Option<GraphFamily> {
        match self {
            GraphFamily::Figure1a { base_weight, .. } => Some(GraphFamily::Figure1a {
                alpha,
                base_weight: *base_weight,
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n < 2 {
            return Err(Error::InvalidTemplate(format!(
                "{} graph needs at least 2 nodes, got {n}",
                self.kind()
            )));
        }
        match self {
            GraphFamily::Custom { weights } => {
                DenseMatrix::from_rows(weights)
                    .and_then(|w| check_weights(&w))
                    .map_err(|e| Error::InvalidTemplate(e.to_string()))?;
            }
            GraphFamily::ErdosRenyi { p, w_lo, w_hi, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidTemplate(format!(
                        "edge probability must lie in [0, 1], got {p}"
                    )));
                }
                check_range(*w_lo, *w_hi)?;
            }
            GraphFamily::Complete { w_lo, w_hi, .. } => check_range(*w_lo, *w_hi)?,
            GraphFamily::Bipartite {
                left,
                right,
                w_lo,
                w_hi,
            } => {
                if *left == 0 || *right == 0 {
                    return Err(Error::InvalidTemplate(format!(
                        "bipartite parts must be nonempty, got {left} and {right}"
                    )));
                }
                check_range(*w_lo, *w_hi)?;
            }
            GraphFamily::Figure1a { alpha, base_weight } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::InvalidTemplate(format!(
                        "alpha must be positive, got {alpha}"
                    )));
                }
                if !(base_weight.is_finite() && *base_weight > 0.0) {
                    return Err(Error::InvalidTemplate(format!(
                        "base weight must be positive, got {base_weight}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi {
        Ok(())
    } else {
        Err(Error::InvalidTemplate(format!(
            "weight range must satisfy 0 < w_lo <= w_hi, got [{lo}, {hi}]"
        )))
    }
}

/// A graph family plus the seed that drives its random weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphTemplate {
    #[serde(flatten)]
    pub family: GraphFamily,
    #[serde(default)]
    pub seed: u64,
}

impl GraphTemplate {
    pub fn new(family: GraphFamily, seed: u64) -> Self {
        Self { family, seed }
    }
}

/// Symmetric, nonnegative, zero-diagonal adjacency over `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: DenseMatrix,
}

impl WeightedGraph {
    pub fn from_weights(weights: DenseMatrix) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.weights.row(i).iter().sum())
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.weights[(i, j)] > 0.0)
            .count()
    }
}

fn check_weights(w: &DenseMatrix) -> Result<()> {
    if !w.is_square() {
        return Err(Error::NotSquare {
            rows: w.rows(),
            cols: w.cols(),
        });
    }
    let n = w.rows();
    if n < 2 {
        return Err(Error::InvalidGraph("graph needs at least 2 nodes".into()));
    }
    for i in 0..n {
        if w[(i, i)] != 0.0 {
            return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
        }
        for j in 0..n {
            let v = w[(i, j)];
            if v < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "negative weight at ({i}, {j})"
                )));
            }
            if v != w[(j, i)] {
                return Err(Error::InvalidGraph(format!(
                    "asymmetric weight at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Random stream for the unordered pair `i < j`, independent of `n`.
fn pair_rng(seed: u64, i: usize, j: usize) -> ChaCha8Rng {
    debug_assert!(i < j);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((i as u64) << 32) | j as u64);
    rng
}

fn draw_weight(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * u
    }
}

/// Materialize a template. Same template and seed give the same graph bit for bit.
pub fn build_graph(t: &GraphTemplate) -> Result<WeightedGraph> {
    t.family.validate()?;
    let n = t.family.node_count();
    let mut w = DenseMatrix::zeros(n, n);
    let set = |w: &mut DenseMatrix, i: usize, j: usize, v: f64| {
        w[(i, j)] = v;
        w[(j, i)] = v;
    };
    match &t.family {
        GraphFamily::Custom { weights } => {
            w = DenseMatrix::from_rows(weights)?;
        }
        GraphFamily::ErdosRenyi { p, w_lo, w_hi, .. } => {
            for i in 0..n {
                for j in i + 1..n {
                    let mut rng = pair_rng(t.seed, i, j);
                    let u: f64 = rng.random();
                    let weight = draw_weight(&mut rng, *w_lo, *w_hi);
                    if u < *p {
                        set(&mut w, i, j, weight);
                    }
                }
            }
        }
        GraphFamily::Complete { w_lo, w_hi, .. } => {
            for i in 0..n {
                for j in i + 1..n {
                    let weight = draw_weight(&mut pair_rng(t.seed, i, j), *w_lo, *w_hi);
                    set(&mut w, i, j, weight);
                }
            }
        }
        GraphFamily::Bipartite {
            left, w_lo, w_hi, ..
        } => {
            for i in 0..*left {
                for j in *left..n {
                    let weight = draw_weight(&mut pair_rng(t.seed, i, j), *w_lo, *w_hi);
                    set(&mut w, i, j, weight);
                }
            }
        }
        GraphFamily::Figure1a { alpha, base_weight } => {
            for i in 0..n {
                for j in i + 1..n {
                    set(&mut w, i, j, *base_weight);
                }
            }
            for (i, j) in FIGURE1A_ALPHA_PAIRS {
                set(&mut w, i, j, *alpha);
            }
        }
    }
    WeightedGraph::from_weights(w)
}

/// `L = D^{-1/2} (D - W) D^{-1/2}`.
pub fn normalized_laplacian(g: &WeightedGraph) -> Result<DenseMatrix> {
    let n = g.n();
    let degrees = g.degrees();
    if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedNode(i));
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let w = g.weights();
    let mut l = DenseMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = -w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            l[(i, j)] = v;
            l[(j, i)] = v;
        }
    }
    Ok(l)
}

/// Second smallest singular value, `sigma_{N-1}` in nonincreasing order.
pub fn second_smallest_singular_value(b: &DenseMatrix) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    if b.rows() < 2 {
        return Err(Error::InvalidMatrix("need at least a 2 x 2 matrix".into()));
    }
    let s = svd(b)?.singular_values;
    Ok(s[s.len() - 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn template(family: GraphFamily, seed: u64) -> GraphTemplate {
        GraphTemplate::new(family, seed)
    }

    #[test]
    fn complete_with_fixed_weights() {
        let g = build_graph(&template(
            GraphFamily::Complete {
                n: 3,
                w_lo: 1.0,
                w_hi: 1.0,
            },
            7,
        ))
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.weights()[(i, j)], if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn erdos_renyi_p_zero_is_empty() {
        let g = build_graph(&template(
            GraphFamily::ErdosRenyi {
                n: 5,
                p: 0.0,
                w_lo: 1.0,
                w_hi: 10.0,
            },
            3,
        ))
        .unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(matches!(
            normalized_laplacian(&g),
            Err(Error::IsolatedNode(0))
        ));
    }

    #[test]
    fn erdos_renyi_weights_in_range() {
        let g = build_graph(&template(
            GraphFamily::ErdosRenyi {
                n: 12,
                p: 0.5,
                w_lo: 1.0,
                w_hi: 10.0,
            },
            11,
        ))
        .unwrap();
        let w = g.weights();
        assert!(g.edge_count() > 0);
        assert!(w
            .as_slice()
            .iter()
            .all(|&v| v == 0.0 || (1.0..=10.0).contains(&v)));
    }

    #[test]
    fn figure1a_alpha_pairs() {
        let g = build_graph(&template(
            GraphFamily::Figure1a {
                alpha: 5.0,
                base_weight: 1.0,
            },
            0,
        ))
        .unwrap();
        let w = g.weights();
        assert_eq!(g.n(), 5);
        assert_eq!(w[(1, 3)], 5.0);
        assert_eq!(w[(3, 1)], 5.0);
        assert_eq!(w[(0, 4)], 5.0);
        assert_eq!(w[(0, 1)], 1.0);
        assert_eq!(w[(2, 4)], 1.0);
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn bipartite_is_complete_bipartite() {
        let g = build_graph(&template(
            GraphFamily::Bipartite {
                left: 2,
                right: 3,
                w_lo: 1.0,
                w_hi: 10.0,
            },
            1,
        ))
        .unwrap();
        let w = g.weights();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(w[(0, 1)], 0.0);
        assert_eq!(w[(2, 4)], 0.0);
        assert!(w[(0, 2)] >= 1.0);
    }

    #[test]
    fn degenerate_templates_rejected() {
        let bad = [
            GraphFamily::Complete {
                n: 1,
                w_lo: 1.0,
                w_hi: 2.0,
            },
            GraphFamily::Bipartite {
                left: 0,
                right: 3,
                w_lo: 1.0,
                w_hi: 2.0,
            },
            GraphFamily::ErdosRenyi {
                n: 4,
                p: 1.5,
                w_lo: 1.0,
                w_hi: 2.0,
            },
            GraphFamily::ErdosRenyi {
                n: 4,
                p: 0.5,
                w_lo: 0.0,
                w_hi: 2.0,
            },
            GraphFamily::Figure1a {
                alpha: 0.0,
                base_weight: 1.0,
            },
            GraphFamily::Custom {
                weights: vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            },
        ];
        for family in bad {
            let err = build_graph(&template(family.clone(), 0)).unwrap_err();
            assert!(err.is_config(), "{family:?} gave {err}");
        }
    }

    #[test]
    fn two_node_laplacian_for_any_weight() {
        for w in [0.1, 1.0, 7.5] {
            let g =
                WeightedGraph::from_weights(DenseMatrix::from_rows(&[[0.0, w], [w, 0.0]]).unwrap())
                    .unwrap();
            let l = normalized_laplacian(&g).unwrap();
            let expected = DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
            assert!(l.sub(&expected).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn k3_laplacian() {
        let g = build_graph(&template(
            GraphFamily::Complete {
                n: 3,
                w_lo: 1.0,
                w_hi: 1.0,
            },
            0,
        ))
        .unwrap();
        let l = normalized_laplacian(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { -0.5 };
                assert_abs_diff_eq!(l[(i, j)], expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn isolated_node_is_named() {
        let w =
            DenseMatrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let g = WeightedGraph::from_weights(w).unwrap();
        assert!(matches!(
            normalized_laplacian(&g),
            Err(Error::IsolatedNode(2))
        ));
    }

    #[test]
    fn second_smallest_examples() {
        assert_abs_diff_eq!(
            second_smallest_singular_value(&DenseMatrix::from_diag(&[3.0, 2.0, 0.0])).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        let l = DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(
            second_smallest_singular_value(&l).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert_eq!(
            second_smallest_singular_value(&DenseMatrix::zeros(3, 3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn template_json_shape() {
        let t = template(
            GraphFamily::ErdosRenyi {
                n: 5,
                p: 0.5,
                w_lo: 1.0,
                w_hi: 10.0,
            },
            42,
        );
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["kind"], "erdos_renyi");
        assert_eq!(v["seed"], 42);
        let parsed: GraphTemplate =
            serde_json::from_str(r#"{"kind":"complete","n":4,"seed":9}"#).unwrap();
        assert_eq!(
            parsed.family,
            GraphFamily::Complete {
                n: 4,
                w_lo: 1.0,
                w_hi: 10.0
            }
        );
    }
}
