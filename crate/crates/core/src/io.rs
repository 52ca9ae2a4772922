//! On-disk formats: graph JSON, node-major signal CSV, and JSON helpers.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every value bit for bit.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::SignalMatrix;
use crate::graph::{GraphFamily, WeightedGraph};
use crate::lowrank::{LowRankFactorization, Scheme};
use crate::numerics::DenseMatrix;

/// `graph.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub weights: DenseMatrix,
    pub template: GraphFamily,
    pub seed: u64,
}

impl GraphFile {
    pub fn new(graph: &WeightedGraph, template: &GraphFamily, seed: u64) -> Self {
        Self {
            n: graph.n(),
            weights: graph.weights().clone(),
            template: template.clone(),
            seed,
        }
    }

    pub fn to_graph(&self) -> Result<WeightedGraph> {
        if self.weights.rows() != self.n {
            return Err(Error::InvalidGraph(format!(
                "n = {} but weights have {} rows",
                self.n,
                self.weights.rows()
            )));
        }
        WeightedGraph::from_weights(self.weights.clone())
    }
}

/// `factorization_<scheme>.json`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationFile {
    pub scheme: Scheme,
    #[serde(rename = "P")]
    pub rank: usize,
    pub selected_set: Option<Vec<usize>>,
    pub singular_values: Vec<f64>,
    pub b_tilde: DenseMatrix,
    pub t_factor: DenseMatrix,
}

impl FactorizationFile {
    pub fn new(fac: &LowRankFactorization, singular_values: &[f64]) -> Self {
        Self {
            scheme: fac.scheme,
            rank: fac.rank,
            selected_set: fac.selected_set.clone(),
            singular_values: singular_values.to_vec(),
            b_tilde: fac.b_tilde.clone(),
            t_factor: fac.t_factor.clone(),
        }
    }
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

/// Node-major CSV with header `node,t0,t1,...`.
pub fn signals_to_csv(y: &SignalMatrix) -> String {
    let m = y.values();
    let mut out = String::from("node");
    for t in 0..m.cols() {
        out.push_str(&format!(",t{t}"));
    }
    out.push('\n');
    for i in 0..m.rows() {
        out.push_str(&i.to_string());
        for &v in m.row(i) {
            out.push(',');
            out.push_str(&fmt_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn signals_from_csv<R: Read>(reader: R) -> Result<SignalMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("node") {
        return Err(Error::InvalidMatrix(
            "signal CSV must start with a `node` column".into(),
        ));
    }
    let mut rows = Vec::new();
    for (expected, record) in rdr.records().enumerate() {
        let record = record?;
        let node: usize = record[0]
            .parse()
            .map_err(|_| Error::InvalidMatrix(format!("bad node label `{}`", &record[0])))?;
        if node != expected {
            return Err(Error::InvalidMatrix(format!(
                "signal rows must be in node order, expected {expected}, got {node}"
            )));
        }
        let values = record
            .iter()
            .skip(1)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidMatrix(format!("bad value `{s}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(SignalMatrix::new(DenseMatrix::from_rows(&rows)?))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
