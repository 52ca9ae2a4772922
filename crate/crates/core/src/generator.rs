//! Laplacian-polynomial generator `B = sum_k gamma_k L^k` and synthesis of
//! node signals `y(t) = B c(t)`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Polynomial coefficients `gamma_1..gamma_K` of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub coefficients: Vec<f64>,
    /// Seed the coefficients were drawn from, if they were drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_seed: Option<u64>,
}

impl GeneratorSpec {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let spec = Self {
            coefficients,
            coefficient_seed: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `order` coefficients drawn i.i.d. from Normal(0, 1).
    pub fn random(order: usize, seed: u64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGenerator("order must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..order).map(|_| rng.sample(StandardNormal)).collect();
        let spec = Self {
            coefficients,
            coefficient_seed: Some(seed),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::InvalidGenerator("order must be at least 1".into()));
        }
        if self.coefficients.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidGenerator(
                "coefficients must be finite".into(),
            ));
        }
        if self.coefficients.iter().all(|&g| g == 0.0) {
            return Err(Error::InvalidGenerator(
                "at least one coefficient must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// `B = sum_{k=1}^K gamma_k L^k`, powers by repeated multiplication.
pub fn build_generator(l: &DenseMatrix, spec: &GeneratorSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let defect = l.symmetry_defect()?;
    if defect > 1e-10 * l.frobenius_norm().max(1.0) {
        return Err(Error::InvalidMatrix(format!(
            "Laplacian is not symmetric (defect {defect:e})"
        )));
    }
    let n = l.rows();
    let mut power = l.clone();
    let mut b = DenseMatrix::zeros(n, n);
    for (k, &gamma) in spec.coefficients.iter().enumerate() {
        if k > 0 {
            power = power.matmul(l)?;
        }
        if gamma != 0.0 {
            b = b.add(&power.scale(gamma))?;
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignalMode {
    /// Row `i` is `sum_h a_{i,h} sin(2 pi h t / T + phi_{i,h})`.
    #[default]
    RandomSinusoids,
    /// Independent Normal(0, 1) draws per node and time sample.
    IidGaussianPerT,
}

/// How the latent coefficients `c(t)` are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub time_samples: usize,
    #[serde(default)]
    pub mode: SignalMode,
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_harmonics() -> usize {
    3
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        if self.time_samples == 0 {
            return Err(Error::InvalidSignal(
                "time_samples must be at least 1".into(),
            ));
        }
        if self.harmonics == 0 {
            return Err(Error::InvalidSignal("harmonics must be at least 1".into()));
        }
        Ok(())
    }
}

/// `N x T` node signals: one row per node, one column per time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix(DenseMatrix);

impl SignalMatrix {
    pub fn new(values: DenseMatrix) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_values(self) -> DenseMatrix {
        self.0
    }

    pub fn nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn samples(&self) -> usize {
        self.0.cols()
    }
}

/// Latent coefficients `c(t)` for `n` nodes. Each node draws from its own
/// random stream, so row `i` does not depend on `n`.
pub fn synthesize_coefficients(n: usize, spec: &SignalSpec) -> Result<SignalMatrix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSignal("need at least one node".into()));
    }
    let t_len = spec.time_samples;
    let mut c = DenseMatrix::zeros(n, t_len);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let row = c.row_mut(i);
        match spec.mode {
            SignalMode::RandomSinusoids => {
                for h in 1..=spec.harmonics {
                    let amplitude: f64 = rng.sample(StandardNormal);
                    let phase = TAU * rng.random::<f64>();
                    for (t, v) in row.iter_mut().enumerate() {
                        *v += amplitude * (TAU * (h * t) as f64 / t_len as f64 + phase).sin();
                    }
                }
            }
            SignalMode::IidGaussianPerT => {
                for v in row.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
        }
    }
    Ok(SignalMatrix(c))
}

/// `Y = B C`.
pub fn generate_signals(b: &DenseMatrix, c: &SignalMatrix) -> Result<SignalMatrix> {
    Ok(SignalMatrix(b.matmul(c.values())?))
}

/// Pearson correlation over time between node rows `i` and `j`.
pub fn signal_correlation(y: &SignalMatrix, i: usize, j: usize) -> Result<f64> {
    let n = y.nodes();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    if y.samples() < 2 {
        return Err(Error::UndefinedCorrelation(
            "need at least two time samples".into(),
        ));
    }
    let centered = |row: &[f64]| -> Result<Vec<f64>> {
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        let c: Vec<f64> = row.iter().map(|v| v - mean).collect();
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ss: f64 = c.iter().map(|v| v * v).sum();
        if ss.sqrt() <= 1e-14 * scale * (row.len() as f64).sqrt() || ss == 0.0 {
            return Err(Error::UndefinedCorrelation("constant node signal".into()));
        }
        Ok(c)
    };
    let a = centered(y.values().row(i))?;
    let b = centered(y.values().row(j))?;
    let num: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let den =
        a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((num / den).clamp(-1.0, 1.0))
}
