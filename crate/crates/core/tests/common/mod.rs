#![allow(dead_code)]

use nalgebra::DMatrix;
use nodesamp::generator::{SignalMode, SignalSpec};
use nodesamp::{
    build_generator, build_graph, generate_signals, normalized_laplacian, synthesize_coefficients,
    DenseMatrix, GeneratorSpec, GraphFamily, GraphTemplate, SignalMatrix, WeightedGraph,
};

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Random graph with no isolated nodes; family and size follow from `seed`.
pub fn random_graph(n: usize, seed: u64) -> WeightedGraph {
    let family = match seed % 3 {
        0 => GraphFamily::ErdosRenyi {
            n,
            p: 0.6,
            w_lo: 1.0,
            w_hi: 10.0,
        },
        1 => GraphFamily::Complete {
            n,
            w_lo: 0.5,
            w_hi: 5.0,
        },
        _ => GraphFamily::Bipartite {
            left: n / 2,
            right: n - n / 2,
            w_lo: 1.0,
            w_hi: 10.0,
        },
    };
    (0..)
        .map(|k| {
            build_graph(&GraphTemplate::new(
                family.clone(),
                seed.wrapping_mul(1000) + k,
            ))
            .unwrap()
        })
        .find(|g| g.degrees().iter().all(|&d| d > 0.0))
        .unwrap()
}

pub struct Instance {
    pub laplacian: DenseMatrix,
    pub b: DenseMatrix,
    pub c: SignalMatrix,
    pub y: SignalMatrix,
}

pub fn instance(n: usize, order: usize, seed: u64, time_samples: usize) -> Instance {
    let g = random_graph(n, seed);
    let laplacian = normalized_laplacian(&g).unwrap();
    let b = build_generator(&laplacian, &GeneratorSpec::random(order, seed).unwrap()).unwrap();
    let c = synthesize_coefficients(
        n,
        &SignalSpec {
            time_samples,
            mode: SignalMode::RandomSinusoids,
            harmonics: 3,
            seed,
        },
    )
    .unwrap();
    let y = generate_signals(&b, &c).unwrap();
    Instance { laplacian, b, c, y }
}
