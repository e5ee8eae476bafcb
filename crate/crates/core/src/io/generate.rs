//! Benchmark network families.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{Cpt, Network, Variable};

/// States per grid node.
pub const GRID_CARDINALITY: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum BenchmarkSpec {
    /// `A -> B` with `B` a copy of `A`.
    TwoNodeDeterministic,
    /// `X1 -> X2 -> ... -> Xn` over four states with block-shaped conditionals.
    BlockChain { n: usize },
    /// `rows x cols` lattice with edges right and down and randomly drawn CPTs.
    Grid {
        rows: usize,
        cols: usize,
        deterministic_fraction: f64,
        seed: u64,
    },
    /// The five-node blood pressure network.
    BloodPressure,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BenchmarkSpec::TwoNodeDeterministic | BenchmarkSpec::BloodPressure => Ok(()),
            BenchmarkSpec::BlockChain { n } if n < 2 => Err(Error::InvalidParameter(format!(
                "block chain length must be at least 2, got {n}"
            ))),
            BenchmarkSpec::BlockChain { .. } => Ok(()),
            BenchmarkSpec::Grid {
                rows,
                cols,
                deterministic_fraction,
                ..
            } => {
                if rows < 2 || cols < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "grid dimensions must be at least 2x2, got {rows}x{cols}"
                    )));
                }
                if !(0.0..=1.0).contains(&deterministic_fraction) {
                    return Err(Error::InvalidParameter(format!(
                        "deterministic fraction must lie in [0, 1], got {deterministic_fraction}"
                    )));
                }
                Ok(())
            }
        }
    }
}

pub fn generate(spec: &BenchmarkSpec) -> Result<Network> {
    spec.validate()?;
    match *spec {
        BenchmarkSpec::TwoNodeDeterministic => Ok(two_node_deterministic()),
        BenchmarkSpec::BlockChain { n } => block_chain(n),
        BenchmarkSpec::Grid {
            rows,
            cols,
            deterministic_fraction,
            seed,
        } => grid(rows, cols, deterministic_fraction, seed),
        BenchmarkSpec::BloodPressure => Ok(bloodpressure()),
    }
}

pub fn two_node_deterministic() -> Network {
    let vars = vec![
        Variable::new(0, "A", ["0", "1"], vec![]),
        Variable::new(1, "B", ["0", "1"], vec![0]),
    ];
    let cpts = vec![
        Cpt::from_columns(0, vec![], vec![vec![0.5, 0.5]]),
        Cpt::from_columns(1, vec![0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
    ];
    Network::new("two-node-deterministic", vars, cpts).expect("static network is valid")
}

pub fn block_chain(n: usize) -> Result<Network> {
    BenchmarkSpec::BlockChain { n }.validate()?;
    let states = ["0", "1", "2", "3"];
    let low = vec![0.5, 0.5, 0.0, 0.0];
    let high = vec![0.0, 0.0, 0.5, 0.5];
    let mut vars = Vec::with_capacity(n);
    let mut cpts = Vec::with_capacity(n);
    vars.push(Variable::new(0, "X1", states, vec![]));
    cpts.push(Cpt::from_columns(0, vec![], vec![vec![0.25; 4]]));
    for i in 1..n {
        vars.push(Variable::new(i, format!("X{}", i + 1), states, vec![i - 1]));
        cpts.push(Cpt::from_columns(
            i,
            vec![i - 1],
            vec![low.clone(), low.clone(), high.clone(), high.clone()],
        ));
    }
    Network::new(format!("block-chain-{n}"), vars, cpts)
}

pub fn bloodpressure() -> Network {
    let vars = vec![
        Variable::new(0, "Kidney", ["k_b", "k_g"], vec![]),
        Variable::new(1, "Lifestyle", ["l_b", "l_g"], vec![]),
        Variable::new(2, "BloodPressure", ["b_n", "b_e"], vec![0, 1]),
        Variable::new(3, "Sports", ["s_n", "s_y"], vec![1]),
        Variable::new(4, "Measurement", ["m_n", "m_e"], vec![2]),
    ];
    let cpts = vec![
        Cpt::from_columns(0, vec![], vec![vec![0.5, 0.5]]),
        Cpt::from_columns(1, vec![], vec![vec![0.5, 0.5]]),
        Cpt::from_columns(
            2,
            vec![0, 1],
            vec![
                vec![0.1, 0.9],
                vec![0.2, 0.8],
                vec![0.2, 0.8],
                vec![0.9, 0.1],
            ],
        ),
        Cpt::from_columns(3, vec![1], vec![vec![0.8, 0.2], vec![0.2, 0.8]]),
        Cpt::from_columns(4, vec![2], vec![vec![0.9, 0.1], vec![0.1, 0.9]]),
    ];
    Network::new("bloodpressure", vars, cpts).expect("static network is valid")
}

/// Grid network. Node `(i, j)` has parents `(i-1, j)` and `(i, j-1)` when they
/// exist; each CPT column is independently deterministic with probability
/// `deterministic_fraction` (all mass on one random state), otherwise strictly
/// positive.
pub fn grid(rows: usize, cols: usize, deterministic_fraction: f64, seed: u64) -> Result<Network> {
    BenchmarkSpec::Grid {
        rows,
        cols,
        deterministic_fraction,
        seed,
    }
    .validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<String> = (0..GRID_CARDINALITY).map(|s| s.to_string()).collect();
    let id = |i: usize, j: usize| i * cols + j;
    let mut vars = Vec::with_capacity(rows * cols);
    let mut cpts = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut parents = Vec::new();
            if i > 0 {
                parents.push(id(i - 1, j));
            }
            if j > 0 {
                parents.push(id(i, j - 1));
            }
            let columns = GRID_CARDINALITY.pow(parents.len() as u32);
            let cols_values = (0..columns)
                .map(|_| random_column(&mut rng, deterministic_fraction))
                .collect();
            vars.push(Variable::new(
                id(i, j),
                format!("X{}_{}", i + 1, j + 1),
                states.clone(),
                parents.clone(),
            ));
            cpts.push(Cpt::from_columns(id(i, j), parents, cols_values));
        }
    }
    Network::new(
        format!("grid-{rows}x{cols}-f{deterministic_fraction}-s{seed}"),
        vars,
        cpts,
    )
}

fn random_column(rng: &mut ChaCha8Rng, deterministic_fraction: f64) -> Vec<f64> {
    if rng.gen::<f64>() < deterministic_fraction {
        let mut column = vec![0.0; GRID_CARDINALITY];
        column[rng.gen_range(0..GRID_CARDINALITY)] = 1.0;
        column
    } else {
        let weights: Vec<f64> = (0..GRID_CARDINALITY)
            .map(|_| rng.gen_range(0.05..1.0))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut column: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // Pin the sum to exactly one so serialized columns re-validate cleanly.
        let rest: f64 = column[..GRID_CARDINALITY - 1].iter().sum();
        column[GRID_CARDINALITY - 1] = 1.0 - rest;
        column
    }
}
