#![allow(dead_code)]

use bnprune::{Cpt, Network, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a random test network.
#[derive(Debug, Clone, Copy)]
pub struct RandomNet {
    pub vars: usize,
    pub max_card: usize,
    pub max_parents: usize,
    /// Chance that an entry is zeroed (each column keeps at least one positive entry).
    pub zero_chance: f64,
}

impl RandomNet {
    pub fn binary(vars: usize) -> Self {
        RandomNet {
            vars,
            max_card: 2,
            max_parents: 3,
            zero_chance: 0.25,
        }
    }
}

/// A seeded random network whose variables are listed in topological order.
pub fn random_network(shape: RandomNet, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = Vec::new();
    let mut cpts = Vec::new();
    let mut cards = Vec::new();
    for v in 0..shape.vars {
        let card = rng.gen_range(2..=shape.max_card.max(2));
        let mut parents: Vec<usize> = (0..v).filter(|_| rng.gen_bool(0.5)).collect();
        while parents.len() > shape.max_parents {
            parents.remove(rng.gen_range(0..parents.len()));
        }
        let columns: usize = parents.iter().map(|&p| cards[p]).product();
        let mut values = Vec::with_capacity(columns * card);
        for _ in 0..columns {
            let mut col: Vec<f64> = (0..card)
                .map(|_| if rng.gen_bool(shape.zero_chance) { 0.0 } else { rng.gen_range(0.05..1.0) })
                .collect();
            if col.iter().all(|&c| c == 0.0) {
                col[rng.gen_range(0..card)] = 1.0;
            }
            let total: f64 = col.iter().sum();
            col.iter_mut().for_each(|c| *c /= total);
            values.extend(col);
        }
        let states: Vec<String> = (0..card).map(|s| format!("s{s}")).collect();
        vars.push(Variable::new(v, format!("V{v}"), states, parents.clone()));
        cpts.push(Cpt::new(v, parents, card, values));
        cards.push(card);
    }
    Network::new(format!("random-{seed}"), vars, cpts).expect("generated network is valid")
}

/// Joint probability computed directly from the CPT values, with the parent
/// configuration built as a mixed-radix number (last parent fastest).
pub fn direct_joint(net: &Network, x: &[usize]) -> f64 {
    (0..net.num_vars())
        .map(|v| {
            let parents = &net.variable(v).parents;
            let config = parents.iter().fold(0, |acc, &p| acc * net.cardinality(p) + x[p]);
            net.cpt(v).values()[config * net.cardinality(v) + x[v]]
        })
        .product()
}

/// Every full assignment, in odometer order.
pub fn all_states(net: &Network) -> Vec<Vec<usize>> {
    let cards: Vec<usize> = (0..net.num_vars()).map(|v| net.cardinality(v)).collect();
    let total: usize = cards.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut x = vec![0; cards.len()];
    for _ in 0..total {
        out.push(x.clone());
        for d in (0..x.len()).rev() {
            x[d] += 1;
            if x[d] < cards[d] {
                break;
            }
            x[d] = 0;
        }
    }
    out
}

/// Conditional marginals `P(X_v | e)` by summing the direct joint over all
/// assignments consistent with `evidence`.
pub fn brute_marginals(net: &Network, evidence: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = (0..net.num_vars()).map(|v| vec![0.0; net.cardinality(v)]).collect();
    let mut total = 0.0;
    for x in all_states(net) {
        if evidence.iter().any(|&(v, s)| x[v] != s) {
            continue;
        }
        let p = direct_joint(net, &x);
        total += p;
        for (v, &s) in x.iter().enumerate() {
            m[v][s] += p;
        }
    }
    for row in &mut m {
        row.iter_mut().for_each(|p| *p /= total);
    }
    m
}

pub fn max_abs_diff(a: &[Vec<f64>], b: impl IntoIterator<Item = impl AsRef<[f64]>>) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            x.iter()
                .zip(y.as_ref().iter())
                .map(|(p, q)| (p - q).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Number of free parameters, `(card - 1) * columns` summed over variables.
pub fn parameter_count(net: &Network) -> usize {
    net.cpts().iter().map(|c| (c.cardinality() - 1) * c.num_columns()).sum()
}
