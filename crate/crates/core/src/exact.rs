//! Exact inference used as ground truth.
//!
//! Two independent routes to one-variable marginals are provided: brute-force
//! enumeration of feasible states and variable elimination with a min-degree
//! ordering. The module also computes the exact Prune Sampling transition kernel
//! by enumerating every prune/retain outcome, which makes detailed balance and
//! stationarity directly checkable on small networks.

use std::collections::HashMap;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{Assignment, Network, State, VarId};
use crate::search::for_each_state;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;
pub const DEFAULT_PRUNABLE_LABEL_LIMIT: usize = 18;
pub const DEFAULT_FACTOR_LIMIT: usize = 1 << 24;

/// Posterior one-variable marginals, indexed by variable id.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    marginals: Vec<Vec<f64>>,
}

impl MarginalTable {
    pub fn new(marginals: Vec<Vec<f64>>) -> Self {
        MarginalTable { marginals }
    }

    pub fn get(&self, var: VarId) -> &[f64] {
        &self.marginals[var]
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.marginals.iter().map(Vec::as_slice)
    }

    /// Largest absolute entry-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &MarginalTable) -> f64 {
        self.marginals
            .iter()
            .zip(&other.marginals)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Every feasible state with its (unnormalized) joint probability.
///
/// Partial assignments are abandoned as soon as they select a zero CPT entry.
pub fn enumerate_feasible(net: &Network, cap: usize) -> Result<Vec<(State, f64)>> {
    let mut out = Vec::new();
    let flow = for_each_state(
        net,
        |_| true,
        |x, p| {
            if out.len() == cap {
                return ControlFlow::Break(());
            }
            out.push((x.to_vec(), p));
            ControlFlow::Continue(())
        },
    );
    match flow {
        ControlFlow::Break(()) => Err(Error::StateSpaceTooLarge { cap }),
        ControlFlow::Continue(()) => Ok(out),
    }
}

/// Marginals by summing the joint over all feasible states of the reduced network.
pub fn brute_force_marginals(net: &Network, evidence: &Assignment, cap: usize) -> Result<MarginalTable> {
    let reduced = net.reduce_evidence(evidence)?;
    let states = enumerate_feasible(&reduced, cap)?;
    let mut marginals: Vec<Vec<f64>> = net
        .variables()
        .iter()
        .map(|v| vec![0.0; v.cardinality()])
        .collect();
    let mut total = 0.0;
    for (x, p) in &states {
        total += p;
        for (v, &s) in x.iter().enumerate() {
            marginals[v][s] += p;
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    for m in &mut marginals {
        m.iter_mut().for_each(|p| *p /= total);
    }
    Ok(MarginalTable::new(marginals))
}

/// Posterior marginals `P(X_i | e)` by variable elimination.
pub fn exact_marginals(net: &Network, evidence: &Assignment) -> Result<MarginalTable> {
    exact_marginals_with_limit(net, evidence, DEFAULT_FACTOR_LIMIT)
}

pub fn exact_marginals_with_limit(
    net: &Network,
    evidence: &Assignment,
    factor_limit: usize,
) -> Result<MarginalTable> {
    let reduced = net.reduce_evidence(evidence)?;
    let factors: Vec<Factor> = (0..reduced.num_vars())
        .map(|v| Factor::from_cpt(&reduced, v))
        .collect();
    let marginals = (0..reduced.num_vars())
        .into_par_iter()
        .map(|query| {
            let f = eliminate_all_but(&factors, query, factor_limit)?;
            let mut m = f.values;
            let total: f64 = m.iter().sum();
            if total <= 0.0 {
                return Err(Error::ZeroEvidence);
            }
            m.iter_mut().for_each(|p| *p /= total);
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalTable::new(marginals))
}

#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn from_cpt(net: &Network, child: VarId) -> Factor {
        let mut vars = net.variable(child).parents.clone();
        vars.push(child);
        vars.sort_unstable();
        let cards: Vec<usize> = vars.iter().map(|&v| net.cardinality(v)).collect();
        let size = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut x = vec![0; net.num_vars()];
        let mut digits = vec![0; vars.len()];
        for _ in 0..size {
            for (&v, &d) in vars.iter().zip(&digits) {
                x[v] = d;
            }
            values.push(net.cpt(child).value(x[child], net.parent_config(child, &x)));
            for d in (0..digits.len()).rev() {
                digits[d] += 1;
                if digits[d] < cards[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![0; self.vars.len()];
        let mut acc = 1;
        for d in (0..self.vars.len()).rev() {
            strides[d] = acc;
            acc *= self.cards[d];
        }
        strides
    }

    /// Stride of each of `vars` in `self`, zero where absent.
    fn strides_in(&self, vars: &[VarId]) -> Vec<usize> {
        let own = self.strides();
        vars.iter()
            .map(|v| self.vars.iter().position(|u| u == v).map_or(0, |k| own[k]))
            .collect()
    }

    fn product(&self, other: &Factor, limit: usize) -> Result<Factor> {
        let mut vars: Vec<VarId> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| {
                let k = self.vars.iter().position(|u| u == v);
                match k {
                    Some(k) => self.cards[k],
                    None => other.cards[other.vars.iter().position(|u| u == v).unwrap()],
                }
            })
            .collect();
        let size = cards
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .filter(|&s| s <= limit)
            .ok_or(Error::Intractable {
                entries: cards.iter().fold(1usize, |a, &c| a.saturating_mul(c)),
                limit,
            })?;
        let sa = self.strides_in(&vars);
        let sb = other.strides_in(&vars);
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0; vars.len()];
        let (mut ia, mut ib) = (0, 0);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for d in (0..digits.len()).rev() {
                digits[d] += 1;
                ia += sa[d];
                ib += sb[d];
                if digits[d] < cards[d] {
                    break;
                }
                ia -= sa[d] * cards[d];
                ib -= sb[d] * cards[d];
                digits[d] = 0;
            }
        }
        Ok(Factor { vars, cards, values })
    }

    fn sum_out(&self, var: VarId) -> Factor {
        let k = self.vars.iter().position(|&v| v == var).expect("variable in factor");
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        let result = Factor {
            vars,
            cards,
            values: vec![],
        };
        let sr = result.strides_in(&self.vars);
        let mut values = vec![0.0; result.cards.iter().product()];
        let mut digits = vec![0; self.vars.len()];
        let mut ir = 0;
        for &v in &self.values {
            values[ir] += v;
            for d in (0..digits.len()).rev() {
                digits[d] += 1;
                ir += sr[d];
                if digits[d] < self.cards[d] {
                    break;
                }
                ir -= sr[d] * self.cards[d];
                digits[d] = 0;
            }
        }
        Factor { values, ..result }
    }
}

fn eliminate_all_but(factors: &[Factor], query: VarId, limit: usize) -> Result<Factor> {
    let mut pool: Vec<Factor> = factors.to_vec();
    let mut remaining: Vec<VarId> = {
        let mut all: Vec<VarId> = pool.iter().flat_map(|f| f.vars.iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all.retain(|&v| v != query);
        all
    };
    while !remaining.is_empty() {
        // min-degree: fewest distinct neighbours in the current interaction graph
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let mut neighbours: Vec<VarId> = pool
                    .iter()
                    .filter(|f| f.vars.contains(&v))
                    .flat_map(|f| f.vars.iter().copied())
                    .collect();
                neighbours.sort_unstable();
                neighbours.dedup();
                (pos, neighbours.len())
            })
            .min_by_key(|&(pos, degree)| (degree, remaining[pos]))
            .expect("non-empty");
        let var = remaining.remove(pos);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            pool.into_iter().partition(|f| f.vars.contains(&var));
        pool = rest;
        let mut iter = touching.into_iter();
        let first = iter.next().expect("every variable appears in its own CPT factor");
        let joined = iter.try_fold(first, |acc, f| acc.product(&f, limit))?;
        pool.push(joined.sum_out(var));
    }
    let mut iter = pool.into_iter();
    let first = iter.next().expect("query factor present");
    iter.try_fold(first, |acc, f| acc.product(&f, limit))
}

/// Limits for the transition-kernel oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    /// Maximum number of labels whose prune decision is random (0 < c < 1).
    pub prunable_labels: usize,
    pub states: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            prunable_labels: DEFAULT_PRUNABLE_LABEL_LIMIT,
            states: DEFAULT_STATE_CAP,
        }
    }
}

/// Exact one-step Prune Sampling transition probabilities out of `x`.
///
/// Every label outside `C_x` with value strictly between 0 and 1 is either
/// pruned (weight `1 - c`) or retained (weight `c`); labels with `c = 1` are
/// always retained and labels with `c = 0` always pruned. For each outcome the
/// states spanned by the retained labels receive `weight / |S|` each.
pub fn prune_transition_row(net: &Network, x: &[usize], limits: OracleLimits) -> Result<HashMap<State, f64>> {
    if !net.is_feasible(x)? {
        return Err(Error::Infeasible);
    }
    let values = net.label_values();
    let own = net.labels_of(x)?;
    let mut base = vec![false; values.len()];
    let mut random = Vec::new();
    for (i, &c) in values.iter().enumerate() {
        if own.contains(i) || c >= 1.0 {
            base[i] = true;
        } else if c > 0.0 {
            random.push(i);
        }
    }
    if random.len() > limits.prunable_labels {
        return Err(Error::OracleLimit {
            labels: random.len(),
            limit: limits.prunable_labels,
        });
    }
    let mut row: HashMap<State, f64> = HashMap::new();
    let mut retained = base.clone();
    let mut span: Vec<State> = Vec::new();
    for outcome in 0u64..(1u64 << random.len()) {
        let mut weight = 1.0;
        for (bit, &i) in random.iter().enumerate() {
            let keep = outcome >> bit & 1 == 1;
            retained[i] = keep;
            weight *= if keep { values[i] } else { 1.0 - values[i] };
        }
        span.clear();
        let flow = for_each_state(
            net,
            |i| retained[i],
            |s, _| {
                if span.len() == limits.states {
                    return ControlFlow::Break(());
                }
                span.push(s.to_vec());
                ControlFlow::Continue(())
            },
        );
        if flow.is_break() {
            return Err(Error::StateSpaceTooLarge { cap: limits.states });
        }
        let share = weight / span.len() as f64;
        for s in span.drain(..) {
            *row.entry(s).or_insert(0.0) += share;
        }
    }
    Ok(row)
}

/// Exact probability that one Prune Sampling step moves from `x` to `y`.
pub fn prune_transition_prob(net: &Network, x: &[usize], y: &[usize]) -> Result<f64> {
    if !net.is_feasible(y)? {
        return Err(Error::Infeasible);
    }
    let row = prune_transition_row(net, x, OracleLimits::default())?;
    Ok(row.get(y).copied().unwrap_or(0.0))
}

/// The full Prune Sampling kernel over the feasible states of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    states: Vec<State>,
    /// Unnormalized joint probability of each state.
    weights: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &[usize]) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.probs[from][to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.probs[from]
    }

    /// The target distribution: normalized joint over the feasible states.
    pub fn target(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// `pi R` for a row vector `pi` over the listed states.
    pub fn apply_left(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, row) in self.probs.iter().enumerate() {
            for (j, &r) in row.iter().enumerate() {
                out[j] += pi[i] * r;
            }
        }
        out
    }
}

pub fn prune_transition_matrix(net: &Network) -> Result<TransitionMatrix> {
    prune_transition_matrix_with(net, OracleLimits::default())
}

pub fn prune_transition_matrix_with(net: &Network, limits: OracleLimits) -> Result<TransitionMatrix> {
    let feasible = enumerate_feasible(net, limits.states)?;
    let index: HashMap<&State, usize> = feasible.iter().enumerate().map(|(i, (s, _))| (s, i)).collect();
    let probs = feasible
        .par_iter()
        .map(|(x, _)| {
            let row = prune_transition_row(net, x, limits)?;
            let mut dense = vec![0.0; feasible.len()];
            for (y, p) in row {
                dense[index[&y]] = p;
            }
            Ok(dense)
        })
        .collect::<Result<Vec<_>>>()?;
    let (states, weights) = feasible.into_iter().unzip();
    Ok(TransitionMatrix {
        states,
        weights,
        probs,
    })
}
