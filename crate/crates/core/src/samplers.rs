//! Markov chain drivers: Prune Sampling, Gibbs and single-site Metropolis, plus
//! the forward-sampling family used to find initial states.
//!
//! All samplers operate on a network with evidence already applied through
//! [`Network::reduce_evidence`]; evidence variables are never resampled.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{normalize_in_place, LabelSet, Network, State, VarId};
use crate::prune::{bounded_candidates, enumerate_pruned, prune_into, uniform_draw, PruneMode, DEFAULT_PRUNED_CAP};

/// Restart budget for initial-state generation.
pub const DEFAULT_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Prune,
    Gibbs,
    Metropolis,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Prune, Method::Gibbs, Method::Metropolis];

    pub fn name(self) -> &'static str {
        match self {
            Method::Prune => "prune",
            Method::Gibbs => "gibbs",
            Method::Metropolis => "metropolis",
        }
    }

    /// Estimator used for running marginals unless overridden.
    pub fn default_estimator(self) -> EstimatorKind {
        match self {
            Method::Gibbs => EstimatorKind::RaoBlackwell,
            Method::Prune | Method::Metropolis => EstimatorKind::Frequency,
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            Method::Prune => 1,
            Method::Gibbs => 2,
            Method::Metropolis => 3,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitStrategy {
    /// Ancestral sampling from the CPTs.
    #[default]
    Forward,
    /// Uniform over the positive-probability values of each variable.
    RandomForward,
    /// Per variable, CPT-guided with probability `p`, uniform otherwise.
    Hybrid(f64),
    /// Best of `tries` hybrid samples by joint probability.
    Map { tries: usize, p: f64 },
    /// A given state.
    Fixed(State),
}

impl FromStr for InitStrategy {
    type Err = Error;

    /// Parses `forward`, `random`, `hybrid:P` or `map:TRIES:P`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("init `{s}`: expected forward, random, hybrid:P or map:TRIES:P"));
        let prob = |t: Option<&str>| {
            t.and_then(|t| t.parse::<f64>().ok())
                .filter(|p| (0.0..=1.0).contains(p))
                .ok_or_else(bad)
        };
        let mut parts = s.split(':');
        let strategy = match parts.next() {
            Some("forward") => InitStrategy::Forward,
            Some("random") => InitStrategy::RandomForward,
            Some("hybrid") => InitStrategy::Hybrid(prob(parts.next())?),
            Some("map") => {
                let tries = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&t| t >= 1)
                    .ok_or_else(bad)?;
                InitStrategy::Map {
                    tries,
                    p: prob(parts.next())?,
                }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(strategy)
    }
}

/// How running marginals are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Fraction of recorded states taking each value.
    Frequency,
    /// Average of the in-sweep Gibbs conditionals; for other methods, the
    /// Markov-blanket conditional at each recorded state.
    RaoBlackwell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub method: Method,
    pub samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub init: InitStrategy,
    pub seed: u64,
    /// Run index; selects an independent random stream.
    pub run: u64,
    pub prune_mode: PruneMode,
    pub cap: usize,
    pub retry_budget: usize,
    /// Variables whose running marginals are recorded.
    pub query: Vec<VarId>,
    pub estimator: Option<EstimatorKind>,
}

impl SamplerConfig {
    pub fn new(method: Method, samples: usize) -> Self {
        SamplerConfig {
            method,
            samples,
            burn_in: 0,
            thinning: 1,
            init: InitStrategy::Forward,
            seed: 0,
            run: 0,
            prune_mode: PruneMode::Exact,
            cap: DEFAULT_PRUNED_CAP,
            retry_budget: DEFAULT_RETRY_BUDGET,
            query: Vec::new(),
            estimator: None,
        }
    }

    pub fn estimator(&self) -> EstimatorKind {
        self.estimator.unwrap_or(self.method.default_estimator())
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("number of samples must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be at least 1".into()));
        }
        match &self.init {
            InitStrategy::Hybrid(p) | InitStrategy::Map { p, .. } if !(0.0..=1.0).contains(p) => {
                return Err(Error::InvalidParameter(format!("hybrid probability {p} outside [0, 1]")))
            }
            InitStrategy::Map { tries: 0, .. } => {
                return Err(Error::InvalidParameter("MAP heuristic needs at least one try".into()))
            }
            InitStrategy::Fixed(x) => net.check_full(x)?,
            _ => {}
        }
        if let PruneMode::Bounded { size: 0, .. } = self.prune_mode {
            return Err(Error::InvalidParameter("candidate set size must be at least 1".into()));
        }
        if let Some(&v) = self.query.iter().find(|&&v| v >= net.num_vars()) {
            return Err(Error::InvalidParameter(format!("unknown query variable id {v}")));
        }
        Ok(())
    }
}

/// The random stream of one chain, determined by seed, method and run only.
pub fn chain_rng(seed: u64, method: Method, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(method.stream_tag() << 48 | run);
    rng
}

/// Recorded states and running marginal estimates of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    method: Method,
    estimator: EstimatorKind,
    thinning: usize,
    width: usize,
    initial: State,
    previous: State,
    states: Vec<usize>,
    query: Vec<VarId>,
    offsets: Vec<usize>,
    stride: usize,
    estimates: Vec<f64>,
}

impl RunTrace {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn estimator(&self) -> EstimatorKind {
        self.estimator
    }

    pub fn thinning(&self) -> usize {
        self.thinning
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The state the chain was initialized with, before burn-in.
    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    /// The state immediately preceding the first recorded one.
    pub fn previous(&self) -> &[usize] {
        &self.previous
    }

    /// Recorded state at step `t` (0-based).
    pub fn state(&self, t: usize) -> &[usize] {
        &self.states[t * self.width..(t + 1) * self.width]
    }

    pub fn states(&self) -> impl Iterator<Item = &[usize]> {
        self.states.chunks_exact(self.width)
    }

    pub fn query(&self) -> &[VarId] {
        &self.query
    }

    /// Running marginal of `var` after `t + 1` recorded samples.
    pub fn estimate(&self, t: usize, var: VarId) -> Option<&[f64]> {
        let k = self.query.iter().position(|&q| q == var)?;
        let start = t * self.stride + self.offsets[k];
        let end = start + (self.offsets.get(k + 1).copied().unwrap_or(self.stride) - self.offsets[k]);
        Some(&self.estimates[start..end])
    }

    /// Running marginal of `var` after the final sample.
    pub fn final_estimate(&self, var: VarId) -> Option<&[f64]> {
        self.estimate(self.len().checked_sub(1)?, var)
    }
}

fn weighted_choice<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = None;
    for (s, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return Some(s);
            }
            u -= w;
            last = Some(s);
        }
    }
    last
}

fn uniform_positive<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let count = weights.iter().filter(|&&w| w > 0.0).count();
    if count == 0 {
        return None;
    }
    let k = rng.gen_range(0..count);
    weights.iter().enumerate().filter(|(_, &w)| w > 0.0).nth(k).map(|(s, _)| s)
}

/// Ancestral sampling where each variable is CPT-guided with probability `p`
/// and uniform over positive values otherwise.
pub fn hybrid_forward_sample<R: Rng + ?Sized>(net: &Network, p: f64, rng: &mut R, retry_budget: usize) -> Result<State> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("hybrid probability {p} outside [0, 1]")));
    }
    let mut x = vec![0; net.num_vars()];
    'attempts: for _ in 0..retry_budget {
        for &var in net.topological_order() {
            let column = net.cpt(var).column(net.parent_config(var, &x));
            // p = 1 and p = 0 consume no coin, matching the pure samplers draw for draw
            let guided = p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p);
            let pick = if guided {
                weighted_choice(column, rng)
            } else {
                uniform_positive(column, rng)
            };
            match pick {
                Some(s) => x[var] = s,
                None => continue 'attempts,
            }
        }
        return Ok(x);
    }
    Err(Error::RetryBudgetExhausted(retry_budget))
}

/// Ancestral sampling from the CPTs, restarting on zero-mass columns.
pub fn forward_sample<R: Rng + ?Sized>(net: &Network, rng: &mut R, retry_budget: usize) -> Result<State> {
    hybrid_forward_sample(net, 1.0, rng, retry_budget)
}

/// Ancestral sampling that picks uniformly among positive-probability values.
pub fn random_forward_sample<R: Rng + ?Sized>(net: &Network, rng: &mut R, retry_budget: usize) -> Result<State> {
    hybrid_forward_sample(net, 0.0, rng, retry_budget)
}

/// The most probable of `tries` hybrid samples.
pub fn map_heuristic<R: Rng + ?Sized>(net: &Network, tries: usize, p: f64, rng: &mut R) -> Result<State> {
    map_heuristic_with_budget(net, tries, p, rng, DEFAULT_RETRY_BUDGET)
}

pub fn map_heuristic_with_budget<R: Rng + ?Sized>(
    net: &Network,
    tries: usize,
    p: f64,
    rng: &mut R,
    retry_budget: usize,
) -> Result<State> {
    if tries == 0 {
        return Err(Error::InvalidParameter("MAP heuristic needs at least one try".into()));
    }
    let mut best = hybrid_forward_sample(net, p, rng, retry_budget)?;
    let mut best_p = net.joint_unchecked(&best);
    for _ in 1..tries {
        let x = hybrid_forward_sample(net, p, rng, retry_budget)?;
        let px = net.joint_unchecked(&x);
        if px > best_p {
            best = x;
            best_p = px;
        }
    }
    Ok(best)
}

pub fn initial_state<R: Rng + ?Sized>(net: &Network, init: &InitStrategy, rng: &mut R, retry_budget: usize) -> Result<State> {
    let x = match init {
        InitStrategy::Forward => forward_sample(net, rng, retry_budget)?,
        InitStrategy::RandomForward => random_forward_sample(net, rng, retry_budget)?,
        InitStrategy::Hybrid(p) => hybrid_forward_sample(net, *p, rng, retry_budget)?,
        InitStrategy::Map { tries, p } => map_heuristic_with_budget(net, *tries, *p, rng, retry_budget)?,
        InitStrategy::Fixed(x) => {
            if !net.is_feasible(x)? {
                return Err(Error::Infeasible);
            }
            x.clone()
        }
    };
    Ok(x)
}

/// One Prune Sampling transition out of a feasible `x`.
pub fn prune_step<R: Rng + ?Sized>(net: &Network, x: &[usize], mode: PruneMode, cap: usize, rng: &mut R) -> Result<State> {
    if !net.is_feasible(x)? {
        return Err(Error::Infeasible);
    }
    let mut retained = LabelSet::empty(net.num_labels());
    prune_step_with(net, x, mode, cap, rng, &mut retained)
}

fn prune_step_with<R: Rng + ?Sized>(
    net: &Network,
    x: &[usize],
    mode: PruneMode,
    cap: usize,
    rng: &mut R,
    retained: &mut LabelSet,
) -> Result<State> {
    prune_into(net, x, rng, retained);
    let space = match mode {
        PruneMode::Exact => enumerate_pruned(net, retained, cap)?,
        PruneMode::Bounded { size, budget } => bounded_candidates(net, retained, size, budget, rng)?,
    };
    uniform_draw(&space, rng)
}

/// One systematic Gibbs sweep in variable index order, skipping evidence.
pub fn gibbs_sweep<R: Rng + ?Sized>(net: &Network, x: &[usize], rng: &mut R) -> Result<State> {
    net.check_full(x)?;
    let mut y = x.to_vec();
    gibbs_sweep_in_place(net, &mut y, rng, None)?;
    Ok(y)
}

/// A Gibbs sweep that also returns, per variable, the conditional it was drawn
/// from. Evidence variables report their indicator.
pub fn gibbs_sweep_with_conditionals<R: Rng + ?Sized>(
    net: &Network,
    x: &[usize],
    rng: &mut R,
) -> Result<(State, Vec<Vec<f64>>)> {
    net.check_full(x)?;
    let mut y = x.to_vec();
    let mut conditionals: Vec<Vec<f64>> = (0..net.num_vars()).map(|v| vec![0.0; net.cardinality(v)]).collect();
    gibbs_sweep_in_place(net, &mut y, rng, Some(&mut conditionals))?;
    Ok((y, conditionals))
}

fn gibbs_sweep_in_place<R: Rng + ?Sized>(
    net: &Network,
    x: &mut [usize],
    rng: &mut R,
    mut record: Option<&mut [Vec<f64>]>,
) -> Result<()> {
    let mut weights = Vec::new();
    for var in 0..net.num_vars() {
        if net.is_evidence(var) {
            if let Some(record) = record.as_deref_mut() {
                record[var].fill(0.0);
                record[var][x[var]] = 1.0;
            }
            continue;
        }
        net.blanket_weights(x, var, &mut weights);
        normalize_in_place(&mut weights).ok_or_else(|| Error::StuckState(net.variable(var).name.clone()))?;
        x[var] = weighted_choice(&weights, rng).expect("normalized weights have positive mass");
        if let Some(record) = record.as_deref_mut() {
            record[var].copy_from_slice(&weights);
        }
    }
    Ok(())
}

/// Rao-Blackwellized estimate of `P(var)` recomputed from a Gibbs trace: the
/// average over recorded sweeps of the conditional `var` was drawn from.
///
/// Recomputation needs every sweep, so traces recorded with thinning are
/// rejected.
pub fn gibbs_marginal_estimate(net: &Network, trace: &RunTrace, var: VarId) -> Result<Vec<f64>> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("empty trace".into()));
    }
    if trace.thinning() != 1 {
        return Err(Error::InvalidParameter(
            "Rao-Blackwellized recomputation needs a trace without thinning".into(),
        ));
    }
    if var >= net.num_vars() || trace.width != net.num_vars() {
        return Err(Error::InvalidParameter(format!("variable id {var} does not fit the trace")));
    }
    let mut sum = vec![0.0; net.cardinality(var)];
    let mut mixed = trace.previous().to_vec();
    let mut weights = Vec::new();
    let mut before = trace.previous();
    for now in trace.states() {
        // variables below `var` are already updated within the sweep
        mixed[..var].copy_from_slice(&now[..var]);
        mixed[var..].copy_from_slice(&before[var..]);
        if net.is_evidence(var) {
            sum[now[var]] += 1.0;
        } else {
            net.blanket_weights(&mut mixed, var, &mut weights);
            normalize_in_place(&mut weights).ok_or_else(|| Error::StuckState(net.variable(var).name.clone()))?;
            for (acc, w) in sum.iter_mut().zip(&weights) {
                *acc += w;
            }
        }
        before = now;
    }
    let t = trace.len() as f64;
    Ok(sum.into_iter().map(|s| s / t).collect())
}

/// One single-site Metropolis sweep in variable index order: each non-evidence
/// variable proposes a uniformly chosen different value and accepts it with
/// probability `min(1, P(x') / P(x))`.
pub fn metropolis_sweep<R: Rng + ?Sized>(net: &Network, x: &[usize], rng: &mut R) -> Result<State> {
    net.check_full(x)?;
    let mut y = x.to_vec();
    metropolis_sweep_in_place(net, &mut y, rng);
    Ok(y)
}

fn blanket_weight(net: &Network, x: &[usize], var: VarId) -> f64 {
    let mut w = net.entry(var, x);
    for &c in net.children(var) {
        if w == 0.0 {
            break;
        }
        w *= net.entry(c, x);
    }
    w
}

fn metropolis_sweep_in_place<R: Rng + ?Sized>(net: &Network, x: &mut [usize], rng: &mut R) {
    for var in 0..net.num_vars() {
        let card = net.cardinality(var);
        if net.is_evidence(var) || card < 2 {
            continue;
        }
        let current = x[var];
        let current_w = blanket_weight(net, x, var);
        let mut proposal = rng.gen_range(0..card - 1);
        if proposal >= current {
            proposal += 1;
        }
        x[var] = proposal;
        let proposed_w = blanket_weight(net, x, var);
        let accept = if proposed_w <= 0.0 {
            false
        } else if proposed_w >= current_w {
            true
        } else {
            rng.gen::<f64>() < proposed_w / current_w
        };
        if !accept {
            x[var] = current;
        }
    }
}

struct Accumulator {
    kind: EstimatorKind,
    query: Vec<VarId>,
    offsets: Vec<usize>,
    sums: Vec<f64>,
    weights: Vec<f64>,
}

impl Accumulator {
    fn new(net: &Network, query: &[VarId], kind: EstimatorKind) -> Self {
        let mut offsets = Vec::with_capacity(query.len());
        let mut width = 0;
        for &q in query {
            offsets.push(width);
            width += net.cardinality(q);
        }
        Accumulator {
            kind,
            query: query.to_vec(),
            offsets,
            sums: vec![0.0; width],
            weights: Vec::new(),
        }
    }

    fn add(&mut self, net: &Network, x: &mut [usize], conditionals: Option<&[Vec<f64>]>) -> Result<()> {
        for (k, &q) in self.query.iter().enumerate() {
            let base = self.offsets[k];
            match (self.kind, conditionals) {
                (EstimatorKind::Frequency, _) => self.sums[base + x[q]] += 1.0,
                (EstimatorKind::RaoBlackwell, Some(c)) => {
                    for (acc, w) in self.sums[base..].iter_mut().zip(&c[q]) {
                        *acc += w;
                    }
                }
                (EstimatorKind::RaoBlackwell, None) => {
                    net.blanket_weights(x, q, &mut self.weights);
                    normalize_in_place(&mut self.weights)
                        .ok_or_else(|| Error::StuckState(net.variable(q).name.clone()))?;
                    for (acc, w) in self.sums[base..].iter_mut().zip(&self.weights) {
                        *acc += w;
                    }
                }
            }
        }
        Ok(())
    }

    fn push_running(&self, t: usize, out: &mut Vec<f64>) {
        let n = t as f64;
        out.extend(self.sums.iter().map(|s| s / n));
    }
}

fn advance(
    net: &Network,
    cfg: &SamplerConfig,
    x: &mut State,
    rng: &mut ChaCha8Rng,
    retained: &mut LabelSet,
    conditionals: Option<&mut [Vec<f64>]>,
) -> Result<()> {
    match cfg.method {
        Method::Prune => *x = prune_step_with(net, x, cfg.prune_mode, cfg.cap, rng, retained)?,
        Method::Gibbs => gibbs_sweep_in_place(net, x, rng, conditionals)?,
        Method::Metropolis => metropolis_sweep_in_place(net, x, rng),
    }
    Ok(())
}

/// Performs the transitions of [`run_chain`] without recording anything and
/// returns the final state. Used to time sample generation.
pub fn simulate(net: &Network, cfg: &SamplerConfig) -> Result<State> {
    cfg.validate(net)?;
    let mut rng = chain_rng(cfg.seed, cfg.method, cfg.run);
    let mut x = initial_state(net, &cfg.init, &mut rng, cfg.retry_budget)?;
    let mut retained = LabelSet::empty(net.num_labels());
    let steps = cfg.burn_in + cfg.samples * cfg.thinning;
    for _ in 0..steps {
        advance(net, cfg, &mut x, &mut rng, &mut retained, None)?;
    }
    Ok(x)
}

/// Runs one chain: initialization, burn-in, then `samples` recorded states
/// taken every `thinning` transitions. Deterministic given the configuration.
pub fn run_chain(net: &Network, cfg: &SamplerConfig) -> Result<RunTrace> {
    cfg.validate(net)?;
    let mut rng = chain_rng(cfg.seed, cfg.method, cfg.run);
    let initial = initial_state(net, &cfg.init, &mut rng, cfg.retry_budget)?;
    let n = net.num_vars();
    let estimator = cfg.estimator();
    let mut acc = Accumulator::new(net, &cfg.query, estimator);
    let stride = acc.sums.len();
    let mut x = initial.clone();
    let mut retained = LabelSet::empty(net.num_labels());
    let mut conditionals: Vec<Vec<f64>> = (0..n).map(|v| vec![0.0; net.cardinality(v)]).collect();
    let want_conditionals = cfg.method == Method::Gibbs && estimator == EstimatorKind::RaoBlackwell;

    for _ in 0..cfg.burn_in {
        advance(net, cfg, &mut x, &mut rng, &mut retained, None)?;
    }
    let mut previous = x.clone();
    let mut states = Vec::with_capacity(cfg.samples * n);
    let mut estimates = Vec::with_capacity(cfg.samples * stride);
    for t in 1..=cfg.samples {
        for k in 1..=cfg.thinning {
            let last = k == cfg.thinning;
            if t == 1 && last {
                previous.clone_from(&x);
            }
            let sink = (last && want_conditionals).then_some(conditionals.as_mut_slice());
            advance(net, cfg, &mut x, &mut rng, &mut retained, sink)?;
        }
        states.extend_from_slice(&x);
        let c = want_conditionals.then_some(conditionals.as_slice());
        acc.add(net, &mut x, c)?;
        acc.push_running(t, &mut estimates);
    }
    Ok(RunTrace {
        method: cfg.method,
        estimator,
        thinning: cfg.thinning,
        width: n,
        initial,
        previous,
        states,
        query: acc.query,
        offsets: acc.offsets,
        stride,
        estimates,
    })
}
