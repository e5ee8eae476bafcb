//! Batch experiments: many independent chains per method, accuracy and
//! convergence diagnostics, timing, and CSV output.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::{
    average_series, default_delta_grid, fit_roc, samples_to_target, sigma_series, trace_ahd, EstimateSeries, RocFit,
    DEFAULT_SIGMA_TARGET, DEFAULT_T_MIN,
};
use crate::error::{Error, Result};
use crate::exact::{exact_marginals, MarginalTable};
use crate::io::{generate, load_network, BenchmarkSpec};
use crate::network::{Assignment, Network, VarId};
use crate::prune::{PruneMode, DEFAULT_PRUNED_CAP};
use crate::samplers::{forward_sample, run_chain, simulate, EstimatorKind, InitStrategy, Method, SamplerConfig, DEFAULT_RETRY_BUDGET};

/// Which transform of the cross-run spread the convergence model is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RocInput {
    /// `sqrt(<y^2> - <y>^2)`, the standard deviation of the running estimate.
    #[default]
    StdDev,
    /// `<y^2> - <y>^2` as is.
    Variance,
}

impl RocInput {
    pub fn apply(self, sigma2: &[f64]) -> Vec<f64> {
        match self {
            RocInput::StdDev => sigma2.iter().map(|v| v.max(0.0).sqrt()).collect(),
            RocInput::Variance => sigma2.to_vec(),
        }
    }
}

impl std::str::FromStr for RocInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stddev" => Ok(RocInput::StdDev),
            "variance" => Ok(RocInput::Variance),
            _ => Err(Error::InvalidParameter(format!("roc input `{s}`: expected stddev or variance"))),
        }
    }
}

/// Default largest sample count for which the samples-to-target run is timed.
pub const DEFAULT_TIMING_LIMIT: u64 = 1_000_000;

/// Run index reserved for the timed run, outside the range used by regular runs.
const TIMING_RUN: u64 = (1 << 48) - 1;

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    File(PathBuf),
    Benchmark(BenchmarkSpec),
    Network(Network),
}

impl NetworkSource {
    pub fn load(&self) -> Result<Network> {
        match self {
            NetworkSource::File(path) => load_network(path),
            NetworkSource::Benchmark(spec) => generate(spec),
            NetworkSource::Network(net) => Ok(net.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum EvidenceSpec {
    #[default]
    None,
    /// `(variable, state)` pairs by name; a state may also be given as its index.
    Explicit(Vec<(String, String)>),
    /// Fraction of variables observed, chosen by [`select_evidence`].
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: NetworkSource,
    pub methods: Vec<Method>,
    pub runs: usize,
    pub samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub evidence: EvidenceSpec,
    /// Query variables by name; empty means every non-evidence variable.
    pub query: Vec<String>,
    /// `(variable, state)` whose running estimate feeds the spread series.
    pub target: Option<(String, String)>,
    pub prune_mode: PruneMode,
    pub init: InitStrategy,
    pub cap: usize,
    pub retry_budget: usize,
    pub estimator: Option<EstimatorKind>,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    pub sigma_target: f64,
    pub t_min: usize,
    pub delta_grid: Vec<f64>,
    pub roc_input: RocInput,
    /// Keep per-step query values for trace.csv.
    pub record_trace: bool,
    /// Time a fresh run of the samples-to-target count.
    pub time_target_run: bool,
    /// Timed runs longer than this are skipped with a warning.
    pub timing_limit: u64,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(source: NetworkSource) -> Self {
        ExperimentConfig {
            source,
            methods: vec![Method::Prune],
            runs: 100,
            samples: 25_000,
            burn_in: 0,
            thinning: 1,
            seed: 0,
            evidence: EvidenceSpec::None,
            query: Vec::new(),
            target: None,
            prune_mode: PruneMode::Exact,
            init: InitStrategy::Forward,
            cap: DEFAULT_PRUNED_CAP,
            retry_budget: DEFAULT_RETRY_BUDGET,
            estimator: None,
            workers: None,
            sigma_target: DEFAULT_SIGMA_TARGET,
            t_min: DEFAULT_T_MIN,
            delta_grid: default_delta_grid(),
            roc_input: RocInput::StdDev,
            record_trace: true,
            time_target_run: true,
            timing_limit: DEFAULT_TIMING_LIMIT,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidParameter("number of runs must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("number of samples must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be at least 1".into()));
        }
        if let EvidenceSpec::Fraction(f) = self.evidence {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!("evidence fraction {f} outside [0, 1]")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("worker count must be at least 1".into()));
        }
        Ok(())
    }

    fn sampler_config(&self, method: Method, run: u64, query: Vec<VarId>) -> SamplerConfig {
        SamplerConfig {
            method,
            samples: self.samples,
            burn_in: self.burn_in,
            thinning: self.thinning,
            init: self.init.clone(),
            seed: self.seed,
            run,
            prune_mode: self.prune_mode,
            cap: self.cap,
            retry_budget: self.retry_budget,
            query,
            estimator: self.estimator,
        }
    }
}

/// Per-step query values and target-state estimates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub run: usize,
    /// `values[t * q + k]`: state of query variable `k` at step `t`.
    pub values: Vec<usize>,
    /// `estimates[t * q + k]`: running estimate of query variable `k` taking its first state.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodReport {
    pub method: Method,
    pub completed_runs: usize,
    pub ahd: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub roc: Option<RocFit>,
    pub t_target: Option<u64>,
    pub wall_seconds: Option<f64>,
    /// Final running marginals per completed run, then per query variable.
    pub final_marginals: Vec<Vec<Vec<f64>>>,
    pub traces: Vec<TraceRecord>,
}

impl MethodReport {
    /// Final marginal of query variable `k`, averaged over completed runs.
    pub fn mean_final_marginal(&self, k: usize) -> Option<Vec<f64>> {
        let first = self.final_marginals.first()?.get(k)?;
        let mut mean = vec![0.0; first.len()];
        for run in &self.final_marginals {
            for (m, v) in mean.iter_mut().zip(&run[k]) {
                *m += v;
            }
        }
        let n = self.final_marginals.len() as f64;
        Some(mean.into_iter().map(|m| m / n).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// The network with evidence applied.
    pub network: Network,
    pub evidence: Assignment,
    pub query: Vec<VarId>,
    pub target: (VarId, usize),
    pub samples: usize,
    pub exact: Option<MarginalTable>,
    pub methods: Vec<MethodReport>,
    pub warnings: Vec<String>,
}

/// Evidence made of `ceil(fraction * n)` randomly chosen variables fixed to
/// the values of one forward sample, so that `P(e) > 0`.
pub fn select_evidence(net: &Network, fraction: f64, seed: u64) -> Result<Assignment> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("evidence fraction {fraction} outside [0, 1]")));
    }
    let n = net.num_vars();
    let raw = fraction * n as f64;
    // guard against 0.3 * 10 = 3.0000000000000004 rounding up
    let k = if (raw - raw.round()).abs() < 1e-9 {
        raw.round() as usize
    } else {
        raw.ceil() as usize
    };
    let mut evidence = Assignment::empty(n);
    if k == 0 {
        return Ok(evidence);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = forward_sample(net, &mut rng, DEFAULT_RETRY_BUDGET)?;
    let mut chosen = sample(&mut rng, n, k.min(n)).into_vec();
    chosen.sort_unstable();
    for v in chosen {
        evidence.set(v, x[v]);
    }
    Ok(evidence)
}

/// Parses `name=state` pairs against `net`. States may be given by name or index.
pub fn resolve_evidence(net: &Network, pairs: &[(String, String)]) -> Result<Assignment> {
    let mut evidence = Assignment::empty(net.num_vars());
    for (name, state) in pairs {
        let var = resolve_variable(net, name)?;
        let s = resolve_state(net, var, state)?;
        if evidence.get(var).is_some_and(|prev| prev != s) {
            return Err(Error::InvalidParameter(format!("conflicting evidence for `{name}`")));
        }
        evidence.set(var, s);
    }
    Ok(evidence)
}

pub fn resolve_variable(net: &Network, name: &str) -> Result<VarId> {
    net.variable_id(name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown variable `{name}`")))
}

pub fn resolve_state(net: &Network, var: VarId, state: &str) -> Result<usize> {
    let v = net.variable(var);
    v.state_index(state)
        .or_else(|| state.parse::<usize>().ok().filter(|&s| s < v.cardinality()))
        .ok_or_else(|| Error::InvalidParameter(format!("unknown state `{state}` of `{}`", v.name)))
}

struct RunOutcome {
    ahd: Option<Vec<f64>>,
    target: Vec<f64>,
    finals: Vec<Vec<f64>>,
    trace: Option<TraceRecord>,
}

/// Runs every configured method and computes its diagnostics. CSV files are
/// written when `cfg.out_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let base = cfg.source.load()?;
    let evidence = match &cfg.evidence {
        EvidenceSpec::None => Assignment::empty(base.num_vars()),
        EvidenceSpec::Explicit(pairs) => resolve_evidence(&base, pairs)?,
        EvidenceSpec::Fraction(f) => select_evidence(&base, *f, cfg.seed)?,
    };
    let net = base.reduce_evidence(&evidence)?;
    let mut warnings = Vec::new();

    let query: Vec<VarId> = if cfg.query.is_empty() {
        let free: Vec<VarId> = (0..net.num_vars()).filter(|&v| !net.is_evidence(v)).collect();
        if free.is_empty() {
            (0..net.num_vars()).collect()
        } else {
            free
        }
    } else {
        cfg.query
            .iter()
            .map(|q| resolve_variable(&net, q))
            .collect::<Result<_>>()?
    };
    let target = match &cfg.target {
        Some((var, state)) => {
            let v = resolve_variable(&net, var)?;
            (v, resolve_state(&net, v, state)?)
        }
        None => {
            let order = net.topological_order();
            let v = order
                .iter()
                .rev()
                .find(|&&v| !net.is_evidence(v))
                .or(order.last())
                .copied()
                .expect("networks have at least one variable");
            (v, 0)
        }
    };
    let mut recorded = query.clone();
    if !recorded.contains(&target.0) {
        recorded.push(target.0);
    }

    let exact = match exact_marginals(&base, &evidence) {
        Ok(m) => Some(m),
        Err(e) if e.is_capacity() => {
            warnings.push(format!("exact marginals unavailable, AHD skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let mut seen = HashSet::new();
    let methods: Vec<Method> = cfg.methods.iter().copied().filter(|m| seen.insert(*m)).collect();
    let mut reports = Vec::with_capacity(methods.len());
    for method in methods {
        let outcomes: Vec<Result<RunOutcome>> = pool.install(|| {
            (0..cfg.runs)
                .into_par_iter()
                .map(|run| {
                    let sc = cfg.sampler_config(method, run as u64, recorded.clone());
                    let trace = run_chain(&net, &sc)?;
                    let ahd = exact
                        .as_ref()
                        .map(|m| trace_ahd(&trace, m, &query))
                        .transpose()?;
                    let target_series = (0..trace.len())
                        .map(|t| trace.estimate(t, target.0).expect("target recorded")[target.1])
                        .collect();
                    let finals = query
                        .iter()
                        .map(|&q| trace.final_estimate(q).expect("query recorded").to_vec())
                        .collect();
                    let record = cfg.record_trace.then(|| {
                        let mut values = Vec::with_capacity(trace.len() * query.len());
                        let mut estimates = Vec::with_capacity(trace.len() * query.len());
                        for (t, x) in trace.states().enumerate() {
                            for &q in &query {
                                values.push(x[q]);
                                estimates.push(trace.estimate(t, q).expect("query recorded")[0]);
                            }
                        }
                        TraceRecord { run, values, estimates }
                    });
                    Ok(RunOutcome {
                        ahd,
                        target: target_series,
                        finals,
                        trace: record,
                    })
                })
                .collect()
        });

        let mut completed = Vec::new();
        for (run, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(o) => completed.push(o),
                Err(e) => warnings.push(format!("{method} run {run} failed: {e}")),
            }
        }

        let ahd = if exact.is_some() && !completed.is_empty() {
            let series: Vec<Vec<f64>> = completed.iter().filter_map(|o| o.ahd.clone()).collect();
            Some(average_series(&series)?)
        } else {
            None
        };
        let sigma = if completed.len() >= 2 {
            let series = EstimateSeries::new(completed.iter().map(|o| o.target.clone()).collect())?;
            Some(sigma_series(&series)?)
        } else {
            warnings.push(format!(
                "{method}: spread needs at least 2 completed runs, got {}",
                completed.len()
            ));
            None
        };
        let roc = match sigma
            .as_deref()
            .map(|s| fit_roc(&cfg.roc_input.apply(s), &cfg.delta_grid, cfg.t_min))
        {
            Some(Ok(fit)) => Some(fit),
            Some(Err(e)) => {
                warnings.push(format!("{method}: convergence fit failed: {e}"));
                None
            }
            None => None,
        };
        let t_target = roc
            .map(|fit| samples_to_target(fit.alpha, cfg.sigma_target))
            .transpose()?;
        let wall_seconds = match t_target {
            Some(t) if cfg.time_target_run && t > cfg.timing_limit => {
                warnings.push(format!(
                    "{method}: timed run of {t} samples skipped (limit {})",
                    cfg.timing_limit
                ));
                None
            }
            Some(t) if cfg.time_target_run && t > 0 => {
                let mut sc = cfg.sampler_config(method, TIMING_RUN, Vec::new());
                sc.samples = usize::try_from(t).unwrap_or(usize::MAX);
                let start = Instant::now();
                match simulate(&net, &sc) {
                    Ok(_) => Some(start.elapsed().as_secs_f64()),
                    Err(e) => {
                        warnings.push(format!("{method}: timed run failed: {e}"));
                        None
                    }
                }
            }
            _ => None,
        };
        reports.push(MethodReport {
            method,
            completed_runs: completed.len(),
            ahd,
            sigma,
            roc,
            t_target,
            wall_seconds,
            final_marginals: completed.iter().map(|o| o.finals.clone()).collect(),
            traces: completed.into_iter().filter_map(|o| o.trace).collect(),
        });
    }

    let report = ExperimentReport {
        network: net,
        evidence,
        query,
        target,
        samples: cfg.samples,
        exact,
        methods: reports,
        warnings,
    };
    if let Some(dir) = &cfg.out_dir {
        emit_csv(&report, dir)?;
    }
    Ok(report)
}

pub const TRACE_HEADER: [&str; 6] = ["method", "run", "t", "query_var", "value", "estimate"];
pub const AHD_HEADER: [&str; 3] = ["method", "t", "ahd"];
pub const SIGMA_HEADER: [&str; 3] = ["method", "t", "sigma2"];
pub const ROC_HEADER: [&str; 7] = ["method", "alpha", "beta", "delta", "residual", "t_target", "wall_seconds"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn wrap(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::csv(path, e)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

/// Writes trace.csv, ahd.csv, sigma.csv and roc.csv into `dir`. A report
/// without methods produces only a header-only roc.csv.
pub fn emit_csv(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let net = &report.network;

    let roc_path = dir.join("roc.csv");
    let mut roc = csv_writer(&roc_path)?;
    roc.write_record(ROC_HEADER).map_err(wrap(&roc_path))?;
    for m in &report.methods {
        roc.write_record([
            m.method.name().to_string(),
            opt(m.roc.map(|f| f.alpha)),
            opt(m.roc.map(|f| f.beta)),
            opt(m.roc.map(|f| f.delta)),
            opt(m.roc.map(|f| f.residual)),
            opt(m.t_target),
            opt(m.wall_seconds),
        ])
        .map_err(wrap(&roc_path))?;
    }
    roc.flush().map_err(|e| Error::io(&roc_path, e))?;
    if report.methods.is_empty() {
        return Ok(());
    }

    let trace_path = dir.join("trace.csv");
    let mut trace = csv_writer(&trace_path)?;
    trace.write_record(TRACE_HEADER).map_err(wrap(&trace_path))?;
    let q = report.query.len();
    for m in &report.methods {
        for record in &m.traces {
            for (t, (values, estimates)) in record.values.chunks(q).zip(record.estimates.chunks(q)).enumerate() {
                for (k, &var) in report.query.iter().enumerate() {
                    let v = net.variable(var);
                    trace
                        .write_record([
                            m.method.name(),
                            &record.run.to_string(),
                            &(t + 1).to_string(),
                            &v.name,
                            &v.states[values[k]],
                            &estimates[k].to_string(),
                        ])
                        .map_err(wrap(&trace_path))?;
                }
            }
        }
    }
    trace.flush().map_err(|e| Error::io(&trace_path, e))?;

    for (name, header, pick) in [
        ("ahd.csv", AHD_HEADER, (|m: &MethodReport| m.ahd.as_ref()) as fn(&MethodReport) -> Option<&Vec<f64>>),
        ("sigma.csv", SIGMA_HEADER, |m: &MethodReport| m.sigma.as_ref()),
    ] {
        let path = dir.join(name);
        let mut w = csv_writer(&path)?;
        w.write_record(header).map_err(wrap(&path))?;
        for m in &report.methods {
            for (t, v) in pick(m).into_iter().flatten().enumerate() {
                w.write_record([m.method.name(), &(t + 1).to_string(), &v.to_string()])
                    .map_err(wrap(&path))?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
