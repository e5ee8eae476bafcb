use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::bail;
use bnprune::diagnostics::{default_delta_grid, fit_roc, samples_to_target, DEFAULT_SIGMA_TARGET, DEFAULT_T_MIN};
use bnprune::exact::exact_marginals;
use bnprune::harness::{
    resolve_evidence, resolve_variable, run_experiment, select_evidence, EvidenceSpec, ExperimentConfig,
    NetworkSource, RocInput, DEFAULT_TIMING_LIMIT, ROC_HEADER, TRACE_HEADER,
};
use bnprune::io::{generate, save_network, BenchmarkSpec};
use bnprune::prune::{PruneMode, DEFAULT_PRUNED_CAP};
use bnprune::samplers::{run_chain, InitStrategy, Method, SamplerConfig};
use bnprune::{Assignment, Error, Network};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_CONFIG: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "bnprune", version, about = "Prune Sampling and baseline MCMC for discrete Bayesian networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark network to a native JSON file.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact posterior marginals as CSV.
    Exact {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        evidence: EvidenceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single chain and write its trace as CSV.
    Sample {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        evidence: EvidenceArgs,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value = "prune")]
        method: Method,
        /// Run index selecting the random stream.
        #[arg(long, default_value_t = 0)]
        run: u64,
        #[arg(long = "query")]
        query: Vec<String>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full multi-chain experiment and write trace, ahd, sigma and roc CSV files.
    Bench {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        evidence: EvidenceArgs,
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long = "method", required = true)]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long = "query")]
        query: Vec<String>,
        /// Target `VAR=STATE` of the spread series.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        /// Skip trace.csv rows.
        #[arg(long)]
        no_trace: bool,
        /// Skip the timed samples-to-target run.
        #[arg(long)]
        no_timing: bool,
        /// Largest samples-to-target count that is timed.
        #[arg(long, default_value_t = DEFAULT_TIMING_LIMIT)]
        timing_limit: u64,
        /// Fit the convergence model to the spread's stddev or variance.
        #[arg(long, default_value = "stddev")]
        roc_input: RocInput,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the convergence model to an existing sigma.csv.
    Roc {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value_t = DEFAULT_T_MIN)]
        t_min: usize,
        #[arg(long, default_value_t = DEFAULT_SIGMA_TARGET)]
        sigma_target: f64,
        /// Fit the convergence model to the spread's stddev or variance.
        #[arg(long, default_value = "stddev")]
        roc_input: RocInput,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    TwoNode,
    BlockChain,
    Grid,
    Bloodpressure,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Block-chain length.
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Fraction of deterministic grid columns.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    grid_seed: u64,
}

impl FamilyArgs {
    fn spec(&self) -> BenchmarkSpec {
        match self.family {
            Family::TwoNode => BenchmarkSpec::TwoNodeDeterministic,
            Family::BlockChain => BenchmarkSpec::BlockChain { n: self.n },
            Family::Grid => BenchmarkSpec::Grid {
                rows: self.rows,
                cols: self.cols,
                deterministic_fraction: self.fraction,
                seed: self.grid_seed,
            },
            Family::Bloodpressure => BenchmarkSpec::BloodPressure,
        }
    }
}

#[derive(Args)]
struct NetArgs {
    /// Network file (`.bif` or native JSON).
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    net: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    grid_seed: u64,
}

impl NetArgs {
    fn source(&self) -> NetworkSource {
        match (&self.net, self.family) {
            (Some(path), _) => NetworkSource::File(path.clone()),
            (None, Some(family)) => NetworkSource::Benchmark(
                FamilyArgs {
                    family,
                    n: self.n,
                    rows: self.rows,
                    cols: self.cols,
                    fraction: self.fraction,
                    grid_seed: self.grid_seed,
                }
                .spec(),
            ),
            (None, None) => unreachable!("clap requires --net or --family"),
        }
    }
}

#[derive(Args)]
struct EvidenceArgs {
    /// Observed `VAR=STATE`; repeatable.
    #[arg(long = "evidence", conflicts_with = "evidence_fraction")]
    evidence: Vec<String>,
    /// Fraction of variables observed from one forward sample.
    #[arg(long)]
    evidence_fraction: Option<f64>,
}

impl EvidenceArgs {
    fn spec(&self) -> anyhow::Result<EvidenceSpec> {
        if let Some(f) = self.evidence_fraction {
            return Ok(EvidenceSpec::Fraction(f));
        }
        if self.evidence.is_empty() {
            return Ok(EvidenceSpec::None);
        }
        Ok(EvidenceSpec::Explicit(
            self.evidence.iter().map(|p| split_pair(p)).collect::<anyhow::Result<_>>()?,
        ))
    }

    fn resolve(&self, net: &Network, seed: u64) -> anyhow::Result<Assignment> {
        Ok(match self.spec()? {
            EvidenceSpec::None => Assignment::empty(net.num_vars()),
            EvidenceSpec::Explicit(pairs) => resolve_evidence(net, &pairs)?,
            EvidenceSpec::Fraction(f) => select_evidence(net, f, seed)?,
        })
    }
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long, default_value_t = 25_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// forward, random, hybrid:P or map:TRIES:P.
    #[arg(long, default_value = "forward")]
    init: InitStrategy,
    /// exact or bounded:SIZE:BUDGET.
    #[arg(long, default_value = "exact")]
    prune_mode: PruneMode,
    /// Maximum number of states in an enumerated pruned space.
    #[arg(long, default_value_t = DEFAULT_PRUNED_CAP)]
    cap: usize,
}

fn split_pair(pair: &str) -> anyhow::Result<(String, String)> {
    let (k, v) = pair
        .split_once('=')
        .ok_or_else(|| Error::InvalidParameter(format!("expected VAR=STATE, got `{pair}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn writer(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen { family, out } => {
            let net = generate(&family.spec())?;
            save_network(&net, &out)?;
        }
        Command::Exact {
            net,
            evidence,
            seed,
            out,
        } => {
            let net = net.source().load()?;
            let e = evidence.resolve(&net, seed)?;
            let marginals = exact_marginals(&net, &e)?;
            let mut w = csv::Writer::from_writer(writer(out.as_deref())?);
            w.write_record(["variable", "state", "probability"])?;
            for (v, m) in marginals.iter().enumerate() {
                let var = net.variable(v);
                for (s, p) in m.iter().enumerate() {
                    w.write_record([var.name.as_str(), &var.states[s], &p.to_string()])?;
                }
            }
            w.flush()?;
        }
        Command::Sample {
            net,
            evidence,
            chain,
            method,
            run,
            query,
            out,
        } => {
            let base = net.source().load()?;
            let e = evidence.resolve(&base, chain.seed)?;
            let net = base.reduce_evidence(&e)?;
            let query = if query.is_empty() {
                (0..net.num_vars()).filter(|&v| !net.is_evidence(v)).collect()
            } else {
                query.iter().map(|q| resolve_variable(&net, q)).collect::<Result<Vec<_>, _>>()?
            };
            let cfg = SamplerConfig {
                burn_in: chain.burn_in,
                thinning: chain.thin,
                init: chain.init,
                seed: chain.seed,
                run,
                prune_mode: chain.prune_mode,
                cap: chain.cap,
                query: query.clone(),
                ..SamplerConfig::new(method, chain.samples)
            };
            let trace = run_chain(&net, &cfg)?;
            let mut w = csv::Writer::from_writer(writer(out.as_deref())?);
            w.write_record(TRACE_HEADER)?;
            for (t, x) in trace.states().enumerate() {
                for &q in &query {
                    let var = net.variable(q);
                    let estimate = trace.estimate(t, q).expect("query recorded")[0];
                    w.write_record([
                        method.name(),
                        &run.to_string(),
                        &(t + 1).to_string(),
                        &var.name,
                        &var.states[x[q]],
                        &estimate.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
        Command::Bench {
            net,
            evidence,
            chain,
            methods,
            runs,
            query,
            target,
            workers,
            no_trace,
            no_timing,
            timing_limit,
            roc_input,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(net.source());
            cfg.methods = methods;
            cfg.runs = runs;
            cfg.samples = chain.samples;
            cfg.burn_in = chain.burn_in;
            cfg.thinning = chain.thin;
            cfg.seed = chain.seed;
            cfg.evidence = evidence.spec()?;
            cfg.query = query;
            cfg.target = target.as_deref().map(split_pair).transpose()?;
            cfg.prune_mode = chain.prune_mode;
            cfg.init = chain.init;
            cfg.cap = chain.cap;
            cfg.workers = workers;
            cfg.record_trace = !no_trace;
            cfg.time_target_run = !no_timing;
            cfg.timing_limit = timing_limit;
            cfg.roc_input = roc_input;
            cfg.out_dir = Some(out.clone());
            let report = run_experiment(&cfg)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            for m in &report.methods {
                let last = |s: &Option<Vec<f64>>| s.as_ref().and_then(|s| s.last().copied());
                println!(
                    "{:<10} runs={} ahd={} sigma2={} alpha={} t_target={}",
                    m.method,
                    m.completed_runs,
                    last(&m.ahd).map_or("-".into(), |v| format!("{v:.4}")),
                    last(&m.sigma).map_or("-".into(), |v| format!("{v:.3e}")),
                    m.roc.map_or("-".into(), |f| format!("{:.4}", f.alpha)),
                    m.t_target.map_or("-".into(), |t| t.to_string()),
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Roc {
            sigma,
            t_min,
            sigma_target,
            roc_input,
            out,
        } => {
            let series = read_sigma(&sigma)?;
            let mut w = csv::Writer::from_writer(writer(out.as_deref())?);
            w.write_record(ROC_HEADER)?;
            for (method, values) in series {
                match fit_roc(&roc_input.apply(&values), &default_delta_grid(), t_min) {
                    Ok(fit) => {
                        let t = samples_to_target(fit.alpha, sigma_target)?;
                        w.write_record([
                            method,
                            fit.alpha.to_string(),
                            fit.beta.to_string(),
                            fit.delta.to_string(),
                            fit.residual.to_string(),
                            t.to_string(),
                            String::new(),
                        ])?;
                    }
                    Err(e) => {
                        eprintln!("warning: {method}: {e}");
                        w.write_record([method.as_str(), "", "", "", "", "", ""])?;
                    }
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Per-method sigma series from a sigma.csv, in order of first appearance.
fn read_sigma(path: &Path) -> anyhow::Result<Vec<(String, Vec<f64>)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["method", "t", "sigma2"] {
        bail!(Error::InvalidParameter(format!(
            "{}: expected header method,t,sigma2",
            path.display()
        )));
    }
    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let bad = || Error::InvalidParameter(format!("{}: malformed row {}", path.display(), line + 2));
        let method = record.get(0).ok_or_else(bad)?.to_string();
        let t: usize = record.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let value: f64 = record.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let entry = match series.iter_mut().find(|(m, _)| *m == method) {
            Some(entry) => entry,
            None => {
                series.push((method, Vec::new()));
                series.last_mut().expect("just pushed")
            }
        };
        if t != entry.1.len() + 1 {
            bail!(Error::InvalidParameter(format!(
                "{}: steps of `{}` must run 1, 2, 3, ... (row {})",
                path.display(),
                entry.0,
                line + 2
            )));
        }
        entry.1.push(value);
    }
    Ok(series)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_capacity() {
                EXIT_CAPACITY
            } else if e.is_io() {
                EXIT_IO
            } else {
                EXIT_CONFIG
            };
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            return if e.is_io_error() { EXIT_IO } else { EXIT_CONFIG };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_CONFIG
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
