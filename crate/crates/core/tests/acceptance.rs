//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so that the lines are always printed.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bnprune::diagnostics::{default_delta_grid, fit_roc, hellinger, samples_to_target, DEFAULT_T_MIN};
use bnprune::exact::{brute_force_marginals, exact_marginals, prune_transition_matrix, DEFAULT_STATE_CAP};
use bnprune::harness::NetworkSource;
use bnprune::io::generate::{block_chain, bloodpressure, two_node_deterministic, BenchmarkSpec};
use bnprune::samplers::{gibbs_marginal_estimate, prune_step};
use bnprune::{
    run_chain, run_experiment, Assignment, ExperimentConfig, InitStrategy, Method, Network, PruneMode, SamplerConfig,
};
use common::{random_network, RandomNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn small_nets() -> Vec<(&'static str, Network)> {
    vec![
        ("two-node", two_node_deterministic()),
        ("bloodpressure", bloodpressure()),
        ("block-chain-2", block_chain(2).unwrap()),
        ("block-chain-3", block_chain(3).unwrap()),
    ]
}

fn detailed_balance() -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, net) in small_nets() {
        let m = prune_transition_matrix(&net).map_err(|e| e.to_string())?;
        let p: Vec<f64> = m.states().iter().map(|x| net.joint_probability(x).unwrap()).collect();
        for i in 0..m.len() {
            for j in 0..m.len() {
                worst = worst.max((p[i] * m.prob(i, j) - p[j] * m.prob(j, i)).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("max |P(x)R(x,y) - P(y)R(y,x)| = {worst:.2e} (tol 1e-12)"))
}

fn exact_transition_value() -> Outcome {
    let net = two_node_deterministic();
    let m = prune_transition_matrix(&net).map_err(|e| e.to_string())?;
    let i = m.index_of(&[0, 0]).unwrap();
    let exact = m.prob(i, i);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let steps = 100_000;
    let stays = (0..steps)
        .filter(|_| prune_step(&net, &[0, 0], PruneMode::Exact, 16, &mut rng).unwrap() == [0, 0])
        .count();
    let empirical = stays as f64 / steps as f64;
    check(
        exact == 0.75 && (empirical - 0.75).abs() <= 0.01,
        format!("R((0,0)->(0,0)) = {exact}, empirical {empirical:.4} (tol 0.01)"),
    )
}

fn stationarity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    for (_, net) in small_nets() {
        let m = prune_transition_matrix(&net).map_err(|e| e.to_string())?;
        let pi = m.target();
        for (a, b) in m.apply_left(&pi).iter().zip(&pi) {
            worst = worst.max((a - b).abs());
        }
        for i in 0..m.len() {
            min_entry = m.row(i).iter().copied().fold(min_entry, f64::min);
        }
    }
    check(
        worst <= 1e-10 && min_entry > 0.0,
        format!("max |piR - pi| = {worst:.2e} (tol 1e-10), min R = {min_entry:.3e}"),
    )
}

fn chain(net: &Network, method: Method, samples: usize, start: Vec<usize>, seed: u64) -> bnprune::RunTrace {
    let mut cfg = SamplerConfig::new(method, samples);
    cfg.init = InitStrategy::Fixed(start);
    cfg.seed = seed;
    cfg.query = (0..net.num_vars()).collect();
    run_chain(net, &cfg).unwrap()
}

fn gibbs_trapping() -> Outcome {
    let net = two_node_deterministic();
    let trapped = chain(&net, Method::Gibbs, 10_000, vec![0, 0], 1);
    let visited: HashSet<&[usize]> = trapped.states().collect();
    let only_origin = visited.len() == 1 && visited.contains(&[0usize, 0][..]);
    let from_low = gibbs_marginal_estimate(&net, &trapped, 0).unwrap()[1];
    let high = chain(&net, Method::Gibbs, 10_000, vec![1, 1], 1);
    let from_high = gibbs_marginal_estimate(&net, &high, 0).unwrap()[1];
    let mut worst: f64 = 0.0;
    for start in [vec![0, 0], vec![1, 1]] {
        let trace = chain(&net, Method::Prune, 10_000, start, 3);
        worst = worst.max((trace.final_estimate(0).unwrap()[0] - 0.5).abs());
    }
    check(
        only_origin && from_low == 0.0 && from_high == 1.0 && worst <= 0.02,
        format!(
            "gibbs visits {} state(s), P(A=1) = {from_low} / {from_high}; prune max |P(A=0) - 0.5| = {worst:.4} (tol 0.02)",
            visited.len()
        ),
    )
}

fn block_chain_escape() -> Outcome {
    let net = block_chain(5).unwrap();
    let mut ok = true;
    let mut gibbs_dev: f64 = 0.0;
    for start in [vec![0, 1, 0, 0, 1], vec![3, 2, 2, 3, 2]] {
        let low = start[0] < 2;
        let trace = chain(&net, Method::Gibbs, 25_000, start, 5);
        for v in 0..5 {
            let mut m = [0.0; 4];
            for x in trace.states() {
                m[x[v]] += 1.0 / trace.len() as f64;
            }
            let (inside, outside) = if low { (&m[..2], &m[2..]) } else { (&m[2..], &m[..2]) };
            ok &= outside.iter().all(|&p| p == 0.0);
            gibbs_dev = inside.iter().map(|p| (p - 0.5).abs()).fold(gibbs_dev, f64::max);
        }
    }
    let trace = chain(&net, Method::Prune, 25_000, vec![0, 0, 0, 0, 0], 5);
    let mut prune_dev: f64 = 0.0;
    for v in 0..5 {
        prune_dev = trace.final_estimate(v).unwrap().iter().map(|p| (p - 0.25).abs()).fold(prune_dev, f64::max);
    }
    check(
        ok && gibbs_dev <= 0.02 && prune_dev <= 0.02,
        format!(
            "gibbs stays in its block: {ok}, max |p - 0.5| = {gibbs_dev:.4}; prune max |p - 0.25| = {prune_dev:.4} (tol 0.02)"
        ),
    )
}

fn oracle_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut with_zeros = 0;
    let nets = 60;
    for seed in 0..nets {
        let vars = 4 + (seed as usize % 9);
        let net = random_network(RandomNet::binary(vars), 1000 + seed);
        with_zeros += usize::from(net.cpts().iter().any(|c| c.values().contains(&0.0)));
        let e = Assignment::empty(vars);
        let ve = exact_marginals(&net, &e).map_err(|e| e.to_string())?;
        let bf = brute_force_marginals(&net, &e, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
        worst = worst.max(ve.max_abs_diff(&bf));
        worst = worst.max(common::max_abs_diff(&common::brute_marginals(&net, &[]), ve.iter()));
    }
    check(
        worst <= 1e-12 && with_zeros > 0,
        format!("{nets} nets ({with_zeros} with zero entries), max diff {worst:.2e} (tol 1e-12)"),
    )
}

fn roc_recovery() -> Outcome {
    let sigma: Vec<f64> = (1..=25_000)
        .map(|t| {
            let t = t as f64;
            0.40 * (1.0 + 2.0 * t.powf(-0.90)) / t.sqrt()
        })
        .collect();
    let fit = fit_roc(&sigma, &default_delta_grid(), DEFAULT_T_MIN).map_err(|e| e.to_string())?;
    let t = samples_to_target(0.40, 0.01).map_err(|e| e.to_string())?;
    check(
        (fit.alpha - 0.40).abs() <= 0.02 && (fit.delta - 0.90).abs() <= 0.1 && t == 1600,
        format!("alpha = {:.4} (tol 0.02), delta = {:.2} (tol 0.1), samples_to_target = {t}", fit.alpha, fit.delta),
    )
}

fn hellinger_checks() -> Outcome {
    let max = hellinger(&[1.0, 0.0], &[0.0, 1.0]).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut symmetric = true;
    let mut self_zero = true;
    for _ in 0..1000 {
        let k = rng.gen_range(2..6);
        let draw = |rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
            let total: f64 = v.iter().sum();
            v.into_iter().map(|x| x / total).collect::<Vec<f64>>()
        };
        let (p, q) = (draw(&mut rng), draw(&mut rng));
        symmetric &= hellinger(&p, &q).unwrap() == hellinger(&q, &p).unwrap();
        self_zero &= hellinger(&p, &p).unwrap() == 0.0;
    }
    check(
        max == 1.0 && symmetric && self_zero,
        format!("H((1,0),(0,1)) = {max}, H(p,p) = 0: {self_zero}, symmetric on 1000 pairs: {symmetric}"),
    )
}

fn grid_convergence() -> Outcome {
    let mut cfg = ExperimentConfig::new(NetworkSource::Benchmark(BenchmarkSpec::Grid {
        rows: 3,
        cols: 3,
        deterministic_fraction: 0.0,
        seed: 1,
    }));
    cfg.methods = Method::ALL.to_vec();
    cfg.runs = 20;
    cfg.samples = 25_000;
    cfg.record_trace = false;
    cfg.time_target_run = false;
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let finals: Vec<(Method, f64)> = report
        .methods
        .iter()
        .map(|m| (m.method, m.ahd.as_ref().and_then(|a| a.last().copied()).unwrap_or(f64::NAN)))
        .collect();
    let detail = finals
        .iter()
        .map(|(m, h)| format!("{m} {h:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(
        finals.len() == 3 && finals.iter().all(|&(_, h)| h <= 0.05),
        format!("AHD at T=25000: {detail} (tol 0.05)"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("detailed balance", Duration::from_secs(10), detailed_balance),
        ("exact transition value", Duration::from_secs(30), exact_transition_value),
        ("stationarity and regularity", Duration::from_secs(10), stationarity),
        ("gibbs trapping", Duration::from_secs(60), gibbs_trapping),
        ("block-chain escape", Duration::from_secs(120), block_chain_escape),
        ("exact oracle consistency", Duration::from_secs(60), oracle_consistency),
        ("convergence fit recovery", Duration::from_secs(10), roc_recovery),
        ("hellinger distance", Duration::from_secs(10), hellinger_checks),
        ("convergence without determinism", Duration::from_secs(300), grid_convergence),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over time budget {budget:?}")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:>2}. {name}: {detail} [{:.2}s]", i + 1, elapsed.as_secs_f64());
    }
    println!(
        "INFO 10. not reproduced: published alpha values and wall-clock timings depend on the original \
         software and hardware; covered by the fit recovery and harness determinism checks"
    );
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
