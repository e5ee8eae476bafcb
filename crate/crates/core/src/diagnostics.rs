//! Accuracy and convergence metrics over sampler output.

use crate::error::{Error, Result};
use crate::exact::MarginalTable;
use crate::network::VarId;
use crate::samplers::RunTrace;

/// Tolerance on the total mass of a distribution passed to [`hellinger`].
pub const MASS_TOLERANCE: f64 = 1e-6;
/// First step used by [`fit_roc`] unless configured otherwise.
pub const DEFAULT_T_MIN: usize = 10;
/// Variance level at which the samples-to-target count is reported.
pub const DEFAULT_SIGMA_TARGET: f64 = 0.01;

/// Hellinger distance `sqrt(sum (sqrt p - sqrt q)^2 / 2)`.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidParameter(format!(
            "distributions of length {} and {} cannot be compared",
            p.len(),
            q.len()
        )));
    }
    for d in [p, q] {
        let mass: f64 = d.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE || d.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "not a probability vector (mass {mass})"
            )));
        }
    }
    Ok(hellinger_unchecked(p, q))
}

fn hellinger_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let sum: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    (sum / 2.0).sqrt().min(1.0)
}

/// Per-step Hellinger distance of one trace's running marginals to `exact`,
/// averaged over `query`.
pub fn trace_ahd(trace: &RunTrace, exact: &MarginalTable, query: &[VarId]) -> Result<Vec<f64>> {
    if query.is_empty() {
        return Err(Error::InvalidParameter("no query variables".into()));
    }
    let mut out = Vec::with_capacity(trace.len());
    for t in 0..trace.len() {
        let mut total = 0.0;
        for &v in query {
            let estimate = trace.estimate(t, v).ok_or_else(|| {
                Error::InvalidParameter(format!("variable id {v} was not recorded in the trace"))
            })?;
            if v >= exact.len() {
                return Err(Error::InvalidParameter(format!("no exact marginal for variable id {v}")));
            }
            total += hellinger(estimate, exact.get(v))?;
        }
        out.push(total / query.len() as f64);
    }
    Ok(out)
}

/// Average Hellinger distance at each step, over query variables and runs.
pub fn ahd_series(traces: &[RunTrace], exact: &MarginalTable, query: &[VarId]) -> Result<Vec<f64>> {
    let per_run = traces
        .iter()
        .map(|t| trace_ahd(t, exact, query))
        .collect::<Result<Vec<_>>>()?;
    average_series(&per_run)
}

/// Element-wise mean of equally long series.
pub fn average_series(series: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidParameter("no runs to average".into()))?;
    if series.iter().any(|s| s.len() != first.len()) {
        return Err(Error::InvalidParameter("runs have different lengths".into()));
    }
    let n = series.len() as f64;
    Ok((0..first.len())
        .map(|t| series.iter().map(|s| s[t]).sum::<f64>() / n)
        .collect())
}

/// Running estimates `y_s(t)` of one target probability, one row per run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    runs: usize,
    steps: usize,
    values: Vec<f64>,
}

impl EstimateSeries {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let steps = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != steps) {
            return Err(Error::InvalidParameter("estimate series must be rectangular".into()));
        }
        if rows.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("estimates must lie in [0, 1]".into()));
        }
        Ok(EstimateSeries {
            runs: rows.len(),
            steps,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Target estimates of the given traces for `var = state`.
    pub fn from_traces(traces: &[RunTrace], var: VarId, state: usize) -> Result<Self> {
        let rows = traces
            .iter()
            .map(|tr| {
                (0..tr.len())
                    .map(|t| {
                        tr.estimate(t, var).map(|e| e[state]).ok_or_else(|| {
                            Error::InvalidParameter(format!("variable id {var} was not recorded in the trace"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        EstimateSeries::new(rows)
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn get(&self, run: usize, t: usize) -> f64 {
        self.values[run * self.steps + t]
    }

    pub fn run(&self, run: usize) -> &[f64] {
        &self.values[run * self.steps..(run + 1) * self.steps]
    }
}

/// Cross-run spread `<y_t^2> - <y_t>^2` at each step.
///
/// Values at each step are summed in sorted order, so the result does not
/// depend on the order of the runs.
pub fn sigma_series(series: &EstimateSeries) -> Result<Vec<f64>> {
    if series.runs() < 2 {
        return Err(Error::InvalidParameter(format!(
            "spread needs at least 2 runs, got {}",
            series.runs()
        )));
    }
    let n = series.runs() as f64;
    let mut column = Vec::with_capacity(series.runs());
    Ok((0..series.steps())
        .map(|t| {
            column.clear();
            column.extend((0..series.runs()).map(|s| series.get(s, t)));
            column.sort_by(f64::total_cmp);
            let mean = column.iter().sum::<f64>() / n;
            column.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n
        })
        .collect())
}

/// Fit of `g(t) = sigma_t^2 sqrt(t) = alpha (1 + beta t^-delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocFit {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub t_min: usize,
    /// Euclidean norm of the least-squares residuals.
    pub residual: f64,
}

/// `0.05, 0.10, ..., 2.00`.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=40).map(|k| k as f64 / 20.0).collect()
}

/// Fits the convergence model to `sigma`, where `sigma[i]` belongs to step
/// `t = i + 1`. Only steps `t >= t_min` are used. For every exponent in
/// `delta_grid`, `g` is regressed on `(1, t^-delta)`; the exponent with the
/// smallest residual wins, the intercept is `alpha` and `beta = slope / alpha`.
pub fn fit_roc(sigma: &[f64], delta_grid: &[f64], t_min: usize) -> Result<RocFit> {
    if delta_grid.is_empty() || delta_grid.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidParameter("delta grid must be non-empty and positive".into()));
    }
    let t_min = t_min.max(1);
    let points: Vec<(f64, f64)> = sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| ((i + 1) as f64, s))
        .filter(|&(t, _)| t >= t_min as f64)
        .map(|(t, s)| (t, s * t.sqrt()))
        .collect();
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} points at or after t = {t_min}",
            points.len()
        )));
    }
    if points.iter().any(|&(_, g)| !g.is_finite()) {
        return Err(Error::DegenerateFit("non-finite series value".into()));
    }
    if points.iter().all(|&(_, g)| g == 0.0) {
        return Err(Error::DegenerateFit("series is identically zero".into()));
    }
    let n = points.len() as f64;
    let mean_g = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut best: Option<RocFit> = None;
    for &delta in delta_grid {
        let xs: Vec<f64> = points.iter().map(|&(t, _)| t.powf(-delta)).collect();
        let mean_x = xs.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
        let sxg: f64 = xs.iter().zip(&points).map(|(x, p)| (x - mean_x) * (p.1 - mean_g)).sum();
        if sxx <= 0.0 {
            continue;
        }
        let slope = sxg / sxx;
        let intercept = mean_g - slope * mean_x;
        let residual = xs
            .iter()
            .zip(&points)
            .map(|(x, p)| (p.1 - intercept - slope * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if best.map_or(true, |b| residual < b.residual) {
            best = Some(RocFit {
                alpha: intercept,
                beta: if intercept == 0.0 { 0.0 } else { slope / intercept },
                delta,
                t_min,
                residual,
            });
        }
    }
    let fit = best.ok_or_else(|| Error::DegenerateFit("no usable exponent".into()))?;
    if fit.alpha <= 0.0 {
        return Err(Error::DegenerateFit(format!("fitted alpha {} is not positive", fit.alpha)));
    }
    Ok(fit)
}

/// Samples needed for the spread to reach `target`: `ceil((alpha / target)^2)`.
pub fn samples_to_target(alpha: f64, target: f64) -> Result<u64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter(format!("target must be positive, got {target}")));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha must be finite and non-negative, got {alpha}")));
    }
    let ratio = (alpha / target).powi(2);
    let nearest = ratio.round();
    // absorb representation error such as 0.4 / 0.01 = 40.000000000000007
    let count = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok(count as u64)
}
