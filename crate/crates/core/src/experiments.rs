//! Experiment drivers behind the `bagcheck` CLI. Each runner returns typed
//! rows; [`write_csv`] turns them into the stable CSV format (header row,
//! comma separated, reals with 17 significant digits).
//!
//! Trials run on the rayon pool. Trial `t` of a run seeded with `s` draws
//! from `stream_rng(s, t)` and results are reduced in trial order, so the
//! output does not depend on the number of worker threads.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bagging::{
    algorithm1_variance, bagged_unbiased_variance, BagConfig, IterationCap, VarianceEstimate,
};
use crate::closed_form::{self, mse_bagged_variance, mse_gap, mse_standard_variance};
use crate::distributions::DistributionSpec;
use crate::error::{invalid, Error, Result};
use crate::exact_oracle::{
    bagging_second_moment_coeffs, closed_form_eu_variance, closed_form_eu_variance_squared,
    enumerate_bag_values, enumerate_bagset_moments, enumerate_eu, EnumerationLimit,
};
use crate::moments::{unbiased_variance, Dataset};
use crate::regressors::{bagged_predictor, mse_on, BaseLearner, RegressionDataset, TreeParams};
use crate::rng::{derive_seed, stream_rng};
use crate::scalar::Scalar;

/// Real number in round-trippable scientific notation (17 significant digits).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

pub fn write_csv<W: Write, R: CsvRow>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv_file<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(file, rows).map_err(|e| match e {
        Error::Csv(c) if c.is_io_error() => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(c.to_string()),
        },
        other => other,
    })
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Plain and bagged unbiased variance of one simulated dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceTrial {
    pub bagged: f64,
    pub plain: f64,
}

/// `trials` independent datasets of size `n` from `spec`, each scored by the
/// plain unbiased variance and its bagged version (`iterations` bags of size `m`).
pub fn simulate_variance_trials(
    spec: &DistributionSpec,
    n: usize,
    m: usize,
    iterations: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<VarianceTrial>> {
    spec.validate()?;
    if n < 2 || trials == 0 {
        return Err(invalid("need n >= 2 and at least one trial"));
    }
    BagConfig::new(m, iterations, 0)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let data = Dataset::new(spec.sample_with(&mut rng, n))?;
            let cfg = BagConfig::new(m, iterations, rng.random())?;
            Ok(VarianceTrial {
                bagged: bagged_unbiased_variance(&data, &cfg),
                plain: unbiased_variance(&data)?,
            })
        })
        .collect()
}

/// Monte Carlo summary of a batch of [`VarianceTrial`]s against the true variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceMc {
    pub mean_bagged: MeanEstimate,
    pub mse_bagged: MeanEstimate,
    pub mse_plain: MeanEstimate,
    /// Paired per-trial difference of squared errors, bagged minus plain.
    pub gap: MeanEstimate,
}

impl VarianceMc {
    pub fn from_trials(trials: &[VarianceTrial], true_variance: f64) -> Self {
        let sq = |v: f64| (v - true_variance).powi(2);
        let bagged: Vec<f64> = trials.iter().map(|t| t.bagged).collect();
        let se_b: Vec<f64> = trials.iter().map(|t| sq(t.bagged)).collect();
        let se_p: Vec<f64> = trials.iter().map(|t| sq(t.plain)).collect();
        let gap: Vec<f64> = se_b.iter().zip(&se_p).map(|(b, p)| b - p).collect();
        Self {
            mean_bagged: MeanEstimate::from_samples(&bagged),
            mse_bagged: MeanEstimate::from_samples(&se_b),
            mse_plain: MeanEstimate::from_samples(&se_p),
            gap: MeanEstimate::from_samples(&gap),
        }
    }
}

/// Least-squares fit of `y = a + b / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseNFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

pub fn fit_inverse_n(ns: &[u64], ys: &[f64]) -> Result<InverseNFit> {
    if ns.len() != ys.len() || ns.len() < 2 || ns.contains(&0) {
        return Err(invalid("need at least two (N, y) pairs with N >= 1"));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("all N values are equal"));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(InverseNFit { a, b, r_squared })
}

/// Inclusive `start:end:step` grid.
pub fn int_grid(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad integer '{s}' in grid '{spec}'")))
    };
    let (start, end, step) = match parts.as_slice() {
        [a] => (parse(a)?, parse(a)?, 1),
        [a, b] => (parse(a)?, parse(b)?, 1),
        [a, b, s] => (parse(a)?, parse(b)?, parse(s)?),
        _ => return Err(invalid(format!("grid '{spec}' is not start:end:step"))),
    };
    if step == 0 || end < start {
        return Err(invalid(format!("grid '{spec}' is empty")));
    }
    Ok((start..=end).step_by(step).collect())
}

/// Inclusive real `start:end:step` grid; points are `start + k * step`.
pub fn real_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("bad number '{s}' in grid '{spec}'")))
    };
    let [a, b, s] = parts.as_slice() else {
        return Err(invalid(format!("grid '{spec}' is not start:end:step")));
    };
    let (start, end, step) = (parse(a)?, parse(b)?, parse(s)?);
    if step.is_nan() || step <= 0.0 || end < start || !start.is_finite() || !end.is_finite() {
        return Err(invalid(format!("grid '{spec}' is empty")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

// ---------------------------------------------------------------------------
// Regression: test MSE of bagged OLS and trees against the number of bags.

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionConfig {
    pub samples: usize,
    pub features: usize,
    pub train_fraction: f64,
    pub noise_levels: Vec<f64>,
    pub bag_counts: Vec<u64>,
    /// Defaults to the training-set size.
    pub bag_size: Option<usize>,
    pub bag_seeds: usize,
    pub datasets: usize,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            features: 2,
            train_fraction: 0.05,
            noise_levels: vec![0.5, 5.0],
            bag_counts: vec![1, 2, 4, 8, 16, 32, 64],
            bag_size: None,
            bag_seeds: 100,
            datasets: 10,
            tree: TreeParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionRow {
    pub n_bags: u64,
    pub mean_mse: f64,
    pub fitted_a: f64,
    pub fitted_b: f64,
    pub base_model: &'static str,
    pub noise_sigma: f64,
    pub mse_stderr: f64,
    pub fit_r2: f64,
}

impl CsvRow for RegressionRow {
    fn header() -> Vec<&'static str> {
        vec![
            "N",
            "mean_mse",
            "fitted_a",
            "fitted_b",
            "base_model",
            "noise_sigma",
            "mse_stderr",
            "fit_r2",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n_bags.to_string(),
            fmt_real(self.mean_mse),
            fmt_real(self.fitted_a),
            fmt_real(self.fitted_b),
            self.base_model.to_string(),
            fmt_real(self.noise_sigma),
            fmt_real(self.mse_stderr),
            fmt_real(self.fit_r2),
        ]
    }
}

/// Synthetic linear regression data: standard normal features, coefficients
/// drawn from `100 * U(0, 1)`, zero bias and Gaussian noise on the target.
/// Stands in for scikit-learn's `make_regression` with all features informative.
pub fn make_regression<R: Rng + ?Sized>(
    samples: usize,
    features: usize,
    noise: f64,
    rng: &mut R,
) -> Result<RegressionDataset> {
    let coef: Vec<f64> = (0..features).map(|_| 100.0 * rng.random::<f64>()).collect();
    let mut inputs = Vec::with_capacity(samples);
    let mut targets = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x: Vec<f64> = (0..features)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let y = x.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>()
            + noise * rng.sample::<f64, _>(StandardNormal);
        inputs.push(x);
        targets.push(y);
    }
    RegressionDataset::new(inputs, targets)
}

pub fn run_regression_experiment(cfg: &RegressionConfig) -> Result<Vec<RegressionRow>> {
    if cfg.bag_seeds == 0
        || cfg.datasets == 0
        || cfg.bag_counts.len() < 2
        || cfg.noise_levels.is_empty()
    {
        return Err(invalid(
            "regression experiment needs seeds, datasets, noise levels and two or more bag counts",
        ));
    }
    let train_len = (cfg.samples as f64 * cfg.train_fraction).round() as usize;
    if train_len < 1 || train_len >= cfg.samples {
        return Err(invalid(format!(
            "train fraction {} leaves no train or test rows",
            cfg.train_fraction
        )));
    }
    let bag_size = cfg.bag_size.unwrap_or(train_len);
    let bases = [BaseLearner::Ols, BaseLearner::Tree(cfg.tree)];

    let mut rows = Vec::new();
    for (sigma_idx, &sigma) in cfg.noise_levels.iter().enumerate() {
        let level_seed = derive_seed(cfg.seed, sigma_idx as u64);
        let splits = (0..cfg.datasets)
            .map(|ds| {
                let data = make_regression(
                    cfg.samples,
                    cfg.features,
                    sigma,
                    &mut stream_rng(level_seed, ds as u64),
                )?;
                data.split_at(train_len)
            })
            .collect::<Result<Vec<_>>>()?;

        // mses[unit][base][k] for unit = ds * bag_seeds + b
        let units = cfg.datasets * cfg.bag_seeds;
        let mses = (0..units)
            .into_par_iter()
            .map(|unit| {
                let (ds, b) = (unit / cfg.bag_seeds, unit % cfg.bag_seeds);
                let (train, test) = &splits[ds];
                let unit_seed = derive_seed(derive_seed(level_seed, ds as u64), b as u64);
                bases
                    .iter()
                    .map(|&base| {
                        cfg.bag_counts
                            .iter()
                            .enumerate()
                            .map(|(k, &n_bags)| {
                                let model = bagged_predictor(
                                    train,
                                    bag_size,
                                    n_bags as usize,
                                    derive_seed(unit_seed, k as u64),
                                    base,
                                )?;
                                mse_on(&model, test)
                            })
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        for (bi, base) in bases.iter().enumerate() {
            let stats: Vec<MeanEstimate> = (0..cfg.bag_counts.len())
                .map(|k| {
                    MeanEstimate::from_samples(&mses.iter().map(|u| u[bi][k]).collect::<Vec<_>>())
                })
                .collect();
            let fit = fit_inverse_n(
                &cfg.bag_counts,
                &stats.iter().map(|s| s.mean).collect::<Vec<_>>(),
            )?;
            for (k, &n_bags) in cfg.bag_counts.iter().enumerate() {
                rows.push(RegressionRow {
                    n_bags,
                    mean_mse: stats[k].mean,
                    fitted_a: fit.a,
                    fitted_b: fit.b,
                    base_model: base.name(),
                    noise_sigma: sigma,
                    mse_stderr: stats[k].stderr,
                    fit_r2: fit.r_squared,
                });
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// MSE gap between bagged and plain variance estimators, m = n.

#[derive(Debug, Clone, PartialEq)]
pub struct MseGapConfig {
    pub distribution: DistributionSpec,
    pub sizes: Vec<usize>,
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for MseGapConfig {
    fn default() -> Self {
        Self {
            distribution: DistributionSpec::Gaussian { sigma: 1.0 },
            sizes: (10..=100).step_by(10).collect(),
            iterations: 50,
            trials: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseGapRow {
    pub distribution: String,
    pub n: usize,
    pub mc_gap: f64,
    pub exact_gap: f64,
    pub asymptotic_gap: f64,
    pub mc_stderr: f64,
}

impl CsvRow for MseGapRow {
    fn header() -> Vec<&'static str> {
        vec![
            "distribution",
            "n",
            "mc_gap",
            "exact_gap",
            "asymptotic_gap",
            "mc_stderr",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.distribution.clone(),
            self.n.to_string(),
            fmt_real(self.mc_gap),
            fmt_real(self.exact_gap),
            fmt_real(self.asymptotic_gap),
            fmt_real(self.mc_stderr),
        ]
    }
}

pub fn run_mse_gap_experiment(cfg: &MseGapConfig) -> Result<Vec<MseGapRow>> {
    if cfg.sizes.is_empty() {
        return Err(invalid("size grid is empty"));
    }
    let mom = cfg.distribution.population_moments()?;
    cfg.sizes
        .iter()
        .map(|&n| {
            let trials = simulate_variance_trials(
                &cfg.distribution,
                n,
                n,
                cfg.iterations,
                cfg.trials,
                derive_seed(cfg.seed, n as u64),
            )?;
            let mc = VarianceMc::from_trials(&trials, mom.mu2);
            let gap = mse_gap(n, n, cfg.iterations as u64, &mom)?;
            Ok(MseGapRow {
                distribution: cfg.distribution.to_string(),
                n,
                mc_gap: mc.gap.mean,
                exact_gap: gap.exact,
                asymptotic_gap: gap.asymptotic,
                mc_stderr: mc.gap.stderr,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Kurtosis sweep over the two-point-pair family.

#[derive(Debug, Clone, PartialEq)]
pub struct KurtosisSweepConfig {
    pub p_grid: Vec<f64>,
    pub a: f64,
    pub n: usize,
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for KurtosisSweepConfig {
    fn default() -> Self {
        Self {
            p_grid: (1..=49).map(|k| k as f64 * 0.02).collect(),
            a: 0.125,
            n: 10,
            iterations: 20,
            trials: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KurtosisRow {
    pub p: f64,
    pub kurtosis: f64,
    pub mse_bagged_mc: f64,
    pub mse_plain_mc: f64,
    pub mse_bagged_exact: f64,
    pub mse_plain_exact: f64,
    pub mse_bagged_stderr: f64,
    pub mse_plain_stderr: f64,
    /// Standard error of the paired difference `mse_bagged_mc - mse_plain_mc`.
    pub gap_stderr: f64,
}

impl KurtosisRow {
    pub fn mc_gap(&self) -> f64 {
        self.mse_bagged_mc - self.mse_plain_mc
    }

    pub fn exact_gap(&self) -> f64 {
        self.mse_bagged_exact - self.mse_plain_exact
    }
}

impl CsvRow for KurtosisRow {
    fn header() -> Vec<&'static str> {
        vec![
            "p",
            "kurtosis",
            "mse_bagged_mc",
            "mse_plain_mc",
            "mse_bagged_exact",
            "mse_plain_exact",
            "mse_bagged_stderr",
            "mse_plain_stderr",
            "gap_stderr",
        ]
    }

    fn record(&self) -> Vec<String> {
        [
            self.p,
            self.kurtosis,
            self.mse_bagged_mc,
            self.mse_plain_mc,
            self.mse_bagged_exact,
            self.mse_plain_exact,
            self.mse_bagged_stderr,
            self.mse_plain_stderr,
            self.gap_stderr,
        ]
        .into_iter()
        .map(fmt_real)
        .collect()
    }
}

/// Every grid point reuses the same trial streams (common random numbers),
/// so neighbouring rows differ only through `p` and the MC gap curve is smooth.
pub fn run_kurtosis_sweep(cfg: &KurtosisSweepConfig) -> Result<Vec<KurtosisRow>> {
    if cfg.p_grid.is_empty() {
        return Err(invalid("p grid is empty"));
    }
    cfg.p_grid
        .iter()
        .map(|&p| {
            let spec = DistributionSpec::TwoPointPair { p, a: cfg.a };
            let mom = spec.population_moments()?;
            let trials = simulate_variance_trials(
                &spec,
                cfg.n,
                cfg.n,
                cfg.iterations,
                cfg.trials,
                cfg.seed,
            )?;
            let mc = VarianceMc::from_trials(&trials, mom.mu2);
            let bagged = mse_bagged_variance(cfg.n, cfg.n, cfg.iterations as u64, &mom)?;
            Ok(KurtosisRow {
                p,
                kurtosis: mom.kurtosis.unwrap_or(f64::NAN),
                mse_bagged_mc: mc.mse_bagged.mean,
                mse_plain_mc: mc.mse_plain.mean,
                mse_bagged_exact: bagged.total,
                mse_plain_exact: mse_standard_variance(cfg.n, &mom)?,
                mse_bagged_stderr: mc.mse_bagged.stderr,
                mse_plain_stderr: mc.mse_plain.stderr,
                gap_stderr: mc.gap.stderr,
            })
        })
        .collect()
}

/// Sign changes of `ys` along `xs`, located by linear interpolation.
pub fn crossings(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .filter(|(_, y)| (y[0] < 0.0) != (y[1] < 0.0))
        .map(|(x, y)| x[0] + (x[1] - x[0]) * y[0] / (y[0] - y[1]))
        .collect()
}

/// Roots in `p` of the exact MSE gap on the sweep's grid, refined by bisection.
pub fn exact_crossings(cfg: &KurtosisSweepConfig) -> Result<Vec<f64>> {
    let gap = |p: f64| -> Result<f64> {
        let mom = DistributionSpec::TwoPointPair { p, a: cfg.a }.population_moments()?;
        Ok(mse_gap(cfg.n, cfg.n, cfg.iterations as u64, &mom)?.exact)
    };
    let values = cfg
        .p_grid
        .iter()
        .map(|&p| gap(p))
        .collect::<Result<Vec<f64>>>()?;
    let mut roots = Vec::new();
    for (x, y) in cfg.p_grid.windows(2).zip(values.windows(2)) {
        if (y[0] < 0.0) == (y[1] < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (x[0], x[1]);
        let lo_negative = y[0] < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (gap(mid)? < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    Ok(roots)
}

// ---------------------------------------------------------------------------
// Diagnostics.

#[derive(Debug, Clone, PartialEq)]
pub struct FormulaRow {
    pub distribution: String,
    pub n: usize,
    pub m: usize,
    pub n_bags: u64,
    pub kurtosis: Option<f64>,
    pub expected_bagged: f64,
    pub f: f64,
    pub g_var: f64,
    pub bias2: f64,
    pub mse_bagged: f64,
    pub mse_standard: f64,
    pub gap: f64,
    pub asymptotic_gap: f64,
    pub min_n: Option<u64>,
}

impl CsvRow for FormulaRow {
    fn header() -> Vec<&'static str> {
        vec![
            "distribution",
            "n",
            "m",
            "N",
            "kurtosis",
            "E",
            "F",
            "G_var",
            "bias2",
            "MSE_bagged",
            "MSE_standard",
            "gap",
            "asymptotic_gap",
            "min_N",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.distribution.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.n_bags.to_string(),
            self.kurtosis.map(fmt_real).unwrap_or_default(),
            fmt_real(self.expected_bagged),
            fmt_real(self.f),
            fmt_real(self.g_var),
            fmt_real(self.bias2),
            fmt_real(self.mse_bagged),
            fmt_real(self.mse_standard),
            fmt_real(self.gap),
            fmt_real(self.asymptotic_gap),
            self.min_n.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn run_formulas(
    spec: &DistributionSpec,
    n: usize,
    m: usize,
    n_bags: u64,
) -> Result<FormulaRow> {
    let mom = spec.population_moments()?;
    let b = mse_bagged_variance(n, m, n_bags, &mom)?;
    let gap = mse_gap(n, m, n_bags, &mom)?;
    Ok(FormulaRow {
        distribution: spec.to_string(),
        n,
        m,
        n_bags,
        kurtosis: mom.kurtosis,
        expected_bagged: closed_form::bagged_variance_mean(n, &mom)?,
        f: b.f,
        g_var: b.g_var,
        bias2: b.g_bias2,
        mse_bagged: b.total,
        mse_standard: mse_standard_variance(n, &mom)?,
        gap: gap.exact,
        asymptotic_gap: gap.asymptotic,
        min_n: closed_form::min_iterations(n, m, &mom)?,
    })
}

/// One enumerated quantity next to its closed form, both computed in exact
/// rational arithmetic from the `f64` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub quantity: &'static str,
    pub enumerated: f64,
    pub closed_form: f64,
    pub exact_match: bool,
}

impl CsvRow for OracleRow {
    fn header() -> Vec<&'static str> {
        vec!["quantity", "enumerated", "closed_form", "exact_match"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.quantity.to_string(),
            fmt_real(self.enumerated),
            fmt_real(self.closed_form),
            self.exact_match.to_string(),
        ]
    }
}

pub fn run_oracle(
    data: &[f64],
    m: usize,
    n_bags: Option<usize>,
    limit: EnumerationLimit,
) -> Result<Vec<OracleRow>> {
    type Q = BigRational;
    let exact: Dataset<Q> = Dataset::from_f64(data)?;
    let row = |quantity, enumerated: Q, closed: Q| OracleRow {
        quantity,
        enumerated: enumerated.to_f64().unwrap_or(f64::NAN),
        closed_form: closed.to_f64().unwrap_or(f64::NAN),
        exact_match: enumerated == closed,
    };
    let eu = enumerate_eu(&exact, m, unbiased_variance, limit)?;
    let mut rows = vec![
        row("eu_mean", eu.mean.clone(), closed_form_eu_variance(&exact)?),
        row(
            "eu_second_moment",
            eu.second_moment.clone(),
            closed_form_eu_variance_squared(&exact, m)?,
        ),
    ];
    if let Some(n_bags) = n_bags {
        let set = enumerate_bagset_moments(&exact, m, n_bags, unbiased_variance, limit)?;
        let values = enumerate_bag_values(&exact, m, unbiased_variance, limit)?;
        let coeffs = bagging_second_moment_coeffs::<Q>(exact.len(), m, n_bags)?;
        let var_u = eu.variance();
        rows.push(row("bagset_mean", set.mean.clone(), eu.mean));
        rows.push(row(
            "bagset_second_moment",
            set.second_moment.clone(),
            coeffs.bagged_second_moment(&values),
        ));
        rows.push(row(
            "bagset_variance",
            set.variance(),
            var_u / Q::from_usize_count(n_bags),
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub n: usize,
    pub plain: f64,
    pub estimate: VarianceEstimate<f64>,
}

impl CsvRow for EstimateRow {
    fn header() -> Vec<&'static str> {
        vec!["n", "plain_variance", "estimate", "used_bagging", "N_used"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_real(self.plain),
            fmt_real(self.estimate.estimate),
            self.estimate.used_bagging.to_string(),
            self.estimate.iterations.to_string(),
        ]
    }
}

pub fn run_estimate(data: &[f64], q: u64, seed: u64, cap: IterationCap) -> Result<EstimateRow> {
    let data = Dataset::new(data.to_vec())?;
    Ok(EstimateRow {
        n: data.len(),
        plain: unbiased_variance(&data)?,
        estimate: algorithm1_variance(&data, q, seed, cap)?,
    })
}
