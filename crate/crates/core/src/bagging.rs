//! Bagged estimators and the bagging-based variance estimation procedure.
//!
//! Bag `i` of a run seeded with `seed` always draws its indices from
//! `stream_rng(seed, i)`, so the bags do not depend on evaluation order and
//! the parallel and sequential paths produce identical numbers.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::moments::{central_fourth_moment, unbiased_variance, Dataset};
use crate::rng::stream_rng;
use crate::scalar::Scalar;

/// Suggested quality multiplier for [`algorithm1_variance`].
pub const DEFAULT_Q: u64 = 2;

/// Default iteration cap of [`algorithm1_variance`], in multiples of `n`.
pub const DEFAULT_CAP_PER_OBSERVATION: u64 = 50;

/// Bag size `m`, number of bags `N` and the seed of the bag streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BagConfig {
    bag_size: usize,
    iterations: usize,
    seed: u64,
}

impl BagConfig {
    pub fn new(bag_size: usize, iterations: usize, seed: u64) -> Result<Self> {
        if bag_size < 2 {
            return Err(invalid(format!(
                "bag size must be at least 2, got {bag_size}"
            )));
        }
        if iterations < 1 {
            return Err(invalid("number of bags must be at least 1"));
        }
        Ok(Self {
            bag_size,
            iterations,
            seed,
        })
    }

    pub fn bag_size(&self) -> usize {
        self.bag_size
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// An estimator: deterministic map from a dataset to a number.
pub trait Estimator<T>: Fn(&Dataset<T>) -> Result<T> + Sync {}

impl<T, F> Estimator<T> for F where F: Fn(&Dataset<T>) -> Result<T> + Sync {}

/// `m` indices drawn uniformly with replacement from `0..n`.
pub fn draw_bag_indices<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<usize> {
    (0..m).map(|_| rng.random_range(0..n)).collect()
}

/// A bag of `m` values drawn uniformly with replacement from `data`.
pub fn draw_bag<T: Scalar, R: Rng + ?Sized>(
    data: &Dataset<T>,
    m: usize,
    rng: &mut R,
) -> Result<Dataset<T>> {
    if m == 0 {
        return Err(invalid("bag size must be at least 1"));
    }
    let values = data.values();
    let bag = draw_bag_indices(values.len(), m, rng)
        .into_iter()
        .map(|i| values[i].clone())
        .collect();
    Dataset::new(bag)
}

fn bag_value<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    cfg: &BagConfig,
    index: usize,
    est: &E,
) -> Result<T> {
    let mut rng = stream_rng(cfg.seed, index as u64);
    let bag = draw_bag(data, cfg.bag_size, &mut rng)?;
    est(&bag)
}

/// Mean of `est` over `N` independently drawn bags.
///
/// Bags are evaluated in parallel; the average is accumulated in bag order.
pub fn bag_estimate<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    cfg: &BagConfig,
    est: E,
) -> Result<T> {
    let values = (0..cfg.iterations)
        .into_par_iter()
        .map(|i| bag_value(data, cfg, i, &est))
        .collect::<Result<Vec<T>>>()?;
    let sum = values.into_iter().fold(T::zero(), |acc, v| acc + v);
    Ok(sum / T::from_usize_count(cfg.iterations))
}

/// Sequential variant of [`bag_estimate`] for callers that already run in parallel.
pub fn bag_estimate_sequential<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    cfg: &BagConfig,
    est: E,
) -> Result<T> {
    let mut sum = T::zero();
    for i in 0..cfg.iterations {
        sum = sum + bag_value(data, cfg, i, &est)?;
    }
    Ok(sum / T::from_usize_count(cfg.iterations))
}

/// Bagged unbiased variance, computed over bag indices without copying
/// values. Same bags and same arithmetic as
/// `bag_estimate(data, cfg, unbiased_variance)`.
pub fn bagged_unbiased_variance<T: Scalar>(data: &Dataset<T>, cfg: &BagConfig) -> T {
    let x = data.values();
    let n = x.len();
    let m = cfg.bag_size;
    let mut indices = vec![0usize; m];
    let mut sum = T::zero();
    let m_scalar = T::from_usize_count(m);
    let dof = T::from_usize_count(m - 1);
    for bag in 0..cfg.iterations {
        let mut rng = stream_rng(cfg.seed, bag as u64);
        for slot in indices.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        let mean = indices.iter().fold(T::zero(), |acc, &i| acc + x[i].clone()) / m_scalar.clone();
        let ss = indices.iter().fold(T::zero(), |acc, &i| {
            acc + (x[i].clone() - mean.clone()).square()
        });
        sum = sum + ss / dof.clone();
    }
    sum / T::from_usize_count(cfg.iterations)
}

/// Upper bound on the number of bags the variance algorithm may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationCap {
    /// At most `k * n` bags.
    PerObservation(u64),
    Absolute(u64),
    /// No cap. The bag count grows without bound as the sample kurtosis
    /// approaches 3/2 from above.
    Unbounded,
}

impl Default for IterationCap {
    fn default() -> Self {
        Self::PerObservation(DEFAULT_CAP_PER_OBSERVATION)
    }
}

impl IterationCap {
    fn limit(&self, n: usize) -> Option<u64> {
        match *self {
            Self::PerObservation(k) => Some(k.saturating_mul(n as u64)),
            Self::Absolute(k) => Some(k),
            Self::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimate<T> {
    pub estimate: T,
    pub used_bagging: bool,
    /// Number of bags averaged; 0 when bagging was not used.
    pub iterations: u64,
}

/// Variance estimation with bagging switched on by the sample kurtosis.
///
/// Computes the unbiased variance `v` and the `1/n` central fourth moment
/// `mu4`. When `3 v^2 - 2 mu4 < 0` it averages the unbiased variance over
/// `N = q * (floor(n (mu4 - v^2) / (2 mu4 - 3 v^2)) + 1)` bags of size `n`
/// (clamped by `cap`); otherwise it returns `v` unchanged. Costs O(N n).
pub fn algorithm1_variance<T: Scalar>(
    data: &Dataset<T>,
    q: u64,
    seed: u64,
    cap: IterationCap,
) -> Result<VarianceEstimate<T>> {
    data.require_len(2)?;
    if q < 1 {
        return Err(invalid("q must be at least 1"));
    }
    let n = data.len();
    let mu4 = central_fourth_moment(data)?;
    let v = unbiased_variance(data)?;
    let v2 = v.square();
    let two = T::from_count(2);
    let three = T::from_count(3);

    let gate = three.clone() * v2.clone() - two.clone() * mu4.clone();
    if gate >= T::zero() {
        return Ok(VarianceEstimate {
            estimate: v,
            used_bagging: false,
            iterations: 0,
        });
    }

    let ratio = (mu4.clone() - v2.clone()) / (two * mu4 - three * v2);
    let base = (ratio * T::from_usize_count(n))
        .floor_u64()
        .and_then(|f| f.checked_add(1));
    let wanted = base.map(|b| b.saturating_mul(q));
    let iterations = match (wanted, cap.limit(n)) {
        (Some(w), Some(limit)) => w.min(limit),
        (None, Some(limit)) => limit,
        (Some(w), None) if w < u64::MAX => w,
        _ => return Err(Error::NotRepresentable("bag count".into())),
    };
    let iterations = usize::try_from(iterations)
        .map_err(|_| Error::NotRepresentable(format!("bag count {iterations}")))?;

    let cfg = BagConfig::new(n, iterations, seed)?;
    let estimate = bagged_unbiased_variance(data, &cfg);
    Ok(VarianceEstimate {
        estimate,
        used_bagging: true,
        iterations: iterations as u64,
    })
}
