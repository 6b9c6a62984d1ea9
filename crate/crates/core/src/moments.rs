//! Sample moments, the unbiased variance estimator (direct and pairwise
//! forms) and the symmetric sums P, Q, R of squared pairwise differences.
//!
//! Pairwise sums run over unordered index sets throughout:
//!
//! * `P = Σ_{i<j} (x_i - x_j)^4`
//! * `Q = Σ_i Σ_{j<k, j,k≠i} (x_i - x_j)^2 (x_i - x_k)^2`
//! * `R = Σ over unordered pairs of disjoint pairs {{i,j},{k,l}} of (x_i - x_j)^2 (x_k - x_l)^2`
//!
//! With `S = Σ_{i<j} (x_i - x_j)^2` these satisfy `S^2 = P + 2Q + 2R`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite, non-empty sequence of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    values: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    /// Converts from `f64` values, exactly for rational scalars.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let converted = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                T::from_f64(v)
                    .filter(Scalar::is_finite_value)
                    .ok_or(Error::NonFinite(i))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(converted)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub(crate) fn require_len(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            return Err(Error::TooFewObservations {
                needed,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Whether a [`Moments`] value describes a population or was estimated from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSource {
    Population,
    Sample,
}

/// Second and fourth central moments with the derived kurtosis.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub mu2: T,
    pub mu4: T,
    /// `mu4 / mu2^2`; `None` when `mu2` is zero.
    pub kurtosis: Option<T>,
    pub source: MomentSource,
}

impl<T: Scalar> Moments<T> {
    /// Population moments. Rejects `mu4 < mu2^2`, which no distribution satisfies.
    pub fn population(mu2: T, mu4: T) -> Result<Self> {
        Self::build(mu2, mu4, MomentSource::Population)
    }

    pub fn sample(mu2: T, mu4: T) -> Result<Self> {
        Self::build(mu2, mu4, MomentSource::Sample)
    }

    fn build(mu2: T, mu4: T, source: MomentSource) -> Result<Self> {
        if !mu2.is_finite_value() || !mu4.is_finite_value() {
            return Err(Error::InvalidParameter("moments must be finite".into()));
        }
        if mu2 < T::zero() || mu4 < T::zero() {
            return Err(Error::InvalidParameter(
                "moments must be non-negative".into(),
            ));
        }
        if source == MomentSource::Population && mu4 < mu2.square() {
            return Err(Error::InvalidParameter(format!(
                "mu4 = {mu4:?} is below mu2^2 = {:?}",
                mu2.square()
            )));
        }
        let kurtosis = if mu2.is_zero() {
            None
        } else {
            Some(mu4.clone() / mu2.square())
        };
        Ok(Self {
            mu2,
            mu4,
            kurtosis,
            source,
        })
    }

    /// Estimates from data the way the variance algorithm does: unbiased
    /// variance for `mu2`, the `1/n` central fourth moment for `mu4`.
    pub fn from_sample(data: &Dataset<T>) -> Result<Self> {
        Self::sample(unbiased_variance(data)?, central_fourth_moment(data)?)
    }

    /// `-2 mu4 + 3 mu2^2`; negative exactly when kurtosis exceeds 3/2.
    pub fn gap_constant(&self) -> T {
        T::from_count(3) * self.mu2.square() - T::from_count(2) * self.mu4.clone()
    }
}

pub fn sample_mean<T: Scalar>(data: &Dataset<T>) -> T {
    let sum = data
        .values()
        .iter()
        .fold(T::zero(), |acc, v| acc + v.clone());
    sum / T::from_usize_count(data.len())
}

fn sum_powered_deviations<T: Scalar>(data: &Dataset<T>, fourth: bool) -> T {
    let mean = sample_mean(data);
    data.values().iter().fold(T::zero(), |acc, v| {
        let d2 = (v.clone() - mean.clone()).square();
        acc + if fourth { d2.square() } else { d2 }
    })
}

/// `1/(n-1) Σ (x_i - mean)^2`.
pub fn unbiased_variance<T: Scalar>(data: &Dataset<T>) -> Result<T> {
    data.require_len(2)?;
    Ok(sum_powered_deviations(data, false) / T::from_usize_count(data.len() - 1))
}

/// Sum of squared differences over unordered pairs, `Σ_{i<j} (x_i - x_j)^2`.
pub fn pairwise_square_sum<T: Scalar>(values: &[T]) -> T {
    let mut acc = T::zero();
    for (i, xi) in values.iter().enumerate() {
        for xj in &values[i + 1..] {
            acc = acc + (xi.clone() - xj.clone()).square();
        }
    }
    acc
}

/// Unbiased variance through pairwise differences: `Σ_{i<j}(x_i - x_j)^2 / (n(n-1))`.
pub fn unbiased_variance_pairwise<T: Scalar>(data: &Dataset<T>) -> Result<T> {
    data.require_len(2)?;
    let n = data.len() as u64;
    Ok(pairwise_square_sum(data.values()) / T::from_count(n * (n - 1)))
}

/// `1/n Σ (x_i - mean)^4`. Biased on purpose; this is the estimator the
/// variance algorithm gates on.
pub fn central_fourth_moment<T: Scalar>(data: &Dataset<T>) -> Result<T> {
    Ok(sum_powered_deviations(data, true) / T::from_usize_count(data.len()))
}

/// The symmetric sums P, Q and R.
#[derive(Debug, Clone, PartialEq)]
pub struct Pqr<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

impl<T: Scalar> Pqr<T> {
    /// `P + 2Q + 2R`, which equals the square of the pairwise square sum.
    pub fn expansion(&self) -> T {
        let two = T::from_count(2);
        self.p.clone() + two.clone() * self.q.clone() + two * self.r.clone()
    }
}

/// Direct O(n^4) evaluation of P, Q, R.
pub fn symmetric_sums_pqr<T: Scalar>(data: &Dataset<T>) -> Pqr<T> {
    let x = data.values();
    let n = x.len();
    let d2 = |i: usize, j: usize| (x[i].clone() - x[j].clone()).square();

    let mut p = T::zero();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let sq = d2(i, j);
            p = p + sq.square();
            pairs.push((i, j, sq));
        }
    }

    let mut q = T::zero();
    for pivot in 0..n {
        for j in 0..n {
            if j == pivot {
                continue;
            }
            for k in j + 1..n {
                if k == pivot {
                    continue;
                }
                q = q + d2(pivot, j) * d2(pivot, k);
            }
        }
    }

    let mut r = T::zero();
    for (a, (i, j, sa)) in pairs.iter().enumerate() {
        for (k, l, sb) in &pairs[a + 1..] {
            if i != k && i != l && j != k && j != l {
                r = r + sa.clone() * sb.clone();
            }
        }
    }

    Pqr { p, q, r }
}

/// Expectations of P, Q, R for `n` i.i.d. draws with the given population moments.
pub fn expected_pqr<T: Scalar>(n: usize, mom: &Moments<T>) -> Result<Pqr<T>> {
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let n = n as u64;
    let c = T::from_count;
    let mu2sq = mom.mu2.square();
    let mu4 = mom.mu4.clone();
    let two = c(2);

    let n1 = n * (n - 1);
    let ep = c(3 * n1) * mu2sq.clone() + c(n1) * mu4.clone();

    let n2 = n1 * n.saturating_sub(2);
    let eq = (c(3 * n2) * mu2sq.clone() + c(n2) * mu4) / two.clone();

    let n3 = n2 * n.saturating_sub(3);
    let er = c(n3) * mu2sq / two;

    Ok(Pqr {
        p: ep,
        q: eq,
        r: er,
    })
}
