//! Exact bias, variance and MSE of the bagged unbiased variance estimator
//! and of the plain one, and the kurtosis rule for when bagging helps.
//!
//! All formulas take population moments (`mu2`, `mu4`) of the data
//! distribution and the sizes `n` (data), `m` (bag) and `N` (bags). Integers
//! are promoted to the scalar type at the point of use; no cancellation
//! problems show up in `f64` for `n` up to 10^6.

use crate::error::{invalid, Error, Result};
use crate::moments::Moments;
use crate::scalar::Scalar;

fn require_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    Ok(())
}

fn require_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("bag size must be at least 2, got {m}")));
    }
    Ok(())
}

fn c<T: Scalar>(k: u64) -> T {
    T::from_count(k)
}

/// `E[bagged v] = (n-1)/n mu2`, whatever `m` and `N`.
pub fn bagged_variance_mean<T: Scalar>(n: usize, mom: &Moments<T>) -> Result<T> {
    require_n(n)?;
    let n = n as u64;
    Ok(c::<T>(n - 1) / c(n) * mom.mu2.clone())
}

/// `E_L[Var_U(v(L_U))]`, the coefficient of `1/N` in the MSE.
pub fn el_var_u_variance<T: Scalar>(n: usize, m: usize, mom: &Moments<T>) -> Result<T> {
    require_n(n)?;
    require_m(m)?;
    let (n, m) = (n as u64, m as u64);
    let nt = c::<T>(n);
    let n_sq = nt.square();
    let lead = c::<T>(n - 1) / (nt * c(m * (m - 1)));
    // 6 - 4m is negative for m >= 2
    let shrink = c::<T>(4 * m - 6);

    let mu2_term = c::<T>(3 * m - 3) - c::<T>(n * n - 2 * n + 3) / n_sq.clone() * shrink.clone();
    let mu4_term = c::<T>(m - 1) - c::<T>(n - 1) / n_sq * shrink;
    Ok(lead.clone() * mu2_term * mom.mu2.square() + lead * mu4_term * mom.mu4.clone())
}

/// `Var_L[E_U(v(L_U))] = (3-n)(n-1)/n^3 mu2^2 + (n-1)^2/n^3 mu4`.
pub fn var_l_eu_variance<T: Scalar>(n: usize, mom: &Moments<T>) -> Result<T> {
    require_n(n)?;
    let n = n as u64;
    let n3 = c::<T>(n).square() * c(n);
    // (3 - n)(n - 1) as a signed quantity
    let first = (c::<T>(3) - c(n)) * c(n - 1) / n3.clone() * mom.mu2.square();
    let second = c::<T>((n - 1) * (n - 1)) / n3 * mom.mu4.clone();
    Ok(first + second)
}

/// `E_L[E_U(v(L_U))^2]`.
pub fn el_eu_variance_squared<T: Scalar>(n: usize, mom: &Moments<T>) -> Result<T> {
    require_n(n)?;
    let n = n as u64;
    let n3 = c::<T>(n).square() * c(n);
    Ok(
        c::<T>((n - 1) * (n * n - 2 * n + 3)) / n3.clone() * mom.mu2.square()
            + c::<T>((n - 1) * (n - 1)) / n3 * mom.mu4.clone(),
    )
}

/// Decomposition `MSE = F/N + G_var + G_bias2` of the bagged variance estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MseBreakdown<T> {
    /// `E_L[Var_U]`, divided by `N` in the total.
    pub f: T,
    /// `Var_L[E_U]`.
    pub g_var: T,
    /// Squared bias, `mu2^2 / n^2`.
    pub g_bias2: T,
    pub iterations: u64,
    pub total: T,
}

impl<T: Scalar> MseBreakdown<T> {
    fn assemble(f: T, g_var: T, g_bias2: T, iterations: u64) -> Self {
        let total = f.clone() / c(iterations) + g_var.clone() + g_bias2.clone();
        Self {
            f,
            g_var,
            g_bias2,
            iterations,
            total,
        }
    }

    /// The same decomposition with a different number of bags.
    pub fn with_iterations(&self, iterations: u64) -> Self {
        Self::assemble(
            self.f.clone(),
            self.g_var.clone(),
            self.g_bias2.clone(),
            iterations,
        )
    }

    /// `G`, the limit of the MSE as `N` grows.
    pub fn floor(&self) -> T {
        self.g_var.clone() + self.g_bias2.clone()
    }
}

pub fn mse_bagged_variance<T: Scalar>(
    n: usize,
    m: usize,
    iterations: u64,
    mom: &Moments<T>,
) -> Result<MseBreakdown<T>> {
    if iterations < 1 {
        return Err(invalid("number of bags must be at least 1"));
    }
    let f = el_var_u_variance(n, m, mom)?;
    let g_var = var_l_eu_variance(n, mom)?;
    let g_bias2 = mom.mu2.square() / c::<T>(n as u64).square();
    Ok(MseBreakdown::assemble(f, g_var, g_bias2, iterations))
}

/// MSE (= variance) of the plain unbiased estimator, `(3-n)/(n(n-1)) mu2^2 + mu4/n`.
pub fn mse_standard_variance<T: Scalar>(n: usize, mom: &Moments<T>) -> Result<T> {
    require_n(n)?;
    let n = n as u64;
    Ok((c::<T>(3) - c(n)) / c(n * (n - 1)) * mom.mu2.square() + mom.mu4.clone() / c(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseGap<T> {
    /// `MSE(bagged) - MSE(plain)`; negative when bagging helps.
    pub exact: T,
    /// Leading-order approximation `(mu4 - mu2^2)/(N m) + (3 mu2^2 - 2 mu4)/n^2`.
    pub asymptotic: T,
}

pub fn mse_gap<T: Scalar>(
    n: usize,
    m: usize,
    iterations: u64,
    mom: &Moments<T>,
) -> Result<MseGap<T>> {
    let bagged = mse_bagged_variance(n, m, iterations, mom)?;
    let plain = mse_standard_variance(n, mom)?;
    let excess_kurtosis_term = mom.mu4.clone() - mom.mu2.square();
    let asymptotic = excess_kurtosis_term / c(iterations * m as u64)
        + mom.gap_constant() / c::<T>(n as u64).square();
    Ok(MseGap {
        exact: bagged.total - plain,
        asymptotic,
    })
}

/// Smallest `N` above `(mu4 - mu2^2)/(2 mu4 - 3 mu2^2) * n^2/m`, or `None`
/// when `2 mu4 - 3 mu2^2 <= 0` (kurtosis at most 3/2) or `mu2 = 0`.
pub fn min_iterations<T: Scalar>(n: usize, m: usize, mom: &Moments<T>) -> Result<Option<u64>> {
    require_n(n)?;
    require_m(m)?;
    if mom.mu2.is_zero() {
        return Ok(None);
    }
    let denom = -mom.gap_constant();
    if denom <= T::zero() {
        return Ok(None);
    }
    let n_sq = c::<T>(n as u64).square();
    let bound = (mom.mu4.clone() - mom.mu2.square()) / denom * n_sq / c(m as u64);
    let floor = bound
        .floor_u64()
        .ok_or_else(|| Error::NotRepresentable("iteration bound".into()))?;
    Ok(Some(floor + 1))
}

/// Whether bagging can reduce the MSE for large `n`: kurtosis above 3/2.
pub fn bagging_beneficial<T: Scalar>(mom: &Moments<T>) -> Result<bool> {
    if mom.mu2.is_zero() {
        return Err(Error::DegenerateDistribution);
    }
    Ok(mom.gap_constant() < T::zero())
}
