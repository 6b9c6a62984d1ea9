//! Brute-force expectations over every possible bag (all `n^m` index maps)
//! and every possible bag set (all `(n^m)^N` tuples), plus the closed forms
//! these enumerations are meant to confirm.
//!
//! Enumeration walks multi-indices in odometer order (last position fastest)
//! and accumulates in that order.

use crate::bagging::Estimator;
use crate::error::{invalid, Error, Result};
use crate::moments::{pairwise_square_sum, symmetric_sums_pqr, Dataset};
use crate::scalar::{is_zero, powi, Scalar};

/// Maximum number of states an enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimit {
    pub max_states: u128,
}

impl Default for EnumerationLimit {
    fn default() -> Self {
        Self {
            max_states: 10_000_000,
        }
    }
}

impl EnumerationLimit {
    fn check(&self, base: u128, exp: u32, what: &str) -> Result<u128> {
        let states = base.checked_pow(exp);
        match states {
            Some(s) if s <= self.max_states => Ok(s),
            _ => Err(Error::StateSpaceTooLarge {
                states: states.map_or_else(
                    || format!("{what} = {base}^{exp} (overflow)"),
                    |s| format!("{what} = {s}"),
                ),
                limit: self.max_states,
            }),
        }
    }
}

/// First and second moment of an estimator under uniform bag sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedMoments<T> {
    pub mean: T,
    pub second_moment: T,
}

impl<T: Scalar> EnumeratedMoments<T> {
    pub fn variance(&self) -> T {
        self.second_moment.clone() - self.mean.square()
    }
}

/// Advances `digits` in base `base`, last digit fastest. Returns false after the last state.
fn odometer_step(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Estimator value on every bag, in odometer order.
fn all_bag_values<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    m: usize,
    est: &E,
    count: u128,
) -> Result<Vec<T>> {
    let x = data.values();
    let n = x.len();
    let mut digits = vec![0usize; m];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let bag = Dataset::new(digits.iter().map(|&i| x[i].clone()).collect())?;
        out.push(est(&bag)?);
        if !odometer_step(&mut digits, n) {
            break;
        }
    }
    Ok(out)
}

/// Exact `E_U[est(L_U)]` and `E_U[est(L_U)^2]` over all `n^m` bags of size `m`.
pub fn enumerate_eu<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    m: usize,
    est: E,
    limit: EnumerationLimit,
) -> Result<EnumeratedMoments<T>> {
    if m == 0 {
        return Err(invalid("bag size must be at least 1"));
    }
    let states = limit.check(data.len() as u128, m as u32, "n^m")?;
    let values = all_bag_values(data, m, &est, states)?;
    let (sum, sum_sq) = values.iter().fold((T::zero(), T::zero()), |(s, s2), v| {
        (s + v.clone(), s2 + v.square())
    });
    let count = T::from_count(states as u64);
    Ok(EnumeratedMoments {
        mean: sum / count.clone(),
        second_moment: sum_sq / count,
    })
}

/// Exact moments of the bagged estimator over all `(n^m)^N` bag sets at fixed data.
pub fn enumerate_bagset_moments<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    m: usize,
    iterations: usize,
    est: E,
    limit: EnumerationLimit,
) -> Result<EnumeratedMoments<T>> {
    if m == 0 || iterations == 0 {
        return Err(invalid("bag size and bag count must be at least 1"));
    }
    let bags = limit.check(data.len() as u128, m as u32, "n^m")?;
    let states = limit.check(bags, iterations as u32, "(n^m)^N")?;
    let values = all_bag_values(data, m, &est, bags)?;

    let big_n = T::from_usize_count(iterations);
    let mut digits = vec![0usize; iterations];
    let (mut sum, mut sum_sq) = (T::zero(), T::zero());
    loop {
        let total = digits
            .iter()
            .fold(T::zero(), |acc, &d| acc + values[d].clone());
        let bagged = total / big_n.clone();
        sum_sq = sum_sq + bagged.square();
        sum = sum + bagged;
        if !odometer_step(&mut digits, bags as usize) {
            break;
        }
    }
    let count = T::from_count(states as u64);
    Ok(EnumeratedMoments {
        mean: sum / count.clone(),
        second_moment: sum_sq / count,
    })
}

/// Closed form of `E_U[v(L_U)]`: `Σ_{j<k} (x_j - x_k)^2 / n^2`, for every bag size `m >= 2`.
pub fn closed_form_eu_variance<T: Scalar>(data: &Dataset<T>) -> Result<T> {
    data.require_len(2)?;
    let n = T::from_usize_count(data.len());
    Ok(pairwise_square_sum(data.values()) / n.square())
}

/// Coefficients of P, Q, R in the closed form of `E_U[v(L_U)^2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PqrCoefficients<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

pub fn eu_variance_squared_coefficients<T: Scalar>(
    n: usize,
    m: usize,
) -> Result<PqrCoefficients<T>> {
    if n < 1 || m < 2 {
        return Err(invalid(format!("need n >= 1 and m >= 2, got n={n}, m={m}")));
    }
    let c = T::from_count;
    let nn = c(n as u64);
    let m = m as u64;
    // (m-2)(m-3) vanishes at m = 2, so the saturating factor is exact
    let a = c(m - 2);
    let ab = c((m - 2) * m.saturating_sub(3));
    let mm = c(m * (m - 1));
    let n2 = powi(&nn, 2) * mm.clone();
    let n3 = powi(&nn, 3) * mm.clone();
    let n4 = powi(&nn, 4) * mm;
    let two = c(2);

    let p = T::one() / n2 + two.clone() * a.clone() / n3.clone() + ab.clone() / n4.clone();
    let q = two.clone() * a / n3 + two.clone() * ab.clone() / n4.clone();
    let r = two * ab / n4;
    Ok(PqrCoefficients { p, q, r })
}

/// Closed form of `E_U[v(L_U)^2]` as `cP P + cQ Q + cR R`.
pub fn closed_form_eu_variance_squared<T: Scalar>(data: &Dataset<T>, m: usize) -> Result<T> {
    data.require_len(2)?;
    let coeffs = eu_variance_squared_coefficients::<T>(data.len(), m)?;
    let s = symmetric_sums_pqr(data);
    Ok(coeffs.p * s.p + coeffs.q * s.q + coeffs.r * s.r)
}

/// `C1`, `C2` with `E_B[bagged^2] = C1 Σ_u est(L_u)^2 + C2 Σ_{u≠u'} est(L_u) est(L_u')`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentCoeffs<T> {
    pub c1: T,
    pub c2: T,
}

impl<T: Scalar> SecondMomentCoeffs<T> {
    /// `C1 n^m + C2 n^m (n^m - 1)`, which is one.
    pub fn normalization(&self, n: usize, m: usize) -> T {
        let nm = powi(&T::from_usize_count(n), m as u32);
        self.c1.clone() * nm.clone() + self.c2.clone() * nm.clone() * (nm - T::one())
    }

    /// `E_B[bagged^2]` from the estimator values on all bags.
    pub fn bagged_second_moment(&self, bag_values: &[T]) -> T {
        let sum = bag_values.iter().fold(T::zero(), |a, v| a + v.clone());
        let sum_sq = bag_values.iter().fold(T::zero(), |a, v| a + v.square());
        let cross = sum.square() - sum_sq.clone();
        self.c1.clone() * sum_sq + self.c2.clone() * cross
    }
}

/// `C1 = ((N-1)/N) n^{-2m} + (1/N) n^{-m}`, `C2 = ((N-1)/N) n^{-2m}`.
///
/// Fails when `n^{2m}` does not fit the scalar type (float overflow); exact
/// types always succeed.
pub fn bagging_second_moment_coeffs<T: Scalar>(
    n: usize,
    m: usize,
    iterations: usize,
) -> Result<SecondMomentCoeffs<T>> {
    if n < 1 || m < 1 || iterations < 1 {
        return Err(invalid("n, m and N must be at least 1"));
    }
    let m32 = u32::try_from(m).map_err(|_| Error::NotRepresentable(format!("m = {m}")))?;
    let nm = powi(&T::from_usize_count(n), m32);
    let nm2 = nm.square();
    if !nm2.is_finite_value() || is_zero(&nm2) {
        return Err(Error::NotRepresentable(format!("{n}^(2*{m})")));
    }
    let big_n = T::from_usize_count(iterations);
    let w = (big_n.clone() - T::one()) / big_n.clone();
    let c2 = w / nm2;
    let c1 = c2.clone() + T::one() / (big_n * nm);
    Ok(SecondMomentCoeffs { c1, c2 })
}

/// Estimator values on every bag, exposed for checks against [`SecondMomentCoeffs`].
pub fn enumerate_bag_values<T: Scalar, E: Estimator<T>>(
    data: &Dataset<T>,
    m: usize,
    est: E,
    limit: EnumerationLimit,
) -> Result<Vec<T>> {
    let states = limit.check(data.len() as u128, m as u32, "n^m")?;
    all_bag_values(data, m, &est, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::unbiased_variance;
    use num_rational::BigRational;

    type Q = BigRational;

    fn exact(v: &[f64]) -> Dataset<Q> {
        Dataset::from_f64(v).unwrap()
    }

    fn q(num: i64, den: i64) -> Q {
        Q::new(num.into(), den.into())
    }

    #[test]
    fn two_point_enumeration() {
        let r = enumerate_eu(
            &exact(&[0.0, 1.0]),
            2,
            unbiased_variance,
            EnumerationLimit::default(),
        )
        .unwrap();
        assert_eq!(r.mean, q(1, 4));
        assert_eq!(r.second_moment, q(1, 8));
        let c = enumerate_eu(
            &exact(&[3.0; 3]),
            3,
            unbiased_variance,
            EnumerationLimit::default(),
        )
        .unwrap();
        assert_eq!((c.mean, c.second_moment), (q(0, 1), q(0, 1)));
    }

    #[test]
    fn closed_form_mean_examples() {
        assert_eq!(
            closed_form_eu_variance(&exact(&[0.0, 1.0])).unwrap(),
            q(1, 4)
        );
        assert_eq!(closed_form_eu_variance(&exact(&[2.0; 3])).unwrap(), q(0, 1));
        assert_eq!(
            closed_form_eu_variance(&exact(&[0.0, 1.0, 2.0])).unwrap(),
            q(2, 3)
        );
        assert!(closed_form_eu_variance(&exact(&[1.0])).is_err());
        for m in 2..=5 {
            let e = enumerate_eu(
                &exact(&[0.0, 1.0, 2.0]),
                m,
                unbiased_variance,
                EnumerationLimit::default(),
            )
            .unwrap();
            assert_eq!(e.mean, q(2, 3), "m = {m}");
        }
    }

    #[test]
    fn closed_form_second_moment_examples() {
        assert_eq!(
            closed_form_eu_variance_squared(&exact(&[0.0, 1.0]), 2).unwrap(),
            q(1, 8)
        );
        let c = eu_variance_squared_coefficients::<Q>(7, 2).unwrap();
        assert_eq!((c.p, c.q, c.r), (q(1, 98), q(0, 1), q(0, 1)));
        let data = exact(&[0.0, 1.0, 2.0]);
        let e = enumerate_eu(&data, 3, unbiased_variance, EnumerationLimit::default()).unwrap();
        assert_eq!(
            closed_form_eu_variance_squared(&data, 3).unwrap(),
            e.second_moment
        );
        assert!(closed_form_eu_variance_squared(&data, 1).is_err());
    }

    #[test]
    fn coefficients_examples() {
        let c = bagging_second_moment_coeffs::<Q>(3, 2, 1).unwrap();
        assert_eq!((c.c1.clone(), c.c2.clone()), (q(1, 9), q(0, 1)));
        for (n, m, big_n) in [(2, 2, 3), (4, 3, 7), (6, 6, 10)] {
            let c = bagging_second_moment_coeffs::<Q>(n, m, big_n).unwrap();
            assert_eq!(c.normalization(n, m), q(1, 1));
        }
        assert!(bagging_second_moment_coeffs::<f64>(1000, 100, 2).is_err());
        assert!(bagging_second_moment_coeffs::<Q>(1000, 100, 2).is_ok());
    }

    #[test]
    fn limits_are_enforced() {
        let tight = EnumerationLimit { max_states: 8 };
        let err = enumerate_eu(&exact(&[0.0, 1.0, 2.0]), 2, unbiased_variance, tight).unwrap_err();
        assert!(err.to_string().contains("n^m = 9"), "{err}");
        let err = enumerate_bagset_moments(&exact(&[0.0, 1.0]), 2, 2, unbiased_variance, tight)
            .unwrap_err();
        assert!(err.to_string().contains("(n^m)^N = 16"), "{err}");
    }

    #[test]
    fn bagset_with_one_bag_is_eu() {
        let data = exact(&[0.0, 1.0, 3.0]);
        let lim = EnumerationLimit::default();
        let a = enumerate_bagset_moments(&data, 2, 1, unbiased_variance, lim).unwrap();
        let b = enumerate_eu(&data, 2, unbiased_variance, lim).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bagset_second_moment_matches_coefficients() {
        let data = exact(&[0.0, 1.0]);
        let lim = EnumerationLimit::default();
        let values = enumerate_bag_values(&data, 2, unbiased_variance, lim).unwrap();
        let full = enumerate_bagset_moments(&data, 2, 2, unbiased_variance, lim).unwrap();
        let c = bagging_second_moment_coeffs::<Q>(2, 2, 2).unwrap();
        assert_eq!(c.bagged_second_moment(&values), full.second_moment);
    }

    #[test]
    fn odometer_order() {
        let mut d = vec![0, 0];
        let mut seen = vec![d.clone()];
        while odometer_step(&mut d, 3) {
            seen.push(d.clone());
        }
        assert_eq!(seen.len(), 9);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[3], vec![1, 0]);
    }
}
