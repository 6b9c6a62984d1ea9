//! The four distribution families used by the experiments, with exact
//! population moments and seeded samplers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::moments::{Dataset, Moments};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    /// Centered normal with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// ±1 with probability 1/2 each.
    Rademacher,
    /// `±1` with probability `p/2` each, `±sqrt(a)` with probability `(1-p)/2` each.
    TwoPointPair { p: f64, a: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => Err(invalid(
                format!("gaussian sigma must be positive, got {sigma}"),
            )),
            Self::Uniform { a, b } if !(a.is_finite() && b.is_finite() && b > a) => Err(invalid(
                format!("uniform bounds need a < b, got [{a}, {b}]"),
            )),
            Self::TwoPointPair { p, a }
                if !((0.0..=1.0).contains(&p) && a.is_finite() && a > 0.0) =>
            {
                Err(invalid(format!(
                    "twopoint needs p in [0,1] and a > 0, got p={p}, a={a}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Exact `(mu2, mu4, kurtosis)` about the distribution mean.
    pub fn population_moments(&self) -> Result<Moments<f64>> {
        self.validate()?;
        let (mu2, mu4) = match *self {
            Self::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                (s2, 3.0 * s2 * s2)
            }
            Self::Uniform { a, b } => {
                let half = (b - a) / 2.0;
                let h2 = half * half;
                (h2 / 3.0, h2 * h2 / 5.0)
            }
            Self::Rademacher => (1.0, 1.0),
            Self::TwoPointPair { p, a } => {
                let q = 1.0 - p;
                (p + q * a, p + q * a * a)
            }
        };
        // mu4 >= mu2^2 holds exactly; rounding can undercut it by an ulp in the
        // degenerate two-point cases.
        Moments::population(mu2, mu4.max(mu2 * mu2))
    }

    /// `-2 mu4 + 3 mu2^2`; negative when bagging can reduce the variance estimator's MSE.
    pub fn bagging_gap_constant(&self) -> Result<f64> {
        Ok(self.population_moments()?.gap_constant())
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Self::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::TwoPointPair { p, a } => {
                // inverse CDF over the atoms -1, -sqrt(a), sqrt(a), 1
                let u = rng.random::<f64>();
                let half_p = p / 2.0;
                let root = a.sqrt();
                if u < half_p {
                    -1.0
                } else if u < 0.5 {
                    -root
                } else if u < 1.0 - half_p {
                    root
                } else {
                    1.0
                }
            }
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    /// `n` i.i.d. draws from stream 0 of `seed`.
    ///
    /// Panics if the spec is invalid or `n == 0`; use [`DistributionSpec::try_sample`]
    /// to get an error instead.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset<f64> {
        self.try_sample(n, seed)
            .expect("valid distribution and n >= 1")
    }

    pub fn try_sample(&self, n: usize, seed: u64) -> Result<Dataset<f64>> {
        self.validate()?;
        let mut rng = stream_rng(seed, 0);
        Dataset::new(self.sample_with(&mut rng, n))
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            Self::Uniform { a, b } => write!(f, "uniform:{a}:{b}"),
            Self::Rademacher => write!(f, "rademacher"),
            Self::TwoPointPair { p, a } => write!(f, "twopoint:p={p}:a={a}"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `gaussian:1.0`, `uniform:-1:1`, `rademacher` or `twopoint:p=0.3:a=0.125`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let num = |field: &str| -> Result<f64> {
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("cannot parse '{field}' as a number in '{s}'")))
        };
        let spec = match (family.as_str(), rest.as_slice()) {
            ("gaussian" | "normal", [sigma]) => Self::Gaussian { sigma: num(sigma)? },
            ("gaussian" | "normal", []) => Self::Gaussian { sigma: 1.0 },
            ("uniform", [a, b]) => Self::Uniform {
                a: num(a)?,
                b: num(b)?,
            },
            ("rademacher", []) => Self::Rademacher,
            ("twopoint", [first, second]) => {
                let mut p = None;
                let mut a = None;
                for kv in [first, second] {
                    match kv.split_once('=') {
                        Some(("p", v)) => p = Some(num(v)?),
                        Some(("a", v)) => a = Some(num(v)?),
                        _ => return Err(invalid(format!("expected p=.. and a=.. in '{s}'"))),
                    }
                }
                match (p, a) {
                    (Some(p), Some(a)) => Self::TwoPointPair { p, a },
                    _ => return Err(invalid(format!("expected p=.. and a=.. in '{s}'"))),
                }
            }
            _ => return Err(invalid(format!("unknown distribution '{s}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}
