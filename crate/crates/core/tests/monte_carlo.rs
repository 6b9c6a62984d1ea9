//! Statistical checks of the closed forms against simulation, plus exact
//! expectations over every dataset for distributions with finitely many atoms.

use rayon::prelude::*;

use bagcheck::bagging::{bag_estimate, BagConfig};
use bagcheck::closed_form::{
    bagging_beneficial, el_var_u_variance, min_iterations, mse_gap, var_l_eu_variance,
};
use bagcheck::exact_oracle::enumerate_eu;
use bagcheck::experiments::{
    run_kurtosis_sweep, run_mse_gap_experiment, KurtosisSweepConfig, MeanEstimate, MseGapConfig,
};
use bagcheck::moments::{expected_pqr, symmetric_sums_pqr};
use bagcheck::rng::stream_rng;
use bagcheck::{unbiased_variance, Dataset, DistributionSpec, EnumerationLimit, Exact, Moments};

const FAMILIES: [DistributionSpec; 4] = [
    DistributionSpec::Gaussian { sigma: 1.0 },
    DistributionSpec::Uniform { a: -1.0, b: 1.0 },
    DistributionSpec::Rademacher,
    DistributionSpec::TwoPointPair { p: 0.3, a: 0.125 },
];

#[test]
fn symmetric_sums_average_to_their_expectations() {
    let n = 4;
    for spec in FAMILIES {
        let mom = spec.population_moments().unwrap();
        let expected = expected_pqr(n, &mom).unwrap();
        let sums: Vec<[f64; 3]> = (0..100_000u64)
            .into_par_iter()
            .map(|t| {
                let s = symmetric_sums_pqr(
                    &Dataset::new(spec.sample_with(&mut stream_rng(41, t), n)).unwrap(),
                );
                [s.p, s.q, s.r]
            })
            .collect();
        for (k, target) in [expected.p, expected.q, expected.r].into_iter().enumerate() {
            let mc = MeanEstimate::from_samples(&sums.iter().map(|s| s[k]).collect::<Vec<_>>());
            assert!(
                mc.within(target, 3.0),
                "{spec} component {k}: {} vs {target} (se {})",
                mc.mean,
                mc.stderr
            );
        }
    }
}

#[test]
fn rademacher_triples_pqr() {
    let sums: Vec<[f64; 3]> = (0..1_000_000u64)
        .into_par_iter()
        .map(|t| {
            let d = DistributionSpec::Rademacher.sample_with(&mut stream_rng(42, t), 3);
            let s = symmetric_sums_pqr(&Dataset::new(d).unwrap());
            [s.p, s.q, s.r]
        })
        .collect();
    let mean = |k: usize| sums.iter().map(|s| s[k]).sum::<f64>() / sums.len() as f64;
    assert!((mean(0) - 24.0).abs() < 0.24, "{}", mean(0));
    assert!((mean(1) - 12.0).abs() < 0.12, "{}", mean(1));
    assert_eq!(mean(2), 0.0);
}

/// At fixed data the bagged estimate is centred on `E_U` for every `N`, and
/// its spread around `E_U` is `Var_U / N`.
#[test]
fn bag_set_draws_match_enumeration() {
    let data = Dataset::new(vec![0.0, 1.0, 3.0]).unwrap();
    let m = 3;
    let eu = enumerate_eu(&data, m, unbiased_variance, EnumerationLimit::default()).unwrap();
    let var_u = eu.variance();
    for n_bags in [1usize, 2, 4, 8] {
        let values: Vec<f64> = (0..100_000u64)
            .into_par_iter()
            .map(|seed| {
                bag_estimate(
                    &data,
                    &BagConfig::new(m, n_bags, seed).unwrap(),
                    unbiased_variance,
                )
                .unwrap()
            })
            .collect();
        let mean = MeanEstimate::from_samples(&values);
        assert!(
            mean.within(eu.mean, 3.0),
            "N={n_bags}: {} vs {}",
            mean.mean,
            eu.mean
        );
        let sq: Vec<f64> = values.iter().map(|v| (v - eu.mean).powi(2)).collect();
        let spread = MeanEstimate::from_samples(&sq);
        let target = var_u / n_bags as f64;
        assert!(
            spread.within(target, 3.0),
            "N={n_bags}: {} vs {target} (se {})",
            spread.mean,
            spread.stderr
        );
    }
}

/// `(value, probability)` pairs.
type Atoms = Vec<(Exact, Exact)>;

/// Every dataset of a finite-atom distribution, weighted by its probability.
fn atom_expansion(atoms: &[(Exact, Exact)], n: usize, mut visit: impl FnMut(Exact, Vec<Exact>)) {
    let mut digits = vec![0usize; n];
    loop {
        let weight = digits.iter().fold(Exact::from_integer(1.into()), |w, &d| {
            w * atoms[d].1.clone()
        });
        visit(weight, digits.iter().map(|&d| atoms[d].0.clone()).collect());
        let Some(pos) = digits.iter().rposition(|&d| d + 1 < atoms.len()) else {
            break;
        };
        digits[pos] += 1;
        digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
    }
}

#[test]
fn exact_chain_over_all_datasets() {
    let q = |a: i64, b: i64| Exact::new(a.into(), b.into());
    // two-point pair with a = 1/4 has rational atoms +-1/2
    let families: [(Atoms, Moments<Exact>); 3] = [
        (
            vec![(q(-1, 1), q(1, 2)), (q(1, 1), q(1, 2))],
            Moments::population(q(1, 1), q(1, 1)).unwrap(),
        ),
        (
            vec![
                (q(-1, 1), q(1, 4)),
                (q(-1, 2), q(1, 4)),
                (q(1, 2), q(1, 4)),
                (q(1, 1), q(1, 4)),
            ],
            Moments::population(q(5, 8), q(17, 32)).unwrap(),
        ),
        (
            vec![
                (q(-1, 1), q(1, 6)),
                (q(-1, 2), q(1, 3)),
                (q(1, 2), q(1, 3)),
                (q(1, 1), q(1, 6)),
            ],
            Moments::population(q(1, 2), q(3, 8)).unwrap(),
        ),
    ];
    let limit = EnumerationLimit::default();
    for (atoms, mom) in &families {
        for n in 2..=4 {
            for m in 2..=4 {
                let (mut el_var_u, mut el_eu, mut el_eu2) = (q(0, 1), q(0, 1), q(0, 1));
                atom_expansion(atoms, n, |w, values| {
                    let e =
                        enumerate_eu(&Dataset::new(values).unwrap(), m, unbiased_variance, limit)
                            .unwrap();
                    el_var_u += w.clone() * e.variance();
                    el_eu2 += w.clone() * e.mean.clone() * e.mean.clone();
                    el_eu += w * e.mean;
                });
                assert_eq!(
                    el_var_u,
                    el_var_u_variance(n, m, mom).unwrap(),
                    "F at n={n} m={m}"
                );
                assert_eq!(
                    el_eu2 - el_eu.clone() * el_eu,
                    var_l_eu_variance(n, mom).unwrap(),
                    "G_var at n={n}"
                );
            }
        }
    }
}

#[test]
fn mse_gap_experiment_agrees_with_exact_gap() {
    let cfg = MseGapConfig {
        seed: 3,
        ..MseGapConfig::default()
    };
    for row in run_mse_gap_experiment(&cfg).unwrap() {
        let z = (row.mc_gap - row.exact_gap) / row.mc_stderr;
        assert!(
            z.abs() <= 3.0,
            "n={}: mc {} exact {} (z = {z})",
            row.n,
            row.mc_gap,
            row.exact_gap
        );
    }
}

#[test]
fn rademacher_gap_is_positive_on_the_default_grid() {
    let cfg = MseGapConfig {
        distribution: DistributionSpec::Rademacher,
        trials: 10,
        ..MseGapConfig::default()
    };
    for row in run_mse_gap_experiment(&cfg).unwrap() {
        assert!(row.exact_gap > 0.0, "n={}", row.n);
        assert!(row.asymptotic_gap > 0.0);
    }
}

#[test]
fn gaussian_gap_scales_like_minus_three_over_n_squared() {
    let mom = FAMILIES[0].population_moments().unwrap();
    let g = mse_gap(1000, 1000, 100_000, &mom).unwrap().exact;
    assert!((g * 1e6 + 3.0).abs() < 0.15, "{}", g * 1e6);
}

#[test]
fn gap_sign_follows_kurtosis() {
    let heavy = [
        DistributionSpec::Gaussian { sigma: 2.0 },
        DistributionSpec::Uniform { a: 0.0, b: 3.0 },
        DistributionSpec::TwoPointPair { p: 0.3, a: 0.125 },
        DistributionSpec::TwoPointPair { p: 0.5, a: 0.125 },
    ];
    for spec in heavy {
        let mom = spec.population_moments().unwrap();
        assert!(bagging_beneficial(&mom).unwrap());
        let helped = [50usize, 100, 200, 400].iter().any(|&n| {
            let k = min_iterations(n, n, &mom).unwrap().unwrap();
            mse_gap(n, n, k, &mom).unwrap().exact < 0.0
        });
        assert!(helped, "{spec}");
    }
    let light = [
        DistributionSpec::Rademacher,
        DistributionSpec::TwoPointPair { p: 0.8, a: 0.125 },
    ];
    for spec in light {
        let mom = spec.population_moments().unwrap();
        assert!(!bagging_beneficial(&mom).unwrap());
        assert_eq!(min_iterations(50, 50, &mom).unwrap(), None);
        for n in (10..=100).step_by(10) {
            for n_bags in [1, 10, 100, 1000, 100_000] {
                assert!(
                    mse_gap(n, n, n_bags, &mom).unwrap().exact > 0.0,
                    "{spec} n={n} N={n_bags}"
                );
            }
        }
    }
}

#[test]
fn kurtosis_sweep_monte_carlo_matches_exact_columns() {
    let cfg = KurtosisSweepConfig {
        trials: 20_000,
        seed: 11,
        ..KurtosisSweepConfig::default()
    };
    for row in run_kurtosis_sweep(&cfg).unwrap() {
        let zb = (row.mse_bagged_mc - row.mse_bagged_exact) / row.mse_bagged_stderr;
        let zp = (row.mse_plain_mc - row.mse_plain_exact) / row.mse_plain_stderr;
        assert!(
            zb.abs() <= 3.0 && zp.abs() <= 3.0,
            "p={}: z_bagged={zb} z_plain={zp}",
            row.p
        );
        if row.kurtosis < 1.5 {
            assert!(row.mse_plain_exact < row.mse_bagged_exact, "p={}", row.p);
        }
    }
}
