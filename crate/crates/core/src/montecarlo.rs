//! Statistical verification at scales the oracle cannot enumerate:
//! chi-square goodness of fit of sampled count vectors against the closed
//! forms, and empirical moments with z-scores.
//!
//! Everything here is deterministic given (model, n, samples, seed): draws
//! come from the crate's specified SplitMix64 stream, so reports reproduce
//! bit for bit.

use std::collections::HashMap;

use serde::Serialize;

use crate::canonical::canonical_float;
use crate::distribution::{self, CountVector, FormulaSource};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::SplitMix64;
use crate::sampler;
use crate::special::gamma_q;

/// Cells with expected count below this are pooled (classical rule).
pub const POOLING_MIN_EXPECTED: f64 = 5.0;

/// Chi-square goodness-of-fit summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub samples: u64,
    pub cells_merged: usize,
}

/// One composition cell of a count trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofCell {
    pub counts: CountVector,
    pub expected_prob: f64,
    pub observed: u64,
}

/// Goodness-of-fit report plus the per-cell table behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountTrial {
    pub report: GofReport,
    pub cells: Vec<GofCell>,
}

/// Pearson chi-square test of observed counts against expected cell
/// probabilities.
///
/// Cells with expected count below [`POOLING_MIN_EXPECTED`] are merged into
/// a single pooled cell (lowest expectation first); if the pool itself stays
/// below the threshold it absorbs the smallest remaining cells, always
/// leaving at least one cell standalone. The p-value is the upper chi-square
/// tail Q(dof/2, statistic/2) via the regularized incomplete gamma function.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], total: u64) -> Result<GofReport> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidCounts {
            reason: format!(
                "observed has {} cells, expected has {}",
                observed.len(),
                expected.len()
            ),
        });
    }
    let expected_sum: f64 = expected.iter().sum();
    if (expected_sum - 1.0).abs() > 1e-9 {
        return Err(Error::SumNotOne {
            sum: expected_sum,
            tolerance: 1e-9,
        });
    }
    let observed_sum: u64 = observed.iter().sum();
    if observed_sum != total {
        return Err(Error::InvalidCounts {
            reason: format!("observed counts sum to {observed_sum}, expected {total}"),
        });
    }

    let m = observed.len();
    let expected_counts: Vec<f64> = expected.iter().map(|&p| p * total as f64).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        expected_counts[a]
            .partial_cmp(&expected_counts[b])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut pooled = vec![false; m];
    let mut merged = 0usize;
    let mut pool_expected = 0.0;
    let mut pool_observed = 0u64;
    for &c in &order {
        if expected_counts[c] >= POOLING_MIN_EXPECTED {
            break;
        }
        pooled[c] = true;
        merged += 1;
        pool_expected += expected_counts[c];
        pool_observed += observed[c];
    }
    if merged > 0 && pool_expected < POOLING_MIN_EXPECTED {
        for &c in &order {
            if pooled[c] {
                continue;
            }
            if m - merged == 1 || pool_expected >= POOLING_MIN_EXPECTED {
                break;
            }
            pooled[c] = true;
            merged += 1;
            pool_expected += expected_counts[c];
            pool_observed += observed[c];
        }
    }

    let mut cells: Vec<(u64, f64)> = (0..m)
        .filter(|&c| !pooled[c])
        .map(|c| (observed[c], expected_counts[c]))
        .collect();
    if merged > 0 {
        cells.push((pool_observed, pool_expected));
    }
    if cells.len() < 2 {
        return Err(Error::DegenerateCells);
    }

    let mut statistic = 0.0f64;
    for &(obs, exp) in &cells {
        if exp > 0.0 {
            let diff = obs as f64 - exp;
            statistic += diff * diff / exp;
        } else if obs > 0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = cells.len() - 1;
    let p_value = if statistic.is_finite() {
        gamma_q(dof as f64 / 2.0, statistic / 2.0)
    } else {
        0.0
    };
    Ok(GofReport {
        statistic,
        dof,
        p_value,
        samples: total,
        cells_merged: merged,
    })
}

/// Samples count vectors from the model and tests them against its own
/// closed-form composition table.
pub fn run_count_trial(
    model: &ModelParams,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<CountTrial> {
    run_count_trial_against(model, model, n, samples, seed)
}

/// Samples from one model and tests against another's table. With the same
/// model twice this is a self-check; with different deltas it measures the
/// power to detect the dependence effect.
pub fn run_count_trial_against(
    sample_model: &ModelParams,
    expected_model: &ModelParams,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<CountTrial> {
    let k = sample_model.num_categories();
    if expected_model.num_categories() != k {
        return Err(Error::InvalidCounts {
            reason: format!(
                "sample model has {k} categories, expected model has {}",
                expected_model.num_categories()
            ),
        });
    }
    let table = distribution::pmf_table(expected_model, n)?;
    let index: HashMap<Vec<usize>, usize> = table
        .iter()
        .enumerate()
        .map(|(i, (x, _))| (x.counts().to_vec(), i))
        .collect();

    let mut observed = vec![0u64; table.len()];
    let mut rng = SplitMix64::new(seed);
    for _ in 0..samples {
        let seq = sampler::sample_inverse(sample_model, n, rng.next_unit())?;
        let c = sampler::counts(&seq, k)?;
        let cell = *index
            .get(c.counts())
            .expect("every sampled histogram is a composition of n");
        observed[cell] += 1;
    }

    let expected: Vec<f64> = table.iter().map(|&(_, p)| p).collect();
    let report = chi_square_gof(&observed, &expected, samples)?;
    let cells = table
        .into_iter()
        .zip(&observed)
        .map(|((counts, expected_prob), &obs)| GofCell {
            counts,
            expected_prob,
            observed: obs,
        })
        .collect();
    Ok(CountTrial { report, cells })
}

/// Renders a per-cell table as CSV with header `counts,expected_prob,observed`;
/// the counts field is space-separated.
pub fn cells_to_csv(cells: &[GofCell]) -> String {
    let mut out = String::from("counts,expected_prob,observed\n");
    for cell in cells {
        let counts = cell
            .counts
            .counts()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{counts},{},{}\n",
            canonical_float(cell.expected_prob),
            cell.observed
        ));
    }
    out
}

/// Sample mean and covariance of the counts with z-scores against the
/// verified closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMoments {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub mean_standard_errors: Vec<f64>,
    pub mean_z_scores: Vec<f64>,
    pub covariance_z_scores: Vec<Vec<f64>>,
    pub samples: u64,
}

/// Draws count vectors and summarizes their first two sample moments.
///
/// Mean standard errors are sqrt(Sigma_ii / N) from the closed-form
/// covariance; covariance z-scores use the normal-theory approximation
/// Var(s_ij) ~ (Sigma_ii Sigma_jj + Sigma_ij^2) / (N - 1).
pub fn empirical_moments(
    model: &ModelParams,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<EmpiricalMoments> {
    if samples < 2 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: samples as f64,
            bounds: "[2, inf)",
        });
    }
    let k = model.num_categories();
    let mut sums = vec![0.0f64; k];
    let mut cross = vec![vec![0.0f64; k]; k];
    let mut rng = SplitMix64::new(seed);
    for _ in 0..samples {
        let seq = sampler::sample_inverse(model, n, rng.next_unit())?;
        let x = sampler::counts(&seq, k)?;
        for i in 0..k {
            let xi = x.counts()[i] as f64;
            sums[i] += xi;
            for j in 0..k {
                cross[i][j] += xi * x.counts()[j] as f64;
            }
        }
    }
    let count = samples as f64;
    let mean: Vec<f64> = sums.iter().map(|s| s / count).collect();
    let mut covariance = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        for j in 0..k {
            covariance[i][j] = (cross[i][j] - count * mean[i] * mean[j]) / (count - 1.0);
        }
    }

    let theory_mean = distribution::mean(model, n);
    let theory_cov = distribution::covariance(model, n, FormulaSource::OracleVerified);
    let mean_standard_errors: Vec<f64> =
        (0..k).map(|i| (theory_cov[i][i] / count).sqrt()).collect();
    let mean_z_scores: Vec<f64> = (0..k)
        .map(|i| (mean[i] - theory_mean[i]) / mean_standard_errors[i])
        .collect();
    let mut covariance_z_scores = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        for j in 0..k {
            let var =
                (theory_cov[i][i] * theory_cov[j][j] + theory_cov[i][j].powi(2)) / (count - 1.0);
            covariance_z_scores[i][j] = (covariance[i][j] - theory_cov[i][j]) / var.sqrt();
        }
    }
    Ok(EmpiricalMoments {
        mean,
        covariance,
        mean_standard_errors,
        mean_z_scores,
        covariance_z_scores,
        samples,
    })
}
