//! Exhaustive-enumeration ground truth.
//!
//! Enumerates every length-n sequence with its exact rational probability
//! and derives each distributional quantity by brute force. Every closed
//! form in [`crate::distribution`] is adjudicated against these sums; where
//! two printed variants of a formula disagree, the enumeration is the
//! tiebreaker and the verdicts land in [`ErrataReport`].

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::distribution::{self, CountVector, FormulaSource};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rational;
use crate::rng::SplitMix64;
use crate::sampler::{lex_index, CategorySequence};

/// Default bound on K^n before enumeration refuses to run.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Float tolerance for errata verdicts on quantities that cannot be
/// compared in rational arithmetic (MGF probes, correlations).
const FLOAT_VERDICT_TOL: f64 = 1e-9;

/// Exact distribution over all K^n sequences, indexed by lexicographic rank.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    model: ModelParams,
    n: usize,
    masses: Vec<BigRational>,
}

impl ExactDistribution {
    pub fn enumerate(model: &ModelParams, n: usize) -> Result<Self> {
        Self::enumerate_with_cap(model, n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(model: &ModelParams, n: usize, cap: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange {
                what: "sequence length n",
                value: 0.0,
                bounds: "[1, inf)",
            });
        }
        let k = model.num_categories();
        let size = (k as u128)
            .checked_pow(n as u32)
            .filter(|&s| s <= cap)
            .ok_or(Error::EnumerationTooLarge {
                categories: k,
                n,
                cap,
            })?;

        let mut masses = Vec::with_capacity(size as usize);
        for first in 1..=k {
            let seed = model.probs_exact()[first - 1].clone();
            if n == 1 {
                masses.push(seed);
                continue;
            }
            let cond = model.conditional(first)?;
            extend_masses(&seed, cond.probs_exact(), n - 1, &mut masses);
        }
        Ok(Self {
            model: model.clone(),
            n,
            masses,
        })
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Masses in lexicographic sequence order.
    pub fn masses(&self) -> &[BigRational] {
        &self.masses
    }

    /// Mass of one sequence, looked up by lexicographic rank.
    pub fn mass(&self, seq: &CategorySequence) -> Result<&BigRational> {
        if seq.len() != self.n {
            return Err(Error::InvalidSequence {
                entry: 0,
                position: seq.len().min(1),
                categories: self.model.num_categories(),
            });
        }
        let index = lex_index(seq, self.model.num_categories())?;
        Ok(&self.masses[(index - 1) as usize])
    }

    /// True when the masses sum to exactly 1.
    pub fn is_normalized(&self) -> bool {
        let total: BigRational = self.masses.iter().sum();
        total == BigRational::one()
    }

    /// Visits every sequence (as 1-based digits) with its mass, in
    /// lexicographic order.
    pub fn for_each_sequence<F: FnMut(&[usize], &BigRational)>(&self, mut f: F) {
        let k = self.model.num_categories();
        let mut digits = vec![1usize; self.n];
        for (idx, mass) in self.masses.iter().enumerate() {
            f(&digits, mass);
            if idx + 1 < self.masses.len() {
                for pos in (0..self.n).rev() {
                    if digits[pos] < k {
                        digits[pos] += 1;
                        break;
                    }
                    digits[pos] = 1;
                }
            }
        }
    }

    /// Pushforward mass of one count vector: the sum over all sequences
    /// whose histogram equals it.
    pub fn pmf(&self, x: &CountVector) -> Result<BigRational> {
        let k = self.model.num_categories();
        if x.len() != k {
            return Err(Error::InvalidCounts {
                reason: format!("expected {k} entries, got {}", x.len()),
            });
        }
        if x.total() != self.n {
            return Err(Error::InvalidCounts {
                reason: format!("entries sum to {}, expected {}", x.total(), self.n),
            });
        }
        let mut total = BigRational::zero();
        let mut hist = vec![0usize; k];
        self.for_each_sequence(|digits, mass| {
            hist.iter_mut().for_each(|h| *h = 0);
            for &e in digits {
                hist[e - 1] += 1;
            }
            if hist == x.counts() {
                total += mass;
            }
        });
        Ok(total)
    }

    /// The full pushforward: every count vector with its exact mass, in
    /// ascending lexicographic count order.
    pub fn count_distribution(&self) -> Vec<(CountVector, BigRational)> {
        let k = self.model.num_categories();
        let mut acc: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
        self.for_each_sequence(|digits, mass| {
            let mut hist = vec![0usize; k];
            for &e in digits {
                hist[e - 1] += 1;
            }
            acc.entry(hist)
                .and_modify(|m| *m += mass)
                .or_insert_with(|| mass.clone());
        });
        acc.into_iter()
            .map(|(counts, mass)| (CountVector::new(counts), mass))
            .collect()
    }

    /// Exact mean vector and covariance matrix of the counts.
    pub fn moments(&self) -> ExactMoments {
        let k = self.model.num_categories();
        let mut mean = vec![BigRational::zero(); k];
        let mut second = vec![vec![BigRational::zero(); k]; k];
        self.for_each_sequence(|digits, mass| {
            let mut hist = vec![0u64; k];
            for &e in digits {
                hist[e - 1] += 1;
            }
            for i in 0..k {
                if hist[i] == 0 {
                    continue;
                }
                let xi = BigRational::from_integer(hist[i].into());
                mean[i] += mass * &xi;
                for j in 0..k {
                    if hist[j] > 0 {
                        let xj = BigRational::from_integer(hist[j].into());
                        second[i][j] += mass * &xi * xj;
                    }
                }
            }
        });
        let mut covariance = vec![vec![BigRational::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                covariance[i][j] = &second[i][j] - &mean[i] * &mean[j];
            }
        }
        ExactMoments { mean, covariance }
    }

    /// Exact distribution of the entry at one position (1-based).
    pub fn position_marginal(&self, position: usize) -> Result<Vec<BigRational>> {
        if position == 0 || position > self.n {
            return Err(Error::BadPosition {
                position,
                n: self.n,
            });
        }
        let k = self.model.num_categories();
        let mut out = vec![BigRational::zero(); k];
        self.for_each_sequence(|digits, mass| {
            out[digits[position - 1] - 1] += mass;
        });
        Ok(out)
    }

    /// Exact covariance matrix between the category indicators at two
    /// positions, by direct summation.
    pub fn cross_covariance(&self, earlier: usize, later: usize) -> Result<Vec<Vec<BigRational>>> {
        if earlier < 1 || earlier >= later || later > self.n {
            return Err(Error::BadPositions {
                first: earlier,
                second: later,
            });
        }
        let k = self.model.num_categories();
        let mut joint = vec![vec![BigRational::zero(); k]; k];
        self.for_each_sequence(|digits, mass| {
            joint[digits[earlier - 1] - 1][digits[later - 1] - 1] += mass;
        });
        let m_earlier = self.position_marginal(earlier)?;
        let m_later = self.position_marginal(later)?;
        let mut out = vec![vec![BigRational::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                out[i][j] = &joint[i][j] - &m_earlier[i] * &m_later[j];
            }
        }
        Ok(out)
    }
}

fn extend_masses(
    acc: &BigRational,
    cond: &[BigRational],
    levels_left: usize,
    out: &mut Vec<BigRational>,
) {
    for factor in cond {
        let next = acc * factor;
        if levels_left == 1 {
            out.push(next);
        } else {
            extend_masses(&next, cond, levels_left - 1, out);
        }
    }
}

/// Exact moments of the count vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mean: Vec<BigRational>,
    pub covariance: Vec<Vec<BigRational>>,
}

// ---------------------------------------------------------------------------
// errata report
// ---------------------------------------------------------------------------

/// How a closed form compared against the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Identical in exact rational arithmetic.
    Exact,
    /// Float comparison within tolerance.
    Pass,
    /// Measurable disagreement with the enumeration.
    Deviates,
}

/// Verdict for one formula over its probe grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaVerdict {
    pub max_deviation: f64,
    pub verdict: Verdict,
    pub probe_grid: String,
}

impl FormulaVerdict {
    fn from_exact(max_deviation_exact: &BigRational, probe_grid: String) -> Self {
        let exact_zero = max_deviation_exact.is_zero();
        Self {
            max_deviation: rational::to_f64(max_deviation_exact),
            verdict: if exact_zero {
                Verdict::Exact
            } else {
                Verdict::Deviates
            },
            probe_grid,
        }
    }

    fn from_float(max_deviation: f64, probe_grid: String) -> Self {
        Self {
            max_deviation,
            verdict: if max_deviation <= FLOAT_VERDICT_TOL {
                Verdict::Pass
            } else {
                Verdict::Deviates
            },
            probe_grid,
        }
    }
}

/// Adjudication of every closed form against the enumeration at one n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrataReport {
    pub n: usize,
    pub pmf: FormulaVerdict,
    pub marginal_proof: FormulaVerdict,
    pub marginal_statement: FormulaVerdict,
    pub mgf: FormulaVerdict,
    pub covariance_oracle_verified: FormulaVerdict,
    pub covariance_printed: FormulaVerdict,
    pub correlation_oracle_verified: FormulaVerdict,
    pub correlation_printed: FormulaVerdict,
    pub cross_covariance: FormulaVerdict,
}

impl ErrataReport {
    /// True when every default-path formula agrees with the enumeration.
    /// The printed variants and the statement pairing do not gate this.
    pub fn all_verified_ok(&self) -> bool {
        self.pmf.verdict == Verdict::Exact
            && self.marginal_proof.verdict == Verdict::Exact
            && self.mgf.verdict != Verdict::Deviates
            && self.covariance_oracle_verified.verdict == Verdict::Exact
            && self.correlation_oracle_verified.verdict != Verdict::Deviates
            && self.cross_covariance.verdict == Verdict::Exact
    }
}

const MGF_PROBE_COUNT: usize = 10;
const MGF_PROBE_SEED: u64 = 0xDCC5;

/// Compares every closed form against exhaustive enumeration at length n.
pub fn errata_report(model: &ModelParams, n: usize) -> Result<ErrataReport> {
    errata_report_with_cap(model, n, DEFAULT_ENUMERATION_CAP)
}

pub fn errata_report_with_cap(model: &ModelParams, n: usize, cap: u128) -> Result<ErrataReport> {
    let dist = ExactDistribution::enumerate_with_cap(model, n, cap)?;
    let k = model.num_categories();
    let pushforward = dist.count_distribution();

    // joint PMF over every composition, including zero entries
    let mut pmf_dev = BigRational::zero();
    for (x, mass) in &pushforward {
        let closed = distribution::pmf_exact(model, n, x)?;
        let dev = (&closed - mass).abs();
        if dev > pmf_dev {
            pmf_dev = dev;
        }
    }
    let pmf_grid = format!("all {} compositions of n={n}", pushforward.len());

    // univariate marginal, both pairings, against joint-PMF sums
    let mut proof_dev = BigRational::zero();
    let mut statement_dev = BigRational::zero();
    for i in 1..=k {
        for count in 0..=n {
            let summed: BigRational = pushforward
                .iter()
                .filter(|(x, _)| x.counts()[i - 1] == count)
                .map(|(_, mass)| mass)
                .sum();
            let proof = distribution::marginal_pmf_exact(model, n, i, count)?;
            let statement = distribution::marginal_pmf_statement_exact(model, n, i, count)?;
            let dev = (&proof - &summed).abs();
            if dev > proof_dev {
                proof_dev = dev;
            }
            let dev = (&statement - &summed).abs();
            if dev > statement_dev {
                statement_dev = dev;
            }
        }
    }
    let marginal_grid = format!("all categories, counts 0..={n}");

    // MGF at seeded probe points
    let mut rng = SplitMix64::new(MGF_PROBE_SEED.wrapping_add(n as u64));
    let mut mgf_dev = 0.0f64;
    for _ in 0..MGF_PROBE_COUNT {
        let t: Vec<f64> = (0..k).map(|_| rng.next_unit() - 0.5).collect();
        let closed = distribution::mgf(model, n, &t)?;
        let expected = expectation_of_exp(&dist, &t);
        mgf_dev = mgf_dev.max((closed - expected).abs());
    }
    let mgf_grid = format!("{MGF_PROBE_COUNT} seeded probe vectors, entries in [-0.5, 0.5)");

    // covariance, both variants, against enumerated moments
    let moments = dist.moments();
    let mut cov_verified_dev = BigRational::zero();
    let mut cov_printed_dev = BigRational::zero();
    let verified = distribution::covariance_exact(model, n, FormulaSource::OracleVerified);
    let printed = distribution::covariance_exact(model, n, FormulaSource::Printed);
    for i in 0..k {
        for j in 0..k {
            let dev = (&verified[i][j] - &moments.covariance[i][j]).abs();
            if dev > cov_verified_dev {
                cov_verified_dev = dev;
            }
            let dev = (&printed[i][j] - &moments.covariance[i][j]).abs();
            if dev > cov_printed_dev {
                cov_printed_dev = dev;
            }
        }
    }
    let matrix_grid = format!("all {k}x{k} entries");

    // correlations derived from each covariance variant, against the
    // enumerated correlation (float, because of the square roots)
    let oracle_corr = correlation_from_exact(&moments.covariance);
    let corr_verified_dev = max_matrix_dev(
        &distribution::correlation(model, n, FormulaSource::OracleVerified)?,
        &oracle_corr,
    );
    let corr_printed_dev = max_matrix_dev(
        &distribution::correlation(model, n, FormulaSource::Printed)?,
        &oracle_corr,
    );

    // cross-covariance over every position pair
    let mut cross_dev = BigRational::zero();
    for earlier in 1..n {
        for later in (earlier + 1)..=n {
            let closed = distribution::cross_covariance_exact(model, earlier, later)?;
            let oracle = dist.cross_covariance(earlier, later)?;
            for i in 0..k {
                for j in 0..k {
                    let dev = (&closed[i][j] - &oracle[i][j]).abs();
                    if dev > cross_dev {
                        cross_dev = dev;
                    }
                }
            }
        }
    }
    let cross_grid = if n >= 2 {
        format!("all position pairs up to n={n}")
    } else {
        "no position pairs at n=1".to_string()
    };

    Ok(ErrataReport {
        n,
        pmf: FormulaVerdict::from_exact(&pmf_dev, pmf_grid),
        marginal_proof: FormulaVerdict::from_exact(&proof_dev, marginal_grid.clone()),
        marginal_statement: FormulaVerdict::from_exact(&statement_dev, marginal_grid),
        mgf: FormulaVerdict::from_float(mgf_dev, mgf_grid),
        covariance_oracle_verified: FormulaVerdict::from_exact(
            &cov_verified_dev,
            matrix_grid.clone(),
        ),
        covariance_printed: FormulaVerdict::from_exact(&cov_printed_dev, matrix_grid.clone()),
        correlation_oracle_verified: FormulaVerdict::from_float(
            corr_verified_dev,
            matrix_grid.clone(),
        ),
        correlation_printed: FormulaVerdict::from_float(corr_printed_dev, matrix_grid),
        cross_covariance: FormulaVerdict::from_exact(&cross_dev, cross_grid),
    })
}

/// E[e^{t . X}] by direct summation, compensated to keep float noise down.
pub fn expectation_of_exp(dist: &ExactDistribution, t: &[f64]) -> f64 {
    let k = dist.model().num_categories();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    dist.for_each_sequence(|digits, mass| {
        let mut hist = vec![0u64; k];
        for &e in digits {
            hist[e - 1] += 1;
        }
        let dot: f64 = hist.iter().zip(t).map(|(&h, &ti)| h as f64 * ti).sum();
        let term = rational::to_f64(mass) * dot.exp();
        let y = term - comp;
        let tmp = sum + y;
        comp = (tmp - sum) - y;
        sum = tmp;
    });
    sum
}

fn correlation_from_exact(cov: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    let k = cov.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = if i == j {
                1.0
            } else {
                rational::to_f64(&cov[i][j])
                    / (rational::to_f64(&cov[i][i]) * rational::to_f64(&cov[j][j])).sqrt()
            };
        }
    }
    out
}

fn max_matrix_dev(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (va, vb) in ra.iter().zip(rb) {
            worst = worst.max((va - vb).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn uniform_third_half() -> ModelParams {
        ModelParams::from_rationals(vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)], ratio(1, 2))
            .unwrap()
    }

    #[test]
    fn single_level_is_base_probs() {
        let dist = ExactDistribution::enumerate(&uniform_third_half(), 1).unwrap();
        assert_eq!(dist.masses(), &[ratio(1, 3), ratio(1, 3), ratio(1, 3)]);
    }

    #[test]
    fn worked_sequence_mass() {
        // (2,1,2) carries p_2 * down_1 * up_2 = (1/3)(1/6)(2/3) = 1/27
        let dist = ExactDistribution::enumerate(&uniform_third_half(), 3).unwrap();
        let mass = dist.mass(&CategorySequence::new(vec![2, 1, 2])).unwrap();
        assert_eq!(mass, &ratio(1, 27));
    }

    #[test]
    fn masses_sum_to_one_exactly() {
        for (p, delta) in [
            (vec![0.2, 0.3, 0.5], 0.4),
            (vec![0.5, 0.5], 1.0),
            (vec![0.1, 0.9], 0.0),
        ] {
            let m = ModelParams::new(&p, delta).unwrap();
            let dist = ExactDistribution::enumerate(&m, 6).unwrap();
            assert!(dist.is_normalized());
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let m = uniform_third_half();
        let err = ExactDistribution::enumerate_with_cap(&m, 13, 1_000_000).unwrap_err();
        assert_eq!(err.code(), "EnumerationTooLarge");
        let err = ExactDistribution::enumerate(&m, 200).unwrap_err();
        assert_eq!(err.code(), "EnumerationTooLarge");
    }

    #[test]
    fn pushforward_worked_value() {
        let dist = ExactDistribution::enumerate(&uniform_third_half(), 2).unwrap();
        let mass = dist.pmf(&CountVector::new(vec![0, 1, 1])).unwrap();
        assert_eq!(mass, ratio(1, 9));
        let total: BigRational = dist
            .count_distribution()
            .into_iter()
            .map(|(_, mass)| mass)
            .sum();
        assert_eq!(total, ratio(1, 1));
    }

    #[test]
    fn pushforward_matches_multinomial_when_independent() {
        let m = ModelParams::new(&[0.2, 0.8], 0.0).unwrap();
        let dist = ExactDistribution::enumerate(&m, 4).unwrap();
        // C(4,1) * (1/5)^1 * (4/5)^3 = 4 * 64 / 625
        let mass = dist.pmf(&CountVector::new(vec![1, 3])).unwrap();
        assert_eq!(mass, ratio(256, 625));
    }

    #[test]
    fn mean_is_n_times_p() {
        let m = ModelParams::new(&[0.2, 0.3, 0.5], 0.7).unwrap();
        let dist = ExactDistribution::enumerate(&m, 5).unwrap();
        let moments = dist.moments();
        assert_eq!(moments.mean, distribution::mean_exact(&m, 5));
    }

    #[test]
    fn full_dependence_variance_is_two_point() {
        let m = ModelParams::new(&[0.5, 0.5], 1.0).unwrap();
        let dist = ExactDistribution::enumerate(&m, 3).unwrap();
        let moments = dist.moments();
        assert_eq!(moments.covariance[0][0], ratio(9, 4));
    }

    #[test]
    fn position_marginals_equal_base_probs() {
        for delta in [0.0, 0.5, 1.0] {
            let m = ModelParams::new(&[0.2, 0.3, 0.5], delta).unwrap();
            let dist = ExactDistribution::enumerate(&m, 5).unwrap();
            for r in 1..=5 {
                assert_eq!(
                    dist.position_marginal(r).unwrap(),
                    m.probs_exact().to_vec(),
                    "delta={delta} r={r}"
                );
            }
        }
    }

    #[test]
    fn position_marginal_rejects_bad_position() {
        let dist = ExactDistribution::enumerate(&uniform_third_half(), 3).unwrap();
        assert_eq!(dist.position_marginal(0).unwrap_err().code(), "BadPosition");
        assert_eq!(dist.position_marginal(4).unwrap_err().code(), "BadPosition");
    }

    #[test]
    fn cross_covariance_matches_closed_form() {
        let m = ModelParams::new(&[0.2, 0.3, 0.5], 0.4).unwrap();
        let dist = ExactDistribution::enumerate(&m, 4).unwrap();
        for earlier in 1..4 {
            for later in (earlier + 1)..=4 {
                let oracle = dist.cross_covariance(earlier, later).unwrap();
                let closed = distribution::cross_covariance_exact(&m, earlier, later).unwrap();
                assert_eq!(oracle, closed, "pair ({earlier},{later})");
            }
        }
    }

    #[test]
    fn errata_flags_only_the_printed_forms() {
        let report = errata_report(&uniform_third_half(), 3).unwrap();
        assert!(report.all_verified_ok());
        assert_eq!(report.pmf.verdict, Verdict::Exact);
        assert_eq!(report.marginal_proof.verdict, Verdict::Exact);
        assert_eq!(report.marginal_statement.verdict, Verdict::Deviates);
        assert_eq!(report.covariance_oracle_verified.verdict, Verdict::Exact);
        assert_eq!(report.covariance_printed.verdict, Verdict::Deviates);
        assert_eq!(report.cross_covariance.verdict, Verdict::Exact);
        assert_eq!(report.mgf.verdict, Verdict::Pass);
    }

    #[test]
    fn errata_printed_deviation_at_full_dependence() {
        // diag gap is delta*(n-1)*p*(1-p) = 0.5 here (printed 1.75 vs 2.25);
        // the off-diagonal gap |-(3/4) - (-(9/4))| = 1.5 dominates the max
        let m = ModelParams::new(&[0.5, 0.5], 1.0).unwrap();
        let printed = distribution::covariance(&m, 3, FormulaSource::Printed);
        let verified = distribution::covariance(&m, 3, FormulaSource::OracleVerified);
        assert!((verified[0][0] - printed[0][0] - 0.5).abs() < 1e-15);
        let report = errata_report(&m, 3).unwrap();
        assert!((report.covariance_printed.max_deviation - 1.5).abs() < 1e-15);
        assert_eq!(report.covariance_printed.verdict, Verdict::Deviates);
    }

    #[test]
    fn errata_all_pass_when_independent() {
        let m = ModelParams::new(&[0.2, 0.3, 0.5], 0.0).unwrap();
        let report = errata_report(&m, 4).unwrap();
        assert!(report.all_verified_ok());
        assert_eq!(report.marginal_statement.verdict, Verdict::Exact);
        assert_eq!(report.covariance_printed.verdict, Verdict::Exact);
        assert_eq!(report.correlation_printed.verdict, Verdict::Pass);
    }
}
