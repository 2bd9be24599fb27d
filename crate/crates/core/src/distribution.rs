//! Closed forms for the count distribution of a dependent categorical
//! sequence: joint PMF, univariate marginal, moment generating function,
//! moments, and the pairwise cross-covariance between positions.
//!
//! The covariance and correlation come in two variants selected by
//! [`FormulaSource`]: the default `oracle_verified` form is what exact
//! enumeration confirms (obtained by summing the position-pair
//! cross-covariances), while `printed` reproduces an alternate form from
//! the original derivation that deviates once `delta > 0`; it is retained
//! for comparison and shows up in the errata report.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rational;

/// Largest composition table the library will materialize by default.
pub const DEFAULT_TABLE_CAP: u128 = 1_000_000;

/// Sequence length above which float factorials switch to log-space.
const DIRECT_FACTORIAL_MAX_N: usize = 20;

/// Category counts of a length-n sequence; entries sum to n.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CountVector {
    counts: Vec<usize>,
}

impl CountVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl From<Vec<usize>> for CountVector {
    fn from(counts: Vec<usize>) -> Self {
        Self::new(counts)
    }
}

/// Which covariance/correlation formulas to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaSource {
    /// Forms confirmed exactly by the enumeration oracle (default).
    OracleVerified,
    /// Forms as printed in the original derivation; deviate for delta > 0.
    Printed,
}

/// Mean, covariance, and correlation bundled for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
    pub formula_source: FormulaSource,
}

/// Covariance matrix between the category indicators of two positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCovarianceMatrix {
    earlier: usize,
    later: usize,
    entries: Vec<Vec<f64>>,
}

impl CrossCovarianceMatrix {
    pub fn earlier(&self) -> usize {
        self.earlier
    }

    pub fn later(&self) -> usize {
        self.later
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

fn check_counts(model: &ModelParams, n: usize, x: &CountVector) -> Result<()> {
    let k = model.num_categories();
    if x.len() != k {
        return Err(Error::InvalidCounts {
            reason: format!("expected {k} entries, got {}", x.len()),
        });
    }
    let total = x.total();
    if total != n {
        return Err(Error::InvalidCounts {
            reason: format!("entries sum to {total}, expected {n}"),
        });
    }
    Ok(())
}

fn check_length(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sequence length n",
            value: 0.0,
            bounds: "[1, inf)",
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// factorial / binomial helpers
// ---------------------------------------------------------------------------

fn factorial_u64(m: usize) -> u64 {
    debug_assert!(m <= 20);
    (1..=m as u64).product()
}

fn big_factorial(m: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=m as u64 {
        acc *= i;
    }
    acc
}

fn big_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= DIRECT_FACTORIAL_MAX_N {
        (factorial_u64(n) / (factorial_u64(k) * factorial_u64(n - k))) as f64
    } else {
        (crate::special::ln_factorial(n as u64)
            - crate::special::ln_factorial(k as u64)
            - crate::special::ln_factorial((n - k) as u64))
        .exp()
    }
}

/// `base^exp` with 0^0 = 1, returning 0 early for a zero base.
fn pow_or_zero(base: f64, exp: usize) -> f64 {
    if exp == 0 {
        1.0
    } else if base == 0.0 {
        0.0
    } else {
        base.powi(exp as i32)
    }
}

/// Number of compositions of n into k parts, saturating on overflow.
fn composition_count(n: usize, k: usize) -> u128 {
    // C(n + k - 1, k - 1)
    let top = (n + k - 1) as u128;
    let pick = (k - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..pick {
        acc = match acc.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All compositions of n into k parts, ascending lexicographic order.
fn compositions(n: usize, k: usize) -> Vec<CountVector> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<CountVector>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(CountVector::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(remaining - v, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

// ---------------------------------------------------------------------------
// joint PMF
// ---------------------------------------------------------------------------

/// P(X = x): one term per category that could have been the first draw.
///
/// Conditioning on the first draw being category i forces `x_i >= 1`, so
/// terms with `x_i = 0` contribute nothing and are skipped.
pub fn pmf(model: &ModelParams, n: usize, x: &CountVector) -> Result<f64> {
    check_length(n)?;
    check_counts(model, n, x)?;
    let k = model.num_categories();
    let p = model.probs();
    let direct = n <= DIRECT_FACTORIAL_MAX_N;

    let mut total = 0.0;
    for i in 0..k {
        if x.counts()[i] == 0 {
            continue;
        }
        let up = model.upweighted(i + 1)?;
        let term = if direct {
            let mut denom = factorial_u64(x.counts()[i] - 1);
            for (j, &xj) in x.counts().iter().enumerate() {
                if j != i {
                    denom *= factorial_u64(xj);
                }
            }
            let coeff = (factorial_u64(n - 1) / denom) as f64;
            let mut t = p[i] * coeff * pow_or_zero(up, x.counts()[i] - 1);
            for (j, &xj) in x.counts().iter().enumerate() {
                if j != i {
                    t *= pow_or_zero(model.downweighted(j + 1)?, xj);
                }
            }
            t
        } else {
            log_space_term(model, n, x, i)?
        };
        total += term;
    }
    Ok(total)
}

fn log_space_term(model: &ModelParams, n: usize, x: &CountVector, i: usize) -> Result<f64> {
    use crate::special::ln_factorial;
    let p = model.probs();
    let up = model.upweighted(i + 1)?;
    let xi = x.counts()[i];
    if up == 0.0 && xi > 1 {
        return Ok(0.0);
    }
    let mut ln_term = p[i].ln() + ln_factorial((n - 1) as u64) - ln_factorial((xi - 1) as u64);
    if xi > 1 {
        ln_term += (xi - 1) as f64 * up.ln();
    }
    for (j, &xj) in x.counts().iter().enumerate() {
        if j == i {
            continue;
        }
        ln_term -= ln_factorial(xj as u64);
        if xj > 0 {
            let down = model.downweighted(j + 1)?;
            if down == 0.0 {
                return Ok(0.0);
            }
            ln_term += xj as f64 * down.ln();
        }
    }
    Ok(ln_term.exp())
}

/// P(X = x) in exact rational arithmetic.
pub fn pmf_exact(model: &ModelParams, n: usize, x: &CountVector) -> Result<BigRational> {
    check_length(n)?;
    check_counts(model, n, x)?;
    let k = model.num_categories();
    let p = model.probs_exact();

    let mut total = BigRational::zero();
    for i in 0..k {
        let xi = x.counts()[i];
        if xi == 0 {
            continue;
        }
        let mut denom = big_factorial(xi - 1);
        for (j, &xj) in x.counts().iter().enumerate() {
            if j != i {
                denom *= big_factorial(xj);
            }
        }
        let coeff = big_factorial(n - 1) / denom;
        let mut term = &p[i] * BigRational::from_integer(coeff.into());
        term *= rational::pow(&model.upweighted_exact(i + 1)?, (xi - 1) as u64);
        for (j, &xj) in x.counts().iter().enumerate() {
            if j != i {
                term *= rational::pow(&model.downweighted_exact(j + 1)?, xj as u64);
            }
        }
        total += term;
    }
    Ok(total)
}

/// Full composition table in ascending lexicographic count order.
pub fn pmf_table(model: &ModelParams, n: usize) -> Result<Vec<(CountVector, f64)>> {
    pmf_table_with_cap(model, n, DEFAULT_TABLE_CAP)
}

pub fn pmf_table_with_cap(
    model: &ModelParams,
    n: usize,
    cap: u128,
) -> Result<Vec<(CountVector, f64)>> {
    check_length(n)?;
    let k = model.num_categories();
    let size = composition_count(n, k);
    if size > cap {
        return Err(Error::TableTooLarge { size, cap });
    }
    compositions(n, k)
        .into_iter()
        .map(|x| {
            let prob = pmf(model, n, &x)?;
            Ok((x, prob))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// univariate marginal
// ---------------------------------------------------------------------------

/// P(X_i = k): two-term closed form after collapsing the non-focal
/// categories. Uses the pairing the enumeration oracle confirms: the
/// p_i-led term carries the damped rest mass, the rest-led term the boosted
/// one. The k = 0 first term and k = n second term vanish through their
/// binomial coefficients.
pub fn marginal_pmf(model: &ModelParams, n: usize, i: usize, k: usize) -> Result<f64> {
    check_length(n)?;
    let mp = model.marginal_params(i)?;
    if k > n {
        return Err(Error::CountOutOfRange {
            count: k as u64,
            max: n as u64,
        });
    }
    let p_i = model.probs()[i - 1];
    let up = model.upweighted(i)?;
    let down = model.downweighted(i)?;

    let mut total = 0.0;
    if k >= 1 {
        total += p_i
            * binomial_f64(n - 1, k - 1)
            * pow_or_zero(up, k - 1)
            * pow_or_zero(mp.rest_down(), n - k);
    }
    if k < n {
        total += mp.rest()
            * binomial_f64(n - 1, k)
            * pow_or_zero(down, k)
            * pow_or_zero(mp.rest_up(), n - 1 - k);
    }
    Ok(total)
}

/// Exact-rational version of [`marginal_pmf`].
pub fn marginal_pmf_exact(
    model: &ModelParams,
    n: usize,
    i: usize,
    k: usize,
) -> Result<BigRational> {
    marginal_two_term_exact(model, n, i, k, false)
}

/// The alternate printed pairing (boosted/damped rest masses swapped between
/// the two terms). Only the errata report evaluates it; enumeration shows it
/// deviates, so it is not part of the public surface.
pub(crate) fn marginal_pmf_statement_exact(
    model: &ModelParams,
    n: usize,
    i: usize,
    k: usize,
) -> Result<BigRational> {
    marginal_two_term_exact(model, n, i, k, true)
}

fn marginal_two_term_exact(
    model: &ModelParams,
    n: usize,
    i: usize,
    k: usize,
    swap_rest: bool,
) -> Result<BigRational> {
    check_length(n)?;
    let mp = model.marginal_params(i)?;
    if k > n {
        return Err(Error::CountOutOfRange {
            count: k as u64,
            max: n as u64,
        });
    }
    let p_i = &model.probs_exact()[i - 1];
    let up = model.upweighted_exact(i)?;
    let down = model.downweighted_exact(i)?;
    let (first_rest, second_rest) = if swap_rest {
        (mp.rest_up_exact(), mp.rest_down_exact())
    } else {
        (mp.rest_down_exact(), mp.rest_up_exact())
    };

    let mut total = BigRational::zero();
    if k >= 1 {
        total += p_i
            * BigRational::from_integer(big_binomial(n - 1, k - 1).into())
            * rational::pow(&up, (k - 1) as u64)
            * rational::pow(first_rest, (n - k) as u64);
    }
    if k < n {
        total += mp.rest_exact()
            * BigRational::from_integer(big_binomial(n - 1, k).into())
            * rational::pow(&down, k as u64)
            * rational::pow(second_rest, (n - 1 - k) as u64);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// moment generating function
// ---------------------------------------------------------------------------

/// M_X(t) = sum_i p_i e^{t_i} (up_i e^{t_i} + sum_{j != i} down_j e^{t_j})^{n-1}.
pub fn mgf(model: &ModelParams, n: usize, t: &[f64]) -> Result<f64> {
    check_length(n)?;
    let k = model.num_categories();
    if t.len() != k {
        return Err(Error::OutOfRange {
            what: "mgf argument length",
            value: t.len() as f64,
            bounds: "exactly K entries",
        });
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let p = model.probs();
    let exps: Vec<f64> = t.iter().map(|x| x.exp()).collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut inner = model.upweighted(i + 1)? * exps[i];
        for j in 0..k {
            if j != i {
                inner += model.downweighted(j + 1)? * exps[j];
            }
        }
        total += p[i] * exps[i] * inner.powi((n - 1) as i32);
    }
    if !total.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

/// E[X] = n * p, independent of delta.
pub fn mean(model: &ModelParams, n: usize) -> Vec<f64> {
    model.probs().iter().map(|&p| n as f64 * p).collect()
}

pub fn mean_exact(model: &ModelParams, n: usize) -> Vec<BigRational> {
    let n = BigRational::from_integer((n as u64).into());
    model.probs_exact().iter().map(|p| p * &n).collect()
}

/// Position-pair coefficient of the verified covariance:
/// n + 2*delta*(n-1) + delta^2*(n-1)*(n-2), from one same-position pair
/// weight, 2(n-1) pairs involving the first position, and (n-1)(n-2)
/// ordered later-position pairs.
fn verified_coefficient_exact(model: &ModelParams, n: usize) -> BigRational {
    let d = model.delta_exact();
    let n_r = BigRational::from_integer((n as u64).into());
    let nm1 = &n_r - BigRational::one();
    let nm2 = &n_r - rational::ratio(2, 1);
    &n_r + rational::ratio(2, 1) * d * &nm1 + d * d * &nm1 * &nm2
}

/// Printed diagonal coefficient: n + delta*(n-1) + delta^2*(n-1)*(n-2).
fn printed_diag_coefficient_exact(model: &ModelParams, n: usize) -> BigRational {
    let d = model.delta_exact();
    let n_r = BigRational::from_integer((n as u64).into());
    let nm1 = &n_r - BigRational::one();
    let nm2 = &n_r - rational::ratio(2, 1);
    &n_r + d * &nm1 + d * d * &nm1 * &nm2
}

/// Covariance matrix of the counts, in the selected formula variant.
pub fn covariance_exact(
    model: &ModelParams,
    n: usize,
    source: FormulaSource,
) -> Vec<Vec<BigRational>> {
    let k = model.num_categories();
    let p = model.probs_exact();
    let one = BigRational::one();
    let mut out = vec![vec![BigRational::zero(); k]; k];
    match source {
        FormulaSource::OracleVerified => {
            let c = verified_coefficient_exact(model, n);
            for i in 0..k {
                for j in 0..k {
                    out[i][j] = if i == j {
                        &p[i] * (&one - &p[i]) * &c
                    } else {
                        -(&p[i] * &p[j] * &c)
                    };
                }
            }
        }
        FormulaSource::Printed => {
            let diag = printed_diag_coefficient_exact(model, n);
            let d = model.delta_exact();
            let n_r = BigRational::from_integer((n as u64).into());
            let nm1 = &n_r - &one;
            let nm2 = &n_r - rational::ratio(2, 1);
            let off = d * (&one - d) * &nm2 * &nm1 - &n_r;
            for i in 0..k {
                for j in 0..k {
                    out[i][j] = if i == j {
                        &p[i] * (&one - &p[i]) * &diag
                    } else {
                        &p[i] * &p[j] * &off
                    };
                }
            }
        }
    }
    out
}

pub fn covariance(model: &ModelParams, n: usize, source: FormulaSource) -> Vec<Vec<f64>> {
    covariance_exact(model, n, source)
        .iter()
        .map(|row| row.iter().map(rational::to_f64).collect())
        .collect()
}

/// Correlation derived from the selected covariance; unit diagonal.
pub fn correlation(model: &ModelParams, n: usize, source: FormulaSource) -> Result<Vec<Vec<f64>>> {
    let cov = covariance(model, n, source);
    let k = cov.len();
    for (i, row) in cov.iter().enumerate() {
        if row[i] <= 0.0 {
            return Err(Error::DegenerateVariance {
                index: i + 1,
                value: row[i],
            });
        }
    }
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = if i == j {
                1.0
            } else {
                cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()
            };
        }
    }
    Ok(out)
}

pub fn moment_summary(
    model: &ModelParams,
    n: usize,
    source: FormulaSource,
) -> Result<MomentSummary> {
    Ok(MomentSummary {
        mean: mean(model, n),
        covariance: covariance(model, n, source),
        correlation: correlation(model, n, source)?,
        formula_source: source,
    })
}

// ---------------------------------------------------------------------------
// cross-covariance between two positions
// ---------------------------------------------------------------------------

/// Covariance between the indicator vectors of two positions: weight delta
/// when the earlier position is the first draw, delta^2 otherwise.
pub fn cross_covariance_exact(
    model: &ModelParams,
    earlier: usize,
    later: usize,
) -> Result<Vec<Vec<BigRational>>> {
    if earlier < 1 || earlier >= later {
        return Err(Error::BadPositions {
            first: earlier,
            second: later,
        });
    }
    let d = model.delta_exact();
    let factor = if earlier == 1 { d.clone() } else { d * d };
    let p = model.probs_exact();
    let one = BigRational::one();
    let k = p.len();
    let mut out = vec![vec![BigRational::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = if i == j {
                &factor * &p[i] * (&one - &p[i])
            } else {
                -(&factor * &p[i] * &p[j])
            };
        }
    }
    Ok(out)
}

pub fn cross_covariance(
    model: &ModelParams,
    earlier: usize,
    later: usize,
) -> Result<CrossCovarianceMatrix> {
    let entries = cross_covariance_exact(model, earlier, later)?
        .iter()
        .map(|row| row.iter().map(rational::to_f64).collect())
        .collect();
    Ok(CrossCovarianceMatrix {
        earlier,
        later,
        entries,
    })
}
