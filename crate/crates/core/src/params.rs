//! Model parameterization and the conditional probabilities it induces.
//!
//! A model is a strictly interior probability vector over `K >= 2` categories
//! together with a dependency coefficient `delta` in [0, 1]. Every draw after
//! the first conditions on the first draw only: the first draw's category is
//! weighted up by `delta` and all other categories are weighted down
//! proportionally. `delta = 0` recovers full independence, `delta = 1` makes
//! every later draw a copy of the first.
//!
//! Every quantity here is kept in two forms: an exact rational (so the
//! enumeration oracle and the identity checks run without rounding noise) and
//! an f64 mirror derived from it (for sampling and reporting).

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational;

/// Default tolerance on |sum(p) - 1| accepted before renormalization.
pub const DEFAULT_SUM_TOLERANCE: f64 = 1e-9;

/// Validated model: category probabilities plus the dependency coefficient.
///
/// Probabilities are renormalized at construction so they sum to exactly 1
/// in rational form; the f64 views are derived from the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    probs: Vec<BigRational>,
    delta: BigRational,
    probs_f64: Vec<f64>,
    delta_f64: f64,
    // f64 views of the conditional weights, cached so the float paths never
    // touch rational arithmetic
    up_f64: Vec<f64>,
    down_f64: Vec<f64>,
}

impl ModelParams {
    /// Builds a model from float inputs at the default sum tolerance.
    ///
    /// Each float is read through its shortest decimal representation, so
    /// `0.2` enters as exactly 2/10.
    pub fn new(p: &[f64], delta: f64) -> Result<Self> {
        Self::with_tolerance(p, delta, DEFAULT_SUM_TOLERANCE)
    }

    /// Builds a model from float inputs with an explicit sum tolerance.
    pub fn with_tolerance(p: &[f64], delta: f64, tolerance: f64) -> Result<Self> {
        if tolerance <= 0.0 || tolerance.is_nan() {
            return Err(Error::OutOfRange {
                what: "tolerance",
                value: tolerance,
                bounds: "(0, inf)",
            });
        }
        let probs = p
            .iter()
            .map(|&x| rational::from_f64_repr(x))
            .collect::<Result<Vec<_>>>()?;
        let delta = rational::from_f64_repr(delta)?;
        Self::from_rationals_with_tolerance(probs, delta, tolerance)
    }

    /// Builds a model from exact rationals at the default sum tolerance.
    pub fn from_rationals(p: Vec<BigRational>, delta: BigRational) -> Result<Self> {
        Self::from_rationals_with_tolerance(p, delta, DEFAULT_SUM_TOLERANCE)
    }

    /// Exact-input constructor behind all the others.
    pub fn from_rationals_with_tolerance(
        p: Vec<BigRational>,
        delta: BigRational,
        tolerance: f64,
    ) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::TooFewCategories { found: p.len() });
        }
        let one = BigRational::one();
        for entry in &p {
            if *entry <= BigRational::zero() || *entry >= one {
                return Err(Error::OutOfRange {
                    what: "probability entry",
                    value: rational::to_f64(entry),
                    bounds: "(0, 1)",
                });
            }
        }
        if delta < BigRational::zero() || delta > one {
            return Err(Error::OutOfRange {
                what: "delta",
                value: rational::to_f64(&delta),
                bounds: "[0, 1]",
            });
        }
        let sum: BigRational = p.iter().sum();
        let drift = rational::to_f64(&(&sum - &one));
        if drift.abs() > tolerance {
            return Err(Error::SumNotOne {
                sum: rational::to_f64(&sum),
                tolerance,
            });
        }
        let probs: Vec<BigRational> = p.into_iter().map(|x| x / &sum).collect();
        let probs_f64: Vec<f64> = probs.iter().map(rational::to_f64).collect();
        let delta_f64 = rational::to_f64(&delta);
        let up_f64 = probs
            .iter()
            .map(|p| rational::to_f64(&(p + &delta * (BigRational::one() - p))))
            .collect();
        let down_f64 = probs
            .iter()
            .map(|p| rational::to_f64(&((BigRational::one() - &delta) * p)))
            .collect();
        Ok(Self {
            probs,
            delta,
            probs_f64,
            delta_f64,
            up_f64,
            down_f64,
        })
    }

    pub fn num_categories(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs_f64
    }

    pub fn probs_exact(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn delta(&self) -> f64 {
        self.delta_f64
    }

    pub fn delta_exact(&self) -> &BigRational {
        &self.delta
    }

    /// Maps a 1-based category label to the internal index.
    pub(crate) fn category_index(&self, label: usize) -> Result<usize> {
        if label == 0 || label > self.probs.len() {
            return Err(Error::IndexOutOfRange {
                index: label,
                categories: self.probs.len(),
            });
        }
        Ok(label - 1)
    }

    /// Conditional probability of drawing `i` again given the first draw was
    /// `i`: `p_i + delta * (1 - p_i)`. 1-based label.
    pub fn upweighted_exact(&self, i: usize) -> Result<BigRational> {
        let idx = self.category_index(i)?;
        let p = &self.probs[idx];
        Ok(p + &self.delta * (BigRational::one() - p))
    }

    /// Conditional probability of drawing `i` given the first draw was some
    /// other category: `(1 - delta) * p_i`. 1-based label.
    pub fn downweighted_exact(&self, i: usize) -> Result<BigRational> {
        let idx = self.category_index(i)?;
        Ok((BigRational::one() - &self.delta) * &self.probs[idx])
    }

    pub fn upweighted(&self, i: usize) -> Result<f64> {
        let idx = self.category_index(i)?;
        Ok(self.up_f64[idx])
    }

    pub fn downweighted(&self, i: usize) -> Result<f64> {
        let idx = self.category_index(i)?;
        Ok(self.down_f64[idx])
    }

    /// Cached f64 conditional vector given the first draw (0-based index),
    /// for the hot sampling paths.
    pub(crate) fn conditional_floats(&self, given_idx: usize) -> Vec<f64> {
        let mut out = self.down_f64.clone();
        out[given_idx] = self.up_f64[given_idx];
        out
    }

    /// Probability vector for every draw after the first, conditioned on the
    /// first draw's category.
    pub fn conditional(&self, given: usize) -> Result<ConditionalDistribution> {
        let idx = self.category_index(given)?;
        let mut probs_exact = Vec::with_capacity(self.probs.len());
        for (j, _) in self.probs.iter().enumerate() {
            if j == idx {
                probs_exact.push(self.upweighted_exact(given)?);
            } else {
                probs_exact.push(self.downweighted_exact(j + 1)?);
            }
        }
        Ok(ConditionalDistribution {
            given,
            probs: self.conditional_floats(idx),
            probs_exact,
        })
    }

    /// Two-category collapse (focal category against the combined rest) used
    /// by the univariate marginal.
    pub fn marginal_params(&self, i: usize) -> Result<MarginalParams> {
        let idx = self.category_index(i)?;
        let rest = BigRational::one() - &self.probs[idx];
        let rest_up = &rest + &self.delta * &self.probs[idx];
        let rest_down = (BigRational::one() - &self.delta) * &rest;
        Ok(MarginalParams {
            focal: i,
            rest,
            rest_up,
            rest_down,
        })
    }

    /// Verifies the two structural identities the conditional probabilities
    /// must satisfy, exactly in rational arithmetic and with f64 residuals.
    ///
    /// For every category i:
    /// (a) the conditional vector given i sums to 1;
    /// (b) one dependent step preserves the marginal:
    ///     `p_i * up_i + down_i * sum_{l != i} p_l = p_i`.
    pub fn check_identities(&self) -> IdentityReport {
        let k = self.num_categories();
        let one = BigRational::one();
        let mut sum_holds = true;
        let mut fixed_point_holds = true;
        let mut sum_residual = 0.0f64;
        let mut fixed_point_residual = 0.0f64;

        for i in 1..=k {
            let up = self.upweighted_exact(i).expect("valid index");
            let mut rest_down = BigRational::zero();
            let mut rest_mass = BigRational::zero();
            for l in 1..=k {
                if l != i {
                    rest_down += self.downweighted_exact(l).expect("valid index");
                    rest_mass += &self.probs[l - 1];
                }
            }
            if &up + &rest_down != one {
                sum_holds = false;
            }
            let p_i = &self.probs[i - 1];
            let down_i = self.downweighted_exact(i).expect("valid index");
            if p_i * &up + &down_i * &rest_mass != *p_i {
                fixed_point_holds = false;
            }

            // Independent float evaluation of both sides.
            let up_f = self.upweighted(i).expect("valid index");
            let mut rest_down_f = 0.0;
            let mut rest_mass_f = 0.0;
            for l in 1..=k {
                if l != i {
                    rest_down_f += self.downweighted(l).expect("valid index");
                    rest_mass_f += self.probs_f64[l - 1];
                }
            }
            let p_i_f = self.probs_f64[i - 1];
            let down_i_f = self.downweighted(i).expect("valid index");
            sum_residual = sum_residual.max((up_f + rest_down_f - 1.0).abs());
            fixed_point_residual =
                fixed_point_residual.max((p_i_f * up_f + down_i_f * rest_mass_f - p_i_f).abs());
        }

        IdentityReport {
            conditional_sum_holds: sum_holds,
            conditional_sum_residual: sum_residual,
            marginal_fixed_point_holds: fixed_point_holds,
            marginal_fixed_point_residual: fixed_point_residual,
        }
    }
}

/// The altered probability vector for draws 2..n given the first draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    given: usize,
    probs: Vec<f64>,
    probs_exact: Vec<BigRational>,
}

impl ConditionalDistribution {
    /// 1-based category the distribution conditions on.
    pub fn given(&self) -> usize {
        self.given
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probs_exact(&self) -> &[BigRational] {
        &self.probs_exact
    }
}

/// Collapsed two-category view: focal category i against everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalParams {
    focal: usize,
    rest: BigRational,
    rest_up: BigRational,
    rest_down: BigRational,
}

impl MarginalParams {
    pub fn focal(&self) -> usize {
        self.focal
    }

    /// Combined mass of the non-focal categories, `1 - p_focal`.
    pub fn rest(&self) -> f64 {
        rational::to_f64(&self.rest)
    }

    /// Rest mass when the first draw missed the focal category.
    pub fn rest_up(&self) -> f64 {
        rational::to_f64(&self.rest_up)
    }

    /// Rest mass when the first draw hit the focal category.
    pub fn rest_down(&self) -> f64 {
        rational::to_f64(&self.rest_down)
    }

    pub fn rest_exact(&self) -> &BigRational {
        &self.rest
    }

    pub fn rest_up_exact(&self) -> &BigRational {
        &self.rest_up
    }

    pub fn rest_down_exact(&self) -> &BigRational {
        &self.rest_down
    }
}

/// Outcome of [`ModelParams::check_identities`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub conditional_sum_holds: bool,
    pub conditional_sum_residual: f64,
    pub marginal_fixed_point_holds: bool,
    pub marginal_fixed_point_residual: f64,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.conditional_sum_holds && self.marginal_fixed_point_holds
    }
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
    fn accepts_the_worked_model() {
        let m = uniform_third_half();
        assert_eq!(m.num_categories(), 3);
        assert_eq!(m.delta_exact(), &ratio(1, 2));
    }

    #[test]
    fn accepts_independent_binary() {
        let m = ModelParams::new(&[0.5, 0.5], 0.0).unwrap();
        assert_eq!(m.num_categories(), 2);
        assert_eq!(m.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_sum() {
        let err = ModelParams::new(&[0.7, 0.4], 0.2).unwrap_err();
        assert_eq!(err.code(), "SumNotOne");
    }

    #[test]
    fn rejects_boundary_probabilities_and_delta() {
        assert_eq!(
            ModelParams::new(&[1.0, 0.0], 0.5).unwrap_err().code(),
            "OutOfRange"
        );
        assert_eq!(
            ModelParams::new(&[0.5, 0.5], 1.5).unwrap_err().code(),
            "OutOfRange"
        );
        assert_eq!(
            ModelParams::new(&[0.5, 0.5], -0.1).unwrap_err().code(),
            "OutOfRange"
        );
    }

    #[test]
    fn rejects_single_category() {
        assert_eq!(
            ModelParams::new(&[1.0], 0.0).unwrap_err().code(),
            "TooFewCategories"
        );
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let m = ModelParams::with_tolerance(&[0.3333, 0.3333, 0.3333], 0.5, 1e-3).unwrap();
        let total: BigRational = m.probs_exact().iter().sum();
        assert_eq!(total, ratio(1, 1));
        for p in m.probs_exact() {
            assert_eq!(p, &ratio(1, 3));
        }
    }

    #[test]
    fn conditional_matches_worked_example() {
        // given = 3: up = 1/3 + (1/2)(2/3) = 2/3, others (1/2)(1/3) = 1/6
        let m = uniform_third_half();
        let cond = m.conditional(3).unwrap();
        assert_eq!(cond.probs_exact(), &[ratio(1, 6), ratio(1, 6), ratio(2, 3)]);
        assert_eq!(cond.given(), 3);
    }

    #[test]
    fn conditional_is_identity_at_zero_delta() {
        let m = ModelParams::new(&[0.2, 0.5, 0.3], 0.0).unwrap();
        for i in 1..=3 {
            let cond = m.conditional(i).unwrap();
            assert_eq!(cond.probs_exact(), m.probs_exact());
        }
    }

    #[test]
    fn conditional_is_indicator_at_full_delta() {
        let m = ModelParams::new(&[0.2, 0.5, 0.3], 1.0).unwrap();
        let cond = m.conditional(2).unwrap();
        assert_eq!(cond.probs_exact(), &[ratio(0, 1), ratio(1, 1), ratio(0, 1)]);
    }

    #[test]
    fn conditional_rejects_bad_label() {
        let m = uniform_third_half();
        assert_eq!(m.conditional(0).unwrap_err().code(), "IndexOutOfRange");
        assert_eq!(m.conditional(4).unwrap_err().code(), "IndexOutOfRange");
    }

    #[test]
    fn identities_hold_exactly() {
        let report = uniform_third_half().check_identities();
        assert!(report.all_hold());
        assert_eq!(report.conditional_sum_residual, 0.0);
        assert_eq!(report.marginal_fixed_point_residual, 0.0);
    }

    #[test]
    fn identities_hold_at_zero_delta() {
        let report = ModelParams::new(&[0.2, 0.3, 0.5], 0.0)
            .unwrap()
            .check_identities();
        assert!(report.all_hold());
    }

    #[test]
    fn marginal_params_pairings() {
        // up_i + rest_down = 1 and down_i + rest_up = 1, for every i.
        let m = ModelParams::new(&[0.2, 0.3, 0.5], 0.4).unwrap();
        let one = ratio(1, 1);
        for i in 1..=3 {
            let mp = m.marginal_params(i).unwrap();
            assert_eq!(m.upweighted_exact(i).unwrap() + mp.rest_down_exact(), one);
            assert_eq!(m.downweighted_exact(i).unwrap() + mp.rest_up_exact(), one);
        }
    }
}
