//! Cross-module invariants: structural identities, the interval partition,
//! and agreement between the closed forms and exhaustive enumeration.

use dcrv::rational::ratio;
use dcrv::rng::SplitMix64;
use dcrv::{distribution, oracle, sampler};
use dcrv::{BigRational, CategorySequence, CountVector, ModelParams};
use num_traits::{One, Zero};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// strategies
// ---------------------------------------------------------------------------

/// Exact-rational model from integer weights, so invariants can be checked
/// with zero rounding.
fn rational_model() -> impl Strategy<Value = ModelParams> {
    (prop::collection::vec(1u32..1000, 2..=5), 0u32..=100).prop_map(|(weights, delta_percent)| {
        let total: i64 = weights.iter().map(|&w| w as i64).sum();
        let probs = weights
            .iter()
            .map(|&w| ratio(w as i64, total))
            .collect::<Vec<_>>();
        ModelParams::from_rationals(probs, ratio(delta_percent as i64, 100)).unwrap()
    })
}

fn float_model() -> impl Strategy<Value = ModelParams> {
    (prop::collection::vec(0.01f64..0.99, 2..=5), 0.0f64..=1.0).prop_map(|(raw, delta)| {
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        // shortest-decimal re-reading keeps the sum within default tolerance
        ModelParams::new(&probs, (delta * 100.0).round() / 100.0).unwrap()
    })
}

proptest! {
    #[test]
    fn identities_hold_for_every_model(model in rational_model()) {
        let report = model.check_identities();
        prop_assert!(report.all_hold());
        prop_assert!(report.conditional_sum_residual < 1e-14);
        prop_assert!(report.marginal_fixed_point_residual < 1e-14);
    }

    #[test]
    fn conditionals_sum_to_one_exactly(model in rational_model()) {
        for given in 1..=model.num_categories() {
            let cond = model.conditional(given).unwrap();
            let total: BigRational = cond.probs_exact().iter().sum();
            prop_assert_eq!(total, BigRational::one());
            let float_total: f64 = cond.probs().iter().sum();
            prop_assert!((float_total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_delta_conditionals_are_the_base_probs(weights in prop::collection::vec(1u32..1000, 2..=5)) {
        let total: i64 = weights.iter().map(|&w| w as i64).sum();
        let probs: Vec<BigRational> = weights.iter().map(|&w| ratio(w as i64, total)).collect();
        let model = ModelParams::from_rationals(probs.clone(), BigRational::zero()).unwrap();
        for given in 1..=model.num_categories() {
            let cond = model.conditional(given).unwrap();
            prop_assert_eq!(cond.probs_exact(), &probs[..]);
        }
    }

    #[test]
    fn full_delta_conditionals_are_indicators(model in rational_model()) {
        let full = ModelParams::from_rationals(
            model.probs_exact().to_vec(),
            BigRational::one(),
        )
        .unwrap();
        for given in 1..=full.num_categories() {
            let cond = full.conditional(given).unwrap();
            for (j, p) in cond.probs_exact().iter().enumerate() {
                let want = if j + 1 == given { BigRational::one() } else { BigRational::zero() };
                prop_assert_eq!(p.clone(), want);
            }
        }
    }

    #[test]
    fn lex_index_round_trips(k in 2usize..=5, n in 1usize..=6, raw in prop::collection::vec(0usize..5, 6)) {
        let entries: Vec<usize> = raw.iter().take(n).map(|&r| r % k + 1).collect();
        let seq = CategorySequence::new(entries);
        let index = sampler::lex_index(&seq, k).unwrap();
        prop_assert!((1..=(k as u128).pow(n as u32)).contains(&index));
        let back = sampler::lex_sequence(index, k, n).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn pmf_masses_sum_to_one_exactly(model in rational_model(), n in 1usize..=5) {
        // normalization of the closed-form joint PMF, in rational arithmetic
        let k = model.num_categories();
        let mut total = BigRational::zero();
        let mut stack = vec![(Vec::<usize>::new(), n)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() == k - 1 {
                let mut counts = prefix.clone();
                counts.push(left);
                total += distribution::pmf_exact(&model, n, &CountVector::new(counts)).unwrap();
                continue;
            }
            for take in 0..=left {
                let mut next = prefix.clone();
                next.push(take);
                stack.push((next, left - take));
            }
        }
        prop_assert_eq!(total, BigRational::one());
    }

    #[test]
    fn descent_width_equals_prefix_flow(model in float_model(), u in 0.0f64..1.0, n in 1usize..=8) {
        let (seq, widths) = sampler::sample_inverse_traced(&model, n, u).unwrap();
        for level in 1..=n {
            let prefix = CategorySequence::new(seq.entries()[..level].to_vec());
            let flow = sampler::sequence_probability(&model, &prefix).unwrap();
            prop_assert!((widths[level - 1] - flow).abs() < 1e-12,
                "level {} width {} flow {}", level, widths[level - 1], flow);
        }
    }

}

// ---------------------------------------------------------------------------
// deterministic sweeps
// ---------------------------------------------------------------------------

fn seeded_rational_model(rng: &mut SplitMix64, k: usize) -> ModelParams {
    let weights: Vec<i64> = (0..k).map(|_| (rng.next_u64() % 999 + 1) as i64).collect();
    let total: i64 = weights.iter().sum();
    let probs = weights.iter().map(|&w| ratio(w, total)).collect();
    let delta = ratio((rng.next_u64() % 101) as i64, 100);
    ModelParams::from_rationals(probs, delta).unwrap()
}

#[test]
fn identities_on_a_hundred_seeded_models() {
    let mut rng = SplitMix64::new(0xA11CE);
    for trial in 0..100 {
        let k = 2 + (rng.next_u64() % 4) as usize;
        let model = seeded_rational_model(&mut rng, k);
        let report = model.check_identities();
        assert!(report.all_hold(), "trial {trial}");
        assert!(report.conditional_sum_residual < 1e-14, "trial {trial}");
        assert!(
            report.marginal_fixed_point_residual < 1e-14,
            "trial {trial}"
        );
    }
}

#[test]
fn interval_partition_covers_unit_interval() {
    // all K^n intervals are contiguous, disjoint, and cover [0, 1)
    let mut rng = SplitMix64::new(0xBEEF);
    for k in [2usize, 3] {
        let model = seeded_rational_model(&mut rng, k);
        for n in 1..=6 {
            let mut cursor = BigRational::zero();
            for index in 1..=(k as u128).pow(n as u32) {
                let seq = sampler::lex_sequence(index, k, n).unwrap();
                let interval = sampler::sequence_interval(&model, &seq).unwrap();
                assert_eq!(interval.lo(), &cursor, "K={k} n={n} index={index}");
                assert_eq!(
                    interval.width(),
                    sampler::sequence_probability_exact(&model, &seq).unwrap()
                );
                cursor = interval.hi().clone();
            }
            assert_eq!(cursor, BigRational::one(), "K={k} n={n}");
        }
    }
}

#[test]
fn midpoint_sampling_recovers_every_sequence() {
    let model =
        ModelParams::from_rationals(vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)], ratio(1, 2))
            .unwrap();
    let skew = ModelParams::new(&[0.2, 0.3, 0.5], 0.4).unwrap();
    for model in [&model, &skew] {
        for n in 1..=4usize {
            for index in 1..=3u128.pow(n as u32) {
                let seq = sampler::lex_sequence(index, 3, n).unwrap();
                let interval = sampler::sequence_interval(model, &seq).unwrap();
                let midpoint =
                    dcrv::rational::to_f64(&((interval.lo() + interval.hi()) / ratio(2, 1)));
                let sampled = sampler::sample_inverse(model, n, midpoint).unwrap();
                assert_eq!(sampled, seq, "n={n} index={index}");
            }
        }
    }
}

#[test]
fn every_position_is_identically_distributed() {
    // sampler-level check: summing sequence probabilities by the entry at
    // one position recovers the base probabilities exactly
    let mut rng = SplitMix64::new(0x1DEA);
    for k in [2usize, 3] {
        let model = seeded_rational_model(&mut rng, k);
        let n = 5;
        for position in 1..=n {
            let mut by_category = vec![BigRational::zero(); k];
            for index in 1..=(k as u128).pow(n as u32) {
                let seq = sampler::lex_sequence(index, k, n).unwrap();
                let mass = sampler::sequence_probability_exact(&model, &seq).unwrap();
                by_category[seq.entries()[position - 1] - 1] += mass;
            }
            assert_eq!(
                by_category,
                model.probs_exact().to_vec(),
                "K={k} position={position}"
            );
        }
    }
}

#[test]
fn pushforward_of_sequence_masses_is_the_count_pmf() {
    let mut rng = SplitMix64::new(0xFACADE);
    for k in [2usize, 3] {
        let model = seeded_rational_model(&mut rng, k);
        for n in 1..=6 {
            let dist = oracle::ExactDistribution::enumerate(&model, n).unwrap();
            for (counts, mass) in dist.count_distribution() {
                let closed = distribution::pmf_exact(&model, n, &counts).unwrap();
                assert_eq!(closed, mass, "K={k} n={n} counts={:?}", counts.counts());
            }
        }
    }
}

#[test]
fn sequential_path_matches_the_inverse_cdf_distribution() {
    // both generation paths should pass a goodness-of-fit test against the
    // same closed-form table
    let model = ModelParams::new(&[0.2, 0.3, 0.5], 0.5).unwrap();
    let n = 3;
    let table = distribution::pmf_table(&model, n).unwrap();
    let samples = 20_000usize;
    for path in 0..2 {
        let draws = if path == 0 {
            sampler::sample_many(&model, n, samples, 2024).unwrap()
        } else {
            sampler::sample_sequential(&model, n, samples, 2024).unwrap()
        };
        let mut observed = vec![0u64; table.len()];
        for seq in &draws {
            let c = sampler::counts(seq, 3).unwrap();
            let idx = table.iter().position(|(x, _)| x == &c).unwrap();
            observed[idx] += 1;
        }
        let expected: Vec<f64> = table.iter().map(|&(_, p)| p).collect();
        let report =
            dcrv::montecarlo::chi_square_gof(&observed, &expected, samples as u64).unwrap();
        assert!(
            report.p_value > 1e-3,
            "path {path} rejected with {report:?}"
        );
    }
}

#[test]
fn empirical_frequency_tracks_sequence_probability() {
    // frequency of (3,2) across 100k draws sits within 3 standard errors
    let model =
        ModelParams::from_rationals(vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)], ratio(1, 2))
            .unwrap();
    let target = CategorySequence::new(vec![3, 2]);
    let prob = sampler::sequence_probability(&model, &target).unwrap();
    let total = 100_000;
    let hits = sampler::sample_many(&model, 2, total, 31337)
        .unwrap()
        .into_iter()
        .filter(|seq| seq == &target)
        .count();
    let freq = hits as f64 / total as f64;
    let se = (prob * (1.0 - prob) / total as f64).sqrt();
    assert!(
        (freq - prob).abs() < 3.0 * se,
        "freq {freq} prob {prob} se {se}"
    );
}
