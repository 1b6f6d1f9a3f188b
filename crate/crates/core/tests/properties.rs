use std::collections::HashSet;

use chrono::{Datelike, NaiveDate};
use proptest::prelude::*;

use dwmoe::data::{self, DriftSpec, PriceRow, RawSeries, Regime};
use dwmoe::ensemble::{dynamic_recompute, grow_ensemble, score_sample, ScoreMode};
use dwmoe::expert::train_mcmc;
use dwmoe::metrics::{direction_accuracy, nse_error};
use dwmoe::partition::Axis;
use dwmoe::{
    Ensemble, GrowthConfig, MlpExpert, Partition, Sample, Scheme, ScoreHistory, ScoreRecord, TrainConfig, WeightTable,
    WeightingConfig,
};

fn expert_strategy(inputs: usize) -> impl Strategy<Value = MlpExpert> {
    (1usize..4).prop_flat_map(move |h| {
        (
            prop::collection::vec(-5.0..5.0f64, (inputs + 1) * h),
            prop::collection::vec(-5.0..5.0f64, h + 1),
        )
            .prop_map(move |(w_ih, w_ho)| MlpExpert::from_weights(inputs, h, w_ih, w_ho).unwrap())
    })
}

fn partition_strategy(inputs: usize) -> impl Strategy<Value = Partition> {
    prop::sample::subsequence((0..inputs).collect::<Vec<_>>(), 0..=inputs.min(2)).prop_flat_map(|features| {
        prop::collection::vec(-0.5..0.5f64, features.len()).prop_map(move |thr| {
            Partition::new(
                features
                    .iter()
                    .zip(thr)
                    .map(|(&feature, threshold)| Axis { feature, threshold })
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn samples_strategy(inputs: usize, max: usize) -> impl Strategy<Value = Vec<Sample>> {
    prop::collection::vec(
        (prop::collection::vec(-0.2..0.2f64, inputs), -0.2..0.2f64).prop_map(|(x, t)| Sample::new(x, t)),
        1..max,
    )
}

fn history_strategy(experts: usize, regions: usize, window: usize) -> impl Strategy<Value = ScoreHistory> {
    prop::collection::vec(
        (0..regions, prop::collection::vec(prop::bool::ANY, experts)),
        0..=window + 3,
    )
    .prop_map(move |records| {
        let mut h = ScoreHistory::new(window);
        for (region, correct) in records {
            h.push(ScoreRecord {
                region,
                multipliers: correct.iter().map(|&c| if c { 1.2 } else { 0.4 }).collect(),
            });
        }
        h
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn price_reconstruction_round_trips(
        first in prop::collection::vec(1.0..1000.0f64, 2),
        steps in prop::collection::vec(prop::collection::vec(-0.3..0.3f64, 2), 1..40),
    ) {
        let start = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
        let mut prices = vec![first.clone()];
        for s in &steps {
            let last = prices.last().unwrap();
            prices.push(last.iter().zip(s).map(|(p, r)| p * (1.0 + r)).collect());
        }
        let series = RawSeries {
            feature_names: vec!["a".into(), "b".into()],
            rows: prices
                .iter()
                .enumerate()
                .map(|(i, v)| PriceRow { date: start + chrono::Duration::weeks(i as i64), values: v.clone() })
                .collect(),
        };
        let m = data::to_percent_changes(&series).unwrap();
        let rebuilt = data::reconstruct_prices(&first, &m);
        prop_assert_eq!(rebuilt.len(), prices.len());
        for (r, p) in rebuilt.iter().flatten().zip(prices.iter().flatten()) {
            prop_assert!((r - p).abs() <= 1e-9 * p.abs());
        }
    }

    #[test]
    fn weekly_average_has_one_row_per_iso_week(offsets in prop::collection::btree_set(0i64..400, 1..60)) {
        let start = NaiveDate::from_ymd_opt(2019, 12, 20).unwrap();
        let dates: Vec<NaiveDate> = offsets.iter().map(|&d| start + chrono::Duration::days(d)).collect();
        let series = RawSeries {
            feature_names: vec!["p".into()],
            rows: dates.iter().map(|&date| PriceRow { date, values: vec![100.0] }).collect(),
        };
        let weeks: HashSet<_> = dates.iter().map(|d| (d.iso_week().year(), d.iso_week().week())).collect();
        prop_assert_eq!(data::weekly_average(&series).unwrap().rows.len(), weeks.len());
    }

    #[test]
    fn generators_are_pure_and_drift_targets_bounded(seed in any::<u64>(), c in -8.0..8.0f64) {
        prop_assert_eq!(data::gen_crescents(20, 0.1, seed).unwrap(), data::gen_crescents(20, 0.1, seed).unwrap());
        let spec = DriftSpec {
            n_weeks: 30,
            regimes: vec![
                Regime { length: 15, coeffs: vec![c, 1.0], noise_sd: 0.05 },
                Regime { length: 15, coeffs: vec![-c, 0.0], noise_sd: 0.05 },
            ],
            seed,
            ar_coeff: 0.5,
            feature_sd: 0.1,
            min_signal: 0.0,
            feature_names: None,
        };
        let (m1, t1) = data::gen_drifting_series(&spec).unwrap();
        let (m2, t2) = data::gen_drifting_series(&spec).unwrap();
        prop_assert_eq!(&m1, &m2);
        prop_assert_eq!(&t1, &t2);
        prop_assert!(t1.iter().all(|t| (-0.2..=0.2).contains(t)));
    }

    #[test]
    fn forward_stays_inside_output_range(e in expert_strategy(3), x in prop::collection::vec(-1.0..1.0f64, 3)) {
        let y = e.forward(&x);
        prop_assert!(y > -0.2 && y < 0.2, "{}", y);
    }

    #[test]
    fn training_never_raises_mse(
        e in expert_strategy(2),
        samples in samples_strategy(2, 12),
        epochs in 0usize..8,
        seed in any::<u64>(),
        temperature in prop::option::of(1e-4..1e-2f64),
    ) {
        let cfg = TrainConfig { epochs, seed, temperature, ..TrainConfig::default() };
        let a = train_mcmc(&e, &samples, &cfg).unwrap();
        prop_assert!(a.mse(&samples) <= e.mse(&samples));
        prop_assert_eq!(a, train_mcmc(&e, &samples, &cfg).unwrap());
    }

    #[test]
    fn every_point_has_one_region(p in partition_strategy(4), x in prop::collection::vec(-1.0..1.0f64, 4)) {
        prop_assert!(p.region_of(&x) < p.region_count());
    }

    #[test]
    fn region_ignores_unnamed_features(
        p in partition_strategy(4),
        x in prop::collection::vec(-1.0..1.0f64, 4),
        noise in prop::collection::vec(-5.0..5.0f64, 4),
    ) {
        let named: HashSet<usize> = p.axes().iter().map(|a| a.feature).collect();
        let y: Vec<f64> = x.iter().zip(&noise).enumerate()
            .map(|(i, (v, n))| if named.contains(&i) { *v } else { v + n })
            .collect();
        prop_assert_eq!(p.region_of(&x), p.region_of(&y));
    }

    #[test]
    fn medians_of_symmetric_data_sit_at_the_centre(
        c in -10.0..10.0f64,
        half in prop::collection::vec(0.0..5.0f64, 1..20),
        odd in any::<bool>(),
    ) {
        let mut pts: Vec<Vec<f64>> = half.iter().flat_map(|d| [vec![c + d], vec![c - d]]).collect();
        if odd {
            pts.push(vec![c]);
        }
        let thr = Partition::from_medians(&pts, &[0]).unwrap().axes()[0].threshold;
        prop_assert!((thr - c).abs() < 1e-9);
    }

    #[test]
    fn combine_is_a_scale_invariant_convex_combination(
        experts in prop::collection::vec(expert_strategy(3), 1..5),
        p in partition_strategy(3),
        x in prop::collection::vec(-1.0..1.0f64, 3),
        raw in prop::collection::vec(0.01..10.0f64, 20),
        c in 0.001..1000.0f64,
    ) {
        let (k, r) = (experts.len(), p.region_count());
        let weights = WeightTable::from_row_major(k, r, raw[..k * r].to_vec()).unwrap();
        let ens = Ensemble::new(experts, p, Scheme::Static, WeightingConfig::default())
            .unwrap()
            .with_weights(weights.clone())
            .unwrap();
        let outs = ens.expert_outputs(&x);
        let y = ens.combine(&x);
        let lo = outs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = outs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= y && y <= hi);

        let region = ens.partition().region_of(&x);
        let mut scaled = weights;
        for e in 0..k {
            scaled.set(e, region, scaled.get(e, region) * c);
        }
        let y2 = ens.clone().with_weights(scaled).unwrap().combine(&x);
        prop_assert!((y - y2).abs() <= 1e-12 * y.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn weights_stay_positive(h in history_strategy(3, 4, 10), lambda in 0.05..0.95f64) {
        let w = dynamic_recompute(&h, lambda, 3, 4);
        prop_assert!(w.as_row_major().iter().all(|&v| v > 0.0 && v.is_finite()));
        let mut s = WeightTable::ones(3, 4);
        for rec in h.iter() {
            s.static_train_update(rec).unwrap();
        }
        prop_assert!(s.as_row_major().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn untouched_region_decays_to_one(
        h in history_strategy(2, 4, 6),
        others in prop::collection::vec((1usize..4, prop::collection::vec(prop::bool::ANY, 2)), 6),
    ) {
        let mut h = h;
        for (region, correct) in others {
            h.push(ScoreRecord { region, multipliers: correct.iter().map(|&c| if c { 1.2 } else { 0.4 }).collect() });
        }
        let w = dynamic_recompute(&h, 0.7, 2, 4);
        prop_assert_eq!(w.get(0, 0), 1.0);
        prop_assert_eq!(w.get(1, 0), 1.0);
    }

    #[test]
    fn multipliers_are_binary(outs in prop::collection::vec(-0.2..0.2f64, 1..6), t in -0.2..0.2f64) {
        for mode in [ScoreMode::Regression, ScoreMode::Classification] {
            prop_assert!(score_sample(&outs, t, mode).iter().all(|&m| m == 1.2 || m == 0.4));
        }
    }

    #[test]
    fn naive_forecast_scores_one(targets in prop::collection::vec(
        prop_oneof![-0.2..-1e-9f64, 1e-9..0.2f64], 1..50)
    ) {
        prop_assert_eq!(nse_error(&vec![0.0; targets.len()], &targets).unwrap(), 1.0);
    }

    #[test]
    fn nse_is_non_negative_and_zero_only_on_equality(
        pairs in prop::collection::vec((-0.2..0.2f64, -0.2..0.2f64), 1..30),
    ) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let e = nse_error(&p, &t).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert_eq!(e == 0.0, p == t);
        prop_assert_eq!(nse_error(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn direction_accuracy_is_a_scale_free_fraction(
        pairs in prop::collection::vec((-0.2..0.2f64, -0.2..0.2f64), 1..30),
        c in 0.01..100.0f64,
    ) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let a = direction_accuracy(&p, &t).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        // keep clear of the zero-target band so scaling cannot cross it
        if t.iter().all(|v| v.abs() > 1e-3) && p.iter().all(|v| v.abs() > 0.01 || *v == 0.0) {
            let ps: Vec<f64> = p.iter().map(|v| v * c).collect();
            let ts: Vec<f64> = t.iter().map(|v| v * c).collect();
            prop_assert_eq!(direction_accuracy(&ps, &ts).unwrap(), a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn growth_trace_never_rises(seed in any::<u64>(), samples in samples_strategy(2, 40)) {
        prop_assume!(samples.len() >= 5);
        let gcfg = GrowthConfig {
            seed,
            seed_epochs: 2,
            candidate_epochs: 2,
            subset_len: 4,
            max_iters: 10,
            ..GrowthConfig::default()
        };
        let out = grow_ensemble(&samples, &Partition::whole(), &gcfg, &TrainConfig::default(), WeightingConfig::default())
            .unwrap();
        prop_assert!(out.error_trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(out.error_trace.len(), out.ensemble.len());
    }
}
