//! Property tests for the model invariants.

use fairdice::carbon::{step_carbon, CarbonParams, CarbonState};
use fairdice::climate::{co2_forcing, discretize, effective_f2x, step_temperature, EbmParams, TemperatureState};
use fairdice::ensemble::{fit_skew_normal, resample, rmse_filter, Series};
use fairdice::optimize::{maximize, Bounds, FnObjective, OptimizerConfig};
use fairdice::sim::zero_crossing_year;
use fairdice::stats::percentile;
use proptest::prelude::*;

fn ebm_params() -> impl Strategy<Value = EbmParams> {
    (
        (0.6f64..2.0, 1.0f64..4.0, 0.4f64..1.2),
        (4.0f64..12.0, 10.0f64..40.0, 50.0f64..200.0),
        0.8f64..1.8,
        3.0f64..4.5,
    )
        .prop_map(|((k1, k2, k3), (c1, c2, c3), efficacy, f2x)| EbmParams {
            kappa: [k1, k2, k3],
            heat_capacity: [c1, c2, c3],
            efficacy,
            gamma_autocorr: 3.0,
            f2x,
            dt: 1.0,
        })
}

fn warming_series(offset: f64, noise: &[f64]) -> Series {
    let years: Vec<f64> = (0..noise.len()).map(|i| 1850.0 + i as f64).collect();
    let values = years
        .iter()
        .zip(noise)
        .map(|(y, n)| offset + 0.008 * (y - 1850.0) + n)
        .collect();
    Series::new(years, values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_ebm_is_stable_and_a_semigroup(p in ebm_params(), f in -2.0f64..8.0) {
        let d1 = discretize(&p).unwrap();
        let d3 = discretize(&p.with_dt(3.0)).unwrap();
        prop_assert!(d1.spectral_radius() < 1.0);
        let start = TemperatureState::new([1.0, 0.5, 0.1]);
        let one = step_temperature(&start, &d3, f);
        let mut three = start;
        for _ in 0..3 {
            three = step_temperature(&three, &d1, f);
        }
        for k in 0..3 {
            prop_assert!((one.layers[k] - three.layers[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_forcing_settles_at_equilibrium(p in ebm_params(), f in 0.5f64..8.0) {
        let d = discretize(&p.with_dt(50.0)).unwrap();
        let mut s = TemperatureState::default();
        for _ in 0..400 {
            s = step_temperature(&s, &d, f);
        }
        prop_assert!((s.surface() - f / p.kappa[0]).abs() < 1e-6 * f / p.kappa[0]);
    }

    #[test]
    fn forcing_round_trip(c in 100.0f64..2000.0, c_ref in 270.0f64..290.0, f2x in 3.0f64..4.5) {
        prop_assume!((c / c_ref).ln().abs() > 1e-3);
        let f = co2_forcing(c, c_ref, f2x).unwrap();
        prop_assert!((effective_f2x(f, c, c_ref).unwrap() - f2x).abs() < 1e-12 * f2x.max(1.0) * 10.0);
        prop_assert_eq!(f > 0.0, c > c_ref);
    }

    #[test]
    fn carbon_pools_stay_non_negative(
        pools in proptest::array::uniform4(0.0f64..500.0),
        emissions in 0.0f64..80.0,
        alpha in 0.05f64..20.0,
        dt in 0.5f64..5.0,
    ) {
        let p = CarbonParams::default();
        let s = CarbonState::new(pools, 1000.0);
        let next = step_carbon(&s, &p, emissions, alpha, dt);
        prop_assert!(next.pools.iter().all(|r| *r >= 0.0));
        prop_assert!((next.cumulative_emissions - 1000.0 - emissions * dt).abs() < 1e-9);
        // without emissions every pool decays
        let decayed = step_carbon(&s, &p, 0.0, alpha, dt);
        for (a, b) in decayed.pools.iter().zip(&pools) {
            prop_assert!(*a <= *b);
        }
    }

    #[test]
    fn skew_normal_fit_round_trips(p5 in -5.0f64..5.0, width in 0.1f64..10.0, ratio in 0.33f64..0.67) {
        let (p50, p95) = (p5 + ratio * width, p5 + width);
        let sn = fit_skew_normal(p5, p50, p95).unwrap();
        for (q, v) in [(0.05, p5), (0.5, p50), (0.95, p95)] {
            prop_assert!((sn.quantile(q) - v).abs() <= 1e-6 * width.max(1.0));
        }
    }

    #[test]
    fn rmse_filter_keeps_a_subset(
        offsets in proptest::collection::vec(-0.5f64..0.5, 1..20),
        noise in proptest::collection::vec(-0.1f64..0.1, 60..=60),
        threshold in 0.0f64..0.2,
    ) {
        let obs = warming_series(0.0, &noise);
        // even members copy the observations, odd ones are shifted and rescaled
        let sims: Vec<Series> = offsets
            .iter()
            .enumerate()
            .map(|(i, o)| {
                if i % 2 == 0 {
                    return obs.clone();
                }
                let scaled: Vec<f64> = noise.iter().map(|n| n * (1.0 + o)).collect();
                warming_series(*o, &scaled)
            })
            .collect();
        let kept = rmse_filter(&sims, &obs, threshold).unwrap();
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(kept.iter().all(|i| *i < sims.len()));
        let at_zero = rmse_filter(&sims, &obs, 0.0).unwrap();
        for i in (0..sims.len()).step_by(2) {
            prop_assert!(at_zero.contains(&i));
            prop_assert!(kept.contains(&i));
        }
        prop_assert!(at_zero.iter().all(|i| kept.contains(i)));
        // a pure offset vanishes after re-baselining
        let shifted = warming_series(0.3, &noise);
        prop_assert!(rmse_filter(&[shifted], &obs, 1e-12).unwrap() == vec![0]);
    }

    #[test]
    fn resample_returns_distinct_members_deterministically(
        weights in proptest::collection::vec(0.0f64..1.0, 10..200),
        frac in 0.05f64..0.5,
        seed in any::<u64>(),
    ) {
        let positive = weights.iter().filter(|w| **w > 0.0).count();
        let n_out = ((weights.len() as f64 * frac) as usize).clamp(1, positive);
        let key: Vec<f64> = (0..weights.len()).map(|i| ((i * 37) % 101) as f64).collect();
        let a = resample(&weights, n_out, &key, false, seed).unwrap();
        prop_assert_eq!(a.len(), n_out);
        prop_assert!(a.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(a.iter().all(|i| weights[*i] > 0.0));
        prop_assert_eq!(&a, &resample(&weights, n_out, &key, false, seed).unwrap());
        let b = resample(&weights, n_out, &key, true, seed).unwrap();
        prop_assert_eq!(b.len(), n_out);
        prop_assert!(b.iter().all(|i| *i < weights.len() && weights[*i] > 0.0));
    }

    #[test]
    fn box_quadratic_optimum_and_monotone_ascent(
        centers in proptest::collection::vec(-3.0f64..3.0, 2..12),
        start in -1.0f64..1.0,
    ) {
        let n = centers.len();
        let f = |x: &[f64]| -> fairdice::Result<f64> {
            Ok(-1.0 - x.iter().zip(&centers).enumerate().map(|(i, (x, c))| (1.0 + i as f64) * (x - c).powi(2)).sum::<f64>())
        };
        let bounds = Bounds::new(vec![-1.0; n], vec![1.0; n]).unwrap();
        let cfg = OptimizerConfig { gradient_tolerance: 1e-8, central_differences: true, ..Default::default() };
        let res = maximize(&FnObjective(f), &bounds, &vec![start; n], &cfg).unwrap();
        prop_assert!(res.history.windows(2).all(|w| w[1].objective >= w[0].objective));
        prop_assert!(res.objective >= res.initial_objective);
        for (x, c) in res.x.iter().zip(&centers) {
            prop_assert!((x - c.clamp(-1.0, 1.0)).abs() < 1e-4, "{} vs {}", x, c);
        }
    }

    #[test]
    fn zero_crossing_lies_in_its_bracket(values in proptest::collection::vec(-10.0f64..10.0, 2..40)) {
        let years: Vec<f64> = (0..values.len()).map(|i| 2020.0 + 3.0 * i as f64).collect();
        match zero_crossing_year(&years, &values) {
            None => prop_assert!(values.iter().all(|v| *v > 0.0)),
            Some(y) => {
                let k = values.iter().position(|v| *v <= 0.0).unwrap();
                let lo = if k == 0 { years[0] } else { years[k - 1] };
                prop_assert!(y >= lo && y <= years[k]);
            }
        }
    }

    #[test]
    fn percentiles_are_monotone(values in proptest::collection::vec(-1e3f64..1e3, 1..50), q in 0.0f64..99.0) {
        let a = percentile(&values, q);
        let b = percentile(&values, q + 1.0);
        prop_assert!(a <= b);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(a >= lo && b <= hi);
    }
}
