use proptest::prelude::*;
use ultradiffusion::baselines::{power_law_curve, PowerLawModel};
use ultradiffusion::fitting::{
    fit_exponential_points, infer_params, sample_events, simulate_curve, simulate_values,
    MappingMode, Prefactor, UltradiffusionParams,
};
use ultradiffusion::generator::{build_generator, check_rate_ultrametricity};
use ultradiffusion::trace::{
    aggregate_mean, empirical_curve, parse_trace_reader, traces_to_csv, uniform_grid, EventTrace,
};
use ultradiffusion::ultrametric::{build_from_trace, verify_ultrametric};

fn trace_strategy() -> impl Strategy<Value = EventTrace> {
    (1.0f64..1e5, prop::collection::vec(0.0f64..=1.0, 1..120)).prop_map(|(horizon, fr)| {
        let events = fr.into_iter().map(|f| f * horizon).collect();
        EventTrace::new("s", events, horizon).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_spaces_are_ultrametric(trace in trace_strategy()) {
        let space = build_from_trace(&trace);
        prop_assert!(verify_ultrametric(&space).passed());
        let labels = space.labels();
        prop_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(space.multiplicity().iter().sum::<usize>(), trace.len() + 1);
    }

    #[test]
    fn distances_are_later_original_times(trace in trace_strategy()) {
        let space = build_from_trace(&trace);
        let t = space.horizon();
        for i in 0..space.len() {
            for j in 0..space.len() {
                if i != j {
                    let want = t - space.labels()[i].min(space.labels()[j]);
                    prop_assert!((space.distance(i, j) - want).abs() <= 1e-9 * t);
                }
            }
        }
    }

    #[test]
    fn generator_conserves_probability(trace in trace_strategy(), mu in 0.0f64..3.0) {
        let space = build_from_trace(&trace).rescaled();
        let g = build_generator(&space, mu).unwrap();
        let r = g.rates();
        for i in 0..g.n() {
            prop_assert!(r.row(i).sum().abs() <= 1e-12 * g.max_abs().max(1.0));
            prop_assert_eq!(r[(i, i)] <= 0.0, true);
        }
        prop_assert!(check_rate_ultrametricity(&g).is_ok());
    }

    #[test]
    fn csv_round_trip(traces in prop::collection::vec(trace_strategy(), 1..5)) {
        let renamed: Vec<EventTrace> = traces
            .iter()
            .enumerate()
            .map(|(k, t)| EventTrace::new(format!("story{k}"), t.events().to_vec(), t.horizon()).unwrap())
            .collect();
        let csv = traces_to_csv(&renamed);
        let back = parse_trace_reader(csv.as_bytes(), None).unwrap();
        prop_assert_eq!(back.len(), renamed.len());
        for (a, b) in back.iter().zip(&renamed) {
            prop_assert_eq!(a.story_id(), b.story_id());
            prop_assert_eq!(a.events(), b.events());
        }
    }

    #[test]
    fn empirical_curve_is_a_cdf(trace in trace_strategy(), n in 2usize..300) {
        let c = empirical_curve(&trace, n).unwrap();
        prop_assert!(c.values().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert_eq!(*c.values().last().unwrap(), 1.0);
    }

    #[test]
    fn aggregate_ignores_order(traces in prop::collection::vec(trace_strategy(), 2..8), seed in any::<u64>()) {
        let curves: Vec<_> = traces.iter().map(|t| empirical_curve(t, 50).unwrap()).collect();
        let mut shuffled = curves.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = aggregate_mean(&curves, 64).unwrap();
        let b = aggregate_mean(&shuffled, 64).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert_eq!(a.saturation_count(), traces.iter().map(|t| t.len() as u64).sum::<u64>());
    }

    #[test]
    fn model_curve_is_monotone_and_bounded(t_n in 2usize..300, mu in 0.0f64..0.5) {
        let p = UltradiffusionParams::new(t_n, mu, 1).unwrap();
        let grid = uniform_grid(p.default_horizon() * 2.0, 100);
        let v = simulate_values(&p, &grid, Prefactor::Consistent);
        let cap = (t_n as f64 - 1.0) / t_n as f64;
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(v.iter().all(|&x| (0.0..=cap + 1e-15).contains(&x)));
    }

    #[test]
    fn fit_inverts_model_curve(t_n in 2usize..400, mu in 0.005f64..1.0) {
        let p = UltradiffusionParams::new(t_n, mu, 100).unwrap();
        prop_assume!(p.decay_rate() > 1e-200);
        let grid = uniform_grid(p.default_horizon(), 120);
        let curve = simulate_curve(&p, &grid, Prefactor::Consistent).unwrap();
        let fit = ultradiffusion::fitting::fit_exponential(&curve, false).unwrap();
        let back = infer_params(&fit, 100, MappingMode::Roundtrip).unwrap();
        prop_assert_eq!(back.t_n, t_n);
        prop_assert!((back.mu - mu).abs() <= 1e-6 * mu.max(1.0));
    }

    #[test]
    fn fit_scales_with_data(a in 0.1f64..5.0, rate in 0.01f64..10.0, sy in 0.01f64..100.0, st in 0.01f64..100.0) {
        let t: Vec<f64> = uniform_grid(5.0 / rate, 80);
        let y: Vec<f64> = t.iter().map(|&x| a * -(-rate * x).exp_m1()).collect();
        let base = fit_exponential_points(&t, &y, false).unwrap();
        let ts: Vec<f64> = t.iter().map(|x| x * st).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * sy).collect();
        let scaled = fit_exponential_points(&ts, &ys, false).unwrap();
        prop_assert!((scaled.h1 / (base.h1 * sy) - 1.0).abs() < 1e-6);
        prop_assert!((scaled.h2 / (base.h2 / st) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sampled_events_lie_in_window(t_n in 2usize..100, mu in 0.0f64..0.3, m in 1u64..500, seed in any::<u64>()) {
        let p = UltradiffusionParams::new(t_n, mu, m).unwrap();
        let h = p.default_horizon();
        let a = sample_events(&p, "x", h, seed).unwrap();
        let b = sample_events(&p, "x", h, seed).unwrap();
        prop_assert_eq!(a.events(), b.events());
        prop_assert_eq!(a.len() as u64, m);
        prop_assert!(a.events().iter().all(|&t| t > 0.0 && t <= h));
    }

    #[test]
    fn power_law_series_decreases(b in 2u32..5, extra in 0.05f64..2.0, t in 1.0f64..1e4) {
        let dh = (b as f64).ln() + extra;
        let m = PowerLawModel::new(b, dh).unwrap();
        let p1 = power_law_curve(&m, t, 80).unwrap();
        let p2 = power_law_curve(&m, t * 1.5, 80).unwrap();
        prop_assert!(p2.series < p1.series);
        prop_assert!(m.exponent() > 0.0);
    }
}
