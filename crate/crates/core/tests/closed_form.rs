use ultradiffusion::dynamics::{integrate_master_equation, numeric_spectrum, ProbabilityVector};
use ultradiffusion::fitting::{sample_events, sampling_cdf, UltradiffusionParams};
use ultradiffusion::generator::build_generator;
use ultradiffusion::spectral::{
    autocorrelation_chain, chain_spectrum, survival_probability, tree_autocorrelation, TreeModel,
};
use ultradiffusion::ultrametric::uniform_chain;

#[test]
fn five_state_chain_at_unit_time() {
    // (4/5) exp(-5 e^{-1.2}) + 1/5, evaluated by hand.
    let want = 0.3774414451668274;
    let spec = chain_spectrum(5, 0.3).unwrap();
    assert!((autocorrelation_chain(&spec, 5, 1.0).unwrap() - want).abs() < 1e-14);
    assert!((survival_probability(5, 0.3, 1.0).unwrap() - want).abs() < 1e-14);

    let g = build_generator(&uniform_chain(5).unwrap(), 0.3).unwrap();
    let p0 = ProbabilityVector::characteristic(5, 4).unwrap();
    let traj = integrate_master_equation(&g, &p0, &[0.0, 1.0]).unwrap();
    assert!((traj[1].get(4) - want).abs() < 1e-6);
}

#[test]
fn balanced_binary_tree_matches_master_equation() {
    let tree = TreeModel::balanced(2, 3, 1.0).unwrap();
    let space = tree.induced_space().unwrap();
    let g = build_generator(&space, 1.0).unwrap();
    let leaf = tree.leaves()[0];

    // Rates out of the 2-, 4- and 8-leaf subtrees, by hand.
    let e = f64::exp;
    let g1 = 2.0 * e(-1.0) + 2.0 * e(-2.0) + 4.0 * e(-3.0);
    let g2 = 4.0 * e(-2.0) + 4.0 * e(-3.0);
    let g3 = 8.0 * e(-3.0);
    let by_hand = |t: f64| 0.125 + 0.5 * e(-g1 * t) + 0.25 * e(-g2 * t) + 0.125 * e(-g3 * t);
    assert!((by_hand(1.5) - 0.35806708235815066).abs() < 1e-15);

    let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let p0 = ProbabilityVector::characteristic(space.len(), 0).unwrap();
    let traj = integrate_master_equation(&g, &p0, &grid).unwrap();
    for (p, &t) in traj.iter().zip(&grid) {
        let closed = tree_autocorrelation(&tree, leaf, t).unwrap();
        assert!((closed - by_hand(t)).abs() < 1e-13, "t = {t}");
        assert!((p.get(0) - closed).abs() < 1e-6, "t = {t}: {} vs {closed}", p.get(0));
    }
}

#[test]
fn tree_rates_are_generator_eigenvalues() {
    let tree = TreeModel::balanced(3, 2, 0.7).unwrap();
    let g = build_generator(&tree.induced_space().unwrap(), 1.0).unwrap();
    let numeric = numeric_spectrum(&g).unwrap();
    let terms = ultradiffusion::spectral::tree_relaxation_terms(&tree, tree.leaves()[0]).unwrap();
    for gamma in &terms.gammas {
        let closest = numeric
            .eigenvalues
            .iter()
            .map(|l| (l + gamma).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-12, "rate {gamma} not in spectrum");
    }
}

#[test]
fn star_closed_form() {
    let (n, h) = (6usize, 0.4);
    let tree = TreeModel::star(n, h).unwrap();
    let rate = n as f64 * (-h).exp();
    for t in [0.0, 0.3, 1.0, 4.0] {
        let want = 1.0 / n as f64 + (1.0 - 1.0 / n as f64) * (-rate * t).exp();
        assert!((tree_autocorrelation(&tree, 0, t).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn sampler_follows_model_cdf() {
    let p = UltradiffusionParams::new(50, 0.2, 10_000).unwrap();
    let horizon = p.default_horizon();
    let trace = sample_events(&p, "ks", horizon, 7).unwrap();
    let n = trace.len() as f64;
    let mut ks: f64 = 0.0;
    for (k, &t) in trace.events().iter().enumerate() {
        let f = sampling_cdf(&p, horizon, t);
        ks = ks.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs());
    }
    assert!(ks < 0.02, "KS statistic {ks}");
}

#[test]
fn synthetic_fit_recovers_decay_rate() {
    let p = UltradiffusionParams::new(50, 0.2, 10_000).unwrap();
    let trace = sample_events(&p, "rate", p.default_horizon(), 3).unwrap();
    let curve = ultradiffusion::trace::empirical_curve(&trace, 200).unwrap();
    let fit = ultradiffusion::fitting::fit_exponential(&curve, false).unwrap();
    assert!((fit.h2 / p.decay_rate() - 1.0).abs() < 0.02, "{} vs {}", fit.h2, p.decay_rate());
    // Normalizing by the observed count lifts the amplitude to 1 / (1 - e^{-5}).
    assert!((fit.h1 - 1.0 / (1.0 - (-5.0f64).exp())).abs() < 0.01, "{}", fit.h1);
}
