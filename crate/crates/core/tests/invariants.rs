use nalgebra::{DMatrix, DVector};
use rand::RngExt;

use erlab::bounds::{
    bayes_risk_bound, cmi_sup_over_mean_ball, legendre_dual, legendre_dual_inverse, minimax_capacity_bound,
    posterior_sampling_bound, posterior_sampling_mi_bound, CumulantEnvelope, LossRegime, PriorFamily,
};
use erlab::game::{build_payoff, mean_ball_lattice, GameSpec, PayoffMode};
use erlab::linear::{cmi_y_given_xzn, effective_dim_bound_mc, generate, mi_w_zn, rls_predict, LinearModelSpec};
use erlab::prob::{gaussian_kl, sample, Gaussian, SeedSpec};
use erlab::rates::lemma2_residual;
use erlab::risk::{bayes_excess_risk_mc, compare_bayes_excess, run_posterior_sampling, GaussianPrior, LinearAlgorithm};
use erlab::vc::{blahut_arimoto, exact_bayes_excess, mutual_information, threshold_channel, BayesLearner, ThresholdClassSpec};

fn combined(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

#[test]
fn kl_nonnegative_on_random_pairs() {
    let mut rng = SeedSpec::new(40, 0).rng();
    for _ in 0..1000 {
        let d = rng.random_range(1..=8usize);
        let mut g = || {
            let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let m = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
            Gaussian::new(m, &a * a.transpose() + DMatrix::identity(d, d) * 0.05).unwrap()
        };
        let (p, q) = (g(), g());
        assert!(gaussian_kl(&p, &q).unwrap() >= 0.0);
        assert!(gaussian_kl(&p, &p).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn sampling_is_reproducible() {
    let g = Gaussian::new(DVector::from_vec(vec![1.0, -1.0]), DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
    let a = sample(&g, SeedSpec::new(3, 4), 100);
    assert_eq!(a, sample(&g, SeedSpec::new(3, 4), 100));
    assert_ne!(a, sample(&g, SeedSpec::new(3, 5), 100));
}

fn model(d: usize) -> LinearModelSpec {
    let mut mu = vec![0.0; d];
    mu[0] = 0.4;
    LinearModelSpec::identity_unit_box(d, 1.0, 0.7, mu, 1.0).unwrap()
}

#[test]
fn mutual_information_grows_with_n() {
    let spec = model(3);
    let ests: Vec<_> = [1usize, 4, 16, 64].iter().map(|&n| mi_w_zn(&spec, n, 4000, SeedSpec::new(41, n as u64)).unwrap()).collect();
    for w in ests.windows(2) {
        assert!(w[1].mean >= w[0].mean - 3.0 * combined(w[0].std_error, w[1].std_error));
    }
}

#[test]
fn information_inequalities() {
    for d in [1usize, 3] {
        let spec = model(d);
        for n in [2usize, 8, 32] {
            let mi = mi_w_zn(&spec, n, 4000, SeedSpec::new(42, n as u64)).unwrap();
            let cmi = cmi_y_given_xzn(&spec, n, 4000, SeedSpec::new(43, n as u64)).unwrap();
            let per = mi.mean / n as f64;
            assert!(cmi.mean <= per + 3.0 * combined(cmi.std_error, mi.std_error / n as f64), "d={d} n={n}");
            let eff = effective_dim_bound_mc(&spec, n, 4000, SeedSpec::new(42, n as u64)).unwrap();
            assert!(eff.mean >= mi.mean - 3.0 * combined(eff.std_error, mi.std_error), "d={d} n={n}");
        }
    }
}

#[test]
fn cmi_does_not_depend_on_prior_mean() {
    let spec = model(2);
    let (_, all) = cmi_sup_over_mean_ball(&spec, 8, 4000, SeedSpec::new(44, 0)).unwrap();
    for e in &all[1..] {
        assert!((e.mean - all[0].mean).abs() <= 3.0 * combined(e.std_error, all[0].std_error));
    }
}

#[test]
fn posterior_sampling_averages_to_rls() {
    let spec = model(2);
    let data = generate(&spec, &DVector::from_vec(vec![0.3, -0.5]), 10, SeedSpec::new(45, 0)).unwrap();
    let x = [0.4, 0.2];
    let p0 = spec.prior();
    let draws: Vec<f64> =
        (0..100_000).map(|i| run_posterior_sampling(&spec, &p0, &data, &x, SeedSpec::new(45, 1).child(i)).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt();
    let target = rls_predict(&spec, &data, &x);
    assert!((mean - target).abs() <= 3.0 * sd / (draws.len() as f64).sqrt());

    let tight = Gaussian::isotropic(DVector::from_vec(vec![0.2, 0.1]), 1e-20).unwrap();
    let v = run_posterior_sampling(&spec, &tight, &data, &x, SeedSpec::new(45, 2)).unwrap();
    assert!((v - (0.2 * 0.4 + 0.1 * 0.2)).abs() < 1e-8);
}

#[test]
fn rls_dominates_posterior_sampling_on_random_models() {
    let mut rng = SeedSpec::new(46, 0).rng();
    for i in 0..50 {
        let d = rng.random_range(1..=4usize);
        let sw = rng.random_range(0.3..2.0);
        let se = rng.random_range(0.3..2.0);
        let c = 1.0;
        let mut mu: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > c {
            mu.iter_mut().for_each(|v| *v *= c / norm);
        }
        let n = rng.random_range(1..=64usize);
        let spec = LinearModelSpec::identity_unit_box(d, sw, se, mu, c).unwrap();
        let prior = GaussianPrior::of_model(&spec);
        let cmp = compare_bayes_excess(
            &spec,
            &LinearAlgorithm::rls(prior.clone()),
            &LinearAlgorithm::posterior_sampling(prior.clone()),
            &prior,
            n,
            2000,
            SeedSpec::new(46, 1).child(i),
        )
        .unwrap();
        assert!(cmp.difference.mean >= -3.0 * cmp.difference.std_error, "config {i}");
        let bo = bayes_excess_risk_mc(&spec, &LinearAlgorithm::BayesOptimal { prior: prior.clone() }, &prior, n, 500, SeedSpec::new(46, 2).child(i))
            .unwrap();
        assert!(bo.mean >= -3.0 * bo.std_error);
    }
}

#[test]
fn risk_estimates_are_bitwise_reproducible_across_pools() {
    let spec = model(3);
    let prior = GaussianPrior::of_model(&spec);
    let alg = LinearAlgorithm::posterior_sampling(prior.clone());
    let run = || bayes_excess_risk_mc(&spec, &alg, &prior, 12, 3000, SeedSpec::new(47, 0)).unwrap();
    let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    let b = rayon::ThreadPoolBuilder::new().num_threads(5).build().unwrap().install(run);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}

#[test]
fn generalised_inverse_contract() {
    for (sw, se) in [(1.0, 1.0), (0.3, 2.0), (2.5, 0.2)] {
        let env = CumulantEnvelope::sub_exponential(sw, se).unwrap();
        for i in 0..=1000 {
            let g = 10.0 * i as f64 / 1000.0;
            let back = legendre_dual_inverse(&env, legendre_dual(&env, g));
            assert!(back >= g - 1e-8, "γ={g}: {back}");
        }
    }
}

#[test]
fn bounds_are_monotone_in_information() {
    let spec = model(2);
    let env = CumulantEnvelope::sub_exponential(spec.sigma_w, spec.sigma_e).unwrap();
    let fam = PriorFamily::for_model(&spec).unwrap();
    let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
    for regime in [LossRegime::Squared, LossRegime::Realizable, LossRegime::Bounded] {
        let vals: Vec<f64> = grid.iter().map(|&i| bayes_risk_bound(regime, 2.0, i).unwrap().value).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let caps: Vec<f64> = grid.iter().map(|&k| minimax_capacity_bound(regime, 2.0, k, 7).unwrap().value).collect();
        assert!(caps.windows(2).all(|w| w[0] <= w[1]));
        for &cmi in &grid {
            // κ_n = n·cmi routes the capacity bound onto the Bayes bound
            let a = bayes_risk_bound(regime, 2.0, cmi).unwrap().value;
            let b = minimax_capacity_bound(regime, 2.0, 7.0 * cmi, 7).unwrap().value;
            assert!((a - b).abs() <= 1e-15 * a.max(1.0));
        }
    }
    let ps: Vec<f64> = grid.iter().map(|&i| posterior_sampling_bound(&env, &fam, i, 10).unwrap().value).collect();
    assert!(ps.windows(2).all(|w| w[0] <= w[1]));
    let mi: Vec<f64> = grid.iter().map(|&i| posterior_sampling_mi_bound(&env, &fam, i, 10).unwrap().value).collect();
    assert!(mi.windows(2).all(|w| w[0] <= w[1]));
    assert!(mi.iter().chain(&ps).all(|v| v.is_finite() && *v >= 0.0));
}

#[test]
fn linear_payoff_entries_are_nonnegative() {
    let spec = model(2);
    let prior = GaussianPrior::of_model(&spec);
    let algs = vec![
        ("rls".to_string(), LinearAlgorithm::rls(prior.clone())),
        ("ps".to_string(), LinearAlgorithm::posterior_sampling(prior.clone())),
    ];
    let ws = mean_ball_lattice(2, 1.0, 3).unwrap();
    let m = build_payoff(
        &GameSpec::Linear { spec: &spec, n: 6, algs: &algs, ws: &ws },
        PayoffMode::MonteCarlo { reps: 500, seed: SeedSpec::new(48, 0) },
    )
    .unwrap();
    for (v, s) in m.values.iter().zip(m.std_errors.iter()) {
        assert!(v.is_finite() && *v >= -3.0 * s);
    }
}

#[test]
fn threshold_learner_ordering_and_capacity_prior() {
    for k in 1..=4 {
        let spec = ThresholdClassSpec::uniform(k);
        for n in 1..=4 {
            let bo = exact_bayes_excess(&spec, n, BayesLearner::BayesOptimal).unwrap();
            let ps = exact_bayes_excess(&spec, n, BayesLearner::PosteriorSampling).unwrap();
            assert!(bo <= ps + 1e-12);
            let ch = threshold_channel(&spec, n).unwrap();
            let ba = blahut_arimoto(&ch, 1e-9).unwrap();
            let plugged = mutual_information(&ch, &ba.prior).unwrap();
            assert!(ba.kappa - plugged <= 1e-9);
            assert!(mutual_information(&ch, &spec.prior_t).unwrap() <= ba.kappa + 1e-12);
        }
    }
}

#[test]
fn residual_decreases_strictly() {
    let ns: Vec<usize> = (1..=200).collect();
    let r = lemma2_residual(1.0, 1.0, &ns).unwrap();
    assert!(r.iter().all(|v| *v > 0.0));
    assert!(r.windows(2).all(|w| w[1] < w[0]));
}
