//! Monte-Carlo oracles for the asymptotic covariance formulas: simulate the
//! estimators many times and compare the scaled sample variances against the
//! plug-in matrices, and cross-check the two independent variance routes for
//! the edge density.

use noisynet::bootstrap::{bootstrap_v1, joint_covariance, solve_gamma, sample_dagger, s_dagger};
use noisynet::graph::{edge_density, sample_noisy, AdjacencyMatrix, NoiseModel};
use noisynet::moments::{
    cov_all_unknown, estimate_all_unknown, estimate_alpha_known, EstimationMode, MomentTriple,
};
use noisynet::pattern::SubgraphPattern;
use noisynet::stats::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bernoulli_graph(p: usize, density: f64, seed: u64) -> AdjacencyMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.gen::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(p, &edges).unwrap()
}

#[test]
fn sigma2_delta_variance_matches_monte_carlo() {
    // N * Var(delta_hat) against the (3,3) entry of the plug-in covariance,
    // within 15% over 2000 synthetic 3-replicate draws at p = 200.
    let (alpha, beta) = (0.05, 0.15);
    let a = bernoulli_graph(200, 0.2, 1);
    let delta = edge_density(&a);
    let noise = NoiseModel::new(alpha, beta).unwrap();
    let n_pairs = a.n_pairs() as f64;
    let reps = 2000;
    let mut deltas = Vec::with_capacity(reps);
    for r in 0..reps {
        let seed = derive_seed(7, r as u64);
        let y = sample_noisy(&a, &noise, derive_seed(seed, 0));
        let ys = sample_noisy(&a, &noise, derive_seed(seed, 1));
        let yss = sample_noisy(&a, &noise, derive_seed(seed, 2));
        let m = MomentTriple::from_replicates(&[&y, &ys, &yss]).unwrap();
        let est = estimate_all_unknown(&m, 0.2, 1e-8, 500, 0.95).unwrap();
        deltas.push(est.delta);
    }
    let mean = deltas.iter().sum::<f64>() / reps as f64;
    let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (reps - 1) as f64;
    let mc = n_pairs * var;
    let theory = cov_all_unknown(alpha, beta, delta).unwrap()[(2, 2)];
    let rel = (mc - theory).abs() / theory;
    assert!(
        rel < 0.15,
        "MC N*Var(delta_hat) = {mc}, plug-in = {theory} (rel {rel:.3})"
    );
}

#[test]
fn edge_pattern_variance_routes_agree() {
    // The corrected edge density equals the moment delta-hat exactly, so the
    // assembled V1+V2+V3 for the edge pattern and the 3x3 plug-in covariance
    // are two routes to the same asymptotic variance; they agree within 10%
    // at p = 200.
    let (alpha, beta) = (0.05, 0.15);
    let a = bernoulli_graph(200, 0.2, 31);
    let noise = NoiseModel::new(alpha, beta).unwrap();
    let y = sample_noisy(&a, &noise, 11);
    let ys = sample_noisy(&a, &noise, 12);
    let yss = sample_noisy(&a, &noise, 13);
    let m = MomentTriple::from_replicates(&[&y, &ys, &yss]).unwrap();
    let est = estimate_all_unknown(&m, 0.2, 1e-10, 500, 0.95).unwrap();

    // the algebra closes: (u1 - alpha_hat)/kappa3_hat = delta_hat
    let c_edge = noisynet::pattern::c_hat(&y, &SubgraphPattern::edge(), est.alpha, est.beta)
        .unwrap()
        .c_hat;
    assert!((c_edge - est.delta).abs() < 1e-12);

    let patterns = [SubgraphPattern::edge()];
    let vp = joint_covariance(
        &y,
        &patterns,
        est.alpha,
        est.beta,
        est.delta,
        EstimationMode::BothUnknown,
        4000,
        5,
    )
    .unwrap();
    let route_b = vp.v_total[(0, 0)];
    let route_a = est.cov[(2, 2)];
    let rel = (route_b.sqrt() - route_a.sqrt()).abs() / route_a.sqrt();
    assert!(
        rel < 0.10,
        "assembled sd {} vs plug-in sd {} (rel {rel:.3})",
        route_b.sqrt(),
        route_a.sqrt()
    );
}

#[test]
fn edge_bootstrap_variance_matches_analytic_form() {
    // For the edge pattern the asymptotic variance has the closed form
    // (delta kappa3 kappa4 + kappa1) / kappa3^2 with the realized density of
    // A; the bootstrap estimate at known rates lands within 10% at p = 200.
    let (alpha, beta) = (0.05, 0.15);
    let a = bernoulli_graph(200, 0.1, 9);
    let noise = NoiseModel::new(alpha, beta).unwrap();
    let y = sample_noisy(&a, &noise, 21);
    let v1 = bootstrap_v1(&y, &[SubgraphPattern::edge()], alpha, beta, 500, 77).unwrap();
    let k1 = alpha * (1.0 - alpha);
    let k3 = 1.0 - alpha - beta;
    let k4 = beta - alpha;
    let delta = edge_density(&a);
    let analytic = (delta * k3 * k4 + k1) / (k3 * k3);
    let rel = (v1[(0, 0)] - analytic).abs() / analytic;
    assert!(
        rel < 0.10,
        "bootstrap {} vs analytic {analytic} (rel {rel:.3})",
        v1[(0, 0)]
    );
}

#[test]
fn s_dagger_variance_at_edge_is_conditional_variance() {
    // Var(S_edge^dag | Y) is exactly mean(Y (beta-alpha) + alpha(1-beta))
    // over pairs divided by kappa3^2; a long bootstrap run converges to it.
    let (alpha, beta) = (0.08, 0.2);
    let a = bernoulli_graph(60, 0.25, 3);
    let noise = NoiseModel::new(alpha, beta).unwrap();
    let y = sample_noisy(&a, &noise, 5);
    let g = solve_gamma(alpha, beta).unwrap();
    let pat = SubgraphPattern::edge();
    let reps = 30_000;
    let mut vals = Vec::with_capacity(reps);
    for r in 0..reps {
        let yd = sample_dagger(&y, &g, derive_seed(123, r as u64));
        vals.push(s_dagger(&y, &yd, &pat, alpha, beta, &g).unwrap());
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let k3 = 1.0 - alpha - beta;
    let exact = (edge_density(&y) * (beta - alpha) + alpha * (1.0 - beta)) / (k3 * k3);
    let rel = (var - exact).abs() / exact;
    assert!(rel < 0.05, "bootstrap var {var} vs exact {exact}");
}

#[test]
fn known_alpha_mode_mae_scales_with_theory() {
    // 300 two-replicate draws at p = 200: the observed MAE of delta-hat
    // stays within 30% of the half-normal value implied by the plug-in
    // asymptotic variance.
    let (alpha, beta) = (0.05, 0.05);
    let a = bernoulli_graph(200, 0.1, 17);
    let delta = edge_density(&a);
    let noise = NoiseModel::new(alpha, beta).unwrap();
    let n_pairs = a.n_pairs() as f64;
    let reps = 300;
    let mut err_sum = 0.0;
    for r in 0..reps {
        let seed = derive_seed(99, r as u64);
        let y = sample_noisy(&a, &noise, derive_seed(seed, 0));
        let ys = sample_noisy(&a, &noise, derive_seed(seed, 1));
        let m = MomentTriple::from_replicates(&[&y, &ys]).unwrap();
        let est = estimate_alpha_known(alpha, &m, 0.95).unwrap();
        err_sum += (est.delta - delta).abs();
    }
    let mae = err_sum / reps as f64;
    let sigma = (noisynet::moments::cov_known_alpha(alpha, beta, delta).unwrap()[(1, 1)]
        / n_pairs)
        .sqrt();
    let predicted = sigma * (2.0 / std::f64::consts::PI).sqrt();
    let rel = (mae - predicted).abs() / predicted;
    assert!(rel < 0.3, "MAE {mae} vs predicted {predicted}");
}
