//! Variance-matching bootstrap and joint confidence intervals for subgraph
//! densities.
//!
//! The asymptotic variance of a corrected density estimate depends on the
//! unknown entries of `A`, so it cannot be evaluated directly. Instead,
//! resamples `Y^dag` are drawn from the observed `Y` with keep/set-one/
//! set-zero probabilities `(gamma1, gamma2, 1-gamma1-gamma2)` chosen so that
//! `E{Var(Y^dag | Y)} = Var(Y)`:
//!
//! ```text
//! gamma1 (1 - gamma1 - 2 gamma2) = beta - alpha
//! gamma2 (1 - gamma2)            = alpha (1 - beta)
//! ```
//!
//! The conditional distribution of the linearized statistic `S^dag` given
//! `Y` then approximates the sampling distribution of
//! `sqrt(N) (C_tilde - C)`, and its sample covariance over `B` resamples
//! estimates the leading block `V_1` of the joint covariance
//! `V = V_1 + V_2 + V_3`, whose remaining blocks come from plug-in
//! matrices `Delta`, `G`, `Sigma` and `h`.

use crate::dense::SqMat;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::moments::{
    jacobian_inv_all, jacobian_inv_known_alpha, jacobian_inv_known_beta, sigma_matrix,
    EstimationMode,
};
use crate::pattern::{DensityEstimate, PatternCtx, PatternKind, SubgraphPattern};
use crate::stats::{derive_seed, normal_quantile, sample_covariance};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Kappa3 magnitude below which interval output is flagged unstable.
pub const KAPPA3_STABLE_MIN: f64 = 0.1;

/// Resampling probabilities: keep `Y` with `gamma1`, set to one with
/// `gamma2`, set to zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GammaPair {
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Solve the variance-matching system for `(gamma1, gamma2)`.
///
/// The system can admit several solutions; for reproducibility this always
/// takes the smaller root of the `gamma2` quadratic and the smaller
/// admissible root of the `gamma1` quadratic.
// negated comparisons are deliberate: they reject NaN roots as inadmissible
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn solve_gamma(alpha: f64, beta: f64) -> Result<GammaPair> {
    let fail = |reason: String| Error::NoValidGamma {
        alpha,
        beta,
        reason,
    };
    let c2 = alpha * (1.0 - beta);
    let disc2 = 1.0 - 4.0 * c2;
    if disc2 < 0.0 {
        return Err(fail(format!("4 alpha (1-beta) = {:.6} exceeds 1", 4.0 * c2)));
    }
    // smaller root of x^2 - x + c2 = 0 in a cancellation-free form
    let gamma2 = 2.0 * c2 / (1.0 + disc2.sqrt());

    let b = 1.0 - 2.0 * gamma2;
    let c1 = beta - alpha;
    let disc1 = b * b - 4.0 * c1;
    if disc1 < 0.0 {
        return Err(fail(format!(
            "(1 - 2 gamma2)^2 = {:.6} below 4 (beta - alpha) = {:.6}",
            b * b,
            4.0 * c1
        )));
    }
    let gamma1 = if c1 > 0.0 {
        2.0 * c1 / (b + disc1.sqrt()) // smaller (positive) root
    } else if c1 == 0.0 {
        b // the root 0 is excluded by gamma1 > 0
    } else {
        0.5 * (b + disc1.sqrt()) // only one positive root
    };

    if !(gamma1 > 0.0) {
        return Err(fail(format!("gamma1 = {gamma1} not positive")));
    }
    if !(gamma2 > 0.0) {
        return Err(fail(format!("gamma2 = {gamma2} not positive")));
    }
    if !(gamma1 + gamma2 < 1.0) {
        return Err(fail(format!("gamma1 + gamma2 = {} not below 1", gamma1 + gamma2)));
    }
    let r1 = gamma1 * (1.0 - gamma1 - 2.0 * gamma2) - (beta - alpha);
    let r2 = gamma2 * (1.0 - gamma2) - alpha * (1.0 - beta);
    if r1.abs() > 1e-12 || r2.abs() > 1e-12 {
        return Err(fail(format!("residuals ({r1:.3e}, {r2:.3e}) exceed 1e-12")));
    }
    Ok(GammaPair { gamma1, gamma2 })
}

/// Draw one bootstrap network `Y^dag` from `Y`. Deterministic per seed.
pub fn sample_dagger(y: &AdjacencyMatrix, g: &GammaPair, rng_seed: u64) -> AdjacencyMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let p = y.p();
    let mut out = AdjacencyMatrix::zeros(p).expect("p from valid matrix");
    for i in 0..p {
        for j in (i + 1)..p {
            let u: f64 = rng.gen();
            let v = if u < g.gamma1 {
                y.get(i, j)
            } else if u < g.gamma1 + g.gamma2 {
                1
            } else {
                0
            };
            if v == 1 {
                out.set_pair(i, j, 1);
            }
        }
    }
    out
}

/// Centered bootstrap residual `R_ij = Y^dag_ij - Y_ij gamma1 - gamma2`
/// (zero diagonal).
fn residual_matrix(y: &AdjacencyMatrix, ydag: &AdjacencyMatrix, g: &GammaPair) -> SqMat {
    let p = y.p();
    let mut r = SqMat::zeros(p);
    for i in 0..p {
        for j in 0..p {
            if i != j {
                let v = ydag.get(i, j) as f64 - y.get(i, j) as f64 * g.gamma1 - g.gamma2;
                r.a[i * p + j] = v;
            }
        }
    }
    r
}

/// Draw the residual directly (avoids materializing `Y^dag` in the
/// bootstrap loop).
fn sample_residual(y: &AdjacencyMatrix, g: &GammaPair, rng: &mut impl Rng, r: &mut SqMat) {
    let p = y.p();
    for i in 0..p {
        for j in (i + 1)..p {
            let yij = y.get(i, j) as f64;
            let u: f64 = rng.gen();
            let dag = if u < g.gamma1 {
                yij
            } else if u < g.gamma1 + g.gamma2 {
                1.0
            } else {
                0.0
            };
            r.set_sym(i, j, dag - yij * g.gamma1 - g.gamma2);
        }
    }
}

fn s_dagger_from_sums(
    pattern: &SubgraphPattern,
    residual_sums: &[f64],
    n_pairs: f64,
    kappa3: f64,
) -> f64 {
    let scale = n_pairs.sqrt() / kappa3.powi(pattern.k() as i32);
    let mut total = 0.0;
    for (j, &tau) in pattern.taus().iter().enumerate() {
        let sign = if tau { 1.0 } else { -1.0 };
        total += sign * residual_sums[j];
    }
    scale * total
}

/// Bootstrap statistic `S^dag` for one resample `Y^dag` of `Y`.
pub fn s_dagger(
    y: &AdjacencyMatrix,
    ydag: &AdjacencyMatrix,
    pattern: &SubgraphPattern,
    alpha: f64,
    beta: f64,
    g: &GammaPair,
) -> Result<f64> {
    if y.p() != ydag.p() {
        return Err(Error::DimensionMismatch(y.p(), ydag.p()));
    }
    let kappa3 = 1.0 - alpha - beta;
    if kappa3.abs() < 1e-10 {
        return Err(Error::DegenerateDenominator {
            context: "1 - alpha - beta",
            value: kappa3,
        });
    }
    let ctx = PatternCtx::new(y, pattern, None, alpha, beta)?;
    let r = residual_matrix(y, ydag, g);
    let sums = ctx.residual_sums(&r)?;
    Ok(s_dagger_from_sums(
        pattern,
        &sums,
        y.n_pairs() as f64,
        kappa3,
    ))
}

/// `B x m` matrix of bootstrap statistics, one row per replicate, one column
/// per pattern. Replicate `b` uses the derived seed `derive_seed(seed, b)`,
/// so results do not depend on evaluation order.
pub fn bootstrap_samples(
    y: &AdjacencyMatrix,
    patterns: &[SubgraphPattern],
    alpha: f64,
    beta: f64,
    b: usize,
    rng_seed: u64,
) -> Result<DMatrix<f64>> {
    if b < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 bootstrap replicates, got {b}"
        )));
    }
    let kappa3 = 1.0 - alpha - beta;
    if kappa3.abs() < 1e-10 {
        return Err(Error::DegenerateDenominator {
            context: "1 - alpha - beta",
            value: kappa3,
        });
    }
    let g = solve_gamma(alpha, beta)?;
    let ctxs: Vec<PatternCtx> = patterns
        .iter()
        .map(|pat| PatternCtx::new(y, pat, None, alpha, beta))
        .collect::<Result<_>>()?;
    let n_pairs = y.n_pairs() as f64;
    let mut samples = DMatrix::zeros(b, patterns.len());
    let mut r = SqMat::zeros(y.p());
    for rep in 0..b {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(rng_seed, rep as u64));
        sample_residual(y, &g, &mut rng, &mut r);
        for (q, ctx) in ctxs.iter().enumerate() {
            let sums = ctx.residual_sums(&r)?;
            samples[(rep, q)] = s_dagger_from_sums(&patterns[q], &sums, n_pairs, kappa3);
        }
    }
    Ok(samples)
}

/// Bootstrap estimate of `V_1`: sample covariance (divisor `B - 1`) of the
/// `S^dag` vectors over `B` resamples.
pub fn bootstrap_v1(
    y: &AdjacencyMatrix,
    patterns: &[SubgraphPattern],
    alpha: f64,
    beta: f64,
    b: usize,
    rng_seed: u64,
) -> Result<DMatrix<f64>> {
    let samples = bootstrap_samples(y, patterns, alpha, beta, b, rng_seed)?;
    Ok(sample_covariance(&samples))
}

/// Plug-in estimates `(Delta_alpha, Delta_beta)` for one pattern:
/// `Delta_alpha = k C / kappa3 - kappa3^{-k} sum_{j: tau_j = 1} L_j` and the
/// `tau_j = 0` analogue for `Delta_beta`.
pub fn delta_hats(
    y: &AdjacencyMatrix,
    pattern: &SubgraphPattern,
    alpha: f64,
    beta: f64,
) -> Result<(f64, f64)> {
    let kappa3 = 1.0 - alpha - beta;
    if kappa3.abs() < 1e-10 {
        return Err(Error::DegenerateDenominator {
            context: "1 - alpha - beta",
            value: kappa3,
        });
    }
    let ctx = PatternCtx::new(y, pattern, None, alpha, beta)?;
    let k = pattern.k();
    let c = ctx.t() / kappa3.powi(k as i32);
    let loo = ctx.leave_one_out();
    let inv_k3k = kappa3.powi(-(k as i32));
    let lead = k as f64 * c / kappa3;
    let sum_edge: f64 = pattern
        .taus()
        .iter()
        .zip(loo)
        .filter(|(tau, _)| **tau)
        .map(|(_, l)| l)
        .sum();
    let sum_non: f64 = pattern
        .taus()
        .iter()
        .zip(loo)
        .filter(|(tau, _)| !**tau)
        .map(|(_, l)| l)
        .sum();
    Ok((lead - inv_k3k * sum_edge, lead - inv_k3k * sum_non))
}

/// Plug-in of the 3-vector `h` coupling `S` with the rate-estimation error.
///
/// First bracket scales the signed sum of densities with slot `j` forced to
/// an edge; second bracket scales the signed sum of leave-one-out averages.
pub fn h_hat(
    y: &AdjacencyMatrix,
    pattern: &SubgraphPattern,
    alpha: f64,
    beta: f64,
) -> Result<[f64; 3]> {
    let kappa3 = 1.0 - alpha - beta;
    if kappa3.abs() < 1e-10 {
        return Err(Error::DegenerateDenominator {
            context: "1 - alpha - beta",
            value: kappa3,
        });
    }
    let k1 = alpha * (1.0 - alpha);
    let k2 = beta * (1.0 - beta);
    let k4 = beta - alpha;
    let k = pattern.k();

    let ctx = PatternCtx::new(y, pattern, None, alpha, beta)?;
    let inv_k3k = kappa3.powi(-(k as i32));
    let c_plain = ctx.t() * inv_k3k;

    // signed sum over j of the density with tau_j set to 1
    let mut c_sum = 0.0;
    for (j, &tau) in pattern.taus().iter().enumerate() {
        let sign = if tau { 1.0 } else { -1.0 };
        if tau {
            c_sum += sign * c_plain;
        } else {
            let mut taus = pattern.taus().to_vec();
            taus[j] = true;
            let modified = PatternCtx::new(y, pattern, Some(&taus), alpha, beta)?;
            c_sum += sign * modified.t() * inv_k3k;
        }
    }

    let mut loo_sum = 0.0;
    for (j, &tau) in pattern.taus().iter().enumerate() {
        let sign = if tau { 1.0 } else { -1.0 };
        loo_sum += sign * ctx.leave_one_out()[j];
    }

    let bracket1 = [
        6.0 * k4,
        3.0 * (k4 * k4 - k1 - k2),
        2.0 * (k4 * (-6.0 * alpha * beta + 3.0 * kappa3 * kappa3 - 4.0 * kappa3)
            + (1.0 - alpha) * (beta - 2.0 * alpha)),
    ];
    let bracket2 = [
        6.0 * k1,
        3.0 * k1 * (1.0 - 2.0 * alpha),
        2.0 * k1 * (1.0 - alpha) * (1.0 - 3.0 * alpha),
    ];
    let w1 = c_sum / 3.0;
    let w2 = loo_sum * inv_k3k / 3.0;
    Ok([
        bracket1[0] * w1 + bracket2[0] * w2,
        bracket1[1] * w1 + bracket2[1] * w2,
        bracket1[2] * w1 + bracket2[2] * w2,
    ])
}

/// The 2x3 matrix mapping `sqrt(N)`-scaled u-statistic errors to
/// `(alpha_tilde, beta_tilde)` errors, by estimation mode. Known rates have
/// zero rows; the both-known mode is entirely zero.
pub fn g_matrix(alpha: f64, beta: f64, delta: f64, mode: EstimationMode) -> Result<DMatrix<f64>> {
    let mut g = DMatrix::zeros(2, 3);
    match mode {
        EstimationMode::BothKnown => {}
        EstimationMode::AlphaKnown => {
            let w = jacobian_inv_known_alpha(alpha, beta, delta)?;
            g[(1, 0)] = w[(0, 0)];
            g[(1, 1)] = w[(0, 1)];
        }
        EstimationMode::BetaKnown => {
            let w = jacobian_inv_known_beta(alpha, beta, delta)?;
            g[(0, 0)] = w[(0, 0)];
            g[(0, 1)] = w[(0, 1)];
        }
        EstimationMode::BothUnknown => {
            let w = jacobian_inv_all(alpha, beta, delta)?;
            for c in 0..3 {
                g[(0, c)] = w[(0, c)];
                g[(1, c)] = w[(1, c)];
            }
        }
    }
    Ok(g)
}

/// Joint covariance of the `sqrt(N)`-scaled density estimates, with the
/// factors it was assembled from.
#[derive(Debug, Clone)]
pub struct JointCovariance {
    pub m: usize,
    pub v1: DMatrix<f64>,
    pub v2: DMatrix<f64>,
    pub v3: DMatrix<f64>,
    pub v_total: DMatrix<f64>,
    pub bootstrap_b: usize,
    pub delta_hat: DMatrix<f64>,
    pub h_hat: DMatrix<f64>,
    pub g_hat: DMatrix<f64>,
    pub sigma_hat: DMatrix<f64>,
}

/// Assemble `V = V1 + Delta G Sigma G' Delta' + (H G' Delta' + Delta G H')/2`.
/// `v_total` is averaged with its transpose to remove float asymmetries.
pub fn assemble_vp(
    v1: DMatrix<f64>,
    delta_hat: DMatrix<f64>,
    g: DMatrix<f64>,
    sigma: DMatrix<f64>,
    h: DMatrix<f64>,
    bootstrap_b: usize,
) -> Result<JointCovariance> {
    let m = v1.nrows();
    if v1.ncols() != m {
        return Err(Error::ShapeMismatch(format!(
            "v1 is {}x{}",
            v1.nrows(),
            v1.ncols()
        )));
    }
    if delta_hat.nrows() != m || delta_hat.ncols() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "delta is {}x{}, expected {m}x2",
            delta_hat.nrows(),
            delta_hat.ncols()
        )));
    }
    if g.nrows() != 2 || g.ncols() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "g is {}x{}, expected 2x3",
            g.nrows(),
            g.ncols()
        )));
    }
    if sigma.nrows() != 3 || sigma.ncols() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "sigma is {}x{}, expected 3x3",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if h.nrows() != m || h.ncols() != 3 {
        return Err(Error::ShapeMismatch(format!(
            "h is {}x{}, expected {m}x3",
            h.nrows(),
            h.ncols()
        )));
    }
    let dg = &delta_hat * &g;
    let v2 = &dg * &sigma * dg.transpose();
    let hgd = &h * g.transpose() * delta_hat.transpose();
    let v3 = (&hgd + hgd.transpose()) * 0.5;
    let mut v_total = &v1 + &v2 + &v3;
    v_total = (&v_total + v_total.transpose()) * 0.5;
    Ok(JointCovariance {
        m,
        v1,
        v2,
        v3,
        v_total,
        bootstrap_b,
        delta_hat,
        h_hat: h,
        g_hat: g,
        sigma_hat: sigma,
    })
}

/// Convenience: everything `assemble_vp` needs for one mode, from data.
#[allow(clippy::too_many_arguments)]
pub fn joint_covariance(
    y: &AdjacencyMatrix,
    patterns: &[SubgraphPattern],
    alpha: f64,
    beta: f64,
    delta: f64,
    mode: EstimationMode,
    bootstrap_b: usize,
    rng_seed: u64,
) -> Result<JointCovariance> {
    let v1 = bootstrap_v1(y, patterns, alpha, beta, bootstrap_b, rng_seed)?;
    let m = patterns.len();
    let mut delta_mat = DMatrix::zeros(m, 2);
    let mut h_mat = DMatrix::zeros(m, 3);
    for (q, pat) in patterns.iter().enumerate() {
        let (da, db) = delta_hats(y, pat, alpha, beta)?;
        delta_mat[(q, 0)] = da;
        delta_mat[(q, 1)] = db;
        let h = h_hat(y, pat, alpha, beta)?;
        for c in 0..3 {
            h_mat[(q, c)] = h[c];
        }
    }
    let g = g_matrix(alpha, beta, delta, mode)?;
    let s = sigma_matrix(alpha, beta, delta).entries;
    let sigma = DMatrix::from_fn(3, 3, |i, j| s[(i, j)]);
    assemble_vp(v1, delta_mat, g, sigma, h_mat, bootstrap_b)
}

/// A two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Confidence intervals for densities, implied counts and the clustering
/// coefficient, from a joint covariance.
#[derive(Debug, Clone)]
pub struct JointIntervals {
    pub level: f64,
    pub densities: Vec<Interval>,
    /// Count intervals for two-star/triangle patterns, `None` otherwise.
    pub counts: Vec<Option<Interval>>,
    /// Present when a two-star density precedes a triangle density in the
    /// estimate list; first-order delta method on their ratio.
    pub clustering: Option<(f64, Interval)>,
    /// Some variance diagonal was within `[-1e-8, 0)` and was floored to 0.
    pub variance_floored: bool,
    /// `|1 - alpha - beta| < 0.1`: corrections scale like `kappa3^{-k}` and
    /// the intervals become numerically unstable.
    pub unstable_kappa3: bool,
}

/// Build the intervals: density CIs use `sqrt(v_qq * 2 / (p(p-1)))`, count
/// CIs scale by `p(p-1)(p-2)/2` or `/6`, and the clustering CI applies the
/// delta method to the (two-star, triangle) block.
pub fn joint_cis(
    estimates: &[DensityEstimate],
    vp: &JointCovariance,
    p: usize,
    level: f64,
) -> Result<JointIntervals> {
    if estimates.len() != vp.m {
        return Err(Error::ShapeMismatch(format!(
            "{} estimates but covariance of size {}",
            estimates.len(),
            vp.m
        )));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidInput(format!("CI level {level} outside (0, 1)")));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    let n_pairs = (p * (p - 1) / 2) as f64;
    let fff = (p * (p - 1) * (p - 2)) as f64;
    let mut variance_floored = false;
    let mut densities = Vec::with_capacity(estimates.len());
    let mut counts = Vec::with_capacity(estimates.len());
    for (q, est) in estimates.iter().enumerate() {
        let mut var = vp.v_total[(q, q)];
        if var < -1e-8 {
            return Err(Error::NegativeVariance {
                context: "v_total diagonal",
                value: var,
            });
        }
        if var < 0.0 {
            var = 0.0;
            variance_floored = true;
        }
        let half = z * (var / n_pairs).sqrt();
        let iv = Interval {
            lo: est.c_hat - half,
            hi: est.c_hat + half,
        };
        densities.push(iv);
        counts.push(match est.pattern.kind() {
            PatternKind::TwoStar => Some(Interval {
                lo: iv.lo * fff / 2.0,
                hi: iv.hi * fff / 2.0,
            }),
            PatternKind::Triangle => Some(Interval {
                lo: iv.lo * fff / 6.0,
                hi: iv.hi * fff / 6.0,
            }),
            _ => None,
        });
    }

    // clustering coefficient from the first (two-star, triangle) pair
    let ts_idx = estimates
        .iter()
        .position(|e| e.pattern.kind() == PatternKind::TwoStar);
    let tri_idx = estimates
        .iter()
        .position(|e| e.pattern.kind() == PatternKind::Triangle);
    let clustering = match (ts_idx, tri_idx) {
        (Some(s), Some(t)) if s < t => {
            let c2 = estimates[s].c_hat;
            let c3 = estimates[t].c_hat;
            if c2 == 0.0 {
                return Err(Error::ZeroTwoStars);
            }
            let gamma = c3 / c2;
            let grad = [-c3 / (c2 * c2), 1.0 / c2];
            let block = [
                [vp.v_total[(s, s)], vp.v_total[(s, t)]],
                [vp.v_total[(t, s)], vp.v_total[(t, t)]],
            ];
            let mut var = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    var += grad[i] * block[i][j] * grad[j];
                }
            }
            var /= n_pairs;
            if var < -1e-8 {
                return Err(Error::NegativeVariance {
                    context: "clustering delta-method variance",
                    value: var,
                });
            }
            if var < 0.0 {
                var = 0.0;
                variance_floored = true;
            }
            let half = z * var.sqrt();
            Some((
                gamma,
                Interval {
                    lo: gamma - half,
                    hi: gamma + half,
                },
            ))
        }
        _ => None,
    };

    let unstable = estimates
        .iter()
        .any(|e| (1.0 - e.alpha_used - e.beta_used).abs() < KAPPA3_STABLE_MIN);
    Ok(JointIntervals {
        level,
        densities,
        counts,
        clustering,
        variance_floored,
        unstable_kappa3: unstable,
    })
}

/// Diagnostics dump: one CSV row per bootstrap replicate, one column per
/// pattern statistic.
pub fn bootstrap_samples_csv(samples: &DMatrix<f64>, names: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    for r in 0..samples.nrows() {
        let row: Vec<String> = (0..samples.ncols())
            .map(|c| format!("{}", samples[(r, c)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
