//! Method-of-moments estimation of the error rates and the edge density from
//! one to three noisy replicates.
//!
//! The three moment statistics are
//! `u1 = (1-delta) alpha + delta (1-beta)`,
//! `u2 = (1-delta) alpha (1-alpha) + delta beta (1-beta)` and
//! `u3 = (1-delta) alpha (1-alpha)^2 + delta beta^2 (1-beta)`,
//! estimated by the observed edge density, by the mean absolute difference
//! between two replicates, and by a second-difference indicator over three
//! replicates. Closed forms recover `(beta, delta)` when `alpha` is known and
//! `(alpha, delta)` when `beta` is known; with both rates unknown a scalar
//! fixed-point iteration on `alpha` solves the full 3x3 system.

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::stats::normal_quantile;
use nalgebra::{DMatrix, Matrix2, Matrix3};

pub const DENOM_TOL: f64 = 1e-10;

/// Default starting point of the fixed-point iteration on `alpha`.
pub const DEFAULT_ALPHA0: f64 = 0.2;
/// Default stopping tolerance on successive `alpha` iterates.
pub const DEFAULT_FP_TOL: f64 = 1e-4;
/// Safety bound on fixed-point iterations.
pub const DEFAULT_FP_MAX_ITER: usize = 500;

/// Observed edge density `u1_hat = bar Y`.
pub fn u1_hat(y: &AdjacencyMatrix) -> f64 {
    crate::graph::edge_density(y)
}

/// `u2_hat = 1/(p(p-1)) * sum_{i<j} |Y*_ij - Y_ij|`.
pub fn u2_hat(y: &AdjacencyMatrix, ystar: &AdjacencyMatrix) -> Result<f64> {
    if y.p() != ystar.p() {
        return Err(Error::DimensionMismatch(y.p(), ystar.p()));
    }
    let p = y.p();
    let mut diff = 0u64;
    for i in 0..p {
        for j in (i + 1)..p {
            diff += (y.get(i, j) ^ ystar.get(i, j)) as u64;
        }
    }
    Ok(diff as f64 / (p * (p - 1)) as f64)
}

/// `u3_hat = 2/(3p(p-1)) * sum_{i<j} I(Y**_ij - 2 Y*_ij + Y_ij = 1 or -2)`.
pub fn u3_hat(
    y: &AdjacencyMatrix,
    ystar: &AdjacencyMatrix,
    ystarstar: &AdjacencyMatrix,
) -> Result<f64> {
    if y.p() != ystar.p() {
        return Err(Error::DimensionMismatch(y.p(), ystar.p()));
    }
    if y.p() != ystarstar.p() {
        return Err(Error::DimensionMismatch(y.p(), ystarstar.p()));
    }
    let p = y.p();
    let mut hits = 0u64;
    for i in 0..p {
        for j in (i + 1)..p {
            let s = ystarstar.get(i, j) as i32 - 2 * ystar.get(i, j) as i32 + y.get(i, j) as i32;
            if s == 1 || s == -2 {
                hits += 1;
            }
        }
    }
    Ok(2.0 * hits as f64 / (3 * p * (p - 1)) as f64)
}

/// Moment statistics from 1-3 replicates, plus the pair count `N = p(p-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTriple {
    pub u1: f64,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
    pub n_pairs: usize,
}

impl MomentTriple {
    pub fn new(u1: f64, u2: Option<f64>, u3: Option<f64>, n_pairs: usize) -> Result<Self> {
        for (name, v) in [("u1", Some(u1)), ("u2", u2), ("u3", u3)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!("{name}={v} outside [0, 1]")));
                }
            }
        }
        if n_pairs == 0 {
            return Err(Error::InvalidInput("n_pairs must be positive".into()));
        }
        Ok(Self { u1, u2, u3, n_pairs })
    }

    /// Compute the statistics available from the given replicates (1, 2 or 3).
    pub fn from_replicates(replicates: &[&AdjacencyMatrix]) -> Result<Self> {
        match replicates {
            [y] => Self::new(u1_hat(y), None, None, y.n_pairs()),
            [y, ys] => Self::new(u1_hat(y), Some(u2_hat(y, ys)?), None, y.n_pairs()),
            [y, ys, yss] => Self::new(
                u1_hat(y),
                Some(u2_hat(y, ys)?),
                Some(u3_hat(y, ys, yss)?),
                y.n_pairs(),
            ),
            _ => Err(Error::InvalidInput(format!(
                "need 1 to 3 replicates, got {}",
                replicates.len()
            ))),
        }
    }

    /// Population moments for parameters `(alpha, beta, delta)`.
    pub fn population(alpha: f64, beta: f64, delta: f64, n_pairs: usize) -> Result<Self> {
        Self::new(
            (1.0 - delta) * alpha + delta * (1.0 - beta),
            Some((1.0 - delta) * alpha * (1.0 - alpha) + delta * beta * (1.0 - beta)),
            Some(
                (1.0 - delta) * alpha * (1.0 - alpha) * (1.0 - alpha)
                    + delta * beta * beta * (1.0 - beta),
            ),
            n_pairs,
        )
    }

    fn require_u2(&self) -> Result<f64> {
        self.u2.ok_or_else(|| {
            Error::InvalidInput("this estimator needs u2 (two replicates)".into())
        })
    }

    fn require_u3(&self) -> Result<f64> {
        self.u3.ok_or_else(|| {
            Error::InvalidInput("this estimator needs u3 (three replicates)".into())
        })
    }
}

/// Which rates were treated as known when estimating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    AlphaKnown,
    BetaKnown,
    BothUnknown,
    BothKnown,
}

impl std::fmt::Display for EstimationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimationMode::AlphaKnown => "alpha_known",
            EstimationMode::BetaKnown => "beta_known",
            EstimationMode::BothUnknown => "both_unknown",
            EstimationMode::BothKnown => "both_known",
        };
        f.write_str(s)
    }
}

/// Point estimates of `(alpha, beta, delta)` with their asymptotic covariance.
///
/// `alpha`, `beta`, `delta` hold the raw estimates; out-of-range values are
/// never silently clamped (downstream plug-ins need the raw numbers), but
/// `clamped()` offers the `[0, 1]`-truncated companions and `out_of_range`
/// flags their presence. `cov` is the covariance of the `sqrt(N)`-scaled
/// estimation errors for the free parameters, in the order listed by
/// `cov_order()`.
#[derive(Debug, Clone)]
pub struct RateEstimate {
    pub mode: EstimationMode,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub out_of_range: bool,
    pub cov: DMatrix<f64>,
    /// `sqrt` of the delta diagonal entry of `cov`; zero-floored if the
    /// plug-in covariance lost positive-definiteness (see `variance_floored`).
    pub sigma_delta: f64,
    pub variance_floored: bool,
    pub ci_level: f64,
    pub ci_delta: (f64, f64),
    pub n_pairs: usize,
    /// Fixed-point iteration count (both-unknown mode only).
    pub iterations: Option<usize>,
}

impl RateEstimate {
    /// Raw estimates truncated to `[0, 1]`, in `(alpha, beta, delta)` order.
    pub fn clamped(&self) -> (f64, f64, f64) {
        (
            self.alpha.clamp(0.0, 1.0),
            self.beta.clamp(0.0, 1.0),
            self.delta.clamp(0.0, 1.0),
        )
    }

    /// Names of the rows/columns of `cov`.
    pub fn cov_order(&self) -> &'static [&'static str] {
        match self.mode {
            EstimationMode::AlphaKnown => &["beta", "delta"],
            EstimationMode::BetaKnown => &["alpha", "delta"],
            EstimationMode::BothUnknown => &["alpha", "beta", "delta"],
            EstimationMode::BothKnown => &["delta"],
        }
    }

    fn finish(mut self, level: f64) -> Result<Self> {
        let n = self.cov.nrows();
        let var_delta = self.cov[(n - 1, n - 1)];
        if var_delta < 0.0 {
            self.variance_floored = true;
        }
        self.sigma_delta = var_delta.max(0.0).sqrt();
        self.out_of_range = [self.alpha, self.beta, self.delta]
            .iter()
            .any(|v| !(0.0..=1.0).contains(v));
        self.ci_level = level;
        self.ci_delta = ci_delta(self.delta, self.sigma_delta, self.n_pairs, level)?;
        Ok(self)
    }
}

fn check_denominator(context: &'static str, value: f64) -> Result<f64> {
    if value.abs() <= DENOM_TOL {
        return Err(Error::DegenerateDenominator { context, value });
    }
    Ok(value)
}

/// Closed-form `(beta, delta)` from `(u1, u2)` at a given `alpha`.
fn solve_known_alpha(alpha: f64, u1: f64, u2: f64) -> Result<(f64, f64)> {
    let d1 = check_denominator("u1 - alpha", u1 - alpha)?;
    let beta = (u2 - alpha + u1 * alpha) / d1;
    let d2 = check_denominator(
        "u1 - u2 - 2 u1 alpha + alpha^2",
        u1 - u2 - 2.0 * u1 * alpha + alpha * alpha,
    )?;
    let delta = d1 * d1 / d2;
    Ok((beta, delta))
}

/// Estimate `(beta, delta)` with `alpha` known, from two replicates.
pub fn estimate_alpha_known(alpha: f64, m: &MomentTriple, level: f64) -> Result<RateEstimate> {
    let u2 = m.require_u2()?;
    let (beta, delta) = solve_known_alpha(alpha, m.u1, u2)?;
    let cov = cov_known_alpha(alpha, beta, delta)?;
    RateEstimate {
        mode: EstimationMode::AlphaKnown,
        alpha,
        beta,
        delta,
        out_of_range: false,
        cov,
        sigma_delta: 0.0,
        variance_floored: false,
        ci_level: level,
        ci_delta: (0.0, 0.0),
        n_pairs: m.n_pairs,
        iterations: None,
    }
    .finish(level)
}

/// Estimate `(alpha, delta)` with `beta` known, from two replicates.
pub fn estimate_beta_known(beta: f64, m: &MomentTriple, level: f64) -> Result<RateEstimate> {
    let u2 = m.require_u2()?;
    let u1 = m.u1;
    let d1 = check_denominator("u1 + beta - 1", u1 + beta - 1.0)?;
    let alpha = (u1 * beta - u2) / d1;
    let d2 = check_denominator(
        "u1 + u2 - 2 u1 beta - (1-beta)^2",
        u1 + u2 - 2.0 * u1 * beta - (1.0 - beta) * (1.0 - beta),
    )?;
    let delta = (u1 * u1 - u1 + u2) / d2;
    let cov = cov_known_beta(alpha, beta, delta)?;
    RateEstimate {
        mode: EstimationMode::BetaKnown,
        alpha,
        beta,
        delta,
        out_of_range: false,
        cov,
        sigma_delta: 0.0,
        variance_floored: false,
        ci_level: level,
        ci_delta: (0.0, 0.0),
        n_pairs: m.n_pairs,
        iterations: None,
    }
    .finish(level)
}

/// Estimate `(alpha, beta, delta)` from three replicates by the fixed-point
/// iteration: given the current `alpha`, solve `(beta, delta)` in closed form,
/// then update `alpha = (u3 - delta beta^2 (1-beta)) / ((1-delta)(1-alpha)^2)`.
pub fn estimate_all_unknown(
    m: &MomentTriple,
    alpha0: f64,
    tol: f64,
    max_iter: usize,
    level: f64,
) -> Result<RateEstimate> {
    let u2 = m.require_u2()?;
    let u3 = m.require_u3()?;
    let mut alpha = alpha0;
    for it in 0..max_iter {
        let (beta, delta) = solve_known_alpha(alpha, m.u1, u2)?;
        let denom = check_denominator(
            "(1 - delta)(1 - alpha)^2",
            (1.0 - delta) * (1.0 - alpha) * (1.0 - alpha),
        )?;
        let alpha_next = (u3 - delta * beta * beta * (1.0 - beta)) / denom;
        if (alpha_next - alpha).abs() < tol {
            let (beta, delta) = solve_known_alpha(alpha_next, m.u1, u2)?;
            let cov = cov_all_unknown(alpha_next, beta, delta)?;
            return RateEstimate {
                mode: EstimationMode::BothUnknown,
                alpha: alpha_next,
                beta,
                delta,
                out_of_range: false,
                cov,
                sigma_delta: 0.0,
                variance_floored: false,
                ci_level: level,
                ci_delta: (0.0, 0.0),
                n_pairs: m.n_pairs,
                iterations: Some(it + 1),
            }
            .finish(level);
        }
        alpha = alpha_next;
    }
    let (beta, _) = solve_known_alpha(alpha, m.u1, u2).unwrap_or((f64::NAN, f64::NAN));
    Err(Error::NoConvergence {
        iterations: max_iter,
        last: [alpha, beta],
    })
}

/// Estimate `delta` with both rates known, from a single replicate:
/// `delta = (u1 - alpha) / (1 - alpha - beta)`.
pub fn estimate_both_known(
    alpha: f64,
    beta: f64,
    m: &MomentTriple,
    level: f64,
) -> Result<RateEstimate> {
    let kappa3 = check_denominator("1 - alpha - beta", 1.0 - alpha - beta)?;
    let delta = (m.u1 - alpha) / kappa3;
    // Var(sqrt(N) delta_hat) = sigma_11 / kappa3^2 with sigma_11 evaluated at
    // the plug-in delta.
    let sigma = sigma_matrix(alpha, beta, delta);
    let var = sigma.entries[(0, 0)] / (kappa3 * kappa3);
    RateEstimate {
        mode: EstimationMode::BothKnown,
        alpha,
        beta,
        delta,
        out_of_range: false,
        cov: DMatrix::from_element(1, 1, var),
        sigma_delta: 0.0,
        variance_floored: false,
        ci_level: level,
        ci_delta: (0.0, 0.0),
        n_pairs: m.n_pairs,
        iterations: None,
    }
    .finish(level)
}

/// Two-sided normal confidence interval
/// `(delta - z sigma / sqrt(N), delta + z sigma / sqrt(N))`.
pub fn ci_delta(delta_hat: f64, sigma_hat: f64, n_pairs: usize, level: f64) -> Result<(f64, f64)> {
    if sigma_hat < 0.0 {
        return Err(Error::InvalidInput(format!("negative sigma {sigma_hat}")));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidInput(format!("CI level {level} outside (0, 1)")));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    let half = z * sigma_hat / (n_pairs as f64).sqrt();
    Ok((delta_hat - half, delta_hat + half))
}

/// Asymptotic covariance of `sqrt(N) (u1_hat - u1, u2_hat - u2, u3_hat - u3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMatrix {
    pub entries: Matrix3<f64>,
    /// Cached `(kappa1, kappa2, kappa3, kappa4)`
    /// `= (alpha(1-alpha), beta(1-beta), 1-alpha-beta, beta-alpha)`.
    pub kappas: [f64; 4],
}

pub fn sigma_matrix(alpha: f64, beta: f64, delta: f64) -> SigmaMatrix {
    let k1 = alpha * (1.0 - alpha);
    let k2 = beta * (1.0 - beta);
    let d = delta;
    let q = 1.0 - delta;
    let s11 = d * k2 + q * k1;
    let s22 = d * k2 * (0.5 - k2) + q * k1 * (0.5 - k1);
    let s33 = d * beta * k2 * (1.0 / 3.0 - beta * k2)
        + q * k1 * (1.0 - alpha) * (1.0 / 3.0 - k1 * (1.0 - alpha));
    let s12 = d * k2 * (beta - 0.5) + q * k1 * (0.5 - alpha);
    let s13 = d * k2 * (beta * beta / 3.0 - 2.0 * k2 / 3.0)
        + q * k1 * ((1.0 - alpha) * (1.0 - alpha) / 3.0 - 2.0 * k1 / 3.0);
    let s23 = d * beta * k2 * (1.0 / 3.0 - k2) + q * (1.0 - alpha) * k1 * (1.0 / 3.0 - k1);
    SigmaMatrix {
        entries: Matrix3::new(s11, s12, s13, s12, s22, s23, s13, s23, s33),
        kappas: [k1, k2, 1.0 - alpha - beta, beta - alpha],
    }
}

/// Signed linearization of the known-alpha estimator: rows map
/// `sqrt(N)(u1_hat - u1, u2_hat - u2)` errors to `(beta_hat, delta_hat)` errors.
pub(crate) fn jacobian_inv_known_alpha(alpha: f64, beta: f64, delta: f64) -> Result<Matrix2<f64>> {
    let k1 = alpha * (1.0 - alpha);
    let k2 = beta * (1.0 - beta);
    let k3 = check_denominator("1 - alpha - beta", 1.0 - alpha - beta)?;
    let d = delta;
    if d.abs() <= DENOM_TOL {
        return Err(Error::DegenerateDenominator {
            context: "delta",
            value: d,
        });
    }
    Ok(Matrix2::new(
        (k1 - k2) / (d * k3 * k3),
        1.0 / (d * k3),
        (1.0 - 2.0 * beta) / (k3 * k3),
        1.0 / (k3 * k3),
    ))
}

/// Signed linearization of the known-beta estimator for `(alpha_hat, delta_hat)`.
pub(crate) fn jacobian_inv_known_beta(alpha: f64, beta: f64, delta: f64) -> Result<Matrix2<f64>> {
    let k1 = alpha * (1.0 - alpha);
    let k2 = beta * (1.0 - beta);
    let k3 = check_denominator("1 - alpha - beta", 1.0 - alpha - beta)?;
    let q = 1.0 - delta;
    if q.abs() <= DENOM_TOL {
        return Err(Error::DegenerateDenominator {
            context: "1 - delta",
            value: q,
        });
    }
    Ok(Matrix2::new(
        (k1 - k2) / (q * k3 * k3),
        1.0 / (q * k3),
        (1.0 - 2.0 * alpha) / (k3 * k3),
        -1.0 / (k3 * k3),
    ))
}

/// Signed linearization of the three-parameter system: rows map
/// `sqrt(N)` u-statistic errors to `(alpha_hat, beta_hat, delta_hat)` errors.
pub(crate) fn jacobian_inv_all(alpha: f64, beta: f64, delta: f64) -> Result<Matrix3<f64>> {
    let k3 = check_denominator("1 - alpha - beta", 1.0 - alpha - beta)?;
    let d = delta;
    let q = 1.0 - delta;
    if d.abs() <= DENOM_TOL {
        return Err(Error::DegenerateDenominator {
            context: "delta",
            value: d,
        });
    }
    if q.abs() <= DENOM_TOL {
        return Err(Error::DegenerateDenominator {
            context: "1 - delta",
            value: q,
        });
    }
    let k32 = k3 * k3;
    let k33 = k32 * k3;
    Ok(Matrix3::new(
        ((1.0 - 2.0 * beta) * alpha + beta * beta) / (q * k32),
        (alpha - 2.0 * beta) / (q * k32),
        1.0 / (q * k32),
        -((1.0 - 2.0 * alpha) * beta + alpha * alpha) / (d * k32),
        (beta - 2.0 * alpha + 1.0) / (d * k32),
        -1.0 / (d * k32),
        (3.0 * k3 + 6.0 * alpha * beta - 2.0) / k33,
        (3.0 * k3 + 6.0 * beta - 2.0) / k33,
        -2.0 / k33,
    ))
}

/// Covariance of `sqrt(N) (beta_hat - beta, delta_hat - delta)`, alpha known.
pub fn cov_known_alpha(alpha: f64, beta: f64, delta: f64) -> Result<DMatrix<f64>> {
    let w = jacobian_inv_known_alpha(alpha, beta, delta)?;
    let s1 = sigma_matrix(alpha, beta, delta)
        .entries
        .fixed_view::<2, 2>(0, 0)
        .into_owned();
    let c = w * s1 * w.transpose();
    Ok(DMatrix::from_fn(2, 2, |i, j| c[(i, j)]))
}

/// Covariance of `sqrt(N) (alpha_hat - alpha, delta_hat - delta)`, beta known.
pub fn cov_known_beta(alpha: f64, beta: f64, delta: f64) -> Result<DMatrix<f64>> {
    let w = jacobian_inv_known_beta(alpha, beta, delta)?;
    let s1 = sigma_matrix(alpha, beta, delta)
        .entries
        .fixed_view::<2, 2>(0, 0)
        .into_owned();
    let c = w * s1 * w.transpose();
    Ok(DMatrix::from_fn(2, 2, |i, j| c[(i, j)]))
}

/// Covariance of `sqrt(N) (alpha_hat, beta_hat, delta_hat)` errors, both
/// rates unknown.
pub fn cov_all_unknown(alpha: f64, beta: f64, delta: f64) -> Result<DMatrix<f64>> {
    let w = jacobian_inv_all(alpha, beta, delta)?;
    let c = w * sigma_matrix(alpha, beta, delta).entries * w.transpose();
    Ok(DMatrix::from_fn(3, 3, |i, j| c[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_noisy, AdjacencyMatrix, NoiseModel};

    const LEVEL: f64 = 0.95;

    #[test]
    fn u2_examples() {
        let y = AdjacencyMatrix::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(u2_hat(&y, &y).unwrap(), 0.0);
        let comp = y.complement();
        assert_eq!(u2_hat(&y, &comp).unwrap(), 0.5);
        // population: alpha=.05, beta=.15, delta=.2 gives E(u2) = .0635
        let m = MomentTriple::population(0.05, 0.15, 0.2, 10).unwrap();
        assert!((m.u2.unwrap() - 0.0635).abs() < 1e-15);
    }

    #[test]
    fn u3_examples() {
        let y = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(u3_hat(&y, &y, &y).unwrap(), 0.0);
        // single pair (0,0,1): statistic = 1, so u3 = 2/(3*2) = 1/3 at p=2
        let y0 = AdjacencyMatrix::zeros(2).unwrap();
        let y1 = AdjacencyMatrix::from_edges(2, &[(0, 1)]).unwrap();
        assert!((u3_hat(&y0, &y0, &y1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let m = MomentTriple::population(0.05, 0.15, 0.2, 10).unwrap();
        assert!((m.u3.unwrap() - 0.039925).abs() < 1e-15);
    }

    #[test]
    fn known_alpha_recovers_population_parameters() {
        let m = MomentTriple::population(0.05, 0.15, 0.2, 435).unwrap();
        let est = estimate_alpha_known(0.05, &m, LEVEL).unwrap();
        assert!((est.beta - 0.15).abs() < 1e-12);
        assert!((est.delta - 0.2).abs() < 1e-12);
        // alpha = 0 specialization: beta = u2/u1, delta = u1^2/(u1-u2)
        let m0 = MomentTriple::population(0.0, 0.3, 0.4, 100).unwrap();
        let est0 = estimate_alpha_known(0.0, &m0, LEVEL).unwrap();
        assert!((est0.beta - 0.3).abs() < 1e-12);
        assert!((est0.delta - 0.4).abs() < 1e-12);
    }

    #[test]
    fn known_beta_recovers_population_parameters() {
        let m = MomentTriple::population(0.05, 0.15, 0.2, 435).unwrap();
        let est = estimate_beta_known(0.15, &m, LEVEL).unwrap();
        assert!((est.alpha - 0.05).abs() < 1e-12);
        assert!((est.delta - 0.2).abs() < 1e-12);
        let m2 = MomentTriple::population(0.1, 0.0, 0.5, 100).unwrap();
        let est2 = estimate_beta_known(0.0, &m2, LEVEL).unwrap();
        assert!((est2.alpha - 0.1).abs() < 1e-12);
        assert!((est2.delta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn estimators_require_their_moments() {
        let m = MomentTriple::new(0.2, None, None, 50).unwrap();
        assert!(estimate_alpha_known(0.05, &m, LEVEL).is_err());
        let m2 = MomentTriple::new(0.2, Some(0.05), None, 50).unwrap();
        assert!(estimate_all_unknown(&m2, 0.2, 1e-6, 100, LEVEL).is_err());
    }

    #[test]
    fn known_beta_degenerate_denominator() {
        // u1 + beta - 1 = 0 forces the error path
        let m = MomentTriple::new(0.4, Some(0.1), None, 50).unwrap();
        assert!(matches!(
            estimate_beta_known(0.6, &m, LEVEL),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn fixed_point_exact_recovery() {
        let m = MomentTriple::population(0.05, 0.15, 0.2, 435).unwrap();
        let est = estimate_all_unknown(&m, 0.2, 1e-10, 500, LEVEL).unwrap();
        assert!((est.alpha - 0.05).abs() < 1e-8);
        assert!((est.beta - 0.15).abs() < 1e-8);
        assert!((est.delta - 0.2).abs() < 1e-8);
        assert!(est.iterations.unwrap() > 1);
    }

    #[test]
    fn fixed_point_noiseless() {
        let m = MomentTriple::new(0.3, Some(0.0), Some(0.0), 435).unwrap();
        let est = estimate_all_unknown(&m, 0.2, 1e-10, 500, LEVEL).unwrap();
        assert!(est.alpha.abs() < 1e-10);
        assert!(est.beta.abs() < 1e-10);
        assert!((est.delta - 0.3).abs() < 1e-10);
    }

    #[test]
    fn exact_moment_recovery_grid() {
        // non-degeneracy per delta(1-delta)(1-alpha-beta)^4 >= .01
        for &alpha in &[0.02, 0.05, 0.1, 0.2] {
            for &beta in &[0.05, 0.15, 0.3] {
                for &delta in &[0.1, 0.2, 0.5] {
                    let k3: f64 = 1.0 - alpha - beta;
                    if delta * (1.0 - delta) * k3.powi(4) < 0.01 {
                        continue;
                    }
                    let m = MomentTriple::population(alpha, beta, delta, 435).unwrap();
                    let est = estimate_all_unknown(&m, 0.2, 1e-10, 500, LEVEL).unwrap();
                    assert!(
                        (est.alpha - alpha).abs() < 1e-6
                            && (est.beta - beta).abs() < 1e-6
                            && (est.delta - delta).abs() < 1e-6,
                        "failed at ({alpha}, {beta}, {delta}): got ({}, {}, {})",
                        est.alpha,
                        est.beta,
                        est.delta
                    );
                }
            }
        }
    }

    #[test]
    fn estimator_duality_on_population_moments() {
        // eq-(10) and eq-(11) are two parameterizations of the same system
        for &(a, b, d) in &[(0.05, 0.15, 0.2), (0.1, 0.05, 0.35), (0.02, 0.3, 0.5)] {
            let m = MomentTriple::population(a, b, d, 100).unwrap();
            let ea = estimate_alpha_known(a, &m, LEVEL).unwrap();
            let eb = estimate_beta_known(b, &m, LEVEL).unwrap();
            assert!((ea.delta - d).abs() < 1e-12);
            assert!((eb.delta - d).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_matrix_examples() {
        let s = sigma_matrix(0.0, 0.0, 0.7);
        assert!(s.entries.iter().all(|&v| v == 0.0));
        let s = sigma_matrix(0.05, 0.15, 0.2);
        assert!((s.entries[(0, 0)] - 0.0635).abs() < 1e-15);
        // symmetry by construction
        assert_eq!(s.entries[(0, 1)], s.entries[(1, 0)]);
        assert_eq!(s.entries[(0, 2)], s.entries[(2, 0)]);
        assert_eq!(s.entries[(1, 2)], s.entries[(2, 1)]);
    }

    #[test]
    fn covariances_vanish_without_noise() {
        for cov in [
            cov_known_alpha(0.0, 0.0, 0.3).unwrap(),
            cov_known_beta(0.0, 0.0, 0.3).unwrap(),
            cov_all_unknown(0.0, 0.0, 0.3).unwrap(),
        ] {
            assert!(cov.iter().all(|&v| v.abs() < 1e-15));
        }
    }

    #[test]
    fn covariances_symmetric_psd() {
        for &(a, b, d) in &[(0.05, 0.15, 0.2), (0.1, 0.3, 0.6), (0.02, 0.05, 0.1)] {
            for cov in [
                cov_known_alpha(a, b, d).unwrap(),
                cov_known_beta(a, b, d).unwrap(),
                cov_all_unknown(a, b, d).unwrap(),
            ] {
                let n = cov.nrows();
                for i in 0..n {
                    for j in 0..n {
                        assert!((cov[(i, j)] - cov[(j, i)]).abs() < 1e-12);
                    }
                }
                let eig = cov.clone().symmetric_eigen();
                assert!(
                    eig.eigenvalues.iter().all(|&l| l > -1e-8),
                    "not PSD at ({a}, {b}, {d}): {:?}",
                    eig.eigenvalues
                );
            }
        }
    }

    #[test]
    fn g_alpha3_value() {
        // printed entry 1/((1-delta) kappa3^2) at (.05, .15, .2) = 1.953125
        let w = jacobian_inv_all(0.05, 0.15, 0.2).unwrap();
        assert!((w[(0, 2)] - 1.953125).abs() < 1e-12);
    }

    #[test]
    fn ci_delta_examples() {
        let (lo, hi) = ci_delta(0.5, 1.0, 10_000, 0.95).unwrap();
        assert!((lo - 0.4804).abs() < 1e-4);
        assert!((hi - 0.5196).abs() < 1e-4);
        let (lo, hi) = ci_delta(0.3, 0.0, 100, 0.95).unwrap();
        assert_eq!((lo, hi), (0.3, 0.3));
    }

    #[test]
    fn both_known_matches_corrected_estimator() {
        // delta_hat = (u1 - alpha)/(1 - alpha - beta), eq-(6) style
        let g = AdjacencyMatrix::from_edges(20, &[(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap();
        let noise = NoiseModel::new(0.05, 0.15).unwrap();
        let y = sample_noisy(&g, &noise, 11);
        let m = MomentTriple::from_replicates(&[&y]).unwrap();
        let est = estimate_both_known(0.05, 0.15, &m, LEVEL).unwrap();
        let expect = (u1_hat(&y) - 0.05) / 0.8;
        assert!((est.delta - expect).abs() < 1e-15);
    }

    #[test]
    fn relabeling_invariance_of_moments() {
        let g = AdjacencyMatrix::from_edges(6, &[(0, 1), (1, 2), (3, 4), (0, 5)]).unwrap();
        let noise = NoiseModel::new(0.1, 0.2).unwrap();
        let y = sample_noisy(&g, &noise, 1);
        let ys = sample_noisy(&g, &noise, 2);
        let yss = sample_noisy(&g, &noise, 3);
        // relabel via the permutation i -> (i + 2) % 6 applied to all replicates
        let perm: Vec<usize> = (0..6).map(|i| (i + 2) % 6).collect();
        let relabel = |m: &AdjacencyMatrix| {
            let pairs: Vec<(usize, usize)> = m
                .edges()
                .iter()
                .map(|&(u, v)| (perm[u], perm[v]))
                .collect();
            AdjacencyMatrix::from_edges(6, &pairs).unwrap()
        };
        let (ry, rys, ryss) = (relabel(&y), relabel(&ys), relabel(&yss));
        assert_eq!(u1_hat(&y), u1_hat(&ry));
        assert_eq!(u2_hat(&y, &ys).unwrap(), u2_hat(&ry, &rys).unwrap());
        assert_eq!(
            u3_hat(&y, &ys, &yss).unwrap(),
            u3_hat(&ry, &rys, &ryss).unwrap()
        );
    }
}
