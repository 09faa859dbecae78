//! Replicated Monte-Carlo experiments: mean absolute errors, confidence
//! interval coverage and length for the rate/density estimators, at
//! configurable scale, with seed-reproducible reports.

use crate::bootstrap::{joint_covariance, joint_cis};
use crate::error::{Error, Result};
use crate::generate::{generate_constrained, GraphTargets, DEFAULT_MAX_PROPOSALS};
use crate::graph::{edge_density, sample_noisy, AdjacencyMatrix, NoiseModel};
use crate::moments::{
    estimate_all_unknown, estimate_alpha_known, estimate_beta_known, estimate_both_known,
    EstimationMode, MomentTriple, RateEstimate, DEFAULT_ALPHA0, DEFAULT_FP_MAX_ITER,
    DEFAULT_FP_TOL,
};
use crate::pattern::{c_hat, clustering_estimate, SubgraphPattern};
use crate::stats::derive_seed;
use rayon::prelude::*;
use std::time::Instant;

/// One simulation scenario. `bootstrap_b = 0` skips the bootstrap stage
/// (point estimates and the delta interval only).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimulationConfig {
    pub p: usize,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub two_star_target: u64,
    pub triangle_target: u64,
    pub replications: usize,
    pub bootstrap_b: usize,
    pub mode: EstimationMode,
    pub base_seed: u64,
    pub ci_level: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidInput("need at least one replication".into()));
        }
        if !(0.0 < self.ci_level && self.ci_level < 1.0) {
            return Err(Error::InvalidInput(format!(
                "ci_level {} outside (0, 1)",
                self.ci_level
            )));
        }
        NoiseModel::new(self.alpha, self.beta)?;
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidInput(format!(
                "delta {} outside [0, 1]",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn targets(&self) -> Result<GraphTargets> {
        GraphTargets::from_density(self.p, self.delta, self.two_star_target, self.triangle_target)
    }
}

/// Failure tallies: estimation failures (non-convergence, degenerate
/// denominators) and bootstrap failures (no admissible gamma pair).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct FailureCounts {
    pub estimator: usize,
    pub gamma: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.estimator + self.gamma
    }
}

/// Aggregated Monte-Carlo results for one scenario.
///
/// Point-estimate MAEs average over replications where the estimator
/// succeeded; interval coverage and length for the counts and the clustering
/// coefficient additionally require the bootstrap stage to succeed. The
/// respective sample sizes are `n_estimated` and `n_ci`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    /// Realized edge density of the generated ground truth.
    pub true_delta: f64,
    pub true_gamma: f64,
    pub n_estimated: usize,
    pub n_ci: usize,
    pub mae_alpha: f64,
    pub mae_beta: f64,
    pub mae_delta: f64,
    pub mae_n2s: f64,
    pub mae_ntri: f64,
    pub mae_gamma: f64,
    pub rf_delta: f64,
    pub len_delta: f64,
    pub rf_n2s: f64,
    pub len_n2s: f64,
    pub rf_ntri: f64,
    pub len_ntri: f64,
    pub rf_gamma: f64,
    pub len_gamma: f64,
    pub failures: FailureCounts,
    #[serde(skip)]
    pub wall_time: std::time::Duration,
}

pub const CSV_HEADER: &str = "p,beta,delta,N2s,Ntri,gamma,mae_alpha,mae_beta,mae_delta,mae_N2s,mae_Ntri,mae_gamma,rf_delta,len_delta,rf_N2s,len_N2s,rf_Ntri,len_Ntri,rf_gamma,len_gamma,failures";

impl SimulationReport {
    /// One CSV row in the fixed column layout of [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.4},{:.6},{:.6},{:.6},{:.4},{:.4},{:.6},{:.4},{:.6},{:.4},{:.4},{:.4},{:.4},{:.4},{:.6},{}",
            self.config.p,
            self.config.beta,
            self.config.delta,
            self.config.two_star_target,
            self.config.triangle_target,
            self.true_gamma,
            self.mae_alpha,
            self.mae_beta,
            self.mae_delta,
            self.mae_n2s,
            self.mae_ntri,
            self.mae_gamma,
            self.rf_delta,
            self.len_delta,
            self.rf_n2s,
            self.len_n2s,
            self.rf_ntri,
            self.len_ntri,
            self.rf_gamma,
            self.len_gamma,
            self.failures.total()
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RepRecord {
    // estimator stage
    alpha_err: f64,
    beta_err: f64,
    delta_err: f64,
    n2_err: f64,
    n3_err: f64,
    gamma_err: f64,
    delta_covered: bool,
    delta_len: f64,
    have_estimate: bool,
    // bootstrap stage
    n2_covered: bool,
    n2_len: f64,
    n3_covered: bool,
    n3_len: f64,
    gamma_covered: bool,
    gamma_len: f64,
    have_ci: bool,
    fail_estimator: bool,
    fail_gamma: bool,
}

fn estimate_for_mode(
    cfg: &SimulationConfig,
    m: &MomentTriple,
) -> Result<RateEstimate> {
    match cfg.mode {
        EstimationMode::BothUnknown => estimate_all_unknown(
            m,
            DEFAULT_ALPHA0,
            DEFAULT_FP_TOL,
            DEFAULT_FP_MAX_ITER,
            cfg.ci_level,
        ),
        EstimationMode::AlphaKnown => estimate_alpha_known(cfg.alpha, m, cfg.ci_level),
        EstimationMode::BetaKnown => estimate_beta_known(cfg.beta, m, cfg.ci_level),
        EstimationMode::BothKnown => estimate_both_known(cfg.alpha, cfg.beta, m, cfg.ci_level),
    }
}

fn run_replication(
    cfg: &SimulationConfig,
    a: &AdjacencyMatrix,
    true_delta: f64,
    true_gamma: f64,
    rep: usize,
) -> RepRecord {
    let mut rec = RepRecord::default();
    let rep_seed = derive_seed(cfg.base_seed, 1 + rep as u64);
    let noise = NoiseModel {
        alpha: cfg.alpha,
        beta: cfg.beta,
    };
    let y = sample_noisy(a, &noise, derive_seed(rep_seed, 0));
    let n_replicates = match cfg.mode {
        EstimationMode::BothUnknown => 3,
        EstimationMode::AlphaKnown | EstimationMode::BetaKnown => 2,
        EstimationMode::BothKnown => 1,
    };
    let ystar = (n_replicates >= 2).then(|| sample_noisy(a, &noise, derive_seed(rep_seed, 1)));
    let ystarstar = (n_replicates >= 3).then(|| sample_noisy(a, &noise, derive_seed(rep_seed, 2)));

    let reps: Vec<&AdjacencyMatrix> = std::iter::once(&y)
        .chain(ystar.iter())
        .chain(ystarstar.iter())
        .collect();
    let stage = (|| -> Result<(RateEstimate, f64, f64, f64, f64, f64)> {
        let m = MomentTriple::from_replicates(&reps)?;
        let est = estimate_for_mode(cfg, &m)?;
        let (alpha_t, beta_t) = (est.alpha, est.beta);
        let ts = c_hat(&y, &SubgraphPattern::two_star(), alpha_t, beta_t)?;
        let tri = c_hat(&y, &SubgraphPattern::triangle(), alpha_t, beta_t)?;
        let gamma_hat = clustering_estimate(&ts, &tri)?;
        let n2_hat = ts.implied_count.expect("two-star has a count");
        let n3_hat = tri.implied_count.expect("triangle has a count");
        Ok((est, alpha_t, beta_t, n2_hat, n3_hat, gamma_hat))
    })();
    let (est, alpha_t, beta_t, n2_hat, n3_hat, gamma_hat) = match stage {
        Ok(v) => v,
        Err(_) => {
            rec.fail_estimator = true;
            return rec;
        }
    };

    rec.have_estimate = true;
    rec.alpha_err = (est.alpha - cfg.alpha).abs();
    rec.beta_err = (est.beta - cfg.beta).abs();
    rec.delta_err = (est.delta - true_delta).abs();
    rec.n2_err = (n2_hat - cfg.two_star_target as f64).abs();
    rec.n3_err = (n3_hat - cfg.triangle_target as f64).abs();
    rec.gamma_err = (gamma_hat - true_gamma).abs();
    rec.delta_covered = est.ci_delta.0 <= true_delta && true_delta <= est.ci_delta.1;
    rec.delta_len = est.ci_delta.1 - est.ci_delta.0;

    if cfg.bootstrap_b == 0 {
        return rec;
    }

    let ci_stage = (|| -> Result<crate::bootstrap::JointIntervals> {
        let patterns = [SubgraphPattern::two_star(), SubgraphPattern::triangle()];
        let vp = joint_covariance(
            &y,
            &patterns,
            alpha_t,
            beta_t,
            est.delta,
            cfg.mode,
            cfg.bootstrap_b,
            derive_seed(rep_seed, 3),
        )?;
        let ests = vec![
            c_hat(&y, &patterns[0], alpha_t, beta_t)?,
            c_hat(&y, &patterns[1], alpha_t, beta_t)?,
        ];
        joint_cis(&ests, &vp, cfg.p, cfg.ci_level)
    })();
    match ci_stage {
        Ok(cis) => {
            let n2_iv = cis.counts[0].expect("two-star count interval");
            let n3_iv = cis.counts[1].expect("triangle count interval");
            let (_, g_iv) = cis.clustering.expect("two-star precedes triangle");
            rec.have_ci = true;
            rec.n2_covered = n2_iv.contains(cfg.two_star_target as f64);
            rec.n2_len = n2_iv.length();
            rec.n3_covered = n3_iv.contains(cfg.triangle_target as f64);
            rec.n3_len = n3_iv.length();
            rec.gamma_covered = g_iv.contains(true_gamma);
            rec.gamma_len = g_iv.length();
        }
        Err(Error::NoValidGamma { .. }) => {
            rec.fail_gamma = true;
        }
        Err(_) => {
            rec.fail_estimator = true;
        }
    }
    rec
}

/// Run one scenario: a single constrained ground truth is generated from the
/// base seed and reused across all replications; each replication draws its
/// replicates, estimates, and (with `bootstrap_b > 0`) assembles the joint
/// intervals. Replications run in parallel over disjoint derived seeds and
/// are reduced in replication order, so reports are reproducible bit for bit.
pub fn run_scenario(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let targets = cfg.targets()?;
    let a = generate_constrained(&targets, derive_seed(cfg.base_seed, 0), DEFAULT_MAX_PROPOSALS)?;
    let true_delta = edge_density(&a);
    let true_gamma = 3.0 * cfg.triangle_target as f64 / cfg.two_star_target as f64;

    let records: Vec<RepRecord> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, &a, true_delta, true_gamma, rep))
        .collect();

    let mut failures = FailureCounts::default();
    let (mut n_est, mut n_ci) = (0usize, 0usize);
    let mut sums = [0.0f64; 8]; // alpha, beta, delta maes; delta cov, len; n2, n3, gamma maes
    let mut ci_sums = [0.0f64; 6];
    for r in &records {
        if r.fail_estimator {
            failures.estimator += 1;
        }
        if r.fail_gamma {
            failures.gamma += 1;
        }
        if r.have_estimate {
            n_est += 1;
            sums[0] += r.alpha_err;
            sums[1] += r.beta_err;
            sums[2] += r.delta_err;
            sums[3] += r.delta_covered as u8 as f64;
            sums[4] += r.delta_len;
            sums[5] += r.n2_err;
            sums[6] += r.n3_err;
            sums[7] += r.gamma_err;
        }
        if r.have_ci {
            n_ci += 1;
            ci_sums[0] += r.n2_covered as u8 as f64;
            ci_sums[1] += r.n2_len;
            ci_sums[2] += r.n3_covered as u8 as f64;
            ci_sums[3] += r.n3_len;
            ci_sums[4] += r.gamma_covered as u8 as f64;
            ci_sums[5] += r.gamma_len;
        }
    }
    let d_est = n_est.max(1) as f64;
    let d_ci = n_ci.max(1) as f64;
    Ok(SimulationReport {
        config: *cfg,
        true_delta,
        true_gamma,
        n_estimated: n_est,
        n_ci,
        mae_alpha: sums[0] / d_est,
        mae_beta: sums[1] / d_est,
        mae_delta: sums[2] / d_est,
        mae_n2s: sums[5] / d_est,
        mae_ntri: sums[6] / d_est,
        mae_gamma: sums[7] / d_est,
        rf_delta: sums[3] / d_est,
        len_delta: sums[4] / d_est,
        rf_n2s: ci_sums[0] / d_ci,
        len_n2s: ci_sums[1] / d_ci,
        rf_ntri: ci_sums[2] / d_ci,
        len_ntri: ci_sums[3] / d_ci,
        rf_gamma: ci_sums[4] / d_ci,
        len_gamma: ci_sums[5] / d_ci,
        failures,
        wall_time: start.elapsed(),
    })
}

/// Outcome of one grid entry; scenario errors are collected, not fatal.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioOutcome {
    pub config: SimulationConfig,
    pub report: Option<SimulationReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GridReport {
    pub rows: Vec<ScenarioOutcome>,
}

impl GridReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            match (&row.report, &row.error) {
                (Some(rep), _) => out.push_str(&rep.csv_row()),
                (None, Some(err)) => {
                    out.push_str(&format!(
                        "{},{},{},{},{},,,,,,,,,,,,,,,,\"{}\"",
                        row.config.p,
                        row.config.beta,
                        row.config.delta,
                        row.config.two_star_target,
                        row.config.triangle_target,
                        err.replace('"', "'")
                    ));
                }
                (None, None) => unreachable!("outcome must carry a report or an error"),
            }
            out.push('\n');
        }
        out
    }
}

/// Run a list of scenarios; failures are recorded per row.
pub fn run_grid(configs: &[SimulationConfig]) -> Result<GridReport> {
    if configs.is_empty() {
        return Err(Error::InvalidInput("empty scenario list".into()));
    }
    let rows = configs
        .iter()
        .map(|cfg| match run_scenario(cfg) {
            Ok(report) => ScenarioOutcome {
                config: *cfg,
                report: Some(report),
                error: None,
            },
            Err(e) => ScenarioOutcome {
                config: *cfg,
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(GridReport { rows })
}

/// The 16-row simulation grid (`alpha = 0.05`, both rates unknown):
/// `p in {30, 50, 100, 200} x beta in {.05, .20} x delta in {.1, .2}` with
/// the matching two-star/triangle targets.
pub fn standard_grid(replications: usize, bootstrap_b: usize, base_seed: u64) -> Vec<SimulationConfig> {
    let entries: [(usize, f64, f64, u64, u64); 16] = [
        (30, 0.05, 0.1, 100, 15),
        (30, 0.20, 0.1, 100, 15),
        (30, 0.05, 0.2, 430, 40),
        (30, 0.20, 0.2, 430, 40),
        (50, 0.05, 0.1, 1260, 50),
        (50, 0.20, 0.1, 1260, 50),
        (50, 0.05, 0.2, 2300, 140),
        (50, 0.20, 0.2, 2300, 140),
        (100, 0.05, 0.1, 5000, 150),
        (100, 0.20, 0.1, 5000, 150),
        (100, 0.05, 0.2, 22000, 1800),
        (100, 0.20, 0.2, 22000, 1800),
        (200, 0.05, 0.1, 40000, 1500),
        (200, 0.20, 0.1, 40000, 1500),
        (200, 0.05, 0.2, 155000, 10000),
        (200, 0.20, 0.2, 155000, 10000),
    ];
    entries
        .iter()
        .enumerate()
        .map(|(i, &(p, beta, delta, n2, n3))| SimulationConfig {
            p,
            delta,
            alpha: 0.05,
            beta,
            two_star_target: n2,
            triangle_target: n3,
            replications,
            bootstrap_b,
            mode: EstimationMode::BothUnknown,
            base_seed: derive_seed(base_seed, 100 + i as u64),
            ci_level: 0.95,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimulationConfig {
        SimulationConfig {
            p: 30,
            delta: 0.1,
            alpha: 0.05,
            beta: 0.05,
            two_star_target: 100,
            triangle_target: 15,
            replications: 30,
            bootstrap_b: 40,
            mode: EstimationMode::BothUnknown,
            base_seed: 4242,
            ci_level: 0.95,
        }
    }

    #[test]
    fn scenario_reports_are_deterministic() {
        let cfg = small_cfg();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn noiseless_known_rates_have_zero_mae() {
        let cfg = SimulationConfig {
            alpha: 0.0,
            beta: 0.0,
            mode: EstimationMode::BothKnown,
            replications: 10,
            bootstrap_b: 0,
            ..small_cfg()
        };
        let rep = run_scenario(&cfg).unwrap();
        assert_eq!(rep.mae_delta, 0.0);
        assert!(rep.mae_n2s < 1e-10);
        assert!(rep.mae_ntri < 1e-10);
        assert!(rep.mae_gamma < 1e-10);
        assert_eq!(rep.failures.total(), 0);
    }

    #[test]
    fn grid_single_and_csv_schema() {
        let cfg = SimulationConfig {
            replications: 5,
            bootstrap_b: 0,
            ..small_cfg()
        };
        let grid = run_grid(&[cfg]).unwrap();
        assert_eq!(grid.rows.len(), 1);
        let csv = grid.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn grid_collects_errors() {
        // infeasible targets: 2 edges cannot make 4 two-stars
        let bad = SimulationConfig {
            p: 10,
            delta: 0.044,
            two_star_target: 400,
            triangle_target: 0,
            replications: 2,
            bootstrap_b: 0,
            ..small_cfg()
        };
        let grid = run_grid(&[bad]).unwrap();
        assert!(grid.rows[0].report.is_none());
        assert!(grid.rows[0].error.is_some());
        let csv = grid.to_csv();
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn standard_grid_has_16_rows() {
        let grid = standard_grid(500, 500, 1);
        assert_eq!(grid.len(), 16);
        assert!(grid.iter().all(|c| c.alpha == 0.05));
    }
}
