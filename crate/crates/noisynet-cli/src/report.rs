//! The JSON report document emitted by `noisynet estimate`. Key order is
//! fixed by struct declaration order, so re-running with the same inputs and
//! seed reproduces the report byte for byte.

use noisynet::bootstrap::Interval;
use noisynet::moments::{EstimationMode, MomentTriple, RateEstimate};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Serialize, Clone)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn new(path: &Path, content: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(content.as_bytes());
        Self {
            path: path.display().to_string(),
            sha256: hex::encode(hasher.finalize()),
        }
    }
}

#[derive(Serialize, Clone, Copy)]
pub struct IntervalDoc {
    pub lo: f64,
    pub hi: f64,
}

impl From<Interval> for IntervalDoc {
    fn from(iv: Interval) -> Self {
        Self {
            lo: iv.lo,
            hi: iv.hi,
        }
    }
}

#[derive(Serialize)]
pub struct RateReport {
    pub mode: EstimationMode,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub alpha_clamped: f64,
    pub beta_clamped: f64,
    pub delta_clamped: f64,
    pub out_of_range: bool,
    pub sigma_delta: f64,
    pub ci_delta: IntervalDoc,
    pub variance_route: String,
    pub iterations: Option<usize>,
    /// Row-major covariance of the sqrt(N)-scaled errors, in `cov_order`.
    pub cov_order: Vec<String>,
    pub cov: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub struct PatternReport {
    pub pattern: String,
    pub c_hat: f64,
    pub t_hat: f64,
    pub implied_count: Option<f64>,
    pub ci: Option<IntervalDoc>,
    pub count_ci: Option<IntervalDoc>,
    pub variance_route: String,
}

#[derive(Serialize)]
pub struct ClusteringReport {
    pub gamma_hat: f64,
    pub ci: Option<IntervalDoc>,
}

#[derive(Serialize)]
pub struct MomentsDoc {
    pub u1: f64,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
    pub n_pairs: usize,
}

#[derive(Serialize)]
pub struct EstimateReportDoc {
    pub tool: String,
    pub inputs: Vec<InputFile>,
    pub seed: u64,
    pub ci_level: f64,
    pub moments: MomentsDoc,
    pub rates: RateReport,
    pub patterns: Vec<PatternReport>,
    pub clustering: Option<ClusteringReport>,
    pub bootstrap_b: usize,
    pub warnings: Vec<String>,
}

impl EstimateReportDoc {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        inputs: Vec<InputFile>,
        seed: u64,
        mode: EstimationMode,
        ci_level: f64,
        moments: &MomentTriple,
        est: &RateEstimate,
        patterns: Vec<PatternReport>,
        clustering: Option<ClusteringReport>,
        bootstrap_b: usize,
        warnings: Vec<String>,
    ) -> Self {
        let (ac, bc, dc) = est.clamped();
        let n = est.cov.nrows();
        let cov: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| est.cov[(i, j)]).collect())
            .collect();
        Self {
            tool: format!("noisynet {}", env!("CARGO_PKG_VERSION")),
            inputs,
            seed,
            ci_level,
            moments: MomentsDoc {
                u1: moments.u1,
                u2: moments.u2,
                u3: moments.u3,
                n_pairs: moments.n_pairs,
            },
            rates: RateReport {
                mode,
                alpha: est.alpha,
                beta: est.beta,
                delta: est.delta,
                alpha_clamped: ac,
                beta_clamped: bc,
                delta_clamped: dc,
                out_of_range: est.out_of_range,
                sigma_delta: est.sigma_delta,
                ci_delta: IntervalDoc {
                    lo: est.ci_delta.0,
                    hi: est.ci_delta.1,
                },
                variance_route: "asymptotic".into(),
                iterations: est.iterations,
                cov_order: est.cov_order().iter().map(|s| s.to_string()).collect(),
                cov,
            },
            patterns,
            clustering,
            bootstrap_b,
            warnings,
        }
    }

    /// Flat CSV mirror: `quantity,estimate,lo,hi`.
    pub fn to_csv(&self) -> String {
        let mut rows = vec!["quantity,estimate,lo,hi".to_string()];
        rows.push(format!("alpha,{},,", self.rates.alpha));
        rows.push(format!("beta,{},,", self.rates.beta));
        rows.push(format!(
            "delta,{},{},{}",
            self.rates.delta, self.rates.ci_delta.lo, self.rates.ci_delta.hi
        ));
        for pat in &self.patterns {
            let (lo, hi) = pat
                .ci
                .map(|iv| (iv.lo.to_string(), iv.hi.to_string()))
                .unwrap_or_default();
            rows.push(format!("density:{},{},{lo},{hi}", pat.pattern, pat.c_hat));
            if let Some(count) = pat.implied_count {
                let (lo, hi) = pat
                    .count_ci
                    .map(|iv| (iv.lo.to_string(), iv.hi.to_string()))
                    .unwrap_or_default();
                rows.push(format!("count:{},{count},{lo},{hi}", pat.pattern));
            }
        }
        if let Some(cl) = &self.clustering {
            let (lo, hi) = cl
                .ci
                .map(|iv| (iv.lo.to_string(), iv.hi.to_string()))
                .unwrap_or_default();
            rows.push(format!("clustering,{},{lo},{hi}", cl.gamma_hat));
        }
        rows.join("\n")
    }
}
