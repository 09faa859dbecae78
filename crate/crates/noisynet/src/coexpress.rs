//! Coexpression networks from expression matrices.
//!
//! For each replicate set of sample columns, genes become vertices and an
//! edge is declared between two genes when the Fisher-transformed Pearson
//! correlation of their expression values clears a Bonferroni-corrected
//! two-sided normal threshold: with `n` samples and `g` genes, an edge
//! requires `sqrt(n - 3) |atanh(r)| > Phi^{-1}(1 - alpha_B / 2)` where
//! `alpha_B = fwer / (g(g-1)/2)`.

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::stats::normal_quantile;

/// A genes-by-samples matrix of (log) expression levels, with an optional
/// partition of the sample columns into replicate sets.
#[derive(Debug, Clone)]
pub struct ExpressionMatrix {
    pub genes: Vec<String>,
    pub samples: Vec<String>,
    /// Row-major `genes.len() x samples.len()`; no missing values.
    values: Vec<f64>,
    grouping: Option<Vec<Vec<usize>>>,
}

impl ExpressionMatrix {
    pub fn new(genes: Vec<String>, samples: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if genes.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 genes, got {}",
                genes.len()
            )));
        }
        if values.len() != genes.len() * samples.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                genes.len() * samples.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "expression values must be finite (missing values are rejected, not imputed)"
                    .into(),
            ));
        }
        Ok(Self {
            genes,
            samples,
            values,
            grouping: None,
        })
    }

    pub fn n_genes(&self) -> usize {
        self.genes.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn value(&self, gene: usize, sample: usize) -> f64 {
        self.values[gene * self.samples.len() + sample]
    }

    /// Install a partition of the sample columns into replicate sets.
    pub fn with_grouping(mut self, grouping: Vec<Vec<usize>>) -> Result<Self> {
        let n = self.samples.len();
        let mut seen = vec![false; n];
        if grouping.is_empty() {
            return Err(Error::InvalidInput("grouping must be non-empty".into()));
        }
        for set in &grouping {
            if set.is_empty() {
                return Err(Error::InvalidInput("empty replicate set".into()));
            }
            for &c in set {
                if c >= n {
                    return Err(Error::InvalidInput(format!(
                        "column index {c} out of range (n = {n})"
                    )));
                }
                if seen[c] {
                    return Err(Error::InvalidInput(format!(
                        "column {c} appears in more than one replicate set"
                    )));
                }
                seen[c] = true;
            }
        }
        self.grouping = Some(grouping);
        Ok(self)
    }

    /// The installed grouping, or a single set of all columns.
    pub fn replicate_sets(&self) -> Vec<Vec<usize>> {
        match &self.grouping {
            Some(g) => g.clone(),
            None => vec![(0..self.samples.len()).collect()],
        }
    }
}

/// Per-pair Bonferroni level `fwer / (g(g-1)/2)`.
pub fn bonferroni_level(n_genes: usize, fwer: f64) -> f64 {
    fwer / (n_genes * (n_genes - 1) / 2) as f64
}

/// Build the coexpression network for one replicate set of columns.
pub fn coexpression_network(
    em: &ExpressionMatrix,
    columns: &[usize],
    fwer: f64,
) -> Result<AdjacencyMatrix> {
    let n = columns.len();
    if n <= 3 {
        return Err(Error::InsufficientSamples { n });
    }
    if !(0.0 < fwer && fwer < 1.0) {
        return Err(Error::InvalidInput(format!("fwer {fwer} outside (0, 1)")));
    }
    let g = em.n_genes();
    // center and normalize each gene over the selected columns
    let mut centered = vec![0.0; g * n];
    for gene in 0..g {
        let mut mean = 0.0;
        for (k, &c) in columns.iter().enumerate() {
            let v = em.value(gene, c);
            centered[gene * n + k] = v;
            mean += v;
        }
        mean /= n as f64;
        let mut ss = 0.0;
        for k in 0..n {
            let d = centered[gene * n + k] - mean;
            centered[gene * n + k] = d;
            ss += d * d;
        }
        if ss == 0.0 {
            return Err(Error::ConstantGene {
                gene: em.genes[gene].clone(),
            });
        }
        let norm = ss.sqrt();
        for k in 0..n {
            centered[gene * n + k] /= norm;
        }
    }
    let alpha_b = bonferroni_level(g, fwer);
    let z_crit = normal_quantile(1.0 - alpha_b / 2.0);
    let scale = ((n - 3) as f64).sqrt();
    let mut net = AdjacencyMatrix::zeros(g)?;
    for i in 0..g {
        for j in (i + 1)..g {
            let r: f64 = (0..n)
                .map(|k| centered[i * n + k] * centered[j * n + k])
                .sum();
            // atanh(+-1) is infinite, which always clears the threshold
            let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
            if scale * z.abs() > z_crit {
                net.set_pair(i, j, 1);
            }
        }
    }
    Ok(net)
}

/// One network per replicate set (a single set of all columns if no grouping
/// was installed).
pub fn coexpression_networks(em: &ExpressionMatrix, fwer: f64) -> Result<Vec<AdjacencyMatrix>> {
    em.replicate_sets()
        .iter()
        .map(|set| coexpression_network(em, set, fwer))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_matrix(g: usize, n: usize, seed: u64) -> ExpressionMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(g * n);
        for _ in 0..g * n {
            // Box-Muller
            let u1: f64 = rng.gen::<f64>().max(1e-12);
            let u2: f64 = rng.gen();
            values.push((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos());
        }
        ExpressionMatrix::new(
            (0..g).map(|i| format!("g{i}")).collect(),
            (0..n).map(|i| format!("s{i}")).collect(),
            values,
        )
        .unwrap()
    }

    #[test]
    fn bonferroni_level_matches_reported_value() {
        // g = 153 genes: .05 / 11628 = 4.3e-6
        let a = bonferroni_level(153, 0.05);
        assert!((a - 4.3e-6).abs() < 0.05e-6);
    }

    #[test]
    fn perfectly_correlated_pair_always_connected() {
        let n = 40;
        let mut em = gaussian_matrix(5, n, 7);
        // make gene 1 a copy of gene 0 (r = 1)
        for k in 0..n {
            let v = em.value(0, k);
            em.values[n + k] = v;
        }
        let net = coexpression_network(&em, &(0..n).collect::<Vec<_>>(), 0.05).unwrap();
        assert!(net.is_edge(0, 1));
    }

    #[test]
    fn constant_gene_rejected() {
        let mut em = gaussian_matrix(4, 10, 3);
        for k in 0..10 {
            em.values[2 * 10 + k] = 1.5;
        }
        assert!(matches!(
            coexpression_network(&em, &(0..10).collect::<Vec<_>>(), 0.05),
            Err(Error::ConstantGene { .. })
        ));
    }

    #[test]
    fn too_few_samples_rejected() {
        let em = gaussian_matrix(4, 10, 3);
        assert!(matches!(
            coexpression_network(&em, &[0, 1, 2], 0.05),
            Err(Error::InsufficientSamples { n: 3 })
        ));
    }

    #[test]
    fn grouping_validation() {
        let em = gaussian_matrix(4, 6, 1);
        assert!(em.clone().with_grouping(vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(em.clone().with_grouping(vec![vec![0, 9]]).is_err());
        let grouped = em.with_grouping(vec![vec![0, 2, 4], vec![1, 3, 5]]).unwrap();
        assert_eq!(grouped.replicate_sets().len(), 2);
    }

    #[test]
    fn deterministic_networks() {
        let em = gaussian_matrix(10, 12, 5);
        let a = coexpression_networks(&em, 0.05).unwrap();
        let b = coexpression_networks(&em, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn null_matrices_rarely_produce_edges() {
        // Bonferroni controls the family-wise error rate at fwer
        let runs = 60;
        let mut any_edge = 0;
        for s in 0..runs {
            let em = gaussian_matrix(20, 40, 1000 + s);
            let net = coexpression_network(&em, &(0..40).collect::<Vec<_>>(), 0.05).unwrap();
            if net.edge_count() > 0 {
                any_edge += 1;
            }
        }
        // P(any false edge) <= .05; allow generous slack at 60 runs
        assert!(any_edge <= 9, "false-edge runs: {any_edge}/60");
    }
}
