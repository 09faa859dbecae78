//! Adjacency matrices, the edge-flip noise model, raw subgraph counts and the
//! dual-model construction.
//!
//! The observation model: given a true adjacency matrix `A` and rates
//! `(alpha, beta)`, each vertex pair is observed independently with
//! `P(Y=1 | A=0) = alpha` (spurious edge) and `P(Y=0 | A=1) = beta`
//! (missed edge).

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Symmetric binary adjacency matrix with zero diagonal.
///
/// Immutable after construction; all mutation happens inside builders, so a
/// value can be shared freely across threads.
#[derive(Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    p: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for AdjacencyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AdjacencyMatrix(p={}, edges={})", self.p, self.edge_count())
    }
}

impl AdjacencyMatrix {
    /// Empty graph on `p >= 2` vertices.
    pub fn zeros(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput(format!(
                "adjacency matrix needs at least 2 vertices, got {p}"
            )));
        }
        Ok(Self {
            p,
            data: vec![0; p * p],
        })
    }

    /// Complete graph on `p` vertices.
    pub fn complete(p: usize) -> Result<Self> {
        let mut g = Self::zeros(p)?;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    g.data[i * p + j] = 1;
                }
            }
        }
        Ok(g)
    }

    /// Graph from an undirected edge list; rejects self-loops, out-of-range
    /// vertices and duplicate pairs.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::zeros(p)?;
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if u >= p || v >= p {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) out of range for p={p}"
                )));
            }
            if g.data[u * p + v] == 1 {
                return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
            }
            g.data[u * p + v] = 1;
            g.data[v * p + u] = 1;
        }
        Ok(g)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of unordered vertex pairs `N = p(p-1)/2`.
    pub fn n_pairs(&self) -> usize {
        self.p * (self.p - 1) / 2
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.p + j]
    }

    #[inline]
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.data[i * self.p + j] == 1
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub(crate) fn set_pair(&mut self, i: usize, j: usize, value: u8) {
        debug_assert!(i != j);
        self.data[i * self.p + j] = value;
        self.data[j * self.p + i] = value;
    }

    pub fn edge_count(&self) -> usize {
        self.data.iter().map(|&b| b as usize).sum::<usize>() / 2
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.p)
            .map(|i| self.row(i).iter().map(|&b| b as usize).sum())
            .collect()
    }

    /// Unordered edges `(u, v)` with `u < v`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if self.is_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Off-diagonal complement, used by [`dual_model`].
    pub fn complement(&self) -> Self {
        let p = self.p;
        let mut data = vec![0u8; p * p];
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    data[i * p + j] = 1 - self.data[i * p + j];
                }
            }
        }
        Self { p, data }
    }
}

/// Pair of edge-flip probabilities: `alpha` turns non-edges into observed
/// edges (Type I), `beta` hides true edges (Type II).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub alpha: f64,
    pub beta: f64,
}

impl NoiseModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidInput(format!(
                "error rates must lie in [0, 1], got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `1 - alpha - beta`; all correction formulas divide by a power of it.
    pub fn kappa3(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    /// Correction operations require `alpha + beta < 1` for identifiability.
    pub fn require_correctable(&self) -> Result<()> {
        if self.kappa3().abs() < 1e-10 {
            return Err(Error::DegenerateDenominator {
                context: "1 - alpha - beta",
                value: self.kappa3(),
            });
        }
        Ok(())
    }

    /// Marginal probability of observing an edge at a pair with true value `a`.
    pub fn edge_probability(&self, a: u8) -> f64 {
        if a == 1 {
            1.0 - self.beta
        } else {
            self.alpha
        }
    }
}

/// Edge density: `2/(p(p-1)) * sum_{i<j} A_ij`.
pub fn edge_density(a: &AdjacencyMatrix) -> f64 {
    let p = a.p() as f64;
    2.0 * a.edge_count() as f64 / (p * (p - 1.0))
}

/// Number of two-stars (connected triples, open and closed):
/// `sum_i d_i (d_i - 1) / 2`.
pub fn count_two_stars(a: &AdjacencyMatrix) -> u64 {
    a.degrees()
        .iter()
        .map(|&d| (d as u64) * (d as u64).saturating_sub(1) / 2)
        .sum()
}

/// Exact triangle count in integer arithmetic (equals `trace(A^3)/6`).
pub fn count_triangles(a: &AdjacencyMatrix) -> u64 {
    let p = a.p();
    let mut count = 0u64;
    for i in 0..p {
        let row_i = a.row(i);
        for j in (i + 1)..p {
            if row_i[j] == 0 {
                continue;
            }
            let row_j = a.row(j);
            let mut common = 0u64;
            for k in (j + 1)..p {
                common += (row_i[k] & row_j[k]) as u64;
            }
            count += common;
        }
    }
    count
}

/// Clustering coefficient `gamma = 3 N_triangle / N_two_star`.
pub fn clustering_coefficient(a: &AdjacencyMatrix) -> Result<f64> {
    let n2 = count_two_stars(a);
    if n2 == 0 {
        return Err(Error::ZeroTwoStars);
    }
    Ok(3.0 * count_triangles(a) as f64 / n2 as f64)
}

/// Draw one noisy replicate of `a`: each unordered pair is flipped
/// independently, edges with probability `beta`, non-edges with `alpha`.
/// Deterministic for a given seed.
pub fn sample_noisy(a: &AdjacencyMatrix, noise: &NoiseModel, rng_seed: u64) -> AdjacencyMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_noisy_with(a, noise, &mut rng)
}

pub(crate) fn sample_noisy_with(
    a: &AdjacencyMatrix,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> AdjacencyMatrix {
    let p = a.p();
    let mut y = AdjacencyMatrix::zeros(p).expect("p validated by input matrix");
    for i in 0..p {
        for j in (i + 1)..p {
            let u: f64 = rng.gen();
            let observed = if a.is_edge(i, j) {
                u >= noise.beta
            } else {
                u < noise.alpha
            };
            if observed {
                y.set_pair(i, j, 1);
            }
        }
    }
    y
}

/// The observationally indistinguishable model `(1-beta, 1-alpha, complement)`.
///
/// Under the dual model every pair has exactly the same marginal probability
/// of being observed as an edge, which is what makes a single noisy network
/// uninformative about the error rates.
pub fn dual_model(a: &AdjacencyMatrix, noise: &NoiseModel) -> (AdjacencyMatrix, NoiseModel) {
    (
        a.complement(),
        NoiseModel {
            alpha: 1.0 - noise.beta,
            beta: 1.0 - noise.alpha,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> AdjacencyMatrix {
        AdjacencyMatrix::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn edge_density_examples() {
        let empty = AdjacencyMatrix::zeros(7).unwrap();
        assert_eq!(edge_density(&empty), 0.0);
        // p=15 with 19 edges has density 0.181 to 3 d.p.
        let mut edges = Vec::new();
        'outer: for i in 0..15 {
            for j in (i + 1)..15 {
                edges.push((i, j));
                if edges.len() == 19 {
                    break 'outer;
                }
            }
        }
        let g = AdjacencyMatrix::from_edges(15, &edges).unwrap();
        assert!((edge_density(&g) - 0.181).abs() < 5e-4);
        // p=15 with 24 edges: 0.2286 to 4 d.p.
        assert!((2.0_f64 * 24.0 / (15.0 * 14.0) - 0.2286).abs() < 5e-5);
    }

    #[test]
    fn two_star_examples() {
        assert_eq!(count_two_stars(&path3()), 1);
        assert_eq!(count_two_stars(&AdjacencyMatrix::complete(4).unwrap()), 12);
        assert_eq!(count_two_stars(&AdjacencyMatrix::zeros(5).unwrap()), 0);
    }

    #[test]
    fn triangle_examples() {
        let tri = AdjacencyMatrix::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(count_triangles(&tri), 1);
        assert_eq!(count_triangles(&AdjacencyMatrix::complete(4).unwrap()), 4);
        // bipartite graphs have no triangles
        let bip =
            AdjacencyMatrix::from_edges(6, &[(0, 3), (0, 4), (1, 3), (1, 5), (2, 4), (2, 5)])
                .unwrap();
        assert_eq!(count_triangles(&bip), 0);
    }

    #[test]
    fn clustering_examples() {
        for p in 3..7 {
            let k = AdjacencyMatrix::complete(p).unwrap();
            assert!((clustering_coefficient(&k).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(clustering_coefficient(&path3()).unwrap(), 0.0);
        assert!(matches!(
            clustering_coefficient(&AdjacencyMatrix::zeros(4).unwrap()),
            Err(Error::ZeroTwoStars)
        ));
        // N_2* = 100, N_tri = 15 gives gamma = 0.45 by definition.
        assert!((3.0_f64 * 15.0 / 100.0 - 0.45).abs() < 1e-15);
    }

    #[test]
    fn noiseless_sampling_is_identity_and_deterministic() {
        let g = AdjacencyMatrix::from_edges(6, &[(0, 1), (2, 3), (4, 5), (1, 2)]).unwrap();
        let clean = NoiseModel::new(0.0, 0.0).unwrap();
        assert_eq!(sample_noisy(&g, &clean, 9), g);
        let noise = NoiseModel::new(0.3, 0.2).unwrap();
        assert_eq!(sample_noisy(&g, &noise, 7), sample_noisy(&g, &noise, 7));
        assert_ne!(sample_noisy(&g, &noise, 7), sample_noisy(&g, &noise, 8));
    }

    #[test]
    fn all_flips_gives_complement() {
        let g = AdjacencyMatrix::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let flip = NoiseModel::new(1.0, 1.0).unwrap();
        assert_eq!(sample_noisy(&g, &flip, 3), g.complement());
    }

    #[test]
    fn empirical_flip_frequencies() {
        // >= 1e5 pair draws; empirical alpha and beta within 4 standard errors.
        let g = AdjacencyMatrix::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let noise = NoiseModel::new(0.05, 0.15).unwrap();
        let reps = 40_000usize; // 3 edges + 3 non-edges per replicate
        let (mut miss, mut spurious) = (0u64, 0u64);
        for s in 0..reps {
            let y = sample_noisy(&g, &noise, s as u64);
            for i in 0..4 {
                for j in (i + 1)..4 {
                    match (g.is_edge(i, j), y.is_edge(i, j)) {
                        (true, false) => miss += 1,
                        (false, true) => spurious += 1,
                        _ => {}
                    }
                }
            }
        }
        let n = (3 * reps) as f64;
        let beta_hat = miss as f64 / n;
        let alpha_hat = spurious as f64 / n;
        assert!((beta_hat - 0.15).abs() < 4.0 * (0.15f64 * 0.85 / n).sqrt());
        assert!((alpha_hat - 0.05).abs() < 4.0 * (0.05f64 * 0.95 / n).sqrt());
    }

    #[test]
    fn dual_model_involution_and_marginals() {
        let g = AdjacencyMatrix::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let noise = NoiseModel::new(0.05, 0.15).unwrap();
        let (gd, nd) = dual_model(&g, &noise);
        assert!((nd.alpha - 0.85).abs() < 1e-15 && (nd.beta - 0.95).abs() < 1e-15);
        let (gdd, ndd) = dual_model(&gd, &nd);
        assert_eq!(gdd, g);
        assert!((ndd.alpha - noise.alpha).abs() < 1e-15);
        assert!((ndd.beta - noise.beta).abs() < 1e-15);
        // identical per-pair Bernoulli parameters (exact identity)
        for i in 0..4 {
            for j in (i + 1)..4 {
                let pm = noise.edge_probability(g.get(i, j));
                let pd = nd.edge_probability(gd.get(i, j));
                assert!((pm - pd).abs() < 1e-15);
            }
        }
        // empty graph dualizes to the complete graph
        let (dual, _) = dual_model(&AdjacencyMatrix::zeros(5).unwrap(), &noise);
        assert_eq!(dual, AdjacencyMatrix::complete(5).unwrap());
    }

    #[test]
    fn triad_counts_agree_with_exhaustive_enumeration() {
        use proptest::prelude::*;
        proptest!(|(p in 3usize..=8, seed in 0u64..300)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut g = AdjacencyMatrix::zeros(p).unwrap();
            for i in 0..p {
                for j in (i + 1)..p {
                    if rng.gen::<f64>() < 0.5 {
                        g.set_pair(i, j, 1);
                    }
                }
            }
            let mut stars = 0u64;
            let mut tris = 0u64;
            for i in 0..p {
                for j in 0..p {
                    for k in (j + 1)..p {
                        if i == j || i == k {
                            continue;
                        }
                        // connected triple centered at i
                        if g.is_edge(i, j) && g.is_edge(i, k) {
                            stars += 1;
                            if g.is_edge(j, k) && i < j {
                                tris += 1;
                            }
                        }
                    }
                }
            }
            prop_assert_eq!(count_two_stars(&g), stars);
            prop_assert_eq!(count_triangles(&g), tris);
        });
    }

    #[test]
    fn expected_edge_count_under_noise() {
        // 19 edges at p=15 with alpha=.05, beta=.15: expected 20.45 observed.
        let mut edges = Vec::new();
        'outer: for i in 0..15 {
            for j in (i + 1)..15 {
                edges.push((i, j));
                if edges.len() == 19 {
                    break 'outer;
                }
            }
        }
        let g = AdjacencyMatrix::from_edges(15, &edges).unwrap();
        let noise = NoiseModel::new(0.05, 0.15).unwrap();
        let reps = 100_000u64;
        let total: u64 = (0..reps)
            .map(|s| sample_noisy(&g, &noise, s).edge_count() as u64)
            .sum();
        let mean = total as f64 / reps as f64;
        assert!(
            (mean - 20.45).abs() < 0.05,
            "mean observed edges {mean} not within 0.05 of 20.45"
        );
    }
}
