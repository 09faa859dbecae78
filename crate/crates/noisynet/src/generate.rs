//! Ground-truth generator: random graphs constrained to an exact edge count,
//! two-star count and triangle count.
//!
//! The search runs in two phases. Phase 1 places the exact number of edges
//! uniformly at random. Phase 2 proposes single-edge relocations (delete a
//! random present edge, insert a random absent pair), which preserve the edge
//! count but can change the degree sequence and hence move the two-star count
//! `sum_i C(d_i, 2)`. A proposal is accepted when the lexicographic distance
//! `(|N_2* - target|, |N_tri - target|)` does not increase; worsening moves
//! are accepted with probability `exp(-delta/T)` under geometric cooling.

use crate::error::{Error, Result};
use crate::graph::{count_triangles, count_two_stars, AdjacencyMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exact structural targets for [`generate_constrained`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GraphTargets {
    pub p: usize,
    pub edge_count: usize,
    pub two_star_count: u64,
    pub triangle_count: u64,
}

impl GraphTargets {
    pub fn new(p: usize, edge_count: usize, two_star_count: u64, triangle_count: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("need p >= 2, got {p}")));
        }
        let max_edges = p * (p - 1) / 2;
        if edge_count > max_edges {
            return Err(Error::InvalidInput(format!(
                "edge count {edge_count} exceeds p(p-1)/2 = {max_edges}"
            )));
        }
        if two_star_count < 3 * triangle_count {
            return Err(Error::InvalidInput(format!(
                "two-star count {two_star_count} below 3 * triangle count {}; every triangle contains 3 two-stars",
                3 * triangle_count
            )));
        }
        Ok(Self {
            p,
            edge_count,
            two_star_count,
            triangle_count,
        })
    }

    /// Edge count from a density: `floor(delta * p(p-1)/2)`.
    pub fn from_density(p: usize, delta: f64, two_star_count: u64, triangle_count: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidInput(format!("density {delta} outside [0, 1]")));
        }
        let edges = (delta * (p * (p - 1) / 2) as f64).floor() as usize;
        Self::new(p, edges, two_star_count, triangle_count)
    }
}

pub const DEFAULT_MAX_PROPOSALS: u64 = 5_000_000;

/// Build a graph meeting `targets` exactly, or report the best distance
/// reached. Deterministic for a given seed; the output is re-verified with
/// the counting operations before being returned.
pub fn generate_constrained(
    targets: &GraphTargets,
    rng_seed: u64,
    max_iters: u64,
) -> Result<AdjacencyMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let p = targets.p;
    let n_pairs = p * (p - 1) / 2;

    let mut a = random_with_edges(p, targets.edge_count, &mut rng)?;
    let mut degrees = a.degrees();
    let mut n2 = count_two_stars(&a) as i64;
    let mut n3 = count_triangles(&a) as i64;
    let t2 = targets.two_star_count as i64;
    let t3 = targets.triangle_count as i64;
    let mut edges = a.edges();

    let mut gap2 = (n2 - t2).unsigned_abs();
    let mut gap3 = (n3 - t3).unsigned_abs();
    let mut temperature = 5.0f64;
    let mut proposals = 0u64;

    while (gap2, gap3) != (0, 0) && proposals < max_iters {
        if edges.is_empty() || edges.len() == n_pairs {
            // no relocation possible
            break;
        }
        proposals += 1;
        temperature *= 0.995;

        let edge_idx = rng.gen_range(0..edges.len());
        let (u, v) = edges[edge_idx];
        // random absent pair; present edges (including (u, v)) are rejected
        let (x, y) = loop {
            let x = rng.gen_range(0..p);
            let y = rng.gen_range(0..p);
            if x != y && !a.is_edge(x, y) {
                break if x < y { (x, y) } else { (y, x) };
            }
        };

        // remove (u, v), then evaluate the insertion of (x, y)
        let mut dn2 = -((degrees[u] - 1) as i64) - ((degrees[v] - 1) as i64);
        let mut dn3 = -(common_neighbors(&a, u, v) as i64);
        a.set_pair(u, v, 0);
        degrees[u] -= 1;
        degrees[v] -= 1;
        dn2 += degrees[x] as i64 + degrees[y] as i64;
        dn3 += common_neighbors(&a, x, y) as i64;

        let new_gap2 = (n2 + dn2 - t2).unsigned_abs();
        let new_gap3 = (n3 + dn3 - t3).unsigned_abs();

        let mut accept = (new_gap2, new_gap3) <= (gap2, gap3);
        if !accept && temperature > 1e-9 {
            let worsening = (new_gap2 as i64 - gap2 as i64) + (new_gap3 as i64 - gap3 as i64);
            if worsening > 0 {
                accept = rng.gen::<f64>() < (-(worsening as f64) / temperature).exp();
            }
        }

        if accept {
            a.set_pair(x, y, 1);
            degrees[x] += 1;
            degrees[y] += 1;
            edges[edge_idx] = (x, y);
            n2 += dn2;
            n3 += dn3;
            gap2 = new_gap2;
            gap3 = new_gap3;
        } else {
            a.set_pair(u, v, 1);
            degrees[u] += 1;
            degrees[v] += 1;
        }
    }

    if (gap2, gap3) != (0, 0) {
        return Err(Error::TargetNotReached {
            proposals,
            two_star_gap: gap2,
            triangle_gap: gap3,
        });
    }

    // re-verify through the counting operations
    assert_eq!(a.edge_count(), targets.edge_count);
    assert_eq!(count_two_stars(&a), targets.two_star_count);
    assert_eq!(count_triangles(&a), targets.triangle_count);
    Ok(a)
}

/// Uniform graph with an exact edge count (partial Fisher-Yates over pairs).
fn random_with_edges(p: usize, edge_count: usize, rng: &mut impl Rng) -> Result<AdjacencyMatrix> {
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(p * (p - 1) / 2);
    for i in 0..p {
        for j in (i + 1)..p {
            pairs.push((i as u32, j as u32));
        }
    }
    if edge_count > pairs.len() {
        return Err(Error::InvalidInput(format!(
            "edge count {edge_count} exceeds available pairs {}",
            pairs.len()
        )));
    }
    for k in 0..edge_count {
        let pick = rng.gen_range(k..pairs.len());
        pairs.swap(k, pick);
    }
    let edges: Vec<(usize, usize)> = pairs[..edge_count]
        .iter()
        .map(|&(i, j)| (i as usize, j as usize))
        .collect();
    AdjacencyMatrix::from_edges(p, &edges)
}

fn common_neighbors(a: &AdjacencyMatrix, u: usize, v: usize) -> usize {
    a.row(u)
        .iter()
        .zip(a.row(v))
        .map(|(&x, &y)| (x & y) as usize)
        .sum()
}
