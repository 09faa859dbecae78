//! Subgraph patterns and noise-corrected density estimation.
//!
//! A pattern is a list of `k` vertex-pair slots over `m` abstract labels,
//! with a flag `tau_l` per slot selecting an edge (`tau = 1`) or non-edge
//! (`tau = 0`) factor. The index set `V` ranges over all injective
//! assignments of labels to vertices, so `|V| = p(p-1)...(p-m+1)`.
//!
//! The density of a pattern in a graph `A` averages
//! `prod_l A^{tau_l} (1-A)^{1-tau_l}` over `V`; the convention `0^0 = 1`
//! holds by construction because each factor is read off as either `x` or
//! `1 - x` rather than exponentiated. The noise-corrected estimator replaces
//! each factor with `phi_l(Y) = (Y - alpha)^{tau_l} (1 - beta - Y)^{1-tau_l}`
//! and divides by `(1 - alpha - beta)^k`.
//!
//! Edge, two-star (any 2-slot chain) and any 3-cycle shape (triangle, open
//! triple) run on `O(p^2)`/`O(p^3)` matrix identities; everything else goes
//! through explicit enumeration guarded by a work budget.

use crate::dense::SqMat;
use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;

pub const DEFAULT_WORK_BUDGET: u64 = 1_000_000_000;

/// Catalog tag for a pattern. `Path(k)` and `Cycle(k)` are by edge count:
/// `Path(2)` is the two-star shape, `Cycle(3)` the triangle shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Edge,
    TwoStar,
    OpenTriple,
    Triangle,
    Path(usize),
    Cycle(usize),
    Custom,
}

impl std::fmt::Display for PatternKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PatternKind::Edge => write!(f, "edge"),
            PatternKind::TwoStar => write!(f, "two-star"),
            PatternKind::OpenTriple => write!(f, "open-triple"),
            PatternKind::Triangle => write!(f, "triangle"),
            PatternKind::Path(k) => write!(f, "path:{k}"),
            PatternKind::Cycle(k) => write!(f, "cycle:{k}"),
            PatternKind::Custom => write!(f, "custom"),
        }
    }
}

/// A subgraph template: `k` edge slots over `m` vertex labels with
/// per-slot edge/non-edge flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphPattern {
    kind: PatternKind,
    slots: Vec<(usize, usize)>,
    taus: Vec<bool>,
    num_labels: usize,
    work_budget: u64,
}

impl SubgraphPattern {
    /// Single edge slot (`k = 1`, `tau = 1`).
    pub fn edge() -> Self {
        Self::build(PatternKind::Edge, vec![(0, 1), ], vec![true]).expect("static pattern")
    }

    /// Two edges through a shared center (`k = 2`, ordered index set of size
    /// `p(p-1)(p-2)`; counts open and closed triples).
    pub fn two_star() -> Self {
        Self::build(PatternKind::TwoStar, vec![(0, 1), (1, 2)], vec![true, true])
            .expect("static pattern")
    }

    /// Two-star with the closing pair required absent (`tau = (1, 1, 0)`).
    pub fn open_triple() -> Self {
        Self::build(
            PatternKind::OpenTriple,
            vec![(0, 1), (1, 2), (2, 0)],
            vec![true, true, false],
        )
        .expect("static pattern")
    }

    /// Closed triple (`k = 3`, all edges).
    pub fn triangle() -> Self {
        Self::build(
            PatternKind::Triangle,
            vec![(0, 1), (1, 2), (2, 0)],
            vec![true, true, true],
        )
        .expect("static pattern")
    }

    /// Path of `k` edges through `k + 1` distinct vertices.
    pub fn path(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("path length must be positive".into()));
        }
        let slots = (0..k).map(|l| (l, l + 1)).collect();
        Self::build(PatternKind::Path(k), slots, vec![true; k])
    }

    /// Cycle of `k >= 3` edges through `k` distinct vertices.
    pub fn cycle(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidInput(format!(
                "cycle length must be at least 3, got {k}"
            )));
        }
        let slots = (0..k).map(|l| (l, (l + 1) % k)).collect();
        Self::build(PatternKind::Cycle(k), slots, vec![true; k])
    }

    /// Arbitrary pattern from slot label pairs and per-slot flags.
    pub fn custom(slots: Vec<(usize, usize)>, taus: Vec<bool>) -> Result<Self> {
        Self::build(PatternKind::Custom, slots, taus)
    }

    fn build(kind: PatternKind, slots: Vec<(usize, usize)>, taus: Vec<bool>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidInput("pattern needs at least one slot".into()));
        }
        if slots.len() != taus.len() {
            return Err(Error::InvalidInput(format!(
                "{} slots but {} tau flags",
                slots.len(),
                taus.len()
            )));
        }
        let mut max_label = 0;
        for (a, b) in &slots {
            if a == b {
                return Err(Error::InvalidInput(format!(
                    "slot endpoints must be distinct labels, got ({a}, {b})"
                )));
            }
            max_label = max_label.max(*a).max(*b);
        }
        let num_labels = max_label + 1;
        let mut seen = vec![false; num_labels];
        for (a, b) in &slots {
            seen[*a] = true;
            seen[*b] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidInput(
                "vertex labels must be contiguous from 0".into(),
            ));
        }
        for (i, si) in slots.iter().enumerate() {
            for sj in slots.iter().skip(i + 1) {
                let shared = [si.0, si.1]
                    .iter()
                    .filter(|l| **l == sj.0 || **l == sj.1)
                    .count();
                if shared > 1 {
                    return Err(Error::InvalidInput(format!(
                        "slots {si:?} and {sj:?} share both labels"
                    )));
                }
            }
        }
        Ok(Self {
            kind,
            slots,
            taus,
            num_labels,
            work_budget: DEFAULT_WORK_BUDGET,
        })
    }

    /// Parse a catalog name: `edge`, `two-star`, `triangle`, `open-triple`,
    /// `path:k`, `cycle:k`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "edge" => Ok(Self::edge()),
            "two-star" | "two_star" => Ok(Self::two_star()),
            "triangle" => Ok(Self::triangle()),
            "open-triple" | "open_triple" => Ok(Self::open_triple()),
            _ => {
                if let Some(k) = name.strip_prefix("path:") {
                    let k: usize = k.parse().map_err(|_| {
                        Error::InvalidInput(format!("bad path length in {name:?}"))
                    })?;
                    Self::path(k)
                } else if let Some(k) = name.strip_prefix("cycle:") {
                    let k: usize = k.parse().map_err(|_| {
                        Error::InvalidInput(format!("bad cycle length in {name:?}"))
                    })?;
                    Self::cycle(k)
                } else {
                    Err(Error::InvalidInput(format!(
                        "unknown pattern {name:?}; expected edge, two-star, triangle, open-triple, path:k or cycle:k"
                    )))
                }
            }
        }
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    /// Number of edge slots `k`.
    pub fn k(&self) -> usize {
        self.slots.len()
    }

    pub fn taus(&self) -> &[bool] {
        &self.taus
    }

    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    /// Number of distinct vertex labels `m`.
    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    /// Cap on slot visits for enumerated (non-catalog) patterns.
    pub fn with_work_budget(mut self, budget: u64) -> Self {
        self.work_budget = budget;
        self
    }

    /// `|V| = p (p-1) ... (p-m+1)` as a float.
    pub fn cardinality_v(&self, p: usize) -> Result<f64> {
        if p < self.num_labels {
            return Err(Error::PatternTooLarge {
                needed: self.num_labels,
                available: p,
            });
        }
        let mut v: u128 = 1;
        for i in 0..self.num_labels {
            v *= (p - i) as u128;
        }
        Ok(v as f64)
    }
}

/// Density estimate for one pattern: `c_hat = t_hat / (1-alpha-beta)^k`.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub pattern: SubgraphPattern,
    pub c_hat: f64,
    pub t_hat: f64,
    pub alpha_used: f64,
    pub beta_used: f64,
    pub cardinality_v: f64,
    /// Count implied by the density, present for two-star and triangle kinds.
    pub implied_count: Option<f64>,
}

/// True density of `pattern` in `a`, eq-style average over the ordered
/// index set.
pub fn density_true(a: &AdjacencyMatrix, pattern: &SubgraphPattern) -> Result<f64> {
    // with alpha = beta = 0 the corrected estimator reduces to the plain
    // density of the observed graph
    let ctx = PatternCtx::new(a, pattern, None, 0.0, 0.0)?;
    Ok(ctx.t())
}

/// Noise-corrected density estimate from one observed network with plug-in
/// rates `(alpha, beta)`.
pub fn c_hat(
    y: &AdjacencyMatrix,
    pattern: &SubgraphPattern,
    alpha: f64,
    beta: f64,
) -> Result<DensityEstimate> {
    let kappa3 = 1.0 - alpha - beta;
    if kappa3.abs() < 1e-10 {
        return Err(Error::DegenerateDenominator {
            context: "1 - alpha - beta",
            value: kappa3,
        });
    }
    let ctx = PatternCtx::new(y, pattern, None, alpha, beta)?;
    let t_hat = ctx.t();
    let c = t_hat / kappa3.powi(pattern.k() as i32);
    let cardinality_v = pattern.cardinality_v(y.p())?;
    let implied_count = match pattern.kind() {
        PatternKind::TwoStar => Some(c * cardinality_v / 2.0),
        PatternKind::Triangle => Some(c * cardinality_v / 6.0),
        _ => None,
    };
    Ok(DensityEstimate {
        pattern: pattern.clone(),
        c_hat: c,
        t_hat,
        alpha_used: alpha,
        beta_used: beta,
        cardinality_v,
        implied_count,
    })
}

/// Count implied by a two-star or triangle density at graph size `p`:
/// `C * p(p-1)(p-2) / 2` and `C * p(p-1)(p-2) / 6` respectively.
pub fn implied_count(est: &DensityEstimate, p: usize) -> Result<f64> {
    let fff = (p * (p - 1) * (p - 2)) as f64;
    match est.pattern.kind() {
        PatternKind::TwoStar => Ok(est.c_hat * fff / 2.0),
        PatternKind::Triangle => Ok(est.c_hat * fff / 6.0),
        kind => Err(Error::UnsupportedKind(kind.to_string())),
    }
}

/// Plug-in clustering coefficient `gamma = C_triangle / C_two_star`
/// (equal to `3 N_tri / N_2*` through the density-count relations).
pub fn clustering_estimate(
    two_star: &DensityEstimate,
    triangle: &DensityEstimate,
) -> Result<f64> {
    if two_star.pattern.kind() != PatternKind::TwoStar {
        return Err(Error::UnsupportedKind(two_star.pattern.kind().to_string()));
    }
    if triangle.pattern.kind() != PatternKind::Triangle {
        return Err(Error::UnsupportedKind(triangle.pattern.kind().to_string()));
    }
    if two_star.c_hat == 0.0 {
        return Err(Error::ZeroTwoStars);
    }
    Ok(triangle.c_hat / two_star.c_hat)
}

// ---------------------------------------------------------------------------
// computation kernels
// ---------------------------------------------------------------------------

enum Shape {
    /// k = 1
    Single,
    /// k = 2 sharing one label; slot order (outer, shared), (shared, outer)
    Chain2,
    /// k = 3 forming a cycle over 3 labels, slots reordered so that
    /// consecutive slots share a label
    Cycle3,
    Generic,
}

/// Precomputed state for evaluating the pattern statistics on one network:
/// the plain average `t`, the leave-one-out averages `L_j` and, per bootstrap
/// replicate, the residual-weighted sums `SR_j`.
pub(crate) struct PatternCtx<'a> {
    pattern: &'a SubgraphPattern,
    taus: Vec<bool>,
    shape: Shape,
    /// slot order used by the fast paths (indices into `pattern.slots`)
    order: Vec<usize>,
    mats: Vec<SqMat>,
    /// pairwise products for the Cycle3 residual identities
    cycle_products: Vec<SqMat>,
    y: &'a AdjacencyMatrix,
    alpha: f64,
    beta: f64,
    cardinality: f64,
    t: f64,
    leave_one_out: Vec<f64>,
}

impl<'a> PatternCtx<'a> {
    /// `taus_override` substitutes the flag vector (used by the h-vector
    /// plug-ins, which need densities with one slot forced to an edge).
    pub fn new(
        y: &'a AdjacencyMatrix,
        pattern: &'a SubgraphPattern,
        taus_override: Option<&[bool]>,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let taus: Vec<bool> = match taus_override {
            Some(t) => {
                if t.len() != pattern.k() {
                    return Err(Error::ShapeMismatch(format!(
                        "tau override has {} flags for {} slots",
                        t.len(),
                        pattern.k()
                    )));
                }
                t.to_vec()
            }
            None => pattern.taus.clone(),
        };
        let cardinality = pattern.cardinality_v(y.p())?;
        let (shape, order) = classify(&pattern.slots);

        let mut ctx = PatternCtx {
            pattern,
            taus,
            shape,
            order,
            mats: Vec::new(),
            cycle_products: Vec::new(),
            y,
            alpha,
            beta,
            cardinality,
            t: 0.0,
            leave_one_out: Vec::new(),
        };
        ctx.prepare()?;
        Ok(ctx)
    }

    fn slot_matrix(&self, slot: usize) -> SqMat {
        let (alpha, beta) = (self.alpha, self.beta);
        if self.taus[slot] {
            SqMat::from_graph(self.y, |x| x - alpha)
        } else {
            SqMat::from_graph(self.y, |x| 1.0 - beta - x)
        }
    }

    fn prepare(&mut self) -> Result<()> {
        let p = self.y.p() as f64;
        let n_ord = p * (p - 1.0);
        match self.shape {
            Shape::Single => {
                let m = self.slot_matrix(0);
                self.t = m.total() / n_ord;
                self.leave_one_out = vec![1.0];
                self.mats = vec![m];
            }
            Shape::Chain2 => {
                let m0 = self.slot_matrix(self.order[0]);
                let m1 = self.slot_matrix(self.order[1]);
                let raw = m0.chain2(&m1);
                self.t = raw / self.cardinality;
                // leave-one-out in slot order, mapped back to pattern order
                let mut loo = vec![0.0; 2];
                loo[self.order[0]] = m1.total() / n_ord;
                loo[self.order[1]] = m0.total() / n_ord;
                self.leave_one_out = loo;
                self.mats = vec![m0, m1];
            }
            Shape::Cycle3 => {
                let m0 = self.slot_matrix(self.order[0]);
                let m1 = self.slot_matrix(self.order[1]);
                let m2 = self.slot_matrix(self.order[2]);
                // t = trace(M0 M1 M2) / |V|
                let p01 = m0.matmul(&m1);
                let p12 = m1.matmul(&m2);
                let p20 = m2.matmul(&m0);
                self.t = p01.dot(&m2) / self.cardinality;
                let mut loo = vec![0.0; 3];
                loo[self.order[0]] = m1.chain2(&m2) / self.cardinality;
                loo[self.order[1]] = m2.chain2(&m0) / self.cardinality;
                loo[self.order[2]] = m0.chain2(&m1) / self.cardinality;
                self.leave_one_out = loo;
                // residual identities: SR for slot order[0] needs M1 M2, etc.
                self.cycle_products = vec![p12, p20, p01];
                self.mats = vec![m0, m1, m2];
            }
            Shape::Generic => {
                let mats: Vec<SqMat> = (0..self.pattern.k()).map(|l| self.slot_matrix(l)).collect();
                self.mats = mats;
                let sums = self.enumerate(None)?;
                self.t = sums.t / self.cardinality;
                self.leave_one_out = sums
                    .leave_one_out
                    .iter()
                    .map(|v| v / self.cardinality)
                    .collect();
            }
        }
        Ok(())
    }

    /// `|V|^{-1} sum_V prod_l phi_l`.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `L_j = |V|^{-1} sum_V prod_{l != j} phi_l` per slot.
    pub fn leave_one_out(&self) -> &[f64] {
        &self.leave_one_out
    }

    /// `SR_j = |V|^{-1} sum_V R_{slot j} prod_{l != j} phi_l` for a
    /// symmetric zero-diagonal residual matrix `R`.
    pub fn residual_sums(&self, r: &SqMat) -> Result<Vec<f64>> {
        let p = self.y.p() as f64;
        let n_ord = p * (p - 1.0);
        match self.shape {
            Shape::Single => Ok(vec![r.total() / n_ord]),
            Shape::Chain2 => {
                let mut out = vec![0.0; 2];
                out[self.order[0]] = r.chain2(&self.mats[1]) / self.cardinality;
                out[self.order[1]] = self.mats[0].chain2(r) / self.cardinality;
                Ok(out)
            }
            Shape::Cycle3 => {
                let mut out = vec![0.0; 3];
                for pos in 0..3 {
                    // tr(R M_{pos+1} M_{pos+2}); symmetric R lets the
                    // transpose collapse to an elementwise product
                    out[self.order[pos]] = r.dot(&self.cycle_products[pos]) / self.cardinality;
                }
                Ok(out)
            }
            Shape::Generic => {
                let sums = self.enumerate(Some(r))?;
                Ok(sums
                    .residual
                    .expect("requested residual sums")
                    .iter()
                    .map(|v| v / self.cardinality)
                    .collect())
            }
        }
    }

    fn enumerate(&self, residual: Option<&SqMat>) -> Result<RawSums> {
        let p = self.y.p();
        let m = self.pattern.num_labels;
        let k = self.pattern.k();
        let mut sums = RawSums {
            t: 0.0,
            leave_one_out: vec![0.0; k],
            residual: residual.map(|_| vec![0.0; k]),
        };
        let mut assign = vec![0usize; m];
        let mut factors = vec![0.0; k];
        let mut budget = self.pattern.work_budget;
        self.recurse(0, p, &mut assign, &mut factors, residual, &mut sums, &mut budget)?;
        Ok(sums)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        depth: usize,
        p: usize,
        assign: &mut [usize],
        factors: &mut [f64],
        residual: Option<&SqMat>,
        sums: &mut RawSums,
        budget: &mut u64,
    ) -> Result<()> {
        let m = self.pattern.num_labels;
        if depth == m {
            let k = self.pattern.k();
            // prefix/suffix products give all leave-one-out terms in O(k)
            let mut prefix = vec![1.0; k + 1];
            for l in 0..k {
                prefix[l + 1] = prefix[l] * factors[l];
            }
            let mut suffix = vec![1.0; k + 1];
            for l in (0..k).rev() {
                suffix[l] = suffix[l + 1] * factors[l];
            }
            sums.t += prefix[k];
            for j in 0..k {
                let loo = prefix[j] * suffix[j + 1];
                sums.leave_one_out[j] += loo;
                if let (Some(r), Some(acc)) = (residual, sums.residual.as_mut()) {
                    let (a, b) = self.pattern.slots[j];
                    acc[j] += r.get(assign[a], assign[b]) * loo;
                }
            }
            return Ok(());
        }
        for v in 0..p {
            if assign[..depth].contains(&v) {
                continue;
            }
            assign[depth] = v;
            // evaluate slots whose endpoints are now all assigned; a zero
            // factor still contributes to the other slots' leave-one-out
            // products, so no pruning here
            for (l, &(a, b)) in self.pattern.slots.iter().enumerate() {
                if a.max(b) == depth {
                    if *budget == 0 {
                        return Err(Error::WorkBudgetExceeded {
                            budget: self.pattern.work_budget,
                        });
                    }
                    *budget -= 1;
                    factors[l] = self.mats[l].get(assign[a], assign[b]);
                }
            }
            self.recurse(depth + 1, p, assign, factors, residual, sums, budget)?;
        }
        Ok(())
    }
}

struct RawSums {
    t: f64,
    leave_one_out: Vec<f64>,
    residual: Option<Vec<f64>>,
}

/// Detect fast-path shapes; returns the slot evaluation order.
fn classify(slots: &[(usize, usize)]) -> (Shape, Vec<usize>) {
    match slots.len() {
        1 => (Shape::Single, vec![0]),
        2 => {
            let (a, b) = slots[0];
            let (c, d) = slots[1];
            let shared = [a, b].iter().filter(|l| **l == c || **l == d).count();
            if shared == 1 {
                (Shape::Chain2, vec![0, 1])
            } else {
                (Shape::Generic, (0..2).collect())
            }
        }
        3 => {
            // cycle over exactly 3 labels: every label appears in exactly
            // two slots
            let mut label_count = std::collections::HashMap::new();
            for &(a, b) in slots {
                *label_count.entry(a).or_insert(0usize) += 1;
                *label_count.entry(b).or_insert(0usize) += 1;
            }
            if label_count.len() == 3 && label_count.values().all(|&c| c == 2) {
                // reorder so consecutive slots share a label in chain order:
                // (x0, x1), (x1, x2), (x2, x0)
                let order = cycle_order(slots);
                (Shape::Cycle3, order)
            } else {
                (Shape::Generic, (0..3).collect())
            }
        }
        k => (Shape::Generic, (0..k).collect()),
    }
}

/// Order the three slots of a 3-cycle so that slot `i` and slot `i+1` share a
/// label. Any rotation works; matrix symmetry handles the within-slot
/// orientation.
fn cycle_order(slots: &[(usize, usize)]) -> Vec<usize> {
    let first = 0usize;
    let (_, b0) = slots[first];
    // the slot sharing label b0 comes second
    let second = (1..3)
        .find(|&i| slots[i].0 == b0 || slots[i].1 == b0)
        .expect("cycle shape");
    let third = (1..3).find(|&i| i != second).expect("three slots");
    vec![first, second, third]
}
