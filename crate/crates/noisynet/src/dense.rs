//! Internal dense `f64` square matrices with zero diagonal, used by the
//! subgraph-density kernels. Not part of the public API.

use crate::graph::AdjacencyMatrix;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SqMat {
    pub p: usize,
    pub a: Vec<f64>,
}

impl SqMat {
    pub fn zeros(p: usize) -> Self {
        Self { p, a: vec![0.0; p * p] }
    }

    /// `f(Y_ij)` applied off-diagonally, zero diagonal.
    pub fn from_graph(y: &AdjacencyMatrix, f: impl Fn(f64) -> f64) -> Self {
        let p = y.p();
        let mut m = Self::zeros(p);
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    m.a[i * p + j] = f(y.get(i, j) as f64);
                }
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.p + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.p + j] = v;
        self.a[j * self.p + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.p..(i + 1) * self.p]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.p).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Sum of all entries (diagonal is zero by construction).
    pub fn total(&self) -> f64 {
        self.a.iter().sum()
    }

    /// Elementwise product sum `sum_ij A_ij B_ij`.
    pub fn dot(&self, other: &SqMat) -> f64 {
        debug_assert_eq!(self.p, other.p);
        self.a.iter().zip(&other.a).map(|(&x, &y)| x * y).sum()
    }

    /// Plain `O(p^3)` matrix product (ikj loop order).
    pub fn matmul(&self, other: &SqMat) -> SqMat {
        debug_assert_eq!(self.p, other.p);
        let p = self.p;
        let mut out = SqMat::zeros(p);
        for i in 0..p {
            for k in 0..p {
                let aik = self.a[i * p + k];
                if aik == 0.0 {
                    continue;
                }
                let row_k = &other.a[k * p..(k + 1) * p];
                let out_i = &mut out.a[i * p..(i + 1) * p];
                for j in 0..p {
                    out_i[j] += aik * row_k[j];
                }
            }
        }
        out
    }

    /// `sum over ordered distinct triples (i, j, k) of M1_ij M2_jk`, the
    /// shared index being `j`. Assumes symmetric inputs with zero diagonal.
    pub fn chain2(&self, other: &SqMat) -> f64 {
        debug_assert_eq!(self.p, other.p);
        let rs1 = self.row_sums();
        let rs2 = other.row_sums();
        let cross: f64 = rs1.iter().zip(&rs2).map(|(&x, &y)| x * y).sum();
        cross - self.dot(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AdjacencyMatrix;

    #[test]
    fn chain2_matches_enumeration() {
        let g = AdjacencyMatrix::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let m = SqMat::from_graph(&g, |y| y - 0.3);
        let n = SqMat::from_graph(&g, |y| 0.9 - y);
        let mut direct = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    if i != j && j != k && i != k {
                        direct += m.get(i, j) * n.get(j, k);
                    }
                }
            }
        }
        assert!((m.chain2(&n) - direct).abs() < 1e-12);
    }

    #[test]
    fn matmul_small() {
        let mut a = SqMat::zeros(3);
        a.set_sym(0, 1, 2.0);
        a.set_sym(1, 2, 3.0);
        let sq = a.matmul(&a);
        assert_eq!(sq.get(0, 0), 4.0);
        assert_eq!(sq.get(0, 2), 6.0);
        assert_eq!(sq.get(1, 1), 13.0);
    }
}
