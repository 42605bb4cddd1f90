//! Direct sparse LU: reverse Cuthill-McKee reordering followed by a banded
//! factorization with partial pivoting inside the band.

use std::collections::VecDeque;

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Factorized square matrix, reusable for any number of right-hand sides.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    lower: usize,
    /// row width: `2 * lower + upper + 1`
    width: usize,
    /// row `i` stores columns `i - lower ..= i + lower + upper`
    band: Vec<f64>,
    pivots: Vec<usize>,
}

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity pattern.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for nb in adj.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let bfs_levels = |start: usize, seen: &[bool]| -> (Vec<usize>, usize) {
        let mut level = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        let mut order = Vec::new();
        level[start] = 0;
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !seen[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        let depth = order.iter().map(|&v| level[v]).max().unwrap_or(0);
        // last vertex of the deepest level with minimum degree
        let far = order
            .iter()
            .copied()
            .filter(|&v| level[v] == depth)
            .min_by_key(|&v| degree[v])
            .unwrap_or(start);
        (vec![far], depth)
    };

    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // next unvisited component, seeded at a pseudo-peripheral vertex
        let Some(seed) = (0..n).filter(|&v| !seen[v]).min_by_key(|&v| degree[v]) else {
            break;
        };
        let mut start = seed;
        let mut depth = 0;
        for _ in 0..8 {
            let (far, d) = bfs_levels(start, &seen);
            if d <= depth {
                break;
            }
            depth = d;
            start = far[0];
        }
        let mut q = VecDeque::new();
        seen[start] = true;
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

impl LuFactorization {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                context: "lu_factorize requires a square matrix",
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut lower, mut upper) = (0usize, 0usize);
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi > pj {
                    lower = lower.max(pi - pj);
                } else {
                    upper = upper.max(pj - pi);
                }
            }
        }
        let width = 2 * lower + upper + 1;
        let mut band = vec![0.0; n * width];
        for i in 0..n {
            let pi = inv[i];
            for (j, v) in a.row(i) {
                let pj = inv[j];
                band[pi * width + (pj + lower - pi)] += v;
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut lu = LuFactorization {
            n,
            perm,
            lower,
            width,
            band,
            pivots: vec![0; n],
        };
        lu.factor(scale)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        row * self.width + (col + self.lower - row)
    }

    fn factor(&mut self, scale: f64) -> Result<()> {
        let n = self.n;
        let kl = self.lower;
        let reach = self.width - 1 - kl; // kl + ku
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.band[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.band[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale || !best.is_finite() {
                return Err(Error::Singular {
                    step: k,
                    pivot: best,
                });
            }
            self.pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.idx(k, c), self.idx(p, c));
                    self.band.swap(a, b);
                }
            }
            let piv = self.band[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.band[ik] / piv;
                self.band[ik] = l;
                if l == 0.0 {
                    continue;
                }
                let (ri, rk) = (self.idx(i, k + 1), self.idx(k, k + 1));
                let len = last_col - k;
                for c in 0..len {
                    let v = self.band[rk + c];
                    self.band[ri + c] -= l * v;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Bandwidths `(lower, upper)` of the reordered matrix before fill.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.width - 1 - 2 * self.lower)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "lu_solve right-hand side",
                expected: n,
                got: b.len(),
            });
        }
        let kl = self.lower;
        let reach = self.width - 1 - kl;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    y[i] -= self.band[self.idx(i, k)] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..=(k + reach).min(n - 1) {
                s -= self.band[self.idx(k, c)] * y[c];
            }
            y[k] = s / self.band[self.idx(k, k)];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
        Ok(())
    }
}

pub fn lu_factorize(a: &CsrMatrix) -> Result<LuFactorization> {
    LuFactorization::new(a)
}

pub fn lu_solve(f: &LuFactorization, b: &[f64]) -> Result<Vec<f64>> {
    f.solve(b)
}
