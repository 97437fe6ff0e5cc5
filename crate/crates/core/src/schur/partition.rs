//! Young frames, irreducible characters of the symmetric group and the
//! dimension formulas.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{kl_divergence, shannon_entropy};

/// A partition of `n`, rows non-increasing and positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct YoungFrame {
    rows: Vec<usize>,
}

impl YoungFrame {
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        let rows: Vec<usize> = rows.into_iter().filter(|&r| r > 0).collect();
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::PreconditionViolated(format!("rows {rows:?} are not non-increasing")));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `lambda_i / n`, padded with zeros to length `d`.
    pub fn normalized(&self, d: usize) -> Vec<f64> {
        let n = self.n() as f64;
        (0..d.max(self.len()))
            .map(|i| self.rows.get(i).map_or(0.0, |&r| r as f64 / n))
            .collect()
    }

    /// Column lengths.
    pub fn conjugate(&self) -> Vec<usize> {
        let width = self.rows.first().copied().unwrap_or(0);
        (0..width).map(|c| self.rows.iter().filter(|&&r| r > c).count()).collect()
    }

    /// Whether `self` dominates `other` (both padded with zeros).
    pub fn dominates(&self, other: &[usize]) -> bool {
        let len = self.len().max(other.len());
        let (mut a, mut b) = (0usize, 0usize);
        for i in 0..len {
            a += self.rows.get(i).copied().unwrap_or(0);
            b += other.get(i).copied().unwrap_or(0);
            if a < b {
                return false;
            }
        }
        a == b
    }
}

impl std::fmt::Display for YoungFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Partitions of `n` with at most `d` rows, largest first in lexicographic order.
pub fn enumerate_frames(d: usize, n: usize) -> Vec<YoungFrame> {
    fn rec(left: usize, max: usize, rows_left: usize, cur: &mut Vec<usize>, out: &mut Vec<YoungFrame>) {
        if left == 0 {
            out.push(YoungFrame { rows: cur.clone() });
            return;
        }
        if rows_left == 0 {
            return;
        }
        for r in (1..=max.min(left)).rev() {
            cur.push(r);
            rec(left - r, r, rows_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, d, &mut Vec::new(), &mut out);
    out
}

/// All partitions of `n`, used as cycle types.
pub fn partitions(n: usize) -> Vec<YoungFrame> {
    enumerate_frames(n.max(1), n)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Dimension of the irreducible representation `F_lambda` by the hook-length formula.
pub fn irrep_dimension(lambda: &YoungFrame) -> BigUint {
    let cols = lambda.conjugate();
    let mut hooks = BigUint::one();
    for (i, &r) in lambda.rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate().take(r) {
            hooks *= (r - j) + (c - i) - 1;
        }
    }
    factorial(lambda.n()) / hooks
}

/// `dim F_lambda` with the entropy sandwich, all in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionBounds {
    pub dim: u128,
    pub entropy: f64,
    pub log2_lower: f64,
    pub log2_upper: f64,
    pub holds: bool,
}

/// Checks `n (H - (2 d^6 / n) log 2n) <= log dim F_lambda <= n H` with `H = H(lambda / n)`.
pub fn dimension_bounds(lambda: &YoungFrame, d: usize) -> DimensionBounds {
    let n = lambda.n() as f64;
    let dim = irrep_dimension(lambda);
    let h = shannon_entropy(&lambda.normalized(d));
    let log_dim = crate::types::log2_big(&dim);
    let log2_upper = n * h;
    let log2_lower = n * h - 2.0 * (d as f64).powi(6) * (2.0 * n).log2();
    let slack = 1e-9 * log2_upper.max(1.0);
    DimensionBounds {
        dim: dim.to_u128().unwrap_or(u128::MAX),
        entropy: h,
        log2_lower,
        log2_upper,
        holds: log_dim <= log2_upper + slack && log_dim >= log2_lower - slack,
    }
}

/// Number of times `lambda` occurs in `(C^d)^{(x)n}`: the Weyl dimension
/// `prod_{i<j} (lambda_i - lambda_j + j - i) / (j - i)`, zero past `d` rows.
pub fn multiplicity(lambda: &YoungFrame, d: usize) -> BigUint {
    if lambda.len() > d {
        return BigUint::from(0u32);
    }
    let l: Vec<i64> = (0..d).map(|i| lambda.rows.get(i).copied().unwrap_or(0) as i64).collect();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        for j in i + 1..d {
            num *= (l[i] - l[j] + (j - i) as i64) as u64;
            den *= (j - i) as u64;
        }
    }
    num / den
}

/// Beta-set of a partition padded to `len` rows: `lambda_i + len - 1 - i`.
fn beta_set(rows: &[usize], len: usize) -> Vec<usize> {
    (0..len)
        .map(|i| rows.get(i).copied().unwrap_or(0) + len - 1 - i)
        .collect()
}

/// Irreducible characters by the Murnaghan-Nakayama rule, memoized over
/// beta-sets so that a whole character table stays cheap.
#[derive(Debug, Default)]
pub struct CharacterTable {
    memo: HashMap<(Vec<usize>, Vec<usize>), i64>,
}

impl CharacterTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `chi_lambda` on the class with cycle type `mu`.
    pub fn character(&mut self, lambda: &YoungFrame, mu: &YoungFrame) -> Result<i64> {
        if lambda.n() != mu.n() {
            return Err(Error::ShapeMismatch(format!(
                "shape has {} boxes, cycle type {}",
                lambda.n(),
                mu.n()
            )));
        }
        let len = lambda.len().max(1);
        let mut beta = beta_set(&lambda.rows, len);
        beta.sort_unstable();
        Ok(self.strip(beta, mu.rows()))
    }

    /// Sum over ways to remove a rim hook of length `parts[0]`, sign given by
    /// the number of beads jumped over.
    fn strip(&mut self, beta: Vec<usize>, parts: &[usize]) -> i64 {
        let Some((&r, rest)) = parts.split_first() else {
            return 1;
        };
        let key = (beta.clone(), parts.to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut total = 0;
        for (idx, &b) in beta.iter().enumerate() {
            if b < r || beta.contains(&(b - r)) {
                continue;
            }
            let target = b - r;
            let jumped = beta.iter().filter(|&&c| c > target && c < b).count();
            let mut next = beta.clone();
            next[idx] = target;
            next.sort_unstable();
            let sign = if jumped % 2 == 0 { 1 } else { -1 };
            total += sign * self.strip(next, rest);
        }
        self.memo.insert(key, total);
        total
    }
}

/// `chi_lambda(mu)` with a fresh table.
pub fn character(lambda: &YoungFrame, mu: &YoungFrame) -> Result<i64> {
    CharacterTable::new().character(lambda, mu)
}

/// Size of the conjugacy class with cycle type `mu`: `n! / prod_i i^{m_i} m_i!`.
pub fn class_size(mu: &YoungFrame) -> BigUint {
    let mut z = BigUint::one();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &p in mu.rows() {
        *counts.entry(p).or_default() += 1;
    }
    for (&part, &m) in &counts {
        z *= BigUint::from(part).pow(m as u32) * factorial(m);
    }
    factorial(mu.n()) / z
}

/// Number of semistandard tableaux of shape `lambda` and content `f`,
/// by peeling horizontal strips for the largest letter.
pub fn kostka_number(lambda: &YoungFrame, content: &[usize]) -> u64 {
    fn rec(shape: Vec<usize>, content: &[usize]) -> u64 {
        let Some((&last, rest)) = content.split_last() else {
            return u64::from(shape.iter().all(|&r| r == 0));
        };
        // Remove a horizontal strip of size `last`: row i may lose up to
        // shape[i] - shape[i+1] boxes.
        fn strips(shape: &[usize], i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == shape.len() {
                if left == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            let below = shape.get(i + 1).copied().unwrap_or(0);
            let room = shape[i] - below;
            for take in 0..=room.min(left) {
                cur.push(shape[i] - take);
                strips(shape, i + 1, left - take, cur, out);
                cur.pop();
            }
        }
        let mut next = Vec::new();
        strips(&shape, 0, last, &mut Vec::new(), &mut next);
        next.into_iter().map(|s| rec(s, rest)).sum()
    }
    if lambda.n() != content.iter().sum::<usize>() {
        return 0;
    }
    rec(lambda.rows.clone(), content)
}

/// `K_{f,lambda} != 0`, equivalently `lambda` dominates `f` sorted non-increasing.
pub fn kostka_nonzero(lambda: &YoungFrame, content: &[usize]) -> bool {
    let mut sorted = content.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    lambda.n() == sorted.iter().sum::<usize>() && lambda.dominates(&sorted)
}

/// `D(lambda / n || r)` with `r` sorted non-increasing.
pub fn frame_divergence(lambda: &YoungFrame, spectrum: &[f64]) -> f64 {
    kl_divergence(&lambda.normalized(spectrum.len()), spectrum)
}
