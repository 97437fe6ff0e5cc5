//! Causal capacity: Holevo maximization over Shannon strategies.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{derived_channel, digits, RandomizedEncoder, StateChannel, Strategy};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::quantum::{von_neumann_entropy, DensityOperator, Distribution, TOL_SUPPORT};

/// Default optimality gap for the inner maximization, in bits.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Default iteration limit for the inner maximization.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Default limit on `|X|^(|S| |U|)`.
pub const DEFAULT_STRATEGY_CAP: u128 = 1_000_000;

const POLISH_EPS: f64 = 1e-11;
const TIE_TOL: f64 = 1e-12;
const COMPACT_TOL: f64 = 1e-9;

/// Maximizer of `q -> chi(q, ensemble)` with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolevoMax {
    pub q: Vec<f64>,
    pub value: f64,
    /// `max_u D(rho_u || rho_bar) - chi(q)`, an upper bound on the suboptimality.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Ensemble with cached output entropies, evaluated repeatedly by the ascent.
struct Ensemble<'a> {
    states: &'a [DensityOperator],
    entropies: Vec<f64>,
    dim: usize,
}

impl<'a> Ensemble<'a> {
    fn new(states: &'a [DensityOperator]) -> Self {
        Self {
            entropies: states.iter().map(von_neumann_entropy).collect(),
            dim: states[0].dim(),
            states,
        }
    }

    fn average(&self, q: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (w, s) in q.iter().zip(self.states) {
            if *w > 0.0 {
                m += s.matrix().scale(*w);
            }
        }
        m
    }

    /// `D(rho_u || avg)` for the requested letters, given `avg`'s eigensystem.
    fn score(&self, eig: &HermitianEigen, log_avg: &CMatrix, u: usize) -> f64 {
        let kernel: f64 = eig
            .diagonal_of(self.states[u].matrix())
            .iter()
            .zip(&eig.values)
            .filter(|(_, &t)| t <= TOL_SUPPORT)
            .map(|(w, _)| *w)
            .sum();
        if kernel > TOL_SUPPORT {
            return f64::INFINITY;
        }
        let cross = linalg::trace_product(self.states[u].matrix(), log_avg).re;
        (-self.entropies[u] - cross).max(0.0)
    }

    fn log_average(&self, q: &[f64]) -> (HermitianEigen, CMatrix) {
        let eig = HermitianEigen::new(&self.average(q));
        let log = eig.apply(|t| if t > TOL_SUPPORT { t.log2() } else { 0.0 });
        (eig, log)
    }

    fn scores(&self, q: &[f64]) -> Vec<f64> {
        let (eig, log) = self.log_average(q);
        (0..self.states.len()).map(|u| self.score(&eig, &log, u)).collect()
    }

    /// Derivative of chi along `e_a - e_b` at `q`.
    fn slope(&self, q: &[f64], a: usize, b: usize) -> f64 {
        let (eig, log) = self.log_average(q);
        self.score(&eig, &log, a) - self.score(&eig, &log, b)
    }
}

fn chi_from_scores(q: &[f64], scores: &[f64]) -> f64 {
    q.iter()
        .zip(scores)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, g)| w * g)
        .sum()
}

/// Maximizes the Holevo quantity over input distributions by pairwise
/// conditional-gradient ascent with exact line search, starting from `start`
/// (uniform when `None`).
pub fn inner_maximize_q(
    ensemble: &[DensityOperator],
    eps: f64,
    max_iter: usize,
    start: Option<&[f64]>,
) -> Result<HolevoMax> {
    if ensemble.is_empty() {
        return Err(Error::ShapeMismatch("empty ensemble".into()));
    }
    let dim = ensemble[0].dim();
    if let Some(bad) = ensemble.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch { left: dim, right: bad.dim() });
    }
    let k = ensemble.len();
    let ens = Ensemble::new(ensemble);
    let mut q = match start {
        Some(s) if s.len() == k => s.to_vec(),
        Some(s) => return Err(Error::LengthMismatch { left: s.len(), right: k }),
        None => vec![1.0 / k as f64; k],
    };
    let mut iterations = 0;
    loop {
        let scores = ens.scores(&q);
        let chi = chi_from_scores(&q, &scores);
        let (a, &best) = scores
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
            .expect("nonempty");
        let gap = best - chi;
        if gap <= eps || iterations >= max_iter {
            return Ok(HolevoMax {
                q,
                value: chi.max(0.0),
                gap,
                iterations,
                converged: gap <= eps,
            });
        }
        // Away vertex: worst letter still carrying mass.
        let b = (0..k)
            .filter(|&u| q[u] > 0.0)
            .min_by(|&x, &y| scores[x].total_cmp(&scores[y]))
            .expect("q has support");
        if a == b {
            // Only reachable when the certificate is already zero.
            return Ok(HolevoMax {
                q,
                value: chi.max(0.0),
                gap: 0.0,
                iterations,
                converged: true,
            });
        }
        let t_max = q[b];
        let at = |t: f64| {
            let mut r = q.clone();
            r[a] += t;
            r[b] -= t;
            r
        };
        let t = if ens.slope(&at(t_max), a, b) >= 0.0 {
            t_max
        } else {
            // chi is concave along the segment, so the slope decreases in t.
            let (mut lo, mut hi) = (0.0, t_max);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if ens.slope(&at(mid), a, b) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-16 * t_max.max(1e-300) {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        q[a] += t;
        q[b] = if t == t_max { 0.0 } else { q[b] - t };
        iterations += 1;
    }
}

/// Holevo capacity of a fixed ensemble with default settings.
pub fn holevo_capacity(ensemble: &[DensityOperator], eps: f64) -> Result<HolevoMax> {
    inner_maximize_q(ensemble, eps, DEFAULT_MAX_ITER, None)
}

/// Default auxiliary alphabet size `|S| (|X| - 1) + 2`.
pub fn default_aux_size(num_states: usize, num_inputs: usize) -> usize {
    num_states * (num_inputs - 1) + 2
}

/// Looser auxiliary alphabet size `|S| |X|`.
pub fn loose_aux_size(num_states: usize, num_inputs: usize) -> usize {
    num_states * num_inputs
}

/// Strategies up to relabeling of `U`: each is a non-decreasing sequence of
/// columns, a column `c` encoding the map `s -> x` by its base-`|X|` digits.
#[derive(Debug, Clone)]
pub struct StrategyEnumerator {
    num_states: usize,
    aux_size: usize,
    num_inputs: usize,
    num_columns: usize,
    next: Option<Vec<usize>>,
}

/// Raw number of strategies `|X|^(|S| |U|)`, saturating.
pub fn raw_strategy_count(num_states: usize, aux_size: usize, num_inputs: usize) -> u128 {
    (num_inputs as u128).saturating_pow((num_states * aux_size) as u32)
}

/// Enumerates every strategy once up to permutations of the auxiliary letters.
pub fn enumerate_strategies(
    num_states: usize,
    aux_size: usize,
    num_inputs: usize,
    cap: u128,
) -> Result<StrategyEnumerator> {
    let required = raw_strategy_count(num_states, aux_size, num_inputs);
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    if num_states == 0 || num_inputs == 0 || aux_size == 0 {
        return Err(Error::PreconditionViolated("alphabets must be nonempty".into()));
    }
    Ok(StrategyEnumerator {
        num_states,
        aux_size,
        num_inputs,
        num_columns: num_inputs.pow(num_states as u32),
        next: Some(vec![0; aux_size]),
    })
}

impl StrategyEnumerator {
    fn table(&self, columns: &[usize]) -> Strategy {
        let cols: Vec<Vec<usize>> = columns
            .iter()
            .map(|&c| digits(c, self.num_inputs, self.num_states))
            .collect();
        let mut table = Vec::with_capacity(self.num_states * self.aux_size);
        for s in 0..self.num_states {
            for col in &cols {
                table.push(col[s]);
            }
        }
        Strategy {
            aux_size: self.aux_size,
            table,
        }
    }
}

impl Iterator for StrategyEnumerator {
    type Item = (Vec<usize>, Strategy);

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = self.aux_size;
        while i > 0 && succ[i - 1] == self.num_columns - 1 {
            i -= 1;
        }
        if i > 0 {
            let v = succ[i - 1] + 1;
            for slot in &mut succ[i - 1..] {
                *slot = v;
            }
            self.next = Some(succ);
        }
        let strategy = self.table(&current);
        Some((current, strategy))
    }
}

/// Optimal Shannon strategy and input law with the inner certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalSolution {
    pub value: f64,
    pub strategy: Strategy,
    pub q: Vec<f64>,
    pub inner_iterations: usize,
    pub duality_gap: f64,
    pub converged: bool,
    /// Auxiliary alphabet size searched, before compaction.
    pub aux_size: usize,
    pub strategies_evaluated: usize,
}

/// Solver settings; `Default` follows the documented defaults.
#[derive(Debug, Clone)]
pub struct CausalOptions {
    pub aux_size: Option<usize>,
    pub eps: f64,
    pub max_iter: usize,
    pub cap: u128,
}

impl Default for CausalOptions {
    fn default() -> Self {
        Self {
            aux_size: None,
            eps: DEFAULT_EPS,
            max_iter: DEFAULT_MAX_ITER,
            cap: DEFAULT_STRATEGY_CAP,
        }
    }
}

fn ensemble_for(ch: &StateChannel, columns: &[usize]) -> Vec<DensityOperator> {
    let ns = ch.num_states();
    columns
        .iter()
        .map(|&c| {
            let col = digits(c, ch.num_inputs(), ns);
            let mut m = CMatrix::zeros(ch.dim(), ch.dim());
            for (s, &x) in col.iter().enumerate() {
                m += ch.rho(s, x).matrix().scale(ch.p().get(s));
            }
            DensityOperator::from_matrix_unchecked(m)
        })
        .collect()
}

/// Single-letter causal capacity: the largest Holevo quantity over Shannon
/// strategies and input laws. Ties resolve to the lexicographically smallest
/// strategy table, so the result does not depend on evaluation order.
pub fn causal_capacity(ch: &StateChannel, opts: &CausalOptions) -> Result<CausalSolution> {
    let aux = opts
        .aux_size
        .unwrap_or_else(|| default_aux_size(ch.num_states(), ch.num_inputs()));
    let enumerator = enumerate_strategies(ch.num_states(), aux, ch.num_inputs(), opts.cap)?;
    // Strategies sharing a column set share the optimum; solve each set once.
    let candidates: Vec<(Vec<usize>, Strategy)> = enumerator.collect();
    let mut keys: Vec<Vec<usize>> = candidates
        .iter()
        .map(|(cols, _)| {
            let mut k = cols.clone();
            k.dedup();
            k
        })
        .collect();
    let key_of: Vec<Vec<usize>> = keys.clone();
    keys.sort();
    keys.dedup();
    tracing::debug!(strategies = candidates.len(), column_sets = keys.len(), "causal search");

    let mut solved: Vec<HolevoMax> = keys
        .par_iter()
        .map(|k| inner_maximize_q(&ensemble_for(ch, k), opts.eps, opts.max_iter, None))
        .collect::<Result<_>>()?;
    let coarse_best = solved.iter().map(|h| h.value).fold(f64::NEG_INFINITY, f64::max);
    let polish_eps = POLISH_EPS.min(opts.eps);
    let threshold = coarse_best - 2.0 * opts.eps - TIE_TOL;
    let polished: Vec<(usize, HolevoMax)> = solved
        .par_iter()
        .enumerate()
        .filter(|(_, h)| h.value >= threshold)
        .map(|(i, h)| {
            let refined = inner_maximize_q(&ensemble_for(ch, &keys[i]), polish_eps, opts.max_iter, Some(&h.q))?;
            Ok((i, HolevoMax {
                iterations: h.iterations + refined.iterations,
                ..refined
            }))
        })
        .collect::<Result<_>>()?;
    for (i, h) in polished {
        solved[i] = h;
    }
    let best = solved.iter().map(|h| h.value).fold(f64::NEG_INFINITY, f64::max);
    let total_iterations: usize = solved.iter().map(|h| h.iterations).sum();

    let (winner, key_index) = candidates
        .iter()
        .zip(&key_of)
        .map(|((_, strategy), k)| (strategy, keys.binary_search(k).expect("key present")))
        .filter(|(_, ki)| solved[*ki].value >= best - TIE_TOL)
        .min_by(|a, b| a.0.table.cmp(&b.0.table))
        .expect("at least one strategy");
    let inner = &solved[key_index];
    let key = &keys[key_index];

    // The winner's columns map onto the solved column set.
    let mut q_full = vec![0.0; aux];
    let winner_cols: Vec<usize> = (0..aux)
        .map(|u| {
            let col = winner.column(u);
            col.iter().fold(0, |acc, &x| acc * ch.num_inputs() + x)
        })
        .collect();
    for (ki, &c) in key.iter().enumerate() {
        let u = winner_cols.iter().position(|&w| w == c).expect("column present");
        q_full[u] += inner.q[ki];
    }
    let (strategy, q) = compact(winner, &q_full);
    let value = crate::quantum::holevo_quantity(
        &Distribution::from_weights(&q)?,
        &derived_channel(ch, &RandomizedEncoder::from_strategy(&strategy, ch.num_inputs()))?,
    )?;
    Ok(CausalSolution {
        value,
        strategy,
        q,
        inner_iterations: total_iterations,
        duality_gap: inner.gap,
        converged: inner.converged,
        aux_size: aux,
        strategies_evaluated: candidates.len(),
    })
}

/// Drops letters with negligible mass and merges letters with equal columns.
pub fn compact(strategy: &Strategy, q: &[f64]) -> (Strategy, Vec<f64>) {
    let mut columns: Vec<Vec<usize>> = Vec::new();
    let mut mass: Vec<f64> = Vec::new();
    for u in 0..strategy.aux_size {
        if q[u] <= COMPACT_TOL {
            continue;
        }
        let col = strategy.column(u);
        match columns.iter().position(|c| *c == col) {
            Some(i) => mass[i] += q[u],
            None => {
                columns.push(col);
                mass.push(q[u]);
            }
        }
    }
    let total: f64 = mass.iter().sum();
    let ns = strategy.num_states();
    let aux = columns.len();
    let mut table = vec![0; ns * aux];
    for (u, col) in columns.iter().enumerate() {
        for s in 0..ns {
            table[s * aux + u] = col[s];
        }
    }
    (
        Strategy {
            aux_size: aux,
            table,
        },
        mass.into_iter().map(|m| m / total).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn plus() -> DensityOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_strategies(1, 1, 2, DEFAULT_STRATEGY_CAP).unwrap().count(), 2);
        assert_eq!(enumerate_strategies(2, 1, 2, DEFAULT_STRATEGY_CAP).unwrap().count(), 4);
        assert_eq!(enumerate_strategies(2, 2, 2, DEFAULT_STRATEGY_CAP).unwrap().count(), 10);
        assert!(matches!(
            enumerate_strategies(3, 8, 3, DEFAULT_STRATEGY_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn inner_examples() {
        let rho = DensityOperator::from_diagonal(&[0.6, 0.4]).unwrap();
        let same = inner_maximize_q(&[rho.clone(), rho], DEFAULT_EPS, DEFAULT_MAX_ITER, None).unwrap();
        assert!(same.value.abs() < 1e-12 && same.gap.abs() < 1e-12);

        let ortho = [DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 1)];
        let h = inner_maximize_q(&ortho, DEFAULT_EPS, DEFAULT_MAX_ITER, None).unwrap();
        assert!((h.value - 1.0).abs() < 1e-12);
        assert!((h.q[0] - 0.5).abs() < 1e-12);

        let h = inner_maximize_q(&[DensityOperator::basis_state(2, 0), plus()], 1e-10, DEFAULT_MAX_ITER, None)
            .unwrap();
        assert!(h.converged);
        assert!((h.value - 0.600876).abs() < 1e-6);
    }

    #[test]
    fn dominated_letter_is_dropped() {
        let states = [
            DensityOperator::basis_state(2, 0),
            DensityOperator::basis_state(2, 1),
            DensityOperator::maximally_mixed(2),
        ];
        let h = inner_maximize_q(&states, 1e-9, DEFAULT_MAX_ITER, None).unwrap();
        assert!((h.value - 1.0).abs() < 1e-9);
        assert!(h.q[2] < 1e-6);
    }
}
