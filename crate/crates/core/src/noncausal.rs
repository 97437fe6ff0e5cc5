//! Lower bounds on the non-causal capacity from the finite-blocklength
//! functional `(chi(q_U, W_U) - I(U; S^n)) / n`.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::causal::{causal_capacity, CausalOptions};
use crate::channel::{digits, product_extension, ClassicalEmbedding, StateChannel, Strategy};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quantum::{neg_xlogx, shannon_entropy};
use crate::rng;

/// Default number of random restarts.
pub const DEFAULT_RESTARTS: usize = 32;
/// Default cap on the auxiliary alphabet for blocklengths above one.
pub const DEFAULT_BLOCK_AUX_CAP: usize = 16;
/// Step of the forward-difference gradient.
pub const GRADIENT_STEP: f64 = 1e-6;
/// Alternation stops once a full round gains less than this.
pub const ALTERNATION_TOL: f64 = 1e-7;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
const MAX_GRADIENT_ITERS: usize = 300;
const MAX_ALTERNATIONS: usize = 200;
const GREEDY_MARGIN: f64 = 1e-13;

/// `I(U; S)` of a joint law given as rows over `u`, columns over `s`.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map(|r| r.len()).unwrap_or(0);
    let pu: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let ps: Vec<f64> = (0..cols).map(|s| joint.iter().map(|r| r[s]).sum()).collect();
    let hj: f64 = joint.iter().map(|r| shannon_entropy(r)).sum();
    (shannon_entropy(&pu) + shannon_entropy(&ps) - hj).max(0.0)
}

/// Encoder for a block of `n` channel uses: a conditional law of `U` given
/// the state sequence and a deterministic map to input sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpWitness {
    pub n: usize,
    pub aux_size: usize,
    /// One row over `U` per state sequence, in the product-alphabet order.
    pub q_given_s: Vec<Vec<f64>>,
    /// Cell `(s^n, u)` holds the index of the input sequence.
    pub strategy: Strategy,
    /// Bits per channel use.
    pub value: f64,
}

/// The `n`-fold channel with the data the ascent reuses.
pub struct GpProblem {
    ext: StateChannel,
    n: usize,
    p: Vec<f64>,
    hp: f64,
}

#[derive(Clone)]
struct Iterate {
    /// Row-major over `(s, u)`.
    q: Vec<f64>,
    strat: Vec<usize>,
    sigma: Vec<CMatrix>,
    eta: Vec<f64>,
    avg: CMatrix,
    s_avg: f64,
    hj: f64,
}

/// `-tr m log m` for a positive semidefinite `m`, trace not necessarily one.
fn eta(m: &CMatrix) -> f64 {
    linalg::eigenvalues_hermitian(m)
        .into_iter()
        .map(neg_xlogx)
        .sum()
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|&v| (v - theta).max(0.0)).collect()
}

impl GpProblem {
    pub fn new(ch: &StateChannel, n: usize, budget: &Budget) -> Result<Self> {
        let ext = product_extension(ch, n, budget)?;
        let p = ext.p().probs().to_vec();
        let hp = shannon_entropy(&p);
        Ok(Self { ext, n, p, hp })
    }

    pub fn channel(&self) -> &StateChannel {
        &self.ext
    }

    fn ns(&self) -> usize {
        self.ext.num_states()
    }

    fn state_matrix(&self, s: usize, x: usize) -> &CMatrix {
        self.ext.rho(s, x).matrix()
    }

    fn build(&self, aux: usize, q: Vec<f64>, strat: Vec<usize>) -> Iterate {
        let d = self.ext.dim();
        let mut sigma = vec![CMatrix::zeros(d, d); aux];
        let mut hj = 0.0;
        for s in 0..self.ns() {
            for u in 0..aux {
                let j = self.p[s] * q[s * aux + u];
                if j > 0.0 {
                    sigma[u] += self.state_matrix(s, strat[s * aux + u]).scale(j);
                    hj += neg_xlogx(j);
                }
            }
        }
        let mut avg = CMatrix::zeros(d, d);
        for m in &sigma {
            avg += m;
        }
        let eta_u = sigma.iter().map(eta).collect();
        let s_avg = eta(&avg);
        Iterate {
            q,
            strat,
            sigma,
            eta: eta_u,
            avg,
            s_avg,
            hj,
        }
    }

    /// `chi - I` for the whole block (not divided by `n`).
    fn block_value(&self, it: &Iterate) -> f64 {
        it.s_avg - it.eta.iter().sum::<f64>() + it.hj - self.hp
    }

    fn gradient(&self, aux: usize, it: &Iterate) -> Vec<f64> {
        let base = self.block_value(it);
        let eta_sum: f64 = it.eta.iter().sum();
        let mut g = vec![0.0; it.q.len()];
        for s in 0..self.ns() {
            let delta = GRADIENT_STEP * self.p[s];
            for u in 0..aux {
                let cell = s * aux + u;
                let rho = self.state_matrix(s, it.strat[cell]).scale(delta);
                let sigma = &it.sigma[u] + &rho;
                let avg = &it.avg + &rho;
                let j = self.p[s] * it.q[cell];
                let hj = it.hj - neg_xlogx(j) + neg_xlogx(j + delta);
                let value = eta(&avg) - (eta_sum - it.eta[u] + eta(&sigma)) + hj - self.hp;
                g[cell] = (value - base) / GRADIENT_STEP;
            }
        }
        g
    }

    fn project(&self, aux: usize, y: &[f64]) -> Vec<f64> {
        y.chunks(aux).flat_map(project_simplex).collect()
    }

    /// Projected gradient ascent in `q(u|s)` with Armijo backtracking.
    fn ascend_q(&self, aux: usize, mut it: Iterate) -> Iterate {
        let mut step = 1.0;
        for _ in 0..MAX_GRADIENT_ITERS {
            let g = self.gradient(aux, &it);
            let f0 = self.block_value(&it);
            let accepted = loop {
                let trial: Vec<f64> = it.q.iter().zip(&g).map(|(q, g)| q + step * g).collect();
                let q_new = self.project(aux, &trial);
                let dir: f64 = q_new.iter().zip(&it.q).zip(&g).map(|((a, b), g)| (a - b) * g).sum();
                if dir <= 1e-15 {
                    break None;
                }
                let cand = self.build(aux, q_new, it.strat.clone());
                if self.block_value(&cand) >= f0 + ARMIJO_C * dir {
                    break Some(cand);
                }
                step *= 0.5;
                if step < MIN_STEP {
                    break None;
                }
            };
            match accepted {
                Some(cand) => {
                    let gain = self.block_value(&cand) - f0;
                    it = cand;
                    step = (step * 2.0).min(1e3);
                    if gain < 1e-11 {
                        break;
                    }
                }
                None => break,
            }
        }
        it
    }

    /// Sets each cell with positive weight to its best input sequence, in cell order.
    fn improve_strategy(&self, aux: usize, mut it: Iterate) -> Iterate {
        let nx = self.ext.num_inputs();
        for s in 0..self.ns() {
            for u in 0..aux {
                let cell = s * aux + u;
                let j = self.p[s] * it.q[cell];
                if j <= 0.0 {
                    continue;
                }
                let eta_rest: f64 = it.eta.iter().sum::<f64>() - it.eta[u];
                let current = self.state_matrix(s, it.strat[cell]).scale(j);
                let base_sigma = &it.sigma[u] - &current;
                let base_avg = &it.avg - &current;
                let score = |x: usize| {
                    let add = self.state_matrix(s, x).scale(j);
                    let sigma = &base_sigma + &add;
                    let avg = &base_avg + &add;
                    let e = eta(&sigma);
                    (eta(&avg) - eta_rest - e, sigma, avg, e)
                };
                let (mut best_val, mut best) = {
                    let (v, sg, av, e) = score(it.strat[cell]);
                    (v, (it.strat[cell], sg, av, e))
                };
                for x in 0..nx {
                    if x == it.strat[cell] {
                        continue;
                    }
                    let (v, sg, av, e) = score(x);
                    if v > best_val + GREEDY_MARGIN {
                        best_val = v;
                        best = (x, sg, av, e);
                    }
                }
                let (x, sigma, avg, e) = best;
                if x != it.strat[cell] {
                    it.strat[cell] = x;
                    it.s_avg = eta(&avg);
                    it.sigma[u] = sigma;
                    it.avg = avg;
                    it.eta[u] = e;
                }
            }
        }
        it
    }

    fn run(&self, aux: usize, q: Vec<f64>, strat: Vec<usize>) -> Iterate {
        let mut it = self.build(aux, q, strat);
        let mut prev = self.block_value(&it);
        for _ in 0..MAX_ALTERNATIONS {
            it = self.ascend_q(aux, it);
            it = self.improve_strategy(aux, it);
            let now = self.block_value(&it);
            if now - prev < ALTERNATION_TOL {
                break;
            }
            prev = now;
        }
        it
    }

    fn check_witness(&self, w: &GpWitness) -> Result<()> {
        let aux = w.aux_size;
        if w.n != self.n {
            return Err(Error::ShapeMismatch(format!("witness for n={}, problem has n={}", w.n, self.n)));
        }
        if w.q_given_s.len() != self.ns() || w.q_given_s.iter().any(|r| r.len() != aux) {
            return Err(Error::ShapeMismatch(format!(
                "q_given_s must be {} rows of {} entries",
                self.ns(),
                aux
            )));
        }
        if w.strategy.aux_size != aux || w.strategy.table.len() != self.ns() * aux {
            return Err(Error::ShapeMismatch("strategy table does not match the witness".into()));
        }
        if w.strategy.table.iter().any(|&x| x >= self.ext.num_inputs()) {
            return Err(Error::ShapeMismatch("strategy names an unknown input sequence".into()));
        }
        Ok(())
    }

    /// Per-letter value of a witness; the stored `value` field is ignored.
    pub fn objective(&self, w: &GpWitness) -> Result<f64> {
        self.check_witness(w)?;
        let q: Vec<f64> = w.q_given_s.iter().flatten().copied().collect();
        let it = self.build(w.aux_size, q, w.strategy.table.clone());
        Ok(self.block_value(&it) / self.n as f64)
    }

    fn witness(&self, aux: usize, it: Iterate) -> GpWitness {
        let value = self.block_value(&it) / self.n as f64;
        GpWitness {
            n: self.n,
            aux_size: aux,
            q_given_s: it.q.chunks(aux).map(|r| r.to_vec()).collect(),
            strategy: Strategy {
                aux_size: aux,
                table: it.strat,
            },
            value,
        }
    }
}

/// Per-letter Gel'fand-Pinsker functional of `w` on the `n`-fold channel.
pub fn gp_objective(ch: &StateChannel, w: &GpWitness, budget: &Budget) -> Result<f64> {
    GpProblem::new(ch, w.n, budget)?.objective(w)
}

/// Solver settings for [`noncausal_lower_bound`].
#[derive(Debug, Clone)]
pub struct NoncausalOptions {
    pub n: usize,
    pub aux_size: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Cap on the default auxiliary size when `n > 1`.
    pub block_aux_cap: usize,
    /// Allow `n > 2`.
    pub allow_long_blocks: bool,
    /// Seed the block run with the product of the best single-letter witness.
    pub seed_with_product: bool,
    /// Restarts for the single-letter run that feeds the product seed.
    pub single_letter_restarts: Option<usize>,
    pub budget: Budget,
}

impl NoncausalOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            aux_size: None,
            restarts: DEFAULT_RESTARTS,
            seed,
            block_aux_cap: DEFAULT_BLOCK_AUX_CAP,
            allow_long_blocks: false,
            seed_with_product: true,
            single_letter_restarts: None,
            budget: Budget::default(),
        }
    }
}

/// Default auxiliary size: `|S| (|X| + 1)` for one letter and
/// `(2 |S| |X|)^n`, capped, for blocks.
pub fn default_gp_aux_size(num_states: usize, num_inputs: usize, n: usize, cap: usize) -> usize {
    if n == 1 {
        num_states * (num_inputs + 1)
    } else {
        let full = (2 * num_states * num_inputs) as u128;
        full.saturating_pow(n as u32).min(cap as u128) as usize
    }
}

/// Extends a witness with zero-probability letters up to `aux`.
pub fn pad_witness(w: &GpWitness, aux: usize) -> Result<GpWitness> {
    if aux < w.aux_size {
        return Err(Error::ShapeMismatch(format!(
            "witness uses {} letters, only {aux} available",
            w.aux_size
        )));
    }
    let rows = w.q_given_s.len();
    let mut table = vec![0; rows * aux];
    for s in 0..rows {
        for u in 0..w.aux_size {
            table[s * aux + u] = w.strategy.get(s, u);
        }
    }
    Ok(GpWitness {
        n: w.n,
        aux_size: aux,
        q_given_s: w
            .q_given_s
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.resize(aux, 0.0);
                r
            })
            .collect(),
        strategy: Strategy { aux_size: aux, table },
        value: w.value,
    })
}

/// Removes letters that carry no probability under any state.
pub fn compact_witness(w: &GpWitness) -> GpWitness {
    let used: Vec<usize> = (0..w.aux_size)
        .filter(|&u| w.q_given_s.iter().any(|r| r[u] > 0.0))
        .collect();
    let aux = used.len();
    let rows = w.q_given_s.len();
    let mut table = Vec::with_capacity(rows * aux);
    for s in 0..rows {
        for &u in &used {
            table.push(w.strategy.get(s, u));
        }
    }
    GpWitness {
        n: w.n,
        aux_size: aux,
        q_given_s: w
            .q_given_s
            .iter()
            .map(|r| used.iter().map(|&u| r[u]).collect())
            .collect(),
        strategy: Strategy { aux_size: aux, table },
        value: w.value,
    }
}

/// Product of two witnesses; `nx_b` is the number of input sequences of `b`.
/// Letters and sequences pair most-significant-first, matching the product alphabets.
pub fn product_witness(a: &GpWitness, b: &GpWitness, nx_b: usize) -> GpWitness {
    let aux = a.aux_size * b.aux_size;
    let (rows_a, rows_b) = (a.q_given_s.len(), b.q_given_s.len());
    let mut q = Vec::with_capacity(rows_a * rows_b);
    let mut table = Vec::with_capacity(rows_a * rows_b * aux);
    for sa in 0..rows_a {
        for sb in 0..rows_b {
            let mut row = Vec::with_capacity(aux);
            for ua in 0..a.aux_size {
                for ub in 0..b.aux_size {
                    row.push(a.q_given_s[sa][ua] * b.q_given_s[sb][ub]);
                    table.push(a.strategy.get(sa, ua) * nx_b + b.strategy.get(sb, ub));
                }
            }
            q.push(row);
        }
    }
    let n = a.n + b.n;
    GpWitness {
        n,
        aux_size: aux,
        q_given_s: q,
        strategy: Strategy { aux_size: aux, table },
        value: (a.value * a.n as f64 + b.value * b.n as f64) / n as f64,
    }
}

/// Witness realizing a causal solution: `U` independent of the state.
fn causal_seed(ch: &StateChannel, aux: usize) -> Option<GpWitness> {
    let sol = causal_capacity(ch, &CausalOptions::default()).ok()?;
    let w = GpWitness {
        n: 1,
        aux_size: sol.strategy.aux_size,
        q_given_s: vec![sol.q.clone(); ch.num_states()],
        strategy: sol.strategy,
        value: sol.value,
    };
    pad_witness(&w, aux).ok()
}

fn random_start(problem: &GpProblem, aux: usize, seed: u64, index: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = rng::stream(seed, index);
    let ns = problem.ns();
    let nx = problem.ext.num_inputs();
    let mut q = Vec::with_capacity(ns * aux);
    for _ in 0..ns {
        q.extend(rng::flat_simplex(&mut rng, aux));
    }
    let strat = (0..ns * aux).map(|_| rng.random_range(0..nx)).collect();
    (q, strat)
}

/// Best witness from the seeded starts followed by `restarts` random starts.
/// Ties go to the earliest start, so the result is independent of scheduling.
pub fn multistart(
    problem: &GpProblem,
    aux: usize,
    seeds: &[GpWitness],
    restarts: usize,
    seed: u64,
) -> Result<GpWitness> {
    for w in seeds {
        problem.check_witness(w)?;
    }
    let total = seeds.len() + restarts;
    if total == 0 {
        return Err(Error::PreconditionViolated("no starting points".into()));
    }
    let results: Vec<Iterate> = (0..total)
        .into_par_iter()
        .map(|i| {
            let (q, strat) = if i < seeds.len() {
                let w = &seeds[i];
                (w.q_given_s.iter().flatten().copied().collect(), w.strategy.table.clone())
            } else {
                random_start(problem, aux, seed, (i - seeds.len()) as u64)
            };
            problem.run(aux, q, strat)
        })
        .collect();
    let mut best = 0;
    for i in 1..results.len() {
        if problem.block_value(&results[i]) > problem.block_value(&results[best]) {
            best = i;
        }
    }
    tracing::debug!(start = best, "noncausal multistart winner");
    let it = results.into_iter().nth(best).expect("index in range");
    Ok(problem.witness(aux, it))
}

/// Certified lower bound on the non-causal capacity at blocklength `n`.
pub fn noncausal_lower_bound(ch: &StateChannel, opts: &NoncausalOptions) -> Result<GpWitness> {
    let n = opts.n;
    if n == 0 {
        return Err(Error::PreconditionViolated("blocklength must be positive".into()));
    }
    if n > 2 && !opts.allow_long_blocks {
        return Err(Error::PreconditionViolated(format!(
            "blocklength {n} exceeds 2; enable long blocks explicitly"
        )));
    }
    let aux = opts.aux_size.unwrap_or_else(|| {
        default_gp_aux_size(ch.num_states(), ch.num_inputs(), n, opts.block_aux_cap)
    });
    if aux == 0 {
        return Err(Error::PreconditionViolated("auxiliary alphabet must be nonempty".into()));
    }
    let problem = GpProblem::new(ch, n, &opts.budget)?;
    let mut seeds = Vec::new();
    if n == 1 {
        if let Some(w) = causal_seed(ch, aux) {
            seeds.push(w);
        }
    } else if opts.seed_with_product {
        let single = NoncausalOptions {
            n: 1,
            aux_size: None,
            restarts: opts.single_letter_restarts.unwrap_or(opts.restarts),
            ..opts.clone()
        };
        let w1 = compact_witness(&noncausal_lower_bound(ch, &single)?);
        let nx = ch.num_inputs();
        let mut prod = w1.clone();
        for _ in 1..n {
            prod = product_witness(&prod, &w1, nx);
        }
        match pad_witness(&prod, aux) {
            Ok(w) => seeds.push(w),
            Err(_) => tracing::warn!(
                letters = prod.aux_size,
                aux,
                "product seed does not fit the auxiliary alphabet"
            ),
        }
    }
    multistart(&problem, aux, &seeds, opts.restarts, opts.seed)
}

/// Classical state-dependent channel `w(y|s,x)` with state law `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGp {
    pub num_states: usize,
    pub num_inputs: usize,
    pub num_outputs: usize,
    /// `w[(s * |X| + x) * |Y| + y]`.
    pub w: Vec<f64>,
    pub p: Vec<f64>,
}

impl ClassicalGp {
    /// Classical law of a commuting channel, if it has one.
    pub fn from_channel(ch: &StateChannel) -> Option<Self> {
        match crate::channel::classical_embedding(ch) {
            ClassicalEmbedding::Classical { table, .. } => Some(Self {
                num_states: ch.num_states(),
                num_inputs: ch.num_inputs(),
                num_outputs: ch.dim(),
                w: table,
                p: ch.p().probs().to_vec(),
            }),
            ClassicalEmbedding::NotClassical { .. } => None,
        }
    }

    fn law(&self, s: usize, x: usize) -> &[f64] {
        let y = self.num_outputs;
        let start = (s * self.num_inputs + x) * y;
        &self.w[start..start + y]
    }

    /// `I(U;Y) - I(U;S)` for `q(u|s)` (row-major over `(s, u)`) and `x(u, s)`
    /// (row-major over `(s, u)`).
    pub fn objective(&self, aux: usize, q: &[f64], x: &[usize]) -> f64 {
        let ny = self.num_outputs;
        let mut uy = vec![0.0; aux * ny];
        let mut y_marg = vec![0.0; ny];
        let mut h_us = 0.0;
        for s in 0..self.num_states {
            for u in 0..aux {
                let j = self.p[s] * q[s * aux + u];
                if j <= 0.0 {
                    continue;
                }
                h_us += neg_xlogx(j);
                for (y, &w) in self.law(s, x[s * aux + u]).iter().enumerate() {
                    uy[u * ny + y] += j * w;
                    y_marg[y] += j * w;
                }
            }
        }
        shannon_entropy(&y_marg) - shannon_entropy(&uy) + h_us - shannon_entropy(&self.p)
    }
}

fn grid_rows(aux: usize, steps: usize) -> Vec<Vec<f64>> {
    // All compositions of `steps` into `aux` non-negative parts.
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(steps, aux, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / steps as f64).collect())
        .collect()
}

/// Brute-force maximum of `I(U;Y) - I(U;S)` over a grid of conditional laws
/// `q(u|s)` and every deterministic `x(u, s)`.
pub fn classical_gp_oracle(cgp: &ClassicalGp, aux: usize, grid_step: f64, cap: u128) -> Result<f64> {
    let steps = (1.0 / grid_step).round() as usize;
    if steps == 0 || aux == 0 {
        return Err(Error::PreconditionViolated("grid step and aux size must be positive".into()));
    }
    let rows = grid_rows(aux, steps);
    let cells = cgp.num_states * aux;
    let strategies = (cgp.num_inputs as u128).saturating_pow(cells as u32);
    let points = (rows.len() as u128).saturating_pow(cgp.num_states as u32);
    let required = points.saturating_mul(strategies);
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    let best = (0..strategies as usize)
        .into_par_iter()
        .map(|code| {
            let x = digits(code, cgp.num_inputs, cells);
            let mut best = f64::NEG_INFINITY;
            let mut q = vec![0.0; cells];
            for point in 0..points as usize {
                let idx = digits(point, rows.len(), cgp.num_states);
                for (s, &r) in idx.iter().enumerate() {
                    q[s * aux..(s + 1) * aux].copy_from_slice(&rows[r]);
                }
                best = best.max(cgp.objective(aux, &q, &x));
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityOperator, Distribution};

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| i.to_string()).collect()
    }

    fn flip() -> StateChannel {
        let b = |i| DensityOperator::basis_state(2, i);
        StateChannel::new(labels(2), labels(2), Distribution::uniform(2), vec![b(0), b(1), b(1), b(0)])
            .unwrap()
            .0
    }

    #[test]
    fn mutual_information_examples() {
        assert!(mutual_information(&[vec![0.25, 0.25], vec![0.25, 0.25]]).abs() < 1e-12);
        assert!((mutual_information(&[vec![0.5, 0.0], vec![0.0, 0.5]]) - 1.0).abs() < 1e-12);
        let i = mutual_information(&[vec![0.4, 0.1], vec![0.1, 0.4]]);
        assert!((i - 0.278072).abs() < 1e-6);
    }

    #[test]
    fn flip_objective_with_xor_witness() {
        let w = GpWitness {
            n: 1,
            aux_size: 2,
            q_given_s: vec![vec![0.5, 0.5]; 2],
            strategy: Strategy::new(2, 2, vec![0, 1, 1, 0]).unwrap(),
            value: 0.0,
        };
        let v = gp_objective(&flip(), &w, &Budget::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strategy_ignoring_u_is_not_positive() {
        let w = GpWitness {
            n: 1,
            aux_size: 2,
            q_given_s: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            strategy: Strategy::new(2, 2, vec![1, 1, 0, 0]).unwrap(),
            value: 0.0,
        };
        assert!(gp_objective(&flip(), &w, &Budget::default()).unwrap() <= 1e-12);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn flip_lower_bound_is_one() {
        let mut opts = NoncausalOptions::new(1, 11);
        opts.restarts = 4;
        let w = noncausal_lower_bound(&flip(), &opts).unwrap();
        assert!((w.value - 1.0).abs() < 1e-6, "{}", w.value);
    }

    #[test]
    fn oracle_examples() {
        let noiseless = ClassicalGp {
            num_states: 1,
            num_inputs: 2,
            num_outputs: 2,
            w: vec![1.0, 0.0, 0.0, 1.0],
            p: vec![1.0],
        };
        let v = classical_gp_oracle(&noiseless, 2, 0.02, 10_000_000).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let useless = ClassicalGp {
            w: vec![0.5; 4],
            ..noiseless.clone()
        };
        assert!(classical_gp_oracle(&useless, 2, 0.02, 10_000_000).unwrap().abs() < 1e-12);
        let cgp = ClassicalGp::from_channel(&flip()).unwrap();
        let v = classical_gp_oracle(&cgp, 2, 0.02, 10_000_000).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
