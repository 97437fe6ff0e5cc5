//! Codes for state-dependent channels, the square-root and sequential
//! decoders, and the Monte-Carlo rate/error sweep for both random-coding
//! schemes.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::causal::{causal_capacity, compact, CausalOptions};
use crate::channel::{derived_channel, digits, RandomizedEncoder, StateChannel, Strategy};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::noncausal::{compact_witness, noncausal_lower_bound, GpWitness, NoncausalOptions};
use crate::quantum::{l1_distance, DensityOperator};
use crate::rng::{self, Rng};
use crate::schur::{eigenbasis, DecodeFamily, Limits};
use crate::types::{m_set_contains, round_with_remainder, sample_type_class, JointDistribution, TypeVector};

/// Closure and positivity tolerance for decoders.
pub const TOL_POVM: f64 = 1e-8;
/// Eigenvalues at or below this are treated as the kernel of `sum P_m`.
pub const TOL_KERNEL: f64 = 1e-10;
/// Term count above which `average_error` switches to Monte Carlo.
pub const EXACT_TERM_CAP: u128 = 1_000_000;
/// Default typicality slack for simulations at toy blocklengths.
pub const DEFAULT_DELTA: f64 = 0.2;
/// Default number of Monte-Carlo samples per code.
pub const DEFAULT_MC_SAMPLES: usize = 10_000;
/// Largest `|S|^n` for which the causal marginal condition is checked exhaustively.
pub const CAUSAL_CHECK_CAP: u128 = 100_000;
/// Draws allowed when conditioning a codeword on typicality.
pub const MAX_REJECTIONS: usize = 10_000;

/// A measurement `{D_1, ..., D_M}` plus the error outcome `D_0`.
#[derive(Debug, Clone)]
pub struct Povm {
    pub elements: Vec<CMatrix>,
    pub deficit: CMatrix,
}

impl Povm {
    /// Builds `D_0 = 1 - sum D_m`.
    pub fn with_deficit(elements: Vec<CMatrix>, dim: usize) -> Self {
        let mut deficit = CMatrix::identity(dim, dim);
        for e in &elements {
            deficit -= e;
        }
        Self {
            elements,
            deficit: linalg::hermitian_part(&deficit),
        }
    }

    pub fn dim(&self) -> usize {
        self.deficit.nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `max |sum D_m + D_0 - 1|`.
    pub fn closure_residual(&self) -> f64 {
        let dim = self.dim();
        let mut sum = self.deficit.clone();
        for e in &self.elements {
            sum += e;
        }
        linalg::max_abs(&(sum - CMatrix::identity(dim, dim)))
    }

    /// Most negative eigenvalue over all elements and the deficit.
    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .chain(std::iter::once(&self.deficit))
            .map(|e| linalg::eigenvalues_hermitian(e).last().copied().unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -TOL_POVM {
            return Err(Error::InvalidPovm(format!("element with eigenvalue {min:e}")));
        }
        let residual = self.closure_residual();
        if residual > TOL_POVM {
            return Err(Error::InvalidPovm(format!("closure residual {residual:e}")));
        }
        Ok(())
    }
}

/// `D_m = S^{-1/2} P_m S^{-1/2}` with `S = sum P_m`, the inverse square root
/// taken on the support of `S`; `D_0` is the kernel projector of `S`.
pub fn square_root_decoder(projectors: &[CMatrix]) -> Result<Povm> {
    let Some(first) = projectors.first() else {
        return Err(Error::InvalidPovm("no operators".into()));
    };
    let dim = first.nrows();
    let mut sum = CMatrix::zeros(dim, dim);
    for p in projectors {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: p.nrows(),
            });
        }
        sum += p;
    }
    let eig = HermitianEigen::new(&sum);
    if let Some(&min) = eig.values.last() {
        if min < -TOL_POVM {
            return Err(Error::NumericalRankFailure(format!("sum of operators has eigenvalue {min:e}")));
        }
    }
    let inv_sqrt = eig.apply(|v| if v > TOL_KERNEL { 1.0 / v.sqrt() } else { 0.0 });
    let kernel = eig.apply(|v| if v > TOL_KERNEL { 0.0 } else { 1.0 });
    let elements: Vec<CMatrix> = projectors
        .iter()
        .map(|p| linalg::hermitian_part(&(&inv_sqrt * p * &inv_sqrt)))
        .collect();
    let povm = Povm {
        elements,
        deficit: kernel,
    };
    let residual = povm.closure_residual();
    if residual > TOL_POVM {
        return Err(Error::NumericalRankFailure(format!("closure residual {residual:e}")));
    }
    Ok(povm)
}

fn projection_residual(p: &CMatrix) -> f64 {
    linalg::max_abs(&(p * p - p)).max(linalg::hermiticity_deviation(p))
}

/// Effective POVM of testing `P_1, P_2, ...` in order: `D_m = A_m* P_m A_m`
/// with `A_m = P'_{m-1} ... P'_1` and `P' = 1 - P`.
pub fn sequential_decoder(projectors: &[CMatrix]) -> Result<Povm> {
    let Some(first) = projectors.first() else {
        return Err(Error::InvalidPovm("no projectors".into()));
    };
    let dim = first.nrows();
    for p in projectors {
        let residual = projection_residual(p);
        if residual > TOL_POVM {
            return Err(Error::NotProjection { residual });
        }
    }
    let id = CMatrix::identity(dim, dim);
    let mut a = id.clone();
    let mut elements = Vec::with_capacity(projectors.len());
    for p in projectors {
        let pa = p * &a;
        elements.push(linalg::hermitian_part(&(a.adjoint() * &pa)));
        a -= pa;
    }
    // The deficit telescopes to A_{M+1}* A_{M+1}.
    let deficit = linalg::hermitian_part(&(a.adjoint() * &a));
    Ok(Povm { elements, deficit })
}

/// `tr(P_L ... P_1 sigma P_1 ... P_L) >= tr sigma - 2 sqrt(sum_i tr (1 - P_i) sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnionBound {
    pub success: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn union_bound_check(projectors: &[CMatrix], sigma: &CMatrix) -> UnionBound {
    let mut state = sigma.clone();
    let mut misses = 0.0;
    for p in projectors {
        misses += (linalg::trace(sigma) - linalg::trace_product(p, sigma)).re;
        state = p * &state * p;
    }
    let success = linalg::trace(&state).re;
    let bound = linalg::trace(sigma).re - 2.0 * misses.max(0.0).sqrt();
    UnionBound {
        success,
        bound,
        holds: success >= bound - 1e-12,
    }
}

/// The test sequence behind message `m` of a sequential decoder:
/// `P'_1, ..., P'_{m-1}, P_m`.
pub fn sequential_tests(projectors: &[CMatrix], m: usize) -> Vec<CMatrix> {
    let dim = projectors[0].nrows();
    let id = CMatrix::identity(dim, dim);
    projectors[..m]
        .iter()
        .map(|p| &id - p)
        .chain(std::iter::once(projectors[m].clone()))
        .collect()
}

/// Map from a message and a state sequence to a law on input sequences.
/// Missing mass means the encoder declares failure.
pub trait Encoder: Sync {
    fn n(&self) -> usize;
    fn messages(&self) -> usize;
    /// Whether the code is meant to respect causal state knowledge.
    fn causal(&self) -> bool;
    fn encode(&self, m: usize, s_seq: &[usize]) -> Vec<(Vec<usize>, f64)>;
    /// Largest support `encode` can return.
    fn max_support(&self) -> usize {
        1
    }
}

/// Shannon-strategy code: `x_i = phi(s_i, u_i(m))`.
#[derive(Debug, Clone)]
pub struct StrategyEncoder {
    pub codewords: Vec<Vec<usize>>,
    pub strategy: Strategy,
}

impl Encoder for StrategyEncoder {
    fn n(&self) -> usize {
        self.codewords.first().map_or(0, Vec::len)
    }

    fn messages(&self) -> usize {
        self.codewords.len()
    }

    fn causal(&self) -> bool {
        true
    }

    fn encode(&self, m: usize, s_seq: &[usize]) -> Vec<(Vec<usize>, f64)> {
        let x = s_seq
            .iter()
            .zip(&self.codewords[m])
            .map(|(&s, &u)| self.strategy.get(s, u))
            .collect();
        vec![(x, 1.0)]
    }
}

/// `K x M` codewords drawn uniformly from the type class of `p_U`.
#[derive(Debug, Clone, Serialize)]
pub struct GpCodebook {
    pub n: usize,
    pub delta: f64,
    /// `codewords[m][k]`.
    pub codewords: Vec<Vec<Vec<usize>>>,
    #[serde(skip)]
    pub p_su: JointDistribution,
}

impl GpCodebook {
    pub fn messages(&self) -> usize {
        self.codewords.len()
    }

    pub fn columns(&self) -> usize {
        self.codewords.first().map_or(0, Vec::len)
    }

    /// `K(m, s^n) = {k : s^n in M(u_{km})}`.
    pub fn candidates(&self, m: usize, s_seq: &[usize]) -> Vec<usize> {
        self.codewords[m]
            .iter()
            .enumerate()
            .filter(|(_, u)| m_set_contains(s_seq, u, &self.p_su, self.delta).unwrap_or(false))
            .map(|(k, _)| k)
            .collect()
    }
}

/// Rounded type of `p_U` for blocklength `n`.
fn u_type(p_su: &JointDistribution, n: usize) -> Result<TypeVector> {
    let p_u = p_su.p_u();
    crate::types::counts_of(&p_u, n).map(TypeVector::new).ok_or_else(|| {
        Error::PreconditionViolated(format!("p_U = {p_u:?} is not a type with denominator {n}"))
    })
}

pub fn build_gp_codebook_with(
    p_su: &JointDistribution,
    n: usize,
    k: usize,
    m: usize,
    delta: f64,
    rng: &mut Rng,
) -> Result<GpCodebook> {
    if !(delta > 0.0) || k == 0 || m == 0 {
        return Err(Error::PreconditionViolated(format!(
            "need delta > 0, K >= 1, M >= 1; got {delta}, {k}, {m}"
        )));
    }
    let t = u_type(p_su, n)?;
    let codewords = (0..m)
        .map(|_| (0..k).map(|_| sample_type_class(&t, rng)).collect())
        .collect();
    Ok(GpCodebook {
        n,
        delta,
        codewords,
        p_su: p_su.clone(),
    })
}

/// Independent uniform draws from `T_{p_U}`; `p_U` must be an `n`-type.
pub fn build_gp_codebook(
    p_su: &JointDistribution,
    n: usize,
    k: usize,
    m: usize,
    delta: f64,
    seed: u64,
) -> Result<GpCodebook> {
    build_gp_codebook_with(p_su, n, k, m, delta, &mut rng::stream(seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Encoding {
    Codeword(usize),
    Declare,
}

/// Uniform choice among the codewords of message `m` whose set `M(u)` contains `s^n`.
pub fn gp_encoder(codebook: &GpCodebook, m: usize, s_seq: &[usize], rng: &mut Rng) -> Encoding {
    let candidates = codebook.candidates(m, s_seq);
    if candidates.is_empty() {
        Encoding::Declare
    } else {
        Encoding::Codeword(candidates[rng.random_range(0..candidates.len())])
    }
}

/// Non-causal encoder: pick `u_{km}` with `s^n in M(u_{km})`, then `x_i = phi(s_i, u_i)`.
#[derive(Debug, Clone)]
pub struct GpEncoder<'a> {
    pub codebook: &'a GpCodebook,
    pub strategy: Strategy,
}

impl Encoder for GpEncoder<'_> {
    fn n(&self) -> usize {
        self.codebook.n
    }

    fn messages(&self) -> usize {
        self.codebook.messages()
    }

    fn causal(&self) -> bool {
        false
    }

    fn encode(&self, m: usize, s_seq: &[usize]) -> Vec<(Vec<usize>, f64)> {
        let candidates = self.codebook.candidates(m, s_seq);
        let w = 1.0 / candidates.len().max(1) as f64;
        candidates
            .into_iter()
            .map(|k| {
                let u = &self.codebook.codewords[m][k];
                let x = s_seq.iter().zip(u).map(|(&s, &u)| self.strategy.get(s, u)).collect();
                (x, w)
            })
            .collect()
    }

    fn max_support(&self) -> usize {
        self.codebook.columns()
    }
}

/// Checks that the law of `x^t` depends on `s^n` only through `s^t`.
fn check_causal<E: Encoder + ?Sized>(encoder: &E, num_states: usize) -> Result<()> {
    let n = encoder.n();
    let count = (num_states as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > CAUSAL_CHECK_CAP {
        tracing::debug!(count, "causal marginal check skipped");
        return Ok(());
    }
    let seqs: Vec<Vec<usize>> = (0..count as usize).map(|i| digits(i, num_states, n)).collect();
    for m in 0..encoder.messages() {
        let laws: Vec<Vec<(Vec<usize>, f64)>> = seqs.iter().map(|s| encoder.encode(m, s)).collect();
        for t in 1..n {
            let mut seen: HashMap<Vec<usize>, HashMap<Vec<usize>, f64>> = HashMap::new();
            for (s, law) in seqs.iter().zip(&laws) {
                let mut marginal: HashMap<Vec<usize>, f64> = HashMap::new();
                for (x, w) in law {
                    *marginal.entry(x[..t].to_vec()).or_default() += w;
                }
                match seen.get(&s[..t]) {
                    None => {
                        seen.insert(s[..t].to_vec(), marginal);
                    }
                    Some(prev) => {
                        let keys = prev.keys().chain(marginal.keys());
                        for key in keys {
                            let a = prev.get(key).copied().unwrap_or(0.0);
                            let b = marginal.get(key).copied().unwrap_or(0.0);
                            if (a - b).abs() > 1e-12 {
                                return Err(Error::PreconditionViolated(format!(
                                    "message {m}: input prefix law at time {t} depends on future states"
                                )));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// An encoder together with a decoding measurement on `(C^d)^{(x)n}`.
pub struct Code<E: Encoder> {
    pub encoder: E,
    pub decoder: Povm,
}

impl<E: Encoder> Code<E> {
    pub fn new(encoder: E, decoder: Povm, ch: &StateChannel) -> Result<Self> {
        let n = encoder.n();
        let dim = ch.dim().checked_pow(n as u32).unwrap_or(usize::MAX);
        if decoder.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: decoder.dim(),
            });
        }
        if decoder.len() != encoder.messages() {
            return Err(Error::InvalidPovm(format!(
                "{} outcomes for {} messages",
                decoder.len(),
                encoder.messages()
            )));
        }
        if encoder.causal() {
            check_causal(&encoder, ch.num_states())?;
        }
        Ok(Self { encoder, decoder })
    }

    pub fn n(&self) -> usize {
        self.encoder.n()
    }

    pub fn messages(&self) -> usize {
        self.encoder.messages()
    }
}

/// `tr D (rho_1 (x) ... (x) rho_n)`, contracting one site at a time from the right.
pub fn product_trace(d_op: &CMatrix, factors: &[&CMatrix]) -> f64 {
    let mut m = d_op.clone();
    for rho in factors.iter().rev() {
        let d = rho.nrows();
        let outer = m.nrows() / d;
        m = CMatrix::from_fn(outer, outer, |r, c| {
            let mut acc = linalg::ZERO;
            for a in 0..d {
                for b in 0..d {
                    acc += m[(r * d + a, c * d + b)] * rho[(b, a)];
                }
            }
            acc
        });
    }
    m[(0, 0)].re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub err: f64,
    /// Probability that the encoder declares failure.
    pub declare: f64,
    pub terms: u128,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact below `EXACT_TERM_CAP` terms, Monte Carlo above.
    Auto { samples: usize, seed: u64 },
}

fn success_of<E: Encoder>(code: &Code<E>, ch: &StateChannel, m: usize, s_seq: &[usize]) -> (f64, f64) {
    let law = code.encoder.encode(m, s_seq);
    let mass: f64 = law.iter().map(|(_, w)| w).sum();
    let success = law
        .iter()
        .map(|(x, w)| {
            let factors: Vec<&CMatrix> = s_seq.iter().zip(x).map(|(&s, &x)| ch.rho(s, x).matrix()).collect();
            w * product_trace(&code.decoder.elements[m], &factors)
        })
        .sum();
    (success, 1.0 - mass)
}

/// `1 - (1/M) sum_m sum_{s^n} p(s^n) sum_{x^n} e(x^n | m, s^n) tr rho_{s^n, x^n} D_m`.
pub fn average_error<E: Encoder>(code: &Code<E>, ch: &StateChannel, mode: ErrorMode) -> Result<ErrorReport> {
    let n = code.n();
    let msgs = code.messages();
    let ns = ch.num_states();
    let seqs = (ns as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let terms = seqs
        .saturating_mul(msgs as u128)
        .saturating_mul(code.encoder.max_support().max(1) as u128);
    let (exact, samples, seed) = match mode {
        ErrorMode::Exact => {
            if terms > EXACT_TERM_CAP {
                return Err(Error::CapExceeded {
                    required: terms,
                    cap: EXACT_TERM_CAP,
                });
            }
            (true, 0, 0)
        }
        ErrorMode::MonteCarlo { samples, seed } => (false, samples, seed),
        ErrorMode::Auto { samples, seed } => (terms <= EXACT_TERM_CAP, samples, seed),
    };
    let p = ch.p().probs();
    let (success, declare) = if exact {
        let per_seq: Vec<(f64, f64)> = (0..seqs as usize)
            .into_par_iter()
            .map(|i| {
                let s = digits(i, ns, n);
                let ps: f64 = s.iter().map(|&x| p[x]).product();
                let (mut succ, mut decl) = (0.0, 0.0);
                for m in 0..msgs {
                    let (a, b) = success_of(code, ch, m, &s);
                    succ += ps * a;
                    decl += ps * b;
                }
                (succ, decl)
            })
            .collect();
        let (a, b) = per_seq.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        (a / msgs as f64, b / msgs as f64)
    } else {
        if samples == 0 {
            return Err(Error::PreconditionViolated("Monte Carlo needs at least one sample".into()));
        }
        let draws: Vec<(f64, f64)> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, i as u64);
                let m = r.random_range(0..msgs);
                let s: Vec<usize> = (0..n).map(|_| sample_index(p, &mut r)).collect();
                success_of(code, ch, m, &s)
            })
            .collect();
        let (a, b) = draws.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        (a / samples as f64, b / samples as f64)
    };
    Ok(ErrorReport {
        err: (1.0 - success).clamp(0.0, 1.0),
        declare,
        terms,
        exact,
    })
}

fn sample_index(p: &[f64], rng: &mut Rng) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if r < acc {
            return i;
        }
    }
    p.iter().rposition(|&v| v > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CausalSequential,
    NoncausalSqrt,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::CausalSequential => "causal-sequential",
            Scheme::NoncausalSqrt => "noncausal-sqrt",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "causal-sequential" => Ok(Scheme::CausalSequential),
            "noncausal-sqrt" => Ok(Scheme::NoncausalSqrt),
            other => Err(Error::Parse(format!(
                "unknown scheme `{other}`, expected causal-sequential or noncausal-sqrt"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub scheme: Scheme,
    pub rates: Vec<f64>,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    /// Codewords per message in the non-causal scheme.
    pub k: usize,
    pub mc_samples: usize,
    pub limits: Limits,
}

impl SimulationOptions {
    pub fn new(scheme: Scheme, rates: Vec<f64>, ns: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            scheme,
            rates,
            ns,
            trials,
            seed,
            delta: DEFAULT_DELTA,
            k: 1,
            mc_samples: DEFAULT_MC_SAMPLES,
            limits: Limits::default(),
        }
    }
}

/// One point of the rate/error curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub scheme: String,
    pub n: usize,
    pub rate: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean probability of a declared encoding failure.
    pub declares: f64,
}

/// `max(1, round(2^{n R}))`.
pub fn message_count(n: usize, rate: f64) -> usize {
    ((n as f64 * rate).exp2().round() as usize).max(1)
}

/// Letter laws behind a scheme: aux letters, encoder `phi(s, u)`, `p_U` and
/// the states `rho_u` the decoder is matched to.
#[derive(Debug, Clone)]
pub struct SchemeModel {
    pub strategy: Strategy,
    pub p_u: Vec<f64>,
    /// Rows over `s`; unused by the causal scheme.
    pub q_given_s: Vec<Vec<f64>>,
    pub states: Vec<DensityOperator>,
}

/// Shannon-strategy model from the causal optimum.
pub fn causal_model(ch: &StateChannel) -> Result<SchemeModel> {
    let sol = causal_capacity(ch, &CausalOptions::default())?;
    let (strategy, p_u) = compact(&sol.strategy, &sol.q);
    let states = derived_channel(ch, &RandomizedEncoder::from_strategy(&strategy, ch.num_inputs()))?;
    let q_given_s = vec![p_u.clone(); ch.num_states()];
    Ok(SchemeModel {
        strategy,
        p_u,
        q_given_s,
        states,
    })
}

/// Single-letter witness cleaned of negligible letters.
pub fn noncausal_model(ch: &StateChannel, seed: u64) -> Result<SchemeModel> {
    let w = noncausal_lower_bound(ch, &NoncausalOptions::new(1, seed))?;
    noncausal_model_from(ch, &w)
}

pub fn noncausal_model_from(ch: &StateChannel, w: &GpWitness) -> Result<SchemeModel> {
    let p = ch.p().probs();
    let mut w = w.clone();
    for row in w.q_given_s.iter_mut() {
        for v in row.iter_mut() {
            if *v < 1e-9 {
                *v = 0.0;
            }
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
    }
    let w = compact_witness(&w);
    let aux = w.aux_size;
    let p_u: Vec<f64> = (0..aux)
        .map(|u| (0..p.len()).map(|s| p[s] * w.q_given_s[s][u]).sum())
        .collect();
    let states = (0..aux)
        .map(|u| {
            let weights: Vec<f64> = (0..p.len()).map(|s| p[s] * w.q_given_s[s][u] / p_u[u]).collect();
            let parts: Vec<&DensityOperator> = (0..p.len()).map(|s| ch.rho(s, w.strategy.get(s, u))).collect();
            DensityOperator::mixture(&weights, &parts)
        })
        .collect::<Result<_>>()?;
    Ok(SchemeModel {
        strategy: w.strategy,
        p_u,
        q_given_s: w.q_given_s,
        states,
    })
}

impl SchemeModel {
    /// `p_SU` with `p_U` rounded to an `n`-type and `p_{S|U}` kept.
    pub fn joint_for(&self, ch: &StateChannel, n: usize) -> Result<JointDistribution> {
        let counts = round_with_remainder(&self.p_u, n as u64)
            .ok_or_else(|| Error::NumericalRankFailure(format!("cannot round p_U to a {n}-type")))?;
        let p = ch.p().probs();
        let rows = (0..p.len())
            .map(|s| {
                (0..self.p_u.len())
                    .map(|u| {
                        let cond = p[s] * self.q_given_s[s][u] / self.p_u[u];
                        cond * counts[u] as f64 / n as f64
                    })
                    .collect()
            })
            .collect();
        JointDistribution::new(rows)
    }

    fn average_state(&self) -> Result<DensityOperator> {
        let refs: Vec<&DensityOperator> = self.states.iter().collect();
        DensityOperator::mixture(&self.p_u, &refs)
    }
}

fn summarize(errs: &[f64]) -> (f64, f64, f64) {
    let t = errs.len() as f64;
    let mean = errs.iter().sum::<f64>() / t;
    let var = if errs.len() > 1 {
        errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let half = 1.96 * var.sqrt() / t.sqrt();
    (mean, (mean - half).max(0.0), (mean + half).min(1.0))
}

/// Draws `u^n ~ p_U^n` conditioned on `||type - p_U||_1 <= delta` and on every
/// block projector being nonzero.
fn typical_codeword(p_u: &[f64], n: usize, delta: f64, family: &DecodeFamily, rng: &mut Rng) -> Result<Vec<usize>> {
    for _ in 0..MAX_REJECTIONS {
        let u: Vec<usize> = (0..n).map(|_| sample_index(p_u, rng)).collect();
        let t = TypeVector::of_sequence(&u, p_u.len());
        if l1_distance(&t.normalized(), p_u) <= delta && family.empty_letters(&u).is_empty() {
            return Ok(u);
        }
    }
    Err(Error::PreconditionViolated(format!(
        "no typical codeword with nonempty A-sets after {MAX_REJECTIONS} draws at n = {n}"
    )))
}

fn trial_seed(seed: u64, rate_index: usize, n: usize) -> u64 {
    seed ^ ((rate_index as u64) << 40) ^ ((n as u64) << 20)
}

/// Expected average error of random codes per scheme, for every `(rate, n)`.
pub fn simulate_rate_error_curve(ch: &StateChannel, opts: &SimulationOptions) -> Result<Vec<CurveRow>> {
    let model = match opts.scheme {
        Scheme::CausalSequential => causal_model(ch)?,
        Scheme::NoncausalSqrt => noncausal_model(ch, opts.seed)?,
    };
    simulate_with_model(ch, &model, opts)
}

pub fn simulate_with_model(ch: &StateChannel, model: &SchemeModel, opts: &SimulationOptions) -> Result<Vec<CurveRow>> {
    if opts.trials == 0 {
        return Err(Error::PreconditionViolated("at least one trial is required".into()));
    }
    let basis = eigenbasis(&model.average_state()?);
    let rotated = ch.conjugated(&basis.adjoint());
    let mut rows = Vec::new();
    for &n in &opts.ns {
        let family = DecodeFamily::new(&model.states, &basis, opts.delta, n, &opts.limits)?;
        let joint = match opts.scheme {
            Scheme::NoncausalSqrt => Some(model.joint_for(ch, n)?),
            Scheme::CausalSequential => None,
        };
        for (ri, &rate) in opts.rates.iter().enumerate() {
            let msgs = message_count(n, rate);
            let k = match opts.scheme {
                Scheme::NoncausalSqrt => opts.k,
                Scheme::CausalSequential => 1,
            };
            let base = trial_seed(opts.seed, ri, n);
            let results: Vec<ErrorReport> = (0..opts.trials)
                .into_par_iter()
                .map(|t| {
                    let mut r = rng::stream(base, t as u64);
                    let mode = ErrorMode::Auto {
                        samples: opts.mc_samples,
                        seed: r.random(),
                    };
                    match opts.scheme {
                        Scheme::CausalSequential => {
                            let words: Vec<Vec<usize>> = (0..msgs)
                                .map(|_| typical_codeword(&model.p_u, n, opts.delta, &family, &mut r))
                                .collect::<Result<_>>()?;
                            let projectors: Vec<CMatrix> = words
                                .iter()
                                .map(|u| family.frame_projector(u).map(|(m, _)| linalg::to_complex(&m)))
                                .collect::<Result<_>>()?;
                            let decoder = sequential_decoder(&projectors)?;
                            let encoder = StrategyEncoder {
                                codewords: words,
                                strategy: model.strategy.clone(),
                            };
                            average_error(&Code::new(encoder, decoder, &rotated)?, &rotated, mode)
                        }
                        Scheme::NoncausalSqrt => {
                            let joint = joint.as_ref().expect("joint law");
                            let book = build_gp_codebook_with(joint, n, k, msgs, opts.delta, &mut r)?;
                            let projectors: Vec<CMatrix> = book
                                .codewords
                                .iter()
                                .map(|words| {
                                    let mut sum = None::<CMatrix>;
                                    for u in words {
                                        let p = linalg::to_complex(&family.frame_projector(u)?.0);
                                        sum = Some(match sum {
                                            None => p,
                                            Some(acc) => acc + p,
                                        });
                                    }
                                    Ok(sum.expect("K >= 1"))
                                })
                                .collect::<Result<_>>()?;
                            let decoder = square_root_decoder(&projectors)?;
                            let encoder = GpEncoder {
                                codebook: &book,
                                strategy: model.strategy.clone(),
                            };
                            average_error(&Code::new(encoder, decoder, &rotated)?, &rotated, mode)
                        }
                    }
                })
                .collect::<Result<_>>()?;
            let errs: Vec<f64> = results.iter().map(|r| r.err).collect();
            let (err, ci_low, ci_high) = summarize(&errs);
            let declares = results.iter().map(|r| r.declare).sum::<f64>() / results.len() as f64;
            rows.push(CurveRow {
                scheme: opts.scheme.name().to_string(),
                n,
                rate,
                k,
                m: msgs,
                err,
                ci_low,
                ci_high,
                declares,
            });
        }
    }
    Ok(rows)
}
