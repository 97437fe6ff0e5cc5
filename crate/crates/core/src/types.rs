//! Method of types: type classes, typical sets, joint-type completion and
//! Monte-Carlo checks of the covering estimates.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{kl_divergence, l1_distance, shannon_entropy, Distribution};
use crate::rng::{self, Rng};

/// Default limit on enumerated types or sequences.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Letter counts of a sequence over `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct TypeVector {
    counts: Vec<u64>,
}

impl TypeVector {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    /// Type of `seq` over an alphabet of `k` letters.
    pub fn of_sequence(seq: &[usize], k: usize) -> Self {
        let mut counts = vec![0; k];
        for &x in seq {
            counts[x] += 1;
        }
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Empirical distribution `N / n`.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.normalized())
    }

    /// The sequence `0^{N(0)} 1^{N(1)} ...`.
    pub fn sorted_sequence(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(x, &c)| std::iter::repeat_n(x, c as usize))
            .collect()
    }
}

/// Number of types with `n` boxes over `k` letters, `C(n + k - 1, k - 1)`.
pub fn type_count(k: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..k as u128 {
        acc = acc.saturating_mul(n as u128 + i) / i;
    }
    acc
}

/// All types with `n` boxes over `k` letters, in lexicographic order of counts.
pub fn enumerate_types(k: usize, n: usize, cap: u128) -> Result<Vec<TypeVector>> {
    let required = type_count(k, n);
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    fn rec(left: u64, slots: usize, cur: &mut Vec<u64>, out: &mut Vec<TypeVector>) {
        if slots == 1 {
            cur.push(left);
            out.push(TypeVector::new(cur.clone()));
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(required as usize);
    if k > 0 {
        rec(n as u64, k, &mut Vec::with_capacity(k), &mut out);
    }
    Ok(out)
}

/// `n! / prod c!` as a big integer.
pub fn multinomial(counts: &[u64]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total: u64 = 0;
    for &c in counts {
        for i in 1..=c {
            total += 1;
            acc *= total;
            acc /= i;
        }
    }
    acc
}

/// `log2` of a big integer.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().map(f64::log2).unwrap_or(f64::INFINITY)
    } else {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().expect("64-bit value");
        top.log2() + shift as f64
    }
}

/// Exact size of a type class together with the entropy sandwich.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeClassSize {
    #[serde(serialize_with = "serialize_big")]
    pub size: BigUint,
    /// `(n+1)^{-d} 2^{n H(f/n)}`.
    pub lower: f64,
    /// `2^{n H(f/n)}`.
    pub upper: f64,
    pub sandwich_holds: bool,
}

fn serialize_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn type_class_size(f: &TypeVector) -> TypeClassSize {
    let n = f.n() as f64;
    let size = multinomial(f.counts());
    let nh = n * f.entropy();
    let log_lower = nh - f.alphabet_size() as f64 * (n + 1.0).log2();
    let log_size = log2_big(&size);
    let slack = 1e-9 * nh.max(1.0);
    TypeClassSize {
        lower: log_lower.exp2(),
        upper: nh.exp2(),
        sandwich_holds: log_size >= log_lower - slack && log_size <= nh + slack,
        size,
    }
}

/// Whether `p` is an empirical distribution with denominator `n`.
pub fn is_n_type(p: &[f64], n: usize) -> bool {
    p.iter().all(|&v| {
        let c = v * n as f64;
        (c - c.round()).abs() <= 1e-9 * n as f64
    })
}

/// Counts of `p` when it is an `n`-type.
pub fn counts_of(p: &[f64], n: usize) -> Option<Vec<u64>> {
    is_n_type(p, n).then(|| p.iter().map(|&v| (v * n as f64).round() as u64).collect())
}

/// Rounds every letter but the heaviest to the nearest multiple of `1/n` and
/// gives the remainder to the heaviest one. Fails when the remainder would be
/// negative.
pub fn round_with_remainder(p: &[f64], n: u64) -> Option<Vec<u64>> {
    let heaviest = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)?;
    let mut counts = vec![0u64; p.len()];
    let mut used: u64 = 0;
    for (x, &v) in p.iter().enumerate() {
        if x != heaviest && v > 0.0 {
            counts[x] = (v * n as f64).round() as u64;
            used += counts[x];
        }
    }
    counts[heaviest] = n.checked_sub(used)?;
    Some(counts)
}

/// A type with denominator `n` within L1 distance `2|X|/n` of `p` whose
/// support lies inside that of `p`. Requires `n >= |X|^2` unless `p` is
/// already an `n`-type.
pub fn nearest_type(p: &Distribution, n: usize) -> Result<TypeVector> {
    if let Some(counts) = counts_of(p.probs(), n) {
        return Ok(TypeVector::new(counts));
    }
    let k = p.len();
    if n < k * k {
        return Err(Error::PreconditionViolated(format!(
            "n = {n} is below |X|^2 = {}",
            k * k
        )));
    }
    let counts = round_with_remainder(p.probs(), n as u64)
        .ok_or_else(|| Error::NumericalRankFailure("rounding left a negative remainder".into()))?;
    Ok(TypeVector::new(counts))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// Exact `p^n(T_{p,delta})` for the L1 typical set, summed over types.
pub fn typical_mass(p: &Distribution, delta: f64, n: usize, cap: u128) -> Result<f64> {
    let types = enumerate_types(p.len(), n, cap)?;
    let lf = ln_factorials(n);
    let ln_p: Vec<f64> = p.probs().iter().map(|v| v.ln()).collect();
    let mut mass = 0.0;
    for t in &types {
        if l1_distance(&t.normalized(), p.probs()) > delta + 1e-12 {
            continue;
        }
        let mut log_mass = lf[n];
        let mut impossible = false;
        for (x, &c) in t.counts().iter().enumerate() {
            if c == 0 {
                continue;
            }
            if p.get(x) == 0.0 {
                impossible = true;
                break;
            }
            log_mass += c as f64 * ln_p[x] - lf[c as usize];
        }
        if !impossible {
            mass += log_mass.exp();
        }
    }
    Ok(mass.min(1.0))
}

/// Typical-set mass over a range of blocklengths, with the smallest `n0`
/// such that `mass >= 1 - 2^{-n delta / 2}` for every scanned `n >= n0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalScan {
    pub rows: Vec<(usize, f64, f64)>,
    pub threshold: Option<usize>,
}

pub fn typical_mass_scan(p: &Distribution, delta: f64, n_max: usize, cap: u128) -> Result<TypicalScan> {
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mass = typical_mass(p, delta, n, cap)?;
        rows.push((n, mass, 1.0 - (-(n as f64) * delta / 2.0).exp2()));
    }
    let mut threshold = None;
    for &(n, mass, bound) in rows.iter().rev() {
        if mass >= bound {
            threshold = Some(n);
        } else {
            break;
        }
    }
    Ok(TypicalScan { rows, threshold })
}

/// All sequences of length `n` whose type lies within L1 distance `delta` of `p`.
pub fn typical_sequences(p: &Distribution, delta: f64, n: usize, cap: u128) -> Result<Vec<Vec<usize>>> {
    let k = p.len();
    let required = (k as u128).saturating_pow(n as u32);
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }
    let mut out = Vec::new();
    for idx in 0..required as usize {
        let seq = crate::channel::digits(idx, k, n);
        let t = TypeVector::of_sequence(&seq, k);
        if l1_distance(&t.normalized(), p.probs()) <= delta + 1e-12 {
            out.push(seq);
        }
    }
    Ok(out)
}

/// Joint law on `S x U`, rows over `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub rows: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeMismatch("joint law must be a nonempty rectangle".into()));
        }
        Distribution::new(rows.iter().flatten().copied().collect())?;
        Ok(Self { rows })
    }

    pub fn num_s(&self) -> usize {
        self.rows.len()
    }

    pub fn num_u(&self) -> usize {
        self.rows[0].len()
    }

    pub fn p_s(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn p_u(&self) -> Vec<f64> {
        (0..self.num_u()).map(|u| self.rows.iter().map(|r| r[u]).sum()).collect()
    }

    /// `p(s|u)` for every `s`, or `None` when `p_U(u) = 0`.
    pub fn s_given_u(&self, u: usize) -> Option<Vec<f64>> {
        let pu: f64 = self.rows.iter().map(|r| r[u]).sum();
        (pu > 0.0).then(|| self.rows.iter().map(|r| r[u] / pu).collect())
    }

    /// Smallest positive entry.
    pub fn beta(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn mutual_information(&self) -> f64 {
        let h: f64 = self.rows.iter().map(|r| shannon_entropy(r)).sum();
        (shannon_entropy(&self.p_s()) + shannon_entropy(&self.p_u()) - h).max(0.0)
    }

    pub fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

/// Joint empirical law of `(s^n, u^n)`, rows over `s`.
pub fn joint_type(s_seq: &[usize], u_seq: &[usize], num_s: usize, num_u: usize) -> Vec<Vec<f64>> {
    let n = s_seq.len() as f64;
    let mut rows = vec![vec![0.0; num_u]; num_s];
    for (&s, &u) in s_seq.iter().zip(u_seq) {
        rows[s][u] += 1.0 / n;
    }
    rows
}

/// Builds `u^n` of type `n p_U` whose joint type with `s^n` lies within `2 delta`
/// of `p_SU`. Every state except the most frequent one rounds its conditional
/// row to a type; the most frequent state absorbs the remainder.
pub fn joint_type_completion(s_seq: &[usize], p_su: &JointDistribution, delta: f64) -> Result<Vec<usize>> {
    let n = s_seq.len();
    let (ns, nu) = (p_su.num_s(), p_su.num_u());
    if s_seq.iter().any(|&s| s >= ns) {
        return Err(Error::AlphabetMismatch("state sequence uses unknown letters".into()));
    }
    let p_u = p_su.p_u();
    let target_u = counts_of(&p_u, n).ok_or_else(|| {
        Error::PreconditionViolated(format!("p_U = {p_u:?} is not a type with denominator {n}"))
    })?;
    let beta = p_su.beta();
    if delta >= beta / 2.0 {
        return Err(Error::PreconditionViolated(format!(
            "delta = {delta} must be below beta/2 = {}",
            beta / 2.0
        )));
    }
    let needed = 4.0 * nu as f64 * (ns as f64).max(1.0 / beta);
    if n as f64 <= needed {
        return Err(Error::PreconditionViolated(format!("n = {n} must exceed {needed}")));
    }
    let s_type = TypeVector::of_sequence(s_seq, ns);
    let dist = l1_distance(&s_type.normalized(), &p_su.p_s());
    if dist > delta + 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "state sequence type is at distance {dist} > delta = {delta}"
        )));
    }
    let big = s_type
        .counts()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(s, _)| s)
        .expect("nonempty");
    let mut joint = vec![vec![0u64; nu]; ns];
    let mut assigned = vec![0u64; nu];
    for s in 0..ns {
        if s == big || s_type.counts()[s] == 0 {
            continue;
        }
        let row = &p_su.rows[s];
        let ps: f64 = row.iter().sum();
        let w: Vec<f64> = row.iter().map(|v| v / ps).collect();
        let counts = round_with_remainder(&w, s_type.counts()[s]).ok_or_else(|| {
            Error::NumericalRankFailure(format!("row {s} cannot be rounded to a type"))
        })?;
        for u in 0..nu {
            assigned[u] += counts[u];
        }
        joint[s] = counts;
    }
    for u in 0..nu {
        joint[big][u] = target_u[u].checked_sub(assigned[u]).ok_or_else(|| {
            Error::NumericalRankFailure(format!("remainder for letter {u} is negative"))
        })?;
    }
    let mut u_seq = vec![0; n];
    let mut cursor: Vec<(usize, u64)> = vec![(0, 0); ns];
    for (i, &s) in s_seq.iter().enumerate() {
        let (ref mut u, ref mut used) = cursor[s];
        while *used >= joint[s][*u] {
            *u += 1;
            *used = 0;
        }
        u_seq[i] = *u;
        *used += 1;
    }
    Ok(u_seq)
}

/// `max_u t(u)/n * D(N(., u | s^n, u^n) / t(u) || p_S(.|u))`, blocks with
/// `t(u) = 0` contributing zero.
pub fn m_set_divergence(s_seq: &[usize], u_seq: &[usize], p_su: &JointDistribution) -> Result<f64> {
    if s_seq.len() != u_seq.len() {
        return Err(Error::LengthMismatch {
            left: s_seq.len(),
            right: u_seq.len(),
        });
    }
    let n = s_seq.len() as f64;
    let (ns, nu) = (p_su.num_s(), p_su.num_u());
    let mut counts = vec![vec![0u64; ns]; nu];
    for (&s, &u) in s_seq.iter().zip(u_seq) {
        counts[u][s] += 1;
    }
    let mut worst = 0.0f64;
    for (u, row) in counts.iter().enumerate() {
        let t: u64 = row.iter().sum();
        if t == 0 {
            continue;
        }
        let Some(cond) = p_su.s_given_u(u) else {
            return Ok(f64::INFINITY);
        };
        let emp: Vec<f64> = row.iter().map(|&c| c as f64 / t as f64).collect();
        worst = worst.max(t as f64 / n * kl_divergence(&emp, &cond));
    }
    Ok(worst)
}

/// Membership of `s^n` in the encoder set `M(u^n)`.
pub fn m_set_contains(s_seq: &[usize], u_seq: &[usize], p_su: &JointDistribution, delta: f64) -> Result<bool> {
    Ok(m_set_divergence(s_seq, u_seq, p_su)? <= delta / 2.0)
}

/// Bounded random variable for the concentration check.
pub trait BoundedSampler: Sync {
    fn upper(&self) -> f64;
    fn mean(&self) -> f64;
    fn sample(&self, rng: &mut Rng) -> f64;
}

/// Takes the value `b` with probability `p`, else zero.
#[derive(Debug, Clone, Copy)]
pub struct Bernoulli {
    pub p: f64,
    pub b: f64,
}

impl BoundedSampler for Bernoulli {
    fn upper(&self) -> f64 {
        self.b
    }
    fn mean(&self) -> f64 {
        self.p * self.b
    }
    fn sample(&self, rng: &mut Rng) -> f64 {
        if rng.random::<f64>() < self.p {
            self.b
        } else {
            0.0
        }
    }
}

/// Always `value`, with range `[0, upper]`.
#[derive(Debug, Clone, Copy)]
pub struct Constant {
    pub value: f64,
    pub upper: f64,
}

impl BoundedSampler for Constant {
    fn upper(&self) -> f64 {
        self.upper
    }
    fn mean(&self) -> f64 {
        self.value
    }
    fn sample(&self, _rng: &mut Rng) -> f64 {
        self.value
    }
}

/// `2 exp(-L eps^2 nu / (3 b))`.
pub fn chernoff_bound(l: usize, b: f64, nu: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::PreconditionViolated(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    if !(b > 0.0) || !(0.0..=b).contains(&nu) {
        return Err(Error::PreconditionViolated(format!("need 0 <= nu = {nu} <= b = {b}")));
    }
    Ok(2.0 * (-(l as f64) * eps * eps * nu / (3.0 * b)).exp())
}

/// Fraction of trials in which the sample mean of `l` draws leaves
/// `[(1 - eps) nu, (1 + eps) nu]`.
pub fn chernoff_empirical(
    sampler: &dyn BoundedSampler,
    l: usize,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    chernoff_bound(l, sampler.upper(), sampler.mean(), eps)?;
    let nu = sampler.mean();
    let (lo, hi) = ((1.0 - eps) * nu, (1.0 + eps) * nu);
    let deviations: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            let mean = (0..l).map(|_| sampler.sample(&mut rng)).sum::<f64>() / l as f64;
            usize::from(mean < lo - 1e-12 || mean > hi + 1e-12)
        })
        .sum();
    Ok(deviations as f64 / trials.max(1) as f64)
}

/// Monte-Carlo estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub successes: usize,
    pub trials: usize,
    pub low: f64,
    pub high: f64,
}

impl Estimate {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        let (low, high) = wilson_interval(successes, trials, 1.96);
        Self {
            value: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            successes,
            trials,
            low,
            high,
        }
    }
}

pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Uniform draw from the type class with the given counts.
pub fn sample_type_class(t: &TypeVector, rng: &mut Rng) -> Vec<usize> {
    let mut seq = t.sorted_sequence();
    seq.shuffle(rng);
    seq
}

/// Estimates the probability that `k` codewords drawn uniformly from
/// `T_{p_U}` cover every `delta`-typical state sequence, i.e. each such
/// `s^n` lies in `M(u_k)` for some `k`.
pub fn coverage_probability(
    p_su: &JointDistribution,
    n: usize,
    k: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    cap: u128,
) -> Result<Estimate> {
    let p_u = p_su.p_u();
    let counts = counts_of(&p_u, n).ok_or_else(|| {
        Error::PreconditionViolated(format!("p_U = {p_u:?} is not a type with denominator {n}"))
    })?;
    let u_type = TypeVector::new(counts);
    let p_s = Distribution::new(p_su.p_s())?;
    let typical = typical_sequences(&p_s, delta, n, cap)?;
    let work = (typical.len() as u128).saturating_mul(k as u128);
    if work > cap.saturating_mul(100) {
        return Err(Error::CapExceeded {
            required: work,
            cap: cap.saturating_mul(100),
        });
    }
    let successes: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t as u64);
            let words: Vec<Vec<usize>> = (0..k).map(|_| sample_type_class(&u_type, &mut rng)).collect();
            let covered = typical.iter().all(|s| {
                words
                    .iter()
                    .any(|u| m_set_contains(s, u, p_su, delta).unwrap_or(false))
            });
            usize::from(covered)
        })
        .sum();
    Ok(Estimate::from_counts(successes, trials))
}

/// Size of the conditional type class of `a^n` given `b^n`, with the sandwich
/// `[n (H(A|B) - f(n)), n H(A|B)]` in bits, `f(n) = |A||B| log(n+1) / n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalTypeCount {
    #[serde(serialize_with = "serialize_big")]
    pub count: BigUint,
    pub log2_count: f64,
    pub log2_lower: f64,
    pub log2_upper: f64,
    pub sandwich_holds: bool,
}

pub fn conditional_type_count(a: &[usize], b: &[usize], ka: usize, kb: usize) -> Result<ConditionalTypeCount> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let mut joint = vec![vec![0u64; ka]; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[y][x] += 1;
    }
    let mut count = BigUint::one();
    let mut nh = 0.0;
    for row in &joint {
        count *= multinomial(row);
        let t: u64 = row.iter().sum();
        if t > 0 {
            nh += t as f64 * TypeVector::new(row.clone()).entropy();
        }
    }
    let f = if n == 0 {
        0.0
    } else {
        (ka * kb) as f64 * ((n + 1) as f64).log2() / n as f64
    };
    let log2_count = log2_big(&count);
    let log2_lower = nh - n as f64 * f;
    let slack = 1e-9 * nh.max(1.0);
    Ok(ConditionalTypeCount {
        sandwich_holds: log2_count >= log2_lower - slack && log2_count <= nh + slack,
        count,
        log2_count,
        log2_lower,
        log2_upper: nh,
    })
}

/// Outcome of the two entropy-continuity inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityCheck {
    pub entropy_gap: f64,
    pub theta: f64,
    /// `-theta log(theta / |A|)`.
    pub l1_bound: f64,
    pub l1_holds: bool,
    pub divergence: f64,
    /// `-sqrt(2D) log(sqrt(2D) / |A|)`, when `sqrt(2D) <= 1/2`.
    pub divergence_bound: Option<f64>,
    pub divergence_holds: bool,
}

fn continuity_bound(theta: f64, k: usize) -> f64 {
    if theta <= 0.0 {
        0.0
    } else {
        -theta * (theta / k as f64).log2()
    }
}

pub fn entropy_continuity_check(p: &[f64], q: &[f64]) -> Result<ContinuityCheck> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let k = p.len();
    let theta = l1_distance(p, q);
    if theta > 0.5 + 1e-12 {
        return Err(Error::PreconditionViolated(format!("L1 distance {theta} exceeds 1/2")));
    }
    let gap = (shannon_entropy(p) - shannon_entropy(q)).abs();
    let l1_bound = continuity_bound(theta, k);
    let divergence = kl_divergence(p, q);
    let radius = (2.0 * divergence).sqrt();
    let divergence_bound = (radius <= 0.5).then(|| continuity_bound(radius, k));
    Ok(ContinuityCheck {
        entropy_gap: gap,
        theta,
        l1_bound,
        l1_holds: gap <= l1_bound + 1e-12,
        divergence,
        divergence_holds: divergence_bound.map_or(true, |b| gap <= b + 1e-12),
        divergence_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_size_examples() {
        assert_eq!(type_class_size(&TypeVector::new(vec![4, 0])).size, BigUint::from(1u32));
        assert_eq!(type_class_size(&TypeVector::new(vec![1, 1])).size, BigUint::from(2u32));
        let t = type_class_size(&TypeVector::new(vec![2, 2]));
        assert_eq!(t.size, BigUint::from(6u32));
        assert!((t.lower - 0.64).abs() < 1e-12);
        assert!((t.upper - 16.0).abs() < 1e-12);
        assert!(t.sandwich_holds);
    }

    #[test]
    fn nearest_type_examples() {
        let t = nearest_type(&Distribution::uniform(2), 4).unwrap();
        assert_eq!(t.counts(), &[2, 2]);
        let t = nearest_type(&Distribution::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(), 3).unwrap();
        assert_eq!(t.counts(), &[1, 2]);
        let p = Distribution::new(vec![0.4, 0.6]).unwrap();
        let t = nearest_type(&p, 7).unwrap();
        assert_eq!(t.counts(), &[3, 4]);
        assert!((l1_distance(&t.normalized(), p.probs()) - 2.0 / 35.0).abs() < 1e-12);
        assert!(matches!(nearest_type(&p, 3), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn typical_mass_examples() {
        let p = Distribution::new(vec![0.3, 0.7]).unwrap();
        assert!((typical_mass(&p, 2.0, 10, DEFAULT_ENUMERATION_CAP).unwrap() - 1.0).abs() < 1e-12);
        let det = Distribution::point(3, 1);
        assert!((typical_mass(&det, 0.01, 9, DEFAULT_ENUMERATION_CAP).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_count_examples() {
        let c = conditional_type_count(&[0, 0, 1, 1], &[0, 1, 0, 1], 2, 2).unwrap();
        assert_eq!(c.count, BigUint::from(4u32));
        assert!(c.sandwich_holds);
        let c = conditional_type_count(&[0, 1, 1, 0], &[0, 1, 1, 0], 2, 2).unwrap();
        assert_eq!(c.count, BigUint::from(1u32));
        assert!(conditional_type_count(&[0], &[0, 1], 2, 2).is_err());
    }

    #[test]
    fn continuity_example() {
        let c = entropy_continuity_check(&[1.0, 0.0], &[0.75, 0.25]).unwrap();
        assert!((c.entropy_gap - 0.811278).abs() < 1e-6);
        assert!((c.l1_bound - 1.0).abs() < 1e-12);
        assert!(c.l1_holds && c.divergence_holds);
    }

    #[test]
    fn chernoff_bound_example() {
        let b = chernoff_bound(1000, 1.0, 0.5, 0.1).unwrap();
        assert!((b - 2.0 * (-5.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!(chernoff_bound(10, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(45, 50, 1.96);
        assert!(lo < 0.9 && 0.9 < hi);
        assert_eq!(wilson_interval(10, 10, 1.96).1, 1.0);
    }
}
