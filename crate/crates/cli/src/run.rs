use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context as _;
use serde::Serialize;
use serde_json::{json, Value};

use gpcq_core::channel::digits;
use gpcq_core::coding::{simulate_rate_error_curve, Scheme, SimulationOptions};
use gpcq_core::schur::{
    central_projectors, dimension_bounds, enumerate_frames, kostka_test_with, Limits, YoungFrame,
};
use gpcq_core::types::{enumerate_types, typical_mass_scan, TypeVector, DEFAULT_ENUMERATION_CAP};
use gpcq_core::{
    causal_capacity, coverage_probability, holevo_capacity, nearest_type, noncausal_lower_bound,
    parse_channel, type_class_size, typical_mass, CausalOptions, ClassicalEmbedding, Distribution,
    JointDistribution, NoncausalOptions, StateChannel,
};

use crate::args::{
    CausalArgs, HolevoArgs, NoncausalArgs, SchemeArg, SchurArgs, SchurOp, SimulateArgs, TypesArgs, TypesOp,
    ValidateArgs,
};
use crate::manifest::sha256_hex;

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.into())
    }
}

pub type Outcome = std::result::Result<Report, Failure>;

/// What a command prints: `json` under `--json`, `text` otherwise.
pub struct Report {
    pub json: Value,
    pub text: String,
    pub channel_sha256: Option<String>,
    pub seed: Option<u64>,
}

impl Report {
    fn new(json: Value, text: String) -> Self {
        Self {
            json,
            text,
            channel_sha256: None,
            seed: None,
        }
    }

    fn with_channel(mut self, hash: String) -> Self {
        self.channel_sha256 = Some(hash);
        self
    }

    fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

fn load(path: &Path) -> std::result::Result<(StateChannel, Vec<String>, String), Failure> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let (ch, report) = parse_channel(&text).with_context(|| format!("invalid channel {}", path.display()))?;
    Ok((ch, report.stripped_states, sha256_hex(&bytes)))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

/// `table[s][u]` as input labels.
fn label_strategy(ch: &StateChannel, table: &[usize], aux: usize) -> Vec<Vec<String>> {
    (0..ch.num_states())
        .map(|s| (0..aux).map(|u| ch.inputs()[table[s * aux + u]].clone()).collect())
        .collect()
}

fn block_label(labels: &[String], index: usize, n: usize) -> String {
    digits(index, labels.len(), n)
        .into_iter()
        .map(|i| labels[i].as_str())
        .collect::<Vec<_>>()
        .join(":")
}

pub fn validate(a: &ValidateArgs) -> Outcome {
    let (ch, stripped, hash) = load(&a.file)?;
    let (classical, commutator) = match gpcq_core::classical_embedding(&ch) {
        ClassicalEmbedding::Classical { .. } => (true, 0.0),
        ClassicalEmbedding::NotClassical { max_commutator_norm } => (false, max_commutator_norm),
    };
    let json = json!({
        "valid": true,
        "dim": ch.dim(),
        "states": ch.states(),
        "inputs": ch.inputs(),
        "p": ch.p().probs(),
        "stripped_states": stripped,
        "classical": classical,
        "max_commutator_norm": commutator,
    });
    let mut text = String::new();
    writeln!(text, "valid channel: dim {}, {} states, {} inputs", ch.dim(), ch.num_states(), ch.num_inputs()).ok();
    if !stripped.is_empty() {
        writeln!(text, "stripped zero-probability states: {}", stripped.join(", ")).ok();
    }
    if classical {
        writeln!(text, "all output states commute").ok();
    } else {
        writeln!(text, "not classical (max commutator norm {commutator:.6})").ok();
    }
    Ok(Report::new(json, text).with_channel(hash))
}

pub fn causal(a: &CausalArgs) -> Outcome {
    let (ch, _, hash) = load(&a.file)?;
    let aux_size = if a.loose_aux {
        Some(gpcq_core::causal::loose_aux_size(ch.num_states(), ch.num_inputs()))
    } else {
        a.aux_size
    };
    let opts = CausalOptions {
        aux_size,
        eps: a.eps,
        cap: a.cap,
        ..CausalOptions::default()
    };
    let sol = causal_capacity(&ch, &opts)?;
    let table = label_strategy(&ch, &sol.strategy.table, sol.strategy.aux_size);
    let json = json!({
        "value": sol.value,
        "gap": sol.duality_gap,
        "converged": sol.converged,
        "aux_size": sol.aux_size,
        "strategy": table,
        "q": sol.q,
        "inner_iterations": sol.inner_iterations,
        "strategies_evaluated": sol.strategies_evaluated,
    });
    let mut text = String::new();
    writeln!(text, "causal capacity: {:.9} bits (gap {:.2e})", sol.value, sol.duality_gap).ok();
    writeln!(text, "aux letters: {} searched, {} used", sol.aux_size, sol.strategy.aux_size).ok();
    for (u, q) in sol.q.iter().enumerate() {
        let col: Vec<String> = (0..ch.num_states())
            .map(|s| format!("{}->{}", ch.states()[s], table[s][u]))
            .collect();
        writeln!(text, "  u{u}  q={q:.9}  {}", col.join(" ")).ok();
    }
    Ok(Report::new(json, text).with_channel(hash))
}

pub fn noncausal(a: &NoncausalArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let (ch, _, hash) = load(&a.file)?;
    let mut opts = NoncausalOptions::new(a.n, a.seed);
    opts.aux_size = a.aux_size;
    opts.restarts = a.restarts;
    opts.allow_long_blocks = a.allow_long_blocks;
    opts.budget = gpcq_core::Budget::from_env()?;
    let w = noncausal_lower_bound(&ch, &opts)?;
    let rows = w.q_given_s.len();
    let state_labels: Vec<String> = (0..rows).map(|i| block_label(ch.states(), i, a.n)).collect();
    let strategy: Vec<Vec<String>> = (0..rows)
        .map(|s| {
            (0..w.aux_size)
                .map(|u| block_label(ch.inputs(), w.strategy.get(s, u), a.n))
                .collect()
        })
        .collect();
    let json = json!({
        "n": w.n,
        "value": w.value,
        "aux_size": w.aux_size,
        "states": state_labels,
        "q_given_s": w.q_given_s,
        "strategy": strategy,
    });
    let mut text = String::new();
    writeln!(text, "non-causal lower bound at n={}: {:.9} bits per use", w.n, w.value).ok();
    writeln!(text, "aux letters: {}", w.aux_size).ok();
    Ok(Report::new(json, text).with_channel(hash).with_seed(a.seed))
}

pub fn holevo(a: &HolevoArgs) -> Outcome {
    let (ch, _, hash) = load(&a.file)?;
    let s = match &a.state {
        Some(label) => ch
            .states()
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| Failure::Usage(format!("unknown state `{label}`")))?,
        None if ch.num_states() == 1 => 0,
        None => return Err(Failure::Usage("--state is required for channels with several states".into())),
    };
    let ensemble: Vec<_> = (0..ch.num_inputs()).map(|x| ch.rho(s, x).clone()).collect();
    let h = holevo_capacity(&ensemble, a.eps)?;
    let json = json!({
        "state": ch.states()[s],
        "value": h.value,
        "q": h.q,
        "gap": h.gap,
        "iterations": h.iterations,
        "converged": h.converged,
    });
    let mut text = String::new();
    writeln!(text, "Holevo capacity at state {}: {:.9} bits (gap {:.2e})", ch.states()[s], h.value, h.gap).ok();
    for (x, q) in h.q.iter().enumerate() {
        writeln!(text, "  {}  q={q:.9}", ch.inputs()[x]).ok();
    }
    Ok(Report::new(json, text).with_channel(hash))
}

#[derive(Serialize)]
struct TypesRow {
    n: usize,
    value: String,
    lower_bound: f64,
    upper_bound: f64,
}

fn csv_text<T: Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn need<T: Copy>(v: Option<T>, flag: &str, op: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for --op {op}")))
}

fn parse_rows(text: &str) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Failure::Usage(format!("`{v}` is not a number in --p-su")))
                })
                .collect()
        })
        .collect()
}

pub fn types(a: &TypesArgs) -> Outcome {
    match a.op {
        TypesOp::ClassSize => {
            if a.counts.is_empty() {
                return Err(Failure::Usage("--counts is required for --op class-size".into()));
            }
            let f = TypeVector::new(a.counts.clone());
            let c = type_class_size(&f);
            let row = TypesRow {
                n: f.n() as usize,
                value: c.size.to_string(),
                lower_bound: c.lower,
                upper_bound: c.upper,
            };
            let json = json!({"counts": a.counts, "n": row.n, "size": row.value, "lower": c.lower, "upper": c.upper, "sandwich_holds": c.sandwich_holds});
            Ok(Report::new(json, csv_text(&[row])?))
        }
        TypesOp::Nearest => {
            let n = need(a.n, "n", "nearest")?;
            let p = Distribution::new(a.p.clone())?;
            let t = nearest_type(&p, n)?;
            let q = t.normalized();
            let dist = gpcq_core::quantum::l1_distance(p.probs(), &q);
            let json = json!({"n": n, "counts": t.counts(), "type": q, "l1_distance": dist, "bound": 2.0 * p.len() as f64 / n as f64});
            let text = format!(
                "counts {:?}\ntype {:?}\nl1 distance {dist:.6} (bound {:.6})\n",
                t.counts(),
                q,
                2.0 * p.len() as f64 / n as f64
            );
            Ok(Report::new(json, text))
        }
        TypesOp::TypicalMass => {
            let n = need(a.n, "n", "typical-mass")?;
            let delta = need(a.delta, "delta", "typical-mass")?;
            let p = Distribution::new(a.p.clone())?;
            if a.sweep {
                let scan = typical_mass_scan(&p, delta, n, DEFAULT_ENUMERATION_CAP)?;
                let rows: Vec<TypesRow> = scan
                    .rows
                    .iter()
                    .map(|&(n, mass, bound)| TypesRow {
                        n,
                        value: mass.to_string(),
                        lower_bound: bound,
                        upper_bound: 1.0,
                    })
                    .collect();
                let json = json!({"rows": scan.rows.iter().map(|r| json!({"n": r.0, "mass": r.1, "bound": r.2})).collect::<Vec<_>>(), "threshold": scan.threshold});
                Ok(Report::new(json, csv_text(&rows)?))
            } else {
                let mass = typical_mass(&p, delta, n, DEFAULT_ENUMERATION_CAP)?;
                let bound = 1.0 - (-(n as f64) * delta / 2.0).exp2();
                let row = TypesRow {
                    n,
                    value: mass.to_string(),
                    lower_bound: bound,
                    upper_bound: 1.0,
                };
                let json = json!({"n": n, "delta": delta, "mass": mass, "bound": bound});
                Ok(Report::new(json, csv_text(&[row])?))
            }
        }
        TypesOp::Coverage => {
            let n = need(a.n, "n", "coverage")?;
            let delta = need(a.delta, "delta", "coverage")?;
            let k = need(a.k, "k", "coverage")?;
            let seed = need(a.seed, "seed", "coverage")?;
            let rows = parse_rows(a.p_su.as_deref().ok_or_else(|| Failure::Usage("--p-su is required for --op coverage".into()))?)?;
            let joint = JointDistribution::new(rows)?;
            let est = coverage_probability(&joint, n, k, delta, a.trials, seed, DEFAULT_ENUMERATION_CAP)?;
            let row = TypesRow {
                n,
                value: est.value.to_string(),
                lower_bound: est.low,
                upper_bound: est.high,
            };
            Ok(Report::new(to_json(&est), csv_text(&[row])?).with_seed(seed))
        }
    }
}

#[derive(Serialize)]
struct SchurRow {
    frame: String,
    dim: String,
    entropy: f64,
    lower: f64,
    upper: f64,
}

pub fn schur(a: &SchurArgs) -> Outcome {
    if a.d == 0 || a.n == 0 {
        return Err(Failure::Usage("--d and --n must be positive".into()));
    }
    let frames = enumerate_frames(a.d, a.n);
    match a.op {
        SchurOp::Frames => {
            let rows: Vec<&[usize]> = frames.iter().map(YoungFrame::rows).collect();
            let text = frames.iter().map(|f| format!("{f}\n")).collect();
            Ok(Report::new(json!({"d": a.d, "n": a.n, "frames": rows}), text))
        }
        SchurOp::Dims => {
            let rows: Vec<SchurRow> = frames
                .iter()
                .map(|f| {
                    let b = dimension_bounds(f, a.d);
                    SchurRow {
                        frame: f.to_string(),
                        dim: gpcq_core::schur::irrep_dimension(f).to_string(),
                        entropy: b.entropy,
                        lower: b.log2_lower,
                        upper: b.log2_upper,
                    }
                })
                .collect();
            let json = json!({"d": a.d, "n": a.n, "rows": rows.iter().map(to_json).collect::<Vec<_>>()});
            Ok(Report::new(json, csv_text(&rows)?))
        }
        SchurOp::Check => {
            let limits = Limits {
                budget: gpcq_core::Budget::from_env()?,
                ..Limits::default()
            };
            let ps = central_projectors(a.d, &frames, a.n, &limits)?;
            let dim = ps[0].nrows();
            let mut sum = gpcq_core::linalg::RMatrix::zeros(dim, dim);
            let mut idempotency: f64 = 0.0;
            let mut orthogonality: f64 = 0.0;
            for (i, p) in ps.iter().enumerate() {
                sum += p;
                idempotency = idempotency.max((p * p - p).abs().max());
                for q in &ps[i + 1..] {
                    orthogonality = orthogonality.max((p * q).abs().max());
                }
            }
            let completeness = (sum - gpcq_core::linalg::RMatrix::identity(dim, dim)).abs().max();
            let mut kostka_agree = true;
            for f in enumerate_types(a.d, a.n, DEFAULT_ENUMERATION_CAP)? {
                for (l, p) in frames.iter().zip(&ps) {
                    kostka_agree &= kostka_test_with(p, &f, l).agree();
                }
            }
            let sandwich = frames.iter().all(|f| dimension_bounds(f, a.d).holds);
            let tol = gpcq_core::schur::TOL_PROJECTOR;
            let pass = completeness <= tol && orthogonality <= tol && idempotency <= tol && kostka_agree && sandwich;
            let json = json!({
                "d": a.d, "n": a.n,
                "completeness_residual": completeness,
                "orthogonality_residual": orthogonality,
                "idempotency_residual": idempotency,
                "kostka_agree": kostka_agree,
                "sandwich_holds": sandwich,
                "pass": pass,
            });
            let text = format!(
                "completeness {completeness:.3e}\northogonality {orthogonality:.3e}\nidempotency {idempotency:.3e}\nkostka paths agree: {kostka_agree}\ndimension sandwich: {sandwich}\n{}\n",
                if pass { "PASS" } else { "FAIL" }
            );
            Ok(Report::new(json, text))
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Outcome {
    if a.trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let (ch, _, hash) = load(&a.file)?;
    let scheme = match a.scheme {
        SchemeArg::CausalSequential => Scheme::CausalSequential,
        SchemeArg::NoncausalSqrt => Scheme::NoncausalSqrt,
    };
    let mut opts = SimulationOptions::new(scheme, a.rates.clone(), a.ns.clone(), a.trials, a.seed);
    opts.k = a.k;
    opts.delta = a.delta;
    opts.limits.budget = gpcq_core::Budget::from_env()?;
    let rows = simulate_rate_error_curve(&ch, &opts)?;
    let csv = csv_text(&rows)?;
    let text = match &a.out {
        Some(path) => {
            std::fs::write(path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
            format!("wrote {} rows to {}\n", rows.len(), path.display())
        }
        None => csv,
    };
    let json = Value::Array(rows.iter().map(to_json).collect());
    Ok(Report::new(json, text).with_channel(hash).with_seed(a.seed))
}
