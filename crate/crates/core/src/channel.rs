//! State-dependent classical-quantum channels, the channels derived from
//! them by an encoder, and the on-disk channel document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::Value;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen};
use crate::quantum::{DensityOperator, Distribution};

/// Spectral-norm tolerance for deciding that two states commute.
pub const TOL_COMMUTATOR: f64 = 1e-9;

/// The pair `(W, p)`: output states `rho[s, x]` and a state law `p` with full support.
#[derive(Debug, Clone, PartialEq)]
pub struct StateChannel {
    states: Vec<String>,
    inputs: Vec<String>,
    dim: usize,
    /// Row-major over `(s, x)`.
    rho: Vec<DensityOperator>,
    p: Distribution,
}

/// Records what the loader changed while building a channel.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    /// State labels removed because their probability was zero.
    pub stripped_states: Vec<String>,
}

impl StateChannel {
    /// `rho` is row-major over `(s, x)`. States with `p(s) = 0` are removed.
    pub fn new(
        states: Vec<String>,
        inputs: Vec<String>,
        p: Distribution,
        rho: Vec<DensityOperator>,
    ) -> Result<(Self, LoadReport)> {
        if states.is_empty() || inputs.is_empty() {
            return Err(Error::AlphabetMismatch("state and input alphabets must be nonempty".into()));
        }
        if p.len() != states.len() {
            return Err(Error::AlphabetMismatch(format!(
                "{} states but p has {} entries",
                states.len(),
                p.len()
            )));
        }
        if rho.len() != states.len() * inputs.len() {
            return Err(Error::AlphabetMismatch(format!(
                "expected {} output states, got {}",
                states.len() * inputs.len(),
                rho.len()
            )));
        }
        let dim = rho[0].dim();
        for (i, r) in rho.iter().enumerate() {
            if r.dim() != dim {
                return Err(Error::InvalidState {
                    state: states[i / inputs.len()].clone(),
                    input: inputs[i % inputs.len()].clone(),
                    source: Box::new(Error::DimensionMismatch { left: dim, right: r.dim() }),
                });
            }
        }
        let x_len = inputs.len();
        let mut report = LoadReport::default();
        let mut kept_states = Vec::new();
        let mut kept_p = Vec::new();
        let mut kept_rho = Vec::new();
        for (s, label) in states.into_iter().enumerate() {
            if p.get(s) > 0.0 {
                kept_states.push(label);
                kept_p.push(p.get(s));
                kept_rho.extend_from_slice(&rho[s * x_len..(s + 1) * x_len]);
            } else {
                report.stripped_states.push(label);
            }
        }
        let p = Distribution::new(kept_p)?;
        Ok((
            Self {
                states: kept_states,
                inputs,
                dim,
                rho: kept_rho,
                p,
            },
            report,
        ))
    }

    /// Channel whose output ignores the state.
    pub fn state_independent(inputs: Vec<String>, rho: Vec<DensityOperator>) -> Result<Self> {
        Ok(Self::new(vec!["0".into()], inputs, Distribution::point(1, 0), rho)?.0)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> &Distribution {
        &self.p
    }

    pub fn rho(&self, s: usize, x: usize) -> &DensityOperator {
        &self.rho[s * self.inputs.len() + x]
    }

    pub fn all_states(&self) -> &[DensityOperator] {
        &self.rho
    }

    /// The same channel with every output state replaced by `U rho U*`.
    pub fn conjugated(&self, u: &CMatrix) -> StateChannel {
        Self {
            rho: self.rho.iter().map(|r| r.conjugate(u)).collect(),
            ..self.clone()
        }
    }
}

/// Deterministic encoder `phi(s, u) = x`, the extremal points of the encoder set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Strategy {
    pub aux_size: usize,
    /// Row-major over `(s, u)`.
    pub table: Vec<usize>,
}

impl Strategy {
    pub fn new(num_states: usize, aux_size: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != num_states * aux_size {
            return Err(Error::ShapeMismatch(format!(
                "strategy table has {} cells, expected {}",
                table.len(),
                num_states * aux_size
            )));
        }
        Ok(Self { aux_size, table })
    }

    pub fn num_states(&self) -> usize {
        if self.aux_size == 0 {
            0
        } else {
            self.table.len() / self.aux_size
        }
    }

    pub fn get(&self, s: usize, u: usize) -> usize {
        self.table[s * self.aux_size + u]
    }

    /// Column `u` read as the function `s -> x`.
    pub fn column(&self, u: usize) -> Vec<usize> {
        (0..self.num_states()).map(|s| self.get(s, u)).collect()
    }
}

/// Stochastic encoder: one distribution over inputs per `(s, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedEncoder {
    pub aux_size: usize,
    /// Row-major over `(s, u)`.
    pub kernel: Vec<Distribution>,
}

impl RandomizedEncoder {
    pub fn from_strategy(strategy: &Strategy, num_inputs: usize) -> Self {
        Self {
            aux_size: strategy.aux_size,
            kernel: strategy
                .table
                .iter()
                .map(|&x| Distribution::point(num_inputs, x))
                .collect(),
        }
    }

    fn check(&self, ch: &StateChannel) -> Result<()> {
        if self.kernel.len() != ch.num_states() * self.aux_size {
            return Err(Error::AlphabetMismatch(format!(
                "encoder has {} rows, channel needs {} states x {} aux letters",
                self.kernel.len(),
                ch.num_states(),
                self.aux_size
            )));
        }
        if let Some(row) = self.kernel.iter().find(|r| r.len() != ch.num_inputs()) {
            return Err(Error::AlphabetMismatch(format!(
                "encoder row over {} inputs, channel has {}",
                row.len(),
                ch.num_inputs()
            )));
        }
        Ok(())
    }

    pub fn get(&self, s: usize, u: usize) -> &Distribution {
        &self.kernel[s * self.aux_size + u]
    }
}

/// `rho_u = sum_{s,x} p(s) V(x|s,u) rho_{s,x}`.
pub fn derived_channel(ch: &StateChannel, enc: &RandomizedEncoder) -> Result<Vec<DensityOperator>> {
    enc.check(ch)?;
    let d = ch.dim();
    Ok((0..enc.aux_size)
        .map(|u| {
            let mut m = CMatrix::zeros(d, d);
            for s in 0..ch.num_states() {
                let ps = ch.p().get(s);
                for (x, &w) in enc.get(s, u).probs().iter().enumerate() {
                    if w > 0.0 {
                        m += ch.rho(s, x).matrix().scale(ps * w);
                    }
                }
            }
            DensityOperator::from_matrix_unchecked(m)
        })
        .collect())
}

/// `rho_{s,u} = sum_x V(x|s,u) rho_{s,x}`, row-major over `(s, u)`.
pub fn conditional_derived_channel(
    ch: &StateChannel,
    enc: &RandomizedEncoder,
) -> Result<Vec<DensityOperator>> {
    enc.check(ch)?;
    let d = ch.dim();
    let mut out = Vec::with_capacity(enc.kernel.len());
    for s in 0..ch.num_states() {
        for u in 0..enc.aux_size {
            let mut m = CMatrix::zeros(d, d);
            for (x, &w) in enc.get(s, u).probs().iter().enumerate() {
                if w > 0.0 {
                    m += ch.rho(s, x).matrix().scale(w);
                }
            }
            out.push(DensityOperator::from_matrix_unchecked(m));
        }
    }
    Ok(out)
}

/// Mixed-radix digits of `index`, most significant first.
pub fn digits(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

fn product_labels(labels: &[String], n: usize) -> Vec<String> {
    let total = labels.len().pow(n as u32);
    (0..total)
        .map(|i| {
            digits(i, labels.len(), n)
                .iter()
                .map(|&k| labels[k].as_str())
                .collect::<Vec<_>>()
                .join(":")
        })
        .collect()
}

/// Bytes needed to store the `n`-fold product channel.
pub fn product_extension_bytes(ch: &StateChannel, n: usize) -> u128 {
    let letters = (ch.num_states() as u128 * ch.num_inputs() as u128).saturating_pow(n as u32);
    let entries = (ch.dim() as u128).saturating_pow(2 * n as u32);
    letters.saturating_mul(entries).saturating_mul(16)
}

/// The memoryless extension `(W^{(x)n}, p^{(x)n})` over sequence alphabets.
pub fn product_extension(ch: &StateChannel, n: usize, budget: &Budget) -> Result<StateChannel> {
    if n == 0 {
        return Err(Error::PreconditionViolated("blocklength must be positive".into()));
    }
    budget.check(product_extension_bytes(ch, n))?;
    if n == 1 {
        return Ok(ch.clone());
    }
    let (ns, nx) = (ch.num_states(), ch.num_inputs());
    let s_total = ns.pow(n as u32);
    let x_total = nx.pow(n as u32);
    let mut rho = Vec::with_capacity(s_total * x_total);
    let mut p = Vec::with_capacity(s_total);
    for si in 0..s_total {
        let s_seq = digits(si, ns, n);
        p.push(s_seq.iter().map(|&s| ch.p().get(s)).product());
        for xi in 0..x_total {
            let x_seq = digits(xi, nx, n);
            let m = linalg::kron_all(s_seq.iter().zip(&x_seq).map(|(&s, &x)| ch.rho(s, x).matrix()));
            rho.push(DensityOperator::from_matrix_unchecked(m));
        }
    }
    let total: f64 = p.iter().sum();
    let p = Distribution::new(p.into_iter().map(|v| v / total).collect())?;
    Ok(StateChannel {
        states: product_labels(&ch.states, n),
        inputs: product_labels(&ch.inputs, n),
        dim: ch.dim().pow(n as u32),
        rho,
        p,
    })
}

/// Result of testing whether all channel states commute.
#[derive(Debug, Clone)]
pub enum ClassicalEmbedding {
    Classical {
        /// Common eigenbasis, one vector per column.
        basis: CMatrix,
        /// `w[(s * |X| + x) * d + y] = <e_y, rho_{s,x} e_y>`.
        table: Vec<f64>,
    },
    NotClassical {
        max_commutator_norm: f64,
    },
}

/// Detects channels whose states pairwise commute and returns the classical
/// law in their common eigenbasis.
pub fn classical_embedding(ch: &StateChannel) -> ClassicalEmbedding {
    let all = ch.all_states();
    let mut worst = 0.0f64;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let (a, b) = (all[i].matrix(), all[j].matrix());
            let comm = a * b - b * a;
            worst = worst.max(linalg::normal_spectral_norm(&comm));
        }
    }
    if worst > TOL_COMMUTATOR {
        return ClassicalEmbedding::NotClassical {
            max_commutator_norm: worst,
        };
    }
    // A generic combination of commuting Hermitian matrices has the joint
    // eigenbasis as its eigenbasis.
    let d = ch.dim();
    let mut combo = CMatrix::zeros(d, d);
    for (k, r) in all.iter().enumerate() {
        let c = ((k as f64 + 1.0) * 0.618_033_988_749_895).fract() + 0.5;
        combo += r.matrix().scale(c);
    }
    let basis = HermitianEigen::new(&combo).vectors;
    let mut table = Vec::with_capacity(all.len() * d);
    for r in all {
        let rotated = basis.adjoint() * r.matrix() * &basis;
        table.extend((0..d).map(|y| rotated[(y, y)].re.max(0.0)));
    }
    ClassicalEmbedding::Classical { basis, table }
}

fn syntax(err: serde_json::Error) -> Error {
    Error::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

fn field<'a>(doc: &'a Value, name: &str) -> Result<&'a Value> {
    doc.get(name)
        .ok_or_else(|| Error::Parse(format!("missing field `{name}`")))
}

fn labels(doc: &Value, name: &str) -> Result<Vec<String>> {
    let arr = field(doc, name)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("`{name}` must be a list of labels")))?;
    let mut out = Vec::with_capacity(arr.len());
    for v in arr {
        let label = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(Error::Parse(format!("`{name}` entries must be strings"))),
        };
        if out.contains(&label) {
            return Err(Error::Parse(format!("duplicate label `{label}` in `{name}`")));
        }
        out.push(label);
    }
    Ok(out)
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Parse(format!("{what} must be a number")))
}

fn parse_matrix(v: &Value, d: usize, key: &str) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("rho[{key}] must be a {d}x{d} array")))?;
    if rows.len() != d {
        return Err(Error::Parse(format!("rho[{key}] has {} rows, expected {d}", rows.len())));
    }
    let mut m = CMatrix::zeros(d, d);
    for (r, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|row| row.len() == d)
            .ok_or_else(|| Error::Parse(format!("rho[{key}] row {r} must have {d} entries")))?;
        for (c, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse(format!("rho[{key}][{r}][{c}] must be [re, im]")))?;
            let what = format!("rho[{key}][{r}][{c}]");
            m[(r, c)] = Complex64::new(number(&pair[0], &what)?, number(&pair[1], &what)?);
        }
    }
    Ok(m)
}

/// Parses a channel document. See [`serialize_channel`] for the layout.
pub fn parse_channel(text: &str) -> Result<(StateChannel, LoadReport)> {
    let doc: Value = serde_json::from_str(text).map_err(syntax)?;
    let dim = field(&doc, "dim")?
        .as_u64()
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::Parse("`dim` must be a positive integer".into()))? as usize;
    let states = labels(&doc, "states")?;
    let inputs = labels(&doc, "inputs")?;
    let p_map = field(&doc, "p")?
        .as_object()
        .ok_or_else(|| Error::Parse("`p` must map state labels to probabilities".into()))?;
    for key in p_map.keys() {
        if !states.contains(key) {
            return Err(Error::Parse(format!("`p` names unknown state `{key}`")));
        }
    }
    let mut p = Vec::with_capacity(states.len());
    for s in &states {
        let v = p_map
            .get(s)
            .ok_or_else(|| Error::Parse(format!("missing probability for state `{s}`")))?;
        p.push(number(v, &format!("p[{s}]"))?);
    }
    let p = Distribution::new(p)?;
    let rho_map = field(&doc, "rho")?
        .as_object()
        .ok_or_else(|| Error::Parse("`rho` must map \"s|x\" keys to matrices".into()))?;
    let mut rho = Vec::with_capacity(states.len() * inputs.len());
    for (si, s) in states.iter().enumerate() {
        for x in &inputs {
            if p.get(si) == 0.0 {
                // Stripped below; the matrix may be absent.
                rho.push(DensityOperator::maximally_mixed(dim));
                continue;
            }
            let key = format!("{s}|{x}");
            let v = rho_map
                .get(&key)
                .ok_or_else(|| Error::Parse(format!("missing state ({s},{x})")))?;
            let m = parse_matrix(v, dim, &key)?;
            let state = DensityOperator::validate(m).map_err(|e| Error::InvalidState {
                state: s.clone(),
                input: x.clone(),
                source: Box::new(e),
            })?;
            rho.push(state);
        }
    }
    StateChannel::new(states, inputs, p, rho)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_label(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

/// Writes the channel document: fields `dim`, `states`, `inputs`, `p`
/// (label to probability) and `rho` (`"s|x"` to a `d x d` array of `[re, im]`).
/// Numbers carry 17 significant digits so that parsing restores them exactly.
pub fn serialize_channel(ch: &StateChannel) -> String {
    let mut out = String::new();
    let list = |v: &[String]| v.iter().map(|s| fmt_label(s)).collect::<Vec<_>>().join(", ");
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"dim\": {},", ch.dim());
    let _ = writeln!(out, "  \"states\": [{}],", list(&ch.states));
    let _ = writeln!(out, "  \"inputs\": [{}],", list(&ch.inputs));
    let p: Vec<String> = ch
        .states
        .iter()
        .enumerate()
        .map(|(s, label)| format!("{}: {}", fmt_label(label), fmt_f64(ch.p.get(s))))
        .collect();
    let _ = writeln!(out, "  \"p\": {{{}}},", p.join(", "));
    let _ = writeln!(out, "  \"rho\": {{");
    let mut entries = Vec::new();
    for (s, sl) in ch.states.iter().enumerate() {
        for (x, xl) in ch.inputs.iter().enumerate() {
            let m = ch.rho(s, x).matrix();
            let rows: Vec<String> = (0..ch.dim())
                .map(|r| {
                    let cells: Vec<String> = (0..ch.dim())
                        .map(|c| format!("[{}, {}]", fmt_f64(m[(r, c)].re), fmt_f64(m[(r, c)].im)))
                        .collect();
                    format!("[{}]", cells.join(", "))
                })
                .collect();
            entries.push(format!(
                "    {}: [{}]",
                fmt_label(&format!("{sl}|{xl}")),
                rows.join(", ")
            ));
        }
    }
    let _ = writeln!(out, "{}", entries.join(",\n"));
    let _ = writeln!(out, "  }}");
    out.push_str("}\n");
    out
}

/// Groups a flat row-major table into a map keyed by `(s, x)` labels.
pub fn label_table<T: Clone>(ch: &StateChannel, values: &[T]) -> BTreeMap<(String, String), T> {
    let mut out = BTreeMap::new();
    for (s, sl) in ch.states.iter().enumerate() {
        for (x, xl) in ch.inputs.iter().enumerate() {
            out.insert((sl.clone(), xl.clone()), values[s * ch.num_inputs() + x].clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip() -> StateChannel {
        let b = |i| DensityOperator::basis_state(2, i);
        let labels = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        StateChannel::new(
            labels(&["0", "1"]),
            labels(&["0", "1"]),
            Distribution::uniform(2),
            vec![b(0), b(1), b(1), b(0)],
        )
        .unwrap()
        .0
    }

    #[test]
    fn flip_xor_strategy_inverts_state() {
        let ch = flip();
        let phi = Strategy::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        let enc = RandomizedEncoder::from_strategy(&phi, 2);
        let rho = derived_channel(&ch, &enc).unwrap();
        for (u, r) in rho.iter().enumerate() {
            let diff = r.matrix() - DensityOperator::basis_state(2, u).matrix();
            assert!(linalg::max_abs(&diff) < 1e-15);
        }
        let cond = conditional_derived_channel(&ch, &enc).unwrap();
        for (i, r) in cond.iter().enumerate() {
            let diff = r.matrix() - DensityOperator::basis_state(2, i % 2).matrix();
            assert!(linalg::max_abs(&diff) < 1e-15);
        }
    }

    #[test]
    fn kernel_ignoring_u_gives_identical_states() {
        let ch = flip();
        let phi = Strategy::new(2, 3, vec![1, 1, 1, 0, 0, 0]).unwrap();
        let rho = derived_channel(&ch, &RandomizedEncoder::from_strategy(&phi, 2)).unwrap();
        assert_eq!(rho[0], rho[1]);
        assert_eq!(rho[1], rho[2]);
    }

    #[test]
    fn product_extension_of_flip() {
        let ch = flip();
        let two = product_extension(&ch, 2, &Budget::default()).unwrap();
        assert_eq!(two.dim(), 4);
        assert_eq!(two.num_states(), 4);
        assert_eq!(two.states()[1], "0:1");
        for s in 0..4 {
            assert!((two.p().get(s) - 0.25).abs() < 1e-15);
        }
        assert_eq!(product_extension(&ch, 1, &Budget::default()).unwrap(), ch);
        assert!(matches!(
            product_extension(&ch, 8, &Budget::bytes(1 << 20)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn embedding_detects_noncommuting_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityOperator::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let ch = StateChannel::state_independent(
            vec!["0".into(), "1".into()],
            vec![DensityOperator::basis_state(2, 0), plus],
        )
        .unwrap();
        match classical_embedding(&ch) {
            ClassicalEmbedding::NotClassical { max_commutator_norm } => {
                assert!((max_commutator_norm - 0.5).abs() < 1e-9)
            }
            _ => panic!("expected a non-classical channel"),
        }
        match classical_embedding(&flip()) {
            ClassicalEmbedding::Classical { table, .. } => {
                let mut sorted = table.clone();
                sorted.sort_by(f64::total_cmp);
                assert_eq!(sorted, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
            }
            _ => panic!("flip channel is classical"),
        }
    }

    #[test]
    fn parse_errors() {
        let ch = flip();
        let text = serialize_channel(&ch);
        let missing = text.replace("\"1|0\"", "\"9|9\"");
        match parse_channel(&missing) {
            Err(Error::Parse(msg)) => assert_eq!(msg, "missing state (1,0)"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_channel("{\"dim\": 2,"), Err(Error::Syntax { line: 1, .. })));
    }

    #[test]
    fn zero_mass_states_are_stripped() {
        let text = r#"{"dim": 1, "states": ["a", "b"], "inputs": ["x"],
            "p": {"a": 1.0, "b": 0.0}, "rho": {"a|x": [[[1.0, 0.0]]]}}"#;
        let (ch, report) = parse_channel(text).unwrap();
        assert_eq!(ch.states(), &["a".to_string()]);
        assert_eq!(report.stripped_states, vec!["b".to_string()]);
    }

    #[test]
    fn round_trip_is_textually_stable() {
        let text = serialize_channel(&flip());
        let (back, _) = parse_channel(&text).unwrap();
        assert_eq!(serialize_channel(&back), text);
        assert_eq!(back, flip());
    }
}
