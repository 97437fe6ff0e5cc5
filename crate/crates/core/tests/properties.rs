use gpcq_core::causal::{holevo_capacity, CausalOptions, DEFAULT_EPS};
use gpcq_core::channel::{classical_embedding, derived_channel, product_extension, ClassicalEmbedding};
use gpcq_core::linalg::{self, CMatrix};
use gpcq_core::noncausal::{gp_objective, GpWitness};
use gpcq_core::quantum::{average_state, kl_divergence, l1_distance, shannon_entropy};
use gpcq_core::types::{conditional_type_count, enumerate_types, entropy_continuity_check};
use gpcq_core::{
    causal_capacity, holevo_quantity, holevo_quantity_divergence, joint_type_completion, nearest_type,
    parse_channel, relative_entropy, serialize_channel, trace_distance, type_class_size,
    von_neumann_entropy, Budget, DensityOperator, Distribution, JointDistribution, RandomizedEncoder,
    StateChannel, Strategy as Table, TypeVector,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn ginibre(entries: &[f64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(entries[k], entries[k + 1])
    })
}

fn state_from(entries: &[f64], d: usize) -> DensityOperator {
    let g = ginibre(entries, d);
    let mut m = &g * g.adjoint();
    m += CMatrix::identity(d, d).scale(1e-6);
    let t = linalg::trace(&m).re;
    DensityOperator::validate(m.scale(1.0 / t)).unwrap()
}

fn unitary_from(entries: &[f64], d: usize) -> CMatrix {
    let g = ginibre(entries, d) + CMatrix::identity(d, d).scale(0.1);
    g.qr().q()
}

fn weights(raw: &[f64]) -> Distribution {
    Distribution::from_weights(&raw.iter().map(|x| x + 0.01).collect::<Vec<_>>()).unwrap()
}

fn entries(d: usize, count: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * d * d * count)
}

fn states(entries: &[f64], d: usize, count: usize) -> Vec<DensityOperator> {
    entries.chunks(2 * d * d).take(count).map(|c| state_from(c, d)).collect()
}

fn labels(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

fn channel(entries: &[f64], p: &[f64], d: usize, ns: usize, nx: usize) -> StateChannel {
    StateChannel::new(labels("s", ns), labels("x", nx), weights(p), states(entries, d, ns * nx))
        .unwrap()
        .0
}

fn diagonal_state(raw: &[f64]) -> DensityOperator {
    DensityOperator::from_diagonal(weights(raw).probs()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pinsker(a in prop::collection::vec(0.0f64..1.0, 3), b in prop::collection::vec(0.0f64..1.0, 3)) {
        let (p, q) = (weights(&a), weights(&b));
        let rho = DensityOperator::from_diagonal(p.probs()).unwrap();
        let sigma = DensityOperator::from_diagonal(q.probs()).unwrap();
        let d = relative_entropy(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(d >= t * t / (2.0 * std::f64::consts::LN_2) - 1e-9);
        prop_assert!((d - kl_divergence(p.probs(), q.probs())).abs() < 1e-9);
    }

    #[test]
    fn quantum_pinsker(e in entries(3, 2)) {
        let v = states(&e, 3, 2);
        let d = relative_entropy(&v[0], &v[1]).unwrap();
        let t = trace_distance(&v[0], &v[1]).unwrap();
        prop_assert!(d >= t * t / (2.0 * std::f64::consts::LN_2) - 1e-9);
    }

    #[test]
    fn entropy_bounds_and_unitary_invariance(e in entries(3, 1), u in entries(3, 1)) {
        let rho = state_from(&e, 3);
        let s = von_neumann_entropy(&rho);
        prop_assert!(s >= -1e-12 && s <= 3f64.log2() + 1e-9);
        let rotated = rho.conjugate(&unitary_from(&u, 3));
        prop_assert!((von_neumann_entropy(&rotated) - s).abs() < 1e-9);
    }

    #[test]
    fn holevo_paths_agree_and_are_bounded(e in entries(2, 3), q in prop::collection::vec(0.0f64..1.0, 3)) {
        let ens = states(&e, 2, 3);
        let q = weights(&q);
        let a = holevo_quantity(&q, &ens).unwrap();
        let b = holevo_quantity_divergence(&q, &ens).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= -1e-12 && a <= 1.0 + 1e-9);
        let bar = von_neumann_entropy(&average_state(&q, &ens).unwrap());
        prop_assert!(a <= bar + 1e-9);
    }

    #[test]
    fn holevo_certificate(e in entries(2, 3), q in prop::collection::vec(0.0f64..1.0, 3)) {
        let ens = states(&e, 2, 3);
        let best = holevo_capacity(&ens, DEFAULT_EPS).unwrap();
        prop_assert!(best.converged);
        prop_assert!(best.gap <= DEFAULT_EPS + 1e-12);
        let other = holevo_quantity(&weights(&q), &ens).unwrap();
        prop_assert!(other <= best.value + best.gap + 1e-9);
    }

    #[test]
    fn holevo_directional_derivative(e in entries(2, 3), q in prop::collection::vec(0.2f64..1.0, 3)) {
        let ens = states(&e, 2, 3);
        let q = weights(&q).into_vec();
        let h = 1e-5;
        let shift = |s: f64| {
            let mut v = q.clone();
            v[0] += s;
            v[1] -= s;
            holevo_quantity(&Distribution::new(v).unwrap(), &ens).unwrap()
        };
        let numeric = (shift(h) - shift(-h)) / (2.0 * h);
        let bar = average_state(&Distribution::new(q.clone()).unwrap(), &ens).unwrap();
        let analytic = relative_entropy(&ens[0], &bar).unwrap() - relative_entropy(&ens[1], &bar).unwrap();
        prop_assert!((numeric - analytic).abs() < 1e-5, "{numeric} vs {analytic}");
    }

    #[test]
    fn channel_round_trip(e in entries(2, 4), p in prop::collection::vec(0.0f64..1.0, 2)) {
        let ch = channel(&e, &p, 2, 2, 2);
        let text = serialize_channel(&ch);
        let (back, report) = parse_channel(&text).unwrap();
        prop_assert!(report.stripped_states.is_empty());
        prop_assert_eq!(&back, &ch);
        prop_assert_eq!(serialize_channel(&back), text);
    }

    #[test]
    fn derived_channel_commutes_with_products(
        e in entries(2, 4),
        p in prop::collection::vec(0.0f64..1.0, 2),
        v in prop::collection::vec(0.0f64..1.0, 8),
    ) {
        let ch = channel(&e, &p, 2, 2, 2);
        let (ns, nx, nu) = (2, 2, 2);
        let kernel: Vec<Distribution> = v.chunks(2).map(weights).collect();
        let enc = RandomizedEncoder { aux_size: nu, kernel };
        let single = derived_channel(&ch, &enc).unwrap();
        let ext = product_extension(&ch, 2, &Budget::default()).unwrap();
        let mut rows = Vec::new();
        for s1 in 0..ns {
            for s2 in 0..ns {
                for u1 in 0..nu {
                    for u2 in 0..nu {
                        let mut w = vec![0.0; nx * nx];
                        for x1 in 0..nx {
                            for x2 in 0..nx {
                                w[x1 * nx + x2] = enc.get(s1, u1).get(x1) * enc.get(s2, u2).get(x2);
                            }
                        }
                        rows.push(Distribution::from_weights(&w).unwrap());
                    }
                }
            }
        }
        let block = derived_channel(&ext, &RandomizedEncoder { aux_size: nu * nu, kernel: rows }).unwrap();
        for u1 in 0..nu {
            for u2 in 0..nu {
                let want = single[u1].tensor(&single[u2]);
                let got = &block[u1 * nu + u2];
                prop_assert!(linalg::max_abs(&(got.matrix() - want.matrix())) < 1e-12);
            }
        }
    }

    #[test]
    fn classical_embedding_matches_shannon(
        d in prop::collection::vec(0.0f64..1.0, 9),
        q in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let rho: Vec<DensityOperator> = d.chunks(3).map(diagonal_state).collect();
        let ch = StateChannel::state_independent(labels("x", 3), rho.clone()).unwrap();
        let ClassicalEmbedding::Classical { table, .. } = classical_embedding(&ch) else {
            return Err(TestCaseError::fail("diagonal channel is classical"));
        };
        let q = weights(&q);
        let py: Vec<f64> = (0..3).map(|y| (0..3).map(|x| q.get(x) * table[x * 3 + y]).sum()).collect();
        let cond: f64 = (0..3).map(|x| q.get(x) * shannon_entropy(&table[x * 3..x * 3 + 3])).sum();
        let mi = shannon_entropy(&py) - cond;
        prop_assert!((mi - holevo_quantity(&q, &rho).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn gp_objective_at_most_log_d(
        e in entries(2, 4),
        p in prop::collection::vec(0.0f64..1.0, 2),
        q in prop::collection::vec(0.0f64..1.0, 6),
        table in prop::collection::vec(0usize..2, 6),
    ) {
        let ch = channel(&e, &p, 2, 2, 2);
        let w = GpWitness {
            n: 1,
            aux_size: 3,
            q_given_s: q.chunks(3).map(|r| weights(r).into_vec()).collect(),
            strategy: Table::new(2, 3, table).unwrap(),
            value: 0.0,
        };
        let v = gp_objective(&ch, &w, &Budget::default()).unwrap();
        prop_assert!(v <= 1.0 + 1e-9);
    }

    #[test]
    fn type_class_sandwich(counts in prop::collection::vec(0u64..8, 1..5)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let f = TypeVector::new(counts);
        prop_assert!(type_class_size(&f).sandwich_holds);
    }

    #[test]
    fn nearest_type_is_close(raw in prop::collection::vec(0.0f64..1.0, 2..5), n in 1usize..40) {
        let p = weights(&raw);
        let k = p.len();
        prop_assume!(n >= k * k);
        let t = nearest_type(&p, n).unwrap();
        prop_assert_eq!(t.n(), n as u64);
        prop_assert!(l1_distance(&t.normalized(), p.probs()) <= k as f64 / n as f64 + 1e-12);
    }

    #[test]
    fn entropy_continuity(a in prop::collection::vec(0.0f64..1.0, 3), b in prop::collection::vec(-0.05f64..0.05, 3)) {
        let p = weights(&a);
        let q = Distribution::from_weights(
            &p.probs().iter().zip(&b).map(|(x, e)| (x + e).max(1e-3)).collect::<Vec<_>>(),
        ).unwrap();
        prop_assume!(l1_distance(p.probs(), q.probs()) <= 0.5);
        let c = entropy_continuity_check(p.probs(), q.probs()).unwrap();
        prop_assert!(c.l1_holds);
        prop_assert!(c.divergence_holds);
    }

    #[test]
    fn conditional_type_count_matches_enumeration(
        a in prop::collection::vec(0usize..2, 1..9),
        b_seed in prop::collection::vec(0usize..3, 8),
    ) {
        let n = a.len();
        let b = &b_seed[..n];
        let c = conditional_type_count(&a, b, 2, 3).unwrap();
        let joint = |x: &[usize]| {
            let mut j = [[0usize; 2]; 3];
            for (&xi, &yi) in x.iter().zip(b) {
                j[yi][xi] += 1;
            }
            j
        };
        let target = joint(&a);
        let brute = (0..1usize << n)
            .filter(|bits| {
                let x: Vec<usize> = (0..n).map(|i| (bits >> i) & 1).collect();
                joint(&x) == target
            })
            .count();
        prop_assert_eq!(c.count.to_string(), brute.to_string());
        prop_assert!(c.sandwich_holds);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn causal_value_monotone_in_aux_size(e in entries(2, 4), p in prop::collection::vec(0.0f64..1.0, 2)) {
        let ch = channel(&e, &p, 2, 2, 2);
        let mut last = 0.0;
        for k in 1..=4 {
            let sol = causal_capacity(&ch, &CausalOptions { aux_size: Some(k), ..Default::default() }).unwrap();
            prop_assert!(sol.value >= last - 1e-6, "k={k}: {} < {last}", sol.value);
            prop_assert!(sol.value <= 1.0 + 1e-9);
            last = sol.value;
        }
    }
}

#[test]
fn type_classes_partition_sequences() {
    for (k, n) in [(2, 10), (3, 6), (4, 4)] {
        let total: num_bigint::BigUint = enumerate_types(k, n, u128::MAX)
            .unwrap()
            .iter()
            .map(|f| type_class_size(f).size)
            .sum();
        assert_eq!(total, num_bigint::BigUint::from(k).pow(n as u32));
    }
}

#[test]
fn joint_completion_lands_within_two_delta() {
    let p_su = JointDistribution::new(vec![vec![0.3, 0.2], vec![0.2, 0.3]]).unwrap();
    let delta = 0.08;
    let n = 50;
    let mut rng = gpcq_core::rng::stream(11, 0);
    for trial in 0..50 {
        let ones = 23 + trial % 5;
        let mut s: Vec<usize> = (0..n).map(|i| usize::from(i < ones)).collect();
        use rand::seq::SliceRandom;
        s.shuffle(&mut rng);
        let u = joint_type_completion(&s, &p_su, delta).unwrap();
        let t = TypeVector::of_sequence(&u, 2);
        assert_eq!(t.counts(), &[25, 25]);
        let joint = gpcq_core::types::joint_type(&s, &u, 2, 2);
        let dist = l1_distance(&joint.concat(), &p_su.flat());
        assert!(dist <= 2.0 * delta + 1e-12, "distance {dist}");
    }
}
