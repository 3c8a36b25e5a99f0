//! Acceptance gate: one test per release criterion.  Each test prints a
//! `acceptance criterion N: PASS — …` line (visible with `--nocapture`);
//! the harness itself shows one pass/fail line per criterion either way.

use std::time::Instant;

use qentropy::entropy::von_neumann;
use qentropy::{
    build_chain_net, check_entropic, check_holevo_bound, check_mre_quantum,
    check_pure_identities, classical_relative_entropy, classicize, counterexample_suite,
    nats_to_bits, purify, quantum_entropy, quantum_relative_entropy, random_channel,
    random_density_matrix, random_dist, random_ensemble, random_instance, random_stochastic,
    random_unitary, run_batch, trial_seed, Complex64, ComplexMatrix, Ensemble, InequalityId,
    Instance, KrausChannel, LabeledState, Marking, Quantity, RumSystem, SubsystemLayout, LN_2,
};

const TOL: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn qubit_layout(label: &str) -> SubsystemLayout {
    SubsystemLayout::single(label, 2).unwrap()
}

fn diagonal_state(probs: &[f64]) -> LabeledState {
    let n = probs.len();
    let layout = SubsystemLayout::single("a", n).unwrap();
    let m = ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(probs[i]) } else { c(0.0) });
    LabeledState::new(layout, m).unwrap()
}

fn pure_qubit(a0: Complex64, a1: Complex64) -> LabeledState {
    LabeledState::new(qubit_layout("q"), ComplexMatrix::outer(&[a0, a1])).unwrap()
}

/// The half-|0⟩ / half-|+⟩ preparation used by several criteria.
fn zero_plus_ensemble() -> Ensemble {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Ensemble::new(
        vec![0.5, 0.5],
        vec![pure_qubit(c(1.0), c(0.0)), pure_qubit(c(r), c(r))],
        "x",
    )
    .unwrap()
}

#[test]
fn c01_mixed_qubit_entropy_constants() {
    let rho = diagonal_state(&[0.5, 0.5]);
    von_neumann(&rho); // warm-up outside the timed window
    let clock = Instant::now();
    let nats = von_neumann(&rho);
    let bits = nats_to_bits(nats);
    let elapsed = clock.elapsed();
    assert!((nats - 0.6931).abs() < 1e-4, "S = {nats} nats");
    assert!((bits - 1.0000).abs() < 1e-4, "S = {bits} bits");
    assert!(
        elapsed.as_micros() < 1000,
        "entropy of a mixed qubit took {elapsed:?}"
    );
    println!(
        "acceptance criterion 1: PASS — S(I/2) = {nats:.4} nats / {bits:.4} bits in {elapsed:?}"
    );
}

#[test]
fn c02_strong_subadditivity_batch() {
    let layout = SubsystemLayout::new(vec![("a", 2), ("b", 2), ("e", 2)]).unwrap();
    let clock = Instant::now();
    let mut min_margin = f64::INFINITY;
    for k in 0..1000u64 {
        let rank = (k as usize % 8) + 1;
        let rho = random_density_matrix(&layout, rank, trial_seed(401, k)).unwrap();
        let v = check_entropic(InequalityId::CmiNonneg, &Instance::State(rho)).unwrap();
        assert!(v.margin() >= -TOL, "trial {k}: margin {}", v.margin());
        min_margin = min_margin.min(v.margin());
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "batch took {elapsed:?}");
    println!(
        "acceptance criterion 2: PASS — 1000 tripartite states, min CMI margin {min_margin:.3e} in {elapsed:?}"
    );
}

#[test]
fn c03_relative_entropy_monotonicity_and_embedding() {
    let layout = qubit_layout("a");
    let mut min_margin = f64::INFINITY;
    for k in 0..500u64 {
        let ch = random_channel(2, 2, 1 + (k as usize % 4), trial_seed(577, k)).unwrap();
        let rho = random_density_matrix(&layout, 2, trial_seed(578, k)).unwrap();
        let sigma = random_density_matrix(&layout, 2, trial_seed(579, k)).unwrap();
        let v = check_mre_quantum(&ch, &rho, &sigma).unwrap();
        assert!(v.margin() >= -TOL, "trial {k}: margin {}", v.margin());
        min_margin = min_margin.min(v.margin());
    }

    let mut max_gap = 0.0f64;
    for k in 0..200u64 {
        let t = random_stochastic(2, 2, trial_seed(601, k));
        let p = random_dist(2, trial_seed(602, k));
        let q = random_dist(2, trial_seed(603, k));
        let ch = KrausChannel::from_stochastic(&t);

        let dq_before = quantum_relative_entropy(
            &diagonal_state(p.probs()),
            &diagonal_state(q.probs()),
        )
        .unwrap();
        let dc_before = classical_relative_entropy(&p, &q).unwrap();
        assert!((dq_before - dc_before).abs() <= TOL, "trial {k} before");
        max_gap = max_gap.max((dq_before - dc_before).abs());

        let after_p = ch.apply(&diagonal_state(p.probs()), "a").unwrap();
        let after_q = ch.apply(&diagonal_state(q.probs()), "a").unwrap();
        let dq_after = quantum_relative_entropy(&after_p, &after_q).unwrap();
        let dc_after =
            classical_relative_entropy(&t.apply(&p).unwrap(), &t.apply(&q).unwrap()).unwrap();
        assert!((dq_after - dc_after).abs() <= TOL, "trial {k} after");
        max_gap = max_gap.max((dq_after - dc_after).abs());
    }
    println!(
        "acceptance criterion 3: PASS — 500 channel monotonicity margins ≥ {min_margin:.3e}, embedding gap ≤ {max_gap:.3e}"
    );
}

#[test]
fn c04_core_inequality_batches_and_purification_chain() {
    let ids = [
        InequalityId::ArakiLieb,
        InequalityId::CondBounds,
        InequalityId::EntropyMeasurement,
        InequalityId::CondOnClassical,
        InequalityId::UnitalMonotone,
        InequalityId::FunctionDecrease,
        InequalityId::DpClassical,
        InequalityId::DpFunction,
    ];
    for (i, id) in ids.iter().enumerate() {
        let batch = run_batch(*id, 500, &[2, 2, 2], 700 + i as u64).unwrap();
        assert!(
            batch.all_hold() && batch.min_margin >= -TOL,
            "{}: {}/{} passed, min margin {}",
            batch.id,
            batch.pass_count,
            batch.verdicts.len(),
            batch.min_margin
        );
    }

    let layout = SubsystemLayout::new(vec![("a", 2), ("b", 2)]).unwrap();
    for k in 0..100u64 {
        let rank = (k as usize % 4) + 1;
        let rho = random_density_matrix(&layout, rank, trial_seed(733, k)).unwrap();
        let pure = purify(&rho).unwrap();
        let s = |group: &[&str]| quantum_entropy(&Quantity::joint(group), &pure).unwrap();
        assert!((s(&["b", "r"]) - s(&["a"])).abs() <= TOL, "trial {k}");
        assert!((s(&["r"]) - s(&["a", "b"])).abs() <= TOL, "trial {k}");
    }
    println!(
        "acceptance criterion 4: PASS — 8 ids × 500 trials hold; 100 purification proof chains two-sided at 1e-9"
    );
}

#[test]
fn c05_chain_data_processing_and_stage_identity() {
    for (id, seed) in [
        (InequalityId::DpSingleGraph, 811u64),
        (InequalityId::DpMultigraph, 812u64),
    ] {
        let batch = run_batch(id, 200, &[2, 2, 2], seed).unwrap();
        assert!(
            batch.all_hold() && batch.min_margin >= -TOL,
            "{}: min margin {}",
            batch.id,
            batch.min_margin
        );
    }

    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let instance =
            random_instance(InequalityId::DpSingleGraph, &[2, 2, 2], trial_seed(823, k)).unwrap();
        let Instance::Chain {
            a_dim,
            b_dim,
            root,
            first,
            links,
        } = instance
        else {
            panic!("chain instance expected");
        };
        let net = build_chain_net(
            a_dim,
            b_dim,
            root,
            first,
            &links,
            &[Marking::Visible, Marking::Visible, Marking::Visible],
        )
        .unwrap();
        let reduced = net
            .compile_density()
            .unwrap()
            .partial_trace(&["a", "b1", "b2"])
            .unwrap();
        let cmi_of = |state: &LabeledState| {
            quantum_entropy(&Quantity::cond_mutual(&["b2"], &["a"], &["b1"]), state).unwrap()
        };
        let middle = classicize(&reduced, "b1").unwrap();
        let both = classicize(&middle, "b2").unwrap();
        assert!(cmi_of(&middle).abs() <= TOL, "trial {k}: {}", cmi_of(&middle));
        assert!(cmi_of(&both).abs() <= TOL, "trial {k}: {}", cmi_of(&both));
        worst = worst.max(cmi_of(&middle).abs()).max(cmi_of(&both).abs());
    }
    println!(
        "acceptance criterion 5: PASS — 200 single/multi chain batches hold; stage identity |S(b2:a|b1)| ≤ {worst:.3e}"
    );
}

#[test]
fn c06_preparation_equality_conditions() {
    for k in 0..50u64 {
        let dim = 2 + (k as usize % 3);
        let u = random_unitary(dim, trial_seed(853, k));
        let layout = SubsystemLayout::single("q", dim).unwrap();
        let states: Vec<LabeledState> = (0..dim)
            .map(|col| {
                let ket: Vec<Complex64> = (0..dim).map(|row| u[(row, col)]).collect();
                LabeledState::new(layout.clone(), ComplexMatrix::outer(&ket)).unwrap()
            })
            .collect();
        let weights = random_dist(dim, trial_seed(854, k)).probs().to_vec();
        let e = Ensemble::new(weights, states, "x").unwrap();
        let v = check_entropic(InequalityId::EntropyPreparation, &Instance::Ensemble(e)).unwrap();
        assert!(v.margin().abs() <= TOL, "trial {k}: margin {}", v.margin());
    }

    let e = zero_plus_ensemble();
    let mut avg = ComplexMatrix::zeros(2, 2);
    for (w, s) in e.weights().iter().zip(e.states()) {
        avg = avg.add(&s.matrix().scale(c(*w)));
    }
    let rho = LabeledState::new(qubit_layout("q"), avg).unwrap();
    let s_rho = von_neumann(&rho);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (hi, lo) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
    let oracle = -hi * hi.ln() - lo * lo.ln();
    assert!((s_rho - oracle).abs() <= TOL, "S(rho) = {s_rho} vs {oracle}");
    let v = check_entropic(InequalityId::EntropyPreparation, &Instance::Ensemble(e)).unwrap();
    assert!(
        (v.margin() - (LN_2 - s_rho)).abs() <= TOL,
        "gap {} vs {}",
        v.margin(),
        LN_2 - s_rho
    );
    println!(
        "acceptance criterion 6: PASS — orthonormal margins ≤ 1e-9; oblique pair gap ln2 − {s_rho:.6}"
    );
}

#[test]
fn c07_counterexample_suite_values() {
    let suite = counterexample_suite();
    assert_eq!(suite.len(), 3);

    let clone = &suite[0];
    assert_eq!(clone.id(), "counterexample_entangled_clone");
    assert!(clone.lhs().abs() <= TOL, "S(a,a') = {}", clone.lhs());
    assert!((clone.rhs() - LN_2).abs() <= TOL, "S(a) = {}", clone.rhs());
    assert!(!clone.holds());

    let merge = &suite[1];
    assert_eq!(merge.id(), "counterexample_pure_merge");
    assert!(merge.lhs().abs() <= TOL, "S(b,a,a') = {}", merge.lhs());
    assert!((merge.rhs() - LN_2).abs() <= TOL, "S(b,a) = {}", merge.rhs());
    assert!(!merge.holds());

    let collider = &suite[2];
    assert_eq!(collider.id(), "counterexample_classical_collider");
    assert!(
        (collider.lhs() - LN_2).abs() <= TOL,
        "H(a:b|e) = {}",
        collider.lhs()
    );
    assert!(!collider.holds());

    println!(
        "acceptance criterion 7: PASS — clone, pure-merge, and collider counterexamples hit their closed-form values"
    );
}

#[test]
fn c08_trinode_screening() {
    let mut worst = 0.0f64;
    let (mut forks, mut markovs) = (0usize, 0usize);
    for seed in 0..200u64 {
        if seed % 2 == 1 {
            markovs += 1;
        } else {
            forks += 1;
        }
        let instance = random_instance(InequalityId::TrinodeCmiZero, &[2, 2, 2], seed).unwrap();
        let v = check_entropic(InequalityId::TrinodeCmiZero, &instance).unwrap();
        assert!(v.margin() >= -1e-8, "seed {seed}: margin {}", v.margin());
        worst = worst.max(-v.margin());
    }
    assert_eq!((forks, markovs), (100, 100));
    println!(
        "acceptance criterion 8: PASS — 100 fan-out + 100 chain nets screen off, |CMI| ≤ {worst:.3e}"
    );
}

#[test]
fn c09_holevo_bound_sampling() {
    let clock = Instant::now();
    let mut min_margin = f64::INFINITY;
    for k in 0..100u64 {
        let count = 2 + (k as usize % 3);
        let rank = 1 + (k as usize % 2);
        let e = random_ensemble(2, count, rank, trial_seed(907, k)).unwrap();
        let v = check_holevo_bound(&e, 50, trial_seed(908, k)).unwrap();
        assert!(v.holds() && v.margin() >= -TOL, "trial {k}: {}", v.margin());
        min_margin = min_margin.min(v.margin());
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "sampling took {elapsed:?}");

    let orthogonal = Ensemble::new(
        vec![0.5, 0.5],
        vec![pure_qubit(c(1.0), c(0.0)), pure_qubit(c(0.0), c(1.0))],
        "x",
    )
    .unwrap();
    let v = check_holevo_bound(&orthogonal, 4, 0).unwrap();
    assert!(v.margin().abs() <= TOL, "orthogonal margin {}", v.margin());
    assert!((v.rhs() - LN_2).abs() <= TOL, "ceiling {}", v.rhs());
    println!(
        "acceptance criterion 9: PASS — 100 ensembles × 50 samples under the bound (min gap {min_margin:.3e}) in {elapsed:?}; orthogonal preset saturates"
    );
}

#[test]
fn c10_pure_state_identities() {
    let mut saw_swap = 0usize;
    let mut saw_cond_sum = 0usize;
    for k in 0..500u64 {
        let n = 2 + (k as usize % 3);
        let labels: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        let layout =
            SubsystemLayout::new(labels.iter().map(|l| (l.as_str(), 2)).collect()).unwrap();
        let pure = random_density_matrix(&layout, 1, trial_seed(977, k)).unwrap();
        let blocks: Vec<Vec<&str>> = labels.iter().map(|l| vec![l.as_str()]).collect();
        let block_refs: Vec<&[&str]> = blocks.iter().map(Vec::as_slice).collect();
        let verdicts = check_pure_identities(&pure, &block_refs).unwrap();
        assert!(!verdicts.is_empty());
        for v in &verdicts {
            assert!(
                v.holds(),
                "trial {k} ({n} blocks) {}: margin {}",
                v.id(),
                v.margin()
            );
            if n == 4 {
                match v.id() {
                    "pure_cmi_swap" => saw_swap += 1,
                    "pure_cmi_cond_sum" => saw_cond_sum += 1,
                    _ => {}
                }
            }
        }
    }
    assert!(saw_swap > 100 && saw_cond_sum > 100, "four-block permutation families missing");
    println!(
        "acceptance criterion 10: PASS — 500 pure states at 2–4 blocks satisfy every identity, incl. {saw_cond_sum}+{saw_swap} four-block permutations"
    );
}

#[test]
fn c11_rum_suite() {
    for n in 1..=12usize {
        let suite = RumSystem::new(n).unwrap().check_suite().unwrap();
        if n == 1 {
            continue;
        }
        assert!(!suite.is_empty(), "n = {n}");
        for want in [
            "rum_complement",
            "rum_triangle_lower",
            "rum_triangle_upper",
            "rum_negative_conditional",
        ] {
            assert!(
                suite.iter().any(|v| v.id() == want),
                "n = {n}: missing {want}"
            );
        }
        for v in &suite {
            assert!(v.holds(), "n = {n}, {}: margin {}", v.id(), v.margin());
        }
    }
    println!("acceptance criterion 11: PASS — root-of-unity suite holds for every n ≤ 12");
}

#[test]
fn c12_deterministic_reports() {
    let a = serde_json::to_string(&run_batch(InequalityId::ArakiLieb, 50, &[2, 2], 4242).unwrap())
        .unwrap();
    let b = serde_json::to_string(&run_batch(InequalityId::ArakiLieb, 50, &[2, 2], 4242).unwrap())
        .unwrap();
    assert_eq!(a, b);

    let a = serde_json::to_string(
        &run_batch(InequalityId::DpSingleGraph, 20, &[2, 2, 2], 777).unwrap(),
    )
    .unwrap();
    let b = serde_json::to_string(
        &run_batch(InequalityId::DpSingleGraph, 20, &[2, 2, 2], 777).unwrap(),
    )
    .unwrap();
    assert_eq!(a, b);

    let e = zero_plus_ensemble();
    let a = serde_json::to_string(&check_holevo_bound(&e, 12, 5).unwrap()).unwrap();
    let b = serde_json::to_string(&check_holevo_bound(&e, 12, 5).unwrap()).unwrap();
    assert_eq!(a, b);

    let a = serde_json::to_string(&counterexample_suite()).unwrap();
    let b = serde_json::to_string(&counterexample_suite()).unwrap();
    assert_eq!(a, b);

    println!("acceptance criterion 12: PASS — repeated seeded runs serialize byte-identically");
}
