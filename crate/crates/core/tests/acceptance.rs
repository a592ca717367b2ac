//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `cargo test --test acceptance -- --nocapture`
//! to see them).
//!
//! Criteria cover: the α₁ closed form against its dense commutator oracle,
//! Trotter digitization fidelity, the depth-matched CD advantage on random
//! instances, impulse-regime parity with an equal-time digitized-adiabatic
//! baseline, hybrid h-DCQO vs QAOA ordering, transpilation verification,
//! metric identities, the statevector performance budget, and the
//! end-to-end portfolio pipeline.

use dcqo_core::circuit::{
    build_cd_assisted, build_cd_only, build_digitized_adiabatic, build_hdcqo_ansatz,
    build_qaoa_ansatz, stats, Circuit, CircuitMeta, Gate,
};
use dcqo_core::dense;
use dcqo_core::ising::{brute_force_spectrum, random_spin_glass, PortfolioProblem};
use dcqo_core::marketdata::{estimate_model, load_prices};
use dcqo_core::metrics::{approximation_ratio, EnergyHistogram};
use dcqo_core::schedule::{alpha1, Schedule};
use dcqo_core::simulator::{
    exact_evolve, expectation, run, sample, EvolutionMode,
};
use dcqo_core::transpile::{ryy_native, transpile_circuit, transpile_gate, verify_equivalence};
use dcqo_core::variational::{minimize, random_init, EvalMode, Objective};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Criterion {
    id: u32,
    what: &'static str,
    budget: Duration,
    start: Instant,
}

impl Criterion {
    fn new(id: u32, what: &'static str, budget_secs: u64) -> Self {
        Self {
            id,
            what,
            budget: Duration::from_secs(budget_secs),
            start: Instant::now(),
        }
    }

    fn pass(self) {
        let elapsed = self.start.elapsed();
        println!(
            "ACCEPTANCE {} PASS ({:.2?} of {:?} budget): {}",
            self.id, elapsed, self.budget, self.what
        );
        assert!(
            elapsed <= self.budget,
            "criterion {} exceeded its {:?} runtime budget ({:?})",
            self.id,
            self.budget,
            elapsed
        );
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean-based ratio over the uniform search set (E_avg = 0 exactly).
fn uniform_ratio(e: f64, e_min: f64) -> f64 {
    approximation_ratio(e, 0.0, e_min).unwrap()
}

// ---------------------------------------------------------------------------

/// Criterion 1: closed-form α₁ equals -Γ₁/Γ₂ from dense nested commutators
/// (normalized Hilbert-Schmidt norm) to 1e-10 on 50 random instances,
/// n in {2,3,4}, λ in {0, .25, .5, .75, 1}; and the O₁ matrix reproduces
/// Γ₁ = 4Σh² + 4Σ_{i≠j}J².
#[test]
fn criterion_1_alpha1_oracle_equivalence() {
    let c = Criterion::new(1, "alpha1 closed form vs dense commutator oracle", 10);
    for seed in 0..50u64 {
        let n = 2 + (seed as usize) % 3;
        let sg = random_spin_glass(n, 0xA1 + seed).unwrap();
        let hi = dense::mixer_hamiltonian(n).unwrap();
        let hf = dense::problem_hamiltonian(&sg).unwrap();
        let dlam = &hf - &hi;
        let h2: f64 = sg.fields().iter().map(|h| h * h).sum();
        let j2_both: f64 = 2.0 * sg.pairs().map(|(_, _, v)| v * v).sum::<f64>();
        for lam in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let had = &hi * Complex64::new(1.0 - lam, 0.0) + &hf * Complex64::new(lam, 0.0);
            let o1 = dense::commutator(&had, &dlam);
            let o2 = dense::commutator(&had, &o1);
            let g1 = dense::hs_norm_sq(&o1);
            let g2 = dense::hs_norm_sq(&o2);
            let oracle = -g1 / g2;
            let closed = alpha1(&sg, lam).unwrap();
            assert!(
                (closed - oracle).abs() <= 1e-10,
                "n={n} seed={seed} λ={lam}: closed {closed} vs oracle {oracle}"
            );
            assert!(
                (g1 - (4.0 * h2 + 4.0 * j2_both)).abs() <= 1e-10 * (1.0 + g1),
                "Γ₁ mismatch at n={n} seed={seed}: {g1} vs {}",
                4.0 * h2 + 4.0 * j2_both
            );
        }
    }
    c.pass();
}

/// Criterion 2: CD-assisted Trotter circuits at dt = 0.01 reach fidelity of
/// at least 0.999 against the exact propagator (micro-step 1e-4), and
/// fidelity is monotone in dt over {0.2, 0.1, 0.05, 0.01}, on 20 random n=4
/// instances. (T = 1.0 so every ladder step divides the total time.)
#[test]
fn criterion_2_digitization_fidelity() {
    let c = Criterion::new(2, "cd-assisted digitization fidelity and dt-monotonicity", 120);
    let total = 1.0;
    for seed in 0..20u64 {
        let sg = random_spin_glass(4, 0xB2 + seed).unwrap();
        let exact = exact_evolve(&sg, total, EvolutionMode::CdAssisted).unwrap();
        let mut last = 0.0;
        for dt in [0.2, 0.1, 0.05, 0.01] {
            let sched = Schedule::new(total, dt).unwrap();
            let circuit = build_cd_assisted(&sg, &sched).unwrap();
            let psi = run(&circuit).unwrap();
            let f = exact.fidelity(&psi);
            assert!(
                f >= last - 1e-9,
                "seed {seed}: fidelity not monotone at dt={dt}: {f} after {last}"
            );
            last = f;
        }
        assert!(last >= 0.999, "seed {seed}: fidelity {last} < 0.999 at dt=0.01");
    }
    c.pass();
}

/// Criterion 3: depth-matched comparison on 100 random instances, n = 6-10,
/// dt = 0.1, steps 12 (without CD) / 4 (with CD) / 6 (CD only): both CD
/// variants reach mean r_avg >= 1.5x the without-CD mean.
#[test]
fn criterion_3_depth_matched_cd_advantage() {
    let c = Criterion::new(3, "depth-matched CD advantage over 100 random instances", 300);
    let mut r_nocd = Vec::new();
    let mut r_cd = Vec::new();
    let mut r_cdonly = Vec::new();
    for k in 0..100u64 {
        let n = 6 + (k as usize) % 5;
        let sg = random_spin_glass(n, 0xC3 + k).unwrap();
        let e_min = brute_force_spectrum(&sg, None).unwrap().e_min;

        let s = Schedule::from_steps(12, 0.1).unwrap();
        let e = expectation(&sg, &run(&build_digitized_adiabatic(&sg, &s)).unwrap()).unwrap();
        r_nocd.push(uniform_ratio(e, e_min));

        let s = Schedule::from_steps(4, 0.1).unwrap();
        let e = expectation(&sg, &run(&build_cd_assisted(&sg, &s).unwrap()).unwrap()).unwrap();
        r_cd.push(uniform_ratio(e, e_min));

        let s = Schedule::from_steps(6, 0.1).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let e = expectation(&sg, &run(&build_cd_only(&sg, &s, &all, 0.0).unwrap()).unwrap())
            .unwrap();
        r_cdonly.push(uniform_ratio(e, e_min));
    }
    let (m0, m1, m2) = (mean(&r_nocd), mean(&r_cd), mean(&r_cdonly));
    println!("  without-cd {m0:.4}, with-cd {m1:.4} ({:.2}x), cd-only {m2:.4} ({:.2}x)", m1 / m0, m2 / m0);
    assert!(m1 >= 1.5 * m0, "with-cd {m1} < 1.5x without-cd {m0}");
    assert!(m2 >= 1.5 * m0, "cd-only {m2} < 1.5x without-cd {m0}");
    c.pass();
}

/// Criterion 4: impulse-regime parity on 30 random n=10 instances: CD-only
/// (T=0.7, dt=0.1, cutoff 0.1) holds to within 0.05 of the 80-step
/// digitized-adiabatic mean while using >= 10x fewer two-qubit gates after
/// pruning.
///
/// The adiabatic arm runs at the same total time T = 0.7 digitized into 80
/// steps: an equal-time comparison reproduces the published r ≈ 0.53
/// baseline on a portfolio-shaped instance, whereas T = 8 would not. The
/// published pair 0.54/0.53 is a documented target, not an assert (that
/// exact instance is unpublished).
#[test]
fn criterion_4_impulse_regime_parity() {
    let c = Criterion::new(4, "impulse-regime parity vs equal-time adiabatic baseline", 600);
    let mut r_cd = Vec::new();
    let mut r_ad = Vec::new();
    let mut q2_cd = Vec::new();
    let mut q2_ad = Vec::new();
    for seed in 0..30u64 {
        let sg = random_spin_glass(10, 0xD4 + seed).unwrap();
        let e_min = brute_force_spectrum(&sg, None).unwrap().e_min;

        let sched = Schedule::new(0.7, 0.1).unwrap();
        let all: Vec<usize> = (0..sched.steps()).collect();
        let cd = build_cd_only(&sg, &sched, &all, 0.1).unwrap();
        let e = expectation(&sg, &run(&cd).unwrap()).unwrap();
        r_cd.push(uniform_ratio(e, e_min));
        q2_cd.push(stats(&cd).two_qubit as f64);

        let sched_ad = Schedule::new(0.7, 0.7 / 80.0).unwrap();
        assert_eq!(sched_ad.steps(), 80);
        let ad = build_digitized_adiabatic(&sg, &sched_ad);
        let e = expectation(&sg, &run(&ad).unwrap()).unwrap();
        r_ad.push(uniform_ratio(e, e_min));
        q2_ad.push(stats(&ad).two_qubit as f64);
    }
    let (mc, ma) = (mean(&r_cd), mean(&r_ad));
    let (gc, ga) = (mean(&q2_cd), mean(&q2_ad));
    println!("  cd-only r {mc:.4} (mean {gc:.1} 2q gates) vs adiabatic-80 r {ma:.4} ({ga:.0} 2q gates)");
    assert!(
        mc >= ma - 0.05,
        "cd-only mean {mc} below adiabatic-80 mean {ma} - 0.05"
    );
    assert!(
        ga >= 10.0 * gc.max(1.0),
        "two-qubit reduction below 10x: {ga} vs {gc}"
    );
    c.pass();
}

/// Criterion 5: hybrid ordering on 50 random n=8 instances: p=1 h-DCQO
/// (impulse initialization, <= 200 evaluations) beats p=1 QAOA on >= 80% of
/// instances, and its mean r_avg is >= 0.9x the p=5 QAOA mean.
#[test]
fn criterion_5_hybrid_ordering() {
    let c = Criterion::new(5, "h-DCQO p=1 vs QAOA p=1 and p=5", 900);
    let mut wins = 0usize;
    let mut r_h = Vec::new();
    let mut r_q1 = Vec::new();
    let mut r_q5 = Vec::new();
    for seed in 0..50u64 {
        let sg = random_spin_glass(8, 2000 + seed).unwrap();
        let e_min = brute_force_spectrum(&sg, None).unwrap().e_min;
        let sched = Schedule::new(0.7, 0.1).unwrap();

        let h = build_hdcqo_ansatz(&sg, &sched, 1).unwrap();
        let mut obj = Objective::new(h.ansatz.clone(), sg.clone(), EvalMode::Statevector).unwrap();
        let best = minimize(&mut obj, &h.initial_params, 200).unwrap().best_cost;
        let rh = uniform_ratio(best, e_min);

        let q1 = build_qaoa_ansatz(&sg, 1).unwrap();
        let mut obj = Objective::new(q1, sg.clone(), EvalMode::Statevector).unwrap();
        let best = minimize(&mut obj, &random_init(2, 42 + seed), 200).unwrap().best_cost;
        let rq1 = uniform_ratio(best, e_min);

        let q5 = build_qaoa_ansatz(&sg, 5).unwrap();
        let mut obj = Objective::new(q5, sg.clone(), EvalMode::Statevector).unwrap();
        let best = minimize(&mut obj, &random_init(10, 43 + seed), 200).unwrap().best_cost;
        let rq5 = uniform_ratio(best, e_min);

        if rh > rq1 {
            wins += 1;
        }
        r_h.push(rh);
        r_q1.push(rq1);
        r_q5.push(rq5);
    }
    let (mh, m1, m5) = (mean(&r_h), mean(&r_q1), mean(&r_q5));
    println!(
        "  h-dcqo {mh:.4}, qaoa p1 {m1:.4}, qaoa p5 {m5:.4}; wins {wins}/50; h-dcqo/qaoa5 = {:.3}",
        mh / m5
    );
    assert!(wins * 100 >= 80 * 50, "h-DCQO beat QAOA p1 on only {wins}/50");
    assert!(mh >= 0.9 * m5, "h-DCQO mean {mh} < 0.9x QAOA p5 mean {m5}");
    c.pass();
}

/// Criterion 6: every transpilation rule and all four R_yy branches pass
/// unitary equivalence up to global phase at 100 random angles with
/// deviation < 1e-10, plus whole-circuit equivalence for a random n=3
/// CD-only circuit.
#[test]
fn criterion_6_transpilation_verification() {
    let c = Criterion::new(6, "native-gate transpilation unitary equivalence", 30);
    let circuit_of = |n: usize, gates: Vec<Gate>| Circuit::new(n, gates, CircuitMeta::default()).unwrap();

    // Hadamard has no angle; check it once.
    let eq = verify_equivalence(
        &circuit_of(1, vec![Gate::H { q: 0 }]),
        &circuit_of(1, transpile_gate(&Gate::H { q: 0 }).unwrap()),
    )
    .unwrap();
    assert!(eq.equal_up_to_phase && eq.deviation < 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(0xF6);
    for _ in 0..100 {
        let theta = rng.gen_range(-2.0 * PI..4.0 * PI);
        for gate in [
            Gate::Rz { q: 0, angle: theta },
            Gate::Ry { q: 0, angle: theta },
        ] {
            let eq = verify_equivalence(
                &circuit_of(1, vec![gate.clone()]),
                &circuit_of(1, transpile_gate(&gate).unwrap()),
            )
            .unwrap();
            assert!(
                eq.equal_up_to_phase && eq.deviation < 1e-10,
                "{gate:?}: deviation {}",
                eq.deviation
            );
        }
        for gate in [
            Gate::Rzz { q0: 0, q1: 1, angle: theta },
            Gate::Rzy { q0: 0, q1: 1, angle: theta },
            Gate::Ryz { q0: 0, q1: 1, angle: theta },
        ] {
            let eq = verify_equivalence(
                &circuit_of(2, vec![gate.clone()]),
                &circuit_of(2, transpile_gate(&gate).unwrap()),
            )
            .unwrap();
            assert!(
                eq.equal_up_to_phase && eq.deviation < 1e-10,
                "{gate:?}: deviation {}",
                eq.deviation
            );
        }
    }

    // All four R_yy branches, 100 angles each, against the dense exponential
    // of the Y⊗Y generator.
    let yy = dense::pauli_string(2, &[(0, dense::Pauli::Y), (1, dense::Pauli::Y)]).unwrap();
    for branch in 0..4 {
        for k in 0..100 {
            let lo = branch as f64 * PI / 2.0;
            let theta = lo + (k as f64 + 0.5) / 100.0 * (PI / 2.0);
            let reference = {
                // exp(-iθ/2 YY) = cos(θ/2) I - i sin(θ/2) YY
                let (s, co) = (theta / 2.0).sin_cos();
                dense::CMatrix::identity(4, 4) * Complex64::new(co, 0.0)
                    + &yy * Complex64::new(0.0, -s)
            };
            let native = circuit_of(2, ryy_native(0, 1, theta));
            let u = dense::circuit_unitary(&native, 2).unwrap();
            let prod = reference.adjoint() * &u;
            let tr: Complex64 = (0..4).map(|i| prod[(i, i)]).sum();
            let phase = tr / tr.norm();
            let deviation = u
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b * phase).norm())
                .fold(0.0f64, f64::max);
            assert!(
                deviation < 1e-10,
                "branch {branch} θ={theta}: deviation {deviation}"
            );
        }
    }

    let sg = random_spin_glass(3, 0x66).unwrap();
    let sched = Schedule::new(0.7, 0.1).unwrap();
    let all: Vec<usize> = (0..7).collect();
    let logical = build_cd_only(&sg, &sched, &all, 0.0).unwrap();
    let native = transpile_circuit(&logical).unwrap();
    let eq = verify_equivalence(&logical, native.inner()).unwrap();
    assert!(
        eq.equal_up_to_phase && eq.deviation < 1e-10,
        "whole-circuit deviation {}",
        eq.deviation
    );
    c.pass();
}

/// Criterion 7: metric identities: r(E_min) = 1, r(E_avg) = 0, uniform-set
/// E_avg = 0, and affine-shift invariance.
#[test]
fn criterion_7_metric_identities() {
    let c = Criterion::new(7, "approximation-ratio identities", 5);
    let mut rng = ChaCha8Rng::seed_from_u64(0x77);
    for _ in 0..200 {
        let e_min = rng.gen_range(-50.0..-1.0);
        let e_avg = rng.gen_range(e_min + 0.5..10.0);
        assert_eq!(approximation_ratio(e_min, e_avg, e_min).unwrap(), 1.0);
        assert_eq!(approximation_ratio(e_avg, e_avg, e_min).unwrap(), 0.0);
        let e = rng.gen_range(e_min..e_avg + 5.0);
        let r = approximation_ratio(e, e_avg, e_min).unwrap();
        for shift in [-7.5, 3.25, 100.0] {
            let rs = approximation_ratio(e + shift, e_avg + shift, e_min + shift).unwrap();
            assert!((r - rs).abs() <= 1e-12 * (1.0 + r.abs()), "shift {shift}: {r} vs {rs}");
        }
    }
    // Traceless Hamiltonian: the enumerated uniform average vanishes.
    for seed in 0..10u64 {
        let sg = random_spin_glass(2 + (seed as usize) % 9, 0x700 + seed).unwrap();
        let spec = brute_force_spectrum(&sg, None).unwrap();
        assert!(
            spec.e_avg_uniform.abs() <= 1e-9 * sg.energy_scale().max(1.0),
            "uniform average {} not ~0",
            spec.e_avg_uniform
        );
    }
    c.pass();
}

/// Criterion 8: performance budget: an unpruned 20-qubit CD-only pipeline
/// (build + simulate + expectation + 5000-shot sample + report assembly)
/// finishes in under 60 s, and the statevector update costs < 5 ms per
/// two-qubit gate.
#[test]
fn criterion_8_performance_budget() {
    let c = Criterion::new(8, "20-qubit CD-only pipeline under budget", 60);
    let sg = random_spin_glass(20, 0x88).unwrap();
    let sched = Schedule::new(0.7, 0.1).unwrap();
    let all: Vec<usize> = (0..sched.steps()).collect();

    let circuit = build_cd_only(&sg, &sched, &all, 0.0).unwrap();
    let two_qubit = stats(&circuit).two_qubit;
    assert_eq!(two_qubit, 7 * 2 * 190);

    let sim_start = Instant::now();
    let psi = run(&circuit).unwrap();
    let sim_time = sim_start.elapsed();

    let e = expectation(&sg, &psi).unwrap();
    let counts = sample(&psi, 5000, 0x88);
    let shot_mean = counts.mean_energy(&sg).unwrap();
    let histogram = EnergyHistogram::from_state(&sg, &psi).unwrap();
    assert!(e.is_finite() && shot_mean.is_finite());
    assert!((histogram.total_weight() - 1.0).abs() < 1e-9);

    let per_gate = sim_time.as_secs_f64() * 1000.0 / two_qubit as f64;
    println!(
        "  {} two-qubit gates in {:.2?} -> {per_gate:.3} ms/gate (includes one-qubit work)",
        two_qubit, sim_time
    );
    assert!(
        per_gate < 5.0,
        "statevector update {per_gate:.3} ms per two-qubit gate exceeds 5 ms"
    );
    c.pass();
}

/// Criterion 9: end-to-end: shipped 20-asset CSV with defaults
/// (θ = (1, 0.5, 2), B = 10) through the CD-only pipeline to a valid report
/// with r_avg recorded, with the encoding identity spot-checked on 1000
/// random bitstrings.
#[test]
fn criterion_9_end_to_end_portfolio() {
    let c = Criterion::new(9, "portfolio CSV to CD-only run report", 120);
    let csv = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/prices_20.csv");
    let table = load_prices(csv).unwrap();
    assert_eq!(table.num_assets(), 20);
    let (e, cov) = estimate_model(&table).unwrap();
    let p = PortfolioProblem::new(e, cov, 10, 1.0, 0.5, 2.0).unwrap();
    let sg = p.to_spin_glass();

    // Encoding identity on 1000 random bitstrings.
    let mut rng = ChaCha8Rng::seed_from_u64(0x99);
    let scale = sg.energy_scale().max(1.0);
    for _ in 0..1000 {
        let bits: u64 = rng.gen::<u64>() & ((1 << 20) - 1);
        let cost = p.cost(bits);
        let via_ising = sg.energy_bits(bits) + sg.offset();
        assert!(
            (cost - via_ising).abs() <= 1e-9 * scale,
            "identity violated at {bits:#x}: {cost} vs {via_ising}"
        );
    }

    let sched = Schedule::new(0.7, 0.1).unwrap();
    let all: Vec<usize> = (0..sched.steps()).collect();
    let circuit = build_cd_only(&sg, &sched, &all, 0.1).unwrap();
    let psi = run(&circuit).unwrap();
    let energy = expectation(&sg, &psi).unwrap();
    let spectrum = brute_force_spectrum(&sg, Some(10)).unwrap();
    let r = approximation_ratio(energy, 0.0, spectrum.e_min).unwrap();

    // Assemble and round-trip the report JSON.
    let report = dcqo_core::metrics::RunReport {
        schema_version: 1,
        method: "cd-only".into(),
        n: 20,
        config: dcqo_core::metrics::MethodConfig {
            total_time: Some(0.7),
            dt: Some(0.1),
            steps: Some(7),
            cutoff: Some(0.1),
            surviving_steps: circuit.metadata.surviving_steps.as_ref().map(Vec::len),
            ..Default::default()
        },
        energy: dcqo_core::metrics::EnergyReport {
            expectation: Some(energy),
            shot_mean: None,
            offset: sg.offset(),
        },
        e_min: spectrum.e_min,
        e_avg: 0.0,
        search_set: dcqo_core::metrics::SearchSet::Uniform,
        r_avg_expectation: Some(r),
        r_avg_shot_mean: None,
        gates: dcqo_core::metrics::GateReport {
            one_qubit: stats(&circuit).one_qubit,
            two_qubit: stats(&circuit).two_qubit,
            depth: stats(&circuit).depth,
            pruned: circuit.metadata.pruned_gates,
        },
        histogram: EnergyHistogram::from_state(&sg, &psi).unwrap().rebin(64),
    };
    let json = serde_json::to_string_pretty(&report).unwrap();
    let back: dcqo_core::metrics::RunReport = serde_json::from_str(&json).unwrap();
    assert!(back.r_avg_expectation.is_some());
    assert_eq!(back.n, 20);
    println!(
        "  r_avg = {r:.4}, surviving steps = {:?}, pruned gates = {}",
        circuit.metadata.surviving_steps.as_ref().map(Vec::len),
        circuit.metadata.pruned_gates
    );
    c.pass();
}
