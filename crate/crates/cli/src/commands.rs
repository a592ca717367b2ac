//! Subcommand pipelines.

use crate::config::*;
use dcqo_core::circuit::{
    build_cd_assisted, build_cd_only, build_digitized_adiabatic, build_dcqaoa_ansatz,
    build_hdcqo_ansatz, build_qaoa_ansatz, stats, Ansatz, Circuit,
};
use dcqo_core::ising::{brute_force_spectrum, random_spin_glass, SpinGlass};
use dcqo_core::metrics::{
    approximation_ratio, compare, EnergyHistogram, EnergyReport, GateReport, MethodConfig,
    RunReport, SearchSet,
};
use dcqo_core::schedule::{CdProfile, Schedule, StepSelection};
use dcqo_core::simulator::{expectation, run, sample, StateVector};
use dcqo_core::transpile::{transpile_circuit, verify_equivalence};
use dcqo_core::variational::{minimize, random_init, EvalMode, Objective};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub type CliResult<T> = Result<T, String>;

fn err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(msg.into())
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| format!("mkdir {}: {e}", parent.display()))?;
    }
    fs::write(path, contents).map_err(|e| format!("write {}: {e}", path.display()))
}

fn schedule_from(cfg: &ExperimentConfig) -> CliResult<Schedule> {
    let total = cfg.total_time.unwrap_or(DEFAULT_TOTAL_TIME);
    let dt = cfg.dt.unwrap_or(DEFAULT_DT);
    Schedule::new(total, dt).map_err(|e| format!("schedule: {e}"))
}

fn selection_from(cfg: &ExperimentConfig, sched: &Schedule) -> CliResult<Option<StepSelection>> {
    match (cfg.keep_steps, cfg.weight_fraction) {
        (Some(_), Some(_)) => err("use only one of keep_steps / weight_fraction"),
        (Some(k), None) => {
            if k == 0 || k > sched.steps() {
                return err(format!(
                    "keep_steps = {k} outside 1..={}",
                    sched.steps()
                ));
            }
            Ok(Some(StepSelection::KeepTop(k)))
        }
        (None, Some(f)) => Ok(Some(StepSelection::WeightFraction(f))),
        (None, None) => Ok(None),
    }
}

struct SolvedCircuit {
    circuit: Circuit,
    config: MethodConfig,
    /// Optimizer trace CSV for variational methods.
    trace_csv: Option<Vec<u8>>,
}

/// Build (and for variational methods, train) the method's final circuit.
fn build_circuit(method: Method, sg: &SpinGlass, cfg: &ExperimentConfig) -> CliResult<SolvedCircuit> {
    let mut mc = MethodConfig::default();
    let mut trace_csv = None;
    let fail = |e: dcqo_core::Error| format!("{}: {e}", method.name());

    let circuit = match method {
        Method::Adiabatic => {
            let sched = schedule_from(cfg)?;
            mc.total_time = Some(sched.total_time());
            mc.dt = Some(sched.dt());
            mc.steps = Some(sched.steps());
            build_digitized_adiabatic(sg, &sched)
        }
        Method::Cd => {
            let sched = schedule_from(cfg)?;
            mc.total_time = Some(sched.total_time());
            mc.dt = Some(sched.dt());
            mc.steps = Some(sched.steps());
            build_cd_assisted(sg, &sched).map_err(fail)?
        }
        Method::CdOnly => {
            let sched = schedule_from(cfg)?;
            let cutoff = cfg.cutoff.unwrap_or(DEFAULT_CUTOFF);
            mc.total_time = Some(sched.total_time());
            mc.dt = Some(sched.dt());
            mc.steps = Some(sched.steps());
            mc.cutoff = Some(cutoff);
            let selected: Vec<usize> = match selection_from(cfg, &sched)? {
                None => (0..sched.steps()).collect(),
                Some(rule) => {
                    let profile = CdProfile::build(sg, &sched).map_err(fail)?;
                    dcqo_core::schedule::select_impulse_steps(&profile, rule).map_err(fail)?
                }
            };
            let c = build_cd_only(sg, &sched, &selected, cutoff).map_err(fail)?;
            mc.surviving_steps = c.metadata.surviving_steps.as_ref().map(Vec::len);
            c
        }
        Method::Qaoa | Method::Dcqaoa | Method::Hdcqo => {
            let layers = cfg.layers.unwrap_or(DEFAULT_LAYERS);
            let max_iter = cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER);
            let restarts = cfg.restarts.unwrap_or(1).max(1);
            let init_seed = cfg.init_seed.unwrap_or(0);
            mc.layers = Some(layers);
            mc.max_iter = Some(max_iter);
            mc.init_seed = Some(init_seed);
            mc.restarts = Some(restarts);

            // Ansatz plus the start point for restart k. h-DCQO always
            // starts from the impulse initialization; further restarts
            // jitter it with the seeded small-random offsets the other
            // methods use directly.
            let (ansatz, base_init): (Ansatz, Option<Vec<f64>>) = match method {
                Method::Qaoa => (build_qaoa_ansatz(sg, layers).map_err(fail)?, None),
                Method::Dcqaoa => (build_dcqaoa_ansatz(sg, layers).map_err(fail)?, None),
                _ => {
                    let sched = schedule_from(cfg)?;
                    mc.total_time = Some(sched.total_time());
                    mc.dt = Some(sched.dt());
                    let h = build_hdcqo_ansatz(sg, &sched, layers).map_err(fail)?;
                    (h.ansatz, Some(h.initial_params))
                }
            };
            let mut obj = Objective::new(ansatz, sg.clone(), EvalMode::Statevector)
                .map_err(fail)?;
            let mut best: Option<(f64, Vec<f64>)> = None;
            for k in 0..restarts {
                let jitter = random_init(obj.num_params(), init_seed.wrapping_add(k as u64));
                let init: Vec<f64> = match &base_init {
                    Some(impulse) if k == 0 => impulse.clone(),
                    Some(impulse) => impulse.iter().zip(&jitter).map(|(a, b)| a + b).collect(),
                    None => jitter,
                };
                let result = minimize(&mut obj, &init, max_iter).map_err(fail)?;
                if best.as_ref().is_none_or(|(c, _)| result.best_cost < *c) {
                    best = Some((result.best_cost, result.best_params));
                }
            }
            let mut csv = Vec::new();
            obj.write_trace_csv(&mut csv).map_err(fail)?;
            trace_csv = Some(csv);
            let (_, best_params) = best.expect("restarts >= 1");
            obj.ansatz().bind(&best_params).map_err(fail)?
        }
    };
    Ok(SolvedCircuit {
        circuit,
        config: mc,
        trace_csv,
    })
}

pub fn cmd_solve(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    let method = cfg.method.unwrap_or(Method::CdOnly);
    let problem = load_problem(&cfg.problem)?;
    let sg = &problem.spin_glass;
    if sg.n() > dcqo_core::ising::MAX_BRUTE_FORCE_QUBITS
        || sg.n() > dcqo_core::simulator::MAX_SIM_QUBITS
    {
        return err(format!("n = {} exceeds the simulation bound", sg.n()));
    }

    let feasible = cfg.feasible_avg.unwrap_or(false);
    if feasible && problem.portfolio.is_none() {
        return err("feasible_avg requires a portfolio (csv) problem");
    }

    let solved = build_circuit(method, sg, cfg)?;
    let circuit_stats = stats(&solved.circuit);

    let psi = run(&solved.circuit).map_err(|e| format!("simulate: {e}"))?;
    let e_exp = expectation(sg, &psi).map_err(|e| format!("expectation: {e}"))?;
    if !e_exp.is_finite() {
        return err(format!("non-finite energy {e_exp}"));
    }

    let shots = cfg.shots.unwrap_or(DEFAULT_SHOTS);
    let sample_seed = cfg.sample_seed.unwrap_or(0);
    let counts = sample(&psi, shots, sample_seed);
    let e_shot = counts
        .mean_energy(sg)
        .map_err(|e| format!("shot energy: {e}"))?;

    let budget = problem.portfolio.as_ref().map(|p| p.budget());
    let spectrum = brute_force_spectrum(sg, budget).map_err(|e| format!("spectrum: {e}"))?;
    let (e_avg, search_set) = if feasible {
        (
            spectrum.e_avg_feasible.expect("budget was supplied"),
            SearchSet::FeasibleBudget,
        )
    } else {
        // Traceless Hamiltonian: the uniform-set mean is exactly zero.
        (0.0, SearchSet::Uniform)
    };

    let r_exp = approximation_ratio(e_exp, e_avg, spectrum.e_min)
        .map_err(|e| format!("ratio: {e}"))?;
    let r_shot = approximation_ratio(e_shot, e_avg, spectrum.e_min)
        .map_err(|e| format!("ratio: {e}"))?;

    let histogram = EnergyHistogram::from_state(sg, &psi).map_err(|e| format!("histogram: {e}"))?;

    let mut config = solved.config;
    config.shots = Some(shots);
    config.sample_seed = Some(sample_seed);

    let report = RunReport {
        schema_version: 1,
        method: method.name().into(),
        n: sg.n(),
        config,
        energy: EnergyReport {
            expectation: Some(e_exp),
            shot_mean: Some(e_shot),
            offset: sg.offset(),
        },
        e_min: spectrum.e_min,
        e_avg,
        search_set,
        r_avg_expectation: Some(r_exp),
        r_avg_shot_mean: Some(r_shot),
        gates: GateReport {
            one_qubit: circuit_stats.one_qubit,
            two_qubit: circuit_stats.two_qubit,
            depth: circuit_stats.depth,
            pruned: solved.circuit.metadata.pruned_gates,
        },
        histogram: histogram.rebin(64),
    };

    let out_dir = output_dir(cfg);
    let prefix = cfg.prefix.clone().unwrap_or_else(|| method.name().into());
    let report_path = out_dir.join(format!("{prefix}_report.json"));
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    write_file(&report_path, json.as_bytes())?;

    let mut hist_csv = Vec::new();
    histogram
        .write_csv(&mut hist_csv)
        .map_err(|e| format!("histogram csv: {e}"))?;
    write_file(&out_dir.join(format!("{prefix}_histogram.csv")), &hist_csv)?;

    let mut shots_json = Vec::new();
    serde_json::to_writer_pretty(&mut shots_json, &counts).map_err(|e| e.to_string())?;
    write_file(&out_dir.join(format!("{prefix}_counts.json")), &shots_json)?;

    write_file(
        &out_dir.join(format!("{prefix}_circuit.txt")),
        solved.circuit.to_text().as_bytes(),
    )?;

    if let Some(trace) = &solved.trace_csv {
        write_file(&out_dir.join(format!("{prefix}_trace.csv")), trace)?;
    }

    if cfg.emit_native.unwrap_or(false) {
        let native =
            transpile_circuit(&solved.circuit).map_err(|e| format!("transpile: {e}"))?;
        write_file(
            &out_dir.join(format!("{prefix}_native.txt")),
            native.to_text().as_bytes(),
        )?;
        let ns = native.stats();
        eprintln!(
            "native: {} one-qubit, {} two-qubit gates",
            ns.one_qubit, ns.two_qubit
        );
    }

    println!(
        "{}: n = {}, E = {:.6}, r_avg = {:.4} (shot-mean r = {:.4}), 2q gates = {}, depth = {}",
        method.name(),
        sg.n(),
        e_exp,
        r_exp,
        r_shot,
        circuit_stats.two_qubit,
        circuit_stats.depth
    );
    Ok(report_path)
}

fn single_run_ratio(sg: &SpinGlass, circuit: &Circuit, e_min: f64) -> CliResult<(f64, usize, usize)> {
    let psi: StateVector = run(circuit).map_err(|e| format!("simulate: {e}"))?;
    let e = expectation(sg, &psi).map_err(|e| format!("expectation: {e}"))?;
    let r = approximation_ratio(e, 0.0, e_min).map_err(|e| format!("ratio: {e}"))?;
    let st = stats(circuit);
    Ok((r, st.two_qubit, st.depth))
}

/// Benchmark config: depth-matched three-method comparison over random
/// instances.
pub struct BenchmarkArgs {
    pub instances: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    pub dt: f64,
    pub steps_nocd: usize,
    pub steps_cd: usize,
    pub steps_cdonly: usize,
    pub out_dir: PathBuf,
}

#[derive(serde::Serialize)]
struct BenchRow {
    instance: usize,
    n: usize,
    seed: u64,
    method: &'static str,
    steps: usize,
    r_avg: f64,
    two_qubit: usize,
    depth: usize,
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> CliResult<PathBuf> {
    if args.instances == 0 || args.n_min < 1 || args.n_max < args.n_min {
        return err("benchmark: need instances >= 1 and 1 <= n_min <= n_max");
    }
    if args.n_max > 20 {
        return err("benchmark: n_max > 20 is unreasonably slow for batches");
    }
    let one = |k: usize| -> CliResult<Vec<BenchRow>> {
        let n = args.n_min + k % (args.n_max - args.n_min + 1);
        let seed = args.seed.wrapping_add(k as u64);
        let sg = random_spin_glass(n, seed).map_err(|e| e.to_string())?;
        let spectrum = brute_force_spectrum(&sg, None).map_err(|e| e.to_string())?;

        let mut rows = Vec::with_capacity(3);
        let s = Schedule::from_steps(args.steps_nocd, args.dt).map_err(|e| e.to_string())?;
        let c = build_digitized_adiabatic(&sg, &s);
        let (r, q2, d) = single_run_ratio(&sg, &c, spectrum.e_min)?;
        rows.push(BenchRow {
            instance: k,
            n,
            seed,
            method: "without-cd",
            steps: args.steps_nocd,
            r_avg: r,
            two_qubit: q2,
            depth: d,
        });

        let s = Schedule::from_steps(args.steps_cd, args.dt).map_err(|e| e.to_string())?;
        let c = build_cd_assisted(&sg, &s).map_err(|e| e.to_string())?;
        let (r, q2, d) = single_run_ratio(&sg, &c, spectrum.e_min)?;
        rows.push(BenchRow {
            instance: k,
            n,
            seed,
            method: "with-cd",
            steps: args.steps_cd,
            r_avg: r,
            two_qubit: q2,
            depth: d,
        });

        let s = Schedule::from_steps(args.steps_cdonly, args.dt).map_err(|e| e.to_string())?;
        let all: Vec<usize> = (0..s.steps()).collect();
        let c = build_cd_only(&sg, &s, &all, 0.0).map_err(|e| e.to_string())?;
        let (r, q2, d) = single_run_ratio(&sg, &c, spectrum.e_min)?;
        rows.push(BenchRow {
            instance: k,
            n,
            seed,
            method: "cd-only",
            steps: args.steps_cdonly,
            r_avg: r,
            two_qubit: q2,
            depth: d,
        });
        Ok(rows)
    };

    #[cfg(feature = "parallel")]
    let per_instance: Vec<CliResult<Vec<BenchRow>>> = {
        use rayon::prelude::*;
        (0..args.instances).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_instance: Vec<CliResult<Vec<BenchRow>>> = (0..args.instances).map(one).collect();

    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }

    // Per-(n, method) aggregates.
    let mut csv = String::from("instance,n,seed,method,steps,r_avg,two_qubit,depth\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.instance, r.n, r.seed, r.method, r.steps, r.r_avg, r.two_qubit, r.depth
        ));
    }
    let csv_path = args.out_dir.join("benchmark_runs.csv");
    write_file(&csv_path, csv.as_bytes())?;

    let mut summary = Vec::new();
    for n in args.n_min..=args.n_max {
        for method in ["without-cd", "with-cd", "cd-only"] {
            let mut rs: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n && r.method == method)
                .map(|r| r.r_avg)
                .collect();
            if rs.is_empty() {
                continue;
            }
            rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mean = rs.iter().sum::<f64>() / rs.len() as f64;
            let median = rs[rs.len() / 2];
            summary.push(json!({
                "n": n,
                "method": method,
                "instances": rs.len(),
                "mean_r_avg": mean,
                "median_r_avg": median,
            }));
        }
    }
    let summary_path = args.out_dir.join("benchmark_summary.json");
    write_file(
        &summary_path,
        serde_json::to_string_pretty(&json!({
            "dt": args.dt,
            "steps": {
                "without-cd": args.steps_nocd,
                "with-cd": args.steps_cd,
                "cd-only": args.steps_cdonly,
            },
            "rows": summary,
        }))
        .map_err(|e| e.to_string())?
        .as_bytes(),
    )?;

    // Mean over everything, printed as a quick table.
    for method in ["without-cd", "with-cd", "cd-only"] {
        let rs: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.r_avg)
            .collect();
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        println!("{method:<12} mean r_avg = {mean:.4} over {} runs", rs.len());
    }
    println!("rows: {}", csv_path.display());
    Ok(summary_path)
}

pub fn cmd_profile(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    let problem = load_problem(&cfg.problem)?;
    let sched = schedule_from(cfg)?;
    let mut profile =
        CdProfile::build(&problem.spin_glass, &sched).map_err(|e| format!("profile: {e}"))?;
    if let Some(rule) = selection_from(cfg, &sched)? {
        profile
            .apply_selection(rule)
            .map_err(|e| format!("selection: {e}"))?;
    }
    let mut buf = Vec::new();
    profile
        .write_csv(&mut buf)
        .map_err(|e| format!("profile csv: {e}"))?;
    let out = output_dir(cfg).join(format!(
        "{}_profile.csv",
        cfg.prefix.clone().unwrap_or_else(|| "cd".into())
    ));
    write_file(&out, &buf)?;
    println!("{}", out.display());
    Ok(out)
}

pub fn cmd_spectrum(cfg: &ExperimentConfig, budget: Option<usize>) -> CliResult<PathBuf> {
    let problem = load_problem(&cfg.problem)?;
    let sg = &problem.spin_glass;
    let budget = budget.or_else(|| problem.portfolio.as_ref().map(|p| p.budget()));
    let spec = brute_force_spectrum(sg, budget).map_err(|e| format!("spectrum: {e}"))?;
    let argmin: Vec<String> = spec
        .argmin_set
        .iter()
        .map(|&bits| {
            (0..sg.n())
                .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect();
    let doc = json!({
        "n": sg.n(),
        "source": problem.source_label,
        "e_min": spec.e_min,
        "argmin": argmin,
        "degeneracy": spec.degeneracy,
        "e_max": spec.e_max,
        "e_avg_uniform": spec.e_avg_uniform,
        "e_avg_feasible": spec.e_avg_feasible,
        "offset": sg.offset(),
        "e_min_with_offset": spec.e_min + sg.offset(),
    });
    let out = output_dir(cfg).join(format!(
        "{}_spectrum.json",
        cfg.prefix.clone().unwrap_or_else(|| "instance".into())
    ));
    write_file(
        &out,
        serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?.as_bytes(),
    )?;
    println!("{}", out.display());
    Ok(out)
}

pub fn cmd_transpile(input: &Path, output: Option<&Path>, verify: bool) -> CliResult<PathBuf> {
    let text = fs::read_to_string(input)
        .map_err(|e| format!("cannot read {}: {e}", input.display()))?;
    let circuit = if input.extension().is_some_and(|e| e == "json") {
        serde_json::from_str::<Circuit>(&text)
            .map_err(|e| format!("{}: line {}: {e}", input.display(), e.line()))?
    } else {
        Circuit::from_text(&text).map_err(|e| format!("{}: {e}", input.display()))?
    };
    let native = transpile_circuit(&circuit).map_err(|e| format!("transpile: {e}"))?;
    if verify {
        if circuit.n() > dcqo_core::transpile::MAX_VERIFY_QUBITS {
            return err(format!(
                "--verify needs n <= {}",
                dcqo_core::transpile::MAX_VERIFY_QUBITS
            ));
        }
        let eq = verify_equivalence(&circuit, native.inner())
            .map_err(|e| format!("verify: {e}"))?;
        if !eq.equal_up_to_phase {
            return err(format!(
                "native circuit is NOT equivalent: deviation {}",
                eq.deviation
            ));
        }
        eprintln!("verified: deviation {:.3e}", eq.deviation);
    }
    let out = output

        .map(Path::to_path_buf)
        .unwrap_or_else(|| input.with_extension("native.txt"));
    write_file(&out, native.to_text().as_bytes())?;
    let st = native.stats();
    println!(
        "{}: {} native gates ({} two-qubit), depth {}",
        out.display(),
        native.gates().len(),
        st.two_qubit,
        st.depth
    );
    Ok(out)
}

/// Compare several run reports side by side.
pub fn cmd_compare(paths: &[PathBuf]) -> CliResult<()> {
    let mut reports = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        reports.push(
            serde_json::from_str::<RunReport>(&text)
                .map_err(|e| format!("{}: {e}", p.display()))?,
        );
    }
    let table = compare(&reports);
    print!("{table}");
    let mut out = std::io::stdout().lock();
    writeln!(out, "---").ok();
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&table).map_err(|e| e.to_string())?
    )
    .ok();
    Ok(())
}

pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| {
        std::env::var_os("DCQO_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    })
}
