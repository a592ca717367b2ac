//! Hybrid classical-quantum training loop.
//!
//! The optimizer is an in-repo derivative-free simplex search (Nelder-Mead
//! with standard coefficients) under a hard cap on objective evaluations;
//! no external solver dependency, so runs reproduce bit-for-bit. Cost
//! evaluation defaults to the exact statevector expectation; a sampled mode
//! with a deterministic per-evaluation seed stream exists for shot-noise
//! studies.

use crate::circuit::{Ansatz, Circuit};
use crate::error::{Error, Result};
use crate::ising::SpinGlass;
use crate::simulator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;

/// How the objective turns a bound circuit into a scalar cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode {
    /// Exact `<ψ|H_f|ψ>`.
    Statevector,
    /// Shot-mean energy; evaluation `k` uses a seed derived from `seed` and
    /// `k`, so a run is reproducible but evaluations are independent.
    Sampled { shots: u32, seed: u64 },
}

/// One objective evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub params: Vec<f64>,
    pub cost: f64,
}

/// Expectation-value objective for an ansatz on a spin glass.
///
/// Owns the evaluation counter and the full `(params, cost)` trace; the
/// trace survives even when the optimizer aborts on a non-finite cost.
pub struct Objective {
    ansatz: Ansatz,
    spin_glass: SpinGlass,
    mode: EvalMode,
    trace: Vec<TracePoint>,
}

impl Objective {
    pub fn new(ansatz: Ansatz, spin_glass: SpinGlass, mode: EvalMode) -> Result<Self> {
        if ansatz.n() != spin_glass.n() {
            return Err(Error::LengthMismatch {
                expected: spin_glass.n(),
                got: ansatz.n(),
            });
        }
        Ok(Self {
            ansatz,
            spin_glass,
            mode,
            trace: Vec::new(),
        })
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    pub fn num_params(&self) -> usize {
        self.ansatz.num_params()
    }

    pub fn evaluations(&self) -> usize {
        self.trace.len()
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    /// Bind, simulate, and score one parameter vector.
    pub fn evaluate(&mut self, params: &[f64]) -> Result<f64> {
        let circuit = bind(&self.ansatz, params)?;
        let psi = simulator::run(&circuit)?;
        let cost = match self.mode {
            EvalMode::Statevector => simulator::expectation(&self.spin_glass, &psi)?,
            EvalMode::Sampled { shots, seed } => {
                let eval_seed = seed
                    .wrapping_add((self.trace.len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                simulator::sample(&psi, shots, eval_seed).mean_energy(&self.spin_glass)?
            }
        };
        self.trace.push(TracePoint {
            params: params.to_vec(),
            cost,
        });
        if !cost.is_finite() {
            return Err(Error::NonFiniteCost {
                evaluations: self.trace.len(),
            });
        }
        Ok(cost)
    }

    /// Trace CSV: `evaluation,p0,...,cost`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let k = self.num_params();
        let header: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
        writeln!(w, "evaluation,{},cost", header.join(","))?;
        for (i, pt) in self.trace.iter().enumerate() {
            let ps: Vec<String> = pt.params.iter().map(|p| p.to_string()).collect();
            writeln!(w, "{},{},{}", i, ps.join(","), pt.cost)?;
        }
        Ok(())
    }
}

/// Instantiate an ansatz at a parameter vector.
pub fn bind(ansatz: &Ansatz, params: &[f64]) -> Result<Circuit> {
    ansatz.bind(params)
}

/// Optimization outcome.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    /// Objective evaluations consumed by this call.
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

/// Default edge length of the initial simplex.
pub const DEFAULT_SIMPLEX_STEP: f64 = 0.25;

/// Small random initial parameters in `(-0.1, 0.1)`, seeded.
pub fn random_init(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(-0.1..0.1)).collect()
}

/// Minimize a circuit objective with the default simplex step.
pub fn minimize(obj: &mut Objective, init: &[f64], max_evals: usize) -> Result<OptResult> {
    minimize_with_step(obj, init, max_evals, DEFAULT_SIMPLEX_STEP)
}

/// Minimize a circuit objective, returning the incumbent when the evaluation
/// budget runs out or the simplex collapses.
pub fn minimize_with_step(
    obj: &mut Objective,
    init: &[f64],
    max_evals: usize,
    step: f64,
) -> Result<OptResult> {
    if init.len() != obj.num_params() {
        return Err(Error::LengthMismatch {
            expected: obj.num_params(),
            got: init.len(),
        });
    }
    let start = obj.evaluations();
    let (best_params, best_cost, evaluations) =
        nelder_mead(|x| obj.evaluate(x), init, max_evals, step)?;
    Ok(OptResult {
        best_params,
        best_cost,
        evaluations,
        trace: obj.trace()[start..].to_vec(),
    })
}

/// Nelder-Mead core over an arbitrary cost function: standard coefficients
/// (reflect 1, expand 2, contract 1/2, shrink 1/2), deterministic, with
/// `max_evals` as a hard cap on cost evaluations.
///
/// Returns `(best_point, best_cost, evaluations_used)`.
pub fn nelder_mead<F>(
    mut cost: F,
    init: &[f64],
    max_evals: usize,
    step: f64,
) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if max_evals == 0 {
        return Err(Error::InvalidProblem("max_evals must be >= 1".into()));
    }
    let dim = init.len();
    let mut evals = 0usize;
    let mut best = (init.to_vec(), f64::INFINITY);
    let mut eval = |x: &[f64], evals: &mut usize, best: &mut (Vec<f64>, f64)| -> Result<f64> {
        let c = cost(x)?;
        *evals += 1;
        if c < best.1 {
            *best = (x.to_vec(), c);
        }
        Ok(c)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let c0 = eval(init, &mut evals, &mut best)?;
    simplex.push((init.to_vec(), c0));
    for i in 0..dim {
        if evals >= max_evals {
            return Ok((best.0, best.1, evals));
        }
        let mut v = init.to_vec();
        v[i] += step;
        let c = eval(&v, &mut evals, &mut best)?;
        simplex.push((v, c));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[dim].1 - simplex[0].1;
        let diameter: f64 = (0..dim)
            .map(|i| {
                simplex
                    .iter()
                    .map(|(v, _)| (v[i] - simplex[0].0[i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= 1e-12 * (1.0 + simplex[0].1.abs()) && diameter <= 1e-10 {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (v, _) in simplex.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let point = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + t * (centroid[i] - worst.0[i]))
                .collect()
        };

        let xr = point(1.0);
        let fr = eval(&xr, &mut evals, &mut best)?;
        if fr < simplex[0].1 {
            if evals < max_evals {
                let xe = point(2.0);
                let fe = eval(&xe, &mut evals, &mut best)?;
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else {
                simplex[dim] = (xr, fr);
            }
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else if evals < max_evals {
            let (xc, against) = if fr < worst.1 {
                (point(0.5), fr)
            } else {
                (point(-0.5), worst.1)
            };
            let fc = eval(&xc, &mut evals, &mut best)?;
            if fc < against {
                simplex[dim] = (xc, fc);
            } else {
                for k in 1..=dim {
                    if evals >= max_evals {
                        break;
                    }
                    let v: Vec<f64> = (0..dim)
                        .map(|i| simplex[0].0[i] + 0.5 * (simplex[k].0[i] - simplex[0].0[i]))
                        .collect();
                    let c = eval(&v, &mut evals, &mut best)?;
                    simplex[k] = (v, c);
                }
            }
        }
    }
    Ok((best.0, best.1, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_hdcqo_ansatz, build_qaoa_ansatz};
    use crate::ising::{random_spin_glass, SpinGlass};
    use crate::schedule::Schedule;
    use approx::assert_abs_diff_eq;

    #[test]
    fn convex_quadratic_reaches_optimum_within_budget() {
        let (best, cost, evals) = nelder_mead(
            |x| Ok((x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2)),
            &[0.0, 0.0],
            200,
            DEFAULT_SIMPLEX_STEP,
        )
        .unwrap();
        assert!(evals <= 200);
        assert!(cost <= 1e-4, "cost {cost} after {evals} evals");
        assert_abs_diff_eq!(best[0], 1.0, epsilon = 0.05);
        assert_abs_diff_eq!(best[1], -2.0, epsilon = 0.05);
    }

    #[test]
    fn evaluation_cap_is_hard() {
        let mut calls = 0usize;
        let _ = nelder_mead(
            |x| {
                calls += 1;
                Ok(x[0] * x[0] + x[1] * x[1])
            },
            &[5.0, -3.0],
            37,
            DEFAULT_SIMPLEX_STEP,
        )
        .unwrap();
        assert!(calls <= 37);
    }

    #[test]
    fn optimizer_aborts_on_cost_error_with_trace_preserved() {
        // The core propagates objective errors immediately.
        let mut calls = 0usize;
        let err = nelder_mead(
            |x| {
                calls += 1;
                if calls > 3 {
                    Err(crate::Error::NonFiniteCost { evaluations: calls })
                } else {
                    Ok(x[0] * x[0])
                }
            },
            &[1.0, 1.0],
            50,
            DEFAULT_SIMPLEX_STEP,
        );
        assert!(err.is_err());
        assert_eq!(calls, 4);

        // A NaN parameter vector is rejected at bind time, before any
        // evaluation is traced; earlier trace entries stay intact.
        let sg = SpinGlass::new(2, vec![1.0, -1.0], &[(0, 1, 0.5)], 0.0).unwrap();
        let ansatz = build_qaoa_ansatz(&sg, 1).unwrap();
        let mut obj = Objective::new(ansatz, sg, EvalMode::Statevector).unwrap();
        obj.evaluate(&[0.1, 0.2]).unwrap();
        assert!(minimize(&mut obj, &[f64::NAN, 0.0], 10).is_err());
        assert_eq!(obj.evaluations(), 1);
    }

    #[test]
    fn qaoa_single_edge_matches_grid_scan() {
        // n=2, h=0, J01=1: optimum of <H_f> over (gamma, beta) from a
        // 100x100 grid oracle; optimizer must reach within 1e-3 of it.
        let sg = SpinGlass::new(2, vec![0.0, 0.0], &[(0, 1, 1.0)], 0.0).unwrap();
        let ansatz = build_qaoa_ansatz(&sg, 1).unwrap();

        let mut grid_best = f64::INFINITY;
        for a in 0..100 {
            for b in 0..100 {
                let gamma = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * a as f64 / 99.0;
                let beta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * b as f64 / 99.0;
                let c = bind(&ansatz, &[gamma, beta]).unwrap();
                let psi = simulator::run(&c).unwrap();
                let e = simulator::expectation(&sg, &psi).unwrap();
                grid_best = grid_best.min(e);
            }
        }

        let mut best = f64::INFINITY;
        for start in 0..4 {
            let mut obj = Objective::new(ansatz.clone(), sg.clone(), EvalMode::Statevector).unwrap();
            let init = random_init(2, 100 + start);
            let r = minimize(&mut obj, &init, 200).unwrap();
            best = best.min(r.best_cost);
        }
        assert!(
            best <= grid_best + 1e-3,
            "optimizer {best} vs grid {grid_best}"
        );
    }

    #[test]
    fn hdcqo_improves_on_impulse_initialization() {
        for seed in 0..5 {
            let sg = random_spin_glass(6, 300 + seed).unwrap();
            let sched = Schedule::new(0.7, 0.1).unwrap();
            let h = build_hdcqo_ansatz(&sg, &sched, 1).unwrap();
            let mut obj =
                Objective::new(h.ansatz.clone(), sg.clone(), EvalMode::Statevector).unwrap();
            let initial_cost = obj.evaluate(&h.initial_params).unwrap();
            let r = minimize(&mut obj, &h.initial_params, 200).unwrap();
            assert!(r.best_cost <= initial_cost + 1e-12);
        }
    }

    #[test]
    fn statevector_mode_is_bit_reproducible() {
        let sg = random_spin_glass(4, 44).unwrap();
        let ansatz = build_qaoa_ansatz(&sg, 1).unwrap();
        let run_once = || {
            let mut obj =
                Objective::new(ansatz.clone(), sg.clone(), EvalMode::Statevector).unwrap();
            let r = minimize(&mut obj, &random_init(2, 7), 120).unwrap();
            (r.best_cost, r.best_params, r.evaluations)
        };
        let a = run_once();
        let b = run_once();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
    }

    #[test]
    fn sampled_mode_is_seed_reproducible() {
        let sg = random_spin_glass(3, 45).unwrap();
        let ansatz = build_qaoa_ansatz(&sg, 1).unwrap();
        let run_once = |seed| {
            let mut obj = Objective::new(
                ansatz.clone(),
                sg.clone(),
                EvalMode::Sampled { shots: 500, seed },
            )
            .unwrap();
            minimize(&mut obj, &random_init(2, 9), 60).unwrap().best_cost
        };
        assert_eq!(run_once(5).to_bits(), run_once(5).to_bits());
    }

    #[test]
    fn incumbent_cost_is_non_increasing() {
        let sg = random_spin_glass(4, 46).unwrap();
        let ansatz = build_qaoa_ansatz(&sg, 2).unwrap();
        let mut obj = Objective::new(ansatz, sg, EvalMode::Statevector).unwrap();
        let r = minimize(&mut obj, &random_init(4, 11), 150).unwrap();
        let mut incumbent = f64::INFINITY;
        let mut best_seq = Vec::new();
        for pt in &r.trace {
            incumbent = incumbent.min(pt.cost);
            best_seq.push(incumbent);
        }
        assert!(best_seq.windows(2).all(|w| w[1] <= w[0]));
        assert_abs_diff_eq!(r.best_cost, incumbent, epsilon = 0.0);
        assert_eq!(r.evaluations, r.trace.len());
        assert!(r.evaluations <= 150);
    }

    #[test]
    fn trace_csv_shape() {
        let sg = random_spin_glass(3, 47).unwrap();
        let ansatz = build_qaoa_ansatz(&sg, 1).unwrap();
        let mut obj = Objective::new(ansatz, sg, EvalMode::Statevector).unwrap();
        minimize(&mut obj, &[0.01, -0.02], 20).unwrap();
        let mut buf = Vec::new();
        obj.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("evaluation,p0,p1,cost"));
        assert_eq!(text.lines().count(), obj.evaluations() + 1);
    }
}
