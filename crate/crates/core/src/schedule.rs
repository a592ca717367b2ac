//! Evolution-time machinery: the scheduling function λ(t), its analytic
//! derivative, the first-order counterdiabatic coefficient α₁(λ), the CD
//! weight λ̇·α₁, and impulse-step selection.
//!
//! The scheduling function is `λ(t) = sin²[(π/2)·sin²(πt/2T)]`, which
//! satisfies λ(0) = 0, λ(T) = 1, and λ̇(0) = λ̇(T) = 0.
//!
//! Index conventions in α₁, fixed by matching the dense nested-commutator
//! oracle `α₁ = -Γ₁/Γ₂`: every `Σ J²`-style sum runs over ordered pairs of
//! the symmetric coupling matrix (`Σ_{i≠j} J_ij² = 2 Σ_{i<j} J_ij²`), in the
//! numerator as well as the denominator, and `Σ_{i≠j} h_i² J_ij²` keeps `h`
//! attached to its own site (`Σ_i h_i² Σ_{j≠i} J_ij²`). Each coupling feeds
//! two Pauli strings (`Y_i Z_j` and `Z_i Y_j`) of the commutator
//! `O₁ = [H_ad, ∂_λ H_ad]`, which is where the double counting comes from:
//! `Γ₁ = ‖O₁‖² = 4 Σ h² + 4 Σ_{i≠j} J²`.

use crate::error::{Error, Result};
use crate::ising::SpinGlass;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

fn check_time(t: f64, total_time: f64) -> Result<()> {
    if !(0.0..=total_time).contains(&t) {
        return Err(Error::TimeOutOfRange { t, total: total_time });
    }
    Ok(())
}

/// Scheduling function λ(t) on `[0, T]`.
pub fn lambda(t: f64, total_time: f64) -> Result<f64> {
    check_time(t, total_time)?;
    let inner = (PI * t / (2.0 * total_time)).sin();
    Ok(((PI / 2.0) * inner * inner).sin().powi(2))
}

/// Analytic derivative dλ/dt:
/// `λ̇(t) = (π²/4T) · sin(2v) · sin(2u)` with `u = πt/2T`, `v = (π/2)sin²u`.
pub fn lambda_dot(t: f64, total_time: f64) -> Result<f64> {
    check_time(t, total_time)?;
    let u = PI * t / (2.0 * total_time);
    let v = (PI / 2.0) * u.sin().powi(2);
    Ok((PI * PI / (4.0 * total_time)) * (2.0 * v).sin() * (2.0 * u).sin())
}

/// Instance sums entering α₁; computed once per instance.
#[derive(Debug, Clone, Copy)]
struct CdSums {
    /// Σ h² + Σ_{i≠j} J² = Γ₁/4: the numerator (without the -1/4).
    numerator: f64,
    /// Σ h² + 4 Σ_{i≠j} J² = Σ h² + 8 Σ_{i<j} J².
    bracket_initial: f64,
    /// Σ h⁴ + Σ_{i≠j} J⁴ + 6 Σ_i h_i² S_i + 6 Σ_{i<j<k} (J²J² + J²J² + J²J²),
    /// with S_i = Σ_{j≠i} J_ij².
    bracket_final: f64,
}

fn cd_sums(sg: &SpinGlass) -> CdSums {
    let n = sg.n();
    let h2: f64 = sg.fields().iter().map(|h| h * h).sum();
    let h4: f64 = sg.fields().iter().map(|h| h.powi(4)).sum();
    let mut j2_upper = 0.0;
    let mut j4_upper = 0.0;
    for (_, _, v) in sg.pairs() {
        j2_upper += v * v;
        j4_upper += v.powi(4);
    }
    // Per-site neighborhood sums S_i = Σ_{j≠i} J_ij² over the symmetric matrix.
    let mut site = vec![0.0; n];
    for (i, j, v) in sg.pairs() {
        let v2 = v * v;
        site[i] += v2;
        site[j] += v2;
    }
    let h2j2: f64 = sg
        .fields()
        .iter()
        .zip(&site)
        .map(|(h, s)| h * h * s)
        .sum();
    // Σ_{i<j<k} over hub decomposition: Σ_i Σ_{j<k, j,k≠i} J_ij² J_ik²
    //   = Σ_i (S_i² - Σ_j J_ij⁴) / 2.
    let j4_site: Vec<f64> = {
        let mut acc = vec![0.0; n];
        for (i, j, v) in sg.pairs() {
            let v4 = v.powi(4);
            acc[i] += v4;
            acc[j] += v4;
        }
        acc
    };
    let triple: f64 = site
        .iter()
        .zip(&j4_site)
        .map(|(s, q)| (s * s - q) / 2.0)
        .sum();

    CdSums {
        numerator: h2 + 2.0 * j2_upper,
        bracket_initial: h2 + 8.0 * j2_upper,
        bracket_final: h4 + 2.0 * j4_upper + 6.0 * h2j2 + 6.0 * triple,
    }
}

fn alpha1_from_sums(sums: &CdSums, lam: f64) -> Result<f64> {
    if sums.numerator == 0.0 {
        return Err(Error::DegenerateInstance);
    }
    let one_m = 1.0 - lam;
    let r = one_m * one_m * sums.bracket_initial + lam * lam * sums.bracket_final;
    if r <= 0.0 {
        return Err(Error::DegenerateInstance);
    }
    Ok(-0.25 * sums.numerator / r)
}

/// First-order counterdiabatic coefficient α₁(λ), in closed form.
///
/// Equals `-Γ₁/Γ₂` with `Γ_k = ‖O_k‖²` (normalized Hilbert-Schmidt norm),
/// `O₁ = [H_ad, ∂_λ H_ad]`, `O₂ = [H_ad, O₁]`; always negative for a nonzero
/// instance.
pub fn alpha1(sg: &SpinGlass, lam: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::InvalidSchedule(format!("λ = {lam} outside [0, 1]")));
    }
    alpha1_from_sums(&cd_sums(sg), lam)
}

/// Signed CD weight `w(t) = λ̇(t)·α₁(λ(t))` and its magnitude.
pub fn cd_weight(sg: &SpinGlass, t: f64, total_time: f64) -> Result<(f64, f64)> {
    let ld = lambda_dot(t, total_time)?;
    let a = alpha1(sg, lambda(t, total_time)?)?;
    let w = ld * a;
    Ok((w, w.abs()))
}

/// Coefficient `g(t) = -2 λ̇(t) α₁(λ(t))` multiplying the CD structure
/// operator `Σ h_i Y_i + Σ J_ij (Y_i Z_j + Z_i Y_j)`.
pub fn cd_term_coefficient(sg: &SpinGlass, t: f64, total_time: f64) -> Result<f64> {
    let (w, _) = cd_weight(sg, t, total_time)?;
    Ok(-2.0 * w)
}

/// Uniform Trotter schedule: `N` steps of size `dt` covering `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    total_time: f64,
    dt: f64,
    steps: usize,
}

impl Schedule {
    pub fn new(total_time: f64, dt: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(total_time) || !positive(dt) {
            return Err(Error::InvalidSchedule(format!(
                "T = {total_time}, dt = {dt} must be positive"
            )));
        }
        let steps = (total_time / dt).round();
        if steps < 1.0 {
            return Err(Error::InvalidSchedule(format!(
                "T = {total_time} shorter than one step dt = {dt}"
            )));
        }
        if (steps * dt - total_time).abs() > 1e-9 * total_time.max(dt) {
            return Err(Error::InvalidSchedule(format!(
                "T = {total_time} is not an integer number of dt = {dt} steps"
            )));
        }
        Ok(Self {
            total_time,
            dt,
            steps: steps as usize,
        })
    }

    /// Schedule with `T = steps · dt`.
    pub fn from_steps(steps: usize, dt: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidSchedule("steps must be >= 1".into()));
        }
        Self::new(steps as f64 * dt, dt)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Right endpoint of 0-based step `i`: `t = (i+1)·dt`, with the final
    /// step pinned to `T` exactly.
    pub fn step_time(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.total_time
        } else {
            (i + 1) as f64 * self.dt
        }
    }

    /// Right-endpoint step times `t_m = m·dt`, `m = 1..=N`; the last equals
    /// `T` exactly.
    pub fn step_times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(move |i| self.step_time(i))
    }
}

/// Per-step tabulation of the schedule and CD weight.
#[derive(Debug, Clone)]
pub struct CdProfile {
    pub schedule: Schedule,
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub lambda_dots: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Signed weights `w_m = λ̇(t_m)·α₁(λ(t_m))`.
    pub weights: Vec<f64>,
    pub selected: Vec<bool>,
}

impl CdProfile {
    pub fn build(sg: &SpinGlass, sched: &Schedule) -> Result<Self> {
        let sums = cd_sums(sg);
        let total = sched.total_time();
        let mut times = Vec::with_capacity(sched.steps());
        let mut lambdas = Vec::with_capacity(sched.steps());
        let mut lambda_dots = Vec::with_capacity(sched.steps());
        let mut alphas = Vec::with_capacity(sched.steps());
        let mut weights = Vec::with_capacity(sched.steps());
        for t in sched.step_times() {
            let lam = lambda(t, total)?;
            let ld = lambda_dot(t, total)?;
            let a = alpha1_from_sums(&sums, lam.clamp(0.0, 1.0))?;
            times.push(t);
            lambdas.push(lam);
            lambda_dots.push(ld);
            alphas.push(a);
            weights.push(ld * a);
        }
        let selected = vec![true; sched.steps()];
        Ok(Self {
            schedule: *sched,
            times,
            lambdas,
            lambda_dots,
            alphas,
            weights,
            selected,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mark `selected` according to a selection rule and return the indices.
    pub fn apply_selection(&mut self, rule: StepSelection) -> Result<Vec<usize>> {
        let chosen = select_impulse_steps(self, rule)?;
        self.selected = vec![false; self.len()];
        for &i in &chosen {
            self.selected[i] = true;
        }
        Ok(chosen)
    }

    /// CSV dump: `step,t,lambda,lambda_dot,alpha1,weight,selected`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,t,lambda,lambda_dot,alpha1,weight,selected")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                i + 1,
                self.times[i],
                self.lambdas[i],
                self.lambda_dots[i],
                self.alphas[i],
                self.weights[i],
                self.selected[i] as u8
            )?;
        }
        Ok(())
    }
}

/// How to pick the impulse steps out of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSelection {
    /// Keep the `p` steps with the largest `|w_m|` (ties: earlier step).
    KeepTop(usize),
    /// Keep every step with `|w_m| >= fraction · max|w|`, fraction in (0, 1].
    WeightFraction(f64),
}

/// Rank steps by CD dominance and return the kept indices in time order.
pub fn select_impulse_steps(profile: &CdProfile, rule: StepSelection) -> Result<Vec<usize>> {
    let n = profile.len();
    let mut order: Vec<usize> = (0..n).collect();
    // Descending |w|, ties broken by earlier index.
    order.sort_by(|&a, &b| {
        profile.weights[b]
            .abs()
            .partial_cmp(&profile.weights[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = match rule {
        StepSelection::KeepTop(p) => {
            if p == 0 || p > n {
                return Err(Error::InvalidSchedule(format!("keep = {p} outside 1..={n}")));
            }
            order.into_iter().take(p).collect()
        }
        StepSelection::WeightFraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidSchedule(format!(
                    "weight fraction {f} outside (0, 1]"
                )));
            }
            let max_w = profile.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            order
                .into_iter()
                .filter(|&i| profile.weights[i].abs() >= f * max_w)
                .collect()
        }
    };
    if chosen.is_empty() {
        return Err(Error::EmptySelection);
    }
    chosen.sort_unstable();
    Ok(chosen)
}
