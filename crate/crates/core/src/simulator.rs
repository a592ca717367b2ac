//! Statevector simulation engine.
//!
//! Gate application works in place through strided amplitude updates: a
//! one-qubit gate touches `2^{n-1}` amplitude pairs, a two-qubit gate
//! `2^{n-2}` quads, and diagonal gates a single phase per amplitude. No full
//! matrix is ever materialized. With the `parallel` feature, kernels above a
//! size threshold distribute disjoint index sets over rayon; the result is
//! bit-identical to the sequential path.
//!
//! [`exact_evolve`] provides the dense time-ordered propagation oracle for
//! small registers (midpoint-evaluated matrix exponential with a fixed
//! micro-step).

use crate::circuit::{Circuit, Gate};
use crate::dense;
use crate::error::{Error, Result};
use crate::ising::{self, SpinGlass};
use crate::parallel::{map_chunks, PAR_MIN_LEN};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::io::Write;

/// Default memory bound: `2^24` amplitudes = 256 MiB.
pub const MAX_SIM_QUBITS: usize = 24;

/// Register bound for the dense exact-evolution oracle.
pub const MAX_EXACT_QUBITS: usize = 6;

/// Micro-step of the exact time-ordered propagator.
pub const MICRO_STEP: f64 = 1e-4;

const EXPECTATION_CHUNK: u64 = 1 << 12;

/// Two tasks per worker: statevector updates are bandwidth-bound, so fine
/// splitting only adds scheduling overhead.
#[cfg(feature = "parallel")]
fn par_grain(len: usize) -> usize {
    (len / (2 * rayon::current_num_threads().max(1))).max(1 << 12)
}

/// `2^n` complex amplitudes over `n` qubits; qubit `i` is bit `i` of the
/// basis-state index.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::zero_state_with_max(n, MAX_SIM_QUBITS)
    }

    pub fn zero_state_with_max(n: usize, max_qubits: usize) -> Result<Self> {
        if n == 0 || n > max_qubits {
            return Err(Error::TooLarge {
                what: "statevector",
                n,
                max: max_qubits,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, bits: u64) -> f64 {
        self.amps[bits as usize].norm_sqr()
    }

    /// Squared overlap `|<self|other>|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        acc.norm_sqr()
    }

    /// Binary amplitude dump: little-endian `f64` pairs (re, im) in basis
    /// order.
    pub fn write_amplitudes<W: Write>(&self, mut w: W) -> Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Gate kernels

fn one_qubit_seq(amps: &mut [Complex64], q: usize, m: &[Complex64; 4]) {
    let block = 1usize << q;
    let mut base = 0;
    while base < amps.len() {
        for i0 in base..base + block {
            let i1 = i0 | block;
            let a = amps[i0];
            let b = amps[i1];
            amps[i0] = m[0] * a + m[1] * b;
            amps[i1] = m[2] * a + m[3] * b;
        }
        base += 2 * block;
    }
}

#[cfg(feature = "parallel")]
fn one_qubit_par(amps: &mut [Complex64], q: usize, m: &[Complex64; 4]) {
    use rayon::prelude::*;
    let half = amps.len() / 2;
    let block = 1usize << q;
    let low = block - 1;
    let m = *m;
    let ptr = crate::parallel::SendPtr(amps.as_mut_ptr());
    (0..half)
        .into_par_iter()
        .with_min_len(par_grain(half))
        .for_each(move |p| {
            let i0 = ((p >> q) << (q + 1)) | (p & low);
            let i1 = i0 | block;
            // SAFETY: distinct p map to distinct (i0, i1) pairs.
            unsafe {
                let pa = ptr.get().add(i0);
                let pb = ptr.get().add(i1);
                let a = *pa;
                let b = *pb;
                *pa = m[0] * a + m[1] * b;
                *pb = m[2] * a + m[3] * b;
            }
        });
}

fn one_qubit(amps: &mut [Complex64], q: usize, m: &[Complex64; 4], force_seq: bool) {
    #[cfg(feature = "parallel")]
    if !force_seq && amps.len() >= PAR_MIN_LEN {
        return one_qubit_par(amps, q, m);
    }
    let _ = force_seq;
    one_qubit_seq(amps, q, m);
}

/// Diagonal phase per amplitude, selected by a bit predicate.
fn phase_by<F: Fn(usize) -> Complex64 + Sync>(amps: &mut [Complex64], f: F, force_seq: bool) {
    #[cfg(feature = "parallel")]
    if !force_seq && amps.len() >= PAR_MIN_LEN {
        use rayon::prelude::*;
        let grain = par_grain(amps.len());
        amps.par_iter_mut()
            .with_min_len(grain)
            .enumerate()
            .for_each(|(i, a)| *a *= f(i));
        return;
    }
    let _ = force_seq;
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= f(i);
    }
}

/// Real Y-rotation on `rot_q` whose angle sign flips with bit `sign_q`:
/// the kernel for `Rzy`/`Ryz`.
fn signed_y_rotation(
    amps: &mut [Complex64],
    rot_q: usize,
    sign_q: usize,
    theta: f64,
    force_seq: bool,
) {
    let (s, c) = (theta / 2.0).sin_cos();
    let block = 1usize << rot_q;
    let sign_bit = 1usize << sign_q;

    #[cfg(feature = "parallel")]
    if !force_seq && amps.len() >= PAR_MIN_LEN {
        use rayon::prelude::*;
        let half = amps.len() / 2;
        let low = block - 1;
        let ptr = crate::parallel::SendPtr(amps.as_mut_ptr());
        (0..half)
            .into_par_iter()
            .with_min_len(par_grain(half))
            .for_each(move |p| {
                let i0 = ((p >> rot_q) << (rot_q + 1)) | (p & low);
                let i1 = i0 | block;
                let sl = if i0 & sign_bit == 0 { s } else { -s };
                // SAFETY: disjoint pairs per p.
                unsafe {
                    let pa = ptr.get().add(i0);
                    let pb = ptr.get().add(i1);
                    let a = *pa;
                    let b = *pb;
                    *pa = c * a - sl * b;
                    *pb = sl * a + c * b;
                }
            });
        return;
    }
    let _ = force_seq;
    let mut base = 0;
    while base < amps.len() {
        for i0 in base..base + block {
            let i1 = i0 | block;
            let sl = if i0 & sign_bit == 0 { s } else { -s };
            let a = amps[i0];
            let b = amps[i1];
            amps[i0] = c * a - sl * b;
            amps[i1] = sl * a + c * b;
        }
        base += 2 * block;
    }
}

/// General 4x4 kernel in the `|b_{q0} b_{q1}>` basis.
fn two_qubit_general(
    amps: &mut [Complex64],
    q0: usize,
    q1: usize,
    m: &[Complex64; 16],
    force_seq: bool,
) {
    let lo = q0.min(q1);
    let hi = q0.max(q1);
    let bit0 = 1usize << q0;
    let bit1 = 1usize << q1;
    let lo_mask = (1usize << lo) - 1;
    let hi_mask = (1usize << hi) - 1;
    let quad = |p: usize| {
        let pl = ((p >> lo) << (lo + 1)) | (p & lo_mask);
        ((pl >> hi) << (hi + 1)) | (pl & hi_mask)
    };
    let apply = |amps: &mut [Complex64], base: usize| {
        let idx = [base, base | bit1, base | bit0, base | bit0 | bit1];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for r in 0..4 {
            amps[idx[r]] =
                m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
        }
    };

    #[cfg(feature = "parallel")]
    if !force_seq && amps.len() >= PAR_MIN_LEN {
        use rayon::prelude::*;
        let quarter = amps.len() / 4;
        let m = *m;
        let ptr = crate::parallel::SendPtr(amps.as_mut_ptr());
        (0..quarter)
            .into_par_iter()
            .with_min_len(par_grain(quarter))
            .for_each(move |p| {
                let base = quad(p);
                let idx = [base, base | bit1, base | bit0, base | bit0 | bit1];
                // SAFETY: disjoint quads per p.
                unsafe {
                    let v = [
                        *ptr.get().add(idx[0]),
                        *ptr.get().add(idx[1]),
                        *ptr.get().add(idx[2]),
                        *ptr.get().add(idx[3]),
                    ];
                    for r in 0..4 {
                        *ptr.get().add(idx[r]) = m[4 * r] * v[0]
                            + m[4 * r + 1] * v[1]
                            + m[4 * r + 2] * v[2]
                            + m[4 * r + 3] * v[3];
                    }
                }
            });
        return;
    }
    let _ = force_seq;
    for p in 0..amps.len() / 4 {
        apply(amps, quad(p));
    }
}

fn apply_gate(amps: &mut [Complex64], gate: &Gate, force_seq: bool) {
    match *gate {
        Gate::Rz { q, angle } => {
            let p0 = Complex64::from_polar(1.0, -angle / 2.0);
            let p1 = p0.conj();
            let bit = 1usize << q;
            phase_by(amps, |i| if i & bit == 0 { p0 } else { p1 }, force_seq);
        }
        Gate::Rzz { q0, q1, angle } => {
            let p0 = Complex64::from_polar(1.0, -angle / 2.0);
            let p1 = p0.conj();
            let b0 = 1usize << q0;
            let b1 = 1usize << q1;
            phase_by(
                amps,
                |i| {
                    // z0*z1 = +1 when the two bits agree
                    if ((i & b0 == 0) as u8) == ((i & b1 == 0) as u8) {
                        p0
                    } else {
                        p1
                    }
                },
                force_seq,
            );
        }
        Gate::Rzy { q0, q1, angle } => signed_y_rotation(amps, q1, q0, angle, force_seq),
        Gate::Ryz { q0, q1, angle } => signed_y_rotation(amps, q0, q1, angle, force_seq),
        Gate::Ms { .. } => {
            let (q0, q1, m) = gate.two_qubit_matrix().expect("MS is two-qubit");
            two_qubit_general(amps, q0, q1, &m, force_seq);
        }
        _ => {
            let (q, m) = gate
                .one_qubit_matrix()
                .expect("remaining kinds are one-qubit");
            one_qubit(amps, q, &m, force_seq);
        }
    }
}

/// Run a circuit from `|0...0>`.
pub fn run(circuit: &Circuit) -> Result<StateVector> {
    run_impl(circuit, MAX_SIM_QUBITS, false)
}

/// Single-threaded reference path (also the `parallel`-feature fallback).
pub fn run_sequential(circuit: &Circuit) -> Result<StateVector> {
    run_impl(circuit, MAX_SIM_QUBITS, true)
}

/// Run with a custom memory bound (qubit count).
pub fn run_with_max(circuit: &Circuit, max_qubits: usize) -> Result<StateVector> {
    run_impl(circuit, max_qubits, false)
}

fn run_impl(circuit: &Circuit, max_qubits: usize, force_seq: bool) -> Result<StateVector> {
    let mut psi = StateVector::zero_state_with_max(circuit.n(), max_qubits)?;
    for gate in circuit.gates() {
        gate.validate(circuit.n())?;
        apply_gate(&mut psi.amps, gate, force_seq);
    }
    Ok(psi)
}

// ---------------------------------------------------------------------------
// Diagonal expectation values

/// `<ψ|H_f|ψ> = Σ_x |ψ_x|² E(x)` (offset excluded), via chunked Gray-code
/// energy walks.
pub fn expectation(sg: &SpinGlass, psi: &StateVector) -> Result<f64> {
    expectation_impl(sg, psi, false)
}

/// Single-threaded reference path for [`expectation`].
pub fn expectation_sequential(sg: &SpinGlass, psi: &StateVector) -> Result<f64> {
    expectation_impl(sg, psi, true)
}

fn expectation_impl(sg: &SpinGlass, psi: &StateVector, force_seq: bool) -> Result<f64> {
    if sg.n() != psi.n {
        return Err(Error::LengthMismatch {
            expected: sg.n(),
            got: psi.n,
        });
    }
    let dim = psi.amps.len() as u64;
    let n_chunks = dim.div_ceil(EXPECTATION_CHUNK) as usize;
    let small = force_seq || dim < PAR_MIN_LEN as u64;
    let amps = &psi.amps;
    let partials = map_chunks(n_chunks, small, |c| {
        let start = c as u64 * EXPECTATION_CHUNK;
        let end = (start + EXPECTATION_CHUNK).min(dim);
        let mut acc = 0.0;
        ising::energy_walk(sg, start, end, |x, e| {
            acc += amps[x as usize].norm_sqr() * e;
        });
        acc
    });
    Ok(partials.iter().sum())
}

// ---------------------------------------------------------------------------
// Shot sampling

/// Measured bitstring counts.
#[derive(Debug, Clone)]
pub struct ShotCounts {
    n: usize,
    counts: BTreeMap<u64, u32>,
    shots: u32,
}

impl ShotCounts {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shots(&self) -> u32 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<u64, u32> {
        &self.counts
    }

    pub fn count(&self, bits: u64) -> u32 {
        self.counts.get(&bits).copied().unwrap_or(0)
    }

    /// Mean energy of the sampled bitstrings under `sg` (offset excluded).
    pub fn mean_energy(&self, sg: &SpinGlass) -> Result<f64> {
        if sg.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: sg.n(),
                got: self.n,
            });
        }
        let mut acc = 0.0;
        for (&bits, &c) in &self.counts {
            acc += c as f64 * sg.energy_bits(bits);
        }
        Ok(acc / self.shots as f64)
    }
}

impl Serialize for ShotCounts {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Keys rendered as bitstrings (qubit 0 first).
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("n", &self.n)?;
        map.serialize_entry("shots", &self.shots)?;
        let rendered: BTreeMap<String, u32> = self
            .counts
            .iter()
            .map(|(&bits, &c)| {
                let s: String = (0..self.n)
                    .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
                    .collect();
                (s, c)
            })
            .collect();
        map.serialize_entry("counts", &rendered)?;
        map.end()
    }
}

/// Multinomial sampling of `shots` outcomes from `|ψ_x|²`; deterministic for
/// a given seed.
pub fn sample(psi: &StateVector, shots: u32, seed: u64) -> ShotCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut us: Vec<f64> = (0..shots).map(|_| rng.gen::<f64>()).collect();
    us.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    let mut counts: BTreeMap<u64, u32> = BTreeMap::new();
    let mut acc = 0.0;
    let mut k = 0usize;
    let mut last_nonzero = 0u64;
    for (x, a) in psi.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            last_nonzero = x as u64;
        }
        acc += p;
        let mut hit = 0u32;
        while k < us.len() && us[k] < acc {
            hit += 1;
            k += 1;
        }
        if hit > 0 {
            *counts.entry(x as u64).or_insert(0) += hit;
        }
    }
    // Rounding slack at the top of the cumulative distribution.
    if k < us.len() {
        *counts.entry(last_nonzero).or_insert(0) += (us.len() - k) as u32;
    }
    ShotCounts {
        n: psi.n,
        counts,
        shots,
    }
}

// ---------------------------------------------------------------------------
// Dense exact-evolution oracle

/// Which continuous dynamics to propagate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMode {
    /// `H_ad(t) = (1-λ) H_i + λ H_f`.
    Adiabatic,
    /// `H_ad(t) + λ̇ A_λ` with the first-order gauge potential.
    CdAssisted,
    /// `λ̇ A_λ` alone (impulse limit).
    CdOnly,
}

/// Time-ordered propagation of the dense Hamiltonian from `|+>^n` over
/// `[0, total_time]`, micro-step [`MICRO_STEP`] with midpoint evaluation.
///
/// `total_time = 0` returns the initial state unchanged.
pub fn exact_evolve(sg: &SpinGlass, total_time: f64, mode: EvolutionMode) -> Result<StateVector> {
    let n = sg.n();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::TooLarge {
            what: "exact evolution",
            n,
            max: MAX_EXACT_QUBITS,
        });
    }
    if !total_time.is_finite() || total_time < 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "total time {total_time} must be nonnegative"
        )));
    }
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut psi = nalgebra::DVector::from_element(dim, amp);

    if total_time > 0.0 {
        let hi = dense::mixer_hamiltonian(n)?;
        let hf = dense::problem_hamiltonian(sg)?;
        let k = dense::cd_structure(sg)?;
        let steps = (total_time / MICRO_STEP).ceil() as usize;
        let dt = total_time / steps as f64;
        for s in 0..steps {
            let t_mid = (s as f64 + 0.5) * dt;
            let lam = crate::schedule::lambda(t_mid, total_time)?;
            let mut h = dense::CMatrix::zeros(dim, dim);
            if mode != EvolutionMode::CdOnly {
                h += &hi * Complex64::new(1.0 - lam, 0.0) + &hf * Complex64::new(lam, 0.0);
            }
            if mode != EvolutionMode::Adiabatic {
                let g = crate::schedule::cd_term_coefficient(sg, t_mid, total_time)?;
                h += &k * Complex64::new(g, 0.0);
            }
            expm_apply(&h, dt, &mut psi);
        }
    }

    let amps: Vec<Complex64> = psi.iter().copied().collect();
    Ok(StateVector { n, amps })
}

/// `ψ <- exp(-i dt H) ψ` by a Taylor series of matrix-vector products.
fn expm_apply(h: &dense::CMatrix, dt: f64, psi: &mut nalgebra::DVector<Complex64>) {
    let factor = Complex64::new(0.0, -dt);
    let mut term = psi.clone();
    for k in 1..=40 {
        term = h * &term * (factor / k as f64);
        *psi += &term;
        if term.norm() < 1e-16 {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        build_cd_assisted, build_cd_only, build_digitized_adiabatic, Circuit, CircuitMeta,
    };
    use crate::ising::{brute_force_spectrum, random_spin_glass};
    use crate::schedule::Schedule;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn plus_circuit(n: usize) -> Circuit {
        Circuit::new(
            n,
            (0..n).map(|q| Gate::H { q }).collect(),
            CircuitMeta::default(),
        )
        .unwrap()
    }

    #[test]
    fn hadamards_give_uniform_amplitudes() {
        let psi = run(&plus_circuit(4)).unwrap();
        let expect = 0.25;
        for a in psi.amplitudes() {
            assert_abs_diff_eq!(a.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rzz_phases_basis_state() {
        let theta = 0.73;
        let c = Circuit::new(
            2,
            vec![Gate::Rzz { q0: 0, q1: 1, angle: theta }],
            CircuitMeta::default(),
        )
        .unwrap();
        let psi = run(&c).unwrap();
        let expect = Complex64::from_polar(1.0, -theta / 2.0);
        assert_abs_diff_eq!((psi.amplitudes()[0] - expect).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.probability(0), 1.0, epsilon = 1e-12);
    }

    fn random_circuit(n: usize, gates: usize, seed: u64) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for _ in 0..gates {
            let q = rng.gen_range(0..n);
            let mut q2 = rng.gen_range(0..n);
            while q2 == q {
                q2 = rng.gen_range(0..n);
            }
            let a = rng.gen_range(-3.0..3.0);
            out.push(match rng.gen_range(0..10) {
                0 => Gate::H { q },
                1 => Gate::Rx { q, angle: a },
                2 => Gate::Ry { q, angle: a },
                3 => Gate::Rz { q, angle: a },
                4 => Gate::Rzz { q0: q, q1: q2, angle: a },
                5 => Gate::Rzy { q0: q, q1: q2, angle: a },
                6 => Gate::Ryz { q0: q, q1: q2, angle: a },
                7 => Gate::Gpi { q, phi: a },
                8 => Gate::Gpi2 { q, phi: a },
                _ => Gate::Ms {
                    q0: q,
                    q1: q2,
                    phi0: rng.gen_range(0.0..std::f64::consts::TAU),
                    phi1: rng.gen_range(0.0..std::f64::consts::TAU),
                    theta: rng.gen_range(0.0..1.5),
                },
            });
        }
        Circuit::new(n, out, CircuitMeta::default()).unwrap()
    }

    #[test]
    fn kernels_match_dense_matrix_product() {
        for seed in 0..8 {
            let c = random_circuit(3, 25, seed);
            let psi = run(&c).unwrap();
            let u = dense::circuit_unitary(&c, 3).unwrap();
            for (x, a) in psi.amplitudes().iter().enumerate() {
                let expect = u[(x, 0)]; // column of |000>
                assert!(
                    (a - expect).norm() < 1e-10,
                    "seed {seed} amp {x}: {a} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn kernels_preserve_norm() {
        for seed in 20..26 {
            let c = random_circuit(5, 60, seed);
            let psi = run(&c).unwrap();
            assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        // n = 15 exceeds the parallel threshold (2^15 = 32768 amplitudes).
        let c = random_circuit(15, 40, 99);
        let a = run(&c).unwrap();
        let b = run_sequential(&c).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn expectation_of_plus_state_is_zero() {
        let sg = random_spin_glass(5, 4).unwrap();
        let psi = run(&plus_circuit(5)).unwrap();
        assert_abs_diff_eq!(expectation(&sg, &psi).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn expectation_of_basis_state_is_energy() {
        let sg = random_spin_glass(4, 5).unwrap();
        // Prepare |1010> via X = GPi(0).
        let c = Circuit::new(
            4,
            vec![Gate::Gpi { q: 1, phi: 0.0 }, Gate::Gpi { q: 3, phi: 0.0 }],
            CircuitMeta::default(),
        )
        .unwrap();
        let psi = run(&c).unwrap();
        assert_abs_diff_eq!(
            expectation(&sg, &psi).unwrap(),
            sg.energy_bits(0b1010),
            epsilon = 1e-10
        );
    }

    #[test]
    fn expectation_matches_dense_quadratic_form() {
        let sg = random_spin_glass(4, 6).unwrap();
        let c = random_circuit(4, 30, 7);
        let psi = run(&c).unwrap();
        let hf = dense::problem_hamiltonian(&sg).unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let dense_val = (v.adjoint() * &hf * &v)[(0, 0)].re;
        assert_abs_diff_eq!(expectation(&sg, &psi).unwrap(), dense_val, epsilon = 1e-10);
        assert_abs_diff_eq!(
            expectation_sequential(&sg, &psi).unwrap(),
            dense_val,
            epsilon = 1e-10
        );
    }

    #[test]
    fn sampling_basis_state_and_determinism() {
        let c = Circuit::new(2, vec![Gate::Gpi { q: 0, phi: 0.0 }], CircuitMeta::default()).unwrap();
        let psi = run(&c).unwrap();
        let counts = sample(&psi, 5000, 17);
        assert_eq!(counts.count(0b01), 5000);
        assert_eq!(counts.shots(), 5000);

        let psi2 = run(&plus_circuit(3)).unwrap();
        let a = sample(&psi2, 2000, 3);
        let b = sample(&psi2, 2000, 3);
        assert_eq!(a.counts(), b.counts());
        let c2 = sample(&psi2, 2000, 4);
        assert_ne!(a.counts(), c2.counts());
    }

    #[test]
    fn sampling_single_qubit_plus_within_binomial_bound() {
        let psi = run(&plus_circuit(1)).unwrap();
        let shots = 100_000u32;
        let counts = sample(&psi, shots, 12);
        let sigma = (shots as f64 * 0.25).sqrt();
        let half = shots as f64 / 2.0;
        assert!((counts.count(0) as f64 - half).abs() < 5.0 * sigma);
        assert!((counts.count(1) as f64 - half).abs() < 5.0 * sigma);
        assert_eq!(counts.count(0) + counts.count(1), shots);
    }

    #[test]
    fn exact_evolution_zero_time_is_identity() {
        let sg = random_spin_glass(3, 8).unwrap();
        let psi = exact_evolve(&sg, 0.0, EvolutionMode::Adiabatic).unwrap();
        let plus = run(&plus_circuit(3)).unwrap();
        assert!(psi.fidelity(&plus) > 1.0 - 1e-12);
    }

    #[test]
    fn slow_adiabatic_evolution_reaches_ground_state() {
        let sg =
            SpinGlass::new(2, vec![0.5, -0.3], &[(0, 1, 0.7)], 0.0).unwrap();
        let spec = brute_force_spectrum(&sg, None).unwrap();
        let psi = exact_evolve(&sg, 60.0, EvolutionMode::Adiabatic).unwrap();
        let p_ground: f64 = spec
            .argmin_set
            .iter()
            .map(|&g| psi.probability(g))
            .sum();
        assert!(p_ground >= 0.99, "ground-state weight {p_ground}");
    }

    use crate::ising::SpinGlass;

    #[test]
    fn trotterized_adiabatic_converges_to_exact() {
        let sg = random_spin_glass(2, 21).unwrap();
        let exact = exact_evolve(&sg, 1.0, EvolutionMode::Adiabatic).unwrap();
        let mut last = 0.0;
        for dt in [0.2, 0.1, 0.05, 0.01] {
            let sched = Schedule::new(1.0, dt).unwrap();
            let c = build_digitized_adiabatic(&sg, &sched);
            let psi = run(&c).unwrap();
            let f = exact.fidelity(&psi);
            assert!(f >= last - 1e-9, "fidelity not monotone: {f} after {last}");
            last = f;
        }
        assert!(last >= 0.999);
    }

    #[test]
    fn trotterized_cd_assisted_matches_exact_at_fine_dt() {
        let sg = random_spin_glass(3, 22).unwrap();
        let exact = exact_evolve(&sg, 0.7, EvolutionMode::CdAssisted).unwrap();
        let sched = Schedule::new(0.7, 0.01).unwrap();
        let c = build_cd_assisted(&sg, &sched).unwrap();
        let psi = run(&c).unwrap();
        assert!(exact.fidelity(&psi) >= 0.999);
    }

    #[test]
    fn trotterized_cd_only_matches_exact_at_fine_dt() {
        let sg = random_spin_glass(3, 23).unwrap();
        let exact = exact_evolve(&sg, 0.7, EvolutionMode::CdOnly).unwrap();
        let sched = Schedule::new(0.7, 0.01).unwrap();
        let all: Vec<usize> = (0..sched.steps()).collect();
        let c = build_cd_only(&sg, &sched, &all, 0.0).unwrap();
        let psi = run(&c).unwrap();
        assert!(exact.fidelity(&psi) >= 0.999);
    }

    #[test]
    fn oversized_register_is_rejected() {
        assert!(StateVector::zero_state(25).is_err());
        let sg = random_spin_glass(7, 1).unwrap();
        assert!(exact_evolve(&sg, 0.1, EvolutionMode::Adiabatic).is_err());
    }

    #[test]
    fn amplitude_dump_is_little_endian_interleaved() {
        let psi = run(&plus_circuit(1)).unwrap();
        let mut buf = Vec::new();
        psi.write_amplitudes(&mut buf).unwrap();
        assert_eq!(buf.len(), 2 * 2 * 8);
        let re0 = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        assert_abs_diff_eq!(re0, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }
}
