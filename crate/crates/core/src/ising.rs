//! Ising spin-glass problem modeling.
//!
//! Converts Markowitz-style portfolio problems into spin-glass Hamiltonians
//! `H = Σ h_i Z_i + Σ_{i<j} J_ij Z_i Z_j`, evaluates energies, enumerates
//! exact spectra as a brute-force oracle, and generates random benchmark
//! instances.
//!
//! Bit-to-spin convention: `x_i = (1 - z_i) / 2`, i.e. a selected asset
//! (`x_i = 1`) maps to spin `z_i = -1`. Bit `i` of a bitstring is stored at
//! bit position `i` of the underlying integer (qubit 0 = least significant
//! bit).

use crate::error::{Error, Result};
use crate::parallel::{map_chunks, PAR_MIN_LEN};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Enumeration bound for exhaustive spectrum scans.
pub const MAX_BRUTE_FORCE_QUBITS: usize = 26;

/// Ceiling on stored ground-state degeneracy; the count keeps running past it.
const MAX_ARGMIN_STORED: usize = 1 << 16;

const SCAN_CHUNK: usize = 1 << 12;

/// A fixed-length bitstring; bit `i` is asset/qubit `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    n: usize,
    bits: u64,
}

impl BitString {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidProblem(format!("bitstring length {n}")));
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::InvalidProblem(format!(
                "bits 0x{bits:x} exceed length {n}"
            )));
        }
        Ok(Self { n, bits })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn hamming_weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Bitwise complement within the string length.
    pub fn complement(&self) -> Self {
        let mask = if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        };
        Self {
            n: self.n,
            bits: self.bits ^ mask,
        }
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

/// Diagonal spin-glass Hamiltonian `Σ h_i Z_i + Σ_{i<j} J_ij Z_i Z_j` plus a
/// tracked constant offset.
///
/// The offset is not part of the Hamiltonian; it restores the original
/// objective value when the instance came from an encoded problem.
#[derive(Debug, Clone)]
pub struct SpinGlass {
    n: usize,
    h: Vec<f64>,
    /// Upper-triangular couplings, packed row-major over pairs `i < j`.
    j_upper: Vec<f64>,
    /// Symmetric full matrix (zero diagonal) for fast row access.
    j_full: Vec<f64>,
    offset: f64,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl SpinGlass {
    /// Build from local fields and sparse `i < j` couplings.
    pub fn new(n: usize, h: Vec<f64>, couplings: &[(usize, usize, f64)], offset: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProblem("n must be >= 1".into()));
        }
        if h.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: h.len(),
            });
        }
        if let Some(bad) = h.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem(format!("non-finite field {bad}")));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidProblem(format!("non-finite offset {offset}")));
        }
        let mut j_upper = vec![0.0; n * (n - 1) / 2];
        let mut seen = vec![false; j_upper.len()];
        for &(i, j, v) in couplings {
            if i >= j {
                return Err(Error::InvalidProblem(format!(
                    "coupling ({i},{j}) must satisfy i < j"
                )));
            }
            if j >= n {
                return Err(Error::InvalidProblem(format!(
                    "coupling ({i},{j}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "non-finite coupling ({i},{j}) = {v}"
                )));
            }
            let k = pair_index(n, i, j);
            if seen[k] {
                return Err(Error::InvalidProblem(format!("duplicate coupling ({i},{j})")));
            }
            seen[k] = true;
            j_upper[k] = v;
        }
        Ok(Self::from_upper(n, h, j_upper, offset))
    }

    fn from_upper(n: usize, h: Vec<f64>, j_upper: Vec<f64>, offset: f64) -> Self {
        let mut j_full = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = j_upper[pair_index(n, i, j)];
                j_full[i * n + j] = v;
                j_full[j * n + i] = v;
            }
        }
        Self {
            n,
            h,
            j_upper,
            j_full,
            offset,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Coupling `J_ij` for any ordering of distinct `i`, `j`; zero if absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.j_full[i * self.n + j]
    }

    /// All `i < j` pairs with their (possibly zero) coupling.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).map(move |j| (i, j, self.j_upper[pair_index(self.n, i, j)]))
        })
    }

    /// Row `i` of the symmetric coupling matrix.
    pub(crate) fn coupling_row(&self, i: usize) -> &[f64] {
        &self.j_full[i * self.n..(i + 1) * self.n]
    }

    /// `Σ |h_i| + Σ |J_ij|`: an upper bound on |energy| over all bitstrings.
    pub fn energy_scale(&self) -> f64 {
        self.h.iter().map(|v| v.abs()).sum::<f64>()
            + self.j_upper.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Hamiltonian energy of a computational basis state (offset excluded).
    pub fn energy(&self, x: &BitString) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.energy_bits(x.bits()))
    }

    /// Energy plus the tracked constant offset (the encoded objective value).
    pub fn energy_with_offset(&self, x: &BitString) -> Result<f64> {
        Ok(self.energy(x)? + self.offset)
    }

    /// Fast path: energy of basis state `bits` with spin `z_i = 1 - 2*bit_i`.
    pub fn energy_bits(&self, bits: u64) -> f64 {
        let n = self.n;
        let mut e = 0.0;
        for i in 0..n {
            let zi = 1.0 - 2.0 * ((bits >> i) & 1) as f64;
            e += self.h[i] * zi;
            let row = &self.j_full[i * n..(i + 1) * n];
            for (j, jij) in row.iter().enumerate().skip(i + 1) {
                let zj = 1.0 - 2.0 * ((bits >> j) & 1) as f64;
                e += jij * zi * zj;
            }
        }
        e
    }

    /// Deterministic JSON document `{n, h, J: [[i, j, value], ...], offset}`.
    pub fn to_json(&self) -> serde_json::Value {
        let doc = SpinGlassDoc::from(self);
        serde_json::to_value(doc).expect("spin glass serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: SpinGlassDoc = serde_json::from_value(value.clone())?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct SpinGlassDoc {
    n: usize,
    h: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl From<&SpinGlass> for SpinGlassDoc {
    fn from(sg: &SpinGlass) -> Self {
        let j = sg.pairs().filter(|&(_, _, v)| v != 0.0).collect();
        Self {
            n: sg.n,
            h: sg.h.clone(),
            j,
            offset: sg.offset,
        }
    }
}

impl TryFrom<SpinGlassDoc> for SpinGlass {
    type Error = Error;

    fn try_from(doc: SpinGlassDoc) -> Result<Self> {
        SpinGlass::new(doc.n, doc.h, &doc.j, doc.offset)
    }
}

/// Single-period Boolean portfolio selection problem.
///
/// Maximizes `θ1 Σ x_i e_i - θ2 Σ_{i,j} x_i x_j c_ij - θ3 (Σ x_i - B)^2` over
/// `x ∈ {0,1}^n`; the budget constraint is folded into the objective.
#[derive(Debug, Clone)]
pub struct PortfolioProblem {
    n: usize,
    expected_returns: DVector<f64>,
    covariance: DMatrix<f64>,
    budget: usize,
    theta1: f64,
    theta2: f64,
    theta3: f64,
}

impl PortfolioProblem {
    pub fn new(
        expected_returns: DVector<f64>,
        covariance: DMatrix<f64>,
        budget: usize,
        theta1: f64,
        theta2: f64,
        theta3: f64,
    ) -> Result<Self> {
        let n = expected_returns.len();
        if n == 0 {
            return Err(Error::InvalidProblem("no assets".into()));
        }
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: covariance.nrows(),
            });
        }
        if expected_returns.iter().any(|v| !v.is_finite())
            || covariance.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidProblem("non-finite model entries".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidProblem(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        // PSD within tolerance on the smallest eigenvalue.
        let sym = (covariance.clone() + covariance.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::InvalidProblem(format!(
                "covariance not PSD: min eigenvalue {min_eig:.3e}"
            )));
        }
        if budget == 0 || budget > n {
            return Err(Error::InvalidProblem(format!(
                "budget {budget} outside 1..={n}"
            )));
        }
        if theta1 < 0.0 || theta2 < 0.0 || theta3 < 0.0 {
            return Err(Error::InvalidProblem("negative Lagrange multiplier".into()));
        }
        Ok(Self {
            n,
            expected_returns,
            covariance,
            budget,
            theta1,
            theta2,
            theta3,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn thetas(&self) -> (f64, f64, f64) {
        (self.theta1, self.theta2, self.theta3)
    }

    pub fn expected_returns(&self) -> &DVector<f64> {
        &self.expected_returns
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Minimization cost `C(x)`: the negated portfolio objective, evaluated
    /// directly from the model (no spin encoding involved).
    pub fn cost(&self, bits: u64) -> f64 {
        let x = |i: usize| ((bits >> i) & 1) as f64;
        let mut revenue = 0.0;
        let mut risk = 0.0;
        let mut count = 0.0;
        for i in 0..self.n {
            let xi = x(i);
            revenue += xi * self.expected_returns[i];
            count += xi;
            for j in 0..self.n {
                risk += xi * x(j) * self.covariance[(i, j)];
            }
        }
        let slack = count - self.budget as f64;
        -(self.theta1 * revenue - self.theta2 * risk - self.theta3 * slack * slack)
    }

    /// Fold the objective into spin-glass coefficients.
    ///
    /// Under `x_i = (1 - z_i)/2` the cost collects into
    /// `Σ h_i z_i + Σ_{i<j} J_ij z_i z_j + offset` with
    /// `h_i = θ1 e_i / 2 - θ2 (Σ_j c_ij) / 2 - θ3 (n - 2B) / 2`,
    /// `J_ij = θ2 c_ij / 2 + θ3 / 2`, and the identity
    /// `C(x) = energy(x) + offset` holding exactly for every bitstring.
    pub fn to_spin_glass(&self) -> SpinGlass {
        let n = self.n;
        let a = n as f64 - 2.0 * self.budget as f64;
        let sum_e: f64 = self.expected_returns.iter().sum();
        let trace_c: f64 = (0..n).map(|i| self.covariance[(i, i)]).sum();
        let total_c: f64 = self.covariance.iter().sum();

        let mut h = vec![0.0; n];
        for (i, hi) in h.iter_mut().enumerate() {
            let row_sum: f64 = (0..n).map(|j| self.covariance[(i, j)]).sum();
            *hi = 0.5 * self.theta1 * self.expected_returns[i] - 0.5 * self.theta2 * row_sum
                - 0.5 * self.theta3 * a;
        }
        let mut j_upper = vec![0.0; n * (n - 1) / 2];
        for i in 0..n {
            for j in (i + 1)..n {
                j_upper[pair_index(n, i, j)] =
                    0.5 * self.theta2 * self.covariance[(i, j)] + 0.5 * self.theta3;
            }
        }
        let offset = -0.5 * self.theta1 * sum_e + 0.25 * self.theta2 * (total_c + trace_c)
            + 0.25 * self.theta3 * (a * a + n as f64);
        SpinGlass::from_upper(n, h, j_upper, offset)
    }
}

/// Exact spectrum statistics from exhaustive enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub e_min: f64,
    /// Ground states (bit patterns); truncated at a storage cap for massively
    /// degenerate instances, with `degeneracy` still counting all of them.
    pub argmin_set: Vec<u64>,
    pub degeneracy: usize,
    pub e_max: f64,
    pub e_avg_uniform: f64,
    /// Mean over Hamming-weight-`B` states when a budget was supplied.
    pub e_avg_feasible: Option<f64>,
}

fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Visit `(bits, energy)` for Gray-code sequence positions `start..end`,
/// computing the first energy directly and subsequent ones by single-flip
/// deltas. Chunked callers bound the accumulated rounding drift by
/// restarting per chunk.
pub(crate) fn energy_walk<F: FnMut(u64, f64)>(sg: &SpinGlass, start: u64, end: u64, mut f: F) {
    let n = sg.n();
    let mut x = gray(start);
    let mut z = vec![0.0f64; n];
    for (i, zi) in z.iter_mut().enumerate() {
        *zi = 1.0 - 2.0 * ((x >> i) & 1) as f64;
    }
    let mut e = sg.energy_bits(x);
    for idx in start..end {
        f(x, e);
        if idx + 1 < end {
            let k = (idx + 1).trailing_zeros() as usize;
            let mut field = sg.h[k];
            let row = sg.coupling_row(k);
            for j in 0..n {
                field += row[j] * z[j];
            }
            e -= 2.0 * z[k] * field;
            z[k] = -z[k];
            x ^= 1 << k;
        }
    }
}

struct ChunkScan {
    min: f64,
    max: f64,
    sum: f64,
    /// Candidate minima `(bits, energy)` within `tol` of the chunk minimum.
    candidates: Vec<(u64, f64)>,
    truncated: usize,
    feas_sum: f64,
    feas_count: u64,
}

/// Walk one Gray-code chunk, refreshing the energy accumulator at the start.
fn scan_chunk(sg: &SpinGlass, start: u64, end: u64, budget: Option<u32>, tol: f64) -> ChunkScan {
    let n = sg.n;
    let mut x = gray(start);
    let mut z = vec![0.0f64; n];
    for (i, zi) in z.iter_mut().enumerate() {
        *zi = 1.0 - 2.0 * ((x >> i) & 1) as f64;
    }
    let mut e = sg.energy_bits(x);

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut candidates: Vec<(u64, f64)> = Vec::new();
    let mut truncated = 0usize;
    let mut feas_sum = 0.0;
    let mut feas_count = 0u64;

    for idx in start..end {
        if e < min - tol {
            min = e;
            candidates.clear();
            candidates.push((x, e));
            truncated = 0;
        } else if e <= min + tol {
            if candidates.len() < MAX_ARGMIN_STORED {
                candidates.push((x, e));
            } else {
                truncated += 1;
            }
            if e < min {
                min = e;
            }
        }
        if e > max {
            max = e;
        }
        sum += e;
        if let Some(b) = budget {
            if x.count_ones() == b {
                feas_sum += e;
                feas_count += 1;
            }
        }
        if idx + 1 < end {
            let k = (idx + 1).trailing_zeros() as usize;
            // Flipping bit k changes h_k z_k and every coupling touching k;
            // the coupling matrix has a zero diagonal so z_k itself drops out.
            let mut field = sg.h[k];
            let row = sg.coupling_row(k);
            for j in 0..n {
                field += row[j] * z[j];
            }
            e -= 2.0 * z[k] * field;
            z[k] = -z[k];
            x ^= 1 << k;
        }
    }
    ChunkScan {
        min,
        max,
        sum,
        candidates,
        truncated,
        feas_sum,
        feas_count,
    }
}

/// Exhaustive scan of all `2^n` bitstrings.
///
/// When `budget` is given, also averages over the Hamming-weight-`budget`
/// (feasible) states. The scan partitions the range into fixed-size chunks;
/// partial results are merged in index order, so the outcome does not depend
/// on how chunks were scheduled.
pub fn brute_force_spectrum(sg: &SpinGlass, budget: Option<usize>) -> Result<SpectrumSummary> {
    spectrum_impl(sg, budget, false)
}

/// Single-threaded variant of [`brute_force_spectrum`] (reference path for the
/// parallel implementation; also used by the comparison benchmarks).
pub fn brute_force_spectrum_sequential(
    sg: &SpinGlass,
    budget: Option<usize>,
) -> Result<SpectrumSummary> {
    spectrum_impl(sg, budget, true)
}

fn spectrum_impl(sg: &SpinGlass, budget: Option<usize>, force_seq: bool) -> Result<SpectrumSummary> {
    let n = sg.n;
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::TooLarge {
            what: "brute-force spectrum",
            n,
            max: MAX_BRUTE_FORCE_QUBITS,
        });
    }
    if let Some(b) = budget {
        if b > n {
            return Err(Error::InvalidProblem(format!("budget {b} > n = {n}")));
        }
    }
    let dim: u64 = 1 << n;
    let tol = 1e-12 * sg.energy_scale().max(1.0);
    let chunk = SCAN_CHUNK as u64;
    let n_chunks = dim.div_ceil(chunk) as usize;
    let small = force_seq || dim < PAR_MIN_LEN as u64;
    let budget_u32 = budget.map(|b| b as u32);

    let parts = map_chunks(n_chunks, small, |c| {
        let start = c as u64 * chunk;
        let end = (start + chunk).min(dim);
        scan_chunk(sg, start, end, budget_u32, tol)
    });

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut feas_sum = 0.0;
    let mut feas_count = 0u64;
    let mut candidates: Vec<(u64, f64)> = Vec::new();
    let mut truncated = 0usize;
    for p in parts {
        sum += p.sum;
        if p.max > max {
            max = p.max;
        }
        feas_sum += p.feas_sum;
        feas_count += p.feas_count;
        if p.min < min - tol {
            min = p.min;
            candidates = p.candidates;
            truncated = p.truncated;
        } else if p.min <= min + tol {
            min = min.min(p.min);
            truncated += p.truncated;
            for c in p.candidates {
                if candidates.len() < MAX_ARGMIN_STORED {
                    candidates.push(c);
                } else {
                    truncated += 1;
                }
            }
        }
    }

    // Re-evaluate candidates exactly (no accumulated walk error) and keep the
    // true minimizers.
    let mut best = f64::INFINITY;
    for (bits, e) in candidates.iter_mut() {
        *e = sg.energy_bits(*bits);
        if *e < best {
            best = *e;
        }
    }
    let mut argmin: Vec<u64> = candidates
        .into_iter()
        .filter(|&(_, e)| e <= best + tol)
        .map(|(bits, _)| bits)
        .collect();
    argmin.sort_unstable();
    argmin.dedup();
    let degeneracy = argmin.len() + truncated;

    Ok(SpectrumSummary {
        e_min: best,
        argmin_set: argmin,
        degeneracy,
        e_max: max,
        e_avg_uniform: sum / dim as f64,
        e_avg_feasible: budget.map(|_| {
            if feas_count == 0 {
                f64::NAN
            } else {
                feas_sum / feas_count as f64
            }
        }),
    })
}

/// Random all-to-all instance with i.i.d. standard-normal fields and
/// couplings; deterministic for a given seed.
pub fn random_spin_glass(n: usize, seed: u64) -> Result<SpinGlass> {
    if n == 0 {
        return Err(Error::InvalidProblem("n must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let h: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let j_upper: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| normal.sample(&mut rng))
        .collect();
    Ok(SpinGlass::from_upper(n, h, j_upper, 0.0))
}
