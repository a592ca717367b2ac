//! Performance metrics and run reports: the mean-based approximation ratio,
//! energy histograms, and method comparison tables.

use crate::error::{Error, Result};
use crate::ising::{self, SpinGlass};
use crate::parallel::{map_chunks, PAR_MIN_LEN};
use crate::simulator::{ShotCounts, StateVector};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Mean-based approximation ratio `r = (E_avg - E) / (E_avg - E_min)`:
/// the fraction of the mean-to-optimum gap closed by a state of energy `E`.
///
/// For the uniform search set `E_avg = 0` and the ratio reduces to
/// `E / E_min`. Requires `E_avg > E_min` strictly; values can be negative
/// (worse than the search-set mean) and are never clamped.
pub fn approximation_ratio(e: f64, e_avg: f64, e_min: f64) -> Result<f64> {
    if !e_avg.is_finite() || !e_min.is_finite() || e_avg <= e_min {
        return Err(Error::DegenerateSpectrum(e_min));
    }
    Ok((e_avg - e) / (e_avg - e_min))
}

/// Spectral-width ratio `(E_max - E) / (E_max - E_min)`; kept only as a
/// labeled alternative for comparison tables.
pub fn spectral_ratio(e: f64, e_max: f64, e_min: f64) -> Result<f64> {
    if !e_max.is_finite() || !e_min.is_finite() || e_max <= e_min {
        return Err(Error::DegenerateSpectrum(e_min));
    }
    Ok((e_max - e) / (e_max - e_min))
}

/// Weight per exact energy value, sorted ascending by energy.
///
/// Weights sum to 1 for statevector sources and to the shot count for
/// sampled sources.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyHistogram {
    pub entries: Vec<(f64, f64)>,
}

impl EnergyHistogram {
    /// Exact-energy histogram of `|ψ_x|²` weights.
    pub fn from_state(sg: &SpinGlass, psi: &StateVector) -> Result<Self> {
        if sg.n() != psi.n() {
            return Err(Error::LengthMismatch {
                expected: sg.n(),
                got: psi.n(),
            });
        }
        let dim = psi.amplitudes().len() as u64;
        let chunk = 1u64 << 12;
        let n_chunks = dim.div_ceil(chunk) as usize;
        let amps = psi.amplitudes();
        let parts = map_chunks(n_chunks, dim < PAR_MIN_LEN as u64, |c| {
            let start = c as u64 * chunk;
            let end = (start + chunk).min(dim);
            let mut local: Vec<(f64, f64)> = Vec::with_capacity((end - start) as usize);
            ising::energy_walk(sg, start, end, |x, e| {
                local.push((e, amps[x as usize].norm_sqr()));
            });
            local
        });
        let mut entries: Vec<(f64, f64)> = parts.into_iter().flatten().collect();
        Ok(Self::merge(&mut entries))
    }

    /// Exact-energy histogram of measured counts.
    pub fn from_counts(sg: &SpinGlass, counts: &ShotCounts) -> Result<Self> {
        if sg.n() != counts.n() {
            return Err(Error::LengthMismatch {
                expected: sg.n(),
                got: counts.n(),
            });
        }
        let mut entries: Vec<(f64, f64)> = counts
            .counts()
            .iter()
            .map(|(&bits, &c)| (sg.energy_bits(bits), c as f64))
            .collect();
        Ok(Self::merge(&mut entries))
    }

    fn merge(entries: &mut [(f64, f64)]) -> Self {
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(entries.len());
        for &(e, w) in entries.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += w,
                _ => merged.push((e, w)),
            }
        }
        Self { entries: merged }
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Weighted mean energy.
    pub fn mean_energy(&self) -> f64 {
        let total = self.total_weight();
        self.entries.iter().map(|(e, w)| e * w).sum::<f64>() / total
    }

    /// Re-bin into `bins` uniform intervals spanning the observed energy
    /// range (for display); returns `(bin_center, weight)` pairs.
    pub fn rebin(&self, bins: usize) -> Vec<(f64, f64)> {
        if self.entries.is_empty() || bins == 0 {
            return Vec::new();
        }
        let lo = self.entries.first().unwrap().0;
        let hi = self.entries.last().unwrap().0;
        if hi == lo {
            return vec![(lo, self.total_weight())];
        }
        let width = (hi - lo) / bins as f64;
        let mut out = vec![0.0; bins];
        for &(e, w) in &self.entries {
            let k = (((e - lo) / width) as usize).min(bins - 1);
            out[k] += w;
        }
        out.iter()
            .enumerate()
            .map(|(k, &w)| (lo + (k as f64 + 0.5) * width, w))
            .collect()
    }

    /// CSV dump `energy,weight` (exact energies).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "energy,weight")?;
        for (e, wt) in &self.entries {
            writeln!(w, "{e},{wt}")?;
        }
        Ok(())
    }
}

/// Which state set the reported `E_avg` averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchSet {
    /// All `2^n` states; the traceless Hamiltonian makes `E_avg` exactly 0.
    Uniform,
    /// Hamming-weight-`B` states.
    FeasibleBudget,
}

/// Energies of a run under both evaluation conventions. Reported energies
/// exclude the constant offset; `offset` restores objective values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Exact `<ψ|H_f|ψ>`, when a statevector was available.
    pub expectation: Option<f64>,
    /// Shot-mean energy, when sampling was performed.
    pub shot_mean: Option<f64>,
    pub offset: f64,
}

/// Schedule/ansatz configuration echoed into a report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MethodConfig {
    pub total_time: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub layers: Option<usize>,
    pub cutoff: Option<f64>,
    pub shots: Option<u32>,
    pub sample_seed: Option<u64>,
    pub init_seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub restarts: Option<usize>,
    /// Steps surviving the gate cutoff with at least one gate (CD-only).
    pub surviving_steps: Option<usize>,
}

/// Gate statistics echoed into a report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GateReport {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub depth: usize,
    pub pruned: usize,
}

/// The CLI's single-run output record (JSON schema version 1).
///
/// Deterministic for a fixed config and seeds: no timestamps or host
/// information are recorded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub method: String,
    pub n: usize,
    pub config: MethodConfig,
    pub energy: EnergyReport,
    pub e_min: f64,
    pub e_avg: f64,
    pub search_set: SearchSet,
    /// Mean-based ratio from the exact expectation, when available.
    pub r_avg_expectation: Option<f64>,
    /// Mean-based ratio from the shot-mean energy, when available.
    pub r_avg_shot_mean: Option<f64>,
    pub gates: GateReport,
    /// Display histogram (binned); full exact histogram ships as CSV.
    pub histogram: Vec<(f64, f64)>,
}

impl RunReport {
    /// The ratio to rank methods by: expectation-based when present, else
    /// shot-mean-based.
    pub fn primary_ratio(&self) -> Option<f64> {
        self.r_avg_expectation.or(self.r_avg_shot_mean)
    }
}

/// One row of a method comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub steps_or_layers: String,
    pub two_qubit: usize,
    pub depth: usize,
    pub r_avg: Option<f64>,
}

/// Aligned comparison of runs: machine-readable rows plus a plain-text
/// rendering.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Summarize reports side by side.
pub fn compare(reports: &[RunReport]) -> ComparisonTable {
    let rows = reports
        .iter()
        .map(|r| ComparisonRow {
            method: r.method.clone(),
            steps_or_layers: match (r.config.steps, r.config.layers) {
                (Some(s), _) => format!("{s} steps"),
                (None, Some(p)) => format!("{p} layers"),
                _ => "-".into(),
            },
            two_qubit: r.gates.two_qubit,
            depth: r.gates.depth,
            r_avg: r.primary_ratio(),
        })
        .collect();
    ComparisonTable { rows }
}

impl std::fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{:<22} {:>14} {:>10} {:>8} {:>8}",
            "method", "schedule", "two-qubit", "depth", "r_avg"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<22} {:>14} {:>10} {:>8} {:>8}",
                r.method,
                r.steps_or_layers,
                r.two_qubit,
                r.depth,
                r.r_avg.map_or("-".into(), |v| format!("{v:.4}")),
            )?;
        }
        Ok(())
    }
}
