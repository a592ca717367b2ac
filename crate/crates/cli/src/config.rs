//! Experiment configuration: JSON file schema plus flag overrides.
//!
//! Defaults follow the reference setup: θ = (1, 0.5, 2), B = n/2, T = 0.7,
//! dt = 0.1, gate cutoff 0.1, 5000 shots, 200 optimizer iterations.

use dcqo_core::ising::{PortfolioProblem, SpinGlass};
use dcqo_core::marketdata::{estimate_model, load_prices};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_THETA: (f64, f64, f64) = (1.0, 0.5, 2.0);
pub const DEFAULT_TOTAL_TIME: f64 = 0.7;
pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_CUTOFF: f64 = 0.1;
pub const DEFAULT_SHOTS: u32 = 5000;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_LAYERS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Digitized adiabatic evolution (no CD term).
    Adiabatic,
    /// Adiabatic evolution plus the first-order CD term.
    Cd,
    /// Impulse regime: CD term only, with step selection and gate cutoff.
    CdOnly,
    /// Variational QAOA.
    Qaoa,
    /// QAOA with an appended CD block per layer.
    Dcqaoa,
    /// Variational ansatz built from the CD term alone, impulse-initialized.
    Hdcqo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Adiabatic => "adiabatic",
            Method::Cd => "cd",
            Method::CdOnly => "cd-only",
            Method::Qaoa => "qaoa",
            Method::Dcqaoa => "dc-qaoa",
            Method::Hdcqo => "h-dcqo",
        }
    }

}

/// Problem source: exactly one of the three.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSource {
    /// Price CSV path (portfolio pipeline).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Lagrange multipliers for the portfolio objective.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<(f64, f64, f64)>,
    /// Budget (asset count); defaults to n/2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Random spin-glass size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_n: Option<usize>,
    /// Random spin-glass seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
    /// Spin-glass JSON document path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_glass: Option<PathBuf>,
}

/// Full experiment description (the `solve` subcommand's input).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub method: Option<Method>,
    pub total_time: Option<f64>,
    pub dt: Option<f64>,
    pub layers: Option<usize>,
    pub cutoff: Option<f64>,
    /// Keep only the `k` most CD-dominant steps (CD-only).
    pub keep_steps: Option<usize>,
    /// Keep steps with weight >= fraction of the maximum (CD-only).
    pub weight_fraction: Option<f64>,
    pub shots: Option<u32>,
    pub sample_seed: Option<u64>,
    pub init_seed: Option<u64>,
    pub max_iter: Option<usize>,
    /// Independent optimizer starts (variational methods); best kept.
    pub restarts: Option<usize>,
    /// Report E_avg over the Hamming-weight-B feasible set instead of 0.
    pub feasible_avg: Option<bool>,
    pub emit_native: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| {
            format!(
                "config {}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            )
        })
    }

    /// Layer `other`'s set fields over this config (flags override file).
    pub fn overlay(&mut self, other: &ExperimentConfig) {
        let o = other.clone();
        if o.problem.csv.is_some() {
            self.problem.csv = o.problem.csv;
        }
        if o.problem.theta.is_some() {
            self.problem.theta = o.problem.theta;
        }
        if o.problem.budget.is_some() {
            self.problem.budget = o.problem.budget;
        }
        if o.problem.random_n.is_some() {
            self.problem.random_n = o.problem.random_n;
        }
        if o.problem.instance_seed.is_some() {
            self.problem.instance_seed = o.problem.instance_seed;
        }
        if o.problem.spin_glass.is_some() {
            self.problem.spin_glass = o.problem.spin_glass;
        }
        macro_rules! lay {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f; } )* };
        }
        lay!(
            method,
            total_time,
            dt,
            layers,
            cutoff,
            keep_steps,
            weight_fraction,
            shots,
            sample_seed,
            init_seed,
            max_iter,
            restarts,
            feasible_avg,
            emit_native,
            out_dir,
            prefix
        );
    }
}

/// A fully-resolved problem instance.
pub struct LoadedProblem {
    pub spin_glass: SpinGlass,
    /// Present when the instance came from a price CSV.
    pub portfolio: Option<PortfolioProblem>,
    pub source_label: String,
}

/// Resolve the problem source into a spin glass, validating the encoding
/// for portfolio sources by spot-checking the objective identity on 1000
/// random bitstrings.
pub fn load_problem(src: &ProblemSource) -> Result<LoadedProblem, String> {
    let picked = [
        src.csv.is_some(),
        src.random_n.is_some(),
        src.spin_glass.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if picked != 1 {
        return Err(
            "problem: specify exactly one of --csv, --random-n, --spin-glass".into(),
        );
    }

    if let Some(csv) = &src.csv {
        let table = load_prices(csv).map_err(|e| format!("problem.csv: {e}"))?;
        let (e, c) = estimate_model(&table).map_err(|e| format!("problem.csv: {e}"))?;
        let n = table.num_assets();
        let theta = src.theta.unwrap_or(DEFAULT_THETA);
        let budget = src.budget.unwrap_or(n / 2);
        let p = PortfolioProblem::new(e, c, budget, theta.0, theta.1, theta.2)
            .map_err(|e| format!("problem: {e}"))?;
        let sg = p.to_spin_glass();
        spot_check_encoding(&p, &sg, 1000)?;
        Ok(LoadedProblem {
            spin_glass: sg,
            portfolio: Some(p),
            source_label: format!("csv:{}", csv.display()),
        })
    } else if let Some(n) = src.random_n {
        let seed = src.instance_seed.unwrap_or(0);
        let sg = dcqo_core::ising::random_spin_glass(n, seed)
            .map_err(|e| format!("problem.random_n: {e}"))?;
        Ok(LoadedProblem {
            spin_glass: sg,
            portfolio: None,
            source_label: format!("random:n={n},seed={seed}"),
        })
    } else {
        let path = src.spin_glass.as_ref().unwrap();
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("problem.spin_glass: cannot read {}: {e}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("problem.spin_glass: line {}: {e}", e.line()))?;
        let sg = SpinGlass::from_json(&value).map_err(|e| format!("problem.spin_glass: {e}"))?;
        Ok(LoadedProblem {
            spin_glass: sg,
            portfolio: None,
            source_label: format!("file:{}", path.display()),
        })
    }
}

/// `C(x) = energy(x) + offset` on random bitstrings; aborts on any mismatch.
pub fn spot_check_encoding(
    p: &PortfolioProblem,
    sg: &SpinGlass,
    trials: u32,
) -> Result<(), String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mask = if p.n() == 64 {
        u64::MAX
    } else {
        (1u64 << p.n()) - 1
    };
    let scale = sg.energy_scale().max(1.0);
    for _ in 0..trials {
        let bits: u64 = rng.gen::<u64>() & mask;
        let cost = p.cost(bits);
        let via_ising = sg.energy_bits(bits) + sg.offset();
        if (cost - via_ising).abs() > 1e-9 * scale {
            return Err(format!(
                "encoding identity violated at bits {bits:#x}: objective {cost} vs ising {via_ising}"
            ));
        }
    }
    Ok(())
}
