//! Gate-level circuit representation and the circuit/ansatz builders.
//!
//! Angle convention, used everywhere in this crate: for a Pauli string `P`,
//! `R_P(θ) = exp(-i θ P / 2)`. A Trotter step of duration `dt` for a
//! Hamiltonian term `c·P` therefore contributes `R_P(2 dt c)`.
//!
//! Two-qubit kinds name their Pauli factors in qubit-argument order:
//! `Rzy(q0, q1, θ) = exp(-i θ Z_{q0} Y_{q1} / 2)` and likewise `Ryz`. Gate
//! matrices are written in the basis `|b_{q0} b_{q1}>` with the first qubit
//! argument as the most significant of the two bits.
//!
//! Builders evaluate the schedule at the right endpoint of each step,
//! `t_m = m·dt` for `m = 1..=N` (midpoint evaluation would be an equally
//! valid first-order choice). Within a step, field terms come before
//! coupling terms, and each coupling emits `Rzy` before `Ryz`.

use crate::error::{Error, Result};
use crate::ising::SpinGlass;
use crate::schedule::{self, CdProfile, Schedule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A single gate. One- and two-qubit rotations plus the trapped-ion native
/// alphabet (`Gpi`, `Gpi2`, `Ms`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H { q: usize },
    Rx { q: usize, angle: f64 },
    Ry { q: usize, angle: f64 },
    Rz { q: usize, angle: f64 },
    Rzz { q0: usize, q1: usize, angle: f64 },
    Rzy { q0: usize, q1: usize, angle: f64 },
    Ryz { q0: usize, q1: usize, angle: f64 },
    Gpi { q: usize, phi: f64 },
    Gpi2 { q: usize, phi: f64 },
    Ms { q0: usize, q1: usize, phi0: f64, phi1: f64, theta: f64 },
}

impl Gate {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::H { .. } => "H",
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::Rzz { .. } => "RZZ",
            Gate::Rzy { .. } => "RZY",
            Gate::Ryz { .. } => "RYZ",
            Gate::Gpi { .. } => "GPI",
            Gate::Gpi2 { .. } => "GPI2",
            Gate::Ms { .. } => "MS",
        }
    }

    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H { q }
            | Gate::Rx { q, .. }
            | Gate::Ry { q, .. }
            | Gate::Rz { q, .. }
            | Gate::Gpi { q, .. }
            | Gate::Gpi2 { q, .. } => (q, None),
            Gate::Rzz { q0, q1, .. }
            | Gate::Rzy { q0, q1, .. }
            | Gate::Ryz { q0, q1, .. }
            | Gate::Ms { q0, q1, .. } => (q0, Some(q1)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().1.is_some()
    }

    pub fn is_native(&self) -> bool {
        matches!(self, Gate::Gpi { .. } | Gate::Gpi2 { .. } | Gate::Ms { .. })
    }

    /// The rotation angle subject to small-angle pruning, if this gate has
    /// one. Preparation (`H`) and native gates are exempt.
    pub fn prunable_angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. }
            | Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::Rzz { angle, .. }
            | Gate::Rzy { angle, .. }
            | Gate::Ryz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// Copy of this gate with its rotation angle replaced (no-op for gates
    /// without a rotation angle).
    pub fn with_angle(&self, a: f64) -> Gate {
        let mut g = self.clone();
        match &mut g {
            Gate::Rx { angle, .. }
            | Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::Rzz { angle, .. }
            | Gate::Rzy { angle, .. }
            | Gate::Ryz { angle, .. } => *angle = a,
            _ => {}
        }
        g
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (a, b) = self.qubits();
        if a >= n || b.is_some_and(|b| b >= n) {
            return Err(Error::MalformedGate(format!(
                "{} on ({a}, {b:?}) out of range for n = {n}",
                self.kind_name()
            )));
        }
        if b == Some(a) {
            return Err(Error::MalformedGate(format!(
                "{} with repeated qubit {a}",
                self.kind_name()
            )));
        }
        let finite = match *self {
            Gate::H { .. } => true,
            Gate::Rx { angle, .. }
            | Gate::Ry { angle, .. }
            | Gate::Rz { angle, .. }
            | Gate::Rzz { angle, .. }
            | Gate::Rzy { angle, .. }
            | Gate::Ryz { angle, .. } => angle.is_finite(),
            Gate::Gpi { phi, .. } | Gate::Gpi2 { phi, .. } => phi.is_finite(),
            Gate::Ms {
                phi0, phi1, theta, ..
            } => phi0.is_finite() && phi1.is_finite() && theta.is_finite(),
        };
        if !finite {
            return Err(Error::MalformedGate(format!(
                "{} with non-finite angle",
                self.kind_name()
            )));
        }
        Ok(())
    }

    /// Row-major 2x2 matrix for one-qubit gates.
    pub fn one_qubit_matrix(&self) -> Option<(usize, [Complex64; 4])> {
        let c = Complex64::new;
        let i = Complex64::new(0.0, 1.0);
        match *self {
            Gate::H { q } => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                Some((q, [c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)]))
            }
            Gate::Rx { q, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                Some((q, [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]))
            }
            Gate::Ry { q, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                Some((q, [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]))
            }
            Gate::Rz { q, angle } => {
                let p = Complex64::from_polar(1.0, -angle / 2.0);
                Some((q, [p, c(0.0, 0.0), c(0.0, 0.0), p.conj()]))
            }
            Gate::Gpi { q, phi } => Some((
                q,
                [
                    c(0.0, 0.0),
                    Complex64::from_polar(1.0, -phi),
                    Complex64::from_polar(1.0, phi),
                    c(0.0, 0.0),
                ],
            )),
            Gate::Gpi2 { q, phi } => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                Some((
                    q,
                    [
                        c(r, 0.0),
                        -i * Complex64::from_polar(1.0, -phi) * r,
                        -i * Complex64::from_polar(1.0, phi) * r,
                        c(r, 0.0),
                    ],
                ))
            }
            _ => None,
        }
    }

    /// Row-major 4x4 matrix for two-qubit gates, basis `|b_{q0} b_{q1}>`.
    pub fn two_qubit_matrix(&self) -> Option<(usize, usize, [Complex64; 16])> {
        let c = Complex64::new;
        let zero = c(0.0, 0.0);
        match *self {
            Gate::Rzz { q0, q1, angle } => {
                let p = Complex64::from_polar(1.0, -angle / 2.0);
                let q = p.conj();
                let mut m = [zero; 16];
                m[0] = p;
                m[5] = q;
                m[10] = q;
                m[15] = p;
                Some((q0, q1, m))
            }
            Gate::Rzy { q0, q1, angle } => {
                // Z on q0, Y on q1: RY(±angle) on q1 conditioned on b_{q0}.
                let (s, co) = (angle / 2.0).sin_cos();
                let mut m = [zero; 16];
                m[0] = c(co, 0.0);
                m[1] = c(-s, 0.0);
                m[4] = c(s, 0.0);
                m[5] = c(co, 0.0);
                m[10] = c(co, 0.0);
                m[11] = c(s, 0.0);
                m[14] = c(-s, 0.0);
                m[15] = c(co, 0.0);
                Some((q0, q1, m))
            }
            Gate::Ryz { q0, q1, angle } => {
                // Y on q0, Z on q1: RY(±angle) on q0 conditioned on b_{q1}.
                let (s, co) = (angle / 2.0).sin_cos();
                let mut m = [zero; 16];
                m[0] = c(co, 0.0);
                m[2] = c(-s, 0.0);
                m[8] = c(s, 0.0);
                m[10] = c(co, 0.0);
                m[5] = c(co, 0.0);
                m[7] = c(s, 0.0);
                m[13] = c(-s, 0.0);
                m[15] = c(co, 0.0);
                Some((q0, q1, m))
            }
            Gate::Ms {
                q0,
                q1,
                phi0,
                phi1,
                theta,
            } => {
                let (s, co) = (theta / 2.0).sin_cos();
                let i = Complex64::new(0.0, 1.0);
                let e = |x: f64| Complex64::from_polar(1.0, x);
                let mut m = [zero; 16];
                m[0] = c(co, 0.0);
                m[5] = c(co, 0.0);
                m[10] = c(co, 0.0);
                m[15] = c(co, 0.0);
                m[3] = -i * e(-(phi0 + phi1)) * s;
                m[6] = -i * e(-(phi0 - phi1)) * s;
                m[9] = -i * e(phi0 - phi1) * s;
                m[12] = -i * e(phi0 + phi1) * s;
                Some((q0, q1, m))
            }
            _ => None,
        }
    }
}

/// Builder provenance and schedule parameters carried with a circuit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub builder: String,
    pub total_time: Option<f64>,
    pub dt: Option<f64>,
    pub cutoff: Option<f64>,
    /// Gates removed by small-angle pruning.
    pub pruned_gates: usize,
    /// Step indices the CD-only builder was asked to apply.
    pub selected_steps: Option<Vec<usize>>,
    /// Selected steps that still contribute at least one gate after the
    /// cutoff (CD-only builder).
    pub surviving_steps: Option<Vec<usize>>,
}

/// An ordered gate list over `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    pub metadata: CircuitMeta,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, metadata: CircuitMeta) -> Result<Self> {
        for g in &gates {
            g.validate(n)?;
        }
        Ok(Self { n, gates, metadata })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Line-oriented text form: `QUBITS n` then one `KIND q0 [q1] angles...`
    /// line per gate. Floating-point fields round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.n);
        for g in &self.gates {
            match *g {
                Gate::H { q } => out.push_str(&format!("H {q}\n")),
                Gate::Rx { q, angle } => out.push_str(&format!("RX {q} {angle}\n")),
                Gate::Ry { q, angle } => out.push_str(&format!("RY {q} {angle}\n")),
                Gate::Rz { q, angle } => out.push_str(&format!("RZ {q} {angle}\n")),
                Gate::Rzz { q0, q1, angle } => out.push_str(&format!("RZZ {q0} {q1} {angle}\n")),
                Gate::Rzy { q0, q1, angle } => out.push_str(&format!("RZY {q0} {q1} {angle}\n")),
                Gate::Ryz { q0, q1, angle } => out.push_str(&format!("RYZ {q0} {q1} {angle}\n")),
                Gate::Gpi { q, phi } => out.push_str(&format!("GPI {q} {phi}\n")),
                Gate::Gpi2 { q, phi } => out.push_str(&format!("GPI2 {q} {phi}\n")),
                Gate::Ms {
                    q0,
                    q1,
                    phi0,
                    phi1,
                    theta,
                } => out.push_str(&format!("MS {q0} {q1} {phi0} {phi1} {theta}\n")),
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut gates = Vec::new();
        let mut max_qubit = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            let usize_at = |k: usize| -> Result<usize> {
                rest.get(k)
                    .ok_or_else(|| bad("missing field"))?
                    .parse()
                    .map_err(|_| bad("bad qubit index"))
            };
            let f64_at = |k: usize| -> Result<f64> {
                rest.get(k)
                    .ok_or_else(|| bad("missing field"))?
                    .parse()
                    .map_err(|_| bad("bad angle"))
            };
            let gate = match kind {
                "QUBITS" => {
                    n = Some(usize_at(0)?);
                    continue;
                }
                "H" => Gate::H { q: usize_at(0)? },
                "RX" => Gate::Rx { q: usize_at(0)?, angle: f64_at(1)? },
                "RY" => Gate::Ry { q: usize_at(0)?, angle: f64_at(1)? },
                "RZ" => Gate::Rz { q: usize_at(0)?, angle: f64_at(1)? },
                "RZZ" => Gate::Rzz { q0: usize_at(0)?, q1: usize_at(1)?, angle: f64_at(2)? },
                "RZY" => Gate::Rzy { q0: usize_at(0)?, q1: usize_at(1)?, angle: f64_at(2)? },
                "RYZ" => Gate::Ryz { q0: usize_at(0)?, q1: usize_at(1)?, angle: f64_at(2)? },
                "GPI" => Gate::Gpi { q: usize_at(0)?, phi: f64_at(1)? },
                "GPI2" => Gate::Gpi2 { q: usize_at(0)?, phi: f64_at(1)? },
                "MS" => Gate::Ms {
                    q0: usize_at(0)?,
                    q1: usize_at(1)?,
                    phi0: f64_at(2)?,
                    phi1: f64_at(3)?,
                    theta: f64_at(4)?,
                },
                other => return Err(bad(&format!("unknown gate `{other}`"))),
            };
            let (a, b) = gate.qubits();
            max_qubit = max_qubit.max(a).max(b.unwrap_or(0));
            gates.push(gate);
        }
        let n = n.unwrap_or(max_qubit + 1);
        Circuit::new(n, gates, CircuitMeta::default())
    }
}

/// Gate counts and greedy-layered depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

/// Count gates and compute depth as the longest chain of gates sharing
/// qubits (greedy layering).
pub fn stats(circuit: &Circuit) -> CircuitStats {
    let mut one = 0;
    let mut two = 0;
    let mut frontier = vec![0usize; circuit.n()];
    let mut depth = 0;
    for g in circuit.gates() {
        let (a, b) = g.qubits();
        let layer = match b {
            None => {
                one += 1;
                frontier[a] + 1
            }
            Some(b) => {
                two += 1;
                frontier[a].max(frontier[b]) + 1
            }
        };
        frontier[a] = layer;
        if let Some(b) = b {
            frontier[b] = layer;
        }
        depth = depth.max(layer);
    }
    CircuitStats {
        one_qubit: one,
        two_qubit: two,
        depth,
    }
}

/// Remove every rotation gate with `|angle| < threshold`. `H` and native
/// gates are exempt. Survivor order is preserved; the removed count is
/// recorded in the metadata.
pub fn prune_small_angles(circuit: &Circuit, threshold: f64) -> Circuit {
    let mut kept = Vec::with_capacity(circuit.len());
    let mut removed = 0;
    for g in circuit.gates() {
        match g.prunable_angle() {
            Some(a) if a.abs() < threshold => removed += 1,
            _ => kept.push(g.clone()),
        }
    }
    let mut metadata = circuit.metadata.clone();
    metadata.cutoff = Some(threshold);
    metadata.pruned_gates += removed;
    Circuit {
        n: circuit.n(),
        gates: kept,
        metadata,
    }
}

fn prep_gates(n: usize) -> Vec<Gate> {
    (0..n).map(|q| Gate::H { q }).collect()
}

fn adiabatic_step_gates(sg: &SpinGlass, dt: f64, lam: f64, gates: &mut Vec<Gate>) {
    let n = sg.n();
    for q in 0..n {
        gates.push(Gate::Rx {
            q,
            angle: -2.0 * dt * (1.0 - lam),
        });
    }
    for q in 0..n {
        gates.push(Gate::Rz {
            q,
            angle: 2.0 * dt * lam * sg.fields()[q],
        });
    }
    for (i, j, v) in sg.pairs() {
        gates.push(Gate::Rzz {
            q0: i,
            q1: j,
            angle: 2.0 * dt * lam * v,
        });
    }
}

fn cd_step_gates(sg: &SpinGlass, dt: f64, g_coeff: f64, gates: &mut Vec<Gate>) {
    let n = sg.n();
    for q in 0..n {
        gates.push(Gate::Ry {
            q,
            angle: 2.0 * dt * g_coeff * sg.fields()[q],
        });
    }
    for (i, j, v) in sg.pairs() {
        let angle = 2.0 * dt * g_coeff * v;
        gates.push(Gate::Rzy { q0: i, q1: j, angle });
        gates.push(Gate::Ryz { q0: i, q1: j, angle });
    }
}

/// First-order Trotterization of the bare adiabatic Hamiltonian
/// `(1-λ) H_i + λ H_f`, prefixed by `|+>^n` preparation.
pub fn build_digitized_adiabatic(sg: &SpinGlass, sched: &Schedule) -> Circuit {
    let mut gates = prep_gates(sg.n());
    let dt = sched.dt();
    for t in sched.step_times() {
        let lam = schedule::lambda(t, sched.total_time()).expect("step time in range");
        adiabatic_step_gates(sg, dt, lam, &mut gates);
    }
    Circuit {
        n: sg.n(),
        gates,
        metadata: CircuitMeta {
            builder: "digitized-adiabatic".into(),
            total_time: Some(sched.total_time()),
            dt: Some(dt),
            ..Default::default()
        },
    }
}

/// Trotterization of the CD-assisted Hamiltonian: per step, the adiabatic
/// gates followed by the counterdiabatic block with coefficient
/// `g_m = -2 λ̇(t_m) α₁(λ(t_m))`.
pub fn build_cd_assisted(sg: &SpinGlass, sched: &Schedule) -> Result<Circuit> {
    let mut gates = prep_gates(sg.n());
    let dt = sched.dt();
    let total = sched.total_time();
    for t in sched.step_times() {
        let lam = schedule::lambda(t, total)?;
        adiabatic_step_gates(sg, dt, lam, &mut gates);
        let g = schedule::cd_term_coefficient(sg, t, total)?;
        cd_step_gates(sg, dt, g, &mut gates);
    }
    Ok(Circuit {
        n: sg.n(),
        gates,
        metadata: CircuitMeta {
            builder: "cd-assisted".into(),
            total_time: Some(total),
            dt: Some(dt),
            ..Default::default()
        },
    })
}

/// Impulse-regime circuit: only the CD block, only at `selected` step
/// indices (0-based, step `i` acting at `t = (i+1)·dt`), followed by
/// small-angle pruning at `cutoff`.
pub fn build_cd_only(
    sg: &SpinGlass,
    sched: &Schedule,
    selected: &[usize],
    cutoff: f64,
) -> Result<Circuit> {
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut sorted: Vec<usize> = selected.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.last().is_some_and(|&m| m >= sched.steps()) {
        return Err(Error::InvalidSchedule(format!(
            "selected step out of range (N = {})",
            sched.steps()
        )));
    }
    let mut gates = prep_gates(sg.n());
    let dt = sched.dt();
    let total = sched.total_time();
    // Largest |coefficient| over all CD terms: a step survives the cutoff
    // iff its biggest gate angle 2·dt·|g|·max_coeff does.
    let max_coeff = sg
        .fields()
        .iter()
        .map(|h| h.abs())
        .chain(sg.pairs().map(|(_, _, v)| v.abs()))
        .fold(0.0f64, f64::max);
    let mut surviving = Vec::new();
    for &i in &sorted {
        let t = sched.step_time(i);
        let g = schedule::cd_term_coefficient(sg, t, total)?;
        if (2.0 * dt * g * max_coeff).abs() >= cutoff {
            surviving.push(i);
        }
        cd_step_gates(sg, dt, g, &mut gates);
    }
    let circuit = Circuit {
        n: sg.n(),
        gates,
        metadata: CircuitMeta {
            builder: "cd-only".into(),
            total_time: Some(total),
            dt: Some(dt),
            selected_steps: Some(sorted),
            surviving_steps: Some(surviving),
            ..Default::default()
        },
    };
    Ok(prune_small_angles(&circuit, cutoff))
}

/// Angle of an ansatz gate: fixed, or `coeff * params[param]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AngleExpr {
    Fixed(f64),
    Scaled { param: usize, coeff: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzGate {
    pub gate: Gate,
    pub angle: AngleExpr,
}

/// A circuit template whose rotation angles are affine in a parameter
/// vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    n: usize,
    name: String,
    gates: Vec<AnsatzGate>,
    num_params: usize,
}

impl Ansatz {
    fn new(n: usize, name: &str, gates: Vec<AnsatzGate>, num_params: usize) -> Result<Self> {
        let mut referenced = vec![false; num_params];
        for g in &gates {
            if let AngleExpr::Scaled { param, .. } = g.angle {
                if param >= num_params {
                    return Err(Error::InvalidProblem(format!(
                        "ansatz references parameter {param} of {num_params}"
                    )));
                }
                referenced[param] = true;
            }
        }
        if let Some(unused) = referenced.iter().position(|r| !r) {
            return Err(Error::InvalidProblem(format!(
                "ansatz parameter {unused} is not referenced by any gate"
            )));
        }
        Ok(Self {
            n,
            name: name.into(),
            gates,
            num_params,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[AnsatzGate] {
        &self.gates
    }

    /// Instantiate the template at a parameter vector.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.num_params {
            return Err(Error::LengthMismatch {
                expected: self.num_params,
                got: params.len(),
            });
        }
        let gates = self
            .gates
            .iter()
            .map(|ag| match ag.angle {
                AngleExpr::Fixed(v) => ag.gate.with_angle(v),
                AngleExpr::Scaled { param, coeff } => ag.gate.with_angle(coeff * params[param]),
            })
            .collect();
        Circuit::new(
            self.n,
            gates,
            CircuitMeta {
                builder: self.name.clone(),
                ..Default::default()
            },
        )
    }
}

fn fixed(gate: Gate) -> AnsatzGate {
    AnsatzGate {
        gate,
        angle: AngleExpr::Fixed(0.0),
    }
}

fn scaled(gate: Gate, param: usize, coeff: f64) -> AnsatzGate {
    AnsatzGate {
        gate,
        angle: AngleExpr::Scaled { param, coeff },
    }
}

fn prep_ansatz_gates(n: usize) -> Vec<AnsatzGate> {
    (0..n).map(|q| fixed(Gate::H { q })).collect()
}

/// QAOA ansatz with `p` layers and `2p` parameters laid out as
/// `[γ_1, β_1, γ_2, β_2, ...]`. Layer `l`: `Rz(2 γ_l h_i)`,
/// `Rzz(2 γ_l J_ij)`, then `Rx(-2 β_l)` on every qubit.
pub fn build_qaoa_ansatz(sg: &SpinGlass, p: usize) -> Result<Ansatz> {
    if p == 0 {
        return Err(Error::InvalidProblem("p must be >= 1".into()));
    }
    let n = sg.n();
    let mut gates = prep_ansatz_gates(n);
    for l in 0..p {
        let gamma = 2 * l;
        let beta = 2 * l + 1;
        for q in 0..n {
            gates.push(scaled(Gate::Rz { q, angle: 0.0 }, gamma, 2.0 * sg.fields()[q]));
        }
        for (i, j, v) in sg.pairs() {
            gates.push(scaled(Gate::Rzz { q0: i, q1: j, angle: 0.0 }, gamma, 2.0 * v));
        }
        for q in 0..n {
            gates.push(scaled(Gate::Rx { q, angle: 0.0 }, beta, -2.0));
        }
    }
    Ansatz::new(n, "qaoa", gates, 2 * p)
}

/// DC-QAOA ansatz: QAOA layers extended by a counterdiabatic block, `3p`
/// parameters laid out as `[γ_1, β_1, α_1, ...]`. The CD block applies
/// `Ry(2 α_l h_i)` and `Rzy/Ryz(2 α_l J_ij)`.
pub fn build_dcqaoa_ansatz(sg: &SpinGlass, p: usize) -> Result<Ansatz> {
    if p == 0 {
        return Err(Error::InvalidProblem("p must be >= 1".into()));
    }
    let n = sg.n();
    let mut gates = prep_ansatz_gates(n);
    for l in 0..p {
        let gamma = 3 * l;
        let beta = 3 * l + 1;
        let alpha = 3 * l + 2;
        for q in 0..n {
            gates.push(scaled(Gate::Rz { q, angle: 0.0 }, gamma, 2.0 * sg.fields()[q]));
        }
        for (i, j, v) in sg.pairs() {
            gates.push(scaled(Gate::Rzz { q0: i, q1: j, angle: 0.0 }, gamma, 2.0 * v));
        }
        for q in 0..n {
            gates.push(scaled(Gate::Rx { q, angle: 0.0 }, beta, -2.0));
        }
        for q in 0..n {
            gates.push(scaled(Gate::Ry { q, angle: 0.0 }, alpha, 2.0 * sg.fields()[q]));
        }
        for (i, j, v) in sg.pairs() {
            gates.push(scaled(Gate::Rzy { q0: i, q1: j, angle: 0.0 }, alpha, 2.0 * v));
            gates.push(scaled(Gate::Ryz { q0: i, q1: j, angle: 0.0 }, alpha, 2.0 * v));
        }
    }
    Ansatz::new(n, "dc-qaoa", gates, 3 * p)
}

/// h-DCQO ansatz plus its impulse initialization.
#[derive(Debug, Clone)]
pub struct HdcqoAnsatz {
    pub ansatz: Ansatz,
    /// `[a_1, b_1, ...]`: at these values the bound circuit reproduces the
    /// CD-only angles of the selected steps exactly.
    pub initial_params: Vec<f64>,
    /// The `p` most dominant step indices, in time order.
    pub steps: Vec<usize>,
}

/// Build the h-DCQO ansatz: `p` layers mapped to the `p` most dominant
/// impulse steps, two parameters per layer (`a_l` scales single-qubit CD
/// rotations by `h_i`, `b_l` scales two-qubit ones by `J_ij`).
pub fn build_hdcqo_ansatz(sg: &SpinGlass, sched: &Schedule, p: usize) -> Result<HdcqoAnsatz> {
    if p == 0 || p > sched.steps() {
        return Err(Error::InvalidProblem(format!(
            "p = {p} outside 1..={}",
            sched.steps()
        )));
    }
    let profile = CdProfile::build(sg, sched)?;
    let steps = schedule::select_impulse_steps(&profile, schedule::StepSelection::KeepTop(p))?;

    let n = sg.n();
    let mut gates = prep_ansatz_gates(n);
    let mut initial = Vec::with_capacity(2 * p);
    for (l, &step) in steps.iter().enumerate() {
        let a = 2 * l;
        let b = 2 * l + 1;
        for q in 0..n {
            gates.push(scaled(Gate::Ry { q, angle: 0.0 }, a, sg.fields()[q]));
        }
        for (i, j, v) in sg.pairs() {
            gates.push(scaled(Gate::Rzy { q0: i, q1: j, angle: 0.0 }, b, v));
            gates.push(scaled(Gate::Ryz { q0: i, q1: j, angle: 0.0 }, b, v));
        }
        let g = -2.0 * profile.lambda_dots[step] * profile.alphas[step];
        let init = 2.0 * sched.dt() * g;
        initial.push(init);
        initial.push(init);
    }
    Ok(HdcqoAnsatz {
        ansatz: Ansatz::new(n, "h-dcqo", gates, 2 * p)?,
        initial_params: initial,
        steps,
    })
}
