//! Logical-to-native transpilation for the trapped-ion gate set
//! `{GPi, GPi2, MS}` with a dense unitary-equivalence verifier.
//!
//! Decomposition rows are stored in circuit-time order (leftmost gate acts
//! first). The printed product notation of the source tables is ambiguous
//! about composition order; the orders hard-coded here are the ones the
//! verifier confirms numerically, and the bring-up tests keep checking them
//! at random angles.
//!
//! `R_yy(θ)` is realized on the partially-entangling `MS` gate whose third
//! parameter stays within `[0, π/2]`; four branches partition the
//! normalized angle range `[0, 2π)`:
//!
//! | branch            | native sequence (time order)                        |
//! |-------------------|-----------------------------------------------------|
//! | `θ ∈ [0, π/2]`    | `MS(π/2, π/2, θ)`                                   |
//! | `θ ∈ (π/2, π]`    | `GPi(π/2)⊗GPi(π/2)`, `MS(3π/2, π/2, π-θ)`           |
//! | `θ ∈ (π, 3π/2]`   | `GPi(π/2)⊗GPi(π/2)`, `MS(π/2, π/2, θ-π)`            |
//! | `θ ∈ (3π/2, 2π)`  | `MS(3π/2, π/2, 2π-θ)`                               |

use crate::circuit::{stats, Circuit, CircuitStats, Gate};
use crate::dense::{self, CMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Equivalence tolerance used by the verifier.
pub const EQUIV_TOL: f64 = 1e-10;

/// Slack on the `MS` third-parameter range check.
const MS_THETA_SLACK: f64 = 1e-12;

/// A circuit restricted to the native gate alphabet, with every `MS` third
/// parameter inside the validated `[0, π/2]` range.
#[derive(Debug, Clone, PartialEq)]
pub struct NativeCircuit {
    circuit: Circuit,
}

impl NativeCircuit {
    pub fn new(circuit: Circuit) -> Result<Self> {
        for g in circuit.gates() {
            if !g.is_native() {
                return Err(Error::UnsupportedGate(format!(
                    "{} in a native circuit",
                    g.kind_name()
                )));
            }
            if let Gate::Ms { theta, .. } = g {
                if !(-MS_THETA_SLACK..=PI / 2.0 + MS_THETA_SLACK).contains(theta) {
                    return Err(Error::MalformedGate(format!(
                        "MS theta {theta} outside [0, π/2]"
                    )));
                }
            }
        }
        Ok(Self { circuit })
    }

    pub fn inner(&self) -> &Circuit {
        &self.circuit
    }

    pub fn n(&self) -> usize {
        self.circuit.n()
    }

    pub fn gates(&self) -> &[Gate] {
        self.circuit.gates()
    }

    pub fn stats(&self) -> CircuitStats {
        stats(&self.circuit)
    }

    pub fn to_text(&self) -> String {
        self.circuit.to_text()
    }
}

/// Dense matrix of a native gate, exactly as printed in the hardware
/// reference (2x2 for `GPi`/`GPi2`, 4x4 for `MS`).
pub fn native_matrix(gate: &Gate) -> Result<CMatrix> {
    if !gate.is_native() {
        return Err(Error::UnsupportedGate(format!(
            "{} has no native matrix",
            gate.kind_name()
        )));
    }
    if let Some((_, m)) = gate.one_qubit_matrix() {
        Ok(CMatrix::from_row_slice(2, 2, &m))
    } else {
        let (_, _, m) = gate.two_qubit_matrix().expect("MS is two-qubit");
        Ok(CMatrix::from_row_slice(4, 4, &m))
    }
}

/// Normalize a rotation angle into `[0, 2π)`; a `2π` shift only changes the
/// global phase of `R_P`.
fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Native realization of `R_yy(θ) = exp(-iθ Y_{q0} Y_{q1} / 2)`, in circuit
/// order.
pub fn ryy_native(q0: usize, q1: usize, theta: f64) -> Vec<Gate> {
    let t = normalize_angle(theta);
    let half_pi = PI / 2.0;
    let sandwich = |ms: Gate| {
        vec![
            Gate::Gpi { q: q0, phi: half_pi },
            Gate::Gpi { q: q1, phi: half_pi },
            ms,
        ]
    };
    if t <= half_pi {
        vec![Gate::Ms {
            q0,
            q1,
            phi0: half_pi,
            phi1: half_pi,
            theta: t,
        }]
    } else if t <= PI {
        sandwich(Gate::Ms {
            q0,
            q1,
            phi0: 3.0 * half_pi,
            phi1: half_pi,
            theta: PI - t,
        })
    } else if t <= 3.0 * half_pi {
        sandwich(Gate::Ms {
            q0,
            q1,
            phi0: half_pi,
            phi1: half_pi,
            theta: t - PI,
        })
    } else {
        vec![Gate::Ms {
            q0,
            q1,
            phi0: 3.0 * half_pi,
            phi1: half_pi,
            theta: 2.0 * PI - t,
        }]
    }
}

/// Rewrite one logical gate into its native sequence (circuit order).
///
/// Supported: `H`, `RZ`, `RY`, `RZZ`, `RZY`, `RYZ`; native gates pass
/// through unchanged. `RX` has no hardware row and is rejected.
pub fn transpile_gate(gate: &Gate) -> Result<Vec<Gate>> {
    let half_pi = PI / 2.0;
    Ok(match *gate {
        Gate::H { q } => vec![
            Gate::Gpi2 { q, phi: half_pi },
            Gate::Gpi { q, phi: 0.0 },
        ],
        Gate::Rz { q, angle } => {
            let t = normalize_angle(angle);
            vec![Gate::Gpi { q, phi: 0.0 }, Gate::Gpi { q, phi: t / 2.0 }]
        }
        Gate::Ry { q, angle } => {
            let t = normalize_angle(angle);
            vec![
                Gate::Gpi2 { q, phi: PI },
                Gate::Gpi { q, phi: t / 2.0 },
                Gate::Gpi2 { q, phi: PI },
            ]
        }
        Gate::Rzz { q0, q1, angle } => {
            // Conjugate both qubits from the Y to the Z axis around R_yy.
            let mut seq = vec![
                Gate::Gpi2 { q: q0, phi: PI },
                Gate::Gpi2 { q: q1, phi: PI },
            ];
            seq.extend(ryy_native(q0, q1, angle));
            seq.push(Gate::Gpi2 { q: q0, phi: 0.0 });
            seq.push(Gate::Gpi2 { q: q1, phi: 0.0 });
            seq
        }
        Gate::Rzy { q0, q1, angle } => {
            // Z acts on q0: conjugate only that qubit.
            let mut seq = vec![Gate::Gpi2 { q: q0, phi: PI }];
            seq.extend(ryy_native(q0, q1, angle));
            seq.push(Gate::Gpi2 { q: q0, phi: 0.0 });
            seq
        }
        Gate::Ryz { q0, q1, angle } => {
            let mut seq = vec![Gate::Gpi2 { q: q1, phi: PI }];
            seq.extend(ryy_native(q0, q1, angle));
            seq.push(Gate::Gpi2 { q: q1, phi: 0.0 });
            seq
        }
        Gate::Gpi { .. } | Gate::Gpi2 { .. } | Gate::Ms { .. } => vec![gate.clone()],
        Gate::Rx { .. } => {
            return Err(Error::UnsupportedGate("RX".into()));
        }
    })
}

/// Gate-by-gate rewrite of a whole circuit, preserving order.
pub fn transpile_circuit(circuit: &Circuit) -> Result<NativeCircuit> {
    let mut gates = Vec::with_capacity(circuit.len() * 3);
    for g in circuit.gates() {
        gates.extend(transpile_gate(g)?);
    }
    let mut metadata = circuit.metadata.clone();
    metadata.builder = format!("{}+native", metadata.builder);
    NativeCircuit::new(Circuit::new(circuit.n(), gates, metadata)?)
}

/// Verdict of a unitary-equivalence check.
#[derive(Debug, Clone, Copy)]
pub struct Equivalence {
    pub equal_up_to_phase: bool,
    /// Max-abs entry deviation after optimal global-phase alignment.
    pub deviation: f64,
    /// `|Tr(U_a† U_b)| / 2^n`; equals 1 iff the circuits match up to phase.
    pub trace_overlap: f64,
}

/// Dense check that two circuits implement the same unitary up to a global
/// phase. Intended for small registers (the transpilation oracle uses
/// `n <= 3`; anything up to the dense bound works).
pub fn verify_equivalence(a: &Circuit, b: &Circuit) -> Result<Equivalence> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let n = a.n();
    if n > MAX_VERIFY_QUBITS {
        return Err(Error::TooLarge {
            what: "unitary equivalence check",
            n,
            max: MAX_VERIFY_QUBITS,
        });
    }
    let ua = dense::circuit_unitary(a, n)?;
    let ub = dense::circuit_unitary(b, n)?;
    let dim = 1usize << n;
    let prod = ua.adjoint() * &ub;
    let mut tr = Complex64::new(0.0, 0.0);
    for k in 0..dim {
        tr += prod[(k, k)];
    }
    let trace_overlap = tr.norm() / dim as f64;
    let phase = if tr.norm() > 1e-300 {
        tr / tr.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut deviation = 0.0f64;
    for (x, y) in ua.iter().zip(ub.iter()) {
        deviation = deviation.max((x - y * phase.conj()).norm());
    }
    Ok(Equivalence {
        equal_up_to_phase: deviation <= EQUIV_TOL,
        deviation,
        trace_overlap,
    })
}

/// Register bound for [`verify_equivalence`].
pub const MAX_VERIFY_QUBITS: usize = 6;
