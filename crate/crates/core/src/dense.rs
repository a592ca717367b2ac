//! Dense matrix construction for small registers.
//!
//! These builders work from first principles (explicit matrix elements of
//! Pauli strings and gate definitions) and deliberately avoid the strided
//! statevector kernels, so they can serve as independent oracles for the
//! simulator and the transpiler.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::ising::SpinGlass;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest register for which dense construction is allowed.
pub const MAX_DENSE_QUBITS: usize = 10;

pub type CMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

fn check_dense(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            what: "dense matrix construction",
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Dense matrix of a Pauli string given as `(qubit, operator)` factors;
/// unlisted qubits carry the identity. Qubit 0 is the least significant bit
/// of the basis index.
pub fn pauli_string(n: usize, factors: &[(usize, Pauli)]) -> Result<CMatrix> {
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = col;
        let mut amp = Complex64::new(1.0, 0.0);
        for &(q, p) in factors {
            debug_assert!(q < n);
            let bit = (col >> q) & 1;
            match p {
                Pauli::X => row ^= 1 << q,
                Pauli::Y => {
                    row ^= 1 << q;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    amp *= if bit == 0 { I } else { -I };
                }
                Pauli::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
            }
        }
        m[(row, col)] += amp;
    }
    Ok(m)
}

/// Mixer Hamiltonian `H_i = -Σ X_q`.
pub fn mixer_hamiltonian(n: usize) -> Result<CMatrix> {
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for q in 0..n {
        m -= pauli_string(n, &[(q, Pauli::X)])?;
    }
    Ok(m)
}

/// Problem Hamiltonian `H_f = Σ h_i Z_i + Σ_{i<j} J_ij Z_i Z_j` (offset
/// excluded).
pub fn problem_hamiltonian(sg: &SpinGlass) -> Result<CMatrix> {
    let n = sg.n();
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for (q, &hq) in sg.fields().iter().enumerate() {
        m += pauli_string(n, &[(q, Pauli::Z)])? * Complex64::new(hq, 0.0);
    }
    for (i, j, v) in sg.pairs() {
        if v != 0.0 {
            m += pauli_string(n, &[(i, Pauli::Z), (j, Pauli::Z)])? * Complex64::new(v, 0.0);
        }
    }
    Ok(m)
}

/// Structure operator of the first-order counterdiabatic term:
/// `K = Σ h_i Y_i + Σ_{i<j} J_ij (Y_i Z_j + Z_i Y_j)`.
///
/// The CD Hamiltonian is `H_cd(t) = -2 λ̇(t) α₁(λ(t)) · K`.
pub fn cd_structure(sg: &SpinGlass) -> Result<CMatrix> {
    let n = sg.n();
    check_dense(n)?;
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for (q, &hq) in sg.fields().iter().enumerate() {
        m += pauli_string(n, &[(q, Pauli::Y)])? * Complex64::new(hq, 0.0);
    }
    for (i, j, v) in sg.pairs() {
        if v != 0.0 {
            let yz = pauli_string(n, &[(i, Pauli::Y), (j, Pauli::Z)])?;
            let zy = pauli_string(n, &[(i, Pauli::Z), (j, Pauli::Y)])?;
            m += (yz + zy) * Complex64::new(v, 0.0);
        }
    }
    Ok(m)
}

/// Dense unitary of a single gate on an `n`-qubit register.
///
/// Two-qubit gate matrices are written in the basis `|b_{q0} b_{q1}>` with
/// the first qubit argument as the most significant of the two bits; this
/// matches the statevector kernels and the printed native-gate matrices.
pub fn gate_unitary(gate: &Gate, n: usize) -> Result<CMatrix> {
    check_dense(n)?;
    gate.validate(n)?;
    let dim = 1 << n;
    match gate.one_qubit_matrix() {
        Some((q, m2)) => {
            let mut u = CMatrix::zeros(dim, dim);
            for col in 0..dim {
                let b = (col >> q) & 1;
                u[(col & !(1 << q), col)] += m2[b];
                u[(col | (1 << q), col)] += m2[2 + b];
            }
            Ok(u)
        }
        None => {
            let (q0, q1, m4) = gate
                .two_qubit_matrix()
                .expect("gate is one- or two-qubit");
            let mut u = CMatrix::zeros(dim, dim);
            for col in 0..dim {
                let b = 2 * ((col >> q0) & 1) + ((col >> q1) & 1);
                let base = col & !(1 << q0) & !(1 << q1);
                for (r, row_bits) in [
                    base,
                    base | (1 << q1),
                    base | (1 << q0),
                    base | (1 << q0) | (1 << q1),
                ]
                .into_iter()
                .enumerate()
                {
                    u[(row_bits, col)] += m4[4 * r + b];
                }
            }
            Ok(u)
        }
    }
}

/// Full circuit unitary by left-multiplying gate matrices in program order.
pub fn circuit_unitary(circuit: &Circuit, n: usize) -> Result<CMatrix> {
    check_dense(n)?;
    let dim = 1 << n;
    let mut u = CMatrix::identity(dim, dim);
    for gate in circuit.gates() {
        u = gate_unitary(gate, n)? * u;
    }
    Ok(u)
}

/// Normalized Hilbert-Schmidt norm squared: `Tr(A† A) / 2^n`.
pub fn hs_norm_sq(a: &CMatrix) -> f64 {
    let dim = a.nrows() as f64;
    a.iter().map(|v| v.norm_sqr()).sum::<f64>() / dim
}

/// Commutator `[a, b]`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}
