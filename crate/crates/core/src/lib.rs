//! Digitized-counterdiabatic quantum optimization (DCQO) for Ising spin
//! glasses, with Markowitz portfolio selection as the flagship problem.
//!
//! The crate covers the full pipeline:
//!
//! - [`marketdata`]: offline CSV price ingestion into returns and covariance;
//! - [`ising`]: portfolio-to-QUBO-to-Ising encoding, exact energy evaluation,
//!   and brute-force spectrum oracles;
//! - [`schedule`]: the scheduling function, the first-order nested-commutator
//!   counterdiabatic coefficient, and impulse-step selection;
//! - [`circuit`]: gate-level IR and the circuit/ansatz builders (digitized
//!   adiabatic, CD-assisted, CD-only, QAOA, DC-QAOA, h-DCQO) with small-angle
//!   pruning;
//! - [`simulator`]: statevector engine with strided gate kernels, diagonal
//!   expectation values, shot sampling, and a dense exact-evolution oracle;
//! - [`variational`]: derivative-free hybrid training loop;
//! - [`metrics`]: mean-based approximation ratio, energy histograms, and run
//!   reports;
//! - [`transpile`]: trapped-ion native-gate rewriting (`GPi`/`GPi2`/`MS`)
//!   with a unitary-equivalence verifier.
//!
//! Heavy inner loops (gate kernels, spectrum scans, expectation values) run
//! on rayon when the `parallel` feature is enabled (the default) and fall
//! back to sequential execution otherwise. Results are identical either way.

pub mod circuit;
pub mod dense;
pub mod error;
pub mod ising;
pub mod marketdata;
pub mod metrics;
mod parallel;
pub mod schedule;
pub mod simulator;
pub mod transpile;
pub mod variational;

pub use error::{Error, Result};
