//! Distributed variational quantum eigensolver for QUBO problems.
//!
//! The pipeline turns a QUBO into a diagonal Ising Hamiltonian, builds a
//! layered RY/CNOT ansatz, optionally splits it across several logical QPUs
//! (cross-QPU CNOTs become TeleGates over reserved communication qubits),
//! warm-starts the parameters, trains them with ADAM on finite-difference
//! gradients and finally samples the trained circuit to pick a solution.
//!
//! Bit conventions are global: qubit 0 is the most significant bit of a
//! basis index, bit value 0 is spin `+1`, and problem variable `i` is the
//! `i`-th compute qubit.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod qubo;
pub mod sampler;
pub mod sim;
pub mod streams;
pub mod telegate;
pub mod topology;
pub mod trainer;
pub mod warm_start;

pub use circuit::{build_monolithic_ansatz, AnsatzSpec, Circuit, Gate, GateKind};
pub use error::{DvqeError, Result};
pub use hamiltonian::IsingHamiltonian;
pub use qubo::{build_uc_qubo, QuboProblem, UcInstance};
pub use sim::{fidelity, StateVector, Unitary1Q};
pub use telegate::{remap, TelegateMode};
pub use topology::{greedy_allocate, Topology};
