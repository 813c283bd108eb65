//! Monolithic → distributed circuit conversion.
//!
//! Single-qubit gates and same-QPU CNOTs are re-indexed onto the joint
//! register. A CNOT whose control and target sit on different QPUs becomes a
//! TeleGate over the two communication qubits `e_a` (control side) and `e_b`
//! (target side):
//!
//! ```text
//! H(e_a) CNOT(e_a,e_b)      EPR pair
//! CNOT(c,e_a)               entangle control with its comm qubit
//! CNOT(e_a,e_b)             deferred measure-and-X of e_a
//! CNOT(e_b,t)               apply on the target QPU
//! H(e_b) CZ(e_b,c)          deferred measure-and-Z of e_b
//! H(e_a) H(e_b)             both comm qubits back to |0⟩
//! ```
//!
//! After the disentangler both comm qubits are exactly `|+⟩`, so the final
//! Hadamards restore `|0⟩` without measurement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{build_monolithic_ansatz, AnsatzSpec, Circuit, Gate, GateKind};
use crate::error::{DvqeError, Result};
use crate::sim::{fidelity, StateVector};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TelegateMode {
    /// Measurement and classical control replaced by controlled gates.
    #[default]
    Deferred,
    /// Mid-circuit measurement with seeded outcomes and classical feed-forward.
    Stochastic,
}

impl std::str::FromStr for TelegateMode {
    type Err = DvqeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deferred" => Ok(Self::Deferred),
            "stochastic" => Ok(Self::Stochastic),
            other => Err(DvqeError::Config(format!("unknown telegate mode {other:?}"))),
        }
    }
}

/// The nine-gate deferred TeleGate for `CNOT(control, target)`.
pub fn telegate_cnot(control: usize, target: usize, e_a: usize, e_b: usize) -> [Gate; 9] {
    [
        Gate::h(e_a),
        Gate::cnot(e_a, e_b),
        Gate::cnot(control, e_a),
        Gate::cnot(e_a, e_b),
        Gate::cnot(e_b, target),
        Gate::h(e_b),
        Gate::cz(e_b, control),
        Gate::h(e_a),
        Gate::h(e_b),
    ]
    .map(Gate::tagged)
}

fn check_sizes(circuit: &Circuit, topology: &Topology) -> Result<()> {
    if circuit.n_qubits() != topology.n_compute() {
        return Err(DvqeError::Dimension(format!(
            "circuit has {} qubits but the topology has {} compute qubits",
            circuit.n_qubits(),
            topology.n_compute()
        )));
    }
    Ok(())
}

/// A two-qubit gate that needs a TeleGate, with its comm qubits.
struct Remote {
    control: usize,
    target: usize,
    e_a: usize,
    e_b: usize,
}

fn classify(gate: &Gate, topology: &Topology) -> Result<Option<Remote>> {
    if gate.kind().arity() != 2 {
        return Ok(None);
    }
    let [a, b] = [gate.qubits()[0], gate.qubits()[1]];
    let (qa, qb) = (topology.qpu_of_variable(a)?, topology.qpu_of_variable(b)?);
    if qa == qb {
        return Ok(None);
    }
    if gate.kind() != GateKind::Cnot {
        return Err(DvqeError::InvalidGate(format!(
            "only CNOT can cross QPUs, found {}",
            gate.kind().name()
        )));
    }
    Ok(Some(Remote {
        control: topology.map_compute_to_global(a)?,
        target: topology.map_compute_to_global(b)?,
        e_a: topology.comm_of(qa)?,
        e_b: topology.comm_of(qb)?,
    }))
}

/// Rewrites `circuit` (over the topology's compute qubits) into a circuit on
/// the full joint register. Parameter slots are untouched.
pub fn remap(circuit: &Circuit, topology: &Topology) -> Result<Circuit> {
    check_sizes(circuit, topology)?;
    let order = topology.compute_order();
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for g in circuit.gates() {
        match classify(g, topology)? {
            Some(r) => gates.extend(telegate_cnot(r.control, r.target, r.e_a, r.e_b)),
            None => gates.push(g.with_qubits(|q| order[q])),
        }
    }
    Circuit::new(topology.n_total(), gates, circuit.n_params())
}

/// Executes the distributed form of `circuit` with genuine mid-circuit
/// measurements on the comm qubits and returns the compute-qubit state in
/// variable order.
pub fn run_stochastic_telegate(
    circuit: &Circuit,
    topology: &Topology,
    theta: &[f64],
    seed: u64,
) -> Result<StateVector> {
    check_sizes(circuit, topology)?;
    if theta.len() != circuit.n_params() {
        return Err(DvqeError::Dimension(format!(
            "expected {} parameters, got {}",
            circuit.n_params(),
            theta.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = topology.compute_order();
    let mut state = StateVector::zero(topology.n_total())?;
    for g in circuit.gates() {
        match classify(g, topology)? {
            None => g.with_qubits(|q| order[q]).apply(&mut state, theta)?,
            Some(Remote {
                control,
                target,
                e_a,
                e_b,
            }) => {
                state.apply_h(e_a)?;
                state.apply_cnot(e_a, e_b)?;
                state.apply_cnot(control, e_a)?;
                // cat-entangler: measure e_a, send the bit, correct e_b
                if state.measure(e_a, &mut rng)? == 1 {
                    state.apply_x(e_b)?;
                    state.apply_x(e_a)?;
                }
                state.apply_cnot(e_b, target)?;
                // cat-disentangler: X-basis measurement of e_b, Z on the control
                state.apply_h(e_b)?;
                if state.measure(e_b, &mut rng)? == 1 {
                    state.apply_z(control)?;
                    state.apply_x(e_b)?;
                }
            }
        }
    }
    state.extract_subspace(&order, true)
}

/// Runs the deferred-mode distributed circuit and projects onto the compute
/// qubits, failing if any comm qubit is left excited.
pub fn run_deferred(distributed: &Circuit, topology: &Topology, theta: &[f64]) -> Result<StateVector> {
    let joint = distributed.bind_and_run(theta, None)?;
    joint.extract_subspace(&topology.compute_order(), true)
}

/// Fidelity between the monolithic ansatz output and the compute subspace of
/// its distributed counterpart.
pub fn verify_equivalence(spec: AnsatzSpec, topology: &Topology, theta: &[f64]) -> Result<f64> {
    let mono = build_monolithic_ansatz(spec);
    let reference = mono.bind_and_run(theta, None)?;
    let distributed = remap(&mono, topology)?;
    let projected = run_deferred(&distributed, topology, theta)?;
    fidelity(&reference, &projected)
}
