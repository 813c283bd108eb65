//! Gate-list circuits with symbolic parameter slots.

use std::fmt::Write as _;

use crate::error::{DvqeError, Result};
use crate::sim::{StateVector, Unitary1Q};
use crate::topology::{QubitRole, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    X,
    Z,
    Cnot,
    Cz,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    /// Index into the bound parameter vector.
    Param(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: [usize; 2],
    angle: Option<Angle>,
    telegate: bool,
}

impl Gate {
    pub fn rotation(kind: GateKind, qubit: usize, angle: Angle) -> Result<Self> {
        if !kind.is_rotation() {
            return Err(DvqeError::InvalidGate(format!("{} takes no angle", kind.name())));
        }
        Ok(Self {
            kind,
            qubits: [qubit, qubit],
            angle: Some(angle),
            telegate: false,
        })
    }

    pub fn ry(qubit: usize, slot: usize) -> Self {
        Self {
            kind: GateKind::Ry,
            qubits: [qubit, qubit],
            angle: Some(Angle::Param(slot)),
            telegate: false,
        }
    }

    pub fn fixed(kind: GateKind, qubit: usize) -> Result<Self> {
        if kind.is_rotation() || kind.arity() != 1 {
            return Err(DvqeError::InvalidGate(format!(
                "{} is not a fixed single-qubit gate",
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            qubits: [qubit, qubit],
            angle: None,
            telegate: false,
        })
    }

    pub fn h(qubit: usize) -> Self {
        Self::fixed(GateKind::H, qubit).expect("H is fixed")
    }

    pub fn x(qubit: usize) -> Self {
        Self::fixed(GateKind::X, qubit).expect("X is fixed")
    }

    pub fn z(qubit: usize) -> Self {
        Self::fixed(GateKind::Z, qubit).expect("Z is fixed")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            qubits: [control, target],
            angle: None,
            telegate: false,
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            qubits: [a, b],
            angle: None,
            telegate: false,
        }
    }

    pub(crate) fn tagged(mut self) -> Self {
        self.telegate = true;
        self
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn angle(&self) -> Option<Angle> {
        self.angle
    }

    /// Set on gates inserted by a TeleGate expansion.
    pub fn is_telegate(&self) -> bool {
        self.telegate
    }

    pub(crate) fn with_qubits(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut g = self.clone();
        g.qubits = [map(self.qubits[0]), map(self.qubits[1])];
        g
    }

    /// Applies the gate with parameters bound from `theta`.
    pub fn apply(&self, state: &mut StateVector, theta: &[f64]) -> Result<()> {
        let q = self.qubits;
        let angle = || match self.angle {
            Some(Angle::Fixed(v)) => v,
            Some(Angle::Param(slot)) => theta[slot],
            None => unreachable!("rotation without angle"),
        };
        match self.kind {
            GateKind::Ry => state.apply_ry(q[0], angle()),
            GateKind::Rx => state.apply_1q(q[0], &Unitary1Q::rx(angle())),
            GateKind::Rz => state.apply_1q(q[0], &Unitary1Q::rz(angle())),
            GateKind::H => state.apply_h(q[0]),
            GateKind::X => state.apply_x(q[0]),
            GateKind::Z => state.apply_z(q[0]),
            GateKind::Cnot => state.apply_cnot(q[0], q[1]),
            GateKind::Cz => state.apply_cz(q[0], q[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>, n_params: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(DvqeError::Dimension("circuit needs at least one qubit".into()));
        }
        let mut used = vec![false; n_params];
        for (pos, g) in gates.iter().enumerate() {
            if let Some(&q) = g.qubits().iter().find(|&&q| q >= n_qubits) {
                return Err(DvqeError::InvalidGate(format!(
                    "gate {pos} ({}) touches qubit {q} of {n_qubits}",
                    g.kind.name()
                )));
            }
            if g.kind.arity() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(DvqeError::InvalidGate(format!(
                    "gate {pos} ({}) repeats qubit {}",
                    g.kind.name(),
                    g.qubits[0]
                )));
            }
            if g.kind.is_rotation() != g.angle.is_some() {
                return Err(DvqeError::InvalidGate(format!(
                    "gate {pos} has a malformed angle"
                )));
            }
            if let Some(Angle::Param(slot)) = g.angle {
                if slot >= n_params {
                    return Err(DvqeError::InvalidGate(format!(
                        "gate {pos} references slot {slot} of {n_params}"
                    )));
                }
                used[slot] = true;
            }
        }
        if let Some(slot) = used.iter().position(|u| !u) {
            return Err(DvqeError::InvalidGate(format!(
                "parameter slot {slot} is never used"
            )));
        }
        Ok(Self {
            n_qubits,
            gates,
            n_params,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Runs the circuit from `initial` (or `|0…0⟩`).
    pub fn bind_and_run(&self, theta: &[f64], initial: Option<StateVector>) -> Result<StateVector> {
        if theta.len() != self.n_params {
            return Err(DvqeError::Dimension(format!(
                "expected {} parameters, got {}",
                self.n_params,
                theta.len()
            )));
        }
        let mut state = match initial {
            Some(s) if s.n_qubits() != self.n_qubits => {
                return Err(DvqeError::Dimension(format!(
                    "initial state has {} qubits, circuit has {}",
                    s.n_qubits(),
                    self.n_qubits
                )))
            }
            Some(s) => s,
            None => StateVector::zero(self.n_qubits)?,
        };
        for g in &self.gates {
            g.apply(&mut state, theta)?;
        }
        Ok(state)
    }

    /// Line-oriented diagram, one gate per line.
    pub fn render_text(&self, topology: Option<&Topology>) -> String {
        let mut out = format!(
            "# qubits={} params={} gates={}\n",
            self.n_qubits,
            self.n_params,
            self.gates.len()
        );
        let label = |q: usize| -> String {
            match topology.and_then(|t| t.role(q)) {
                Some(QubitRole::Compute { qpu, local, .. }) => format!("q{q}[QPU{qpu}.compute.{local}]"),
                Some(QubitRole::Comm { qpu }) => format!("q{q}[QPU{qpu}.comm]"),
                None => format!("q{q}"),
            }
        };
        for g in &self.gates {
            out.push_str(g.kind.name());
            for &q in g.qubits() {
                out.push(' ');
                out.push_str(&label(q));
            }
            match g.angle {
                Some(Angle::Param(slot)) => write!(out, " theta[{slot}]").unwrap(),
                Some(Angle::Fixed(v)) => write!(out, " {v}").unwrap(),
                None => {}
            }
            if g.telegate {
                out.push_str(" TG");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(DvqeError::Config("ansatz needs at least one qubit".into()));
        }
        if depth == 0 {
            return Err(DvqeError::Config("ansatz depth must be at least 1".into()));
        }
        Ok(Self { n_qubits, depth })
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.depth
    }
}

/// Layered hardware-efficient ansatz: each layer is an RY on every qubit
/// followed by a CNOT chain `(0,1), (1,2), …`. Slots are layer-major.
pub fn build_monolithic_ansatz(spec: AnsatzSpec) -> Circuit {
    let n = spec.n_qubits;
    let mut gates = Vec::with_capacity(spec.depth * (2 * n - 1));
    for layer in 0..spec.depth {
        gates.extend((0..n).map(|q| Gate::ry(q, layer * n + q)));
        gates.extend((0..n.saturating_sub(1)).map(|q| Gate::cnot(q, q + 1)));
    }
    Circuit::new(n, gates, spec.n_params()).expect("ansatz construction is valid")
}
