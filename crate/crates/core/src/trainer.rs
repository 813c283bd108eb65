//! Closed-loop VQE training: exact energies, central finite-difference
//! gradients and ADAM, shared by monolithic and distributed circuits.

use crate::circuit::{build_monolithic_ansatz, AnsatzSpec, Circuit};
use crate::error::{DvqeError, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::sim::StateVector;
use crate::telegate::{remap, run_stochastic_telegate, TelegateMode};
use crate::topology::Topology;
use crate::warm_start::EnergyObjective;

/// Ansatz circuit together with how it is executed and read out.
#[derive(Debug, Clone)]
pub struct Ansatz {
    spec: AnsatzSpec,
    monolithic: Circuit,
    distributed: Option<Distributed>,
}

#[derive(Debug, Clone)]
struct Distributed {
    circuit: Circuit,
    topology: Topology,
    mode: TelegateMode,
    telegate_seed: u64,
}

impl Ansatz {
    pub fn monolithic(spec: AnsatzSpec) -> Self {
        Self {
            spec,
            monolithic: build_monolithic_ansatz(spec),
            distributed: None,
        }
    }

    /// Distributed ansatz over `topology`. In stochastic mode every
    /// execution replays the same measurement outcomes drawn from
    /// `telegate_seed`, so energies stay deterministic.
    pub fn distributed(
        spec: AnsatzSpec,
        topology: Topology,
        mode: TelegateMode,
        telegate_seed: u64,
    ) -> Result<Self> {
        let monolithic = build_monolithic_ansatz(spec);
        let circuit = remap(&monolithic, &topology)?;
        Ok(Self {
            spec,
            monolithic,
            distributed: Some(Distributed {
                circuit,
                topology,
                mode,
                telegate_seed,
            }),
        })
    }

    pub fn spec(&self) -> AnsatzSpec {
        self.spec
    }

    pub fn n_params(&self) -> usize {
        self.monolithic.n_params()
    }

    pub fn n_compute(&self) -> usize {
        self.spec.n_qubits
    }

    pub fn topology(&self) -> Option<&Topology> {
        self.distributed.as_ref().map(|d| &d.topology)
    }

    /// The circuit that is actually simulated.
    pub fn circuit(&self) -> &Circuit {
        self.distributed.as_ref().map_or(&self.monolithic, |d| &d.circuit)
    }

    pub fn monolithic_circuit(&self) -> &Circuit {
        &self.monolithic
    }

    /// Final state plus the register index of each compute qubit in variable
    /// order. Deferred distributed runs return the full joint register.
    pub fn execute(&self, theta: &[f64]) -> Result<(StateVector, Vec<usize>)> {
        match &self.distributed {
            None => Ok((
                self.monolithic.bind_and_run(theta, None)?,
                (0..self.spec.n_qubits).collect(),
            )),
            Some(d) if d.mode == TelegateMode::Deferred => {
                Ok((d.circuit.bind_and_run(theta, None)?, d.topology.compute_order()))
            }
            Some(d) => Ok((
                run_stochastic_telegate(&self.monolithic, &d.topology, theta, d.telegate_seed)?,
                (0..self.spec.n_qubits).collect(),
            )),
        }
    }
}

/// Exact energy of an ansatz under a diagonal Hamiltonian. Energies of all
/// register basis states are precomputed; for a joint register the compute
/// bits of each index select the energy, which marginalises over comm qubits.
pub struct EnergyModel<'a> {
    ansatz: &'a Ansatz,
    hamiltonian: &'a IsingHamiltonian,
    compute_diag: Vec<f64>,
    joint_diag: Option<Vec<f64>>,
}

impl<'a> EnergyModel<'a> {
    pub fn new(ansatz: &'a Ansatz, hamiltonian: &'a IsingHamiltonian) -> Result<Self> {
        if hamiltonian.n() != ansatz.n_compute() {
            return Err(DvqeError::Dimension(format!(
                "hamiltonian has {} qubits, ansatz has {} compute qubits",
                hamiltonian.n(),
                ansatz.n_compute()
            )));
        }
        let compute_diag = hamiltonian.diagonal();
        let joint_diag = match &ansatz.distributed {
            Some(d) if d.mode == TelegateMode::Deferred => {
                let total = d.topology.n_total();
                let order = d.topology.compute_order();
                Some(
                    (0..1usize << total)
                        .map(|idx| compute_diag[project_index(idx, total, &order)])
                        .collect(),
                )
            }
            _ => None,
        };
        Ok(Self {
            ansatz,
            hamiltonian,
            compute_diag,
            joint_diag,
        })
    }

    pub fn hamiltonian(&self) -> &IsingHamiltonian {
        self.hamiltonian
    }

    pub fn ansatz(&self) -> &Ansatz {
        self.ansatz
    }

    pub fn energy(&self, theta: &[f64]) -> Result<f64> {
        let (state, _) = self.ansatz.execute(theta)?;
        let diag = self.joint_diag.as_deref().unwrap_or(&self.compute_diag);
        Ok(diag_expectation(&state, diag))
    }
}

impl EnergyObjective for EnergyModel<'_> {
    fn energy(&self, theta: &[f64]) -> f64 {
        EnergyModel::energy(self, theta).unwrap_or(f64::NAN)
    }
}

/// `Σ|a|² E / Σ|a|²`; dividing by the computed norm cancels the common
/// rounding scale picked up by long gate sequences.
fn diag_expectation(state: &StateVector, diag: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, e) in state.amplitudes().iter().zip(diag) {
        let p = a.norm_sqr();
        num += p * e;
        den += p;
    }
    num / den
}

/// Compute-qubit basis index (variable order) of a joint-register index.
pub fn project_index(joint: usize, n_total: usize, compute_order: &[usize]) -> usize {
    compute_order
        .iter()
        .fold(0, |acc, &g| (acc << 1) | ((joint >> (n_total - 1 - g)) & 1))
}

/// Energy of `circuit` run from `|0…0⟩`, read out on `readout` (register
/// indices of the compute qubits in variable order).
pub fn energy(circuit: &Circuit, readout: &[usize], h: &IsingHamiltonian, theta: &[f64]) -> Result<f64> {
    if readout.len() != h.n() {
        return Err(DvqeError::Dimension(format!(
            "readout has {} qubits, hamiltonian has {}",
            readout.len(),
            h.n()
        )));
    }
    let state = circuit.bind_and_run(theta, None)?;
    let diag = h.diagonal();
    let n_total = circuit.n_qubits();
    let joint: Vec<f64> = (0..1usize << n_total)
        .map(|idx| diag[project_index(idx, n_total, readout)])
        .collect();
    Ok(diag_expectation(&state, &joint))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub fd_step: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.05,
            max_iters: 200,
            rel_tol: 1e-4,
            fd_step: 1e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DvqeError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.lr, "lr")?;
        positive(self.rel_tol, "rel_tol")?;
        positive(self.fd_step, "fd_step")?;
        positive(self.adam_eps, "adam_eps")?;
        for (b, name) in [(self.adam_beta1, "adam_beta1"), (self.adam_beta2, "adam_beta2")] {
            if !(b > 0.0 && b < 1.0) {
                return Err(DvqeError::Config(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl AdamState {
    pub fn new(p: usize) -> Self {
        Self {
            m: vec![0.0; p],
            v: vec![0.0; p],
            t: 0,
        }
    }
}

/// One bias-corrected ADAM update, in place.
pub fn adam_step(state: &mut AdamState, theta: &mut [f64], grad: &[f64], cfg: &TrainConfig) -> Result<()> {
    if theta.len() != grad.len() || state.m.len() != grad.len() {
        return Err(DvqeError::Dimension(format!(
            "adam: theta {}, gradient {}, state {}",
            theta.len(),
            grad.len(),
            state.m.len()
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for j in 0..grad.len() {
        let g = grad[j];
        state.m[j] = b1 * state.m[j] + (1.0 - b1) * g;
        state.v[j] = b2 * state.v[j] + (1.0 - b2) * g * g;
        let m_hat = state.m[j] / c1;
        let v_hat = state.v[j] / c2;
        theta[j] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.adam_eps);
    }
    Ok(())
}

/// Central differences, `2p` energy evaluations.
pub fn fd_gradient(obj: &dyn Fn(&[f64]) -> Result<f64>, theta: &[f64], fd_step: f64) -> Result<Vec<f64>> {
    if !(fd_step > 0.0) {
        return Err(DvqeError::Config(format!(
            "fd_step must be positive, got {fd_step}"
        )));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        probe[j] = theta[j] + fd_step;
        let plus = obj(&probe)?;
        probe[j] = theta[j] - fd_step;
        let minus = obj(&probe)?;
        probe[j] = theta[j];
        grad.push((plus - minus) / (2.0 * fd_step));
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub energies: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl TrainHistory {
    /// `iter,energy` CSV, one row per iteration.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy\n");
        for (i, e) in self.energies.iter().enumerate() {
            out.push_str(&format!("{i},{e}\n"));
        }
        out
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.energies.first().copied()
    }
}

/// Relative-change convergence test.
pub fn has_converged(previous: f64, current: f64, rel_tol: f64) -> bool {
    (current - previous).abs() / current.abs().max(1e-8) < rel_tol
}

/// Training loop over an arbitrary energy function. `visit` sees every
/// evaluated `(θ, E)` pair in order.
pub fn train_with(
    obj: &dyn Fn(&[f64]) -> Result<f64>,
    theta0: &[f64],
    cfg: &TrainConfig,
    mut visit: impl FnMut(&[f64], f64) -> Result<()>,
) -> Result<(Vec<f64>, TrainHistory)> {
    cfg.validate()?;
    let mut theta = theta0.to_vec();
    let mut adam = AdamState::new(theta.len());
    let mut history = TrainHistory::default();
    for t in 0..cfg.max_iters {
        let e = obj(&theta)?;
        if !e.is_finite() {
            return Err(DvqeError::Numeric {
                iteration: t,
                message: format!("energy evaluated to {e}"),
            });
        }
        visit(&theta, e)?;
        history.energies.push(e);
        history.iterations_used = t + 1;
        if t > 0 && has_converged(history.energies[t - 1], e, cfg.rel_tol) {
            history.converged = true;
            break;
        }
        // the final parameters are the last evaluated ones, so the last
        // iteration needs no update
        if t + 1 == cfg.max_iters {
            break;
        }
        let grad = fd_gradient(obj, &theta, cfg.fd_step)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(DvqeError::Numeric {
                iteration: t,
                message: "non-finite gradient".into(),
            });
        }
        adam_step(&mut adam, &mut theta, &grad, cfg)?;
    }
    Ok((theta, history))
}

pub fn train(model: &EnergyModel<'_>, theta0: &[f64], cfg: &TrainConfig) -> Result<(Vec<f64>, TrainHistory)> {
    if theta0.len() != model.ansatz().n_params() {
        return Err(DvqeError::Dimension(format!(
            "expected {} parameters, got {}",
            model.ansatz().n_params(),
            theta0.len()
        )));
    }
    train_with(&|th: &[f64]| model.energy(th), theta0, cfg, |_, _| Ok(()))
}

/// Per-iteration agreement required between the two architectures.
pub const SHARED_TOLERANCE: f64 = 1e-9;

/// Trains the monolithic model and replays each visited θ through the
/// distributed model. Returns `(monolithic, distributed)` histories.
pub fn train_shared(
    mono: &EnergyModel<'_>,
    dist: &EnergyModel<'_>,
    theta0: &[f64],
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, TrainHistory, TrainHistory)> {
    if mono.ansatz().spec() != dist.ansatz().spec() {
        return Err(DvqeError::Config(
            "shared training needs the same ansatz spec".into(),
        ));
    }
    let mut replay = Vec::new();
    let (theta, mono_hist) = train_with(&|th: &[f64]| mono.energy(th), theta0, cfg, |th, e| {
        let d = dist.energy(th)?;
        let delta = (d - e).abs();
        if delta >= SHARED_TOLERANCE {
            return Err(DvqeError::Equivalence {
                iteration: replay.len(),
                delta,
            });
        }
        replay.push(d);
        Ok(())
    })?;
    let dist_hist = TrainHistory {
        energies: replay,
        converged: mono_hist.converged,
        iterations_used: mono_hist.iterations_used,
    };
    Ok((theta, mono_hist, dist_hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::QuboProblem;
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    fn single_z() -> IsingHamiltonian {
        IsingHamiltonian::new(vec![1.0], BTreeMap::new(), 0.0).unwrap()
    }

    #[test]
    fn zero_angles_give_all_zero_energy() {
        let p = QuboProblem::new(
            vec![vec![1.0, -2.0, 0.0], vec![-2.0, 3.0, 1.0], vec![0.0, 1.0, -1.0]],
            vec![0.5, -0.5, 2.0],
            0.0,
        )
        .unwrap();
        let h = IsingHamiltonian::from_qubo(&p);
        let ansatz = Ansatz::monolithic(AnsatzSpec::new(3, 2).unwrap());
        let model = EnergyModel::new(&ansatz, &h).unwrap();
        let e = model.energy(&[0.0; 6]).unwrap();
        assert!((e - h.energy_of_bitstring(&[0, 0, 0]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_closed_form() {
        let h = single_z();
        let ansatz = Ansatz::monolithic(AnsatzSpec::new(1, 1).unwrap());
        let model = EnergyModel::new(&ansatz, &h).unwrap();
        assert!((model.energy(&[PI]).unwrap() + 1.0).abs() < 1e-12);
        let theta = 0.83;
        assert!((model.energy(&[theta]).unwrap() - theta.cos()).abs() < 1e-12);
        let g = fd_gradient(&|th: &[f64]| model.energy(th), &[theta], 1e-2).unwrap();
        assert!((g[0] + theta.sin()).abs() < 1e-4);
    }

    #[test]
    fn free_function_energy_matches_model() {
        let h = single_z();
        let ansatz = Ansatz::monolithic(AnsatzSpec::new(1, 2).unwrap());
        let model = EnergyModel::new(&ansatz, &h).unwrap();
        let e = energy(ansatz.circuit(), &[0], &h, &[0.4, 0.9]).unwrap();
        assert!((e - model.energy(&[0.4, 0.9]).unwrap()).abs() < 1e-14);
        assert!(energy(ansatz.circuit(), &[0, 1], &h, &[0.4, 0.9]).is_err());
    }

    #[test]
    fn constant_landscape_has_zero_gradient() {
        let g = fd_gradient(&|_: &[f64]| Ok(3.5), &[0.1, 0.2, 0.3], 1e-2).unwrap();
        assert_eq!(g, vec![0.0; 3]);
        assert!(fd_gradient(&|_: &[f64]| Ok(0.0), &[0.1], 0.0).is_err());
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let cfg = TrainConfig::default();
        let mut state = AdamState::new(2);
        let mut theta = vec![0.3, -1.2];
        adam_step(&mut state, &mut theta, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(theta, vec![0.3, -1.2]);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn adam_first_step_is_sign_step() {
        let cfg = TrainConfig::default();
        let mut state = AdamState::new(3);
        let g = [0.5, -2.0, 1e-3];
        let mut theta = vec![1.0, 1.0, 1.0];
        adam_step(&mut state, &mut theta, &g, &cfg).unwrap();
        for j in 0..3 {
            let expected = 1.0 - cfg.lr * g[j] / (g[j].abs() + cfg.adam_eps);
            assert!((theta[j] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_descends_quadratic_bowl() {
        let cfg = TrainConfig::default();
        let mut state = AdamState::new(1);
        let mut theta = vec![2.0];
        let mut prev = theta[0];
        for _ in 0..2 {
            let g = [2.0 * theta[0]];
            adam_step(&mut state, &mut theta, &g, &cfg).unwrap();
            assert!(theta[0] < prev && theta[0] > 0.0);
            prev = theta[0];
        }
    }

    #[test]
    fn huge_tolerance_stops_at_second_iteration() {
        let cfg = TrainConfig {
            rel_tol: 1e9,
            ..TrainConfig::default()
        };
        let obj = |th: &[f64]| Ok(th[0].cos());
        let (_, hist) = train_with(&obj, &[1.0], &cfg, |_, _| Ok(())).unwrap();
        assert!(hist.converged);
        assert_eq!(hist.iterations_used, 2);
        assert_eq!(hist.energies.len(), 2);
    }

    #[test]
    fn zero_budget_returns_start() {
        let cfg = TrainConfig {
            max_iters: 0,
            ..TrainConfig::default()
        };
        let (theta, hist) = train_with(&|th: &[f64]| Ok(th[0]), &[0.7], &cfg, |_, _| Ok(())).unwrap();
        assert_eq!(theta, vec![0.7]);
        assert!(hist.energies.is_empty());
        assert!(!hist.converged);
    }

    #[test]
    fn non_finite_energy_is_reported() {
        let cfg = TrainConfig::default();
        let err = train_with(&|_: &[f64]| Ok(f64::NAN), &[0.0], &cfg, |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, DvqeError::Numeric { iteration: 0, .. }));
    }

    #[test]
    fn csv_format() {
        let hist = TrainHistory {
            energies: vec![1.5, -0.25],
            converged: true,
            iterations_used: 2,
        };
        assert_eq!(hist.to_csv(), "iter,energy\n0,1.5\n1,-0.25\n");
    }

    #[test]
    fn convergence_ratio() {
        assert!(has_converged(100.0, 100.05, 1e-3));
        assert!(!has_converged(100.0, 101.0, 1e-3));
        // denominator floor
        assert!(!has_converged(0.0, 1e-9, 1e-3));
    }

    #[test]
    fn project_index_reorders_bits() {
        // joint register of 4 with compute qubits at 0 and 2
        assert_eq!(project_index(0b1010, 4, &[0, 2]), 0b11);
        assert_eq!(project_index(0b0010, 4, &[0, 2]), 0b01);
        assert_eq!(project_index(0b0101, 4, &[0, 2]), 0b00);
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrainConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.adam_beta1 = 1.0;
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
