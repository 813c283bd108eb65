use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use dvqe::qubo::all_bitstrings;
use dvqe::telegate::{run_deferred, run_stochastic_telegate};
use dvqe::trainer::{Ansatz, EnergyModel};
use dvqe::{
    build_monolithic_ansatz, build_uc_qubo, fidelity, greedy_allocate, remap, AnsatzSpec, GateKind,
    IsingHamiltonian, QuboProblem, StateVector, TelegateMode, Topology, UcInstance, Unitary1Q,
};

fn matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, n), n)
}

fn qubo() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, f64)> {
    (1usize..=6).prop_flat_map(|n| (matrix(n), prop::collection::vec(-5.0..5.0f64, n), -3.0..3.0f64))
}

fn direct_cost(q: &[Vec<f64>], lin: &[f64], offset: f64, x: &[u8]) -> f64 {
    let mut c = offset;
    for i in 0..x.len() {
        c += lin[i] * x[i] as f64;
        for j in 0..x.len() {
            c += q[i][j] * (x[i] * x[j]) as f64;
        }
    }
    c
}

/// Compute-qubit split of `n` into at least two QPUs.
fn layout() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (2usize..=6)
        .prop_flat_map(|n| (Just(n), 2usize..=n))
        .prop_map(|(n, m)| (n, greedy_allocate(n, m).unwrap()))
}

fn angles(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0 * PI, p)
}

fn unit_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            StateVector::from_amplitudes(
                v.into_iter()
                    .map(|(a, b)| Complex64::new(a / norm, b / norm))
                    .collect(),
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrizing_keeps_costs((q, lin, off) in qubo()) {
        let p = QuboProblem::new(q.clone(), lin.clone(), off).unwrap();
        for i in 0..p.n() {
            for j in 0..p.n() {
                prop_assert!((p.quad(i, j) - p.quad(j, i)).abs() < 1e-15);
            }
        }
        for x in all_bitstrings(p.n()) {
            prop_assert!((p.cost(&x).unwrap() - direct_cost(&q, &lin, off, &x)).abs() < 1e-9);
        }
    }

    #[test]
    fn brute_force_is_minimal((q, lin, off) in qubo()) {
        let p = QuboProblem::new(q, lin, off).unwrap();
        let (best, c) = p.brute_force().unwrap();
        prop_assert!((p.cost(&best).unwrap() - c).abs() < 1e-9);
        for x in all_bitstrings(p.n()) {
            prop_assert!(c <= p.cost(&x).unwrap() + 1e-9);
        }
    }

    #[test]
    fn ising_energy_matches_cost((q, lin, off) in qubo()) {
        let p = QuboProblem::new(q, lin, off).unwrap();
        let h = IsingHamiltonian::from_qubo(&p);
        let diag = h.diagonal();
        for (idx, x) in all_bitstrings(p.n()).enumerate() {
            let c = p.cost(&x).unwrap();
            prop_assert!((h.energy_of_bitstring(&x).unwrap() - c).abs() < 1e-9);
            prop_assert!((diag[idx] - c).abs() < 1e-9);
        }
    }

    #[test]
    fn uc_qubo_equals_penalized_objective(
        units in prop::collection::vec((1.0..30.0f64, 5.0..60.0f64), 1..=6),
        demand in 10.0..150.0f64,
        lambda in 1.0..200.0f64,
    ) {
        let (costs, powers): (Vec<f64>, Vec<f64>) = units.into_iter().unzip();
        let uc = UcInstance::new(costs.clone(), powers.clone(), demand, lambda).unwrap();
        let p = build_uc_qubo(&uc).unwrap();
        for z in all_bitstrings(costs.len()) {
            let supply: f64 = z.iter().zip(&powers).map(|(b, w)| *b as f64 * w).sum();
            let linear: f64 = z.iter().zip(&costs).map(|(b, w)| *b as f64 * w).sum();
            let want = linear + lambda * (supply - demand).powi(2);
            prop_assert!((p.cost(&z).unwrap() - want).abs() < 1e-6 * want.abs().max(1.0));
        }
    }

    #[test]
    fn gates_preserve_norm(state in unit_state(4), t in -PI..PI, a in 0usize..4, b in 0usize..4) {
        prop_assume!(a != b);
        let mut s = state;
        s.apply_ry(a, t).unwrap();
        s.apply_1q(b, &Unitary1Q::rx(t)).unwrap();
        s.apply_1q(a, &Unitary1Q::rz(-t)).unwrap();
        s.apply_h(b).unwrap();
        s.apply_cnot(a, b).unwrap();
        s.apply_cz(b, a).unwrap();
        s.apply_x(a).unwrap();
        s.apply_z(b).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_then_inverse_is_identity(state in unit_state(3), t in -PI..PI, q in 0usize..3) {
        for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
            let u = match kind {
                GateKind::Rx => Unitary1Q::rx(t),
                GateKind::Ry => Unitary1Q::ry(t),
                _ => Unitary1Q::rz(t),
            };
            let mut s = state.clone();
            s.apply_1q(q, &u).unwrap();
            s.apply_1q(q, &u.adjoint()).unwrap();
            for (x, y) in s.amplitudes().iter().zip(state.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cz_is_symmetric(state in unit_state(3), a in 0usize..3, b in 0usize..3) {
        prop_assume!(a != b);
        let mut s1 = state.clone();
        let mut s2 = state;
        s1.apply_cz(a, b).unwrap();
        s2.apply_cz(b, a).unwrap();
        prop_assert_eq!(s1.amplitudes(), s2.amplitudes());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn distributed_matches_monolithic(
        (n, qpus, theta, depth, seed) in (layout(), 1usize..=3, any::<u64>()).prop_flat_map(|((n, qpus), d, seed)| {
            (Just(n), Just(qpus), angles(n * d), Just(d), Just(seed))
        })
    ) {
        let spec = AnsatzSpec::new(n, depth).unwrap();
        let topo = Topology::for_problem(&qpus, n).unwrap();
        let mono = build_monolithic_ansatz(spec);
        let reference = mono.bind_and_run(&theta, None).unwrap();
        let dist = remap(&mono, &topo).unwrap();

        // comm qubits end clean and the compute register matches
        let joint = dist.bind_and_run(&theta, None).unwrap();
        for c in topo.comm_indices() {
            prop_assert!(joint.prob_one(c).unwrap() < 1e-12);
        }
        let deferred = run_deferred(&dist, &topo, &theta).unwrap();
        prop_assert!((fidelity(&reference, &deferred).unwrap() - 1.0).abs() < 1e-10);

        let stochastic = run_stochastic_telegate(&mono, &topo, &theta, seed).unwrap();
        prop_assert!((fidelity(&reference, &stochastic).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn energies_agree_across_modes(
        (n, qpus, theta, q, lin) in layout().prop_flat_map(|(n, qpus)| {
            (Just(n), Just(qpus), angles(2 * n), matrix(n), prop::collection::vec(-5.0..5.0f64, n))
        }),
    ) {
        let p = QuboProblem::new(q, lin, 0.0).unwrap();
        let h = IsingHamiltonian::from_qubo(&p);
        let spec = AnsatzSpec::new(n, 2).unwrap();
        let mono = Ansatz::monolithic(spec);
        let deferred = Ansatz::distributed(spec, Topology::for_problem(&qpus, n).unwrap(), TelegateMode::Deferred, 0).unwrap();
        let stochastic = Ansatz::distributed(spec, Topology::for_problem(&qpus, n).unwrap(), TelegateMode::Stochastic, 3).unwrap();
        let e = EnergyModel::new(&mono, &h).unwrap().energy(&theta).unwrap();
        let ed = EnergyModel::new(&deferred, &h).unwrap().energy(&theta).unwrap();
        let es = EnergyModel::new(&stochastic, &h).unwrap().energy(&theta).unwrap();
        prop_assert!((e - ed).abs() < 1e-9);
        prop_assert!((e - es).abs() < 1e-9);
    }

    #[test]
    fn greedy_allocation_is_balanced(n in 1usize..=24, m in 1usize..=8) {
        prop_assume!(m <= n);
        let alloc = greedy_allocate(n, m).unwrap();
        prop_assert_eq!(alloc.len(), m);
        prop_assert_eq!(alloc.iter().sum::<usize>(), n);
        let (lo, hi) = (*alloc.iter().min().unwrap(), *alloc.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        // ties go to the lowest index, so counts never increase
        prop_assert!(alloc.windows(2).all(|w| w[0] >= w[1]));
    }
}
