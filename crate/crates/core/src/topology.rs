//! Multi-QPU register layout.
//!
//! Each QPU owns a contiguous block of compute qubits followed by its single
//! communication qubit: `QPU0.compute…, QPU0.comm, QPU1.compute…, …`.
//! Problem variable `i` always lives on the `i`-th compute qubit.

use crate::error::{DvqeError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qpu {
    pub compute_global_indices: Vec<usize>,
    pub comm_global_index: usize,
}

impl Qpu {
    pub fn compute_count(&self) -> usize {
        self.compute_global_indices.len()
    }
}

/// What a global register index is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitRole {
    Compute {
        qpu: usize,
        local: usize,
        variable: usize,
    },
    Comm {
        qpu: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    qpus: Vec<Qpu>,
    // variable -> (qpu, global)
    placement: Vec<(usize, usize)>,
    roles: Vec<QubitRole>,
}

/// Least-load assignment of `n_compute` variables to `m_qpus` QPUs, ties to
/// the lowest QPU index.
pub fn greedy_allocate(n_compute: usize, m_qpus: usize) -> Result<Vec<usize>> {
    if m_qpus == 0 {
        return Err(DvqeError::Config("at least one QPU is required".into()));
    }
    if m_qpus > n_compute {
        return Err(DvqeError::Config(format!(
            "{m_qpus} QPUs cannot each hold a compute qubit out of {n_compute}"
        )));
    }
    let mut load = vec![0usize; m_qpus];
    for _ in 0..n_compute {
        let (slot, _) = load
            .iter()
            .enumerate()
            .min_by_key(|&(i, &l)| (l, i))
            .expect("m_qpus > 0");
        load[slot] += 1;
    }
    Ok(load)
}

impl Topology {
    /// Builds the layout from per-QPU compute-qubit counts.
    pub fn from_config(config: &[usize]) -> Result<Self> {
        if config.is_empty() {
            return Err(DvqeError::Config("QPU configuration is empty".into()));
        }
        if let Some(pos) = config.iter().position(|&c| c == 0) {
            return Err(DvqeError::Config(format!("QPU {pos} has no compute qubits")));
        }
        let mut qpus = Vec::with_capacity(config.len());
        let mut placement = Vec::new();
        let mut roles = Vec::new();
        let mut next = 0usize;
        for (qpu, &count) in config.iter().enumerate() {
            let compute: Vec<usize> = (next..next + count).collect();
            for (local, &g) in compute.iter().enumerate() {
                roles.push(QubitRole::Compute {
                    qpu,
                    local,
                    variable: placement.len(),
                });
                placement.push((qpu, g));
            }
            let comm = next + count;
            roles.push(QubitRole::Comm { qpu });
            qpus.push(Qpu {
                compute_global_indices: compute,
                comm_global_index: comm,
            });
            next = comm + 1;
        }
        Ok(Self {
            qpus,
            placement,
            roles,
        })
    }

    /// Like [`Topology::from_config`] but also checks the compute total
    /// against the problem size.
    pub fn for_problem(config: &[usize], n_vars: usize) -> Result<Self> {
        let total: usize = config.iter().sum();
        if total != n_vars {
            return Err(DvqeError::Config(format!(
                "QPU configuration {config:?} holds {total} compute qubits but the problem has {n_vars} variables"
            )));
        }
        Self::from_config(config)
    }

    pub fn qpus(&self) -> &[Qpu] {
        &self.qpus
    }

    pub fn n_qpus(&self) -> usize {
        self.qpus.len()
    }

    pub fn n_compute(&self) -> usize {
        self.placement.len()
    }

    pub fn n_total(&self) -> usize {
        self.roles.len()
    }

    pub fn config(&self) -> Vec<usize> {
        self.qpus.iter().map(Qpu::compute_count).collect()
    }

    pub fn map_compute_to_global(&self, variable: usize) -> Result<usize> {
        self.placement
            .get(variable)
            .map(|&(_, g)| g)
            .ok_or_else(|| DvqeError::Dimension(format!("variable {variable} out of range")))
    }

    pub fn qpu_of_variable(&self, variable: usize) -> Result<usize> {
        self.placement
            .get(variable)
            .map(|&(q, _)| q)
            .ok_or_else(|| DvqeError::Dimension(format!("variable {variable} out of range")))
    }

    pub fn comm_of(&self, qpu: usize) -> Result<usize> {
        self.qpus
            .get(qpu)
            .map(|q| q.comm_global_index)
            .ok_or_else(|| DvqeError::Dimension(format!("QPU {qpu} out of range")))
    }

    pub fn role(&self, global: usize) -> Option<QubitRole> {
        self.roles.get(global).copied()
    }

    /// Global indices of the compute qubits in variable order.
    pub fn compute_order(&self) -> Vec<usize> {
        self.placement.iter().map(|&(_, g)| g).collect()
    }

    pub fn comm_indices(&self) -> Vec<usize> {
        self.qpus.iter().map(|q| q.comm_global_index).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_allocate(6, 3).unwrap(), vec![2, 2, 2]);
        assert_eq!(greedy_allocate(5, 2).unwrap(), vec![3, 2]);
        assert_eq!(greedy_allocate(4, 1).unwrap(), vec![4]);
        assert!(matches!(greedy_allocate(2, 3), Err(DvqeError::Config(_))));
        assert!(greedy_allocate(2, 0).is_err());
    }

    #[test]
    fn scenario1_layout() {
        let t = Topology::from_config(&[3, 1, 1]).unwrap();
        assert_eq!(t.n_compute(), 5);
        assert_eq!(t.n_total(), 8);
        assert_eq!(t.comm_indices(), vec![3, 5, 7]);
        assert_eq!(t.map_compute_to_global(0).unwrap(), 0);
        assert_eq!(t.map_compute_to_global(3).unwrap(), 4);
        assert_eq!(t.comm_of(0).unwrap(), 3);
        assert_eq!(
            t.role(4),
            Some(QubitRole::Compute {
                qpu: 1,
                local: 0,
                variable: 3
            })
        );
        assert_eq!(t.role(7), Some(QubitRole::Comm { qpu: 2 }));
        assert!(t.map_compute_to_global(5).is_err());
        assert!(t.comm_of(3).is_err());
    }

    #[test]
    fn single_qpu_and_pairs() {
        let t = Topology::from_config(&[4]).unwrap();
        assert_eq!(t.n_total(), 5);
        assert_eq!(t.comm_indices(), vec![4]);

        let t = Topology::from_config(&[2, 2]).unwrap();
        assert_eq!(t.n_total(), 6);
        assert_eq!(t.map_compute_to_global(2).unwrap(), 3);
        assert_eq!(t.qpu_of_variable(2).unwrap(), 1);
        assert_eq!(
            t.role(3),
            Some(QubitRole::Compute {
                qpu: 1,
                local: 0,
                variable: 2
            })
        );
    }

    #[test]
    fn config_validation() {
        assert!(Topology::from_config(&[]).is_err());
        assert!(Topology::from_config(&[2, 0]).is_err());
        assert!(matches!(
            Topology::for_problem(&[2, 2], 5),
            Err(DvqeError::Config(_))
        ));
        assert!(Topology::for_problem(&[2, 3], 5).is_ok());
    }
}
