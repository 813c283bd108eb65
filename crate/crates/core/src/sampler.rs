//! Shot sampling of a trained ansatz and minimum-energy solution selection.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{DvqeError, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::qubo::{bits_to_string, UcInstance};
use crate::trainer::{project_index, Ansatz};

/// Counts keyed by compute bitstring (`'0'`/`'1'`, variable 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Histogram {
    n: usize,
    counts: BTreeMap<String, u64>,
}

impl Histogram {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, bits: &[u8], count: u64) -> Result<()> {
        if bits.len() != self.n {
            return Err(DvqeError::Dimension(format!(
                "bitstring of length {} in a histogram over {} bits",
                bits.len(),
                self.n
            )));
        }
        *self.counts.entry(bits_to_string(bits)).or_insert(0) += count;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Support in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        self.counts.keys().map(|k| k.bytes().map(|b| b - b'0').collect())
    }

    /// JSON object, keys sorted.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.counts).expect("histogram serialises")
    }
}

/// Demand filter `|pᵀz − D| ≤ ε_D`.
#[derive(Debug, Clone, PartialEq)]
pub struct UcFilter {
    pub powers: Vec<f64>,
    pub demand: f64,
    pub epsilon_d: f64,
}

impl UcFilter {
    pub fn from_instance(uc: &UcInstance) -> Self {
        Self {
            powers: uc.powers.clone(),
            demand: uc.demand,
            epsilon_d: uc.epsilon_d,
        }
    }

    pub fn accepts(&self, z: &[u8]) -> bool {
        let supplied: f64 = self
            .powers
            .iter()
            .zip(z)
            .filter(|(_, &b)| b != 0)
            .map(|(p, _)| p)
            .sum();
        (supplied - self.demand).abs() <= self.epsilon_d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub shots: usize,
    pub uc_filter: Option<UcFilter>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            shots: 4000,
            uc_filter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Feasible {
        z: Vec<u8>,
        cost: f64,
    },
    /// Nothing in the support passed the filter; carries the unfiltered best.
    Infeasible {
        best_unfiltered: (Vec<u8>, f64),
    },
}

impl Selection {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Selection::Feasible { .. })
    }

    pub fn bitstring(&self) -> &[u8] {
        match self {
            Selection::Feasible { z, .. } => z,
            Selection::Infeasible { best_unfiltered } => &best_unfiltered.0,
        }
    }

    pub fn cost(&self) -> f64 {
        match self {
            Selection::Feasible { cost, .. } => *cost,
            Selection::Infeasible { best_unfiltered } => best_unfiltered.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub z: Vec<u8>,
    pub cost: f64,
    pub feasible: bool,
    pub shots: u64,
}

impl SolutionReport {
    pub fn new(selection: &Selection, shots: u64) -> Self {
        Self {
            z: selection.bitstring().to_vec(),
            cost: selection.cost(),
            feasible: selection.is_feasible(),
            shots,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Runs the ansatz once, draws `shots` samples and projects them onto the
/// compute qubits. A sample with any comm qubit set is a protocol violation.
pub fn execute_and_sample(ansatz: &Ansatz, theta: &[f64], shots: usize, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(DvqeError::Config("shots must be at least 1".into()));
    }
    let (state, readout) = ansatz.execute(theta)?;
    let n_total = state.n_qubits();
    let compute_mask: usize = readout.iter().map(|&g| 1usize << (n_total - 1 - g)).sum();
    let mut hist = Histogram::new(readout.len());
    for (idx, count) in state.sample(shots, seed) {
        if idx & !compute_mask != 0 {
            return Err(DvqeError::ProtocolViolation(format!(
                "sampled basis state {idx:#b} has a communication qubit set"
            )));
        }
        let sub = project_index(idx, n_total, &readout);
        let bits = crate::qubo::index_to_bits(sub, readout.len());
        hist.add(&bits, count)?;
    }
    Ok(hist)
}

/// Minimum-energy bitstring over the (optionally filtered) support; ties go
/// to the lexicographically smallest bitstring. Counts only matter through
/// support membership.
pub fn select_solution(hist: &Histogram, h: &IsingHamiltonian, cfg: &SelectionConfig) -> Result<Selection> {
    if hist.is_empty() {
        return Err(DvqeError::Config("cannot select from an empty histogram".into()));
    }
    if hist.n() != h.n() {
        return Err(DvqeError::Dimension(format!(
            "histogram over {} bits, hamiltonian over {}",
            hist.n(),
            h.n()
        )));
    }
    let mut best_any: Option<(Vec<u8>, f64)> = None;
    let mut best_ok: Option<(Vec<u8>, f64)> = None;
    // support is iterated lexicographically, so strict < keeps the smallest on ties
    for z in hist.support() {
        let e = h.energy_of_bitstring(&z)?;
        if best_any.as_ref().is_none_or(|(_, b)| e < *b) {
            best_any = Some((z.clone(), e));
        }
        let ok = cfg.uc_filter.as_ref().is_none_or(|f| f.accepts(&z));
        if ok && best_ok.as_ref().is_none_or(|(_, b)| e < *b) {
            best_ok = Some((z, e));
        }
    }
    Ok(match best_ok {
        Some((z, cost)) => Selection::Feasible { z, cost },
        None => Selection::Infeasible {
            best_unfiltered: best_any.expect("non-empty histogram"),
        },
    })
}
