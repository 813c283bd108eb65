//! Diagonal Ising cost operator obtained from a QUBO through `x = (1 − z)/2`.
//!
//! Bit value 0 maps to spin `z = +1`. Qubit 0 is the most significant bit of
//! a basis index.

use std::collections::BTreeMap;

use crate::error::{DvqeError, Result};
use crate::qubo::{check_bits, QuboProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian {
    n: usize,
    fields: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    const_offset: f64,
}

impl IsingHamiltonian {
    pub fn new(
        fields: Vec<f64>,
        couplings: BTreeMap<(usize, usize), f64>,
        const_offset: f64,
    ) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return Err(DvqeError::Dimension(
                "hamiltonian needs at least one qubit".into(),
            ));
        }
        if let Some(&(i, j)) = couplings.keys().find(|&&(i, j)| !(i < j && j < n)) {
            return Err(DvqeError::Dimension(format!(
                "coupling key ({i}, {j}) must satisfy i < j < {n}"
            )));
        }
        Ok(Self {
            n,
            fields,
            couplings,
            const_offset,
        })
    }

    /// Substitutes `xᵢ = (1 − zᵢ)/2` into the (symmetric) QUBO and collects
    /// the Z, ZZ and identity coefficients.
    pub fn from_qubo(problem: &QuboProblem) -> Self {
        let n = problem.n();
        let mut fields = vec![0.0; n];
        let mut couplings = BTreeMap::new();
        let mut constant = problem.offset();
        for i in 0..n {
            let a = problem.quad(i, i) + problem.linear()[i];
            constant += a / 2.0;
            fields[i] -= a / 2.0;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let b = 2.0 * problem.quad(i, j);
                if b == 0.0 {
                    continue;
                }
                constant += b / 4.0;
                fields[i] -= b / 4.0;
                fields[j] -= b / 4.0;
                couplings.insert((i, j), b / 4.0);
            }
        }
        Self {
            n,
            fields,
            couplings,
            const_offset: constant,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn const_offset(&self) -> f64 {
        self.const_offset
    }

    /// `⟨x|H|x⟩` with `zᵢ = 1 − 2xᵢ`.
    pub fn energy_of_bitstring(&self, x: &[u8]) -> Result<f64> {
        check_bits(x, self.n)?;
        Ok(self.energy_with(|i| x[i] != 0))
    }

    fn energy_with(&self, is_one: impl Fn(usize) -> bool) -> f64 {
        let spin = |i: usize| if is_one(i) { -1.0 } else { 1.0 };
        let mut e = self.const_offset;
        for (i, h) in self.fields.iter().enumerate() {
            e += h * spin(i);
        }
        for (&(i, j), c) in &self.couplings {
            e += c * spin(i) * spin(j);
        }
        e
    }

    /// Energy of every computational basis state, indexed like a statevector.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n;
        (0..1usize << n)
            .map(|idx| self.energy_with(|i| (idx >> (n - 1 - i)) & 1 == 1))
            .collect()
    }

    /// Exact expectation over a normalised distribution on basis states.
    pub fn expectation(&self, probs: &[f64]) -> Result<f64> {
        let dim = 1usize << self.n;
        if probs.len() != dim {
            return Err(DvqeError::Dimension(format!(
                "expected {dim} probabilities, got {}",
                probs.len()
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 || probs.iter().any(|&p| p < 0.0) {
            return Err(DvqeError::Normalization { total });
        }
        let n = self.n;
        Ok(probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(idx, p)| p * self.energy_with(|i| (idx >> (n - 1 - i)) & 1 == 1))
            .sum())
    }
}
