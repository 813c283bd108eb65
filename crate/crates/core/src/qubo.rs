//! Dense QUBO instances, the unit-commitment penalty builder and the
//! exhaustive oracle.
//!
//! Bitstrings are `&[u8]` slices of 0/1 values; bit 0 is variable 0 and is
//! the most significant position when a bitstring is read as an integer.

use serde::{Deserialize, Serialize};

use crate::error::{DvqeError, Result};

/// Largest instance the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

/// Minimise `xᵀQx + qᵀx + offset` over binary `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n: usize,
    // row-major n×n, symmetric
    quad: Vec<f64>,
    linear: Vec<f64>,
    offset: f64,
}

impl QuboProblem {
    /// Builds a problem, replacing `Q` by `(Q + Qᵀ)/2`.
    pub fn new(quad: Vec<Vec<f64>>, linear: Vec<f64>, offset: f64) -> Result<Self> {
        let n = quad.len();
        if n == 0 {
            return Err(DvqeError::Dimension("Q must have at least one row".into()));
        }
        for (row, entries) in quad.iter().enumerate() {
            if entries.len() != n {
                return Err(DvqeError::Dimension(format!(
                    "Q row {row} has {} entries, expected {n}",
                    entries.len()
                )));
            }
        }
        if linear.len() != n {
            return Err(DvqeError::Dimension(format!(
                "q has {} entries, expected {n}",
                linear.len()
            )));
        }
        let mut sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sym[i * n + j] = 0.5 * (quad[i][j] + quad[j][i]);
            }
        }
        Ok(Self {
            n,
            quad: sym,
            linear,
            offset,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; n]; n], vec![0.0; n], 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quad(&self, i: usize, j: usize) -> f64 {
        self.quad[i * self.n + j]
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn quad_rows(&self) -> Vec<Vec<f64>> {
        self.quad.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `xᵀQx + qᵀx + offset`.
    pub fn cost(&self, x: &[u8]) -> Result<f64> {
        check_bits(x, self.n)?;
        Ok(self.cost_unchecked(x))
    }

    pub(crate) fn cost_unchecked(&self, x: &[u8]) -> f64 {
        let n = self.n;
        let mut total = self.offset;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            total += self.linear[i];
            let row = &self.quad[i * n..(i + 1) * n];
            for j in 0..n {
                if x[j] != 0 {
                    total += row[j];
                }
            }
        }
        total
    }

    /// Exhaustive minimisation. Ties go to the lexicographically smallest
    /// bitstring.
    pub fn brute_force(&self) -> Result<(Vec<u8>, f64)> {
        let n = self.n;
        if n > BRUTE_FORCE_MAX_VARS {
            return Err(DvqeError::Capacity(format!(
                "brute force is limited to {BRUTE_FORCE_MAX_VARS} variables, got {n}"
            )));
        }
        // Gray-code walk with O(n) incremental updates. Candidates close to
        // the running best are re-evaluated exactly so that ties and the
        // reported cost do not depend on accumulated rounding.
        let scale = self
            .quad
            .iter()
            .chain(&self.linear)
            .fold(self.offset.abs(), |acc, v| acc + v.abs());
        let tol = 1e-9 * scale.max(1.0);

        let mut x = vec![0u8; n];
        // field[k] = Σ_{j≠k} Q_kj x_j
        let mut field = vec![0.0; n];
        let mut running = self.offset;
        let mut best_x = x.clone();
        let mut best_cost = self.cost_unchecked(&x);

        let total: u64 = 1 << n;
        for step in 1..total {
            let pos = step.trailing_zeros() as usize;
            let k = n - 1 - pos;
            let diag = self.quad[k * n + k];
            let rise = diag + self.linear[k] + 2.0 * field[k];
            let sign = if x[k] == 0 { 1.0 } else { -1.0 };
            running += sign * rise;
            x[k] ^= 1;
            let row = &self.quad[k * n..(k + 1) * n];
            for (j, f) in field.iter_mut().enumerate() {
                if j != k {
                    *f += sign * row[j];
                }
            }
            if running <= best_cost + tol {
                let exact = self.cost_unchecked(&x);
                if exact < best_cost || (exact == best_cost && x < best_x) {
                    best_cost = exact;
                    best_x.copy_from_slice(&x);
                }
            }
        }
        Ok((best_x, best_cost))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProblemFile = serde_json::from_str(text).map_err(|e| {
            DvqeError::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        let n = raw.quad.len();
        if n == 0 {
            return Err(DvqeError::parse("Q", "matrix is empty"));
        }
        for (row, entries) in raw.quad.iter().enumerate() {
            if entries.len() != n {
                return Err(DvqeError::parse(
                    format!("Q row {row}"),
                    format!("found {} entries, matrix must be {n}x{n}", entries.len()),
                ));
            }
        }
        if raw.linear.len() != n {
            return Err(DvqeError::parse(
                "q",
                format!("found {} entries, expected {n}", raw.linear.len()),
            ));
        }
        Self::new(raw.quad, raw.linear, raw.offset.unwrap_or(0.0))
    }

    pub fn to_json(&self) -> String {
        let raw = ProblemFile {
            quad: self.quad_rows(),
            linear: self.linear.clone(),
            offset: Some(self.offset),
        };
        serde_json::to_string_pretty(&raw).expect("problem serialises")
    }
}

pub(crate) fn check_bits(x: &[u8], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(DvqeError::Dimension(format!(
            "bitstring has length {}, expected {n}",
            x.len()
        )));
    }
    if let Some(pos) = x.iter().position(|&b| b > 1) {
        return Err(DvqeError::Dimension(format!(
            "bitstring entry {pos} is {} (expected 0 or 1)",
            x[pos]
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    #[serde(rename = "Q")]
    quad: Vec<Vec<f64>>,
    #[serde(rename = "q")]
    linear: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<f64>,
}

/// Unit commitment with fixed generation levels and a penalised demand
/// constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcInstance {
    pub costs: Vec<f64>,
    pub powers: Vec<f64>,
    pub demand: f64,
    pub penalty_lambda: f64,
    #[serde(rename = "epsilon_D", default)]
    pub epsilon_d: f64,
}

impl UcInstance {
    pub fn new(costs: Vec<f64>, powers: Vec<f64>, demand: f64, penalty_lambda: f64) -> Result<Self> {
        let uc = Self {
            costs,
            powers,
            demand,
            penalty_lambda,
            epsilon_d: 0.0,
        };
        uc.validate()?;
        Ok(uc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.costs.is_empty() {
            return Err(DvqeError::Config("at least one generator is required".into()));
        }
        if self.costs.len() != self.powers.len() {
            return Err(DvqeError::Dimension(format!(
                "{} costs but {} powers",
                self.costs.len(),
                self.powers.len()
            )));
        }
        if !(self.penalty_lambda > 0.0) {
            return Err(DvqeError::Config("penalty_lambda must be positive".into()));
        }
        if !(self.epsilon_d >= 0.0) {
            return Err(DvqeError::Config("epsilon_D must be non-negative".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let uc: UcInstance = serde_json::from_str(text).map_err(|e| {
            DvqeError::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        uc.validate()?;
        Ok(uc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialises")
    }

    pub fn power_sum(&self, x: &[u8]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .filter(|(_, &b)| b != 0)
            .map(|(p, _)| p)
            .sum()
    }

    /// `costsᵀx + λ(powersᵀx − D)²` evaluated directly.
    pub fn penalized_objective(&self, x: &[u8]) -> f64 {
        let linear: f64 = self
            .costs
            .iter()
            .zip(x)
            .filter(|(_, &b)| b != 0)
            .map(|(c, _)| c)
            .sum();
        let gap = self.power_sum(x) - self.demand;
        linear + self.penalty_lambda * gap * gap
    }
}

/// Expands the demand penalty into QUBO form. `λ pᵢ²` stays on the diagonal.
pub fn build_uc_qubo(uc: &UcInstance) -> Result<QuboProblem> {
    uc.validate()?;
    let n = uc.costs.len();
    let lambda = uc.penalty_lambda;
    let quad: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| lambda * uc.powers[i] * uc.powers[j]).collect())
        .collect();
    let linear: Vec<f64> = uc
        .costs
        .iter()
        .zip(&uc.powers)
        .map(|(c, p)| c - 2.0 * lambda * uc.demand * p)
        .collect();
    QuboProblem::new(quad, linear, lambda * uc.demand * uc.demand)
}

/// Iterates all bitstrings of length `n` in lexicographic order.
pub fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u64..(1u64 << n)).map(move |idx| index_to_bits(idx as usize, n))
}

/// Basis index → bitstring, bit 0 most significant.
pub fn index_to_bits(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((idx >> (n - 1 - i)) & 1) as u8).collect()
}

pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}
