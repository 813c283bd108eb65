//! Dense statevector engine.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so basis
//! index `0b100` on three qubits is `|1⟩⊗|0⟩⊗|0⟩`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DvqeError, Result};

pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// 2×2 unitary acting on a single tensor factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary1Q([[Complex64; 2]; 2]);

impl Unitary1Q {
    /// Checks `U†U = I` to 1e-12.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let u = Self(m);
        let prod = u.adjoint().mul(&u);
        for (r, row) in prod.0.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let target = if r == c { ONE } else { ZERO };
                if (v - target).norm() > 1e-12 {
                    return Err(DvqeError::InvalidGate("matrix is not unitary".into()));
                }
            }
        }
        Ok(u)
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    fn mul(&self, other: &Self) -> Self {
        let a = &self.0;
        let b = &other.0;
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self(out)
    }

    pub fn rx(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let mis = Complex64::new(0.0, -s);
        Self([[Complex64::new(c, 0.0), mis], [mis, Complex64::new(c, 0.0)]])
    }

    /// `exp(−iθY/2)`.
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    /// `exp(−iθZ/2)`.
    pub fn rz(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self([[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]])
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self([[h, h], [h, -h]])
    }

    pub fn pauli_x() -> Self {
        Self([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self([[ONE, ZERO], [ZERO, -ONE]])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes, normalising them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(DvqeError::Dimension(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_capacity(n_qubits)?;
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(DvqeError::Dimension(
                "amplitudes have zero or non-finite norm".into(),
            ));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(DvqeError::InvalidGate(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(DvqeError::InvalidGate(format!(
                "two-qubit gate on repeated qubit {a}"
            )));
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, qubit: usize, u: &Unitary1Q) -> Result<()> {
        self.check_qubit(qubit)?;
        let [[a, b], [c, d]] = u.0;
        let stride = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (v0, v1) = (*x, *y);
                *x = a * v0 + b * v1;
                *y = c * v0 + d * v1;
            }
        }
        Ok(())
    }

    /// Real rotation fast path, `RY(θ)`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (theta / 2.0).sin_cos();
        let stride = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (v0, v1) = (*x, *y);
                *x = v0 * c - v1 * s;
                *y = v0 * s + v1 * c;
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let stride = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (v0, v1) = (*x, *y);
                *x = (v0 + v1) * r;
                *y = (v0 - v1) * r;
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.swap_with_slice(hi);
        }
        Ok(())
    }

    pub fn apply_z(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.mask(qubit);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            for a in &mut block[stride..] {
                *a = -*a;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let cm = self.mask(control);
        let tm = self.mask(target);
        if cm > tm {
            for block in self.amps.chunks_exact_mut(2 * cm) {
                for pair in block[cm..].chunks_exact_mut(2 * tm) {
                    let (lo, hi) = pair.split_at_mut(tm);
                    lo.swap_with_slice(hi);
                }
            }
        } else {
            for block in self.amps.chunks_exact_mut(2 * tm) {
                let (lo, hi) = block.split_at_mut(tm);
                for (l, h) in lo.chunks_exact_mut(2 * cm).zip(hi.chunks_exact_mut(2 * cm)) {
                    l[cm..].swap_with_slice(&mut h[cm..]);
                }
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        let (outer, inner) = {
            let (ma, mb) = (self.mask(a), self.mask(b));
            (ma.max(mb), ma.min(mb))
        };
        for block in self.amps.chunks_exact_mut(2 * outer) {
            for sub in block[outer..].chunks_exact_mut(2 * inner) {
                for amp in &mut sub[inner..] {
                    *amp = -*amp;
                }
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projective Z-basis measurement of one qubit; collapses and
    /// renormalises the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.prob_one(qubit)?;
        let outcome = u8::from(rng.gen::<f64>() < p1);
        let keep_prob = if outcome == 1 { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep_prob.sqrt();
        let m = self.mask(qubit);
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if (idx & m != 0) == (outcome == 1) {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(outcome)
    }

    /// Draws `shots` basis indices by inverse CDF; counts keyed by index.
    pub fn sample(&self, shots: usize, seed: u64) -> BTreeMap<usize, u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(shots, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> BTreeMap<usize, u64> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let last_nonzero = self.amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
            *counts.entry(idx).or_insert(0) += 1;
        }
        counts
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(DvqeError::Dimension(format!(
                "states have {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Pure state on `keep` (in the given order), conditioned on every other
    /// qubit reading 0.
    ///
    /// With `expect_rest_zero`, more than 1e-9 probability on discarded
    /// qubits is reported as an [`DvqeError::EntanglementLeak`]. Without it the
    /// state is conditioned on the most probable configuration of the
    /// discarded qubits instead.
    pub fn extract_subspace(&self, keep: &[usize], expect_rest_zero: bool) -> Result<StateVector> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        for &q in keep {
            self.check_qubit(q)?;
            if std::mem::replace(&mut seen[q], true) {
                return Err(DvqeError::Dimension(format!("qubit {q} listed twice in keep")));
            }
        }
        if keep.is_empty() {
            return Err(DvqeError::Dimension("keep list is empty".into()));
        }
        let keep_mask: usize = keep.iter().map(|&q| self.mask(q)).sum();
        let rest_mask = (self.amps.len() - 1) & !keep_mask;

        let rest_value = if expect_rest_zero {
            let residual: f64 = self
                .amps
                .iter()
                .enumerate()
                .filter(|(idx, _)| idx & rest_mask != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            if residual >= 1e-9 {
                return Err(DvqeError::EntanglementLeak { residual });
            }
            0
        } else {
            let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
            for (idx, a) in self.amps.iter().enumerate() {
                *mass.entry(idx & rest_mask).or_insert(0.0) += a.norm_sqr();
            }
            mass.into_iter()
                .fold(
                    (0usize, -1.0f64),
                    |best, (k, m)| if m > best.1 { (k, m) } else { best },
                )
                .0
        };

        let k = keep.len();
        let mut out = vec![ZERO; 1 << k];
        for (idx, a) in self.amps.iter().enumerate() {
            if idx & rest_mask != rest_value {
                continue;
            }
            let mut sub = 0usize;
            for &q in keep {
                sub = (sub << 1) | usize::from(idx & self.mask(q) != 0);
            }
            out[sub] = *a;
        }
        if k == n && keep.iter().enumerate().all(|(i, &q)| i == q) {
            return Ok(self.clone());
        }
        StateVector::from_amplitudes_any(out)
    }

    // like from_amplitudes but allows a single qubit (dim 2) and reports an
    // empty projection as a leak
    fn from_amplitudes_any(amps: Vec<Complex64>) -> Result<StateVector> {
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(DvqeError::EntanglementLeak { residual: 1.0 });
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector {
            n_qubits,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }
}

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(DvqeError::Capacity(format!(
            "statevector supports 1..={MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn approx_state(a: &StateVector, expected: &[Complex64], tol: f64) {
        assert_eq!(a.amplitudes().len(), expected.len());
        for (x, y) in a.amplitudes().iter().zip(expected) {
            assert!((x - y).norm() < tol, "{x} vs {y}");
        }
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis(n: usize, idx: usize) -> StateVector {
        let mut amps = vec![ZERO; 1 << n];
        amps[idx] = ONE;
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn two_qubit_gates_on_every_pair() {
        let n = 4;
        let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                for idx in 0..1usize << n {
                    let mut s = basis(n, idx);
                    s.apply_cnot(a, b).unwrap();
                    let flipped = if bit(idx, a) == 1 {
                        idx ^ (1 << (n - 1 - b))
                    } else {
                        idx
                    };
                    assert_eq!(s.amplitudes()[flipped], ONE, "cnot({a},{b}) on {idx:04b}");

                    let mut s = basis(n, idx);
                    s.apply_cz(a, b).unwrap();
                    let sign = if bit(idx, a) & bit(idx, b) == 1 { -1.0 } else { 1.0 };
                    assert_eq!(s.amplitudes()[idx], c(sign), "cz({a},{b}) on {idx:04b}");
                }
            }
            for idx in 0..1usize << n {
                let mut s = basis(n, idx);
                s.apply_z(a).unwrap();
                let sign = if bit(idx, a) == 1 { -1.0 } else { 1.0 };
                assert_eq!(s.amplitudes()[idx], c(sign));
            }
        }
    }

    #[test]
    fn zero_state() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = StateVector::zero(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], ONE);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(matches!(StateVector::zero(0), Err(DvqeError::Capacity(_))));
        assert!(matches!(StateVector::zero(25), Err(DvqeError::Capacity(_))));
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_1q(0, &Unitary1Q::ry(0.0)).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_1q(0, &Unitary1Q::hadamard()).unwrap();
        approx_state(&s, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_1q(0, &Unitary1Q::ry(PI)).unwrap();
        assert!((s.probabilities()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fast_paths_match_matrix_form() {
        let mut a = StateVector::from_amplitudes(vec![
            c(0.3),
            Complex64::new(0.1, 0.4),
            c(-0.5),
            Complex64::new(0.2, -0.6),
        ])
        .unwrap();
        let mut b = a.clone();
        a.apply_ry(1, 0.77).unwrap();
        b.apply_1q(1, &Unitary1Q::ry(0.77)).unwrap();
        approx_state(&a, b.amplitudes(), 1e-15);
        a.apply_h(0).unwrap();
        b.apply_1q(0, &Unitary1Q::hadamard()).unwrap();
        approx_state(&a, b.amplitudes(), 1e-15);
        a.apply_x(1).unwrap();
        b.apply_1q(1, &Unitary1Q::pauli_x()).unwrap();
        approx_state(&a, b.amplitudes(), 1e-15);
        a.apply_z(0).unwrap();
        b.apply_1q(0, &Unitary1Q::pauli_z()).unwrap();
        approx_state(&a, b.amplitudes(), 1e-15);
    }

    #[test]
    fn rotation_constructors_are_unitary() {
        for u in [
            Unitary1Q::rx(0.3),
            Unitary1Q::ry(1.7),
            Unitary1Q::rz(-2.2),
            Unitary1Q::hadamard(),
            Unitary1Q::pauli_x(),
            Unitary1Q::pauli_z(),
        ] {
            assert!(Unitary1Q::new(*u.matrix()).is_ok());
        }
        assert!(Unitary1Q::new([[ONE, ONE], [ZERO, ONE]]).is_err());
    }

    #[test]
    fn cnot_and_bell() {
        // |10⟩ → |11⟩
        let mut s = StateVector::zero(2).unwrap();
        s.apply_x(0).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], ONE);

        let mut s = StateVector::zero(2).unwrap();
        s.apply_h(0).unwrap();
        s.apply_cnot(0, 1).unwrap();
        approx_state(&s, &[c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)], 1e-15);
        let p = s.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);

        assert!(matches!(s.apply_cnot(1, 1), Err(DvqeError::InvalidGate(_))));
        assert!(matches!(s.apply_cz(0, 2), Err(DvqeError::InvalidGate(_))));
    }

    #[test]
    fn measurement_collapses() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_h(0).unwrap();
        s.apply_cnot(0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = s.measure(0, &mut rng).unwrap();
        let idx = if m == 1 { 3 } else { 0 };
        assert!((s.probabilities()[idx] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_point_mass_and_bell() {
        let s = StateVector::zero(3).unwrap();
        let h = s.sample(100, 1);
        assert_eq!(h.len(), 1);
        assert_eq!(h[&0], 100);

        let mut s = StateVector::zero(2).unwrap();
        s.apply_h(0).unwrap();
        s.apply_cnot(0, 1).unwrap();
        let h = s.sample(4000, 9);
        assert!(h.keys().all(|&k| k == 0 || k == 3));
        assert_eq!(h.values().sum::<u64>(), 4000);
        assert_eq!(h, s.sample(4000, 9));
    }

    #[test]
    fn fidelity_basics() {
        let z = StateVector::zero(1).unwrap();
        let mut one = z.clone();
        one.apply_x(0).unwrap();
        assert_eq!(fidelity(&z, &z).unwrap(), 1.0);
        assert_eq!(fidelity(&z, &one).unwrap(), 0.0);
        assert!(fidelity(&z, &StateVector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn subspace_extraction() {
        // |0⟩ ⊗ ψ where ψ lives on qubits 1,2
        let mut s = StateVector::zero(3).unwrap();
        s.apply_ry(1, 0.4).unwrap();
        s.apply_h(2).unwrap();
        let mut psi = StateVector::zero(2).unwrap();
        psi.apply_ry(0, 0.4).unwrap();
        psi.apply_h(1).unwrap();
        let sub = s.extract_subspace(&[1, 2], true).unwrap();
        approx_state(&sub, psi.amplitudes(), 1e-15);

        // reversed order swaps the bit order
        let rev = s.extract_subspace(&[2, 1], true).unwrap();
        let a = psi.amplitudes();
        approx_state(&rev, &[a[0], a[2], a[1], a[3]], 1e-15);

        assert_eq!(s.extract_subspace(&[0, 1, 2], true).unwrap(), s);

        s.apply_h(0).unwrap();
        assert!(matches!(
            s.extract_subspace(&[1, 2], true),
            Err(DvqeError::EntanglementLeak { .. })
        ));
        // conditioned on the most likely value of the dropped qubit
        let cond = s.extract_subspace(&[1, 2], false).unwrap();
        assert!((fidelity(&cond, &psi).unwrap() - 1.0).abs() < 1e-12);
    }
}
