// SPDX-License-Identifier: Apache-2.0

//! Pure and mixed states on `L` qubits.

use ndarray::{Array1, Array2};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, apply_local, conjugate_in_place, hermiticity_error, unitarity_error, CMatrix, CVector};
use crate::noise::KrausChannel;
use crate::observable::{ObservableSum, Pauli, PauliString};
use crate::scalar::{c, cr, Real, C};

fn check_unitary<T: Real>(gate: &CMatrix<T>) -> Result<()> {
    let err = unitarity_error(gate);
    if err > T::tol(1e-10) {
        return Err(Error::Validation(format!("gate is not unitary (deviation {err})")));
    }
    Ok(())
}

fn num_qubits_for(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(invalid(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: CVector<T>,
    num_qubits: usize,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>`
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = Array1::zeros(1 << num_qubits);
        amplitudes[index] = cr(T::one());
        Self { amplitudes, num_qubits }
    }

    /// Wraps raw amplitudes; the vector must be normalized.
    pub fn from_amplitudes(amplitudes: CVector<T>) -> Result<Self> {
        let num_qubits = num_qubits_for(amplitudes.len())?;
        let s = Self { amplitudes, num_qubits };
        let dev = (s.norm() - T::one()).abs();
        if dev > T::tol(1e-10) {
            return Err(Error::Validation(format!("state norm off by {dev}")));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `U ψ` with `U` checked for unitarity.
    pub fn apply_unitary(&self, gate: &CMatrix<T>, targets: &[usize]) -> Result<Self> {
        check_unitary(gate)?;
        let mut out = self.clone();
        out.apply_in_place(gate, targets)?;
        Ok(out)
    }

    /// `ψ <- G ψ` without the unitarity check.
    pub fn apply_in_place(&mut self, gate: &CMatrix<T>, targets: &[usize]) -> Result<()> {
        linalg::validate_local(&gate.view(), targets, self.num_qubits)?;
        apply_local(&mut self.amplitudes.view_mut(), &gate.view(), targets);
        Ok(())
    }

    /// Multiply by a full `2^L x 2^L` matrix.
    pub fn apply_full(&self, matrix: &CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != self.dim() || matrix.ncols() != self.dim() {
            return Err(invalid("matrix does not match state dimension"));
        }
        Ok(Self {
            amplitudes: matrix.dot(&self.amplitudes),
            num_qubits: self.num_qubits,
        })
    }

    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        if self.dim() != other.dim() {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(C::default(), |acc, (a, b)| acc + a.conj() * *b))
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        let n = self.dim();
        let mut rho = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                rho[[i, j]] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            entries: rho,
            num_qubits: self.num_qubits,
        }
    }

    pub fn expectation(&self, obs: &ObservableSum<T>) -> Result<T> {
        obs.check_qubits(self.num_qubits)?;
        let mut acc = C::<T>::default();
        for term in obs.terms() {
            acc = acc + cr(term.coefficient()) * pauli_expectation_state(self, term);
        }
        debug_assert!(acc.im.abs() < T::tol(1e-10) * T::lit(obs.terms().len().max(1) as f64));
        Ok(acc.re)
    }
}

/// `|<ψ₁|ψ₂>|`
pub fn fidelity_overlap<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    Ok(a.inner(b)?.norm().min(T::one()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    entries: CMatrix<T>,
    num_qubits: usize,
}

impl<T: Real> DensityMatrix<T> {
    pub fn from_matrix(entries: CMatrix<T>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(invalid("density matrix must be square"));
        }
        let num_qubits = num_qubits_for(entries.nrows())?;
        let herm = hermiticity_error(&entries);
        if herm > T::tol(1e-10) {
            return Err(Error::Validation(format!("not Hermitian (deviation {herm})")));
        }
        let rho = Self { entries, num_qubits };
        let tr = (rho.trace() - T::one()).abs();
        if tr > T::tol(1e-10) {
            return Err(Error::Validation(format!("trace off by {tr}")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut entries = linalg::identity(dim);
        entries.mapv_inplace(|z| z / cr(T::lit(dim as f64)));
        Self { entries, num_qubits }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.entries[[i, i]].re).sum()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    /// `U ρ U†` with `U` checked for unitarity.
    pub fn apply_unitary(&self, gate: &CMatrix<T>, targets: &[usize]) -> Result<Self> {
        check_unitary(gate)?;
        let mut out = self.clone();
        out.conjugate_in_place(gate, targets)?;
        Ok(out)
    }

    pub(crate) fn conjugate_in_place(&mut self, gate: &CMatrix<T>, targets: &[usize]) -> Result<()> {
        linalg::validate_local(&gate.view(), targets, self.num_qubits)?;
        conjugate_in_place(&mut self.entries, gate, targets);
        Ok(())
    }

    /// `ρ <- Σ_k E_k ρ E_k†` on one qubit.
    pub fn apply_kraus(&self, channel: &KrausChannel<T>, target: usize) -> Result<Self> {
        let report = channel.validate();
        if !report.passed {
            return Err(Error::Validation(report.message));
        }
        let mut out = self.clone();
        out.apply_kraus_in_place(channel, target)?;
        out.debug_check();
        Ok(out)
    }

    pub(crate) fn apply_kraus_in_place(&mut self, channel: &KrausChannel<T>, target: usize) -> Result<()> {
        if target >= self.num_qubits {
            return Err(invalid(format!("target {target} out of range")));
        }
        let ops = channel.operators();
        if ops.len() == 1 {
            conjugate_in_place(&mut self.entries, &ops[0], &[target]);
        } else {
            let mut acc: CMatrix<T> = Array2::zeros(self.entries.raw_dim());
            for e in ops {
                let mut term = self.entries.clone();
                conjugate_in_place(&mut term, e, &[target]);
                acc = acc + term;
            }
            self.entries = acc;
        }
        Ok(())
    }

    pub(crate) fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let min = self.eigenvalues().into_iter().fold(T::infinity(), T::min);
            debug_assert!(min >= -T::tol(1e-8), "density matrix lost positivity: {min}");
        }
    }

    pub fn expectation(&self, obs: &ObservableSum<T>) -> Result<T> {
        obs.check_qubits(self.num_qubits)?;
        let mut acc = C::<T>::default();
        for term in obs.terms() {
            acc = acc + cr(term.coefficient()) * pauli_expectation_density(self, term);
        }
        debug_assert!(acc.im.abs() < T::tol(1e-10) * T::lit(obs.terms().len().max(1) as f64));
        Ok(acc.re)
    }
}

/// `P|b> = phase(b) |b ^ flip>` for the unit Pauli string.
fn pauli_action<T: Real>(p: &PauliString<T>) -> (usize, impl Fn(usize) -> C<T> + '_) {
    let flip = p.flip_mask();
    let phase = move |b: usize| {
        let mut ph = cr(T::one());
        for (q, f) in p.factors().iter().enumerate() {
            let bit = (b >> q) & 1;
            match f {
                Pauli::I | Pauli::X => {}
                Pauli::Z => {
                    if bit == 1 {
                        ph = -ph;
                    }
                }
                // Y|0> = i|1>, Y|1> = -i|0>
                Pauli::Y => {
                    ph = ph
                        * if bit == 0 {
                            c(T::zero(), T::one())
                        } else {
                            c(T::zero(), -T::one())
                        };
                }
            }
        }
        ph
    };
    (flip, phase)
}

fn pauli_expectation_state<T: Real>(psi: &StateVector<T>, p: &PauliString<T>) -> C<T> {
    let (flip, phase) = pauli_action(p);
    let a = &psi.amplitudes;
    (0..a.len()).fold(C::default(), |acc, b| acc + a[b ^ flip].conj() * phase(b) * a[b])
}

fn pauli_expectation_density<T: Real>(rho: &DensityMatrix<T>, p: &PauliString<T>) -> C<T> {
    let (flip, phase) = pauli_action(p);
    let m = &rho.entries;
    (0..m.nrows()).fold(C::default(), |acc, b| acc + m[[b, b ^ flip]] * phase(b))
}

/// Estimate `<P>` for a single Pauli string from `shots` projective
/// measurements in its eigenbasis. Deterministic for a fixed seed.
pub fn sample_expectation<T: Real>(rho: &DensityMatrix<T>, obs: &PauliString<T>, shots: u64, seed: u64) -> Result<T> {
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    if obs.num_qubits() != rho.num_qubits {
        return Err(invalid("observable and state disagree on qubit count"));
    }
    // rotate each measured qubit into the Z basis
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = linalg::from_rows(&[&[cr(T::lit(h)), cr(T::lit(h))], &[cr(T::lit(h)), cr(T::lit(-h))]]);
    // H S† maps the Y eigenbasis onto the Z eigenbasis
    let y_to_z = linalg::from_rows(&[
        &[cr(T::lit(h)), c(T::zero(), T::lit(-h))],
        &[cr(T::lit(h)), c(T::zero(), T::lit(h))],
    ]);
    let mut rotated = rho.clone();
    let mut parity_mask = 0usize;
    for (q, f) in obs.factors().iter().enumerate() {
        match f {
            Pauli::I => continue,
            Pauli::X => rotated.conjugate_in_place(&hadamard, &[q])?,
            Pauli::Y => rotated.conjugate_in_place(&y_to_z, &[q])?,
            Pauli::Z => {}
        }
        parity_mask |= 1 << q;
    }
    let probs: Vec<f64> = (0..rotated.dim())
        .map(|i| rotated.entries[[i, i]].re.as_f64().max(0.0))
        .collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Validation(format!("bad outcome distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum: i64 = 0;
    for _ in 0..shots {
        let outcome = dist.sample(&mut rng);
        if (outcome & parity_mask).count_ones().is_multiple_of(2) {
            sum += 1;
        } else {
            sum -= 1;
        }
    }
    Ok(obs.coefficient() * T::lit(sum as f64 / shots as f64))
}

/// Shot estimate of a full observable; each term gets its own seed stream.
pub fn sample_observable<T: Real>(rho: &DensityMatrix<T>, obs: &ObservableSum<T>, shots: u64, seed: u64) -> Result<T> {
    let mut total = T::zero();
    for (i, term) in obs.terms().iter().enumerate() {
        if term.is_identity() {
            total = total + term.coefficient();
            continue;
        }
        let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
        total = total + sample_expectation(rho, term, shots, s)?;
    }
    Ok(total)
}
