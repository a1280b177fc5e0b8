// SPDX-License-Identifier: Apache-2.0

//! Circuit representation, decompositions, executors and gate tallies.
//!
//! Circuits serialize to a line-oriented text format:
//!
//! ```text
//! QUBITS 2
//! RY 0 3.0e-1 @encode
//! CNOT 0 1
//! CHECKR 0 1 1e-1
//! U2 0 1 <16 complex entries as re im pairs, row-major>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. A trailing
//! `@label` token tags the gate.

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{GateKind, GateOp};
use crate::linalg::{self, CMatrix};
use crate::noise::ChannelKind;
use crate::scalar::{c, Real};
use crate::state::{DensityMatrix, StateVector};

/// Label attached to input-encoding gates.
pub const ENCODE_LABEL: &str = "encode";

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T: Real> {
    num_qubits: usize,
    ops: Vec<GateOp<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp<T>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: GateOp<T>) -> Result<()> {
        if let Some(t) = op.targets.iter().find(|&&t| t >= self.num_qubits) {
            return Err(invalid(format!(
                "gate target {t} out of range for {} qubits",
                self.num_qubits
            )));
        }
        let arity = if op.kind.is_single_qubit() { 1 } else { 2 };
        if op.targets.len() != arity {
            return Err(invalid(format!("{:?} needs {arity} targets", op.kind)));
        }
        let nparams = match op.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cnot => 0,
            GateKind::TwoQubitUnitary => op.params.len(),
        };
        if op.params.len() != nparams || op.params.iter().any(|p| !p.is_finite()) {
            return Err(invalid(format!("{:?} has bad parameters", op.kind)));
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit<T>) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(invalid("cannot append circuits of different width"));
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(())
    }

    pub fn then(mut self, other: &Circuit<T>) -> Result<Self> {
        self.append(other)?;
        Ok(self)
    }

    pub fn repeated(&self, times: usize) -> Self {
        let mut out = Circuit::new(self.num_qubits);
        for _ in 0..times {
            out.ops.extend(self.ops.iter().cloned());
        }
        out
    }

    pub fn dagger(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            ops: self.ops.iter().rev().map(GateOp::inverse).collect(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        for op in &mut self.ops {
            op.label = label.into();
        }
        self
    }

    /// Dense `2^L` unitary (later gates multiply on the left).
    pub fn unitary(&self) -> CMatrix<T> {
        let dim = 1usize << self.num_qubits;
        let mut u = linalg::identity::<T>(dim);
        for op in &self.ops {
            let g = op.matrix();
            for mut col in u.columns_mut() {
                linalg::apply_local(&mut col, &g.view(), &op.targets);
            }
        }
        u
    }

    /// Replace every R-matrix gate with its elementary template.
    pub fn decomposed(&self) -> Result<Self> {
        let mut out = Circuit::new(self.num_qubits);
        for op in &self.ops {
            if op.is_check_r() {
                let frag = decompose_check_r(op.params[0], op.targets[0], op.targets[1], self.num_qubits)?;
                for mut g in frag.ops {
                    if g.label.is_empty() {
                        g.label = op.label.clone();
                    }
                    out.ops.push(g);
                }
            } else if op.kind == GateKind::TwoQubitUnitary {
                return Err(Error::Counting(format!(
                    "two-qubit gate '{}' has no elementary template",
                    op.label
                )));
            } else {
                out.ops.push(op.clone());
            }
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl<T: Real> fmt::Display for Circuit<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.num_qubits)?;
        for op in &self.ops {
            write!(f, "{op}")?;
            if !op.label.is_empty() && !op.is_check_r() {
                write!(f, " @{}", op.label)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl<T: Real> FromStr for Circuit<T> {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit<T>> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |m: &str| Error::Parse(format!("line {}: {m}", n + 1));
            let mut toks: Vec<&str> = line.split_whitespace().collect();
            let label = match toks.last() {
                Some(t) if t.starts_with('@') => {
                    let l = t[1..].to_string();
                    toks.pop();
                    Some(l)
                }
                _ => None,
            };
            let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| perr(&format!("bad number '{s}'"))) };
            let idx = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|_| perr(&format!("bad qubit '{s}'"))) };
            if toks[0] == "QUBITS" {
                if toks.len() != 2 || circuit.is_some() {
                    return Err(perr("malformed QUBITS header"));
                }
                circuit = Some(Circuit::new(idx(toks[1])?));
                continue;
            }
            let circ = circuit.as_mut().ok_or_else(|| perr("gate before QUBITS header"))?;
            let op = match (toks[0], toks.len()) {
                ("RX", 3) => GateOp::rx(idx(toks[1])?, T::lit(num(toks[2])?)),
                ("RY", 3) => GateOp::ry(idx(toks[1])?, T::lit(num(toks[2])?)),
                ("RZ", 3) => GateOp::rz(idx(toks[1])?, T::lit(num(toks[2])?)),
                ("CNOT", 3) => GateOp::cnot(idx(toks[1])?, idx(toks[2])?)?,
                ("CHECKR", 4) => GateOp::check_r(idx(toks[1])?, idx(toks[2])?, T::lit(num(toks[3])?))?,
                ("U2", 35) => {
                    let vals = toks[3..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                    let mut m = Array2::zeros((4, 4));
                    for k in 0..16 {
                        m[[k / 4, k % 4]] = c(T::lit(vals[2 * k]), T::lit(vals[2 * k + 1]));
                    }
                    GateOp::two_qubit(idx(toks[1])?, idx(toks[2])?, m, label.as_deref().unwrap_or("U2"))?
                }
                (name, _) => return Err(perr(&format!("unknown gate or arity '{name}'"))),
            };
            let op = match label {
                Some(l) if !op.is_check_r() => op.with_label(&l),
                _ => op,
            };
            circ.push(op).map_err(|e| perr(&e.to_string()))?;
        }
        circuit.ok_or_else(|| Error::Parse("missing QUBITS header".into()))
    }
}

/// Three-CNOT template for `Ř(u)` on sites `(i, j)`.
///
/// `Ř(u) = e^{-iφ} e^{iφP}` with `φ = atan u`, and `e^{iφP}` equals
/// `exp(i φ/2 (XX + YY + ZZ))` up to phase, which the canonical
/// three-CNOT circuit realizes with five single-qubit rotations.
pub fn decompose_check_r<T: Real>(u: T, i: usize, j: usize, num_qubits: usize) -> Result<Circuit<T>> {
    if i == j {
        return Err(invalid("R-matrix needs two distinct sites"));
    }
    let phi = u.atan();
    let half_pi = T::FRAC_PI_2();
    let mut c = Circuit::new(num_qubits);
    c.push(GateOp::rz(i, -half_pi))?;
    c.push(GateOp::cnot(i, j)?)?;
    c.push(GateOp::rz(j, half_pi - phi))?;
    c.push(GateOp::ry(i, phi - half_pi))?;
    c.push(GateOp::cnot(j, i)?)?;
    c.push(GateOp::ry(i, half_pi - phi))?;
    c.push(GateOp::cnot(i, j)?)?;
    c.push(GateOp::rz(j, half_pi))?;
    Ok(c)
}

/// `CNOT(j,k) · RZ_k(-2a) · CNOT(j,k)`, i.e. `exp(i a Z_j Z_k)`.
pub fn zz_block<T: Real>(a: T, j: usize, k: usize, num_qubits: usize) -> Result<Circuit<T>> {
    if j == k {
        return Err(invalid("ZZ block needs two distinct qubits"));
    }
    let mut c = Circuit::new(num_qubits);
    c.push(GateOp::cnot(j, k)?)?;
    c.push(GateOp::rz(k, T::lit(-2.0) * a))?;
    c.push(GateOp::cnot(j, k)?)?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Placement {
    /// One channel application per elementary gate on each qubit it touches.
    #[default]
    #[serde(rename = "per-gate-on-targets")]
    PerGateOnTargets,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec<T: Real> {
    pub kind: ChannelKind,
    pub p: T,
    pub placement: Placement,
    /// Skip noise on gates labelled [`ENCODE_LABEL`].
    pub exempt_encoding: bool,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(kind: ChannelKind, p: T) -> Self {
        Self {
            kind,
            p,
            placement: Placement::PerGateOnTargets,
            exempt_encoding: false,
        }
    }

    pub fn noiseless() -> Self {
        Self::new(ChannelKind::Depolarizing, T::zero())
    }
}

pub fn run_ideal<T: Real>(c: &Circuit<T>, psi: &StateVector<T>) -> Result<StateVector<T>> {
    if c.num_qubits != psi.num_qubits() {
        return Err(invalid(format!(
            "circuit has {} qubits, state has {}",
            c.num_qubits,
            psi.num_qubits()
        )));
    }
    let mut out = psi.clone();
    for op in &c.ops {
        out.apply_in_place(&op.matrix(), &op.targets)?;
    }
    Ok(out)
}

/// Ideal evolution of a density matrix (no channel applications).
pub fn run_ideal_density<T: Real>(c: &Circuit<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    if c.num_qubits != rho.num_qubits() {
        return Err(invalid("circuit and state disagree on qubit count"));
    }
    let mut out = rho.clone();
    for op in &c.ops {
        out.conjugate_in_place(&op.matrix(), &op.targets)?;
    }
    Ok(out)
}

/// Gate-by-gate noisy evolution: each gate is followed by the channel on
/// every qubit it acts on. With `elementary` set, R-matrix gates run as
/// their three-CNOT template and each template gate is noisy.
pub fn run_noisy<T: Real>(
    c: &Circuit<T>,
    rho: &DensityMatrix<T>,
    noise: &NoiseSpec<T>,
    elementary: bool,
) -> Result<DensityMatrix<T>> {
    if c.num_qubits != rho.num_qubits() {
        return Err(invalid("circuit and state disagree on qubit count"));
    }
    let channel = noise.kind.build(noise.p)?;
    let report = channel.validate();
    if !report.passed {
        return Err(Error::Validation(report.message));
    }
    let expanded;
    let circuit = if elementary {
        expanded = c.decomposed().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        &expanded
    } else {
        c
    };
    let mut out = rho.clone();
    for op in &circuit.ops {
        out.conjugate_in_place(&op.matrix(), &op.targets)?;
        if noise.exempt_encoding && op.label == ENCODE_LABEL {
            continue;
        }
        if noise.p == T::zero() {
            continue;
        }
        for &t in &op.targets {
            out.apply_kraus_in_place(&channel, t)?;
        }
    }
    out.debug_check();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Accounting {
    /// Count the gates of the executable three-CNOT template.
    #[default]
    #[serde(rename = "template")]
    Template,
    /// Book every R-matrix gate as five single-qubit gates and four CNOTs.
    #[serde(rename = "paper-tally")]
    PaperTally,
}

impl FromStr for Accounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "template" => Ok(Accounting::Template),
            "paper-tally" => Ok(Accounting::PaperTally),
            other => Err(Error::Config(format!(
                "unknown accounting '{other}' (expected template or paper-tally)"
            ))),
        }
    }
}

impl fmt::Display for Accounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Accounting::Template => "template",
            Accounting::PaperTally => "paper-tally",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub single_qubit: usize,
    pub cnot: usize,
}

impl GateCounts {
    pub fn new(single_qubit: usize, cnot: usize) -> Self {
        Self { single_qubit, cnot }
    }

    pub fn total(&self) -> usize {
        self.single_qubit + self.cnot
    }
}

impl AddAssign for GateCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.single_qubit += rhs.single_qubit;
        self.cnot += rhs.cnot;
    }
}

impl std::ops::Add for GateCounts {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

pub const TEMPLATE_CHECK_R_COUNTS: GateCounts = GateCounts {
    single_qubit: 5,
    cnot: 3,
};
pub const PAPER_TALLY_CHECK_R_COUNTS: GateCounts = GateCounts {
    single_qubit: 5,
    cnot: 4,
};

/// Tally of a fully decomposed circuit.
pub fn gate_counts<T: Real>(c: &Circuit<T>) -> Result<GateCounts> {
    let mut counts = GateCounts::default();
    for op in &c.ops {
        match op.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => counts.single_qubit += 1,
            GateKind::Cnot => counts.cnot += 1,
            GateKind::TwoQubitUnitary => {
                return Err(Error::Counting(format!("undecomposed two-qubit gate '{}'", op.label)))
            }
        }
    }
    Ok(counts)
}

/// Tally where R-matrix gates are booked according to `mode`.
pub fn gate_counts_with<T: Real>(c: &Circuit<T>, mode: Accounting) -> Result<GateCounts> {
    let mut counts = GateCounts::default();
    for op in &c.ops {
        if op.is_check_r() {
            counts += match mode {
                Accounting::Template => TEMPLATE_CHECK_R_COUNTS,
                Accounting::PaperTally => PAPER_TALLY_CHECK_R_COUNTS,
            };
        } else {
            let mut single = Circuit::new(c.num_qubits);
            single.ops.push(op.clone());
            counts += gate_counts(&single)?;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::check_r_matrix;
    use crate::linalg::{max_abs_diff, phase_distance};
    use crate::noise::ChannelKind;
    use crate::observable::{ObservableSum, Pauli};

    #[test]
    fn template_matches_r_matrix() {
        for u in [0.0, 0.37, -1.3, 4.0] {
            let frag = decompose_check_r(u, 0, 1, 2).unwrap();
            assert!(phase_distance(&frag.unitary(), &check_r_matrix(u)) < 1e-8, "u={u}");
            assert_eq!(gate_counts(&frag).unwrap(), TEMPLATE_CHECK_R_COUNTS);
        }
    }

    #[test]
    fn template_on_reversed_sites() {
        let frag = decompose_check_r(0.37, 2, 0, 3).unwrap();
        let dense = linalg::embed_operator(&check_r_matrix(0.37), &[2, 0], 3).unwrap();
        assert!(phase_distance(&frag.unitary(), &dense) < 1e-8);
    }

    #[test]
    fn zz_block_is_diagonal_phase() {
        let a = std::f64::consts::FRAC_PI_4;
        let frag = zz_block(a, 0, 1, 2).unwrap();
        let out = run_ideal(&frag, &StateVector::zero(2)).unwrap();
        assert!((out.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        assert_eq!(gate_counts(&frag).unwrap(), GateCounts::new(1, 2));
        assert!(zz_block(0.1, 1, 1, 2).is_err());
        let id = zz_block(0.0, 0, 1, 2).unwrap();
        assert!(phase_distance(&id.unitary(), &linalg::identity(4)) < 1e-12);
    }

    #[test]
    fn run_ideal_examples() {
        let psi = StateVector::<f64>::zero(2);
        assert_eq!(run_ideal(&Circuit::new(2), &psi).unwrap(), psi);
        let mut c = Circuit::new(2);
        c.push(GateOp::rx(0, std::f64::consts::PI)).unwrap();
        let out = run_ideal(&c, &psi).unwrap();
        assert!((out.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        assert!(run_ideal(&c, &StateVector::zero(3)).is_err());
    }

    #[test]
    fn circuit_then_dagger_is_identity() {
        let mut c = Circuit::<f64>::new(2);
        c.push(GateOp::ry(0, 0.4)).unwrap();
        c.push(GateOp::check_r(0, 1, 0.3).unwrap()).unwrap();
        c.push(GateOp::cnot(1, 0).unwrap()).unwrap();
        let both = c.clone().then(&c.dagger()).unwrap();
        let psi = run_ideal(&c, &StateVector::zero(2)).unwrap();
        let back = run_ideal(&both, &psi).unwrap();
        let diff: f64 = (back.inner(&psi).unwrap().norm() - 1.0).abs();
        assert!(diff < 1e-9);
    }

    #[test]
    fn push_validates() {
        let mut c = Circuit::<f64>::new(2);
        assert!(c.push(GateOp::rx(2, 0.1)).is_err());
        assert!(c.push(GateOp::rx(0, f64::NAN)).is_err());
        assert!(c.push(GateOp::cnot(0, 1).unwrap()).is_ok());
    }

    #[test]
    fn noisy_bit_flip_after_x() {
        // X then bit flip with prob p: <Z> = -(1 - 2p)
        let p = 0.2;
        let mut c = Circuit::new(1);
        c.push(GateOp::rx(0, std::f64::consts::PI)).unwrap();
        let rho = StateVector::zero(1).to_density();
        let out = run_noisy(&c, &rho, &NoiseSpec::new(ChannelKind::BitFlip, p), true).unwrap();
        let z = ObservableSum::total(1, Pauli::Z);
        assert!((out.expectation(&z).unwrap() + (1.0 - 2.0 * p)).abs() < 1e-12);
    }

    #[test]
    fn full_depolarization_erases_z() {
        let mut c = Circuit::<f64>::new(1);
        c.push(GateOp::ry(0, 0.3)).unwrap();
        let rho = StateVector::zero(1).to_density();
        let out = run_noisy(&c, &rho, &NoiseSpec::new(ChannelKind::Depolarizing, 1.0), true).unwrap();
        let z = ObservableSum::total(1, Pauli::Z);
        assert!(out.expectation(&z).unwrap().abs() < 1e-12);
    }

    #[test]
    fn encoding_exemption() {
        let mut c = Circuit::new(1);
        c.push(GateOp::rx(0, std::f64::consts::PI).with_label(ENCODE_LABEL))
            .unwrap();
        let rho = StateVector::zero(1).to_density();
        let mut spec = NoiseSpec::new(ChannelKind::BitFlip, 0.3);
        spec.exempt_encoding = true;
        let out = run_noisy(&c, &rho, &spec, true).unwrap();
        let ideal = run_ideal_density(&c, &rho).unwrap();
        assert!(max_abs_diff(out.entries(), ideal.entries()) < 1e-15);
    }

    #[test]
    fn counting_rejects_undecomposed() {
        let mut c = Circuit::<f64>::new(2);
        c.push(GateOp::check_r(0, 1, 0.1).unwrap()).unwrap();
        assert!(matches!(gate_counts(&c), Err(Error::Counting(_))));
        assert_eq!(
            gate_counts_with(&c, Accounting::PaperTally).unwrap(),
            GateCounts::new(5, 4)
        );
        assert_eq!(
            gate_counts_with(&c, Accounting::Template).unwrap(),
            GateCounts::new(5, 3)
        );
        assert_eq!(gate_counts(&c.decomposed().unwrap()).unwrap(), GateCounts::new(5, 3));
        assert_eq!(gate_counts(&Circuit::<f64>::new(3)).unwrap(), GateCounts::default());
    }

    #[test]
    fn text_format_round_trip() {
        let mut c = Circuit::<f64>::new(3);
        c.push(GateOp::ry(0, 0.25).with_label(ENCODE_LABEL)).unwrap();
        c.push(GateOp::cnot(2, 1).unwrap()).unwrap();
        c.push(GateOp::check_r(1, 2, -0.1).unwrap()).unwrap();
        c.push(GateOp::two_qubit(0, 2, crate::gates::swap_matrix(), "swap").unwrap())
            .unwrap();
        let text = c.to_text();
        let back: Circuit<f64> = text.parse().unwrap();
        assert_eq!(back, c);
        assert!(max_abs_diff(&back.unitary(), &c.unitary()) < 1e-15);
    }

    #[test]
    fn text_format_errors() {
        assert!("RX 0 0.1".parse::<Circuit<f64>>().is_err());
        assert!("QUBITS 1\nRX 3 0.1".parse::<Circuit<f64>>().is_err());
        assert!("QUBITS 1\nFOO 0".parse::<Circuit<f64>>().is_err());
        assert!("QUBITS 2\nCNOT 0".parse::<Circuit<f64>>().is_err());
    }
}
