// SPDX-License-Identifier: Apache-2.0

//! Real-weighted sums of Pauli strings.
//!
//! Text form of an observable is one term per line, `coefficient string`,
//! where the string lists one of `IXYZ` per qubit starting at qubit 0:
//!
//! ```text
//! 2 XX
//! 2 YY
//! 2 ZZ
//! ```

use std::fmt;

use ndarray::Array2;

use crate::error::{invalid, Error, Result};
use crate::gates::pauli_matrix;
use crate::linalg::{self, CMatrix};
use crate::scalar::{cr, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Self> {
        match ch.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliString<T: Real> {
    factors: Vec<Pauli>,
    coefficient: T,
}

impl<T: Real> PauliString<T> {
    pub fn new(factors: Vec<Pauli>, coefficient: T) -> Self {
        Self { factors, coefficient }
    }

    /// Identity everywhere except the listed `(qubit, pauli)` pairs.
    pub fn sparse(num_qubits: usize, ops: &[(usize, Pauli)], coefficient: T) -> Result<Self> {
        let mut factors = vec![Pauli::I; num_qubits];
        for &(q, p) in ops {
            if q >= num_qubits {
                return Err(invalid(format!("qubit {q} out of range")));
            }
            if factors[q] != Pauli::I {
                return Err(invalid(format!("qubit {q} listed twice")));
            }
            factors[q] = p;
        }
        Ok(Self::new(factors, coefficient))
    }

    pub fn parse(s: &str, coefficient: T) -> Result<Self> {
        let factors = s
            .chars()
            .map(|ch| Pauli::from_symbol(ch).ok_or_else(|| Error::Parse(format!("bad Pauli symbol '{ch}'"))))
            .collect::<Result<Vec<_>>>()?;
        if factors.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        Ok(Self::new(factors, coefficient))
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    pub fn num_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|p| *p == Pauli::I)
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(|p| p.symbol()).collect()
    }

    pub(crate) fn flip_mask(&self) -> usize {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
            .map(|(q, _)| 1usize << q)
            .sum()
    }

    /// Dense `2^L` matrix including the coefficient.
    pub fn to_matrix(&self) -> CMatrix<T> {
        // kron builds big-endian, so the highest qubit goes first
        let mut m = linalg::identity::<T>(1);
        for p in self.factors.iter().rev() {
            m = linalg::kron(&m, &pauli_matrix(*p));
        }
        m.mapv(|z| z * cr(self.coefficient))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSum<T: Real> {
    num_qubits: usize,
    terms: Vec<PauliString<T>>,
}

impl<T: Real> ObservableSum<T> {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn single(term: PauliString<T>) -> Self {
        Self {
            num_qubits: term.num_qubits(),
            terms: vec![term],
        }
    }

    pub fn from_terms(num_qubits: usize, terms: Vec<PauliString<T>>) -> Result<Self> {
        let mut s = Self::new(num_qubits);
        for t in terms {
            s.push(t)?;
        }
        Ok(s)
    }

    /// Single-site operator on `qubit`.
    pub fn site(num_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        Ok(Self::single(PauliString::sparse(
            num_qubits,
            &[(qubit, pauli)],
            T::one(),
        )?))
    }

    /// `Σ_i A_i`
    pub fn total(num_qubits: usize, axis: Pauli) -> Self {
        let terms = (0..num_qubits)
            .map(|q| PauliString::sparse(num_qubits, &[(q, axis)], T::one()).unwrap())
            .collect();
        Self { num_qubits, terms }
    }

    pub fn push(&mut self, term: PauliString<T>) -> Result<()> {
        if term.num_qubits() != self.num_qubits {
            return Err(invalid(format!(
                "term {} has {} qubits, observable has {}",
                term.label(),
                term.num_qubits(),
                self.num_qubits
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn terms(&self) -> &[PauliString<T>] {
        &self.terms
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            num_qubits: self.num_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliString::new(t.factors.clone(), t.coefficient * factor))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone())?;
        }
        Ok(out)
    }

    /// Merge equal strings and drop terms whose coefficient vanishes.
    pub fn simplified(&self) -> Self {
        let mut merged: Vec<PauliString<T>> = Vec::new();
        for t in &self.terms {
            match merged.iter_mut().find(|m| m.factors == t.factors) {
                Some(m) => m.coefficient = m.coefficient + t.coefficient,
                None => merged.push(t.clone()),
            }
        }
        merged.retain(|t| t.coefficient != T::zero());
        Self {
            num_qubits: self.num_qubits,
            terms: merged,
        }
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        let dim = 1usize << self.num_qubits;
        self.terms
            .iter()
            .fold(Array2::zeros((dim, dim)), |acc, t| acc + t.to_matrix())
    }

    pub(crate) fn check_qubits(&self, n: usize) -> Result<()> {
        if n != self.num_qubits {
            return Err(invalid(format!(
                "observable acts on {} qubits, state has {n}",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(coef), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!(
                    "line {}: expected 'coefficient string'",
                    lineno + 1
                )));
            };
            let coef: f64 = coef
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient '{coef}'", lineno + 1)))?;
            terms.push(PauliString::parse(label, T::lit(coef))?);
        }
        let n = terms
            .first()
            .map(|t| t.num_qubits())
            .ok_or_else(|| Error::Parse("no terms".into()))?;
        Self::from_terms(n, terms)
    }
}

impl<T: Real> fmt::Display for ObservableSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{} {}", t.coefficient.as_f64(), t.label())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let h: ObservableSum<f64> = ObservableSum::parse_text("# heisenberg\n2 XX\n2 YY\n-0.5 ZI\n").unwrap();
        assert_eq!(h.terms().len(), 3);
        let again = ObservableSum::parse_text(&h.to_text()).unwrap();
        assert_eq!(h, again);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(ObservableSum::<f64>::parse_text("1.0 XQ").is_err());
        assert!(ObservableSum::<f64>::parse_text("abc XX").is_err());
        assert!(ObservableSum::<f64>::parse_text("1 XX\n1 X").is_err());
        assert!(ObservableSum::<f64>::parse_text("").is_err());
    }

    #[test]
    fn qubit_zero_is_leftmost_symbol_and_lowest_bit() {
        let z0 = PauliString::<f64>::parse("ZI", 1.0).unwrap().to_matrix();
        // basis index 1 has qubit 0 set
        assert_eq!(z0[[1, 1]].re, -1.0);
        assert_eq!(z0[[2, 2]].re, 1.0);
    }

    #[test]
    fn simplify_merges_terms() {
        let o = ObservableSum::<f64>::parse_text("1 XY\n-1 XY\n2 ZZ").unwrap();
        assert_eq!(o.simplified().terms().len(), 1);
    }
}
