// SPDX-License-Identifier: Apache-2.0

//! Gate matrices and the gate record used by [`Circuit`](crate::circuit::Circuit).

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::observable::Pauli;
use crate::scalar::{c, ci, cr, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

pub fn pauli_matrix<T: Real>(p: Pauli) -> CMatrix<T> {
    let (o, l) = (T::zero(), T::one());
    match p {
        Pauli::I => linalg::identity(2),
        Pauli::X => linalg::from_rows(&[&[cr(o), cr(l)], &[cr(l), cr(o)]]),
        Pauli::Y => linalg::from_rows(&[&[cr(o), c(o, -l)], &[c(o, l), cr(o)]]),
        Pauli::Z => linalg::from_rows(&[&[cr(l), cr(o)], &[cr(o), cr(-l)]]),
    }
}

pub fn hadamard_matrix<T: Real>() -> CMatrix<T> {
    let h = T::FRAC_1_SQRT_2();
    linalg::from_rows(&[&[cr(h), cr(h)], &[cr(h), cr(-h)]])
}

/// `exp(-iθA/2)`
pub fn rotation_matrix<T: Real>(axis: Axis, theta: T) -> CMatrix<T> {
    let half = theta / T::lit(2.0);
    let (s, co) = half.sin_cos();
    let id = linalg::identity::<T>(2);
    let a = pauli_matrix::<T>(axis.pauli());
    &id.mapv(|z| z * cr(co)) + &a.mapv(|z| z * ci(-s))
}

/// Control is the first target, data the second.
pub fn cnot_matrix<T: Real>() -> CMatrix<T> {
    let (o, l) = (cr(T::zero()), cr(T::one()));
    linalg::from_rows(&[&[l, o, o, o], &[o, l, o, o], &[o, o, o, l], &[o, o, l, o]])
}

pub fn swap_matrix<T: Real>() -> CMatrix<T> {
    let (o, l) = (cr(T::zero()), cr(T::one()));
    linalg::from_rows(&[&[l, o, o, o], &[o, o, l, o], &[o, l, o, o], &[o, o, o, l]])
}

/// Braided R-matrix `Ř(u) = (1 + iuP) / (1 + iu)` with `P` the swap.
pub fn check_r_matrix<T: Real>(u: T) -> CMatrix<T> {
    let denom = c(T::one(), u);
    let p = swap_matrix::<T>();
    let id = linalg::identity::<T>(4);
    (&id + &p.mapv(|z| z * ci(u))).mapv(|z| z / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
    TwoQubitUnitary,
}

impl GateKind {
    pub fn is_single_qubit(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }
}

/// Label carried by two-qubit R-matrix gates.
pub const CHECK_R_LABEL: &str = "checkR";

#[derive(Debug, Clone)]
pub struct GateOp<T: Real> {
    pub kind: GateKind,
    pub params: Vec<T>,
    pub targets: Vec<usize>,
    pub label: String,
    matrix: Option<Arc<CMatrix<T>>>,
}

impl<T: Real> PartialEq for GateOp<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.params == other.params
            && self.targets == other.targets
            && self.label == other.label
    }
}

impl<T: Real> GateOp<T> {
    pub fn rotation(axis: Axis, qubit: usize, theta: T) -> Self {
        let kind = match axis {
            Axis::X => GateKind::Rx,
            Axis::Y => GateKind::Ry,
            Axis::Z => GateKind::Rz,
        };
        Self {
            kind,
            params: vec![theta],
            targets: vec![qubit],
            label: String::new(),
            matrix: None,
        }
    }

    pub fn rx(q: usize, theta: T) -> Self {
        Self::rotation(Axis::X, q, theta)
    }

    pub fn ry(q: usize, theta: T) -> Self {
        Self::rotation(Axis::Y, q, theta)
    }

    pub fn rz(q: usize, theta: T) -> Self {
        Self::rotation(Axis::Z, q, theta)
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        if control == target {
            return Err(invalid("CNOT control equals target"));
        }
        Ok(Self {
            kind: GateKind::Cnot,
            params: vec![],
            targets: vec![control, target],
            label: String::new(),
            matrix: None,
        })
    }

    /// `Ř(u)` acting on sites `(i, j)`.
    pub fn check_r(i: usize, j: usize, u: T) -> Result<Self> {
        if i == j {
            return Err(invalid("R-matrix needs two distinct sites"));
        }
        Ok(Self {
            kind: GateKind::TwoQubitUnitary,
            params: vec![u],
            targets: vec![i, j],
            label: CHECK_R_LABEL.into(),
            matrix: Some(Arc::new(check_r_matrix(u))),
        })
    }

    /// Arbitrary two-qubit unitary; cannot be decomposed or counted.
    pub fn two_qubit(i: usize, j: usize, matrix: CMatrix<T>, label: &str) -> Result<Self> {
        if i == j {
            return Err(invalid("two-qubit gate needs two distinct sites"));
        }
        if matrix.dim() != (4, 4) {
            return Err(invalid("two-qubit gate needs a 4x4 matrix"));
        }
        let err = linalg::unitarity_error(&matrix);
        if err > T::tol(1e-10) {
            return Err(Error::Validation(format!("gate '{label}' not unitary ({err})")));
        }
        Ok(Self {
            kind: GateKind::TwoQubitUnitary,
            params: vec![],
            targets: vec![i, j],
            label: label.into(),
            matrix: Some(Arc::new(matrix)),
        })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_check_r(&self) -> bool {
        self.kind == GateKind::TwoQubitUnitary && self.label == CHECK_R_LABEL
    }

    /// Local matrix on `targets` (first target is the high local bit).
    pub fn matrix(&self) -> CMatrix<T> {
        match self.kind {
            GateKind::Rx => rotation_matrix(Axis::X, self.params[0]),
            GateKind::Ry => rotation_matrix(Axis::Y, self.params[0]),
            GateKind::Rz => rotation_matrix(Axis::Z, self.params[0]),
            GateKind::Cnot => cnot_matrix(),
            GateKind::TwoQubitUnitary => self
                .matrix
                .as_ref()
                .map(|m| (**m).clone())
                .expect("two-qubit gate carries its matrix"),
        }
    }

    /// Inverse gate.
    pub fn inverse(&self) -> Self {
        match self.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                let mut g = self.clone();
                g.params[0] = -g.params[0];
                g
            }
            GateKind::Cnot => self.clone(),
            GateKind::TwoQubitUnitary => {
                let m = linalg::dagger(&self.matrix());
                let mut g = self.clone();
                g.label = format!("{}^dag", self.label);
                g.matrix = Some(Arc::new(m));
                g
            }
        }
    }
}

impl<T: Real> fmt::Display for GateOp<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::TwoQubitUnitary if self.is_check_r() => "CHECKR",
            GateKind::TwoQubitUnitary => "U2",
        };
        write!(f, "{name}")?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        if self.kind == GateKind::TwoQubitUnitary && !self.is_check_r() {
            for z in self.matrix().iter() {
                write!(f, " {:e} {:e}", z.re.as_f64(), z.im.as_f64())?;
            }
        } else {
            for p in &self.params {
                write!(f, " {:e}", p.as_f64())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_error};
    use crate::state::StateVector;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    #[test]
    fn rotation_examples() {
        assert!(max_abs_diff(&rotation_matrix(Axis::Z, 0.0_f64), &linalg::identity(2)) < 1e-15);
        let minus_ix = pauli_matrix::<f64>(Pauli::X).mapv(|z| z * ci(-1.0));
        assert!(max_abs_diff(&rotation_matrix(Axis::X, PI), &minus_ix) < 1e-15);
        let out = StateVector::zero(1)
            .apply_unitary(&rotation_matrix(Axis::Y, FRAC_PI_2), &[0])
            .unwrap();
        assert!((out.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn check_r_examples() {
        assert!(max_abs_diff(&check_r_matrix(0.0_f64), &linalg::identity(4)) < 1e-15);
        // (1 + iP)/(1 + i) on |01>: entrywise evaluation gives (1-i)/2 and (1+i)/2
        let r = check_r_matrix(1.0_f64);
        let idx01 = 0b01; // qubit 0 set, i.e. local |t0 t1> = |10> for targets [1, 0]
        let col: Vec<_> = (0..4).map(|i| r[[i, idx01]]).collect();
        assert!((col[0b01] - c(0.5, -0.5)).norm() < 1e-15);
        assert!((col[0b10] - c(0.5, 0.5)).norm() < 1e-15);
        assert!((col[0b01].norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        for u in [-3.0, 0.37, 12.0] {
            let r = check_r_matrix(u);
            assert!((r[[0, 0]] - cr(1.0)).norm() < 1e-14);
            assert!(unitarity_error(&r) < 1e-12);
        }
    }

    #[test]
    fn cnot_rejects_same_qubit() {
        assert!(GateOp::<f64>::cnot(1, 1).is_err());
        assert!(GateOp::<f64>::check_r(0, 0, 0.1).is_err());
    }

    #[test]
    fn inverse_of_rotation_negates_angle() {
        let g = GateOp::<f64>::rx(0, 0.3);
        let prod = g.inverse().matrix().dot(&g.matrix());
        assert!(max_abs_diff(&prod, &linalg::identity(2)) < 1e-15);
    }
}
