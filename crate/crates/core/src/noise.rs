// SPDX-License-Identifier: Apache-2.0

//! Single-qubit Kraus channels: bit flip, depolarizing, amplitude damping
//! and phase damping.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::pauli_matrix;
use crate::linalg::{self, CMatrix};
use crate::observable::Pauli;
use crate::scalar::{cr, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "bitflip")]
    BitFlip,
    #[serde(rename = "depolarizing")]
    Depolarizing,
    #[serde(rename = "ampdamp")]
    AmplitudeDamping,
    #[serde(rename = "phasedamp")]
    PhaseDamping,
    #[serde(rename = "custom")]
    Custom,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::BitFlip,
        ChannelKind::Depolarizing,
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "bitflip",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::AmplitudeDamping => "ampdamp",
            ChannelKind::PhaseDamping => "phasedamp",
            ChannelKind::Custom => "custom",
        }
    }

    /// Default strength used in the benchmarks: 0.5% bit flip, 1% otherwise.
    pub fn default_probability(self) -> f64 {
        match self {
            ChannelKind::BitFlip => 0.005,
            _ => 0.01,
        }
    }

    pub fn build<T: Real>(self, p: T) -> Result<KrausChannel<T>> {
        match self {
            ChannelKind::BitFlip => bit_flip(p),
            ChannelKind::Depolarizing => depolarizing(p),
            ChannelKind::AmplitudeDamping => amplitude_damping(p),
            ChannelKind::PhaseDamping => phase_damping(p),
            ChannelKind::Custom => Err(Error::InvalidArgument(
                "custom channels are built from explicit operators".into(),
            )),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitflip" => Ok(ChannelKind::BitFlip),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            "ampdamp" => Ok(ChannelKind::AmplitudeDamping),
            "phasedamp" => Ok(ChannelKind::PhaseDamping),
            other => Err(Error::Config(format!(
                "unknown noise '{other}' (expected bitflip, depolarizing, ampdamp, phasedamp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel<T: Real> {
    ops: Vec<CMatrix<T>>,
    kind: ChannelKind,
    p: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub passed: bool,
    /// Largest entry of `|Σ E†E - I|`.
    pub max_deviation: f64,
    pub message: String,
}

impl<T: Real> KrausChannel<T> {
    /// Hand-built channel; not validated until [`validate`](Self::validate).
    pub fn from_operators(ops: Vec<CMatrix<T>>) -> Self {
        Self {
            ops,
            kind: ChannelKind::Custom,
            p: T::zero(),
        }
    }

    pub fn operators(&self) -> &[CMatrix<T>] {
        &self.ops
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn probability(&self) -> T {
        self.p
    }

    pub fn completeness_error(&self) -> T {
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::<T>::zeros((2, 2)), |acc, e| acc + linalg::dagger(e).dot(e));
        linalg::max_abs_diff(&sum, &linalg::identity(2))
    }

    pub fn validate(&self) -> ChannelReport {
        if self.ops.is_empty() || self.ops.len() > 4 {
            return ChannelReport {
                passed: false,
                max_deviation: f64::NAN,
                message: format!("channel has {} operators (expected 1..=4)", self.ops.len()),
            };
        }
        if let Some(bad) = self.ops.iter().find(|e| e.dim() != (2, 2)) {
            return ChannelReport {
                passed: false,
                max_deviation: f64::NAN,
                message: format!("operator of shape {:?} is not 2x2", bad.dim()),
            };
        }
        let dev = self.completeness_error().as_f64();
        let passed = dev <= T::tol(1e-12).as_f64();
        ChannelReport {
            passed,
            max_deviation: dev,
            message: if passed {
                format!("{} channel complete (deviation {dev:e})", self.kind)
            } else {
                format!("{} channel incomplete: deviation {dev:e}", self.kind)
            },
        }
    }
}

pub fn validate_channel<T: Real>(ch: &KrausChannel<T>) -> ChannelReport {
    ch.validate()
}

fn check_probability<T: Real>(p: T) -> Result<()> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("noise probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn scaled<T: Real>(p: Pauli, w: T) -> CMatrix<T> {
    pauli_matrix::<T>(p).mapv(|z| z * cr(w.sqrt()))
}

fn assemble<T: Real>(kind: ChannelKind, p: T, ops: Vec<CMatrix<T>>) -> KrausChannel<T> {
    // zero-weight operators carry no information
    let ops = ops
        .into_iter()
        .filter(|e| e.iter().any(|z| z.norm() > T::zero()))
        .collect();
    KrausChannel { ops, kind, p }
}

/// `{√(1-p) I, √p X}`
pub fn bit_flip<T: Real>(p: T) -> Result<KrausChannel<T>> {
    check_probability(p)?;
    Ok(assemble(
        ChannelKind::BitFlip,
        p,
        vec![scaled(Pauli::I, T::one() - p), scaled(Pauli::X, p)],
    ))
}

/// `{√(1-3p/4) I, √(p/4) X, √(p/4) Y, √(p/4) Z}`
pub fn depolarizing<T: Real>(p: T) -> Result<KrausChannel<T>> {
    check_probability(p)?;
    let q = p / T::lit(4.0);
    Ok(assemble(
        ChannelKind::Depolarizing,
        p,
        vec![
            scaled(Pauli::I, T::one() - T::lit(3.0) * q),
            scaled(Pauli::X, q),
            scaled(Pauli::Y, q),
            scaled(Pauli::Z, q),
        ],
    ))
}

/// `E₀ = [[1, 0], [0, √(1-p)]]`, `E₁ = [[0, √p], [0, 0]]`
pub fn amplitude_damping<T: Real>(p: T) -> Result<KrausChannel<T>> {
    check_probability(p)?;
    let (o, l) = (cr(T::zero()), cr(T::one()));
    let e0 = linalg::from_rows(&[&[l, o], &[o, cr((T::one() - p).sqrt())]]);
    let e1 = linalg::from_rows(&[&[o, cr(p.sqrt())], &[o, o]]);
    Ok(assemble(ChannelKind::AmplitudeDamping, p, vec![e0, e1]))
}

/// `{√(1-p/2) I, √(p/2) Z}`
pub fn phase_damping<T: Real>(p: T) -> Result<KrausChannel<T>> {
    check_probability(p)?;
    let half = p / T::lit(2.0);
    Ok(assemble(
        ChannelKind::PhaseDamping,
        p,
        vec![scaled(Pauli::I, T::one() - half), scaled(Pauli::Z, half)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;
    use crate::state::{DensityMatrix, StateVector};
    use approx::assert_abs_diff_eq;

    fn plus_rho() -> DensityMatrix<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(ndarray::arr1(&[cr(h), cr(h)]))
            .unwrap()
            .to_density()
    }

    #[test]
    fn bit_flip_examples() {
        let ch = bit_flip(0.0_f64).unwrap();
        assert_eq!(ch.operators().len(), 1);
        assert!(linalg::max_abs_diff(&ch.operators()[0], &linalg::identity(2)) == 0.0);
        let ch = bit_flip(0.005_f64).unwrap();
        assert_abs_diff_eq!(ch.operators()[0][[0, 0]].re, 0.995_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(ch.operators()[0][[1, 1]].re, 0.995_f64.sqrt(), epsilon = 1e-15);
        assert!(bit_flip(0.3_f64).unwrap().completeness_error() < 1e-12);
    }

    #[test]
    fn out_of_range_probability() {
        assert!(bit_flip(-0.1_f64).is_err());
        assert!(depolarizing(1.5_f64).is_err());
        assert!(amplitude_damping(f64::NAN).is_err());
        assert!(phase_damping(2.0_f64).is_err());
    }

    #[test]
    fn depolarizing_full_strength_gives_maximally_mixed() {
        let rho = StateVector::<f64>::basis(1, 1).to_density();
        let out = rho.apply_kraus(&depolarizing(1.0).unwrap(), 0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!(linalg::max_abs_diff(out.entries(), mixed.entries()) < 1e-15);
        let d = depolarizing(0.0_f64).unwrap();
        assert_eq!(d.operators().len(), 1);
        // (1 - 3p/4) + 3 (p/4) = 1
        let p = 0.37;
        assert_eq!((1.0 - 3.0 * p / 4.0) + 3.0 * (p / 4.0), 1.0);
    }

    #[test]
    fn amplitude_damping_examples() {
        let ground = StateVector::<f64>::zero(1).to_density();
        for p in [0.0, 0.2, 1.0] {
            let out = ground.apply_kraus(&amplitude_damping(p).unwrap(), 0).unwrap();
            assert!(linalg::max_abs_diff(out.entries(), ground.entries()) < 1e-15);
        }
        // off-diagonal of |+><+| picks up √(1-p) from E₀ only
        let out = plus_rho().apply_kraus(&amplitude_damping(0.01).unwrap(), 0).unwrap();
        assert_abs_diff_eq!(out.entries()[[0, 1]].re, 0.5 * 0.99_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.entries()[[0, 0]].re, 0.5 + 0.5 * 0.01, epsilon = 1e-15);
    }

    #[test]
    fn phase_damping_examples() {
        // (1 - p/2) ρ + (p/2) Z ρ Z: off-diagonal scales by (1 - p)
        let out = plus_rho().apply_kraus(&phase_damping(0.01).unwrap(), 0).unwrap();
        assert_abs_diff_eq!(out.entries()[[0, 1]].re, 0.5 * 0.99, epsilon = 1e-15);
        assert_abs_diff_eq!(out.entries()[[0, 0]].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.entries()[[1, 1]].re, 0.5, epsilon = 1e-15);
        assert_eq!(phase_damping(0.0_f64).unwrap().operators().len(), 1);
    }

    #[test]
    fn validation_reports() {
        for kind in ChannelKind::ALL {
            assert!(kind.build(0.37_f64).unwrap().validate().passed, "{kind}");
        }
        let half = KrausChannel::from_operators(vec![linalg::identity::<f64>(2).mapv(|z| z * cr(0.5_f64.sqrt()))]);
        let r = validate_channel(&half);
        assert!(!r.passed);
        assert_abs_diff_eq!(r.max_deviation, 0.5, epsilon = 1e-15);
        let empty = KrausChannel::<f64>::from_operators(vec![]);
        assert!(!empty.validate().passed);
        let rho = plus_rho();
        assert!(rho.apply_kraus(&half, 0).is_err());
    }

    #[test]
    fn channels_in_single_precision() {
        for kind in ChannelKind::ALL {
            let ch = kind.build(0.01_f32).unwrap();
            assert!(ch.validate().passed);
            let _: &C<f32> = &ch.operators()[0][[0, 0]];
        }
    }

    #[test]
    fn names_parse() {
        for kind in ChannelKind::ALL {
            assert_eq!(kind.name().parse::<ChannelKind>().unwrap(), kind);
        }
        assert!("thermal".parse::<ChannelKind>().is_err());
    }
}
