// SPDX-License-Identifier: Apache-2.0

//! Simulation of Trotterized XXX spin chains, shallow learned circuits that
//! mimic deep evolution, and Kraus-noise benchmarks comparing the two.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the scalar.

pub mod bench;
pub mod circuit;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod observable;
pub mod qcl;
pub mod scalar;
pub mod state;

pub use bench::{ComparisonRow, ExperimentConfig};
pub use circuit::{Accounting, Circuit, GateCounts, NoiseSpec};
pub use error::{Error, Result};
pub use gates::{Axis, GateKind, GateOp};
pub use model::ModelSpec;
pub use noise::{ChannelKind, KrausChannel};
pub use observable::{ObservableSum, Pauli, PauliString};
pub use qcl::{AnsatzConfig, Dataset, TrainedModel};
pub use scalar::Real;
pub use state::{DensityMatrix, StateVector};

pub type StateVector64 = StateVector<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type Circuit64 = Circuit<f64>;
pub type ObservableSum64 = ObservableSum<f64>;
pub type KrausChannel64 = KrausChannel<f64>;
pub type ModelSpec64 = ModelSpec<f64>;
pub type AnsatzConfig64 = AnsatzConfig<f64>;
pub type Dataset64 = Dataset<f64>;
pub type TrainedModel64 = TrainedModel<f64>;

pub type StateVector32 = StateVector<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type Circuit32 = Circuit<f32>;
pub type ObservableSum32 = ObservableSum<f32>;
pub type KrausChannel32 = KrausChannel<f32>;
pub type ModelSpec32 = ModelSpec<f32>;
pub type AnsatzConfig32 = AnsatzConfig<f32>;
pub type Dataset32 = Dataset<f32>;
pub type TrainedModel32 = TrainedModel<f32>;
