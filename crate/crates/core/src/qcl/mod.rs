// SPDX-License-Identifier: Apache-2.0

//! Learned shallow circuits: encoding, ansatz, datasets, loss, optimizer,
//! training and model files.

pub mod ansatz;
pub mod dataset;
pub mod encoding;
pub mod loss;
pub mod nelder_mead;
pub mod persist;
pub mod train;

pub use ansatz::{ansatz_counts, build_ansatz, AnsatzConfig};
pub use dataset::{gen_dataset, Dataset, TrainingObservable};
pub use encoding::input_encoding;
pub use loss::{loss, Executor, LossEvaluator, LossWeights};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult, Termination};
pub use persist::{load_model, save_model};
pub use train::{fidelity_vs_exact, original_circuit, predict, sweep_layers, train, TrainedModel, TrainingOptions};
