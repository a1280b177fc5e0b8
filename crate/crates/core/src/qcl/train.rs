// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{run_ideal, Circuit};
use crate::error::{invalid, Result};
use crate::model::{evolution, ModelSpec};
use crate::observable::ObservableSum;
use crate::qcl::ansatz::{build_ansatz, AnsatzConfig};
use crate::qcl::dataset::{encoded_state, Dataset};
use crate::qcl::encoding::input_encoding;
use crate::qcl::loss::{model_circuit, Executor, LossEvaluator, LossWeights};
use crate::qcl::nelder_mead::{nelder_mead, NelderMeadOptions, Termination};
use crate::scalar::Real;
use crate::state::fidelity_overlap;

/// Band outside which a trained scaling factor is reported as suspicious.
pub const SCALE_BAND: (f64, f64) = (0.9, 1.1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingOptions {
    pub weights: LossWeights,
    pub restarts: usize,
    pub optimizer: NelderMeadOptions,
    /// Restart `r` draws its initial angles from stream `seed + r`.
    pub seed: u64,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self {
            weights: LossWeights::default(),
            restarts: 8,
            optimizer: NelderMeadOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub weights: LossWeights,
    pub dataset_hash: String,
    pub grid_size: usize,
    pub coupling_j: f64,
    pub optimizer: NelderMeadOptions,
    pub training_seed: u64,
    pub restarts: usize,
    pub restart_losses: Vec<f64>,
    pub best_restart: usize,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T: Real> {
    pub config: AnsatzConfig<T>,
    pub theta: Vec<T>,
    /// Global scaling applied to every predicted expectation value.
    pub a: T,
    /// Number of evolution steps the circuit approximates.
    pub steps: usize,
    pub delta: T,
    pub final_loss: T,
    pub metadata: ModelMetadata,
}

impl<T: Real> TrainedModel<T> {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.theta.len() != self.config.num_params() {
            return Err(invalid(format!(
                "model has {} angles, ansatz needs {}",
                self.theta.len(),
                self.config.num_params()
            )));
        }
        if !self.theta.iter().all(|t| t.is_finite()) || !self.a.is_finite() {
            return Err(invalid("model parameters must be finite"));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.config.num_qubits
    }

    pub fn spec(&self) -> ModelSpec<T> {
        ModelSpec {
            length: self.config.num_qubits,
            delta: self.delta,
            coupling: T::lit(self.metadata.coupling_j),
        }
    }

    /// Warning text when `a` falls outside [`SCALE_BAND`].
    pub fn scale_warning(&self) -> Option<String> {
        let a = self.a.as_f64();
        (a < SCALE_BAND.0 || a > SCALE_BAND.1)
            .then(|| format!("scaling factor a = {a:.4} outside [{}, {}]", SCALE_BAND.0, SCALE_BAND.1))
    }

    pub fn ansatz(&self) -> Result<Circuit<T>> {
        build_ansatz(&self.config, &self.theta)
    }

    /// Encoding followed by `repetitions` copies of the ansatz.
    pub fn learned_circuit(&self, x: T, repetitions: usize) -> Result<Circuit<T>> {
        input_encoding(x, self.num_qubits())?.then(&self.ansatz()?.repeated(repetitions))
    }
}

/// Encoding followed by `steps` exact Trotter steps.
pub fn original_circuit<T: Real>(spec: &ModelSpec<T>, x: T, steps: usize) -> Result<Circuit<T>> {
    input_encoding(x, spec.length)?.then(&evolution(spec, steps)?)
}

/// Nelder–Mead over `(θ, a)` from several random starts; keeps the lowest
/// final loss (earliest restart on ties).
pub fn train<T: Real>(
    config: &AnsatzConfig<T>,
    dataset: &Dataset<T>,
    options: &TrainingOptions,
) -> Result<TrainedModel<T>> {
    if options.restarts == 0 {
        return Err(invalid("need at least one restart"));
    }
    let eval = LossEvaluator::new(config, dataset, &options.weights)?;
    let n = config.num_params();
    let runs = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(r as u64));
            let mut x0: Vec<T> = (0..n)
                .map(|_| T::lit(rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            x0.push(T::one());
            nelder_mead(|p: &[T]| eval.objective(p), &x0, &options.optimizer)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = (0..runs.len())
        .min_by(|&i, &j| runs[i].value.partial_cmp(&runs[j].value).unwrap().then(i.cmp(&j)))
        .unwrap();
    let run = &runs[best];
    let (theta, a) = run.x.split_at(n);
    Ok(TrainedModel {
        config: config.clone(),
        theta: theta.to_vec(),
        a: a[0],
        steps: dataset.steps,
        delta: dataset.spec.delta,
        final_loss: run.value,
        metadata: ModelMetadata {
            weights: options.weights,
            dataset_hash: dataset.hash(),
            grid_size: dataset.len(),
            coupling_j: dataset.spec.coupling.as_f64(),
            optimizer: options.optimizer,
            training_seed: options.seed,
            restarts: options.restarts,
            restart_losses: runs.iter().map(|r| r.value.as_f64()).collect(),
            best_restart: best,
            iterations: run.iterations,
            termination: run.termination,
        },
    })
}

/// `a ⟨obs⟩` on the encoded input followed by the learned circuit.
pub fn predict<T: Real>(model: &TrainedModel<T>, x: T, obs: &ObservableSum<T>, executor: &Executor<T>) -> Result<T> {
    model.validate()?;
    let c = model_circuit(&model.config, &model.theta, x)?;
    Ok(model.a * executor.expectation(&c, obs)?)
}

/// `|⟨ψ_out(x; θ)| U(δ)^d |ψ_in(x)⟩|`, without the scaling factor.
pub fn fidelity_vs_exact<T: Real>(model: &TrainedModel<T>, x: T, steps: usize, delta: T) -> Result<T> {
    model.validate()?;
    let spec = model.spec().with_delta(delta);
    let psi = encoded_state(x, model.num_qubits())?;
    let out = run_ideal(&model.ansatz()?, &psi)?;
    let exact = run_ideal(&evolution(&spec, steps)?, &psi)?;
    fidelity_overlap(&out, &exact)
}

#[derive(Debug, Clone)]
pub struct LayerSweep<T: Real> {
    pub models: Vec<TrainedModel<T>>,
    /// Index into `models` of the lowest final loss.
    pub best: usize,
}

/// Train the same couplings at several depths and select the lowest loss.
pub fn sweep_layers<T: Real>(
    config: &AnsatzConfig<T>,
    dataset: &Dataset<T>,
    layers: &[usize],
    options: &TrainingOptions,
) -> Result<LayerSweep<T>> {
    if layers.is_empty() {
        return Err(invalid("layer sweep needs at least one depth"));
    }
    let models = layers
        .iter()
        .map(|&d| train(&config.with_layers(d)?, dataset, options))
        .collect::<Result<Vec<_>>>()?;
    let best = (0..models.len())
        .min_by(|&i, &j| {
            models[i]
                .final_loss
                .partial_cmp(&models[j].final_loss)
                .unwrap()
                .then(i.cmp(&j))
        })
        .unwrap();
    Ok(LayerSweep { models, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::NoiseSpec;
    use crate::gates::Axis;
    use crate::model::total_spin;
    use crate::noise::ChannelKind;
    use crate::qcl::dataset::gen_dataset;

    fn quick_options() -> TrainingOptions {
        TrainingOptions {
            restarts: 2,
            optimizer: NelderMeadOptions {
                max_iterations: 300,
                ..Default::default()
            },
            seed: 5,
            ..Default::default()
        }
    }

    fn quick_model() -> TrainedModel<f64> {
        let cfg = AnsatzConfig::random(2, 1, 1).unwrap();
        let ds = gen_dataset(&ModelSpec::new(2, 0.01).unwrap(), 2, 11).unwrap();
        train(&cfg, &ds, &quick_options()).unwrap()
    }

    #[test]
    fn training_is_deterministic_and_records_metadata() {
        let a = quick_model();
        let b = quick_model();
        assert_eq!(a, b);
        assert_eq!(a.metadata.restart_losses.len(), 2);
        let min = a.metadata.restart_losses.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(a.final_loss, min);
        assert_eq!(a.metadata.dataset_hash.len(), 64);
        assert_eq!(a.theta.len(), 6);
    }

    #[test]
    fn noisy_executor_without_noise_matches_ideal() {
        let m = quick_model();
        let z = total_spin(2, Axis::Z);
        let ideal = predict(&m, 0.3, &z, &Executor::Ideal).unwrap();
        let noisy = predict(
            &m,
            0.3,
            &z,
            &Executor::Noisy(NoiseSpec::new(ChannelKind::AmplitudeDamping, 0.0)),
        )
        .unwrap();
        assert!((ideal - noisy).abs() < 1e-9);
    }

    #[test]
    fn identity_model_has_unit_fidelity_at_zero_steps() {
        let cfg = AnsatzConfig::new(2, 1, vec![0.0], 1.0, 0).unwrap();
        let mut m = quick_model();
        m.config = cfg;
        m.theta = vec![0.0; 6];
        for x in [-0.8, 0.0, 0.5] {
            assert!((fidelity_vs_exact(&m, x, 0, 0.1).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scale_warning_band() {
        let mut m = quick_model();
        m.a = 1.0;
        assert!(m.scale_warning().is_none());
        m.a = 1.2;
        assert!(m.scale_warning().is_some());
    }

    #[test]
    fn zero_restarts_rejected() {
        let cfg = AnsatzConfig::random(2, 1, 1).unwrap();
        let ds = gen_dataset(&ModelSpec::new(2, 0.01).unwrap(), 2, 5).unwrap();
        let opts = TrainingOptions {
            restarts: 0,
            ..Default::default()
        };
        assert!(train(&cfg, &ds, &opts).is_err());
    }
}
