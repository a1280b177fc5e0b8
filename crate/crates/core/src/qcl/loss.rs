// SPDX-License-Identifier: Apache-2.0

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{run_ideal, run_noisy, Circuit, NoiseSpec};
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::observable::ObservableSum;
use crate::qcl::ansatz::{build_ansatz, AnsatzConfig};
use crate::qcl::dataset::{encoded_state, Dataset, TrainingObservable};
use crate::qcl::encoding::input_encoding;
use crate::scalar::Real;
use crate::state::StateVector;

/// Loss weights `α₁..α₅` for `Z₁, Z_tot, X_tot, Y_tot, H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights(pub [f64; 5]);

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights([2.0, 1.0, 1.0, 1.0, 3.0])
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(invalid("loss weights must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn with_hamiltonian_weight(mut self, w: f64) -> Self {
        self.0[4] = w;
        self
    }
}

/// How circuits are executed when evaluating expectation values.
#[derive(Debug, Clone, PartialEq)]
pub enum Executor<T: Real> {
    Ideal,
    /// Density-matrix simulation with a channel after every elementary gate.
    Noisy(NoiseSpec<T>),
}

impl<T: Real> Executor<T> {
    /// `⟨obs⟩` on `circuit |0…0⟩`.
    pub fn expectation(&self, circuit: &Circuit<T>, obs: &ObservableSum<T>) -> Result<T> {
        self.expectations(circuit, std::slice::from_ref(obs)).map(|v| v[0])
    }

    pub fn expectations(&self, circuit: &Circuit<T>, obs: &[ObservableSum<T>]) -> Result<Vec<T>> {
        let l = circuit.num_qubits();
        match self {
            Executor::Ideal => {
                let psi = run_ideal(circuit, &StateVector::zero(l))?;
                obs.iter().map(|o| psi.expectation(o)).collect()
            }
            Executor::Noisy(noise) => {
                let rho = run_noisy(circuit, &StateVector::zero(l).to_density(), noise, true)?;
                obs.iter().map(|o| rho.expectation(o)).collect()
            }
        }
    }
}

/// `V(θ) V_in(x)`: encoding followed by the ansatz.
pub fn model_circuit<T: Real>(config: &AnsatzConfig<T>, theta: &[T], x: T) -> Result<Circuit<T>> {
    input_encoding(x, config.num_qubits)?.then(&build_ansatz(config, theta)?)
}

fn check_dims<T: Real>(config: &AnsatzConfig<T>, dataset: &Dataset<T>) -> Result<()> {
    dataset.validate()?;
    if dataset.spec.length != config.num_qubits {
        return Err(invalid(format!(
            "dataset has L = {}, ansatz has {} qubits",
            dataset.spec.length, config.num_qubits
        )));
    }
    Ok(())
}

/// `Σ_k α_k (1/M) Σ_i (a f_k(x_i; θ) − y_k(x_i))²`.
pub fn loss<T: Real>(
    theta: &[T],
    a: T,
    dataset: &Dataset<T>,
    config: &AnsatzConfig<T>,
    weights: &LossWeights,
    executor: &Executor<T>,
) -> Result<T> {
    check_dims(config, dataset)?;
    weights.validate()?;
    let ops = TrainingObservable::ALL
        .iter()
        .map(|o| o.operator(&dataset.spec))
        .collect::<Result<Vec<_>>>()?;
    let preds = dataset
        .xs
        .par_iter()
        .map(|&x| executor.expectations(&model_circuit(config, theta, x)?, &ops))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_residual(&preds, a, dataset, weights))
}

fn weighted_residual<T: Real>(preds: &[Vec<T>], a: T, dataset: &Dataset<T>, weights: &LossWeights) -> T {
    let m = T::lit(dataset.len() as f64);
    let mut total = T::zero();
    for (k, w) in weights.0.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let sq: T = preds
            .iter()
            .zip(&dataset.targets[k])
            .map(|(p, &y)| {
                let r = a * p[k] - y;
                r * r
            })
            .sum();
        total = total + T::lit(*w) * sq / m;
    }
    total
}

/// Ideal-executor loss with encoded inputs and observable matrices cached;
/// the ansatz unitary is built once per evaluation.
#[derive(Debug, Clone)]
pub struct LossEvaluator<T: Real> {
    config: AnsatzConfig<T>,
    dataset: Dataset<T>,
    weights: LossWeights,
    inputs: Vec<StateVector<T>>,
    ops: Vec<CMatrix<T>>,
}

impl<T: Real> LossEvaluator<T> {
    pub fn new(config: &AnsatzConfig<T>, dataset: &Dataset<T>, weights: &LossWeights) -> Result<Self> {
        check_dims(config, dataset)?;
        weights.validate()?;
        let inputs = dataset
            .xs
            .iter()
            .map(|&x| encoded_state(x, config.num_qubits))
            .collect::<Result<Vec<_>>>()?;
        let ops = TrainingObservable::ALL
            .iter()
            .map(|o| o.operator(&dataset.spec).map(|op| op.to_matrix()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: config.clone(),
            dataset: dataset.clone(),
            weights: *weights,
            inputs,
            ops,
        })
    }

    /// Model outputs `f_k(x_i; θ)` (without `a`) for every grid point.
    pub fn outputs(&self, theta: &[T]) -> Result<Vec<Vec<T>>> {
        let u = build_ansatz(&self.config, theta)?.unitary();
        Ok(self
            .inputs
            .iter()
            .map(|psi| {
                let v: Array1<_> = u.dot(psi.amplitudes());
                let conj = v.mapv(|z| z.conj());
                self.ops.iter().map(|o| conj.dot(&o.dot(&v)).re).collect()
            })
            .collect())
    }

    pub fn loss(&self, theta: &[T], a: T) -> Result<T> {
        Ok(weighted_residual(
            &self.outputs(theta)?,
            a,
            &self.dataset,
            &self.weights,
        ))
    }

    /// Objective over the joint vector `(θ, a)`.
    pub fn objective(&self, params: &[T]) -> T {
        let (theta, a) = params.split_at(params.len() - 1);
        self.loss(theta, a[0]).unwrap_or(T::nan())
    }

    pub fn num_params(&self) -> usize {
        self.config.num_params() + 1
    }
}
