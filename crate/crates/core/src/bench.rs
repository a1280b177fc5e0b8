// SPDX-License-Identifier: Apache-2.0

//! Experiment harness: configuration, ideal/noisy comparisons of original
//! and learned circuits, gate-count reports and reuse runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{gate_counts_with, run_ideal, run_noisy, Accounting, GateCounts, NoiseSpec};
use crate::error::{Error, Result};
use crate::model::{evolution_step, ModelSpec};
use crate::noise::ChannelKind;
use crate::observable::{ObservableSum, Pauli};
use crate::qcl::ansatz::ansatz_counts;
use crate::qcl::dataset::{fmt12, uniform_grid, TrainingObservable};
use crate::qcl::loss::LossWeights;
use crate::qcl::nelder_mead::NelderMeadOptions;
use crate::qcl::train::{original_circuit, TrainedModel, TrainingOptions};
use crate::scalar::Real;
use crate::state::{sample_observable, DensityMatrix, StateVector};

/// Resolved experiment settings, read from TOML.
///
/// ```toml
/// length = 2
/// delta = 0.01
/// steps = [4]
/// layers = [2]
/// channels = ["bitflip", "depolarizing"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub length: usize,
    pub delta: f64,
    pub coupling: f64,
    pub steps: Vec<usize>,
    /// Ansatz depths. Empty selects the default ladder: `D = 2` for
    /// `d <= 4` and `D = 4` beyond.
    pub layers: Vec<usize>,
    pub grid_size: usize,
    /// Explicit evaluation points for benchmarks; the uniform grid of
    /// `grid_size` points is used when empty.
    pub x_points: Vec<f64>,
    pub observables: Vec<String>,
    pub channels: Vec<ChannelKind>,
    /// Overrides the per-channel default probability.
    pub p: Option<f64>,
    /// Measurement shots for the noisy columns; 0 means exact.
    pub shots: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub accounting: Accounting,
    pub restarts: usize,
    pub alpha: [f64; 5],
    pub ftol: f64,
    pub max_iterations: usize,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            length: 2,
            delta: crate::model::DEFAULT_DELTA,
            coupling: 1.0,
            steps: vec![4],
            layers: Vec::new(),
            grid_size: 200,
            x_points: Vec::new(),
            observables: vec!["H".into(), "Ztot".into(), "Z1".into()],
            channels: ChannelKind::ALL.to_vec(),
            p: None,
            shots: 0,
            seed: 0,
            out_dir: PathBuf::from("out"),
            accounting: Accounting::Template,
            restarts: 8,
            alpha: LossWeights::default().0,
            ftol: NelderMeadOptions::default().ftol,
            max_iterations: NelderMeadOptions::default().max_iterations,
            repetitions: 2,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Error::Config(m);
        self.model_spec::<f64>()
            .map_err(|e| cfg_err(format!("length/delta: {e}")))?;
        if self.steps.is_empty() || self.steps.contains(&0) {
            return Err(cfg_err("steps must be non-empty and at least 1".into()));
        }
        if self.layers.contains(&0) {
            return Err(cfg_err("layers must be at least 1".into()));
        }
        if self.grid_size < 2 {
            return Err(cfg_err("grid_size must be at least 2".into()));
        }
        if self.x_points.iter().any(|x| x.is_nan() || x.abs() > 1.0) {
            return Err(cfg_err("x_points must lie in [-1, 1]".into()));
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(cfg_err(format!("p = {p} outside [0, 1]")));
            }
        }
        if self.restarts == 0 || self.repetitions == 0 {
            return Err(cfg_err("restarts and repetitions must be at least 1".into()));
        }
        LossWeights(self.alpha)
            .validate()
            .map_err(|e| cfg_err(format!("alpha: {e}")))?;
        for name in &self.observables {
            named_observable::<f64>(name, &self.model_spec()?)?;
        }
        Ok(())
    }

    /// Depths trained for `d` steps.
    pub fn layers_for(&self, d: usize) -> Vec<usize> {
        if self.layers.is_empty() {
            vec![if d <= 4 { 2 } else { 4 }]
        } else {
            self.layers.clone()
        }
    }

    /// Depths compared by a sweep; `{2, 3, 4}` unless configured.
    pub fn sweep_layers(&self) -> Vec<usize> {
        if self.layers.is_empty() {
            vec![2, 3, 4]
        } else {
            self.layers.clone()
        }
    }

    /// Every depth used by any configured `d`, sorted.
    pub fn all_layers(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.steps.iter().flat_map(|&d| self.layers_for(d)).collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn model_spec<T: Real>(&self) -> Result<ModelSpec<T>> {
        let spec = ModelSpec {
            length: self.length,
            delta: T::lit(self.delta),
            coupling: T::lit(self.coupling),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn training_options(&self) -> TrainingOptions {
        TrainingOptions {
            weights: LossWeights(self.alpha),
            restarts: self.restarts,
            optimizer: NelderMeadOptions {
                ftol: self.ftol,
                max_iterations: self.max_iterations,
                ..Default::default()
            },
            seed: self.seed,
        }
    }

    pub fn noise_probability(&self, kind: ChannelKind) -> f64 {
        self.p.unwrap_or_else(|| kind.default_probability())
    }

    pub fn eval_points<T: Real>(&self) -> Result<Vec<T>> {
        if self.x_points.is_empty() {
            uniform_grid(self.grid_size)
        } else {
            Ok(self.x_points.iter().map(|&x| T::lit(x)).collect())
        }
    }

    /// Error when a model was trained for a different chain.
    pub fn check_model<T: Real>(&self, model: &TrainedModel<T>) -> Result<()> {
        let close = (model.delta.as_f64() - self.delta).abs() <= 1e-12 * self.delta.abs().max(1.0);
        if model.num_qubits() != self.length || !close {
            return Err(Error::Config(format!(
                "model (L = {}, delta = {}) does not match config (L = {}, delta = {})",
                model.num_qubits(),
                model.delta.as_f64(),
                self.length,
                self.delta
            )));
        }
        Ok(())
    }
}

/// Training observables by name (`Z1`, `Ztot`, `Xtot`, `Ytot`, `H`) or a
/// single-site Pauli such as `X2` (1-based site).
pub fn named_observable<T: Real>(name: &str, spec: &ModelSpec<T>) -> Result<ObservableSum<T>> {
    if let Ok(o) = name.parse::<TrainingObservable>() {
        return o.operator(spec);
    }
    let mut chars = name.chars();
    let pauli = chars.next().and_then(Pauli::from_symbol);
    let site = chars.as_str().parse::<usize>().ok();
    match (pauli, site) {
        (Some(p), Some(s)) if p != Pauli::I && s >= 1 && s <= spec.length => ObservableSum::site(spec.length, s - 1, p),
        _ => Err(Error::Config(format!("unknown observable '{name}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub d: usize,
    pub observable: String,
    pub ideal_original: f64,
    pub ideal_learned: f64,
    pub noisy_original: f64,
    pub noisy_learned: f64,
    pub noise_kind: ChannelKind,
    pub p: f64,
    pub shots: u64,
}

pub const COMPARISON_HEADER: &str =
    "x,d,observable,ideal_original,ideal_learned,noisy_original,noisy_learned,noise_kind,p,shots";

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(COMPARISON_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt12(r.x),
            r.d,
            r.observable,
            fmt12(r.ideal_original),
            fmt12(r.ideal_learned),
            fmt12(r.noisy_original),
            fmt12(r.noisy_learned),
            r.noise_kind.name(),
            fmt12(r.p),
            r.shots
        );
    }
    s
}

/// Grid-averaged `|noisy − ideal_original|` for the original and learned
/// circuits, restricted to one observable and channel.
pub fn mean_deviation(rows: &[ComparisonRow], observable: &str, kind: ChannelKind) -> (f64, f64) {
    let sel: Vec<_> = rows
        .iter()
        .filter(|r| r.observable == observable && r.noise_kind == kind)
        .collect();
    let n = sel.len().max(1) as f64;
    let orig = sel
        .iter()
        .map(|r| (r.noisy_original - r.ideal_original).abs())
        .sum::<f64>()
        / n;
    let learned = sel
        .iter()
        .map(|r| (r.noisy_learned - r.ideal_original).abs())
        .sum::<f64>()
        / n;
    (orig, learned)
}

fn noisy_values<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &[(String, ObservableSum<T>)],
    shots: u64,
    seed: u64,
) -> Result<Vec<T>> {
    obs.iter()
        .enumerate()
        .map(|(k, (_, o))| {
            if shots == 0 {
                rho.expectation(o)
            } else {
                sample_observable(rho, o, shots, seed.wrapping_add(k as u64))
            }
        })
        .collect()
}

/// Four-way comparison at every evaluation point, observable and channel.
///
/// Learned columns include the scaling factor `a`. Noisy columns apply the
/// channel after every elementary gate (R-matrices run as their template)
/// and are shot-sampled when `config.shots > 0`. Rows are ordered by
/// channel, then `x`, then observable.
pub fn benchmark<T: Real>(config: &ExperimentConfig, model: &TrainedModel<T>) -> Result<Vec<ComparisonRow>> {
    config.check_model(model)?;
    let spec = model.spec();
    let d = model.steps;
    let obs = config
        .observables
        .iter()
        .map(|n| Ok((n.clone(), named_observable(n, &spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let xs = config.eval_points::<T>()?;
    let mut rows = Vec::new();
    for &kind in &config.channels {
        let p = config.noise_probability(kind);
        let noise = NoiseSpec::new(kind, T::lit(p));
        let chunks = xs
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let orig = original_circuit(&spec, x, d)?;
                let learned = model.learned_circuit(x, 1)?;
                let zero = StateVector::zero(spec.length);
                let ideal_o = run_ideal(&orig, &zero)?;
                let ideal_l = run_ideal(&learned, &zero)?;
                let noisy_o = run_noisy(&orig, &zero.to_density(), &noise, true)?;
                let noisy_l = run_noisy(&learned, &zero.to_density(), &noise, true)?;
                let seed = config
                    .seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add(2 * i as u64 * obs.len() as u64);
                let no = noisy_values(&noisy_o, &obs, config.shots, seed)?;
                let nl = noisy_values(&noisy_l, &obs, config.shots, seed.wrapping_add(obs.len() as u64))?;
                obs.iter()
                    .enumerate()
                    .map(|(k, (name, o))| {
                        Ok(ComparisonRow {
                            x: x.as_f64(),
                            d,
                            observable: name.clone(),
                            ideal_original: ideal_o.expectation(o)?.as_f64(),
                            ideal_learned: (model.a * ideal_l.expectation(o)?).as_f64(),
                            noisy_original: no[k].as_f64(),
                            noisy_learned: (model.a * nl[k]).as_f64(),
                            noise_kind: kind,
                            p,
                            shots: config.shots,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(chunks.into_iter().flatten());
    }
    if rows.iter().any(|r| {
        ![r.ideal_original, r.ideal_learned, r.noisy_original, r.noisy_learned]
            .iter()
            .all(|v| v.is_finite())
    }) {
        return Err(Error::Validation("non-finite value in comparison".into()));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCountRow {
    pub length: usize,
    pub d: usize,
    pub template: GateCounts,
    pub paper_tally: GateCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub original: Vec<GateCountRow>,
    /// `(D, counts)` for the ansatz.
    pub ansatz: Vec<(usize, GateCounts)>,
    /// `(D, d)`: smallest `d` at which the original circuit has more
    /// elementary gates than the ansatz under `accounting`.
    pub break_even: Vec<(usize, usize)>,
    pub accounting: Accounting,
}

/// Original-circuit counts for `d` evolution steps (encoding excluded).
pub fn original_counts(length: usize, d: usize, mode: Accounting) -> Result<GateCounts> {
    let spec = ModelSpec::<f64>::new(length, 0.1)?;
    gate_counts_with(&evolution_step(&spec)?.repeated(d), mode)
}

/// Smallest `d` for which the original circuit exceeds the ansatz in total
/// elementary gates.
pub fn break_even_steps(length: usize, layers: usize, mode: Accounting) -> Result<usize> {
    let per_step = original_counts(length, 1, mode)?.total();
    let ansatz = ansatz_counts(length, layers).total();
    Ok(ansatz / per_step + 1)
}

pub fn gatecount(config: &ExperimentConfig) -> Result<GateCountReport> {
    let l = config.length;
    let original = config
        .steps
        .iter()
        .map(|&d| {
            Ok(GateCountRow {
                length: l,
                d,
                template: original_counts(l, d, Accounting::Template)?,
                paper_tally: original_counts(l, d, Accounting::PaperTally)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let layers = config.all_layers();
    let ansatz = layers.iter().map(|&big_d| (big_d, ansatz_counts(l, big_d))).collect();
    let break_even = layers
        .iter()
        .map(|&big_d| Ok((big_d, break_even_steps(l, big_d, config.accounting)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GateCountReport {
        original,
        ansatz,
        break_even,
        accounting: config.accounting,
    })
}

impl GateCountReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "original circuit (single-qubit, CNOT)");
        for r in &self.original {
            let _ = writeln!(
                s,
                "  L={} d={:<3} template ({}, {})  paper-tally ({}, {})",
                r.length, r.d, r.template.single_qubit, r.template.cnot, r.paper_tally.single_qubit, r.paper_tally.cnot
            );
        }
        let _ = writeln!(s, "learned circuit (single-qubit, CNOT)");
        for (big_d, c) in &self.ansatz {
            let _ = writeln!(s, "  D={big_d} ({}, {})", c.single_qubit, c.cnot);
        }
        let _ = writeln!(s, "break-even depth ({} accounting)", self.accounting);
        for (big_d, d) in &self.break_even {
            let _ = writeln!(s, "  D={big_d}: learned circuit shallower from d={d}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,L,d,D,accounting,single_qubit,cnot\n");
        for r in &self.original {
            let _ = writeln!(
                s,
                "original,{},{},,template,{},{}",
                r.length, r.d, r.template.single_qubit, r.template.cnot
            );
            let _ = writeln!(
                s,
                "original,{},{},,paper-tally,{},{}",
                r.length, r.d, r.paper_tally.single_qubit, r.paper_tally.cnot
            );
        }
        let l = self.original.first().map(|r| r.length).unwrap_or(0);
        for (big_d, c) in &self.ansatz {
            let _ = writeln!(s, "ansatz,{l},,{big_d},,{},{}", c.single_qubit, c.cnot);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseRow {
    pub x: f64,
    pub repetitions: usize,
    pub steps: usize,
    pub exact: f64,
    pub learned: f64,
}

/// `⟨Z₁⟩` after `n` applications of the learned ansatz against exact
/// evolution over `n·d` steps.
pub fn reuse<T: Real>(config: &ExperimentConfig, model: &TrainedModel<T>, n: usize) -> Result<Vec<ReuseRow>> {
    config.check_model(model)?;
    if n == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let spec = model.spec();
    let z1 = ObservableSum::site(spec.length, 0, Pauli::Z)?;
    let steps = n * model.steps;
    config
        .eval_points::<T>()?
        .par_iter()
        .map(|&x| {
            let zero = StateVector::zero(spec.length);
            let exact = run_ideal(&original_circuit(&spec, x, steps)?, &zero)?.expectation(&z1)?;
            let learned = model.a * run_ideal(&model.learned_circuit(x, n)?, &zero)?.expectation(&z1)?;
            Ok(ReuseRow {
                x: x.as_f64(),
                repetitions: n,
                steps,
                exact: exact.as_f64(),
                learned: learned.as_f64(),
            })
        })
        .collect()
}

pub fn reuse_mean_deviation(rows: &[ReuseRow]) -> f64 {
    rows.iter().map(|r| (r.learned - r.exact).abs()).sum::<f64>() / rows.len().max(1) as f64
}

pub fn reuse_csv(rows: &[ReuseRow]) -> String {
    let mut s = String::from("x,repetitions,steps,exact_Z1,learned_Z1\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt12(r.x),
            r.repetitions,
            r.steps,
            fmt12(r.exact),
            fmt12(r.learned)
        );
    }
    s
}

/// Resolved configuration plus the command that produced a run directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub outputs: Vec<String>,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: &'a str, config: &'a ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("manifest_{}.json", self.command));
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_unknown_keys() {
        let cfg = ExperimentConfig::from_toml("length = 3\nsteps = [5]\n").unwrap();
        assert_eq!(cfg.length, 3);
        assert_eq!(cfg.restarts, 8);
        let err = ExperimentConfig::from_toml("lenght = 3\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("lenght"), "{err}");
        assert!(ExperimentConfig::from_toml("channels = [\"nope\"]").is_err());
        assert!(ExperimentConfig::from_toml("length = 5").is_err());
        assert!(ExperimentConfig::from_toml("observables = [\"Q9\"]").is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = ExperimentConfig {
            p: Some(0.02),
            x_points: vec![-0.3, 0.1],
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn noise_defaults() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.noise_probability(ChannelKind::BitFlip), 0.005);
        assert_eq!(cfg.noise_probability(ChannelKind::PhaseDamping), 0.01);
    }

    #[test]
    fn observable_names() {
        let spec = ModelSpec::<f64>::new(3, 0.1).unwrap();
        assert_eq!(
            named_observable("X2", &spec).unwrap(),
            ObservableSum::site(3, 1, Pauli::X).unwrap()
        );
        assert!(named_observable("X4", &spec).is_err());
        assert!(named_observable("I1", &spec).is_err());
        assert_eq!(named_observable("ztot", &spec).unwrap().terms().len(), 3);
    }

    #[test]
    fn gatecount_examples() {
        assert_eq!(
            original_counts(2, 15, Accounting::PaperTally).unwrap(),
            GateCounts::new(150, 120)
        );
        assert_eq!(
            original_counts(3, 2, Accounting::Template).unwrap(),
            GateCounts::new(30, 18)
        );
        let cfg = ExperimentConfig {
            steps: vec![1, 15],
            layers: vec![2, 4],
            ..Default::default()
        };
        let rep = gatecount(&cfg).unwrap();
        assert_eq!(rep.ansatz[1], (4, GateCounts::new(28, 8)));
        assert!(rep.to_text().contains("paper-tally (150, 120)"));
        assert_eq!(rep.to_csv().lines().count(), 1 + 4 + 2);
    }

    #[test]
    fn break_even_grows_with_length() {
        for mode in [Accounting::Template, Accounting::PaperTally] {
            let b: Vec<_> = [2, 3, 4]
                .iter()
                .map(|&l| break_even_steps(l, 4, mode).unwrap())
                .collect();
            assert!(b.windows(2).all(|w| w[0] <= w[1]), "{b:?}");
            assert!(b[2] > b[0]);
        }
    }
}
