// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::run_ideal;
use crate::error::{invalid, Error, Result};
use crate::gates::Axis;
use crate::model::{evolution, total_spin, xxx_hamiltonian, ModelSpec};
use crate::observable::{ObservableSum, Pauli};
use crate::qcl::encoding::input_encoding;
use crate::scalar::Real;
use crate::state::StateVector;

/// Observables entering the loss, in loss order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrainingObservable {
    Z1,
    Ztot,
    Xtot,
    Ytot,
    H,
}

impl TrainingObservable {
    pub const ALL: [TrainingObservable; 5] = [
        TrainingObservable::Z1,
        TrainingObservable::Ztot,
        TrainingObservable::Xtot,
        TrainingObservable::Ytot,
        TrainingObservable::H,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainingObservable::Z1 => "Z1",
            TrainingObservable::Ztot => "Ztot",
            TrainingObservable::Xtot => "Xtot",
            TrainingObservable::Ytot => "Ytot",
            TrainingObservable::H => "H",
        }
    }

    pub fn column(self) -> String {
        format!("y_{}", self.name())
    }

    /// Conserved by the evolution step, so its target is evaluated on the
    /// encoded input.
    pub fn is_conserved(self) -> bool {
        self != TrainingObservable::Z1
    }

    pub fn operator<T: Real>(self, spec: &ModelSpec<T>) -> Result<ObservableSum<T>> {
        let l = spec.length;
        match self {
            TrainingObservable::Z1 => ObservableSum::site(l, 0, Pauli::Z),
            TrainingObservable::Ztot => Ok(total_spin(l, Axis::Z)),
            TrainingObservable::Xtot => Ok(total_spin(l, Axis::X)),
            TrainingObservable::Ytot => Ok(total_spin(l, Axis::Y)),
            TrainingObservable::H => xxx_hamiltonian(spec),
        }
    }
}

impl FromStr for TrainingObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown observable '{s}'")))
    }
}

/// Training targets on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Real> {
    pub spec: ModelSpec<T>,
    pub steps: usize,
    pub xs: Vec<T>,
    /// One vector per [`TrainingObservable::ALL`] entry.
    pub targets: [Vec<T>; 5],
}

/// `M` equally spaced points on `[-1, 1]`.
pub fn uniform_grid<T: Real>(m: usize) -> Result<Vec<T>> {
    if m < 2 {
        return Err(invalid("grid needs at least two points"));
    }
    Ok((0..m).map(|i| T::lit(-1.0 + 2.0 * i as f64 / (m - 1) as f64)).collect())
}

pub fn encoded_state<T: Real>(x: T, num_qubits: usize) -> Result<StateVector<T>> {
    run_ideal(&input_encoding(x, num_qubits)?, &StateVector::zero(num_qubits))
}

/// Exact targets: conserved charges on the encoded input, `Z₁` after `d`
/// evolution steps.
pub fn gen_dataset<T: Real>(spec: &ModelSpec<T>, steps: usize, m: usize) -> Result<Dataset<T>> {
    gen_dataset_on(spec, steps, uniform_grid(m)?)
}

pub fn gen_dataset_on<T: Real>(spec: &ModelSpec<T>, steps: usize, xs: Vec<T>) -> Result<Dataset<T>> {
    spec.validate()?;
    let ops = TrainingObservable::ALL
        .iter()
        .map(|o| o.operator(spec))
        .collect::<Result<Vec<_>>>()?;
    let u = evolution(spec, steps)?.unitary();
    let rows = xs
        .par_iter()
        .map(|&x| {
            let psi = encoded_state(x, spec.length)?;
            let evolved = psi.apply_full(&u)?;
            TrainingObservable::ALL
                .iter()
                .zip(&ops)
                .map(|(o, op)| {
                    if o.is_conserved() {
                        psi.expectation(op)
                    } else {
                        evolved.expectation(op)
                    }
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let targets = std::array::from_fn(|k| rows.iter().map(|r| r[k]).collect());
    Ok(Dataset {
        spec: *spec,
        steps,
        xs,
        targets,
    })
}

impl<T: Real> Dataset<T> {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn target(&self, o: TrainingObservable) -> &[T] {
        let k = TrainingObservable::ALL.iter().position(|&t| t == o).unwrap();
        &self.targets[k]
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.iter().any(|t| t.len() != self.xs.len()) {
            return Err(Error::Validation("target length differs from grid length".into()));
        }
        if self.xs.iter().any(|x| x.is_nan() || x.abs() > T::one()) {
            return Err(Error::Validation("grid point outside [-1, 1]".into()));
        }
        Ok(())
    }

    /// Columnar text: metadata comment lines, header, one row per grid
    /// point, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# L={} d={} delta={:e} J={:e}",
            self.spec.length,
            self.steps,
            self.spec.delta.as_f64(),
            self.spec.coupling.as_f64()
        );
        s.push('x');
        for o in TrainingObservable::ALL {
            let _ = write!(s, ",{}", o.column());
        }
        s.push('\n');
        for (i, x) in self.xs.iter().enumerate() {
            let _ = write!(s, "{}", fmt12(*x));
            for t in &self.targets {
                let _ = write!(s, ",{}", fmt12(t[i]));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let perr = |m: String| Error::Parse(m);
        let mut meta = None;
        let mut header_seen = false;
        let mut xs = Vec::new();
        let mut targets: [Vec<T>; 5] = Default::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                meta = Some(parse_meta::<T>(rest)?);
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if !header_seen {
                let expected: Vec<String> = std::iter::once("x".to_string())
                    .chain(TrainingObservable::ALL.iter().map(|o| o.column()))
                    .collect();
                if cols != expected {
                    return Err(perr(format!("unexpected header '{line}'")));
                }
                header_seen = true;
                continue;
            }
            if cols.len() != 6 {
                return Err(perr(format!("line {}: expected 6 columns, got {}", n + 1, cols.len())));
            }
            let vals = cols
                .iter()
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| perr(format!("line {}: bad number '{c}'", n + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            xs.push(T::lit(vals[0]));
            for k in 0..5 {
                targets[k].push(T::lit(vals[k + 1]));
            }
        }
        let (spec, steps) = meta.ok_or_else(|| perr("missing '# L=.. d=.. delta=..' line".into()))?;
        if !header_seen {
            return Err(perr("missing header".into()));
        }
        let ds = Dataset {
            spec,
            steps,
            xs,
            targets,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the CSV form.
    pub fn hash(&self) -> String {
        hex_digest(self.to_csv().as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn fmt12<T: Real>(v: T) -> String {
    format!("{:.11e}", v.as_f64())
}

fn parse_meta<T: Real>(line: &str) -> Result<(ModelSpec<T>, usize)> {
    let mut l = None;
    let mut d = None;
    let mut delta = None;
    let mut j = 1.0;
    for kv in line.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad metadata token '{kv}'")))?;
        let bad = || Error::Parse(format!("bad metadata value '{kv}'"));
        match k {
            "L" => l = Some(v.parse::<usize>().map_err(|_| bad())?),
            "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
            "delta" => delta = Some(v.parse::<f64>().map_err(|_| bad())?),
            "J" => j = v.parse::<f64>().map_err(|_| bad())?,
            _ => return Err(Error::Parse(format!("unknown metadata key '{k}'"))),
        }
    }
    let (Some(l), Some(d), Some(delta)) = (l, d, delta) else {
        return Err(Error::Parse("metadata needs L, d and delta".into()));
    };
    let spec = ModelSpec {
        length: l,
        delta: T::lit(delta),
        coupling: T::lit(j),
    };
    spec.validate()?;
    Ok((spec, d))
}
