// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{zz_block, Circuit, GateCounts};
use crate::error::{invalid, Result};
use crate::gates::GateOp;
use crate::scalar::Real;

/// Fixed structure of the learned circuit: qubit count, layer count and the
/// frozen all-to-all Ising couplings `a_jk` (pairs `j < k` in lexicographic
/// order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzConfig<T> {
    pub num_qubits: usize,
    pub layers: usize,
    pub couplings: Vec<T>,
    /// Evolution time of the Ising block.
    pub time: T,
    pub seed: u64,
}

pub fn num_pairs(num_qubits: usize) -> usize {
    num_qubits * num_qubits.saturating_sub(1) / 2
}

/// Pairs `(j, k)`, `j < k`, in coupling order.
pub fn pairs(num_qubits: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..num_qubits).flat_map(move |j| (j + 1..num_qubits).map(move |k| (j, k)))
}

impl<T: Real> AnsatzConfig<T> {
    pub fn new(num_qubits: usize, layers: usize, couplings: Vec<T>, time: T, seed: u64) -> Result<Self> {
        let cfg = Self {
            num_qubits,
            layers,
            couplings,
            time,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Couplings drawn uniformly from `[-1, 1]`, `T = 1`.
    pub fn random(num_qubits: usize, layers: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let couplings = (0..num_pairs(num_qubits))
            .map(|_| T::lit(rng.random_range(-1.0..=1.0)))
            .collect();
        Self::new(num_qubits, layers, couplings, T::one(), seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 {
            return Err(invalid("ansatz needs at least two qubits"));
        }
        if self.layers == 0 {
            return Err(invalid("ansatz needs at least one layer"));
        }
        if self.couplings.len() != num_pairs(self.num_qubits) {
            return Err(invalid(format!(
                "expected {} couplings, got {}",
                num_pairs(self.num_qubits),
                self.couplings.len()
            )));
        }
        if !self.couplings.iter().all(|a| a.is_finite()) || !self.time.is_finite() {
            return Err(invalid("couplings and time must be finite"));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        3 * self.num_qubits * self.layers
    }

    /// Same couplings with a different layer count.
    pub fn with_layers(&self, layers: usize) -> Result<Self> {
        Self::new(self.num_qubits, layers, self.couplings.clone(), self.time, self.seed)
    }
}

/// `W_D ⋯ W_1`: each layer is `e^{i H_d T}` as ZZ blocks, then
/// `RX, RZ, RX` on every qubit with angles `θ[3(L·I + q) ..]`.
pub fn build_ansatz<T: Real>(config: &AnsatzConfig<T>, theta: &[T]) -> Result<Circuit<T>> {
    config.validate()?;
    if theta.len() != config.num_params() {
        return Err(invalid(format!(
            "ansatz expects {} angles, got {}",
            config.num_params(),
            theta.len()
        )));
    }
    let l = config.num_qubits;
    let mut c = Circuit::new(l);
    for layer in 0..config.layers {
        for ((j, k), &a) in pairs(l).zip(&config.couplings) {
            c.append(&zz_block(a * config.time, j, k, l)?)?;
        }
        for q in 0..l {
            let t = &theta[3 * (l * layer + q)..3 * (l * layer + q) + 3];
            c.push(GateOp::rx(q, t[0]))?;
            c.push(GateOp::rz(q, t[1]))?;
            c.push(GateOp::rx(q, t[2]))?;
        }
    }
    Ok(c)
}

/// Closed-form counts `(L(L+5)D/2, L(L-1)D)`.
pub fn ansatz_counts(num_qubits: usize, layers: usize) -> GateCounts {
    GateCounts::new(
        num_qubits * (num_qubits + 5) * layers / 2,
        num_qubits * num_qubits.saturating_sub(1) * layers,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate_counts;
    use crate::linalg::{identity, phase_distance};

    #[test]
    fn counts_match_closed_form() {
        for (l, d) in [(2, 2), (3, 4), (4, 1)] {
            let cfg = AnsatzConfig::<f64>::random(l, d, 7).unwrap();
            let c = build_ansatz(&cfg, &vec![0.3; cfg.num_params()]).unwrap();
            assert_eq!(gate_counts(&c).unwrap(), ansatz_counts(l, d));
        }
        assert_eq!(ansatz_counts(2, 2), GateCounts::new(14, 4));
        assert_eq!(ansatz_counts(3, 4), GateCounts::new(48, 24));
    }

    #[test]
    fn zero_parameters_give_identity() {
        let cfg = AnsatzConfig::new(3, 2, vec![0.0; 3], 1.0, 0).unwrap();
        let u = build_ansatz(&cfg, &[0.0; 18]).unwrap().unitary();
        assert!(phase_distance(&u, &identity(8)) < 1e-14);
    }

    #[test]
    fn random_couplings_are_seeded_and_bounded() {
        let a = AnsatzConfig::<f64>::random(4, 2, 11).unwrap();
        let b = AnsatzConfig::<f64>::random(4, 2, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.couplings.len(), 6);
        assert!(a.couplings.iter().all(|x| x.abs() <= 1.0));
        assert_ne!(a.couplings, AnsatzConfig::<f64>::random(4, 2, 12).unwrap().couplings);
    }

    #[test]
    fn validation() {
        assert!(AnsatzConfig::new(2, 0, vec![0.1], 1.0, 0).is_err());
        assert!(AnsatzConfig::new(2, 1, vec![0.1, 0.2], 1.0, 0).is_err());
        assert!(AnsatzConfig::new(2, 1, vec![f64::NAN], 1.0, 0).is_err());
        let cfg = AnsatzConfig::new(2, 1, vec![0.1], 1.0, 0).unwrap();
        assert!(build_ansatz(&cfg, &[0.0; 5]).is_err());
    }

    #[test]
    fn pair_order() {
        assert_eq!(pairs(3).collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
    }
}
