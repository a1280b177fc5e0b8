// SPDX-License-Identifier: Apache-2.0

//! Periodic XXX chain: Hamiltonian, Trotter circuits built from `Ř`,
//! exact and approximate conserved charges, and drift diagnostics.
//!
//! Chain sites `1..=L` map to qubits `0..L`; site `L + 1` wraps to site 1.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{invalid, Error, Result};
use crate::gates::{Axis, GateOp};
use crate::linalg::{self, CMatrix};
use crate::observable::{ObservableSum, Pauli, PauliString};
use crate::scalar::Real;
use crate::state::StateVector;

pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    pub length: usize,
    /// Trotter parameter `δ = -Jt/d`.
    pub delta: T,
    pub coupling: T,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(length: usize, delta: T) -> Result<Self> {
        let spec = Self {
            length,
            delta,
            coupling: T::one(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 || (self.length > 3 && self.length % 2 == 1) {
            return Err(invalid(format!(
                "chain length {} not supported (use 2, 3 or an even length)",
                self.length
            )));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta must be finite"));
        }
        Ok(())
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }
}

/// Qubit index of 1-based chain site `site` (any integer, wrapped).
pub fn site_qubit(site: i64, length: usize) -> usize {
    (site - 1).rem_euclid(length as i64) as usize
}

/// `σ_i · σ_j` with coefficient `w`.
pub fn heisenberg_bond<T: Real>(num_qubits: usize, i: usize, j: usize, w: T) -> Result<ObservableSum<T>> {
    if i == j {
        return Err(invalid(format!("bond needs distinct sites, got {i} twice")));
    }
    let terms = Pauli::XYZ
        .iter()
        .map(|&p| PauliString::sparse(num_qubits, &[(i, p), (j, p)], w))
        .collect::<Result<Vec<_>>>()?;
    ObservableSum::from_terms(num_qubits, terms)
}

/// `J Σ_j σ_j · σ_{j+1}` with periodic wrap. At `L = 2` the two bonds
/// coincide, giving `2 σ_1 · σ_2`.
pub fn xxx_hamiltonian<T: Real>(spec: &ModelSpec<T>) -> Result<ObservableSum<T>> {
    spec.validate()?;
    let l = spec.length;
    let mut h = ObservableSum::new(l);
    for j in 0..l {
        h = h.plus(&heisenberg_bond(l, j, (j + 1) % l, spec.coupling)?)?;
    }
    Ok(if l == 2 { h.simplified() } else { h })
}

pub fn total_spin<T: Real>(num_qubits: usize, axis: Axis) -> ObservableSum<T> {
    ObservableSum::total(num_qubits, axis.pauli())
}

/// One step `U(δ) = Π Ř_{2j-1,2j}(δ) Π Ř_{2j,2j+1}(δ)` for even `L`.
///
/// The rightmost product acts first, so the circuit runs the even-bond
/// layer `(2j, 2j+1)` before the odd-bond layer `(2j-1, 2j)`.
pub fn trotter_step_even<T: Real>(spec: &ModelSpec<T>) -> Result<Circuit<T>> {
    spec.validate()?;
    let l = spec.length;
    if l % 2 == 1 {
        return Err(invalid(format!(
            "U(δ) needs an even chain, got L = {l} (use u3_step for L = 3)"
        )));
    }
    let mut c = Circuit::new(l);
    let half = (l / 2) as i64;
    for j in 1..=half {
        let (a, b) = (site_qubit(2 * j, l), site_qubit(2 * j + 1, l));
        c.push(GateOp::check_r(a, b, spec.delta)?)?;
    }
    for j in 1..=half {
        let (a, b) = (site_qubit(2 * j - 1, l), site_qubit(2 * j, l));
        c.push(GateOp::check_r(a, b, spec.delta)?)?;
    }
    Ok(c)
}

/// `U₃(δ) = Ř₁₂(δ) Ř₂₃(δ) Ř₃₁(δ)`; `Ř₃₁` is applied first.
pub fn u3_step<T: Real>(delta: T) -> Result<Circuit<T>> {
    let mut c = Circuit::new(3);
    c.push(GateOp::check_r(2, 0, delta)?)?;
    c.push(GateOp::check_r(1, 2, delta)?)?;
    c.push(GateOp::check_r(0, 1, delta)?)?;
    Ok(c)
}

/// One evolution step for the chain: `U(δ)` for even `L`, `U₃(δ)` for `L = 3`.
pub fn evolution_step<T: Real>(spec: &ModelSpec<T>) -> Result<Circuit<T>> {
    spec.validate()?;
    match spec.length {
        3 => u3_step(spec.delta),
        _ => trotter_step_even(spec),
    }
}

/// `d` evolution steps.
pub fn evolution<T: Real>(spec: &ModelSpec<T>, steps: usize) -> Result<Circuit<T>> {
    Ok(evolution_step(spec)?.repeated(steps))
}

/// `σ_i · (σ_j × σ_k) = Σ ε_abc σ^a_i σ^b_j σ^c_k`
fn triple_product<T: Real>(num_qubits: usize, i: usize, j: usize, k: usize, w: T) -> Result<ObservableSum<T>> {
    let p = Pauli::XYZ;
    let mut out = ObservableSum::new(num_qubits);
    for (a, b, cc, sign) in [
        (0, 1, 2, 1.0),
        (1, 2, 0, 1.0),
        (2, 0, 1, 1.0),
        (0, 2, 1, -1.0),
        (2, 1, 0, -1.0),
        (1, 0, 2, -1.0),
    ] {
        out.push(PauliString::sparse(
            num_qubits,
            &[(i, p[a]), (j, p[b]), (k, p[cc])],
            w * T::lit(sign),
        )?)?;
    }
    Ok(out)
}

fn check_hermitian<T: Real>(obs: &ObservableSum<T>, what: &str) -> Result<()> {
    let err = linalg::hermiticity_error(&obs.to_matrix());
    if err > T::tol(1e-12) {
        return Err(Error::Validation(format!("{what} is not Hermitian ({err})")));
    }
    Ok(())
}

/// `q⁽¹⁾_{ijk}(σ, δ) = σ_i·σ_j + σ_j·σ_k + δ² σ_k·σ_i − σ δ σ_i·(σ_j × σ_k)`
/// on qubits `i, j, k`.
pub fn q1_local<T: Real>(
    num_qubits: usize,
    i: usize,
    j: usize,
    k: usize,
    sign: i8,
    delta: T,
) -> Result<ObservableSum<T>> {
    if i == j || j == k || i == k {
        return Err(invalid(format!("q1 needs distinct sites, got ({i}, {j}, {k})")));
    }
    if sign != 1 && sign != -1 {
        return Err(invalid("sign must be +1 or -1"));
    }
    let one = T::one();
    let q = heisenberg_bond(num_qubits, i, j, one)?
        .plus(&heisenberg_bond(num_qubits, j, k, one)?)?
        .plus(&heisenberg_bond(num_qubits, k, i, delta * delta)?)?
        .plus(&triple_product(num_qubits, i, j, k, -T::lit(sign as f64) * delta)?)?;
    Ok(q)
}

/// First Trotter charges `Q₁^±` of the even chain, `L ≥ 4`.
///
/// `Q₁^± = 1/(2(1+δ²)) Σ_n q⁽¹⁾(±, δ)` over triples `(2n-2, 2n-1, 2n)` for
/// `+` and `(2n-1, 2n, 2n+1)` for `-`. The overall factor `i` of the
/// log-derivative is dropped so the stored observable is Hermitian.
pub fn q1_charge<T: Real>(spec: &ModelSpec<T>, sign: i8) -> Result<ObservableSum<T>> {
    spec.validate()?;
    let l = spec.length;
    if l < 4 || l % 2 == 1 {
        return Err(Error::UnsupportedCharge(format!(
            "Q1 needs an even chain with L >= 4, got L = {l}"
        )));
    }
    let d = spec.delta;
    let pref = T::one() / (T::lit(2.0) * (T::one() + d * d));
    let mut q = ObservableSum::new(l);
    for n in 1..=(l / 2) as i64 {
        let first = if sign > 0 { 2 * n - 2 } else { 2 * n - 1 };
        let (a, b, cc) = (site_qubit(first, l), site_qubit(first + 1, l), site_qubit(first + 2, l));
        q = q.plus(&q1_local(l, a, b, cc, sign, d)?.scaled(pref))?;
    }
    check_hermitian(&q, "Q1")?;
    Ok(q)
}

/// Approximately conserved charges of the three-site chain.
#[derive(Debug, Clone)]
pub struct NearCharges<T: Real> {
    pub c1_plus: ObservableSum<T>,
    pub c1_minus: ObservableSum<T>,
    pub c2_plus: ObservableSum<T>,
    pub c2_minus: ObservableSum<T>,
}

impl<T: Real> NearCharges<T> {
    pub fn all(&self) -> [(&'static str, &ObservableSum<T>); 4] {
        [
            ("C1+", &self.c1_plus),
            ("C1-", &self.c1_minus),
            ("C2+", &self.c2_plus),
            ("C2-", &self.c2_minus),
        ]
    }
}

/// `C₁^± = q⁽¹⁾₁₂₃(±)`, `C₂^± = q⁽¹⁾₃₁₂(±) + q⁽¹⁾₂₃₁(±)`.
pub fn near_charges_l3<T: Real>(delta: T) -> Result<NearCharges<T>> {
    let c1 = |s| q1_local(3, 0, 1, 2, s, delta);
    let c2 = |s| q1_local(3, 2, 0, 1, s, delta)?.plus(&q1_local(3, 1, 2, 0, s, delta)?);
    let out = NearCharges {
        c1_plus: c1(1)?,
        c1_minus: c1(-1)?,
        c2_plus: c2(1)?,
        c2_minus: c2(-1)?,
    };
    for (name, o) in out.all() {
        check_hermitian(o, name)?;
    }
    Ok(out)
}

/// Max over `references` of `|<O>_after − <O>_before|`.
pub fn conservation_drift<T: Real>(c: &Circuit<T>, obs: &ObservableSum<T>, references: &[StateVector<T>]) -> Result<T> {
    let u = c.unitary();
    let mut worst = T::zero();
    for psi in references {
        let before = psi.expectation(obs)?;
        let after = psi.apply_full(&u)?.expectation(obs)?;
        worst = worst.max((after - before).abs());
    }
    Ok(worst)
}

/// Spectral norm of `U† O U − O`.
pub fn operator_drift<T: Real>(c: &Circuit<T>, obs: &ObservableSum<T>) -> Result<T> {
    if c.num_qubits() != obs.num_qubits() {
        return Err(invalid("circuit and observable disagree on qubit count"));
    }
    let u = c.unitary();
    Ok(operator_drift_dense(&u, &obs.to_matrix()))
}

pub fn operator_drift_dense<T: Real>(u: &CMatrix<T>, o: &CMatrix<T>) -> T {
    let conj = linalg::dagger(u).dot(o).dot(u);
    linalg::hermitian_spectral_norm(&(&conj - o))
}
