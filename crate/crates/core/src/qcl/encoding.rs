// SPDX-License-Identifier: Apache-2.0

use crate::circuit::{Circuit, ENCODE_LABEL};
use crate::error::{Error, Result};
use crate::gates::GateOp;
use crate::scalar::Real;

/// Input state preparation `V_in(x)` applied to `|0…0⟩`.
///
/// Qubits at even index (odd chain sites) get `RY(asin x)` then
/// `RZ(acos x²)`; the others get `RX(asin x)` then `RZ(acos x²)`.
/// All gates carry the [`ENCODE_LABEL`] label.
pub fn input_encoding<T: Real>(x: T, num_qubits: usize) -> Result<Circuit<T>> {
    if x.is_nan() || x.abs() > T::one() {
        return Err(Error::Domain(format!("encoding input {x} outside [-1, 1]")));
    }
    let lift = x.asin();
    let phase = (x * x).acos();
    let mut c = Circuit::new(num_qubits);
    for q in 0..num_qubits {
        let first = if q % 2 == 0 {
            GateOp::ry(q, lift)
        } else {
            GateOp::rx(q, lift)
        };
        c.push(first.with_label(ENCODE_LABEL))?;
        c.push(GateOp::rz(q, phase).with_label(ENCODE_LABEL))?;
    }
    Ok(c)
}
