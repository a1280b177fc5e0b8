// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix helpers.
//!
//! Local operators acting on an ordered target list are written in the
//! basis `|t_0 t_1 ...>` with `t_0` the most significant local bit, so
//! `kron(A, B)` on targets `[j, k]` acts as `A` on qubit `j` and `B` on
//! qubit `k`. Global basis indices are little-endian: qubit `q` is bit `q`.

use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut1};

use crate::error::{invalid, Result};
use crate::scalar::{cr, Real, C};

pub type CMatrix<T> = Array2<C<T>>;
pub type CVector<T> = Array1<C<T>>;

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    let mut m = Array2::zeros((dim, dim));
    for i in 0..dim {
        m[[i, i]] = cr(T::one());
    }
    m
}

pub fn dagger<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.t().mapv(|z| z.conj())
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = s * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn from_rows<T: Real>(rows: &[&[C<T>]]) -> CMatrix<T> {
    let n = rows.len();
    let mut m = Array2::zeros((n, rows[0].len()));
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[[i, j]] = *v;
        }
    }
    m
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), T::max)
}

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Deviation of `m† m` from the identity (max entry).
pub fn unitarity_error<T: Real>(m: &CMatrix<T>) -> T {
    let prod = dagger(m).dot(m);
    max_abs_diff(&prod, &identity(m.nrows()))
}

pub fn hermiticity_error<T: Real>(m: &CMatrix<T>) -> T {
    max_abs_diff(m, &dagger(m))
}

/// Frobenius distance between `a` and `b` after removing one global phase.
///
/// The phase is fitted on the largest-magnitude entry of `b`.
pub fn phase_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let mut best = (0usize, 0usize);
    let mut mag = T::zero();
    for ((i, j), z) in b.indexed_iter() {
        if z.norm() > mag {
            mag = z.norm();
            best = (i, j);
        }
    }
    if mag == T::zero() {
        return frobenius(a);
    }
    let ratio = a[best] / b[best];
    let phase = if ratio.norm() > T::zero() {
        ratio / cr(ratio.norm())
    } else {
        cr(T::one())
    };
    frobenius(&(a - &b.mapv(|z| z * phase)))
}

fn check_targets(targets: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(invalid(format!("target {t} out of range for {num_qubits} qubits")));
        }
        if targets[..i].contains(&t) {
            return Err(invalid(format!("duplicate target {t}")));
        }
    }
    Ok(())
}

/// Global-basis offsets of each local basis index for a target list.
fn local_offsets(targets: &[usize]) -> Vec<usize> {
    let m = targets.len();
    (0..1usize << m)
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .map(|(i, &t)| ((l >> (m - 1 - i)) & 1) << t)
                .sum()
        })
        .collect()
}

pub(crate) fn validate_local(local: &ArrayView2<C<impl Real>>, targets: &[usize], num_qubits: usize) -> Result<()> {
    check_targets(targets, num_qubits)?;
    let k = 1usize << targets.len();
    if local.nrows() != k || local.ncols() != k {
        return Err(invalid(format!(
            "local matrix is {}x{} but {} targets need {k}x{k}",
            local.nrows(),
            local.ncols(),
            targets.len()
        )));
    }
    Ok(())
}

/// Lift a local operator on `targets` to the full `2^L` space.
pub fn embed_operator<T: Real>(local: &CMatrix<T>, targets: &[usize], num_qubits: usize) -> Result<CMatrix<T>> {
    validate_local(&local.view(), targets, num_qubits)?;
    let dim = 1usize << num_qubits;
    let mask: usize = targets.iter().map(|t| 1usize << t).sum();
    let offsets = local_offsets(targets);
    let mut out = Array2::zeros((dim, dim));
    for base in (0..dim).filter(|b| b & mask == 0) {
        for (lr, &or) in offsets.iter().enumerate() {
            for (lc, &oc) in offsets.iter().enumerate() {
                out[[base | or, base | oc]] = local[[lr, lc]];
            }
        }
    }
    Ok(out)
}

/// In-place `v <- (I ⊗ local) v`. Targets must already be validated.
pub(crate) fn apply_local<T: Real>(v: &mut ArrayViewMut1<C<T>>, local: &ArrayView2<C<T>>, targets: &[usize]) {
    let dim = v.len();
    let mask: usize = targets.iter().map(|t| 1usize << t).sum();
    let offsets = local_offsets(targets);
    let k = offsets.len();
    let mut buf = vec![C::<T>::default(); k];
    for base in (0..dim).filter(|b| b & mask == 0) {
        for (l, &o) in offsets.iter().enumerate() {
            buf[l] = v[base | o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = C::<T>::default();
            for (l, b) in buf.iter().enumerate() {
                acc = acc + local[[r, l]] * *b;
            }
            v[base | o] = acc;
        }
    }
}

/// Apply `local` to the left of every column and `local†` to the right of
/// every row: `m <- E m E†`.
pub(crate) fn conjugate_in_place<T: Real>(m: &mut CMatrix<T>, local: &CMatrix<T>, targets: &[usize]) {
    let lv = local.view();
    for mut col in m.columns_mut() {
        apply_local(&mut col, &lv, targets);
    }
    let conj = local.mapv(|z| z.conj());
    let cv = conj.view();
    for mut row in m.rows_mut() {
        apply_local(&mut row, &cv, targets);
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Uses cyclic Jacobi on the real symmetric embedding `[[A, -B], [B, A]]`
/// of `H = A + iB`, whose spectrum is that of `H` with every value doubled.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Vec<T> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrize to absorb roundoff
            let z = (h[[i, j]] + h[[j, i]].conj()) * cr(T::lit(0.5));
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut evals = jacobi_eigenvalues(&mut a, m);
    evals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    evals.into_iter().step_by(2).collect()
}

fn jacobi_eigenvalues<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    let scale = a.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let tol = T::epsilon() * T::epsilon() * scale * scale * T::lit((n * n) as f64);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_spectral_norm<T: Real>(h: &CMatrix<T>) -> T {
    hermitian_eigenvalues(h)
        .into_iter()
        .map(|v| v.abs())
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn x() -> CMatrix<f64> {
        from_rows(&[&[cr(0.0), cr(1.0)], &[cr(1.0), cr(0.0)]])
    }

    #[test]
    fn embed_identity_is_identity() {
        let e = embed_operator(&identity::<f64>(2), &[0], 2).unwrap();
        assert_eq!(max_abs_diff(&e, &identity(4)), 0.0);
    }

    #[test]
    fn embed_rejects_bad_targets() {
        assert!(embed_operator(&x(), &[2], 2).is_err());
        let swap = kron(&x(), &x());
        assert!(embed_operator(&swap, &[1, 1], 3).is_err());
        assert!(embed_operator(&x(), &[0, 1], 3).is_err());
    }

    #[test]
    fn first_target_is_most_significant_local_bit() {
        // kron(X, I) on targets [2, 0] flips qubit 2 only
        let local = kron(&x(), &identity(2));
        let e = embed_operator(&local, &[2, 0], 3).unwrap();
        assert_eq!(e[[0b100, 0b000]], cr(1.0));
        assert_eq!(e[[0b101, 0b001]], cr(1.0));
    }

    #[test]
    fn eigenvalues_of_pauli_y() {
        let y = from_rows::<f64>(&[&[cr(0.0), c(0.0, -1.0)], &[c(0.0, 1.0), cr(0.0)]]);
        let ev = hermitian_eigenvalues(&y);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let m = x();
        let shifted = m.mapv(|z| z * c(0.6, 0.8));
        assert!(phase_distance(&shifted, &m) < 1e-14);
    }
}
