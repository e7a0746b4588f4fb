//! The measurement maps `M_L`, `M_R` and their inverses.
//!
//! Both maps have the form `rho -> mean_k Tr(X_k rho) X_k` for Hermitian
//! `X_k`, which in an orthonormal basis of Hermitian matrices is the real
//! symmetric matrix `mean_k x_k x_k^T`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{SMatrix, SVector};

use super::rotation::{projector, RotationSet, M3};
use crate::error::{Error, Result};
use crate::linalg::C64;

pub type R9 = SMatrix<f64, 9, 9>;
pub type V9 = SVector<f64, 9>;

/// Maps with a larger condition number count as informationally incomplete.
pub const MAX_CONDITION: f64 = 1e8;

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Coordinates in the orthonormal basis `E_kk`, `(E_ab + E_ba)/sqrt 2`,
/// `i (E_ab - E_ba)/sqrt 2`. Anti-Hermitian parts are discarded.
pub fn hermitian_to_real(h: &M3) -> V9 {
    let mut v = V9::zeros();
    for k in 0..3 {
        v[k] = h[(k, k)].re;
    }
    for (n, &(a, b)) in PAIRS.iter().enumerate() {
        let s = std::f64::consts::SQRT_2;
        v[3 + n] = s * 0.5 * (h[(a, b)].re + h[(b, a)].re);
        v[6 + n] = s * 0.5 * (h[(b, a)].im - h[(a, b)].im);
    }
    v
}

pub fn real_to_hermitian(v: &V9) -> M3 {
    let mut h = M3::zeros();
    for k in 0..3 {
        h[(k, k)] = C64::new(v[k], 0.0);
    }
    for (n, &(a, b)) in PAIRS.iter().enumerate() {
        let z = C64::new(v[3 + n], -v[6 + n]) * FRAC_1_SQRT_2;
        h[(a, b)] = z;
        h[(b, a)] = z.conj();
    }
    h
}

/// A measurement map and its inverse.
#[derive(Clone, Debug)]
pub struct MChannel {
    pub map: R9,
    pub inverse: R9,
    pub condition: f64,
}

impl MChannel {
    /// `mean_k Tr(X_k rho) X_k`.
    pub fn from_operators(ops: &[M3]) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut map = R9::zeros();
        for x in ops {
            let v = hermitian_to_real(x);
            map += v * v.transpose();
        }
        map /= ops.len() as f64;
        let eig = map.symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IncompleteSet(condition));
        }
        let inv_diag = eig.eigenvalues.map(|e| 1.0 / e);
        let inverse = eig.eigenvectors * R9::from_diagonal(&inv_diag) * eig.eigenvectors.transpose();
        Ok(Self { map, inverse, condition })
    }

    pub fn apply(&self, rho: &M3) -> M3 {
        real_to_hermitian(&(self.map * hermitian_to_real(rho)))
    }

    pub fn apply_inverse(&self, rho: &M3) -> M3 {
        real_to_hermitian(&(self.inverse * hermitian_to_real(rho)))
    }
}

/// `(U |1><1| U^dagger)^T` for each left rotation.
pub fn left_operators(set: &RotationSet) -> Vec<M3> {
    set.unitaries().iter().map(|u| (u * projector(1) * u.adjoint()).transpose()).collect()
}

/// `U^dagger |b><b| U` for each right rotation, indexed `[j][b_index]`.
pub fn right_operators(set: &RotationSet) -> Vec<[M3; 3]> {
    set.unitaries()
        .iter()
        .map(|u| [1i8, 0, -1].map(|b| u.adjoint() * projector(b) * u))
        .collect()
}

/// `(M_L, M_R)` for a pair of sets.
pub fn build_m_channels(left: &RotationSet, right: &RotationSet) -> Result<(MChannel, MChannel)> {
    let ml = MChannel::from_operators(&left_operators(left))?;
    let r: Vec<M3> = right_operators(right).into_iter().flatten().collect();
    // M_R averages over j only; the sum over b is not normalized.
    let mut mr = MChannel::from_operators(&r)?;
    mr.map *= 3.0;
    mr.inverse /= 3.0;
    Ok((ml, mr))
}
