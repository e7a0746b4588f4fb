//! Dense operators tagged with the basis they act on.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::BasisIndex;
use crate::linalg::{hermiticity_defect, CMatrix, C64};

/// A dense complex matrix over an enumerated basis.
///
/// The basis fingerprint travels with the matrix so that operators built on
/// different bases cannot be combined by accident.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    basis: u64,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, basis: &BasisIndex) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: matrix.nrows() });
        }
        Ok(Self { matrix, basis: basis.fingerprint() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis_fingerprint(&self) -> u64 {
        self.basis
    }

    pub fn acts_on(&self, basis: &BasisIndex) -> bool {
        self.basis == basis.fingerprint() && self.dim() == basis.len()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// Fails with [`Error::NotHermitian`] if any entry of `H - H^dagger` exceeds `tol`.
    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let d = self.hermiticity_defect();
        if d > tol {
            Err(Error::NotHermitian(d))
        } else {
            Ok(())
        }
    }

    /// Sum of two operators on the same basis.
    pub fn try_add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.basis != other.basis || self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { matrix: &self.matrix + &other.matrix, basis: self.basis })
    }

    pub fn to_snapshot(&self) -> MatrixSnapshot {
        MatrixSnapshot::from_matrix(&self.matrix, Some(self.basis))
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &self.to_snapshot())?;
        Ok(())
    }
}

/// JSON form of a dense complex matrix: row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSnapshot {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_fingerprint: Option<u64>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixSnapshot {
    pub fn from_matrix(m: &CMatrix, basis_fingerprint: Option<u64>) -> Self {
        let rows = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { dim: m.nrows(), basis_fingerprint, re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| C64::new(self.re[i][j], self.im[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::single_site_basis;

    #[test]
    fn rejects_wrong_dimension() {
        let b = single_site_basis(3).unwrap();
        assert!(OperatorMatrix::new(CMatrix::zeros(2, 2), &b).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let b = single_site_basis(3).unwrap();
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64 - 0.5));
        let op = OperatorMatrix::new(m.clone(), &b).unwrap();
        let mut buf = Vec::new();
        op.write_json(&mut buf).unwrap();
        let back: MatrixSnapshot = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back.to_matrix(), m);
        assert_eq!(back.basis_fingerprint, Some(b.fingerprint()));
    }

    #[test]
    fn hermiticity_check() {
        let b = single_site_basis(3).unwrap();
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = C64::new(0.0, 1.0);
        let op = OperatorMatrix::new(m, &b).unwrap();
        assert!(matches!(op.ensure_hermitian(1e-12), Err(Error::NotHermitian(_))));
    }
}
