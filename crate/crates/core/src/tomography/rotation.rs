//! Spin-1 rotations of the triplet subspace.
//!
//! Triplet basis order is `b = 1, 0, -1`, i.e. `|00>`, `(|01> + |10>)/sqrt 2`,
//! `|11>`; index 0 holds `b = 1`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

pub type M3 = Matrix3<C64>;
pub type M9 = SMatrix<C64, 9, 9>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn spin_x() -> M3 {
    let s = re(FRAC_1_SQRT_2);
    let z = re(0.0);
    M3::new(z, s, z, s, z, s, z, s, z)
}

pub fn spin_y() -> M3 {
    let p = C64::new(0.0, FRAC_1_SQRT_2);
    let z = re(0.0);
    M3::new(z, -p, z, p, z, -p, z, p, z)
}

pub fn spin_z() -> M3 {
    M3::from_diagonal(&nalgebra::Vector3::new(re(1.0), re(0.0), re(-1.0)))
}

/// Triplet index of measurement outcome `b`.
pub fn b_index(b: i8) -> usize {
    (1 - b) as usize
}

/// `b` of a two-qubit measurement result: `|00> -> 1`, `|01>, |10> -> 0`,
/// `|11> -> -1`.
pub fn outcome_to_b(first: bool, second: bool) -> i8 {
    1 - first as i8 - second as i8
}

/// `|b><b|`.
pub fn projector(b: i8) -> M3 {
    let mut p = M3::zeros();
    let k = b_index(b);
    p[(k, k)] = re(1.0);
    p
}

/// Rotation by `alpha` about `n(theta, phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletRotation {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
}

impl TripletRotation {
    /// Rotation about an equatorial axis.
    pub fn equatorial(phi: f64, alpha: f64) -> Self {
        Self { theta: std::f64::consts::FRAC_PI_2, phi, alpha }
    }

    /// `n . J`.
    pub fn generator(&self) -> M3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        spin_x() * re(st * cp) + spin_y() * re(st * sp) + spin_z() * re(ct)
    }

    /// `exp(-i alpha n . J)`.
    pub fn unitary(&self) -> M3 {
        rotation_unitary(self)
    }
}

/// `exp(-i alpha n . J)` in closed form: `K^3 = K` for a unit-axis spin-1
/// generator, so `U = 1 - i sin(alpha) K + (cos(alpha) - 1) K^2`.
///
/// ```
/// use fermion_pair::tomography::{rotation_unitary, TripletRotation};
/// let u = rotation_unitary(&TripletRotation { theta: 0.0, phi: 0.0, alpha: 0.4 });
/// assert!((u[(0, 0)] - num_complex::Complex64::from_polar(1.0, -0.4)).norm() < 1e-15);
/// ```
pub fn rotation_unitary(r: &TripletRotation) -> M3 {
    let k = r.generator();
    let (s, c) = r.alpha.sin_cos();
    M3::identity() - k * C64::new(0.0, s) + k * k * re(c - 1.0)
}

/// Which half of the protocol a set is used in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Left,
    Right,
}

/// One of the two rotation sets `S_L`, `S_R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSet {
    pub role: Role,
    pub rotations: Vec<TripletRotation>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    index: usize,
    phi: f64,
    alpha: f64,
}

const REFERENCE_LEFT: &str = include_str!("../../data/reference_left.csv");
const REFERENCE_RIGHT: &str = include_str!("../../data/reference_right.csv");

impl RotationSet {
    pub fn new(role: Role, rotations: Vec<TripletRotation>) -> Result<Self> {
        if rotations.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(Self { role, rotations })
    }

    /// Equatorial rotations from `(phi, alpha)` pairs.
    pub fn from_angles(role: Role, angles: &[(f64, f64)]) -> Result<Self> {
        Self::new(role, angles.iter().map(|&(p, a)| TripletRotation::equatorial(p, a)).collect())
    }

    /// `n` equatorial rotations with uniform `phi, alpha` in `[-pi, pi)`.
    pub fn random<R: rand::Rng>(role: Role, n: usize, rng: &mut R) -> Result<Self> {
        use std::f64::consts::PI;
        let angles: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(-PI..PI), rng.random_range(-PI..PI))).collect();
        Self::from_angles(role, &angles)
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn unitaries(&self) -> Vec<M3> {
        self.rotations.iter().map(rotation_unitary).collect()
    }

    /// Read an `index,phi,alpha` CSV of equatorial rotations. Lines starting
    /// with `#` are skipped.
    pub fn read_csv<R: std::io::Read>(role: Role, r: R) -> Result<Self> {
        let mut rows: Vec<Row> = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r).deserialize().collect::<std::result::Result<_, _>>()?;
        rows.sort_by_key(|r| r.index);
        Self::new(role, rows.iter().map(|r| TripletRotation::equatorial(r.phi, r.alpha)).collect())
    }

    pub fn load(role: Role, path: &Path) -> Result<Self> {
        Self::read_csv(role, std::fs::File::open(path)?)
    }

    /// Write as an `index,phi,alpha` CSV. Only the equatorial parametrization
    /// is stored.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (i, r) in self.rotations.iter().enumerate() {
            out.serialize(Row { index: i + 1, phi: r.phi, alpha: r.alpha })?;
        }
        out.flush()?;
        Ok(())
    }

    /// The optimized sets shipped with the crate (12 left, 9 right rotations).
    pub fn reference_pair() -> (Self, Self) {
        let l = Self::read_csv(Role::Left, REFERENCE_LEFT.as_bytes()).expect("bundled table");
        let r = Self::read_csv(Role::Right, REFERENCE_RIGHT.as_bytes()).expect("bundled table");
        (l, r)
    }
}

/// Isometry from the triplet subspace into the two-qubit space ordered
/// `|00>, |01>, |10>, |11>`.
pub fn triplet_isometry() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        4,
        3,
        &[1.0, 0.0, 0.0, 0.0, s, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0].map(re),
    )
}

/// `T^dagger U T` for a two-qubit operator `U`. Exact for operators that
/// leave the triplet subspace invariant.
pub fn triplet_restriction(u: &CMatrix) -> Result<M3> {
    if u.shape() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: u.nrows() });
    }
    let t = triplet_isometry();
    let r = t.adjoint() * u * &t;
    Ok(M3::from_fn(|i, j| r[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &M3, b: &M3) -> f64 {
        (a - b).norm()
    }

    #[test]
    fn generators_satisfy_spin_algebra() {
        let (x, y, z) = (spin_x(), spin_y(), spin_z());
        let i = C64::new(0.0, 1.0);
        assert!(dist(&(x * y - y * x), &(z * i)) < 1e-15);
        assert!(dist(&(y * z - z * y), &(x * i)) < 1e-15);
        let casimir = x * x + y * y + z * z;
        assert!(dist(&casimir, &(M3::identity() * re(2.0))) < 1e-15);
    }

    #[test]
    fn closed_form_matches_series_exponential() {
        let r = TripletRotation { theta: 0.7, phi: -1.1, alpha: 2.3 };
        let k = r.generator() * C64::new(0.0, -r.alpha);
        let mut term = M3::identity();
        let mut sum = M3::identity();
        for n in 1..60 {
            term = term * k / re(n as f64);
            sum += term;
        }
        assert!(dist(&sum, &r.unitary()) < 1e-13);
    }

    #[test]
    fn trivial_rotations() {
        let r = TripletRotation::equatorial(0.3, 0.0);
        assert!(dist(&r.unitary(), &M3::identity()) < 1e-15);
        let rz = TripletRotation { theta: 0.0, phi: 0.0, alpha: 0.8 }.unitary();
        let expect = M3::from_diagonal(&nalgebra::Vector3::new(C64::from_polar(1.0, -0.8), re(1.0), C64::from_polar(1.0, 0.8)));
        assert!(dist(&rz, &expect) < 1e-15);
    }

    #[test]
    fn pi_about_x_flips_b() {
        let u = TripletRotation::equatorial(0.0, std::f64::consts::PI).unitary();
        assert!((u[(b_index(-1), b_index(1))].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measurement_mapping() {
        assert_eq!(outcome_to_b(false, false), 1);
        assert_eq!(outcome_to_b(false, true), 0);
        assert_eq!(outcome_to_b(true, false), 0);
        assert_eq!(outcome_to_b(true, true), -1);
    }

    #[test]
    fn reference_sets_load() {
        let (l, r) = RotationSet::reference_pair();
        assert_eq!((l.len(), r.len()), (12, 9));
        assert_eq!(l.rotations[0].phi, -0.97332525);
        assert_eq!(r.rotations[8].alpha, 2.360425);
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        assert_eq!(RotationSet::read_csv(Role::Left, buf.as_slice()).unwrap(), l);
    }

    #[test]
    fn cz_on_triplet_is_diagonal() {
        let cz = crate::gates::cphase_target(std::f64::consts::PI);
        let r = triplet_restriction(&cz).unwrap();
        let expect = M3::from_diagonal(&nalgebra::Vector3::new(re(1.0), re(1.0), re(-1.0)));
        assert!(dist(&r, &expect) < 1e-15);
    }
}
