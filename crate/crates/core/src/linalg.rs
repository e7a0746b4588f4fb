//! Small dense linear-algebra helpers shared by the simulation modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: rand::Rng>(n: usize, rng: &mut R) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for z in q.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Uniformly random pure state from normalized complex Gaussians.
pub fn haar_state<R: rand::Rng>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        C64::new(rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng), rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, rng))
    });
    v.normalize()
}

/// Largest entry of `|m - m^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_imag(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()))
}

/// `exp(-i h dt)` for a Hermitian `h`, via its eigendecomposition.
///
/// Real-symmetric input takes the real eigensolver, which is several times
/// faster and covers every Fermi-Hubbard Hamiltonian in this crate.
pub fn propagator(h: &CMatrix, dt: f64) -> CMatrix {
    let n = h.nrows();
    if max_imag(h) == 0.0 {
        let eig = SymmetricEigen::new(h.map(|z| z.re));
        let v = to_complex(&eig.eigenvectors);
        let phases = DVector::from_iterator(n, eig.eigenvalues.iter().map(|e| C64::from_polar(1.0, -e * dt)));
        let scaled = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * phases[j]);
        scaled * v.adjoint()
    } else {
        let eig = SymmetricEigen::new(h.clone());
        let v = eig.eigenvectors;
        let scaled = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * C64::from_polar(1.0, -eig.eigenvalues[j] * dt));
        scaled * v.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let (values, vectors) = if max_imag(h) == 0.0 {
        let eig = SymmetricEigen::new(h.map(|z| z.re));
        (eig.eigenvalues, to_complex(&eig.eigenvectors))
    } else {
        let eig = SymmetricEigen::new(h.clone());
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    (order.iter().map(|&k| values[k]).collect(), sorted)
}

/// Unitary factor `W` of the polar decomposition `m = W P`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    u * v_t
}

/// Largest entry of `|m^dagger m - 1|`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { c(1.0) } else { c(0.0) };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_of_diagonal_is_phase() {
        let h = to_complex(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0])));
        let u = propagator(&h, 0.3);
        assert!((u[(0, 0)] - C64::from_polar(1.0, -0.3)).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::from_polar(1.0, 0.6)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn complex_propagator_is_unitary() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.5), C64::new(0.1, -0.7), C64::new(0.1, 0.7), c(-0.2)]);
        let u = propagator(&h, 1.7);
        assert!(unitarity_defect(&u) < 1e-13);
    }

    #[test]
    fn polar_factor_of_scaled_unitary() {
        let u = propagator(&DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]), 0.4);
        let w = polar_unitary(&(u.clone() * c(0.9)));
        assert!((w - u).norm() < 1e-12);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, b) = linear_fit(&x, &y);
        assert!((s - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
    }
}
