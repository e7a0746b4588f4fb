//! Sample-complexity functionals `A >= B >= C`.

use rayon::prelude::*;
use serde::Serialize;

use super::choi::{choi_of_channel, kron3, Channel};
use super::estimator::Protocol;
use super::rotation::M3;
use crate::linalg::C64;

/// Channel-independent upper bound
/// `A = mean_{i,j} ||M_L^-1(X_i)||^2 max_b ||M_R^-1(Y_jb)||^2 / 81`.
pub fn upper_bound_a(p: &Protocol) -> f64 {
    let left: f64 = (0..p.left.len()).map(|i| p.left_factor(i).norm_squared()).sum::<f64>() / p.left.len() as f64;
    let right: f64 = (0..p.right.len())
        .map(|j| [1i8, 0, -1].iter().map(|&b| p.right_factor(j, b).norm_squared()).fold(0.0, f64::max))
        .sum::<f64>()
        / p.right.len() as f64;
    left * right / 81.0
}

/// `B` and `C` for one channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complexity {
    /// Mean squared single-shot error.
    pub b: f64,
    /// `B` minus the per-setting bias term: the constant in
    /// `E[delta^2] = C / N`.
    pub c: f64,
}

/// Per-setting variance decomposition of the estimator error.
pub fn complexity(p: &Protocol, channel: &Channel) -> Complexity {
    let lambda = choi_of_channel(channel);
    let nr = p.right.len();
    let terms: Vec<(f64, f64)> = (0..p.settings())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / nr, k % nr);
            let prob = p.probabilities(channel, i, j);
            let mut second = 0.0;
            let mut mean_y = M3::zeros();
            for (n, b) in [1i8, 0, -1].into_iter().enumerate() {
                let est = p.estimator(i, j, b);
                second += prob[n] * (est - lambda).norm_squared();
                mean_y += p.right_factor(j, b) * C64::new(prob[n], 0.0);
            }
            let bias = (kron3(p.left_factor(i), &mean_y) - lambda).norm_squared();
            (second, bias)
        })
        .collect();
    let scale = 81.0 * p.settings() as f64;
    let b = terms.iter().map(|t| t.0).sum::<f64>() / scale;
    let bias = terms.iter().map(|t| t.1).sum::<f64>() / scale;
    Complexity { b, c: b - bias }
}

/// `C(S_L, S_R)(E)`.
///
/// ```
/// use fermion_pair::tomography::{sample_complexity, Channel, Protocol};
/// let c = sample_complexity(&Protocol::reference(), &Channel::cz());
/// assert!((c - 17.874).abs() < 1e-3);
/// ```
pub fn sample_complexity(p: &Protocol, channel: &Channel) -> f64 {
    complexity(p, channel).c
}
