//! Harmonic-oscillator eigenfunctions and the overlap integrals built from them.
//!
//! Lengths are in units of the oscillator length, so `phi_n(x)` is the
//! normalized eigenfunction `H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))`.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;

/// Nodes used for every oscillator integral. Products of up to four
/// eigenfunctions below level 16 are polynomials of degree < 127 times a
/// Gaussian, which a 64-node rule integrates exactly.
pub const QUADRATURE_NODES: usize = 64;

fn rule() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(NonZeroUsize::new(QUADRATURE_NODES).unwrap()))
}

/// Polynomial part `h_n(x) = phi_n(x) exp(x^2/2)` of the normalized eigenfunction,
/// from the stable three-term recurrence.
pub fn hermite_polynomial_part(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    for k in 0..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * x * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_polynomial_part(n, x) * (-0.5 * x * x).exp()
}

/// `integral phi_i phi_j phi_k phi_l dx`.
///
/// The integrand is `poly(x) exp(-2 x^2)`; substituting `x = y / sqrt(2)`
/// puts it in Gauss-Hermite form.
pub fn quartic_overlap(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    s * rule().integrate(|y| {
        let x = y * s;
        hermite_polynomial_part(i, x)
            * hermite_polynomial_part(j, x)
            * hermite_polynomial_part(k, x)
            * hermite_polynomial_part(l, x)
    })
}

/// `<n| x^p |m>` for the oscillator eigenbasis.
pub fn position_moment(n: usize, m: usize, p: i32) -> f64 {
    rule().integrate(|x| hermite_polynomial_part(n, x) * hermite_polynomial_part(m, x) * x.powi(p))
}

/// Expectation of `f(eps)` for `eps ~ N(0, sigma^2)`.
pub fn gaussian_expectation<F: FnMut(f64) -> f64>(sigma: f64, mut f: F) -> f64 {
    let scale = std::f64::consts::SQRT_2 * sigma;
    rule().integrate(|y| f(scale * y)) / std::f64::consts::PI.sqrt()
}

/// Nodes and weights of an `n`-point rule for `N(0, sigma^2)` expectations.
pub fn gaussian_nodes(n: usize, sigma: f64) -> Vec<(f64, f64)> {
    let r = GaussHermite::new(NonZeroUsize::new(n).expect("at least one node"));
    let norm = std::f64::consts::PI.sqrt();
    r.iter()
        .map(|(x, w)| (std::f64::consts::SQRT_2 * sigma * *x, *w / norm))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigenfunctions_are_orthonormal() {
        for n in 0..6 {
            for m in 0..6 {
                let v = position_moment(n, m, 0);
                let expected = if n == m { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-13, "<{n}|{m}> = {v}");
            }
        }
    }

    #[test]
    fn ground_state_quartic_overlap_closed_form() {
        assert!((quartic_overlap(0, 0, 0, 0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn fourth_moment_matches_ladder_algebra() {
        // <n|x^4|n> = 3 (2n^2 + 2n + 1) / 4
        for n in 0..5 {
            let expected = 0.75 * (2 * n * n + 2 * n + 1) as f64;
            let got = position_moment(n, n, 4);
            assert!((got - expected).abs() < 1e-12 * expected, "n={n} got={got} expected={expected}");
        }
    }

    #[test]
    fn gaussian_second_moment() {
        let v = gaussian_expectation(0.3, |e| e * e);
        assert!((v - 0.09).abs() < 1e-14);
        let nodes = gaussian_nodes(8, 0.3);
        let m: f64 = nodes.iter().map(|(x, w)| w * x * x).sum();
        assert!((m - 0.09).abs() < 1e-13);
    }

    #[test]
    fn matches_direct_evaluation() {
        let direct = hermite_function(3, 0.7);
        let h3 = 8.0 * 0.7f64.powi(3) - 12.0 * 0.7;
        let norm = (8.0 * 6.0 * PI.sqrt()).sqrt();
        assert!((direct - h3 / norm * (-0.245f64).exp()).abs() < 1e-14);
    }
}
