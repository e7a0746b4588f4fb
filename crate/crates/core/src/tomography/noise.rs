//! Imperfect rotations: Gaussian offsets on `alpha` and `phi`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rotation::{TripletRotation, M3};
use crate::linalg::C64;
use crate::oscillator::gaussian_nodes;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Offsets drawn once per rotation and frozen.
    Biased,
    /// Offsets redrawn for every shot.
    Unbiased,
}

/// Offsets `N(0, sigma^2)` on both `alpha` and `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub mode: NoiseMode,
    pub seed: u64,
}

/// Deterministic generator for a key path below `seed`.
pub fn keyed_rng(seed: u64, key: &[u64]) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let mut h = 0x9e37_79b9_7f4a_7c15u64 ^ key.len() as u64;
    for &k in key {
        h = splitmix(h ^ k);
    }
    bytes[8..16].copy_from_slice(&h.to_le_bytes());
    bytes[16..24].copy_from_slice(&splitmix(h).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key of left rotation `i` or right rotation `j`.
pub fn rotation_key(right: bool, index: usize) -> u64 {
    ((right as u64) << 32) | index as u64
}

impl NoiseSpec {
    pub fn new(sigma: f64, mode: NoiseMode, seed: u64) -> Self {
        Self { sigma, mode, seed }
    }

    /// `(d_alpha, d_phi)` for rotation `key` at `shot`. Biased offsets ignore
    /// the shot.
    pub fn offsets(&self, key: u64, shot: u64) -> (f64, f64) {
        let mut rng = match self.mode {
            NoiseMode::Biased => keyed_rng(self.seed, &[key]),
            NoiseMode::Unbiased => keyed_rng(self.seed, &[key, shot]),
        };
        self.draw(&mut rng)
    }

    /// Two offsets from a caller-owned stream.
    pub fn draw<R: rand::Rng>(&self, rng: &mut R) -> (f64, f64) {
        let a: f64 = StandardNormal.sample(rng);
        let p: f64 = StandardNormal.sample(rng);
        (self.sigma * a, self.sigma * p)
    }
}

/// Rotation with its noise offsets added.
pub fn apply_noise(r: &TripletRotation, noise: &NoiseSpec, key: u64, shot: u64) -> TripletRotation {
    let (da, dp) = noise.offsets(key, shot);
    perturb(r, da, dp)
}

pub fn perturb(r: &TripletRotation, d_alpha: f64, d_phi: f64) -> TripletRotation {
    TripletRotation { theta: r.theta, phi: r.phi + d_phi, alpha: r.alpha + d_alpha }
}

/// `rho -> E[U_eps rho U_eps^dagger]` for `alpha`-only noise, by an
/// `nodes`-point Gauss-Hermite rule.
pub fn averaged_alpha_noise(r: &TripletRotation, sigma: f64, nodes: usize, rho: &M3) -> M3 {
    gaussian_nodes(nodes, sigma)
        .into_iter()
        .map(|(e, w)| {
            let u = perturb(r, e, 0.0).unitary();
            u * rho * u.adjoint() * C64::new(w, 0.0)
        })
        .sum()
}

/// Dephasing about the rotation axis to second order:
/// `U rho U^dagger - (sigma^2 / 2) [K, [K, U rho U^dagger]]` with `K = n . J`.
/// For a spin-1/2 axis `K = sigma_n` this is
/// `(1 - sigma^2) U rho U^dagger + sigma^2 sigma_n U rho U^dagger sigma_n`.
pub fn dephasing_channel(r: &TripletRotation, sigma: f64, rho: &M3) -> M3 {
    let u = r.unitary();
    let k = r.generator();
    let out = u * rho * u.adjoint();
    let inner = k * out - out * k;
    out - (k * inner - inner * k) * C64::new(0.5 * sigma * sigma, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_leaves_rotation_unchanged() {
        let r = TripletRotation::equatorial(0.4, 1.2);
        for mode in [NoiseMode::Biased, NoiseMode::Unbiased] {
            assert_eq!(apply_noise(&r, &NoiseSpec::new(0.0, mode, 9), 3, 7), r);
        }
    }

    #[test]
    fn biased_offsets_are_frozen() {
        let n = NoiseSpec::new(0.1, NoiseMode::Biased, 42);
        assert_eq!(n.offsets(5, 0), n.offsets(5, 1000));
        assert_ne!(n.offsets(5, 0), n.offsets(6, 0));
        let u = NoiseSpec::new(0.1, NoiseMode::Unbiased, 42);
        assert_ne!(u.offsets(5, 0), u.offsets(5, 1));
        assert_eq!(u.offsets(5, 3), u.offsets(5, 3));
    }

    #[test]
    fn alpha_noise_is_dephasing_to_fourth_order() {
        let r = TripletRotation::equatorial(0.7, 1.3);
        let rho = M3::new(
            C64::new(0.5, 0.0), C64::new(0.1, 0.2), C64::new(0.0, 0.1),
            C64::new(0.1, -0.2), C64::new(0.3, 0.0), C64::new(0.05, 0.0),
            C64::new(0.0, -0.1), C64::new(0.05, 0.0), C64::new(0.2, 0.0),
        );
        let err = |s: f64| (averaged_alpha_noise(&r, s, 12, &rho) - dephasing_channel(&r, s, &rho)).norm();
        let (e1, e2) = (err(0.05), err(0.025));
        assert!(e1 < 0.05f64.powi(4), "{e1}");
        assert!((e1 / e2 - 16.0).abs() < 0.5, "{}", e1 / e2);
    }
}
