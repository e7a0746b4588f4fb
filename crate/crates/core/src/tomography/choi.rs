//! Channels on the triplet subspace and their Choi matrices.
//!
//! `Lambda[(3i + j, 3k + l)] = E(|i><k|)[(j, l)]`.

use serde::{Deserialize, Serialize};

use super::rotation::{M3, M9};
use crate::linalg::C64;

/// A channel on 3x3 density matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Unitary(M3),
    Kraus(Vec<M3>),
}

impl Channel {
    pub fn identity() -> Self {
        Channel::Unitary(M3::identity())
    }

    /// CZ restricted to the triplet: `diag(1, 1, -1)`.
    pub fn cz() -> Self {
        let mut u = M3::identity();
        u[(2, 2)] = C64::new(-1.0, 0.0);
        Channel::Unitary(u)
    }

    /// Haar-random unitary channel.
    pub fn random_unitary<R: rand::Rng>(rng: &mut R) -> Self {
        let u = crate::linalg::haar_unitary(3, rng);
        Channel::Unitary(M3::from_fn(|i, j| u[(i, j)]))
    }

    pub fn apply(&self, rho: &M3) -> M3 {
        match self {
            Channel::Unitary(u) => u * rho * u.adjoint(),
            Channel::Kraus(ks) => ks.iter().map(|k| k * rho * k.adjoint()).sum(),
        }
    }

    /// `sum_k K_k^dagger K_k`; the identity for trace-preserving channels.
    pub fn completeness(&self) -> M3 {
        match self {
            Channel::Unitary(u) => u.adjoint() * u,
            Channel::Kraus(ks) => ks.iter().map(|k| k.adjoint() * k).sum(),
        }
    }
}

/// Named channels accepted by the command line and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelId {
    Identity,
    Cz,
}

impl ChannelId {
    pub fn channel(self) -> Channel {
        match self {
            ChannelId::Identity => Channel::identity(),
            ChannelId::Cz => Channel::cz(),
        }
    }
}

/// `|a><b|` in the triplet basis.
pub fn unit(a: usize, b: usize) -> M3 {
    let mut m = M3::zeros();
    m[(a, b)] = C64::new(1.0, 0.0);
    m
}

/// `A (x) B` with row index `3i + j`.
pub fn kron3(a: &M3, b: &M3) -> M9 {
    M9::from_fn(|r, c| a[(r / 3, c / 3)] * b[(r % 3, c % 3)])
}

/// `sum_{a,b} |a><b| (x) E(|a><b|)`.
///
/// ```
/// use fermion_pair::tomography::{choi_of_channel, Channel};
/// let l = choi_of_channel(&Channel::identity());
/// assert_eq!(l[(0, 8)].re, 1.0);
/// assert_eq!(l[(0, 1)].re, 0.0);
/// ```
pub fn choi_of_channel(channel: &Channel) -> M9 {
    let mut l = M9::zeros();
    for a in 0..3 {
        for b in 0..3 {
            l += kron3(&unit(a, b), &channel.apply(&unit(a, b)));
        }
    }
    l
}

/// `Tr_1((rho^T (x) 1) Lambda)`.
pub fn apply_choi(lambda: &M9, rho: &M3) -> M3 {
    M3::from_fn(|j, l| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..3 {
            for k in 0..3 {
                s += rho[(i, k)] * lambda[(3 * i + j, 3 * k + l)];
            }
        }
        s
    })
}

/// Trace over the output factor.
pub fn trace_output(lambda: &M9) -> M3 {
    M3::from_fn(|i, k| (0..3).map(|j| lambda[(3 * i + j, 3 * k + j)]).sum())
}
