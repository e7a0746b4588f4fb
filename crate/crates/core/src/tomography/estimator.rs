//! Single-shot estimators and simulated runs of the shadow protocol.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::choi::{choi_of_channel, kron3, Channel, ChannelId};
use super::mchannel::{build_m_channels, left_operators, right_operators, MChannel};
use super::noise::{keyed_rng, perturb, rotation_key, NoiseMode, NoiseSpec};
use super::rotation::{b_index, outcome_to_b, projector, rotation_unitary, RotationSet, TripletRotation, M3, M9};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::oscillator::gaussian_nodes;

/// `M_L^-1((U_L |1><1| U_L^dagger)^T) (x) M_R^-1(U_R^dagger |b><b| U_R)`.
pub fn single_shot_estimator(u_l: &M3, u_r: &M3, b: i8, ml: &MChannel, mr: &MChannel) -> M9 {
    let x = (u_l * projector(1) * u_l.adjoint()).transpose();
    let y = u_r.adjoint() * projector(b) * u_r;
    kron3(&ml.apply_inverse(&x), &mr.apply_inverse(&y))
}

/// Rotation sets with their inverted measurement maps and precomputed
/// estimator factors.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub left: RotationSet,
    pub right: RotationSet,
    pub ml: MChannel,
    pub mr: MChannel,
    left_unitaries: Vec<M3>,
    right_unitaries: Vec<M3>,
    /// `M_L^-1(X_i)`.
    left_factors: Vec<M3>,
    /// `M_R^-1(Y_jb)`, indexed `[j][b_index]`.
    right_factors: Vec<[M3; 3]>,
}

impl Protocol {
    pub fn new(left: RotationSet, right: RotationSet) -> Result<Self> {
        let (ml, mr) = build_m_channels(&left, &right)?;
        let left_factors = left_operators(&left).iter().map(|x| ml.apply_inverse(x)).collect();
        let right_factors = right_operators(&right).iter().map(|ys| ys.map(|y| mr.apply_inverse(&y))).collect();
        Ok(Self {
            left_unitaries: left.unitaries(),
            right_unitaries: right.unitaries(),
            left,
            right,
            ml,
            mr,
            left_factors,
            right_factors,
        })
    }

    /// The shipped 12 + 9 rotation sets.
    pub fn reference() -> Self {
        let (l, r) = RotationSet::reference_pair();
        Self::new(l, r).expect("reference sets are informationally complete")
    }

    /// Number of setting pairs `|S_L| |S_R|`.
    pub fn settings(&self) -> usize {
        self.left.len() * self.right.len()
    }

    pub fn left_factor(&self, i: usize) -> &M3 {
        &self.left_factors[i]
    }

    pub fn right_factor(&self, j: usize, b: i8) -> &M3 {
        &self.right_factors[j][b_index(b)]
    }

    pub fn estimator(&self, i: usize, j: usize, b: i8) -> M9 {
        kron3(&self.left_factors[i], self.right_factor(j, b))
    }

    /// Outcome probabilities `(P(b=1), P(b=0), P(b=-1))` for the ideal
    /// rotations.
    pub fn probabilities(&self, channel: &Channel, i: usize, j: usize) -> [f64; 3] {
        born(channel, &self.left_unitaries[i], &self.right_unitaries[j])
    }

    /// Exact average of the estimator over settings and outcomes, with the
    /// outcome distribution of each setting pair given by `probs`.
    pub fn average_with<F>(&self, probs: F) -> M9
    where
        F: Fn(usize, usize) -> [f64; 3] + Sync,
    {
        let nr = self.right.len();
        let parts: Vec<M9> = (0..self.settings())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / nr, k % nr);
                let p = probs(i, j);
                let y: M3 = (0..3).map(|n| self.right_factors[j][n] * C64::new(p[n], 0.0)).sum();
                kron3(&self.left_factors[i], &y)
            })
            .collect();
        parts.iter().sum::<M9>() / C64::new(self.settings() as f64, 0.0)
    }

    /// Infinite-sample average of the estimator for ideal rotations.
    pub fn exact_average(&self, channel: &Channel) -> M9 {
        self.average_with(|i, j| self.probabilities(channel, i, j))
    }
}

/// Born probabilities of `b = 1, 0, -1` after preparing `|b=1>`, applying
/// `U_L`, the channel and `U_R`.
pub fn born(channel: &Channel, u_l: &M3, u_r: &M3) -> [f64; 3] {
    let rho = u_l * projector(1) * u_l.adjoint();
    let out = u_r * channel.apply(&rho) * u_r.adjoint();
    [0, 1, 2].map(|k| out[(k, k)].re.max(0.0))
}

/// `||A - B||_F / 9`.
pub fn choi_distance(a: &M9, b: &M9) -> f64 {
    (a - b).norm() / 9.0
}

/// Sample a two-qubit outcome from triplet probabilities and convert it to
/// `b`. The `b = 0` population splits evenly between `|01>` and `|10>`.
pub fn sample_b<R: Rng>(p: &[f64; 3], rng: &mut R) -> i8 {
    let u: f64 = rng.random::<f64>() * (p[0] + p[1] + p[2]);
    let qubits = if u < p[0] {
        (false, false)
    } else if u < p[0] + 0.5 * p[1] {
        (false, true)
    } else if u < p[0] + p[1] {
        (true, false)
    } else {
        (true, true)
    };
    outcome_to_b(qubits.0, qubits.1)
}

/// Result of a simulated tomography run.
#[derive(Clone, Debug)]
pub struct TomographyRun {
    pub estimate: M9,
    pub target: M9,
    pub delta: f64,
    pub total_shots: u64,
}

/// Serialized summary of a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub channel_id: ChannelId,
    #[serde(rename = "N")]
    pub n: u64,
    pub delta: f64,
    #[serde(rename = "C_estimate")]
    pub c_estimate: f64,
    pub noise: NoiseRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseRecord {
    pub mode: Option<NoiseMode>,
    pub sigma: f64,
}

impl RunRecord {
    pub fn new(channel_id: ChannelId, run: &TomographyRun, noise: Option<&NoiseSpec>) -> Self {
        Self {
            channel_id,
            n: run.total_shots,
            delta: run.delta,
            c_estimate: run.delta * run.delta * run.total_shots as f64,
            noise: NoiseRecord { mode: noise.map(|n| n.mode), sigma: noise.map_or(0.0, |n| n.sigma) },
        }
    }
}

fn frozen_rotations(protocol: &Protocol, noise: &NoiseSpec) -> (Vec<M3>, Vec<M3>) {
    let perturbed = |set: &RotationSet, right: bool| -> Vec<M3> {
        set.rotations
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let (da, dp) = noise.offsets(rotation_key(right, k), 0);
                rotation_unitary(&perturb(r, da, dp))
            })
            .collect()
    };
    (perturbed(&protocol.left, false), perturbed(&protocol.right, true))
}

/// Algorithm steps 1a-1d repeated `shots_per_setting` times for every
/// setting pair, then averaged. Each setting pair draws from its own stream
/// keyed by `(seed, i, j)`.
pub fn run_tomography(
    channel: &Channel,
    protocol: &Protocol,
    shots_per_setting: u64,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<TomographyRun> {
    if shots_per_setting == 0 {
        return Err(Error::InvalidParameter("need at least one shot per setting".into()));
    }
    let nr = protocol.right.len();
    let frozen = match noise {
        Some(n) if n.mode == NoiseMode::Biased => Some(frozen_rotations(protocol, n)),
        _ => None,
    };
    let parts: Vec<M9> = (0..protocol.settings())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / nr, k % nr);
            let mut rng = keyed_rng(seed, &[i as u64, j as u64]);
            let mut counts = [0u64; 3];
            match (noise, &frozen) {
                (Some(n), None) => {
                    let (rl, rr) = (&protocol.left.rotations[i], &protocol.right.rotations[j]);
                    for _ in 0..shots_per_setting {
                        let (al, pl) = n.draw(&mut rng);
                        let (ar, pr) = n.draw(&mut rng);
                        let ul = rotation_unitary(&perturb(rl, al, pl));
                        let ur = rotation_unitary(&perturb(rr, ar, pr));
                        counts[b_index(sample_b(&born(channel, &ul, &ur), &mut rng))] += 1;
                    }
                }
                _ => {
                    let p = match &frozen {
                        Some((l, r)) => born(channel, &l[i], &r[j]),
                        None => protocol.probabilities(channel, i, j),
                    };
                    for _ in 0..shots_per_setting {
                        counts[b_index(sample_b(&p, &mut rng))] += 1;
                    }
                }
            }
            let y: M3 = (0..3).map(|n| protocol.right_factors[j][n] * C64::new(counts[n] as f64, 0.0)).sum();
            kron3(&protocol.left_factors[i], &y)
        })
        .collect();
    let total_shots = shots_per_setting * protocol.settings() as u64;
    let estimate = parts.iter().sum::<M9>() / C64::new(total_shots as f64, 0.0);
    let target = choi_of_channel(channel);
    Ok(TomographyRun { delta: choi_distance(&estimate, &target), estimate, target, total_shots })
}

/// Gauss-Hermite nodes per offset used for unbiased-noise averages.
pub const NOISE_NODES: usize = 6;

/// Infinite-sample estimate: the exact average of the estimator with the
/// outcome distribution of the imperfect rotations. Unbiased offsets are
/// integrated over their Gaussian distribution.
pub fn infinite_sample_estimate(channel: &Channel, protocol: &Protocol, noise: Option<&NoiseSpec>) -> M9 {
    match noise {
        None => protocol.exact_average(channel),
        Some(n) if n.mode == NoiseMode::Biased => {
            let (l, r) = frozen_rotations(protocol, n);
            protocol.average_with(|i, j| born(channel, &l[i], &r[j]))
        }
        Some(n) => {
            let nodes = gaussian_nodes(NOISE_NODES, n.sigma);
            let averaged = |r: &TripletRotation| -> Vec<(M3, f64)> {
                let mut out = Vec::new();
                for &(da, wa) in &nodes {
                    for &(dp, wp) in &nodes {
                        out.push((rotation_unitary(&perturb(r, da, dp)), wa * wp));
                    }
                }
                out
            };
            let lefts: Vec<Vec<(M3, f64)>> = protocol.left.rotations.iter().map(averaged).collect();
            let rights: Vec<Vec<(M3, f64)>> = protocol.right.rotations.iter().map(averaged).collect();
            protocol.average_with(|i, j| {
                let mut p = [0.0; 3];
                for (ul, wl) in &lefts[i] {
                    for (ur, wr) in &rights[j] {
                        let q = born(channel, ul, ur);
                        for k in 0..3 {
                            p[k] += wl * wr * q[k];
                        }
                    }
                }
                p
            })
        }
    }
}

/// `delta` in the limit of infinitely many shots.
pub fn infinite_sample_delta(channel: &Channel, protocol: &Protocol, noise: Option<&NoiseSpec>) -> f64 {
    choi_distance(&infinite_sample_estimate(channel, protocol, noise), &choi_of_channel(channel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precomputed_estimator_matches_direct_formula() {
        let p = Protocol::reference();
        let ul = p.left.rotations[3].unitary();
        let ur = p.right.rotations[5].unitary();
        for b in [1, 0, -1] {
            let d = single_shot_estimator(&ul, &ur, b, &p.ml, &p.mr) - p.estimator(3, 5, b);
            assert!(d.norm() < 1e-13);
        }
    }

    #[test]
    fn exact_average_is_unbiased() {
        let p = Protocol::reference();
        for ch in [Channel::identity(), Channel::cz()] {
            let d = (p.exact_average(&ch) - choi_of_channel(&ch)).norm();
            assert!(d < 1e-10, "{d}");
        }
    }

    #[test]
    fn sampled_outcomes_follow_born_rule() {
        let mut rng = keyed_rng(1, &[0]);
        let p = [0.2, 0.5, 0.3];
        let mut c = [0usize; 3];
        for _ in 0..100_000 {
            c[b_index(sample_b(&p, &mut rng))] += 1;
        }
        for k in 0..3 {
            assert!((c[k] as f64 / 1e5 - p[k]).abs() < 0.005);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let p = Protocol::reference();
        let a = run_tomography(&Channel::cz(), &p, 50, None, 7).unwrap();
        let b = run_tomography(&Channel::cz(), &p, 50, None, 7).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.total_shots, 50 * 108);
    }
}
