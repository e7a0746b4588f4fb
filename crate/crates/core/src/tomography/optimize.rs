//! Gradient descent over equatorial rotation sets.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::choi::Channel;
use super::complexity::{sample_complexity, upper_bound_a};
use super::estimator::Protocol;
use super::noise::keyed_rng;
use super::rotation::{Role, RotationSet};
use crate::error::{Error, Result};

/// Quantity to minimize.
#[derive(Clone, Debug, PartialEq)]
pub enum Loss {
    UpperBound,
    Complexity(Channel),
}

/// Descent settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DescentOptions {
    pub step: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub fd_step: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { step: 0.05, iterations: 200, restarts: 10, fd_step: 1e-5 }
    }
}

/// Best sets found.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub left: RotationSet,
    pub right: RotationSet,
    pub loss: f64,
    /// Accepted loss values of the winning restart, starting point first.
    pub history: Vec<f64>,
}

/// Parameter vector `(phi_L, alpha_L, phi_R, alpha_R)`, interleaved per rotation.
fn sets_from(x: &[f64], n_left: usize) -> Result<(RotationSet, RotationSet)> {
    let pairs: Vec<(f64, f64)> = x.chunks(2).map(|c| (c[0], c[1])).collect();
    Ok((
        RotationSet::from_angles(Role::Left, &pairs[..n_left])?,
        RotationSet::from_angles(Role::Right, &pairs[n_left..])?,
    ))
}

/// Loss of a parameter vector; `+inf` for incomplete sets.
pub fn evaluate(loss: &Loss, x: &[f64], n_left: usize) -> f64 {
    let Ok((l, r)) = sets_from(x, n_left) else { return f64::INFINITY };
    match Protocol::new(l, r) {
        Ok(p) => match loss {
            Loss::UpperBound => upper_bound_a(&p),
            Loss::Complexity(ch) => sample_complexity(&p, ch),
        },
        Err(_) => f64::INFINITY,
    }
}

fn gradient(loss: &Loss, x: &[f64], n_left: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let up = evaluate(loss, &y, n_left);
            y[k] = x[k] - h;
            let down = evaluate(loss, &y, n_left);
            y[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Backtracking gradient descent from `x`. Every accepted step lowers the
/// loss; returns the final point and the accepted loss values.
pub fn descend(loss: &Loss, mut x: Vec<f64>, n_left: usize, opts: &DescentOptions) -> (Vec<f64>, Vec<f64>) {
    let mut f = evaluate(loss, &x, n_left);
    let mut history = vec![f];
    if !f.is_finite() {
        return (x, history);
    }
    let mut step = opts.step;
    for _ in 0..opts.iterations {
        let g = gradient(loss, &x, n_left, opts.fd_step);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if !(g2 > 0.0) || !g2.is_finite() {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, d)| a - step * d).collect();
            let ft = evaluate(loss, &trial, n_left);
            if ft <= f - 1e-4 * step * g2 {
                x = trial;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(f);
        step *= 1.5;
    }
    (x, history)
}

/// Minimize `loss` over `(phi, alpha)` of `n_left` + `n_right` equatorial
/// rotations from `restarts` random starting sets.
pub fn optimize_sets(n_left: usize, n_right: usize, loss: &Loss, opts: &DescentOptions, seed: u64) -> Result<Optimized> {
    if n_left == 0 || n_right == 0 {
        return Err(Error::EmptySet);
    }
    let dim = 2 * (n_left + n_right);
    let runs: Vec<(Vec<f64>, Vec<f64>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = keyed_rng(seed, &[k as u64]);
            let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-PI..PI)).collect();
            descend(loss, x0, n_left, opts)
        })
        .collect();
    let (x, history) = runs
        .into_iter()
        .filter(|(_, h)| h.last().is_some_and(|f| f.is_finite()))
        .min_by(|a, b| a.1.last().unwrap().total_cmp(b.1.last().unwrap()))
        .ok_or_else(|| Error::OptimizationFailed(format!("all {} restarts started from incomplete sets", opts.restarts)))?;
    let (left, right) = sets_from(&x, n_left)?;
    Ok(Optimized { left, right, loss: *history.last().unwrap(), history })
}
