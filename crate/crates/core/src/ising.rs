//! Transverse-field Ising dynamics engineered by modulating the interaction
//! strength at the qubit frequency.
//!
//! Logical operators use `sigma_z |0> = +|0>`, where `|0>` (both fermions in
//! level 1) sits `E_R` above `|1>`. Two-qubit matrices are ordered
//! `|00>, |01>, |10>, |11>` with the left site first.

use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{apply_step, PulseSchedule};
use crate::gates::{aligned_dressed_basis, haar_fidelity_closed_form, Register, D};
use crate::hamiltonian::{g_prefactor, omega_j_prefactor};
use crate::linalg::{hermitian_eigen, linear_fit, to_complex, CMatrix, C64};

/// Rabi-frequency coefficient of the single-qubit two-level model.
pub fn rabi_coefficient() -> f64 {
    (PI / 128.0).sqrt()
}

/// `Omega = sqrt(pi / 128) U1`.
pub fn rabi_frequency(u1: f64) -> f64 {
    rabi_coefficient() * u1
}

/// Driven single-qubit Hamiltonian in the lab frame, basis `(|0>, |1>)`.
pub fn single_qubit_lab(u0: f64, u1: f64, delta: f64, e_r: f64, t: f64) -> CMatrix {
    let off = rabi_coefficient() * (u0 + u1 * ((e_r + delta) * t).cos());
    to_complex(&DMatrix::from_row_slice(2, 2, &[e_r / 2.0, off, off, -e_r / 2.0]))
}

/// Time-averaged single-qubit Hamiltonian in the frame rotating at `E_R + Delta`.
///
/// ```
/// use fermion_pair::ising::single_qubit_effective;
/// let h = single_qubit_effective(30.0, 2.0, 0.1, 884.0);
/// assert!((h[(0, 1)].re - 0.5 * (std::f64::consts::PI / 128.0).sqrt() * 2.0).abs() < 1e-15);
/// assert!((h[(0, 0)].re + 0.05).abs() < 1e-15);
/// ```
pub fn single_qubit_effective(_u0: f64, u1: f64, delta: f64, _e_r: f64) -> CMatrix {
    let off = 0.5 * rabi_frequency(u1);
    to_complex(&DMatrix::from_row_slice(2, 2, &[-delta / 2.0, off, off, delta / 2.0]))
}

/// One-period propagator of a Hamiltonian periodic in `t` with period
/// `period`, starting at `t0`, from `steps` midpoint steps.
pub fn floquet_propagator<F: FnMut(f64) -> CMatrix>(mut h: F, t0: f64, period: f64, steps: usize) -> CMatrix {
    let dt = period / steps as f64;
    let n = h(t0).nrows();
    let mut u = CMatrix::identity(n, n);
    for k in 0..steps {
        apply_step(&h(t0 + (k as f64 + 0.5) * dt), dt, &mut u);
    }
    u
}

/// Oscillation frequency of a sampled signal from its upward crossings of
/// the midpoint between its extremes (least-squares line through the
/// crossing times).
pub fn oscillation_frequency(times: &[f64], signal: &[f64]) -> Option<f64> {
    let lo = signal.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let mut crossings = Vec::new();
    for k in 1..signal.len() {
        let (a, b) = (signal[k - 1] - mid, signal[k] - mid);
        if a < 0.0 && b >= 0.0 {
            let f = a / (a - b);
            crossings.push(times[k - 1] + f * (times[k] - times[k - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let idx: Vec<f64> = (0..crossings.len()).map(|i| i as f64).collect();
    let (period, _) = linear_fit(&idx, &crossings);
    Some(2.0 * PI / period)
}

/// Lab-frame Rabi oscillation of the driven two-level model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RabiMeasurement {
    /// Oscillation angular frequency of the `|1>` population.
    pub measured: f64,
    /// `sqrt(Delta^2 + Omega^2)`.
    pub predicted: f64,
}

/// Simulate the lab-frame two-level model from `|0>` over `rabi_periods`
/// predicted periods and measure the population oscillation frequency.
pub fn measure_rabi(u0: f64, u1: f64, delta: f64, e_r: f64, rabi_periods: f64, steps_per_drive: usize) -> Result<RabiMeasurement> {
    let predicted = (delta * delta + rabi_frequency(u1).powi(2)).sqrt();
    if predicted == 0.0 {
        return Err(Error::InvalidParameter("no drive and no detuning: nothing oscillates".into()));
    }
    let period = 2.0 * PI / (e_r + delta);
    let f = floquet_propagator(|t| single_qubit_lab(u0, u1, delta, e_r, t), 0.0, period, steps_per_drive);
    let n = (rabi_periods * 2.0 * PI / predicted / period).ceil() as usize;
    let mut psi = CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let mut times = Vec::with_capacity(n + 1);
    let mut pop = Vec::with_capacity(n + 1);
    for k in 0..=n {
        times.push(k as f64 * period);
        pop.push(psi[(1, 0)].norm_sqr());
        psi = &f * psi;
    }
    let measured = oscillation_frequency(&times, &pop)
        .ok_or_else(|| Error::InvalidParameter("fewer than two oscillations resolved".into()))?;
    Ok(RabiMeasurement { measured, predicted })
}

/// Two-site modulation experiment. Energies in s^-1, times in s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingRun {
    pub e_r: f64,
    pub u0: f64,
    pub u1: f64,
    pub j0: f64,
    pub delta: f64,
    /// Duration of the `sin^2` hopping ramp; the modulation switches on at its end.
    pub ramp_time: f64,
    /// Duration with constant `J0` and modulation on.
    pub hold_time: f64,
    pub ramp_steps: usize,
    /// Integration steps per modulation period.
    pub period_steps: usize,
    /// Modulation periods between stored samples during the hold.
    pub sample_every: usize,
}

impl IsingRun {
    /// The parameters of the reference two-site simulation: `E_R = 2 pi 140.76`,
    /// `U0 = 30`, `U1 = 2`, `J = 0.9` (all s^-1).
    pub fn reference() -> Self {
        Self {
            e_r: 2.0 * PI * 140.76,
            u0: 30.0,
            u1: 2.0,
            j0: 0.9,
            delta: 0.0,
            ramp_time: 4.0,
            hold_time: 10.0,
            ramp_steps: 4000,
            period_steps: 1024,
            sample_every: 10,
        }
    }

    /// Ramp over `eta T`, then hold for the rest of `T`.
    pub fn from_schedule(s: &PulseSchedule) -> Self {
        Self {
            e_r: s.e_r,
            u0: s.u0,
            u1: s.u1,
            j0: s.j0,
            delta: s.delta,
            ramp_time: s.eta * s.t,
            hold_time: (1.0 - s.eta) * s.t,
            ..Self::reference()
        }
    }

    pub fn drive_frequency(&self) -> f64 {
        self.e_r + self.delta
    }

    pub fn j(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t < self.ramp_time {
            self.j0 * (PI * t / (2.0 * self.ramp_time)).sin().powi(2)
        } else {
            self.j0
        }
    }

    pub fn u(&self, t: f64) -> f64 {
        if t < self.ramp_time {
            self.u0
        } else {
            self.u0 + self.u1 * (self.drive_frequency() * t).cos()
        }
    }

    /// `int_0^t J(s)^2 ds`.
    pub fn j_squared_integral(&self, t: f64) -> f64 {
        let tr = self.ramp_time;
        let ramp = |t: f64| {
            let x = PI * t / (2.0 * tr);
            2.0 * tr / PI * (3.0 * x / 8.0 - (2.0 * x).sin() / 4.0 + (4.0 * x).sin() / 32.0)
        };
        let j2 = self.j0 * self.j0;
        if t <= 0.0 {
            0.0
        } else if t < tr {
            j2 * ramp(t)
        } else {
            j2 * (ramp(tr) + (t - tr))
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.ramp_time > 0.0 && self.hold_time >= 0.0) {
            return Err(Error::InvalidParameter("ramp time must be positive and hold time non-negative".into()));
        }
        if self.ramp_steps == 0 || self.period_steps == 0 || self.sample_every == 0 {
            return Err(Error::InvalidParameter("step counts must be positive".into()));
        }
        if !(self.u0 != 0.0 && self.e_r > 0.0) {
            return Err(Error::InvalidParameter("need U0 != 0 and E_R > 0".into()));
        }
        Ok(())
    }
}

/// Rotating-frame logical evolution of the two-site register.
#[derive(Clone, Debug)]
pub struct IsingTrajectory {
    pub run: IsingRun,
    pub times: Vec<f64>,
    /// `R(t) P(t)^dagger V(t) P(0)` at each time, where `P(t)` spans the
    /// dressed logical subspace at the instantaneous hopping, with the frame
    /// `R(t) = exp(i (E_R + Delta) t (sz1 + sz2) / 2)`.
    pub logical: Vec<CMatrix>,
}

impl IsingTrajectory {
    /// Population of logical state `out` given logical input `input`.
    pub fn population(&self, k: usize, out: usize, input: usize) -> f64 {
        self.logical[k][(out, input)].norm_sqr()
    }
}

fn rotating_frame(omega: f64, t: f64) -> [C64; D] {
    let w = omega * t;
    [C64::from_polar(1.0, w), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::from_polar(1.0, -w)]
}

fn frame_rows(m: &CMatrix, phases: &[C64; D]) -> CMatrix {
    CMatrix::from_fn(D, m.ncols(), |i, j| phases[i] * m[(i, j)])
}

/// Dressed logical basis at `(U0, J0)`, aligned with the bare states.
pub fn hold_basis(run: &IsingRun) -> Result<DMatrix<f64>> {
    let reg = Register::standard();
    let p = reg.dressed_isometry(run.e_r, run.u0)?;
    Ok(aligned_dressed_basis(&reg.terms.assemble(run.e_r, run.u0, run.j0), &p))
}

/// Full Fermi-Hubbard evolution of the four dressed logical states: an
/// adiabatic hopping ramp at constant `U0`, then constant `J0` with the
/// modulation switched on instantly. The hold is integrated with a
/// one-period propagator applied stroboscopically.
pub fn simulate_ising_pair(run: &IsingRun) -> Result<IsingTrajectory> {
    run.validate()?;
    let reg = Register::standard();
    let p_real = reg.dressed_isometry(run.e_r, run.u0)?;
    let terms = &reg.terms;
    let h = |t: f64| to_complex(&terms.assemble(run.e_r, run.u(t), run.j(t)));
    let omega = run.drive_frequency();
    let p_hold = to_complex(&hold_basis(run)?);

    let mut times = Vec::new();
    let mut logical = Vec::new();
    let mut record = |t: f64, psi: &CMatrix| {
        let p = if t < run.ramp_time {
            to_complex(&aligned_dressed_basis(&terms.assemble(run.e_r, run.u0, run.j(t)), &p_real))
        } else {
            p_hold.clone()
        };
        times.push(t);
        logical.push(frame_rows(&(p.adjoint() * psi), &rotating_frame(omega, t)));
    };

    let mut psi = to_complex(&p_real);
    record(0.0, &psi);
    let dt = run.ramp_time / run.ramp_steps as f64;
    let ramp_stride = (run.ramp_steps / 50).max(1);
    for k in 0..run.ramp_steps {
        apply_step(&h((k as f64 + 0.5) * dt), dt, &mut psi);
        if (k + 1) % ramp_stride == 0 || k + 1 == run.ramp_steps {
            record((k + 1) as f64 * dt, &psi);
        }
    }

    let period = 2.0 * PI / omega;
    let n_periods = (run.hold_time / period).floor() as usize;
    if n_periods > 0 {
        let f = floquet_propagator(h, run.ramp_time, period, run.period_steps);
        let mut f_sample = CMatrix::identity(f.nrows(), f.ncols());
        for _ in 0..run.sample_every {
            f_sample = &f * f_sample;
        }
        let mut k = 0;
        while k + run.sample_every <= n_periods {
            psi = &f_sample * psi;
            k += run.sample_every;
            record(run.ramp_time + k as f64 * period, &psi);
        }
    }
    Ok(IsingTrajectory { run: *run, times, logical })
}

/// Free prefactors of the effective model
/// `H = c(t) . (sigma_1 + sigma_2) + g(t) sz1 sz2` with
/// `c = (a_x m(t), a_y m(t), alpha J(t)^2 / U0 + beta)`, `g = gamma J(t)^2 / U0`
/// and `m(t) = U1` once the modulation is on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub a_x: f64,
    pub a_y: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl FitModel {
    fn to_vec(self) -> Vec<f64> {
        vec![self.a_x, self.a_y, self.alpha, self.beta, self.gamma]
    }

    fn from_slice(p: &[f64]) -> Self {
        Self { a_x: p[0], a_y: p[1], alpha: p[2], beta: p[3], gamma: p[4] }
    }

    /// Second-order prediction. `a_x` is the interaction matrix element
    /// between the dressed `|00>` and `|10>` at `(U0, J0)`, halved by the
    /// rotating-wave average; `beta` omits the geometry-dependent constant.
    pub fn theory(run: &IsingRun) -> Result<Self> {
        let reg = Register::standard();
        let p = hold_basis(run)?;
        let hu = p.transpose() * &reg.terms.interaction * &p;
        Ok(Self {
            a_x: hu[(0, 2)] / 2.0,
            a_y: 0.0,
            alpha: omega_j_prefactor() / 2.0,
            beta: (PI * run.u0 * run.u0 / (16.0 * run.e_r) - run.delta) / 2.0,
            gamma: -g_prefactor() / 4.0,
        })
    }

    /// `c_x, c_y, c_z, g` with the hopping and modulation on.
    pub fn hold_values(&self, run: &IsingRun) -> (f64, f64, f64, f64) {
        let r = run.j0 * run.j0 / run.u0;
        (self.a_x * run.u1, self.a_y * run.u1, self.alpha * r + self.beta, self.gamma * r)
    }

    /// Model propagator from 0 to `t`.
    pub fn propagator(&self, run: &IsingRun, t: f64) -> CMatrix {
        let zz = [1.0, -1.0, -1.0, 1.0];
        let sz_sum = [2.0, 0.0, 0.0, -2.0];
        // Diagonal part integrated exactly up to min(t, ramp end).
        let t_diag = t.min(run.ramp_time);
        let j2 = run.j_squared_integral(t_diag) / run.u0;
        let diag_phase: Vec<C64> = (0..D)
            .map(|k| {
                let cz = self.alpha * j2 + self.beta * t_diag;
                C64::from_polar(1.0, -(cz * sz_sum[k] + self.gamma * j2 * zz[k]))
            })
            .collect();
        let ramp = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag_phase));
        if t <= run.ramp_time {
            return ramp;
        }
        let h = self.hold_hamiltonian(run);
        let (e, v) = hermitian_eigen(&h);
        let dt = t - run.ramp_time;
        let phases = nalgebra::DVector::from_iterator(D, e.iter().map(|x| C64::from_polar(1.0, -x * dt)));
        let u = &v * CMatrix::from_diagonal(&phases) * v.adjoint();
        u * ramp
    }

    fn hold_hamiltonian(&self, run: &IsingRun) -> CMatrix {
        let (cx, cy, cz, g) = self.hold_values(run);
        let s = [
            [C64::new(cz, 0.0), C64::new(cx, -cy)],
            [C64::new(cx, cy), C64::new(-cz, 0.0)],
        ];
        let one = |a: usize, b: usize| if a == b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        let zz = [1.0, -1.0, -1.0, 1.0];
        CMatrix::from_fn(D, D, |i, j| {
            let (li, ri, lj, rj) = (i / 2, i % 2, j / 2, j % 2);
            let single = s[li][lj] * one(ri, rj) + one(li, lj) * s[ri][rj];
            single + if i == j { C64::new(g * zz[i], 0.0) } else { C64::new(0.0, 0.0) }
        })
    }
}

/// Average over stored times of the closed-form Haar fidelity between the
/// model and the simulated logical evolution.
pub fn model_fidelity(traj: &IsingTrajectory, model: &FitModel) -> f64 {
    let total: f64 = traj
        .times
        .iter()
        .zip(&traj.logical)
        .map(|(&t, m)| haar_fidelity_closed_form(&(model.propagator(&traj.run, t).adjoint() * m)))
        .sum();
    total / traj.times.len() as f64
}

struct FitCost<'a> {
    traj: &'a IsingTrajectory,
}

impl CostFunction for FitCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(1.0 - model_fidelity(self.traj, &FitModel::from_slice(p)))
    }
}

/// Result of [`fit_effective_ising`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsingFit {
    pub model: FitModel,
    pub fidelity: f64,
    pub c_x: f64,
    pub c_y: f64,
    pub c_z: f64,
    pub g: f64,
}

/// Maximize [`model_fidelity`] over the five prefactors with Nelder-Mead,
/// restarting `restarts` times from perturbed copies of `initial`.
pub fn fit_effective_ising(traj: &IsingTrajectory, initial: &FitModel, restarts: usize, seed: u64) -> Result<IsingFit> {
    let x0 = initial.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![x0.clone()];
    for _ in 1..restarts.max(1) {
        starts.push(x0.iter().map(|v| v * (1.0 + 0.2 * rng.random_range(-1.0..1.0)) + 0.01 * rng.random_range(-1.0..1.0)).collect());
    }
    let results: Vec<std::result::Result<(Vec<f64>, f64), String>> = starts
        .par_iter()
        .map(|start| {
            let mut simplex = vec![start.clone()];
            for i in 0..start.len() {
                let mut v = start.clone();
                v[i] += 0.1 * start[i].abs() + 0.02;
                simplex.push(v);
            }
            let solver = NelderMead::new(simplex).with_sd_tolerance(1e-13).map_err(|e| e.to_string())?;
            let res = Executor::new(FitCost { traj }, solver)
                .configure(|s| s.max_iters(3000))
                .run()
                .map_err(|e| e.to_string())?;
            let state = res.state();
            let best = state.get_best_param().cloned().ok_or("no parameters")?;
            Ok((best, state.get_best_cost()))
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok((p, c)) if best.as_ref().is_none_or(|b| c < b.1) => best = Some((p, c)),
            Ok(_) => {}
            Err(e) => errors.push(e),
        }
    }
    let (p, cost) = best.ok_or_else(|| Error::OptimizationFailed(errors.join("; ")))?;
    let model = FitModel::from_slice(&p);
    let (c_x, c_y, c_z, g) = model.hold_values(&traj.run);
    Ok(IsingFit { model, fidelity: 1.0 - cost, c_x, c_y, c_z, g })
}

/// Synthetic trajectory generated by the effective model itself.
pub fn model_trajectory(run: &IsingRun, model: &FitModel, times: &[f64]) -> IsingTrajectory {
    IsingTrajectory { run: *run, times: times.to_vec(), logical: times.iter().map(|&t| model.propagator(run, t)).collect() }
}

/// One detuning of a scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetuningPoint {
    pub delta: f64,
    pub c_x: f64,
    pub c_y: f64,
    pub c_z: f64,
    pub g: f64,
    pub fidelity: f64,
}

/// Simulate and fit at each detuning, in parallel.
pub fn detuning_scan(base: &IsingRun, deltas: &[f64], restarts: usize, seed: u64) -> Result<Vec<DetuningPoint>> {
    deltas
        .par_iter()
        .map(|&delta| {
            let run = IsingRun { delta, ..*base };
            let traj = simulate_ising_pair(&run)?;
            let fit = fit_effective_ising(&traj, &FitModel::theory(&run)?, restarts, seed)?;
            Ok(DetuningPoint { delta, c_x: fit.c_x, c_y: fit.c_y, c_z: fit.c_z, g: fit.g, fidelity: fit.fidelity })
        })
        .collect()
}

/// Write a detuning scan as CSV with header `delta,c_x,c_y,c_z,g,fidelity`.
pub fn write_scan_csv<W: std::io::Write>(points: &[DetuningPoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

/// Linear fit of `c_z` against detuning: `(slope, intercept, zero crossing,
/// max residual / range)`.
pub fn c_z_line(points: &[DetuningPoint]) -> (f64, f64, f64, f64) {
    let x: Vec<f64> = points.iter().map(|p| p.delta).collect();
    let y: Vec<f64> = points.iter().map(|p| p.c_z).collect();
    let (slope, intercept) = linear_fit(&x, &y);
    let range = y.iter().copied().fold(f64::NEG_INFINITY, f64::max) - y.iter().copied().fold(f64::INFINITY, f64::min);
    let resid = x.iter().zip(&y).map(|(a, b)| (b - slope * a - intercept).abs()).fold(0.0, f64::max);
    (slope, intercept, -intercept / slope, resid / range)
}

/// Logical populations are the squared moduli; exposed for tests of the
/// qubit-exchange symmetry.
pub fn logical_populations(m: &CMatrix, input: usize) -> [f64; D] {
    let mut out = [0.0; D];
    for (k, o) in out.iter_mut().enumerate() {
        *o = m[(k, input)].norm_sqr();
    }
    out
}
