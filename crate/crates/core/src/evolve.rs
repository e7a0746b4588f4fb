//! Piecewise-constant time evolution by exact diagonalization of the
//! midpoint Hamiltonian of every step.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, max_imag, to_complex, CMatrix, CVector, C64};

/// Control parameters of one protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub j0: f64,
    pub u0: f64,
    /// Modulation amplitude; zero for gates.
    pub u1: f64,
    /// Modulation detuning from `E_R`.
    pub delta: f64,
    pub e_r: f64,
    /// Total duration.
    pub t: f64,
    /// Fraction of `t` spent on each ramp.
    pub eta: f64,
}

impl PulseSchedule {
    pub fn gate(j0: f64, u0: f64, e_r: f64, t: f64, eta: f64) -> Self {
        Self { j0, u0, u1: 0.0, delta: 0.0, e_r, t, eta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 0.5) {
            return Err(Error::InvalidParameter(format!("ramp fraction eta = {} outside (0, 0.5]", self.eta)));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!("duration T = {} must be positive", self.t)));
        }
        Ok(())
    }

    pub fn j(&self, t: f64) -> f64 {
        pulse_j(t, self)
    }

    /// `U(t) = U0 + U1 cos((E_R + Delta) t)`.
    pub fn u(&self, t: f64) -> f64 {
        self.u0 + self.u1 * ((self.e_r + self.delta) * t).cos()
    }
}

/// Hopping amplitude of the `sin^2` ramp: up over `[0, eta T]`, flat,
/// down over `[(1 - eta) T, T]`, zero outside.
///
/// ```
/// use fermion_pair::evolve::{pulse_j, PulseSchedule};
/// let s = PulseSchedule::gate(0.5, 1.0, 10.0, 100.0, 0.3);
/// assert_eq!(pulse_j(0.0, &s), 0.0);
/// assert!((pulse_j(30.0, &s) - 0.5).abs() < 1e-15);
/// assert_eq!(pulse_j(50.0, &s), 0.5);
/// ```
pub fn pulse_j(t: f64, s: &PulseSchedule) -> f64 {
    let ramp = s.eta * s.t;
    if t <= 0.0 || t >= s.t {
        0.0
    } else if t < ramp {
        s.j0 * (PI * t / (2.0 * ramp)).sin().powi(2)
    } else if t <= s.t - ramp {
        s.j0
    } else {
        s.j0 * (PI * (s.t - t) / (2.0 * ramp)).sin().powi(2)
    }
}

/// Eigendecomposition used by one step, in whichever field `h` lives.
enum Eigen {
    Real(SymmetricEigen<f64, nalgebra::Dyn>),
    Complex(SymmetricEigen<C64, nalgebra::Dyn>),
}

fn eigen(h: &CMatrix) -> Eigen {
    if max_imag(h) == 0.0 {
        Eigen::Real(SymmetricEigen::new(h.map(|z| z.re)))
    } else {
        Eigen::Complex(SymmetricEigen::new(h.clone()))
    }
}

/// `psi <- exp(-i h dt) psi` for every column of `psi`.
pub fn apply_step(h: &CMatrix, dt: f64, psi: &mut CMatrix) {
    match eigen(h) {
        Eigen::Real(e) => {
            let v = to_complex(&e.eigenvectors);
            let mut coeff = v.transpose() * &*psi;
            scale_rows(&mut coeff, e.eigenvalues.as_slice(), dt);
            *psi = v * coeff;
        }
        Eigen::Complex(e) => {
            let v = e.eigenvectors;
            let mut coeff = v.adjoint() * &*psi;
            scale_rows(&mut coeff, e.eigenvalues.as_slice(), dt);
            *psi = v * coeff;
        }
    }
}

fn scale_rows(m: &mut CMatrix, energies: &[f64], dt: f64) {
    for (r, e) in energies.iter().enumerate() {
        let phase = C64::from_polar(1.0, -e * dt);
        for c in 0..m.ncols() {
            m[(r, c)] *= phase;
        }
    }
}

/// Follows the phase of one evolving column against a fixed reference vector.
#[derive(Clone, Debug)]
pub struct Tracker {
    /// Reference state `|psi~>`.
    pub state: CVector,
    /// Energy of the co-rotating frame: phases are reported for
    /// `exp(i E t) <psi~|psi(t)>`.
    pub frame_energy: f64,
}

/// Evolution settings beyond the Hamiltonian and duration.
#[derive(Clone, Debug)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Store every `record_stride`-th step (the final state is always stored).
    pub record_stride: usize,
    /// One optional tracker per column.
    pub trackers: Vec<Option<Tracker>>,
    /// Tracked overlaps below this abort with [`Error::AdiabaticityFailure`].
    pub min_overlap: f64,
    /// Largest accepted entry of `H - H^dagger`.
    pub hermiticity_tol: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self { dt, record_stride: 1, trackers: Vec::new(), min_overlap: 0.5, hermiticity_tol: 1e-10 }
    }
}

/// Stored evolution of a set of columns.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Evolved columns at each stored time.
    pub states: Vec<CMatrix>,
    /// Unwrapped tracked phase per column at each stored time (`NaN` if untracked).
    pub phases: Vec<Vec<f64>>,
    /// Smallest tracked overlap seen per column over the whole run.
    pub min_overlaps: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_states(&self) -> &CMatrix {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn state(&self, k: usize, column: usize) -> CVector {
        self.states[k].column(column).into_owned()
    }

    pub fn populations(&self, k: usize, column: usize) -> Vec<f64> {
        self.states[k].column(column).iter().map(|z| z.norm_sqr()).collect()
    }

    /// CSV with `time`, `p0..p{n-1}` for one column, then every tracked phase.
    pub fn write_csv<W: Write>(&self, w: W, column: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n = self.states.first().map_or(0, |s| s.nrows());
        let m = self.phases.first().map_or(0, |p| p.len());
        let mut header = vec!["time".to_string()];
        header.extend((0..n).map(|i| format!("p{i}")));
        header.extend((0..m).map(|c| format!("phase{c}")));
        out.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string()];
            row.extend(self.populations(k, column).iter().map(|p| p.to_string()));
            row.extend(self.phases[k].iter().map(|p| p.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Evolve the columns of `psi0` from `t = 0` to `t_total` under `h(t)`.
///
/// Each step of length `dt` (the last one shortened to land on `t_total`)
/// applies the exact propagator of the Hamiltonian sampled at the step
/// midpoint.
pub fn evolve_frame<F>(mut h: F, psi0: &CMatrix, t_total: f64, opts: &EvolveOptions) -> Result<Trajectory>
where
    F: FnMut(f64) -> CMatrix,
{
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidParameter(format!("step {} must be positive", opts.dt)));
    }
    let n_steps = ((t_total / opts.dt) - 1e-9).ceil().max(0.0) as usize;
    let cols = psi0.ncols();
    let stride = opts.record_stride.max(1);
    let tracker = |c: usize| opts.trackers.get(c).and_then(|t| t.as_ref());

    let mut psi = psi0.clone();
    let mut phase = vec![f64::NAN; cols];
    let mut last_arg = vec![0.0; cols];
    let mut min_overlaps = vec![f64::NAN; cols];
    for c in 0..cols {
        if let Some(tr) = tracker(c) {
            let ov = tr.state.dotc(&psi.column(c));
            phase[c] = ov.arg();
            last_arg[c] = ov.arg();
            min_overlaps[c] = ov.norm();
        }
    }

    let mut traj = Trajectory::default();
    traj.times.push(0.0);
    traj.states.push(psi.clone());
    traj.phases.push(phase.clone());

    for k in 0..n_steps {
        let t0 = k as f64 * opts.dt;
        let t1 = ((k + 1) as f64 * opts.dt).min(t_total);
        let hk = h(0.5 * (t0 + t1));
        let defect = hermiticity_defect(&hk);
        if defect > opts.hermiticity_tol {
            return Err(Error::NotHermitian(defect));
        }
        apply_step(&hk, t1 - t0, &mut psi);

        for c in 0..cols {
            if let Some(tr) = tracker(c) {
                let ov = tr.state.dotc(&psi.column(c));
                let mag = ov.norm();
                if mag < opts.min_overlap {
                    return Err(Error::AdiabaticityFailure { state: c, time: t1, overlap: mag });
                }
                min_overlaps[c] = min_overlaps[c].min(mag);
                let arg = (ov * C64::from_polar(1.0, tr.frame_energy * t1)).arg();
                let mut d = arg - last_arg[c];
                d -= 2.0 * PI * (d / (2.0 * PI)).round();
                phase[c] += d;
                last_arg[c] = arg;
            }
        }
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            traj.times.push(t1);
            traj.states.push(psi.clone());
            traj.phases.push(phase.clone());
        }
    }
    traj.min_overlaps = min_overlaps;
    Ok(traj)
}

/// Evolve a single state, storing every step.
pub fn evolve<F>(h: F, psi0: &CVector, t_total: f64, dt: f64) -> Result<Trajectory>
where
    F: FnMut(f64) -> CMatrix,
{
    let frame = CMatrix::from_columns(&[psi0.clone()]);
    evolve_frame(h, &frame, t_total, &EvolveOptions::new(dt))
}

/// Unwrapped phase of a tracked column at the end of the trajectory.
pub fn accumulated_phase(traj: &Trajectory, column: usize) -> Result<f64> {
    let p = traj.phases.last().and_then(|p| p.get(column)).copied().unwrap_or(f64::NAN);
    if p.is_nan() {
        Err(Error::InvalidParameter(format!("column {column} was not tracked")))
    } else {
        Ok(p)
    }
}

/// Time step from the slew-rate rule `max |dH/dt| dt^2 <= tolerance`,
/// refined by halving until two successive step sizes give propagators
/// whose overlap fidelity differs from one by less than `tolerance`.
///
/// The slew rate is the Frobenius norm of finite differences of `h` on a
/// grid of 256 intervals.
pub fn choose_step<F>(mut h: F, t_total: f64, tolerance: f64) -> Result<f64>
where
    F: FnMut(f64) -> CMatrix,
{
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("step tolerance must be positive".into()));
    }
    const GRID: usize = 256;
    let dt_grid = t_total / GRID as f64;
    let mut prev = h(0.0);
    let mut rate = 0.0f64;
    for k in 1..=GRID {
        let cur = h(k as f64 * dt_grid);
        rate = rate.max((&cur - &prev).norm() / dt_grid);
        prev = cur;
    }
    let mut n = if rate > 0.0 { (t_total / (tolerance / rate).sqrt()).ceil().max(1.0) as usize } else { 1 };

    let dim = prev.nrows();
    let identity = CMatrix::identity(dim, dim);
    let run = |h: &mut F, n: usize| -> Result<CMatrix> {
        let opts = EvolveOptions { record_stride: usize::MAX, ..EvolveOptions::new(t_total / n as f64) };
        Ok(evolve_frame(&mut *h, &identity, t_total, &opts)?.final_states().clone())
    };
    let mut coarse = run(&mut h, n)?;
    for _ in 0..20 {
        let fine = run(&mut h, 2 * n)?;
        let overlap = (coarse.adjoint() * &fine).trace().norm() / dim as f64;
        if 1.0 - overlap < tolerance {
            return Ok(t_total / n as f64);
        }
        n *= 2;
        coarse = fine;
    }
    Ok(t_total / n as f64)
}

/// Real symmetric matrix from its diagonal, for tests and small models.
pub fn diagonal(values: &[f64]) -> CMatrix {
    to_complex(&DMatrix::from_diagonal(&DVector::from_vec(values.to_vec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{propagator, I};

    fn ket(n: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn ramp_is_continuous_and_symmetric() {
        let s = PulseSchedule::gate(0.7, 1.0, 10.0, 50.0, 0.3);
        let ramp = s.eta * s.t;
        for &t in &[ramp, s.t - ramp] {
            assert!((pulse_j(t - 1e-9, &s) - pulse_j(t + 1e-9, &s)).abs() < 1e-8);
        }
        for k in 0..100 {
            let t = s.t * k as f64 / 100.0;
            assert!((pulse_j(t, &s) - pulse_j(s.t - t, &s)).abs() < 1e-12);
        }
        assert_eq!(pulse_j(-1.0, &s), 0.0);
        assert_eq!(pulse_j(s.t, &s), 0.0);
    }

    #[test]
    fn ramp_derivative_vanishes_at_segment_edges() {
        let s = PulseSchedule::gate(1.0, 1.0, 10.0, 10.0, 0.25);
        let h = 1e-6;
        for &t in &[h, s.eta * s.t, s.t - s.eta * s.t, s.t - h] {
            let d = (pulse_j(t + h, &s) - pulse_j(t - h, &s)) / (2.0 * h);
            assert!(d.abs() < 1e-4, "slope {d} at {t}");
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(PulseSchedule::gate(1.0, 1.0, 1.0, 1.0, 0.0).validate().is_err());
        assert!(PulseSchedule::gate(1.0, 1.0, 1.0, 1.0, 0.6).validate().is_err());
        assert!(PulseSchedule::gate(1.0, 1.0, 1.0, -1.0, 0.3).validate().is_err());
        assert!(PulseSchedule::gate(1.0, 1.0, 1.0, 1.0, 0.5).validate().is_ok());
    }

    #[test]
    fn stationary_state_picks_up_phase() {
        let h = diagonal(&[0.7, -0.2]);
        let traj = evolve(|_| h.clone(), &ket(2, 0), 3.0, 0.1).unwrap();
        let last = traj.state(traj.len() - 1, 0);
        assert!((last[0] - C64::from_polar(1.0, -2.1)).norm() < 1e-12);
        for k in 0..traj.len() {
            assert!((traj.populations(k, 0)[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tracked_phase_is_unwrapped() {
        let h = diagonal(&[1.3, 0.0]);
        let mut opts = EvolveOptions::new(0.05);
        opts.trackers = vec![Some(Tracker { state: ket(2, 0), frame_energy: 0.0 })];
        let traj = evolve_frame(|_| h.clone(), &CMatrix::from_columns(&[ket(2, 0)]), 20.0, &opts).unwrap();
        assert!((accumulated_phase(&traj, 0).unwrap() + 26.0).abs() < 1e-9);

        opts.trackers = vec![Some(Tracker { state: ket(2, 0), frame_energy: 1.3 })];
        let traj = evolve_frame(|_| h.clone(), &CMatrix::from_columns(&[ket(2, 0)]), 20.0, &opts).unwrap();
        assert!(accumulated_phase(&traj, 0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn zero_hamiltonian_gives_zero_phase() {
        let h = CMatrix::zeros(3, 3);
        let mut opts = EvolveOptions::new(0.5);
        opts.trackers = vec![Some(Tracker { state: ket(3, 1), frame_energy: 0.0 })];
        let traj = evolve_frame(|_| h.clone(), &CMatrix::from_columns(&[ket(3, 1)]), 4.0, &opts).unwrap();
        assert_eq!(accumulated_phase(&traj, 0).unwrap(), 0.0);
    }

    #[test]
    fn overlap_collapse_is_reported() {
        let h = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let mut opts = EvolveOptions::new(0.01);
        opts.trackers = vec![Some(Tracker { state: ket(2, 0), frame_energy: 0.0 })];
        let r = evolve_frame(|_| h.clone(), &CMatrix::from_columns(&[ket(2, 0)]), 2.0, &opts);
        assert!(matches!(r, Err(Error::AdiabaticityFailure { state: 0, .. })));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(evolve(|_| h.clone(), &ket(2, 0), 1.0, 0.1), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rabi_oscillation_matches_closed_form() {
        // H = (Delta/2) sz + (Omega/2) sx from |0>: P1(t) = (Omega/W)^2 sin^2(W t / 2).
        let (delta, omega) = (0.3, 1.1);
        let h = to_complex(&DMatrix::from_row_slice(2, 2, &[delta / 2.0, omega / 2.0, omega / 2.0, -delta / 2.0]));
        let traj = evolve(|_| h.clone(), &ket(2, 0), 10.0, 0.01).unwrap();
        let w = (delta * delta + omega * omega).sqrt();
        for (k, &t) in traj.times.iter().enumerate() {
            let p1 = (omega / w).powi(2) * (w * t / 2.0).sin().powi(2);
            assert!((traj.populations(k, 0)[1] - p1).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_hamiltonian_path_matches_propagator() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.5), -I * 0.4, I * 0.4, c(-0.1)]);
        let traj = evolve(|_| h.clone(), &ket(2, 0), 1.0, 1.0).unwrap();
        let expected = propagator(&h, 1.0).column(0).into_owned();
        assert!((traj.state(traj.len() - 1, 0) - expected).norm() < 1e-12);
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn constant_hamiltonian_needs_one_step() {
        let h = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.5]));
        let dt = choose_step(|_| h.clone(), 5.0, 1e-8).unwrap();
        assert_eq!(dt, 5.0);
    }

    #[test]
    fn step_shrinks_with_tolerance() {
        let h = |t: f64| to_complex(&DMatrix::from_row_slice(2, 2, &[t.sin(), 0.7, 0.7, -t.sin()]));
        let mut last = f64::INFINITY;
        for tol in [1e-2, 1e-4, 1e-6, 1e-8] {
            let dt = choose_step(h, 6.0, tol).unwrap();
            assert!(dt <= last);
            last = dt;
        }
        assert!(last < 0.05);
    }

    #[test]
    fn records_with_stride() {
        let h = diagonal(&[1.0]);
        let mut opts = EvolveOptions::new(0.1);
        opts.record_stride = 4;
        let traj = evolve_frame(|_| h.clone(), &CMatrix::from_element(1, 1, c(1.0)), 1.0, &opts).unwrap();
        assert_eq!(traj.times.len(), 4);
        assert!((traj.times.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_csv() {
        let h = diagonal(&[1.0, 2.0]);
        let traj = evolve(|_| h.clone(), &ket(2, 0), 0.3, 0.1).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, 0).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,p0,p1,phase0"));
        assert_eq!(text.lines().count(), 5);
    }
}
