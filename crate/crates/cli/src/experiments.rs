//! One runner per experiment kind. Each returns a table for csv output and a
//! JSON value for json output; both are built so that reruns are byte-identical.

use std::path::Path;

use serde_json::{json, Value};

use fermion_pair::gates::{infidelity_scan, loglog_slope, run_cphase, run_cphase_traced, run_swap, CPhaseSpec, FIT_WINDOW};
use fermion_pair::ising::{c_z_line, detuning_scan, fit_effective_ising, model_trajectory, simulate_ising_pair, FitModel};
use fermion_pair::linalg::linear_fit;
use fermion_pair::tomography::{
    complexity, infinite_sample_delta, optimize_sets, run_tomography, upper_bound_a, Loss, NoiseSpec, Protocol, Role,
    RotationSet, RunRecord,
};

use crate::config::*;
use crate::error::CliError;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

/// Extra file written next to the main output.
pub struct Companion {
    pub suffix: String,
    pub csv: Vec<u8>,
}

pub struct Artifact {
    pub table: Table,
    pub result: Value,
    pub companions: Vec<Companion>,
}

impl Artifact {
    fn new(table: Table, result: Value) -> Self {
        Self { table, result, companions: Vec::new() }
    }
}

const INPUTS: [&str; 4] = ["00", "01", "10", "11"];

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

pub fn run(config: &ExperimentConfig) -> Result<Artifact, CliError> {
    let seed = config.seed.unwrap_or(0);
    match &config.parameters {
        Parameters::Swap(p) => swap(p),
        Parameters::Cphase(p) => cphase(p, config.format),
        Parameters::InfidelityScan(p) => scan(p),
        Parameters::Ising(p) => ising(p, seed),
        Parameters::IsingDetuningScan(p) => detuning(p, seed),
        Parameters::Tomography(p) => tomography(p, seed, &config.base_dir),
        Parameters::TomographyOptimize(p) => optimize(p, seed),
        Parameters::ComplexityEval(p) => complexity_eval(p, &config.base_dir),
    }
}

/// File-name suffixes of the companions a config will produce.
pub fn companion_suffixes(config: &ExperimentConfig) -> Vec<String> {
    match &config.parameters {
        Parameters::TomographyOptimize(p) => p
            .left_sizes
            .iter()
            .flat_map(|nl| p.right_sizes.iter().map(move |nr| (*nl, *nr)))
            .flat_map(|(nl, nr)| [format!("-{nl}x{nr}-left.csv"), format!("-{nl}x{nr}-right.csv")])
            .collect(),
        _ => Vec::new(),
    }
}

fn swap(p: &SwapParams) -> Result<Artifact, CliError> {
    let r = run_swap(p.j, p.m)?;
    let mut table = Table::new(&["j", "m", "duration", "fidelity", "max_leakage"]);
    table.rows.push(vec![s(p.j), s(p.m), s(r.duration), s(r.fidelity), s(r.max_leakage())]);
    let populations: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| r.raw[(i, j)].norm_sqr()).collect()).collect();
    let result = json!({
        "duration": r.duration,
        "fidelity": r.fidelity,
        "leakage": r.leakage,
        "max_leakage": r.max_leakage(),
        "z_angles": [r.z_angles.0, r.z_angles.1],
        "populations": populations,
    });
    Ok(Artifact::new(table, result))
}

fn cphase_spec(p: &CphaseParams) -> CPhaseSpec {
    CPhaseSpec {
        target_phase: p.target_phase,
        u0_over_j0: p.u0 / p.j0,
        e_r_over_u0: p.e_r / p.u0,
        eta: p.eta,
        adiabatic: p.adiabatic,
        steps: p.steps,
        calibration_iterations: p.calibration_iterations,
    }
}

fn cphase(p: &CphaseParams, format: Format) -> Result<Artifact, CliError> {
    let spec = cphase_spec(p);
    // The simulation runs in units of 1/U0.
    let seconds = 1.0 / p.u0;
    let (r, table) = if format == Format::Csv {
        let (r, traj) = run_cphase_traced(&spec)?;
        let column = INPUTS.iter().position(|i| *i == p.trace_input).expect("validated input");
        let n = traj.states[0].nrows();
        let mut header = vec![s("time")];
        header.extend((0..n).map(|i| format!("p{i}")));
        header.extend(INPUTS.iter().map(|i| format!("phase_{i}")));
        let mut table = Table { header, rows: Vec::new() };
        for k in 0..traj.len() {
            let mut row = vec![s(traj.times[k] * seconds)];
            row.extend(traj.populations(k, column).into_iter().map(s));
            row.extend(traj.phases[k].iter().map(s));
            table.rows.push(row);
        }
        (r, table)
    } else {
        (run_cphase(&spec)?, Table::new(&[]))
    };
    let result = json!({
        "phase_exact": r.induced_phase,
        "phase_theory": p.target_phase,
        "second_order_budget": spec.second_order_budget(),
        "leakage": r.max_leakage(),
        "leakage_per_input": r.leakage,
        "max_population_change": r.max_population_change,
        "fidelity": r.fidelity,
        "z_angles": [r.z_angles.0, r.z_angles.1],
        "duration": r.duration * seconds,
    });
    Ok(Artifact::new(table, result))
}

fn scan(p: &ScanParams) -> Result<Artifact, CliError> {
    let mut table =
        Table::new(&["U0_over_J0", "E_R_over_U0", "adiabatic", "phase_exact", "phase_theory", "leakage", "infidelity"]);
    let mut slopes = Vec::new();
    let mut all = Vec::new();
    for &e_r_over_u0 in &p.e_r_over_u0 {
        for adiabatic in p.adiabatic.to_vec() {
            let template = CPhaseSpec {
                target_phase: p.target_phase,
                u0_over_j0: 1.0,
                e_r_over_u0,
                eta: p.eta,
                adiabatic,
                steps: p.steps,
                calibration_iterations: p.calibration_iterations,
            };
            let points = infidelity_scan(&p.u0_over_j0, &template)?;
            for q in &points {
                table.rows.push(vec![
                    s(q.u0_over_j0),
                    s(q.e_r_over_u0),
                    s(q.adiabatic),
                    s(q.phase_exact),
                    s(q.phase_theory),
                    s(q.leakage),
                    s(q.infidelity),
                ]);
            }
            let slope = loglog_slope(&points, |q| q.infidelity, FIT_WINDOW);
            slopes.push(json!({ "E_R_over_U0": e_r_over_u0, "adiabatic": adiabatic, "slope": slope }));
            all.extend(points);
        }
    }
    let result = json!({ "points": all, "fit_window": [FIT_WINDOW.0, FIT_WINDOW.1], "loglog_slopes": slopes });
    Ok(Artifact::new(table, result))
}

fn ising(p: &IsingParams, seed: u64) -> Result<Artifact, CliError> {
    let run = p.run();
    let traj = simulate_ising_pair(&run)?;
    let theory = FitModel::theory(&run)?;
    let fit = fit_effective_ising(&traj, &theory, p.restarts, seed)?;
    let model = model_trajectory(&run, &fit.model, &traj.times);

    let mut header = vec![s("time"), s("input")];
    header.extend(INPUTS.iter().map(|i| format!("sim_{i}")));
    header.extend(INPUTS.iter().map(|i| format!("model_{i}")));
    let mut table = Table { header, rows: Vec::new() };
    for (k, t) in traj.times.iter().enumerate() {
        for (input, label) in INPUTS.iter().enumerate() {
            let mut row = vec![s(t), s(label)];
            row.extend((0..4).map(|o| s(traj.population(k, o, input))));
            row.extend((0..4).map(|o| s(model.population(k, o, input))));
            table.rows.push(row);
        }
    }
    let (c_x, c_y, c_z, g) = theory.hold_values(&run);
    let result = json!({
        "fit": fit,
        "theory": { "model": theory, "c_x": c_x, "c_y": c_y, "c_z": c_z, "g": g },
        "samples": traj.times.len(),
    });
    Ok(Artifact::new(table, result))
}

fn detuning(p: &DetuningParams, seed: u64) -> Result<Artifact, CliError> {
    let points = detuning_scan(&p.base().run(), &p.deltas, p.restarts, seed)?;
    let mut table = Table::new(&["delta", "c_x", "c_y", "c_z", "g", "fidelity"]);
    for q in &points {
        table.rows.push(vec![s(q.delta), s(q.c_x), s(q.c_y), s(q.c_z), s(q.g), s(q.fidelity)]);
    }
    let line = (points.len() >= 2).then(|| {
        let (slope, intercept, zero, residual) = c_z_line(&points);
        json!({ "slope": slope, "intercept": intercept, "zero_crossing": zero, "max_residual_over_range": residual })
    });
    Ok(Artifact::new(table, json!({ "points": points, "c_z_fit": line })))
}

fn load_set(name: &str, role: Role, base: &Path) -> Result<RotationSet, CliError> {
    if name == REFERENCE_SET {
        let (l, r) = RotationSet::reference_pair();
        return Ok(if role == Role::Left { l } else { r });
    }
    let path = base.join(name);
    let file = std::fs::File::open(&path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    Ok(RotationSet::read_csv(role, file)?)
}

fn protocol(left: &str, right: &str, base: &Path) -> Result<Protocol, CliError> {
    Ok(Protocol::new(load_set(left, Role::Left, base)?, load_set(right, Role::Right, base)?)?)
}

/// Independent shot stream for run `index` below `seed`.
fn run_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn tomography(p: &TomographyParams, seed: u64, base: &Path) -> Result<Artifact, CliError> {
    let protocol = protocol(&p.left_set, &p.right_set, base)?;
    let channel = p.channel.channel();
    let sigmas = if p.noise == NoiseChoice::None { vec![0.0] } else { p.sigma.clone() };
    let mut table =
        Table::new(&["channel_id", "N", "shots_per_setting", "noise", "sigma", "delta", "C_estimate", "delta_infinite"]);
    let mut runs = Vec::new();
    let mut plateau = Vec::new();
    let noise_name = serde_json::to_value(p.noise).expect("noise serializes");
    let noise_name = noise_name.as_str().expect("unit variant");
    for (si, &sigma) in sigmas.iter().enumerate() {
        // The noise seed is shared across sigma so biased offsets scale together.
        let noise = p.noise.mode().map(|mode| NoiseSpec::new(sigma, mode, seed));
        let delta_inf = p.infinite_samples.then(|| infinite_sample_delta(&channel, &protocol, noise.as_ref()));
        if let Some(d) = delta_inf {
            plateau.push((sigma, d));
        }
        for (ni, &shots) in p.shots_per_setting.iter().enumerate() {
            let index = si * p.shots_per_setting.len() + ni;
            let r = run_tomography(&channel, &protocol, shots, noise.as_ref(), run_seed(seed, index))?;
            let record = RunRecord::new(p.channel, &r, noise.as_ref());
            table.rows.push(vec![
                channel_name(p.channel),
                s(record.n),
                s(shots),
                s(noise_name),
                s(sigma),
                s(record.delta),
                s(record.c_estimate),
                delta_inf.map(s).unwrap_or_default(),
            ]);
            let mut v = serde_json::to_value(&record).expect("record serializes");
            v["shots_per_setting"] = json!(shots);
            v["delta_infinite"] = json!(delta_inf);
            runs.push(v);
        }
    }
    let fit: Vec<(f64, f64)> = plateau.iter().filter(|(s, d)| *s > 0.0 && *d > 0.0).map(|(s, d)| (s.ln(), d.ln())).collect();
    let exponent = (fit.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        linear_fit(&x, &y).0
    });
    let result = json!({ "runs": runs, "settings": protocol.settings(), "noise_exponent": exponent });
    Ok(Artifact::new(table, result))
}

fn channel_name(id: fermion_pair::tomography::ChannelId) -> String {
    serde_json::to_value(id).expect("id serializes").as_str().expect("unit variant").to_string()
}

fn optimize(p: &OptimizeParams, seed: u64) -> Result<Artifact, CliError> {
    let channel = p.channel.channel();
    let loss = match p.loss {
        LossChoice::UpperBound => Loss::UpperBound,
        LossChoice::Complexity => Loss::Complexity(channel.clone()),
    };
    let loss_name = serde_json::to_value(p.loss).expect("loss serializes");
    let mut table = Table::new(&["n_left", "n_right", "loss", "value", "A", "B", "C"]);
    let mut rows = Vec::new();
    let mut companions = Vec::new();
    for &nl in &p.left_sizes {
        for &nr in &p.right_sizes {
            let opt = optimize_sets(nl, nr, &loss, &p.descent(), seed)?;
            let pr = Protocol::new(opt.left.clone(), opt.right.clone())?;
            let a = upper_bound_a(&pr);
            let c = complexity(&pr, &channel);
            table.rows.push(vec![s(nl), s(nr), s(loss_name.as_str().unwrap()), s(opt.loss), s(a), s(c.b), s(c.c)]);
            let angles = |set: &RotationSet| -> Vec<[f64; 2]> { set.rotations.iter().map(|r| [r.phi, r.alpha]).collect() };
            rows.push(json!({
                "n_left": nl,
                "n_right": nr,
                "value": opt.loss,
                "A": a,
                "B": c.b,
                "C": c.c,
                "left": angles(&opt.left),
                "right": angles(&opt.right),
                "history": opt.history,
            }));
            for (set, role) in [(&opt.left, "left"), (&opt.right, "right")] {
                let mut csv = Vec::new();
                set.write_csv(&mut csv)?;
                companions.push(Companion { suffix: format!("-{nl}x{nr}-{role}.csv"), csv });
            }
        }
    }
    let result = json!({ "loss": loss_name, "channel": p.channel, "results": rows });
    Ok(Artifact { table, result, companions })
}

fn complexity_eval(p: &ComplexityParams, base: &Path) -> Result<Artifact, CliError> {
    let pr = protocol(&p.left_set, &p.right_set, base)?;
    let a = upper_bound_a(&pr);
    let mut table = Table::new(&["channel", "n_left", "n_right", "cond_left", "cond_right", "A", "B", "C"]);
    let mut rows = Vec::new();
    for &id in &p.channels {
        let c = complexity(&pr, &id.channel());
        let (nl, nr) = (pr.left.len(), pr.right.len());
        table.rows.push(vec![channel_name(id), s(nl), s(nr), s(pr.ml.condition), s(pr.mr.condition), s(a), s(c.b), s(c.c)]);
        rows.push(json!({
            "channel": id,
            "n_left": nl,
            "n_right": nr,
            "cond_left": pr.ml.condition,
            "cond_right": pr.mr.condition,
            "A": a,
            "B": c.b,
            "C": c.c,
        }));
    }
    Ok(Artifact::new(table, json!({ "rows": rows })))
}
