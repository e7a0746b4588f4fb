//! Acceptance criteria. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fermion_pair::fock::{enumerate_basis, Constraints};
use fermion_pair::gates::{infidelity_scan, loglog_slope, run_cphase, run_swap, CPhaseSpec, FIT_WINDOW};
use fermion_pair::hamiltonian::{
    default_second_order, effective_parameters, secular_project, u_matrix_element, HamiltonianTerms,
};
use fermion_pair::ising::{
    c_z_line, detuning_scan, fit_effective_ising, measure_rabi, rabi_frequency, simulate_ising_pair, FitModel,
    IsingRun,
};
use fermion_pair::linalg::{haar_unitary, linear_fit, propagator, unitarity_defect, CMatrix, C64};
use fermion_pair::tomography::noise::keyed_rng;
use fermion_pair::tomography::{
    apply_choi, choi_of_channel, complexity, infinite_sample_delta, run_tomography, sample_complexity,
    upper_bound_a, Channel, NoiseMode, NoiseSpec, Protocol, Role, RotationSet, M3,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn basis_dimension() -> Outcome {
    let n = enumerate_basis(2, 3, Constraints::sector(4, 4, 0)).unwrap().len();
    outcome(n == 59, format!("{n} states"))
}

fn interaction_coefficients() -> Outcome {
    let a = 3.0 / 16.0 * (PI / 2.0).sqrt();
    let b = PI.sqrt() / 16.0;
    let cases = [((0, 2, 2, 0), a), ((1, 1, 1, 1), a), ((0, 2, 1, 1), b)];
    let mut pass = true;
    let mut detail = Vec::new();
    for ((i, j, k, l), want) in cases {
        let got = u_matrix_element(i, j, k, l);
        let e = rel(got, want);
        pass &= e < 1e-6;
        detail.push(format!("U{i}{j}{k}{l} = {got:.9} vs {want:.9} (rel {e:.1e})"));
    }
    outcome(pass, detail.join("; "))
}

fn effective_coupling() -> Outcome {
    let g = effective_parameters(1.0, 1.0, 1e6).unwrap().g;
    let oracle = default_second_order().g;
    let quoted = 16.2235;
    let pass = rel(g, quoted) < 5e-3 && rel(oracle, g) < 5e-3;
    outcome(pass, format!("g U/J^2 = {g:.6}, second-order sum {oracle:.6}, quoted {quoted}"))
}

fn swap() -> Outcome {
    let r = run_swap(1.0, 0).unwrap();
    let transfer = r.raw[(2, 1)].norm_sqr();
    let leak = r.max_leakage();
    outcome((transfer - 1.0).abs() < 1e-6 && leak < 1e-6, format!("|01> -> |10> population {transfer:.12}, leakage {leak:.1e}"))
}

fn cz_at_thirty() -> Outcome {
    let spec = CPhaseSpec::cz(30.0, 20.0);
    let r = run_cphase(&spec).unwrap();
    let err = (r.induced_phase - PI).abs();
    let budget = spec.second_order_budget();
    let pc = r.max_population_change;
    outcome(
        err <= budget && (1e-4..=1e-2).contains(&pc),
        format!("phase {:.5} (error {err:.4}, budget {budget:.4}), max population change {pc:.2e}", r.induced_phase),
    )
}

fn cz_fidelity() -> Outcome {
    let r = run_cphase(&CPhaseSpec::cz(22.0, 10.0)).unwrap();
    outcome(r.fidelity >= 0.99, format!("f = {:.5}", r.fidelity))
}

fn scaling_law() -> Outcome {
    let ratios = [40.0, 50.0, 60.0, 80.0];
    let template = CPhaseSpec { calibration_iterations: 4, ..CPhaseSpec::cz(40.0, 100.0) };
    let adiabatic = infidelity_scan(&ratios, &template).unwrap();
    let square = infidelity_scan(&ratios, &CPhaseSpec { adiabatic: false, ..template }).unwrap();
    let slope = loglog_slope(&adiabatic, |p| p.infidelity, FIT_WINDOW).unwrap_or(f64::NAN);
    let worse = adiabatic.iter().zip(&square).all(|(a, s)| s.infidelity > a.infidelity);
    let rows: Vec<String> =
        adiabatic.iter().zip(&square).map(|(a, s)| format!("{}: {:.2e}/{:.2e}", a.u0_over_j0, a.infidelity, s.infidelity)).collect();
    outcome((slope - 4.0).abs() <= 0.3 && worse, format!("slope {slope:.3}; 1-f ramp/square {}", rows.join(", ")))
}

fn ising_fit() -> Outcome {
    let run = IsingRun::reference();
    let traj = simulate_ising_pair(&run).unwrap();
    let fit = fit_effective_ising(&traj, &FitModel::theory(&run).unwrap(), 5, 1).unwrap();
    let deltas: Vec<f64> = (0..7).map(|k| -0.3 + 0.1 * k as f64).collect();
    let points = detuning_scan(&run, &deltas, 3, 1).unwrap();
    let (slope, _, zero, resid) = c_z_line(&points);
    let crosses = points.first().unwrap().c_z.signum() != points.last().unwrap().c_z.signum();
    let pass = fit.fidelity >= 0.9995 && resid < 0.01 && crosses && zero.is_finite();
    outcome(
        pass,
        format!("fit fidelity {:.6}; c_z slope {slope:.4}, zero at delta = {zero:.4}, residual {:.2}% of range", fit.fidelity, 100.0 * resid),
    )
}

fn rabi() -> Outcome {
    let u1 = 2.0;
    let m = measure_rabi(0.0, u1, 0.0, 2.0 * PI * 140.76, 3.0, 256).unwrap();
    let e = rel(m.measured, rabi_frequency(u1));
    outcome(e < 0.01, format!("measured {:.6}, predicted {:.6} (rel {e:.1e})", m.measured, rabi_frequency(u1)))
}

fn unbiasedness() -> Outcome {
    let p = Protocol::reference();
    let d = (p.exact_average(&Channel::cz()) - choi_of_channel(&Channel::cz())).norm();
    outcome(d < 1e-10, format!("Frobenius error {d:.1e}"))
}

fn sample_complexity_numbers() -> Outcome {
    let p = Protocol::reference();
    let a = upper_bound_a(&p);
    let c = sample_complexity(&p, &Channel::cz());
    let shots = 10_000u64;
    let reps = 64;
    let mut n_total = 0;
    let ms: f64 = (0..reps)
        .map(|k| {
            let r = run_tomography(&Channel::cz(), &p, shots, None, k).unwrap();
            n_total = r.total_shots;
            r.delta * r.delta * r.total_shots as f64
        })
        .sum::<f64>()
        / reps as f64;
    let mc = ms.sqrt();
    let pass = rel(a, 35.9) < 0.01 && rel(c, 17.9) < 0.02 && rel(mc, c.sqrt()) < 0.05 && n_total >= 1_000_000;
    outcome(pass, format!("A = {a:.4}, C(CZ) = {c:.4}, rms delta*sqrt(N) = {mc:.4} vs sqrt(C) = {:.4} at N = {n_total}", c.sqrt()))
}

fn bound_ordering() -> Outcome {
    let mut rng = keyed_rng(2024, &[]);
    let mut pairs = Vec::new();
    while pairs.len() < 10 {
        let l = RotationSet::random(Role::Left, 12, &mut rng).unwrap();
        let r = RotationSet::random(Role::Right, 9, &mut rng).unwrap();
        if let Ok(p) = Protocol::new(l, r) {
            pairs.push(p);
        }
    }
    let channels: Vec<Channel> = (0..50).map(|_| Channel::random_unitary(&mut rng)).collect();
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for p in &pairs {
        let a = upper_bound_a(p);
        for ch in &channels {
            let c = complexity(p, ch);
            if !(a >= c.b && c.b >= c.c) {
                violations += 1;
            }
            tightest = tightest.min(a / c.b);
        }
    }
    outcome(violations == 0, format!("{violations} violations in 500 cases; smallest A/B = {tightest:.3}"))
}

fn noise_exponents() -> Outcome {
    let p = Protocol::reference();
    let sigmas: Vec<f64> = (0..6).map(|k| 0.01 * 10f64.powf(k as f64 / 5.0)).collect();
    let log_s: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let exponent = |mode| {
        let d: Vec<f64> = sigmas
            .iter()
            .map(|&s| infinite_sample_delta(&Channel::cz(), &p, Some(&NoiseSpec::new(s, mode, 5))).ln())
            .collect();
        linear_fit(&log_s, &d).0
    };
    let (u, b) = (exponent(NoiseMode::Unbiased), exponent(NoiseMode::Biased));
    outcome((u - 2.0).abs() <= 0.2 && (b - 1.0).abs() <= 0.2, format!("unbiased exponent {u:.3}, biased exponent {b:.3}"))
}

fn property_suites() -> Outcome {
    let mut rng = keyed_rng(7, &[]);
    let mut worst = [0.0f64; 5];
    // Unitarity of propagators of random Hermitian matrices.
    for _ in 0..20 {
        let a = haar_unitary(8, &mut rng);
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        worst[0] = worst[0].max(unitarity_defect(&propagator(&h, 1.7)));
    }
    // Secular Hamiltonian commutes with the quanta operator.
    let basis = enumerate_basis(2, 3, Constraints { particles: Some(4), quanta: None, two_sz: Some(0) }).unwrap();
    let terms = HamiltonianTerms::new(&basis);
    let q = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(terms.quanta.clone()));
    let sec = secular_project(&terms.assemble(10.0, 1.3, 0.4), &terms.quanta, 0.5);
    worst[1] = (&sec * &q - &q * &sec).amax();
    // Midpoint stepping: halving the step quarters the error.
    let h0 = haar_unitary(4, &mut rng);
    let h0 = (&h0 + h0.adjoint()) * C64::new(0.5, 0.0);
    let run = |dt: f64| {
        let opts = fermion_pair::evolve::EvolveOptions::new(dt);
        let h = |t: f64| &h0 * C64::new(1.0 + 0.5 * t.sin(), 0.0);
        fermion_pair::evolve::evolve_frame(h, &CMatrix::identity(4, 4), 2.0, &opts).unwrap().final_states().clone()
    };
    let (x, y, z) = (run(0.02), run(0.01), run(0.005));
    worst[2] = ((&x - &y).norm() / (&y - &z).norm() - 4.0).abs() / 4.0;
    // Choi round trips and estimator Hermiticity.
    let p = Protocol::reference();
    for _ in 0..20 {
        let ch = Channel::random_unitary(&mut rng);
        let v = fermion_pair::linalg::haar_state(3, &mut rng);
        let rho = M3::from_fn(|i, j| v[i] * v[j].conj());
        worst[3] = worst[3].max((apply_choi(&choi_of_channel(&ch), &rho) - ch.apply(&rho)).norm());
    }
    for i in 0..12 {
        for j in 0..9 {
            for b in [1, 0, -1] {
                let e = p.estimator(i, j, b);
                worst[4] = worst[4].max((e - e.adjoint()).norm());
            }
        }
    }
    let pass = worst[0] < 1e-12 && worst[1] < 1e-12 && worst[2] < 0.05 && worst[3] < 1e-12 && worst[4] < 1e-12;
    outcome(
        pass,
        format!(
            "unitarity {:.1e}, [H_sec, Q] {:.1e}, step-halving ratio deviation {:.1e}, Choi round trip {:.1e}, estimator Hermiticity {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 14] = [
        ("basis dimension", Duration::from_secs(1), basis_dimension),
        ("interaction coefficients", Duration::from_secs(1), interaction_coefficients),
        ("effective coupling", Duration::from_secs(10), effective_coupling),
        ("SWAP", Duration::from_secs(10), swap),
        ("CZ at U0/J0 = 30", Duration::from_secs(120), cz_at_thirty),
        ("CZ fidelity at U0/J0 = 22", Duration::from_secs(120), cz_fidelity),
        ("infidelity scaling", Duration::from_secs(1800), scaling_law),
        ("Ising fit", Duration::from_secs(600), ising_fit),
        ("Rabi frequency", Duration::from_secs(10), rabi),
        ("tomography unbiasedness", Duration::from_secs(10), unbiasedness),
        ("sample complexity", Duration::from_secs(1200), sample_complexity_numbers),
        ("bound ordering", Duration::from_secs(600), bound_ordering),
        ("noise exponents", Duration::from_secs(1200), noise_exponents),
        ("property suites", Duration::from_secs(600), property_suites),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<28} {} ({:.2} s, limit {} s): {}",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
