//! Human-readable schema of every experiment kind, printed by `fpr list`.

use std::fmt::Write;

use crate::config::Kind;

pub struct Param {
    pub name: &'static str,
    pub unit: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

pub struct Entry {
    pub kind: Kind,
    pub summary: &'static str,
    /// The result this kind reproduces.
    pub result: &'static str,
    pub formats: &'static str,
    pub params: &'static [Param],
}

const fn p(name: &'static str, unit: &'static str, default: &'static str, doc: &'static str) -> Param {
    Param { name, unit, default, doc }
}

const ISING: [Param; 11] = [
    p("e_r", "s^-1", "884.4159 (2π·140.76)", "recoil energy as an angular frequency"),
    p("u0", "s^-1", "30", "static interaction"),
    p("u1", "s^-1", "2", "modulation amplitude of U(t) = U0 + U1 cos((E_R + Δ) t)"),
    p("j0", "s^-1", "0.9", "hopping after the ramp"),
    p("ramp_time", "s", "4", "duration of the sin² hopping ramp; the modulation starts at its end"),
    p("hold_time", "s", "10", "duration with constant J0 and modulation on"),
    p("ramp_steps", "count", "4000", "integration steps over the ramp"),
    p("period_steps", "count", "1024", "integration steps per modulation period"),
    p("sample_every", "count", "10", "modulation periods between stored samples"),
    p("restarts", "count", "5", "Nelder-Mead restarts of the effective-model fit"),
    p("delta", "s^-1", "0", "detuning of the modulation from E_R"),
];

const DETUNING: [Param; 11] = [
    p("e_r", "s^-1", "884.4159 (2π·140.76)", "recoil energy as an angular frequency"),
    p("u0", "s^-1", "30", "static interaction"),
    p("u1", "s^-1", "2", "modulation amplitude of U(t) = U0 + U1 cos((E_R + Δ) t)"),
    p("j0", "s^-1", "0.9", "hopping after the ramp"),
    p("ramp_time", "s", "4", "duration of the sin² hopping ramp; the modulation starts at its end"),
    p("hold_time", "s", "10", "duration with constant J0 and modulation on"),
    p("ramp_steps", "count", "4000", "integration steps over the ramp"),
    p("period_steps", "count", "1024", "integration steps per modulation period"),
    p("sample_every", "count", "10", "modulation periods between stored samples"),
    p("restarts", "count", "5", "Nelder-Mead restarts of the effective-model fit"),
    p("deltas", "s^-1 list", "[-0.3, -0.2, ..., 0.3]", "detunings to simulate"),
];

pub const CATALOG: [Entry; 8] = [
    Entry {
        kind: Kind::Swap,
        summary: "Hopping-only evolution for (2m + 1)π/(2J) with U = 0.",
        result: "SWAP gate: |01> and |10> exchanged with no leakage",
        formats: "csv: one row; json: adds the 4x4 logical population matrix",
        params: &[
            p("j", "s^-1", "1", "hopping amplitude"),
            p("m", "count", "0", "number of extra half swaps"),
        ],
    },
    Entry {
        kind: Kind::Cphase,
        summary: "Controlled-phase gate with a sin² hopping ramp (or a square pulse) at constant U0.",
        result: "CZ trajectory: populations and accumulated phases during the gate",
        formats: "csv: trajectory of one logical input (time, p0..p58, phase per input); json: phase_exact, leakage, fidelity",
        params: &[
            p("e_r", "s^-1", "600", "recoil energy"),
            p("u0", "s^-1", "30", "on-site interaction"),
            p("j0", "s^-1", "1", "peak hopping"),
            p("target_phase", "rad", "π", "induced phase φ00 + φ11 - φ01 - φ10 to aim for"),
            p("eta", "fraction", "0.3", "ramp length as a fraction of the gate duration, in (0, 0.5]"),
            p("adiabatic", "bool", "true", "sin² ramps when true, square pulse of the same area otherwise"),
            p("steps", "count", "4000", "integration steps over the gate"),
            p("calibration_iterations", "count", "0", "secant refinements of the duration so the phase hits the target"),
            p("trace_input", "00|01|10|11", "01", "logical input written to the csv trajectory"),
        ],
    },
    Entry {
        kind: Kind::InfidelityScan,
        summary: "CZ infidelity over a list of U0/J0 ratios, for each E_R/U0 and pulse shape.",
        result: "Gate infidelity versus J0/U0 for adiabatic and square pulses",
        formats: "csv: U0_over_J0,E_R_over_U0,adiabatic,phase_exact,phase_theory,leakage,infidelity; json: adds log-log slopes",
        params: &[
            p("u0_over_j0", "ratio list", "[15, 20, 25, 30, 40, 50]", "interaction-to-hopping ratios to scan"),
            p("e_r_over_u0", "ratio list", "[10, 20]", "recoil-to-interaction ratios; each gets a full scan"),
            p("adiabatic", "bool or bool list", "[true, false]", "pulse shapes: true is the sin² ramp, false the square pulse"),
            p("target_phase", "rad", "π", "induced phase to aim for"),
            p("eta", "fraction", "0.3", "ramp fraction of the adiabatic pulse"),
            p("steps", "count", "4000", "integration steps per gate"),
            p("calibration_iterations", "count", "0", "secant refinements of each duration"),
        ],
    },
    Entry {
        kind: Kind::Ising,
        summary: "Two-site register under a modulated interaction, fitted by an effective Ising model.",
        result: "Logical populations of the full simulation against the fitted effective model",
        formats: "csv: time,input,sim_00..sim_11,model_00..model_11; json: fitted prefactors and fidelity",
        params: &ISING,
    },
    Entry {
        kind: Kind::IsingDetuningScan,
        summary: "The ising experiment repeated over detunings; c_z is affine in Δ and crosses zero.",
        result: "Fitted effective-model coefficients versus detuning",
        formats: "csv: delta,c_x,c_y,c_z,g,fidelity; json: adds the affine fit of c_z",
        params: &DETUNING,
    },
    Entry {
        kind: Kind::Tomography,
        summary: "Simulated process tomography of a two-qubit channel restricted to the triplet space.",
        result: "Estimation error δ versus shot count and versus rotation noise σ",
        formats: "csv: channel_id,N,shots_per_setting,noise,sigma,delta,C_estimate,delta_infinite; json: one record per (σ, N)",
        params: &[
            p("channel", "identity|cz", "cz", "channel being characterized"),
            p("left_set", "path or `reference`", "reference", "index,phi,alpha CSV of left rotations, relative to the config file"),
            p("right_set", "path or `reference`", "reference", "index,phi,alpha CSV of right rotations"),
            p("shots_per_setting", "count list", "[100, 1000, 10000, 100000]", "shots per (left, right) pair; N is this times the number of pairs"),
            p("noise", "none|unbiased|biased", "none", "rotation-angle noise: redrawn every shot or frozen per rotation"),
            p("sigma", "rad list", "[]", "noise standard deviations on both α and φ"),
            p("infinite_samples", "bool", "false", "also report the exact-average δ (the N → ∞ plateau)"),
        ],
    },
    Entry {
        kind: Kind::TomographyOptimize,
        summary: "Gradient descent over equatorial rotation sets minimizing A or C(channel).",
        result: "Sample complexity of optimized sets versus set sizes",
        formats: "csv: n_left,n_right,loss,value,A,B,C per size pair; json: adds the descent history; sets go to <stem>-<nl>x<nr>-left.csv and -right.csv",
        params: &[
            p("left_sizes", "count list", "[12]", "left set sizes"),
            p("right_sizes", "count list", "[9]", "right set sizes; every pair with left_sizes is optimized"),
            p("loss", "upper-bound|complexity", "upper-bound", "channel-independent bound A or channel-dependent C"),
            p("channel", "identity|cz", "cz", "channel for the complexity loss and for the reported B and C"),
            p("step", "rad", "0.05", "initial descent step"),
            p("iterations", "count", "200", "descent iterations per restart"),
            p("restarts", "count", "10", "random starting points"),
            p("fd_step", "rad", "1e-5", "central finite-difference step"),
        ],
    },
    Entry {
        kind: Kind::ComplexityEval,
        summary: "Bounds A, B and the sample complexity C of given rotation sets.",
        result: "Sample complexity of the reference rotation sets",
        formats: "csv: channel,n_left,n_right,cond_left,cond_right,A,B,C; json: same rows",
        params: &[
            p("left_set", "path or `reference`", "reference", "index,phi,alpha CSV of left rotations"),
            p("right_set", "path or `reference`", "reference", "index,phi,alpha CSV of right rotations"),
            p("channels", "list of identity|cz", "[\"identity\", \"cz\"]", "channels to evaluate C for"),
        ],
    },
];

pub fn entry(kind: Kind) -> &'static Entry {
    CATALOG.iter().find(|e| e.kind == kind).expect("every kind is catalogued")
}

pub fn overview() -> String {
    let mut s = String::from("Experiment kinds (fpr list <kind> for parameters):\n\n");
    for e in &CATALOG {
        let seed = if e.kind.stochastic() { " [needs seed]" } else { "" };
        writeln!(s, "  {:<21}{}{}", e.kind.name(), e.summary, seed).unwrap();
    }
    s
}

pub fn describe(kind: Kind) -> String {
    let e = entry(kind);
    let mut s = String::new();
    writeln!(s, "{}\n\n{}\nReproduces: {}\nSeed: {}\nOutput: {}\n", kind, e.summary, e.result, if kind.stochastic() { "required" } else { "not used" }, e.formats).unwrap();
    writeln!(s, "[parameters]").unwrap();
    for prm in e.params {
        writeln!(s, "  {:<24}{:<22}default {:<28}{}", prm.name, prm.unit, prm.default, prm.doc).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Parameters;

    #[test]
    fn catalog_lists_exactly_the_schema_keys() {
        for e in &CATALOG {
            let defaults = Parameters::defaults(e.kind).to_json();
            let mut keys: Vec<&str> = defaults.as_object().unwrap().keys().map(String::as_str).collect();
            let mut documented: Vec<&str> = e.params.iter().map(|p| p.name).collect();
            keys.sort();
            documented.sort();
            assert_eq!(keys, documented, "{}", e.kind);
        }
    }

    #[test]
    fn every_kind_reproduces_a_distinct_result() {
        let mut results: Vec<&str> = CATALOG.iter().map(|e| e.result).collect();
        results.sort();
        results.dedup();
        assert_eq!(results.len(), Kind::ALL.len());
    }
}
