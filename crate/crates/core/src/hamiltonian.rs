//! The two-site Fermi-Hubbard Hamiltonian `H = H_E + H_U + H_J` and its
//! second-order effective description.
//!
//! Energies carry whatever units the caller uses for `E_R`, `U` and `J`;
//! the module never mixes them with physical constants. Lengths are in
//! oscillator units with the lattice spacing `a_z = pi` (see
//! [`u_matrix_element`]).

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use log::warn;
use nalgebra::{DMatrix, DVector, Scalar, SymmetricEigen};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{build_logical_isometry, orb, two_site_basis, BasisIndex, Ladder, Qubit, Spin};
use crate::linalg::to_complex;
use crate::operator::OperatorMatrix;
use crate::oscillator::{position_moment, quartic_overlap};

/// Strength of the contact interaction in oscillator units: `U a_z delta(z)`
/// with `a_z = pi` harmonic lengths.
const CONTACT_LENGTH: f64 = PI;

/// `U_ijkl` in units of `U`: half the contact integral of four orbitals.
///
/// ```
/// use fermion_pair::hamiltonian::u_matrix_element;
/// let expected = 3.0 / 16.0 * (std::f64::consts::PI / 2.0).sqrt();
/// assert!((u_matrix_element(0, 2, 2, 0) - expected).abs() < 1e-12);
/// ```
pub fn u_matrix_element(i: usize, j: usize, k: usize, l: usize) -> f64 {
    if (i + j + k + l) % 2 == 1 {
        return 0.0;
    }
    0.5 * CONTACT_LENGTH * quartic_overlap(i, j, k, l)
}

/// First-order anharmonic shift of a single fermion in level `n`, in units
/// of `E_R`: the expectation of the quartic lattice correction `-x^4 / 3`.
pub fn level_shift(n: usize) -> f64 {
    -position_moment(n, n, 4) / 3.0
}

/// First-order anharmonic energy of a single-site qubit state, in units of `E_R`.
pub fn anharmonic_corrections(q: Qubit) -> f64 {
    match q {
        Qubit::Zero => 2.0 * level_shift(1),
        Qubit::One => level_shift(0) + level_shift(2),
    }
}

/// All `U_ijkl` below a level truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionTable {
    n_levels: usize,
    values: Vec<f64>,
}

impl InteractionTable {
    pub fn new(n_levels: usize) -> Self {
        let n = n_levels;
        let mut values = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        values[((i * n + j) * n + k) * n + l] = u_matrix_element(i, j, k, l);
                    }
                }
            }
        }
        Self { n_levels, values }
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n_levels;
        self.values[((i * n + j) * n + k) * n + l]
    }

    /// CSV with header `i,j,k,l,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "j", "k", "l", "value"])?;
        let n = self.n_levels;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out.serialize((i, j, k, l, self.get(i, j, k, l)))?;
                    }
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Static model parameters. Time dependence enters through
/// [`HamiltonianTerms::assemble`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub e_r: f64,
    /// Harmonic splitting. Only enters `H_E` as `omega0 * Q`, which is a
    /// constant on fixed-quanta bases; zero omits it.
    pub omega0: f64,
    pub u: f64,
    pub j: f64,
    /// Per-level anharmonic shifts in units of `E_R`.
    pub anharmonic_shifts: Vec<f64>,
}

impl ModelParams {
    pub fn new(e_r: f64, u: f64, j: f64, n_levels: usize) -> Self {
        Self { e_r, omega0: 0.0, u, j, anharmonic_shifts: (0..n_levels).map(level_shift).collect() }
    }

    /// Violations of `omega0 >> E_R >> U >> J`, as human-readable strings.
    /// A factor of 5 counts as "much greater".
    pub fn hierarchy_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |big: f64, small: f64, what: &str| {
            if small != 0.0 && big.abs() < 5.0 * small.abs() {
                out.push(format!("{what} not well separated ({big} vs {small})"));
            }
        };
        if self.omega0 != 0.0 {
            check(self.omega0, self.e_r, "omega0 >> E_R");
        }
        check(self.e_r, self.u, "E_R >> U");
        check(self.u, self.j, "U >> J");
        out
    }
}

/// `H_E`, `H_U` and `H_J` on a basis, each with unit strength, so that the
/// full Hamiltonian at any instant is a linear combination.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    basis: BasisIndex,
    /// Diagonal of `H_E` in units of `E_R`.
    pub anharmonic: Vec<f64>,
    /// Harmonic quanta per basis state.
    pub quanta: Vec<f64>,
    /// `H_U` in units of `U`.
    pub interaction: DMatrix<f64>,
    /// `H_J` in units of `J`.
    pub hopping: DMatrix<f64>,
}

impl HamiltonianTerms {
    /// Terms with the default first-order anharmonic shifts.
    pub fn new(basis: &BasisIndex) -> Self {
        let shifts: Vec<f64> = (0..basis.space().n_levels()).map(level_shift).collect();
        Self::with_shifts(basis, &shifts).expect("shift table matches truncation")
    }

    pub fn with_shifts(basis: &BasisIndex, shifts: &[f64]) -> Result<Self> {
        let space = *basis.space();
        if shifts.len() != space.n_levels() {
            return Err(Error::DimensionMismatch { expected: space.n_levels(), found: shifts.len() });
        }
        let anharmonic = basis
            .states()
            .iter()
            .map(|s| s.occupied(&space).iter().map(|o| shifts[o.level]).sum())
            .collect();
        let quanta = basis.states().iter().map(|s| s.quanta(&space) as f64).collect();
        Ok(Self {
            basis: basis.clone(),
            anharmonic,
            quanta,
            interaction: interaction_matrix(basis),
            hopping: hopping_matrix(basis),
        })
    }

    pub fn basis(&self) -> &BasisIndex {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `E_R H_E + omega0 Q + U H_U + J H_J`.
    pub fn assemble_with_omega0(&self, e_r: f64, omega0: f64, u: f64, j: f64) -> DMatrix<f64> {
        let mut h = &self.interaction * u + &self.hopping * j;
        for (k, (a, q)) in self.anharmonic.iter().zip(&self.quanta).enumerate() {
            h[(k, k)] += e_r * a + omega0 * q;
        }
        h
    }

    /// `E_R H_E + U H_U + J H_J`, dropping the harmonic ladder.
    pub fn assemble(&self, e_r: f64, u: f64, j: f64) -> DMatrix<f64> {
        self.assemble_with_omega0(e_r, 0.0, u, j)
    }
}

/// Contact interaction restricted to on-site, opposite-spin pairs:
/// `sum_S sum_ijkl 2 U_ijkl c+_{iS up} c+_{jS down} c_{lS down} c_{kS up}`.
///
/// Terms whose image leaves the basis are dropped, so on a fixed-quanta
/// basis only the `i + j = k + l` terms survive.
fn interaction_matrix(basis: &BasisIndex) -> DMatrix<f64> {
    let space = *basis.space();
    let n = space.n_levels();
    let table = InteractionTable::new(n);
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    for site in 0..space.n_sites() {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let w = 2.0 * table.get(i, j, k, l);
                        if w.abs() < 1e-15 {
                            continue;
                        }
                        let ops = [
                            Ladder::Create(orb(site, i, Spin::Up)),
                            Ladder::Create(orb(site, j, Spin::Down)),
                            Ladder::Annihilate(orb(site, l, Spin::Down)),
                            Ladder::Annihilate(orb(site, k, Spin::Up)),
                        ];
                        h += basis.operator_matrix(&ops) * w;
                    }
                }
            }
        }
    }
    h
}

/// Nearest-neighbour hopping `-sum_{i, sigma} (c+_{iL} c_{iR} + h.c.)` along a
/// chain, level- and spin-preserving.
fn hopping_matrix(basis: &BasisIndex) -> DMatrix<f64> {
    let space = *basis.space();
    let mut h = DMatrix::zeros(basis.len(), basis.len());
    for site in 0..space.n_sites().saturating_sub(1) {
        for level in 0..space.n_levels() {
            for spin in [Spin::Up, Spin::Down] {
                let a = orb(site, level, spin);
                let b = orb(site + 1, level, spin);
                h -= basis.operator_matrix(&[Ladder::Create(a), Ladder::Annihilate(b)]);
                h -= basis.operator_matrix(&[Ladder::Create(b), Ladder::Annihilate(a)]);
            }
        }
    }
    h
}

/// Full static Hamiltonian for `params` on `basis`.
pub fn build_h(params: &ModelParams, basis: &BasisIndex) -> Result<OperatorMatrix> {
    for w in params.hierarchy_warnings() {
        warn!("{w}");
    }
    let terms = HamiltonianTerms::with_shifts(basis, &params.anharmonic_shifts)?;
    let h = terms.assemble_with_omega0(params.e_r, params.omega0, params.u, params.j);
    OperatorMatrix::new(to_complex(&h), basis)
}

/// Zero every element between states whose reference energies differ by
/// more than `tol`: the time average of `H` in the interaction picture of the
/// diagonal reference Hamiltonian.
pub fn secular_project<T: Scalar + Zero>(h: &DMatrix<T>, energies: &[f64], tol: f64) -> DMatrix<T> {
    assert_eq!(h.nrows(), energies.len(), "one reference energy per basis state");
    DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| {
        if (energies[i] - energies[j]).abs() <= tol {
            h[(i, j)].clone()
        } else {
            T::zero()
        }
    })
}

/// Couplings below this are treated as exact zeros.
const COUPLING_TOL: f64 = 1e-10;
/// Eigenvalue gaps below this count as degenerate.
const GAP_TOL: f64 = 1e-9;

/// Second-order energy shift `sum_f |<f|V|s>|^2 / (E_s - E_f)` of an
/// eigenstate `s` of `h0`, summed over the eigenbasis of `h0`.
///
/// A nonzero coupling into the degenerate eigenspace of `s` is an error.
pub fn second_order_shifts(h0: &DMatrix<f64>, v: &DMatrix<f64>, state: &DVector<f64>) -> Result<f64> {
    let s = state.normalize();
    let e_s = s.dot(&(h0 * &s));
    let residual = (h0 * &s - &s * e_s).norm();
    if residual > 1e-8 {
        return Err(Error::InvalidParameter(format!("state is not an eigenvector of h0 (residual {residual:.2e})")));
    }
    let mut vs = v * &s;
    let first = s.dot(&vs);
    vs -= &s * first;
    let eig = SymmetricEigen::new(h0.clone());
    let mut shift = 0.0;
    let mut degenerate_weight = 0.0;
    for (k, &e_f) in eig.eigenvalues.iter().enumerate() {
        let amp = eig.eigenvectors.column(k).dot(&vs);
        if (e_s - e_f).abs() < GAP_TOL {
            degenerate_weight += amp * amp;
        } else {
            shift += amp * amp / (e_s - e_f);
        }
    }
    if degenerate_weight.sqrt() > COUPLING_TOL {
        return Err(Error::DegenerateIntermediate { coupling: degenerate_weight.sqrt(), gap: 0.0 });
    }
    Ok(shift)
}

/// Second-order shifts of the four logical states, in units of `J^2 / U`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderAnalysis {
    /// Shifts of `|00>, |01>, |10>, |11>`.
    pub shifts: [f64; 4],
    /// `E_01 + E_10 - E_00 - E_11`.
    pub g: f64,
    /// `(E_00 - E_11) / 2`, the hopping part of the single-qubit splitting shift.
    pub omega_j: f64,
}

/// Perturbative shifts from exact enumeration over the two-site basis.
///
/// The unperturbed Hamiltonian is `H_U` with the secular approximation taken
/// against `H_E`, i.e. the `E_R -> infinity` limit.
pub fn second_order_analysis(n_levels: usize) -> Result<SecondOrderAnalysis> {
    let basis = two_site_basis(n_levels)?;
    let terms = HamiltonianTerms::new(&basis);
    let h0 = secular_project(&terms.interaction, &terms.anharmonic, 1e-9);
    let p = build_logical_isometry(&basis)?;
    let mut shifts = [0.0; 4];
    for (k, s) in shifts.iter_mut().enumerate() {
        *s = second_order_shifts(&h0, &terms.hopping, &p.column(k).into_owned())?;
    }
    Ok(SecondOrderAnalysis {
        shifts,
        g: shifts[1] + shifts[2] - shifts[0] - shifts[3],
        omega_j: (shifts[0] - shifts[3]) / 2.0,
    })
}

/// Cached three-level [`second_order_analysis`].
pub fn default_second_order() -> &'static SecondOrderAnalysis {
    static CACHE: OnceLock<SecondOrderAnalysis> = OnceLock::new();
    CACHE.get_or_init(|| second_order_analysis(3).expect("three-level analysis"))
}

/// Closed-form prefactor of `g` in units of `J^2 / U`.
pub fn g_prefactor() -> f64 {
    3152.0 / 155.0 * (2.0 / PI).sqrt()
}

/// Closed-form prefactor of the hopping part of `omega` in units of `J^2 / U`.
pub fn omega_j_prefactor() -> f64 {
    -156.0 / 31.0 * (2.0 / PI).sqrt()
}

/// Effective two-qubit parameters.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EffectiveParams {
    /// Ising coupling `E_01 + E_10 - E_00 - E_11`.
    pub g: f64,
    /// Single-qubit splitting shift.
    pub omega: f64,
}

/// Closed-form `g` and `omega` at second order in `J / U` and `U / E_R`.
///
/// ```
/// use fermion_pair::hamiltonian::effective_parameters;
/// let p = effective_parameters(1.0, 1.0, 100.0).unwrap();
/// assert!((p.g - 16.2254).abs() < 1e-4);
/// ```
pub fn effective_parameters(j: f64, u: f64, e_r: f64) -> Result<EffectiveParams> {
    if u == 0.0 {
        return Err(Error::DivisionByZero("J^2 / U"));
    }
    if e_r == 0.0 {
        return Err(Error::DivisionByZero("U^2 / E_R"));
    }
    if j.abs() * 5.0 > u.abs() || u.abs() * 5.0 > e_r.abs() {
        warn!("effective parameters outside J << U << E_R (J = {j}, U = {u}, E_R = {e_r})");
    }
    let r = j * j / u;
    Ok(EffectiveParams { g: g_prefactor() * r, omega: PI * u * u / (16.0 * e_r) + omega_j_prefactor() * r })
}

/// Single-site qubit interaction block `P^T H_U P` in units of `U`.
pub fn single_site_interaction_block(n_levels: usize) -> Result<DMatrix<f64>> {
    let basis = crate::fock::single_site_basis(n_levels)?;
    let p = crate::fock::build_single_site_isometry(&basis)?;
    Ok(p.transpose() * interaction_matrix(&basis) * &p)
}
