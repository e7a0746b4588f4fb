//! Truncated fermionic Fock space over `(site, level, spin)` orbitals.
//!
//! Orbitals are totally ordered by `(site, level, spin)` with spin up before
//! spin down. A [`FockState`] is an occupation bitmask over that ordering and
//! every fermionic sign is the parity of the occupied orbitals preceding the
//! one being created or annihilated.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Twice the z-projection: +1 for up, -1 for down.
    pub fn two_sz(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

/// Single-particle orbital. Field order gives the canonical ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orbital {
    pub site: usize,
    pub level: usize,
    pub spin: Spin,
}

impl Orbital {
    pub const fn new(site: usize, level: usize, spin: Spin) -> Self {
        Self { site, level, spin }
    }
}

impl fmt::Display for Orbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.site {
            0 => "L".to_string(),
            1 => "R".to_string(),
            n => n.to_string(),
        };
        let arrow = if self.spin == Spin::Up { "↑" } else { "↓" };
        write!(f, "{}{}{}", self.level, s, arrow)
    }
}

/// Shorthand used throughout: `orb(site, level, spin)`.
pub const fn orb(site: usize, level: usize, spin: Spin) -> Orbital {
    Orbital::new(site, level, spin)
}

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

/// The finite set of orbitals for `n_sites` sites with `n_levels` levels each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrbitalSpace {
    n_sites: usize,
    n_levels: usize,
}

impl OrbitalSpace {
    pub fn new(n_sites: usize, n_levels: usize) -> Result<Self> {
        if n_sites == 0 || n_levels == 0 {
            return Err(Error::InvalidParameter("need at least one site and one level".into()));
        }
        if 2 * n_sites * n_levels > 64 {
            return Err(Error::InvalidParameter(format!(
                "{} orbitals exceed the 64-bit occupation mask",
                2 * n_sites * n_levels
            )));
        }
        Ok(Self { n_sites, n_levels })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn len(&self) -> usize {
        2 * self.n_sites * self.n_levels
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, o: Orbital) -> bool {
        o.site < self.n_sites && o.level < self.n_levels
    }

    /// Position of `o` in the canonical ordering.
    pub fn index(&self, o: Orbital) -> usize {
        debug_assert!(self.contains(o));
        let spin = match o.spin {
            Spin::Up => 0,
            Spin::Down => 1,
        };
        (o.site * self.n_levels + o.level) * 2 + spin
    }

    pub fn orbital(&self, index: usize) -> Orbital {
        let spin = if index % 2 == 0 { Spin::Up } else { Spin::Down };
        let rest = index / 2;
        Orbital::new(rest / self.n_levels, rest % self.n_levels, spin)
    }

    pub fn orbitals(&self) -> impl Iterator<Item = Orbital> + '_ {
        (0..self.len()).map(|i| self.orbital(i))
    }
}

/// Occupation configuration as a bitmask over the canonical orbital order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState(u64);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    pub fn from_mask(mask: u64) -> Self {
        Self(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn is_occupied(self, index: usize) -> bool {
        (self.0 >> index) & 1 == 1
    }

    pub fn particle_number(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn occupied(self, space: &OrbitalSpace) -> Vec<Orbital> {
        (0..space.len()).filter(|&i| self.is_occupied(i)).map(|i| space.orbital(i)).collect()
    }

    /// Total harmonic quanta, the sum of occupied levels.
    pub fn quanta(self, space: &OrbitalSpace) -> usize {
        self.occupied(space).iter().map(|o| o.level).sum()
    }

    /// Twice the total spin projection.
    pub fn two_sz(self, space: &OrbitalSpace) -> i32 {
        self.occupied(space).iter().map(|o| o.spin.two_sz()).sum()
    }

    /// Parity sign from the occupied orbitals strictly before `index`.
    fn prefix_sign(self, index: usize) -> i8 {
        let below = self.0 & ((1u64 << index) - 1);
        if below.count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn display(self, space: &OrbitalSpace) -> String {
        let names: Vec<String> = self.occupied(space).iter().map(|o| o.to_string()).collect();
        format!("|{}⟩", names.join(" "))
    }
}

/// A creation or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(Orbital),
    Annihilate(Orbital),
}

/// Apply an operator product, written left to right as in `c†_a c_b`, to a
/// basis state. Returns the fermionic sign (0 if the state is annihilated)
/// and the resulting configuration.
pub fn apply_ladder(space: &OrbitalSpace, ops: &[Ladder], state: FockState) -> (i8, FockState) {
    let mut sign = 1i8;
    let mut s = state;
    for op in ops.iter().rev() {
        match *op {
            Ladder::Create(o) => {
                let k = space.index(o);
                if s.is_occupied(k) {
                    return (0, state);
                }
                sign *= s.prefix_sign(k);
                s = FockState(s.0 | (1u64 << k));
            }
            Ladder::Annihilate(o) => {
                let k = space.index(o);
                if !s.is_occupied(k) {
                    return (0, state);
                }
                sign *= s.prefix_sign(k);
                s = FockState(s.0 & !(1u64 << k));
            }
        }
    }
    (sign, s)
}

/// `c†_{o_1} c†_{o_2} ... |vac⟩` in the written order.
pub fn create_state(space: &OrbitalSpace, orbitals: &[Orbital]) -> (i8, FockState) {
    let ops: Vec<Ladder> = orbitals.iter().map(|&o| Ladder::Create(o)).collect();
    apply_ladder(space, &ops, FockState::VACUUM)
}

/// Conservation constraints; `None` leaves a quantity unconstrained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Constraints {
    pub particles: Option<usize>,
    pub quanta: Option<usize>,
    pub two_sz: Option<i32>,
}

impl Constraints {
    pub fn sector(particles: usize, quanta: usize, two_sz: i32) -> Self {
        Self { particles: Some(particles), quanta: Some(quanta), two_sz: Some(two_sz) }
    }

    fn admits(&self, space: &OrbitalSpace, s: FockState) -> bool {
        self.particles.is_none_or(|n| s.particle_number() == n)
            && self.quanta.is_none_or(|q| s.quanta(space) == q)
            && self.two_sz.is_none_or(|m| s.two_sz(space) == m)
    }
}

/// An enumerated, ordered set of Fock states with reverse lookup.
#[derive(Clone, Debug)]
pub struct BasisIndex {
    space: OrbitalSpace,
    constraints: Constraints,
    states: Vec<FockState>,
    lookup: HashMap<FockState, usize>,
}

impl BasisIndex {
    pub fn space(&self) -> &OrbitalSpace {
        &self.space
    }

    pub fn constraints(&self) -> Constraints {
        self.constraints
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: FockState) -> Option<usize> {
        self.lookup.get(&s).copied()
    }

    pub fn state(&self, i: usize) -> FockState {
        self.states[i]
    }

    /// Stable fingerprint of the enumerated states, used to tag operators.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the masks.
        let mut h: u64 = 0xcbf29ce484222325;
        for s in &self.states {
            for b in s.mask().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h ^ (self.space.n_levels as u64) << 56 ^ (self.space.n_sites as u64) << 48
    }

    /// Matrix of a product of ladder operators in this basis. Amplitudes that
    /// leave the basis are dropped.
    pub fn operator_matrix(&self, ops: &[Ladder]) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (col, &s) in self.states.iter().enumerate() {
            let (sign, t) = apply_ladder(&self.space, ops, s);
            if sign != 0 {
                if let Some(row) = self.index_of(t) {
                    m[(row, col)] += sign as f64;
                }
            }
        }
        m
    }

    /// One JSON record per line: `{"index": i, "orbitals": [[level, site, spin], ...]}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Record {
            index: usize,
            orbitals: Vec<(usize, usize, Spin)>,
        }
        for (index, s) in self.states.iter().enumerate() {
            let orbitals = s.occupied(&self.space).iter().map(|o| (o.level, o.site, o.spin)).collect();
            serde_json::to_writer(&mut w, &Record { index, orbitals })?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// All Fock states of `n_sites x n_levels x 2` orbitals satisfying the
/// constraints, in ascending bitmask order. Unsatisfiable constraints give an
/// empty basis.
pub fn enumerate_basis(n_sites: usize, n_levels: usize, constraints: Constraints) -> Result<BasisIndex> {
    let space = OrbitalSpace::new(n_sites, n_levels)?;
    let n_orb = space.len();
    let limit: u64 = if n_orb == 64 { u64::MAX } else { (1u64 << n_orb) - 1 };
    let mut states = Vec::new();
    let mut visit = |mask: u64| {
        let s = FockState(mask);
        if constraints.admits(&space, s) {
            states.push(s);
        }
    };
    match constraints.particles {
        Some(n) if n > n_orb => {}
        Some(0) => visit(0),
        Some(n) => {
            // Gosper's hack: successive masks with exactly n bits set.
            let mut mask: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            loop {
                visit(mask);
                let c = mask & mask.wrapping_neg();
                let r = mask.wrapping_add(c);
                if r == 0 || r > limit {
                    break;
                }
                mask = (((r ^ mask) >> 2) / c) | r;
                if mask > limit {
                    break;
                }
            }
        }
        None => {
            assert!(n_orb <= 24, "unconstrained particle number limited to 24 orbitals");
            for mask in 0..=limit {
                visit(mask);
            }
        }
    }
    states.sort();
    let lookup = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(BasisIndex { space, constraints, states, lookup })
}

/// The register's two-site working space: four fermions, four quanta, `S_z = 0`.
pub fn two_site_basis(n_levels: usize) -> Result<BasisIndex> {
    enumerate_basis(2, n_levels, Constraints::sector(4, 4, 0))
}

/// Single-site qubit space: two fermions, two quanta, `S_z = 0`.
pub fn single_site_basis(n_levels: usize) -> Result<BasisIndex> {
    enumerate_basis(1, n_levels, Constraints::sector(2, 2, 0))
}

/// Logical qubit value stored in one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Qubit {
    /// Both fermions in level 1, spin singlet.
    Zero,
    /// One fermion in level 0 and one in level 2, spatially symmetric singlet.
    One,
}

/// Components of a single-site qubit state as `(amplitude, creation order)`.
pub fn qubit_components(site: usize, q: Qubit) -> Vec<(f64, Vec<Orbital>)> {
    use Spin::{Down, Up};
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        Qubit::Zero => vec![(1.0, vec![orb(site, 1, Up), orb(site, 1, Down)])],
        Qubit::One => vec![
            (r, vec![orb(site, 0, Up), orb(site, 2, Down)]),
            (-r, vec![orb(site, 0, Down), orb(site, 2, Up)]),
        ],
    }
}

fn column_from_components(basis: &BasisIndex, comps: &[(f64, Vec<Orbital>)]) -> Result<Vec<f64>> {
    let mut col = vec![0.0; basis.len()];
    for (amp, orbitals) in comps {
        let missing = || {
            let names: Vec<String> = orbitals.iter().map(|o| o.to_string()).collect();
            Error::MissingState(format!("|{}⟩", names.join(" ")))
        };
        if !orbitals.iter().all(|&o| basis.space().contains(o)) {
            return Err(missing());
        }
        let (sign, s) = create_state(basis.space(), orbitals);
        let idx = basis.index_of(s).filter(|_| sign != 0).ok_or_else(missing)?;
        col[idx] += amp * sign as f64;
    }
    Ok(col)
}

/// Isometry from the logical `|00⟩, |01⟩, |10⟩, |11⟩` (left qubit first) into
/// the two-site basis. Each column is the product of the two single-site qubit
/// states with the left site's orbitals created first.
pub fn build_logical_isometry(basis: &BasisIndex) -> Result<DMatrix<f64>> {
    let mut p = DMatrix::zeros(basis.len(), 4);
    let qubits = [Qubit::Zero, Qubit::One];
    for (col, (ql, qr)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        let mut comps = Vec::new();
        for (al, ol) in qubit_components(LEFT, qubits[ql]) {
            for (ar, or) in qubit_components(RIGHT, qubits[qr]) {
                let mut orbitals = ol.clone();
                orbitals.extend(or);
                comps.push((al * ar, orbitals));
            }
        }
        let v = column_from_components(basis, &comps)?;
        for (row, x) in v.into_iter().enumerate() {
            p[(row, col)] = x;
        }
    }
    Ok(p)
}

/// Isometry from `|0⟩, |1⟩` into a single-site basis.
pub fn build_single_site_isometry(basis: &BasisIndex) -> Result<DMatrix<f64>> {
    let mut p = DMatrix::zeros(basis.len(), 2);
    for (col, q) in [Qubit::Zero, Qubit::One].into_iter().enumerate() {
        let v = column_from_components(basis, &qubit_components(0, q))?;
        for (row, x) in v.into_iter().enumerate() {
            p[(row, col)] = x;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Spin::{Down, Up};

    #[test]
    fn invariant_subspace_has_59_states() {
        let b = two_site_basis(3).unwrap();
        assert_eq!(b.len(), 59);
        for &s in b.states() {
            assert_eq!(s.particle_number(), 4);
            assert_eq!(s.quanta(b.space()), 4);
            assert_eq!(s.two_sz(b.space()), 0);
        }
    }

    #[test]
    fn vacuum_sector() {
        let b = enumerate_basis(1, 3, Constraints::sector(0, 0, 0)).unwrap();
        assert_eq!(b.states(), &[FockState::VACUUM]);
    }

    #[test]
    fn single_site_two_quanta_sector() {
        let b = single_site_basis(3).unwrap();
        let sp = *b.space();
        let mut expected: Vec<FockState> = [
            vec![orb(0, 1, Up), orb(0, 1, Down)],
            vec![orb(0, 0, Up), orb(0, 2, Down)],
            vec![orb(0, 0, Down), orb(0, 2, Up)],
        ]
        .iter()
        .map(|o| create_state(&sp, o).1)
        .collect();
        expected.sort();
        assert_eq!(b.states(), expected.as_slice());
    }

    #[test]
    fn unsatisfiable_constraints_are_empty() {
        let b = enumerate_basis(1, 3, Constraints::sector(2, 5, 0)).unwrap();
        assert!(b.is_empty());
        let b = enumerate_basis(1, 2, Constraints::sector(5, 0, 0)).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn zero_levels_rejected() {
        assert!(enumerate_basis(2, 0, Constraints::default()).is_err());
    }

    #[test]
    fn create_on_vacuum() {
        let sp = OrbitalSpace::new(2, 3).unwrap();
        let (sign, s) = apply_ladder(&sp, &[Ladder::Create(orb(LEFT, 1, Up))], FockState::VACUUM);
        assert_eq!(sign, 1);
        assert_eq!(s.occupied(&sp), vec![orb(LEFT, 1, Up)]);
    }

    #[test]
    fn pauli_blocks_double_creation() {
        let sp = OrbitalSpace::new(1, 3).unwrap();
        let (_, s) = create_state(&sp, &[orb(0, 0, Up)]);
        let (sign, _) = apply_ladder(&sp, &[Ladder::Create(orb(0, 0, Up))], s);
        assert_eq!(sign, 0);
    }

    #[test]
    fn creation_order_sets_sign() {
        let sp = OrbitalSpace::new(2, 3).unwrap();
        let (a, sa) = create_state(&sp, &[orb(0, 0, Up), orb(1, 2, Down)]);
        let (b, sb) = create_state(&sp, &[orb(1, 2, Down), orb(0, 0, Up)]);
        assert_eq!(sa, sb);
        assert_eq!(a, -b);
    }

    #[test]
    fn orbital_index_round_trip() {
        let sp = OrbitalSpace::new(3, 4).unwrap();
        for (i, o) in sp.orbitals().enumerate() {
            assert_eq!(sp.index(o), i);
        }
        assert!(orb(0, 2, Down) < orb(1, 0, Up));
        assert!(orb(0, 1, Down) < orb(0, 2, Up));
    }

    #[test]
    fn isometry_columns_and_orthonormality() {
        let b = two_site_basis(3).unwrap();
        let p = build_logical_isometry(&b).unwrap();
        let (_, s00) = create_state(b.space(), &[orb(LEFT, 1, Up), orb(LEFT, 1, Down), orb(RIGHT, 1, Up), orb(RIGHT, 1, Down)]);
        let i00 = b.index_of(s00).unwrap();
        assert_eq!(p[(i00, 0)], 1.0);
        assert_eq!(p.column(0).iter().filter(|x| **x != 0.0).count(), 1);
        let nz01: Vec<f64> = p.column(1).iter().copied().filter(|x| *x != 0.0).collect();
        assert_eq!(nz01.len(), 2);
        for x in nz01 {
            assert!((x.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert_eq!(p.column(3).iter().filter(|x| **x != 0.0).count(), 4);
        let g = p.transpose() * &p;
        assert!((g - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn isometry_fails_on_truncated_basis() {
        let b = two_site_basis(2).unwrap();
        assert!(matches!(build_logical_isometry(&b), Err(Error::MissingState(_))));
    }

    #[test]
    fn jsonl_dump_lists_every_state() {
        let b = single_site_basis(3).unwrap();
        let mut buf = Vec::new();
        b.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["index"], 0);
        assert_eq!(first["orbitals"].as_array().unwrap().len(), 2);
    }
}
