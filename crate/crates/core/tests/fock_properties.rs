use fermion_pair::fock::{
    apply_ladder, enumerate_basis, orb, Constraints, FockState, Ladder, OrbitalSpace, Spin,
};
use proptest::prelude::*;

fn space() -> OrbitalSpace {
    OrbitalSpace::new(2, 2).unwrap()
}

/// `sum_s sign * |s>` as a map, for comparing operator products.
fn apply_sum(space: &OrbitalSpace, terms: &[(i8, Vec<Ladder>)], s: FockState) -> Vec<(u64, i32)> {
    let mut out: Vec<(u64, i32)> = Vec::new();
    for (coef, ops) in terms {
        let (sign, t) = apply_ladder(space, ops, s);
        if sign != 0 {
            match out.iter_mut().find(|(m, _)| *m == t.mask()) {
                Some(e) => e.1 += (*coef * sign) as i32,
                None => out.push((t.mask(), (*coef * sign) as i32)),
            }
        }
    }
    out.retain(|e| e.1 != 0);
    out.sort();
    out
}

proptest! {
    #[test]
    fn canonical_anticommutation(mask in 0u64..256, a in 0usize..8, b in 0usize..8) {
        let sp = space();
        let (oa, ob) = (sp.orbital(a), sp.orbital(b));
        let s = FockState::from_mask(mask);
        let anti = apply_sum(&sp, &[
            (1, vec![Ladder::Annihilate(oa), Ladder::Create(ob)]),
            (1, vec![Ladder::Create(ob), Ladder::Annihilate(oa)]),
        ], s);
        let expect = if a == b { vec![(mask, 1)] } else { vec![] };
        prop_assert_eq!(anti, expect);

        let cc = apply_sum(&sp, &[
            (1, vec![Ladder::Create(oa), Ladder::Create(ob)]),
            (1, vec![Ladder::Create(ob), Ladder::Create(oa)]),
        ], s);
        prop_assert!(cc.is_empty());
    }

    #[test]
    fn enumeration_matches_brute_force(n in 0usize..9, q in 0usize..9, two_sz in -4i32..5) {
        let sp = space();
        let c = Constraints::sector(n, q, two_sz);
        let basis = enumerate_basis(2, 2, c).unwrap();
        let brute = (0u64..256)
            .map(FockState::from_mask)
            .filter(|s| s.particle_number() == n && s.quanta(&sp) == q && s.two_sz(&sp) == two_sz)
            .count();
        prop_assert_eq!(basis.len(), brute);
        for (i, s) in basis.states().iter().enumerate() {
            prop_assert_eq!(basis.index_of(*s), Some(i));
        }
    }

    #[test]
    fn hopping_matrix_is_symmetric(level in 0usize..3, up in any::<bool>()) {
        let spin = if up { Spin::Up } else { Spin::Down };
        let basis = enumerate_basis(2, 3, Constraints::sector(4, 4, 0)).unwrap();
        let l = orb(0, level, spin);
        let r = orb(1, level, spin);
        let lr = basis.operator_matrix(&[Ladder::Create(l), Ladder::Annihilate(r)]);
        let rl = basis.operator_matrix(&[Ladder::Create(r), Ladder::Annihilate(l)]);
        prop_assert_eq!(lr.transpose(), rl);
    }
}

#[test]
fn invariant_subspace_dimension() {
    let basis = enumerate_basis(2, 3, Constraints::sector(4, 4, 0)).unwrap();
    assert_eq!(basis.len(), 59);
}

#[test]
fn unconstrained_enumeration_is_the_full_fock_space() {
    let basis = enumerate_basis(2, 2, Constraints::default()).unwrap();
    assert_eq!(basis.len(), 256);
}
