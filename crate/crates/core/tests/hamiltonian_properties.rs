use fermion_pair::fock::{enumerate_basis, Constraints};
use fermion_pair::hamiltonian::{
    effective_parameters, secular_project, u_matrix_element, HamiltonianTerms,
};
use fermion_pair::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #[test]
    fn interaction_coefficients_are_permutation_symmetric(i in 0usize..5, j in 0usize..5, k in 0usize..5, l in 0usize..5) {
        let u = u_matrix_element(i, j, k, l);
        for v in [u_matrix_element(j, i, k, l), u_matrix_element(k, l, i, j), u_matrix_element(l, k, j, i)] {
            prop_assert!((u - v).abs() < 1e-14);
        }
        if (i + j + k + l) % 2 == 1 {
            prop_assert_eq!(u, 0.0);
        }
    }

    #[test]
    fn hamiltonian_is_real_symmetric(e_r in 1.0f64..100.0, u in -5.0f64..5.0, j in -2.0f64..2.0) {
        let basis = enumerate_basis(2, 3, Constraints::sector(4, 4, 0)).unwrap();
        let h = HamiltonianTerms::new(&basis).assemble(e_r, u, j);
        prop_assert!((&h - h.transpose()).amax() < 1e-13);
    }

    #[test]
    fn secular_hamiltonian_conserves_quanta(e_r in 1.0f64..100.0, u in -5.0f64..5.0, j in -2.0f64..2.0) {
        // Quanta left free: the full contact interaction mixes blocks.
        let basis = enumerate_basis(2, 3, Constraints { particles: Some(4), quanta: None, two_sz: Some(0) }).unwrap();
        let terms = HamiltonianTerms::new(&basis);
        let h = terms.assemble(e_r, u, j);
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(terms.quanta.clone()));
        let sec = secular_project(&h, &terms.quanta, 0.5);
        prop_assert!((&sec * &q - &q * &sec).amax() < 1e-12);
        let commutator = (&h * &q - &q * &h).amax();
        prop_assert!(u == 0.0 || commutator > 0.0);
    }
}

#[test]
fn effective_parameters_reject_zero_interaction() {
    assert!(matches!(effective_parameters(0.1, 0.0, 10.0), Err(Error::DivisionByZero(_))));
}
