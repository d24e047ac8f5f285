use blended_gbdf::construction::{
    abscissae, assemble_glm, catalogue, differentiation_weights, error_estimator_tableau, gbdf_nu,
    starting_tableau, AuxChoice, ConstructionError, GlmTableau, TableauDocument, CATALOGUE_TRIPLES,
};
use blended_gbdf::linalg::DenseMatrix;
use proptest::prelude::*;

/// Feasible `(k, r, ℓ, choice)`: `ν ≤ ℓ ≤ r` and `ℓ + r ≥ k + 1`.
fn feasible() -> impl Strategy<Value = (usize, usize, usize, AuxChoice)> {
    (1usize..=10)
        .prop_flat_map(|k| {
            let nu = gbdf_nu(k);
            (Just(k), nu..=k + 2)
        })
        .prop_flat_map(|(k, ell)| {
            let r_min = ell.max(k + 1 - ell.min(k + 1)).max(1);
            (Just(k), r_min..=ell + 2, Just(ell))
        })
        .prop_filter("grid large enough", |(k, r, ell)| ell + r > *k)
        .prop_flat_map(|(k, r, ell)| {
            (
                Just(k),
                Just(r),
                Just(ell),
                prop_oneof![Just(AuxChoice::Geometric), Just(AuxChoice::Rational)],
            )
        })
}

fn check_invariants(t: &GlmTableau) -> Result<(), TestCaseError> {
    let r = t.r();
    prop_assert!(t.c().windows(2).all(|w| w[0] < w[1]));
    prop_assert_eq!(t.c()[r - 1], t.ell() as f64);
    for i in 0..t.ell().saturating_sub(1) {
        prop_assert_eq!(t.c()[i], (i + 1) as f64);
    }
    prop_assert!(t.xi().iter().all(|&x| x > 0.0));
    prop_assert!((t.xi().iter().sum::<f64>() - 1.0).abs() < 1e-14);
    let id = t.a().matmul(t.a2()).unwrap();
    prop_assert!(id.sub(&DenseMatrix::identity(r)).unwrap().max_abs() < 1e-12);
    for s in t.u().row_sums() {
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
    for j in t.aux_indices() {
        for i in 0..r {
            prop_assert_eq!(t.u()[(i, j)], 0.0);
            prop_assert_eq!(t.a1()[(i, j)], 0.0);
        }
    }
    prop_assert!(
        t.order_residual(t.k()) < 1e-9,
        "residual {}",
        t.order_residual(t.k())
    );
    for row in t.rows() {
        prop_assert!(row.alpha.iter().sum::<f64>().abs() < 1e-10);
    }
    Ok(())
}

proptest! {
    #[test]
    fn assembled_tableaux_satisfy_invariants((k, r, ell, choice) in feasible()) {
        let t = assemble_glm(k, r, ell, choice).unwrap();
        check_invariants(&t)?;
        let again = assemble_glm(k, r, ell, choice).unwrap();
        prop_assert_eq!(t, again);
    }

    #[test]
    fn weights_are_exact_on_random_stencils(
        gaps in prop::collection::vec(0.2f64..2.0, 1..9),
        pick in 0usize..9,
    ) {
        let mut stencil = vec![0.0];
        for g in &gaps {
            stencil.push(stencil.last().unwrap() + g);
        }
        let j = pick % stencil.len();
        let row = differentiation_weights(&stencil, j).unwrap();
        prop_assert!(row.exactness_residual(row.order()) < 1e-9);
    }

    #[test]
    fn documents_round_trip((k, r, ell, choice) in feasible()) {
        let t = assemble_glm(k, r, ell, choice).unwrap().with_gamma(0.5);
        let doc = TableauDocument::from_json(&TableauDocument::from_tableau(&t).to_json()).unwrap();
        prop_assert_eq!(doc.to_tableau().unwrap(), t);
    }
}

#[test]
fn catalogue_methods_are_consistent() {
    for choice in [AuxChoice::Geometric, AuxChoice::Rational] {
        for t in catalogue(choice).unwrap() {
            check_invariants(&t).unwrap();
        }
    }
}

#[test]
fn every_catalogue_method_but_the_first_has_a_companion() {
    for &(k, r, ell) in &CATALOGUE_TRIPLES {
        let e = error_estimator_tableau(k, r, ell, AuxChoice::Rational);
        if k == 3 {
            assert!(matches!(e, Err(ConstructionError::InvalidTriple { .. })));
        } else {
            let e = e.unwrap();
            assert_eq!(e.k(), k + 1);
            let t = assemble_glm(k, r, ell, AuxChoice::Rational).unwrap();
            assert_eq!(e.c(), t.c());
            assert!(e.order_residual(k + 1) < 1e-9);
        }
    }
}

#[test]
fn abscissae_of_the_fourth_order_method() {
    let (c, _) = abscissae(4, 4, 3, AuxChoice::Geometric).unwrap();
    assert!((c[2] - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
    let (c, _) = abscissae(4, 4, 3, AuxChoice::Rational).unwrap();
    assert_eq!(c, vec![1.0, 2.0, 8.0 / 3.0, 3.0]);
}

#[test]
fn starting_rows_are_exact() {
    for k in 2..=16 {
        let s = starting_tableau(k).unwrap();
        for (j, row) in s.rows().iter().enumerate() {
            assert_eq!(row.deriv_index, j + 1);
            assert!(row.exactness_residual(k) < 1e-8, "k={k} row {j}");
        }
    }
    let s = starting_tableau(2).unwrap();
    let expect = [[-0.5, 0.0, 0.5], [0.5, -2.0, 1.5]];
    for (i, row) in expect.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((s.cal_a()[(i, j)] - v).abs() < 1e-15);
        }
    }
}

#[test]
fn low_orders_are_classical_bdf() {
    let t = assemble_glm(1, 1, 1, AuxChoice::None).unwrap();
    assert_eq!(t.a()[(0, 0)], 1.0);
    assert_eq!(t.u()[(0, 0)], 1.0);
    let t = assemble_glm(2, 2, 2, AuxChoice::None).unwrap();
    let last = &t.rows()[1];
    assert_eq!(last.stencil, vec![0.0, 1.0, 2.0]);
    for (a, b) in last.alpha.iter().zip([0.5, -2.0, 1.5]) {
        assert!((a - b).abs() < 1e-14);
    }
}
