use blended_gbdf::construction::AuxChoice;
use blended_gbdf::linalg::DenseMatrix;
use blended_gbdf::problems::{
    builtin, finite_difference_jacobian, ingest, ingest_str, reference_solution, scd, ProblemFile,
    Provenance, RationalComponent, ReferenceCache, RhsSpec, Term, BUILTIN_NAMES,
};
use blended_gbdf::solver::{integrate, SolverMethod, SolverOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn robertson_as_rational() -> ProblemFile {
    let one = || vec![Term::new(1.0, &[])];
    let comp = |numerator: Vec<Term>| RationalComponent {
        numerator,
        denominator: one(),
    };
    ProblemFile {
        name: "robertson_rational".into(),
        dimension: 3,
        y0: vec![1.0, 0.0, 0.0],
        t_span: [0.0, 1e4],
        rtol: None,
        atol: None,
        h0: None,
        rhs: RhsSpec::Rational {
            components: vec![
                comp(vec![
                    Term::new(-0.04, &[(0, 1)]),
                    Term::new(1e4, &[(1, 1), (2, 1)]),
                ]),
                comp(vec![
                    Term::new(0.04, &[(0, 1)]),
                    Term::new(-1e4, &[(1, 1), (2, 1)]),
                    Term::new(-3e7, &[(1, 2)]),
                ]),
                comp(vec![Term::new(3e7, &[(1, 2)])]),
            ],
        },
    }
}

#[test]
fn rational_encoding_reproduces_robertson() {
    let builtin = builtin("robertson").unwrap();
    let file = robertson_as_rational().to_problem().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut a, mut b) = ([0.0; 3], [0.0; 3]);
    for _ in 0..100 {
        let y = [
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..4e-5),
            rng.gen_range(0.0..1.0),
        ];
        builtin.rhs(0.0, &y, &mut a);
        file.rhs(0.0, &y, &mut b);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1e-10 * a[i].abs().max(1e-10));
        }
    }
}

#[test]
fn jacobians_agree_with_differences_along_trajectories() {
    for name in BUILTIN_NAMES {
        let p = builtin(name).unwrap();
        let opts = SolverOptions {
            rtol: 1e-5,
            atol: 1e-8,
            ..Default::default()
        };
        let res = integrate(
            &p,
            &SolverMethod::new(4, AuxChoice::Rational).unwrap(),
            opts,
        )
        .unwrap();
        assert!(res.success, "{name}");
        let stride = (res.steps.len() / 20).max(1);
        let m = p.dim();
        for s in res.steps.iter().step_by(stride).take(20) {
            let mut f0 = vec![0.0; m];
            p.rhs(s.t, &s.y, &mut f0);
            let mut ja = DenseMatrix::zeros(m, m);
            assert!(p.jacobian(s.t, &s.y, &mut ja));
            let mut jf = DenseMatrix::zeros(m, m);
            finite_difference_jacobian(&p, s.t, &s.y, &f0, 1e-8, &mut jf);
            for i in 0..m {
                let row = (0..m).map(|j| ja[(i, j)].abs()).fold(f0[i].abs(), f64::max);
                for j in 0..m {
                    let d = (ja[(i, j)] - jf[(i, j)]).abs();
                    // the forward difference carries a truncation error of order f″·δ
                    assert!(
                        d <= 1e-4 * row + 1e-6,
                        "{name} t={} ({i},{j}): {d:e} vs {row:e}",
                        s.t
                    );
                }
            }
        }
    }
}

#[test]
fn ingested_oscillator_tracks_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("osc.json");
    std::fs::write(
        &path,
        r#"{"name": "oscillator", "dimension": 2, "y0": [0.0, 1.0],
            "t_span": [0.0, 6.283185307179586], "rtol": 1e-9, "atol": 1e-12,
            "rhs": {"type": "linear", "matrix": [[0, 1], [-1, 0]]}}"#,
    )
    .unwrap();
    let p = ingest(&path).unwrap();
    assert_eq!((p.rtol, p.atol), (1e-9, 1e-12));
    let res = integrate(
        &p,
        &SolverMethod::new(6, AuxChoice::Rational).unwrap(),
        SolverOptions {
            rtol: p.rtol,
            atol: p.atol,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(res.success);
    assert!(res.y_final[0].abs() < 1e-6 && (res.y_final[1] - 1.0).abs() < 1e-6);
}

#[test]
fn problem_files_round_trip() {
    let file = robertson_as_rational();
    let p = ingest_str(&file.to_json()).unwrap();
    assert_eq!(p.file(), Some(&file));
    let text = file
        .to_json()
        .replace("\"dimension\": 3", "\"dimension\": 0");
    assert!(ingest_str(&text).is_err());
    assert!(ingest("/nonexistent/problem.json").is_err());
}

#[test]
fn reference_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("refs.json");
    let p = builtin("robertson").unwrap();
    let mut cache = ReferenceCache::load(&path).unwrap();
    assert!(cache.entries.is_empty());
    let r = reference_solution(&p, 40.0, Some(&mut cache)).unwrap();
    assert!(matches!(r.provenance, Provenance::SelfReference { .. }));
    cache.save(&path).unwrap();
    let loaded = ReferenceCache::load(&path).unwrap();
    assert_eq!(loaded.get("robertson", 40.0), Some(r.clone()));
    assert!((r.y.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

proptest! {
    #[test]
    fn scd_counts_digits(y in prop::collection::vec(0.1f64..10.0, 1..6), e in 1u32..14) {
        let err = 10f64.powi(-(e as i32));
        let perturbed: Vec<f64> = y.iter().map(|v| v * (1.0 + err)).collect();
        let d = scd(&perturbed, &y, 1e-12);
        prop_assert!((d - e as f64).abs() < 0.01, "{d}");
        prop_assert!(scd(&y, &y, 1e-12) >= 15.0);
    }
}
