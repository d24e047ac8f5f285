use blended_gbdf::blended::scalar_blended_iterate_from;
use blended_gbdf::construction::AuxChoice;
use blended_gbdf::linalg::{lu_factor, Complex64, DenseMatrix};
use blended_gbdf::problems::{
    builtin, linear_test, prothero_robinson, reference_solution, scd, OdeProblem,
};
use blended_gbdf::solver::{
    blended_nonlinear_solve, estimate_error, integrate, step_ratio, Engine, History,
    IterationControl, IterationMatrix, SolverError, SolverMethod, SolverOptions, Weights,
};

fn method(k: usize) -> SolverMethod {
    SolverMethod::new(k, AuxChoice::Rational).unwrap()
}

fn diagonal_problem(lambdas: Vec<f64>) -> OdeProblem {
    let m = lambdas.len();
    let l2 = lambdas.clone();
    OdeProblem::new("diag", vec![1.0; m], (0.0, 1.0), move |_, y, dy| {
        for i in 0..y.len() {
            dy[i] = lambdas[i] * y[i];
        }
    })
    .with_jacobian(move |_, _, j| {
        for (i, l) in l2.iter().enumerate() {
            j[(i, i)] = *l;
        }
    })
}

fn jacobian(p: &OdeProblem, t: f64, y: &[f64]) -> DenseMatrix {
    let mut j = DenseMatrix::zeros(p.dim(), p.dim());
    assert!(p.jacobian(t, y, &mut j));
    j
}

fn block_from(rows: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_rows(rows).unwrap()
}

#[test]
fn zero_rhs_reaches_eta_after_one_sweep() {
    let sm = method(4);
    let p = OdeProblem::new("zero", vec![1.0, 2.0], (0.0, 1.0), |_, _, dy| {
        dy.iter_mut().for_each(|v| *v = 0.0)
    });
    let r = sm.r();
    let eta = block_from(
        &(0..r)
            .map(|i| vec![1.0 + i as f64, -0.5])
            .collect::<Vec<_>>(),
    );
    let pred = DenseMatrix::zeros(r, 2);
    let n = IterationMatrix::new(&DenseMatrix::zeros(2, 2), 0.1, sm.main.gamma, 0).unwrap();
    let w = Weights::new(1e-6, 1e-6, &[1.0, 1.0]);
    let ctl = IterationControl {
        trace: true,
        ..Default::default()
    };
    let out = blended_nonlinear_solve(&p, &sm.main, 0.0, 0.1, &eta, pred, &n, &w, &ctl).unwrap();
    assert!(out.trace[0].sub(&eta).unwrap().max_abs() < 1e-14);
    assert!(out.block.sub(&eta).unwrap().max_abs() < 1e-14);
}

/// The discrete solution of a linear problem `y' = λy + g(t)` by direct
/// solve of `(I − hλA)Y = η + hA·G`.
fn direct_block(
    sm: &SolverMethod,
    lambda: f64,
    g: impl Fn(f64) -> f64,
    t: f64,
    h: f64,
    eta: &[f64],
) -> Vec<f64> {
    let a = &sm.main.a;
    let r = sm.r();
    let m = a.scale(-h * lambda).shift_diagonal(1.0);
    let gv: Vec<f64> = sm.main.c.iter().map(|c| g(t + c * h)).collect();
    let ag = a.mul_vec(&gv).unwrap();
    let rhs: Vec<f64> = (0..r).map(|i| eta[i] + h * ag[i]).collect();
    lu_factor(&m).unwrap().solve(&rhs).unwrap()
}

#[test]
fn exact_predictor_needs_no_correction() {
    let sm = method(6);
    let lambda = -1e6;
    let p = prothero_robinson(lambda);
    let (t, h) = (0.7, 0.05);
    let past: Vec<Vec<f64>> = sm
        .tableau
        .past_times()
        .iter()
        .map(|s| vec![(t + s * h).sin()])
        .collect();
    let eta = sm.tableau.u().matmul(&block_from(&past)).unwrap();
    let eta_v: Vec<f64> = (0..sm.r()).map(|i| eta[(i, 0)]).collect();
    let fixed = direct_block(&sm, lambda, |s| s.cos() - lambda * s.sin(), t, h, &eta_v);
    let pred = block_from(&fixed.iter().map(|v| vec![*v]).collect::<Vec<_>>());
    let n = IterationMatrix::new(&jacobian(&p, t, &[0.0]), h, sm.main.gamma, 0).unwrap();
    let w = Weights::new(1e-6, 1e-6, &[1.0]);
    let ctl = IterationControl {
        trace: true,
        ..Default::default()
    };
    let out =
        blended_nonlinear_solve(&p, &sm.main, t, h, &eta, pred.clone(), &n, &w, &ctl).unwrap();
    assert_eq!(out.sweeps, 1);
    assert!(out.block.sub(&pred).unwrap().max_abs() < 1e-12);
}

#[test]
fn diagonal_system_follows_the_scalar_iteration() {
    let sm = method(8);
    let lambdas = vec![-3.0, -250.0, -1e5];
    let p = diagonal_problem(lambdas.clone());
    let (t, h) = (0.0, 0.02);
    let r = sm.r();
    let eta = block_from(
        &(0..r)
            .map(|i| vec![1.0, 0.5 - 0.1 * i as f64, 2.0])
            .collect::<Vec<_>>(),
    );
    let pred = block_from(&(0..r).map(|_| vec![0.3, -0.2, 1.0]).collect::<Vec<_>>());
    let n = IterationMatrix::new(&jacobian(&p, t, &[1.0; 3]), h, sm.main.gamma, 0).unwrap();
    let w = Weights::new(1e-14, 1e-14, &[1.0; 3]);
    let ctl = IterationControl {
        max_sweeps: 60,
        trace: true,
        ..Default::default()
    };
    let out = blended_nonlinear_solve(&p, &sm.main, t, h, &eta, pred.clone(), &n, &w, &ctl);
    let trace = match out {
        Ok(o) => o.trace,
        Err(e) => panic!("{e}"),
    };
    for (j, lambda) in lambdas.iter().enumerate() {
        let q = Complex64::new(h * lambda, 0.0);
        let col = |m: &DenseMatrix| {
            (0..r)
                .map(|i| Complex64::new(m[(i, j)], 0.0))
                .collect::<Vec<_>>()
        };
        let hist = scalar_blended_iterate_from(
            &sm.main.a,
            sm.main.gamma,
            q,
            &col(&eta),
            &col(&pred),
            trace.len(),
        )
        .unwrap();
        for (s, y) in trace.iter().enumerate() {
            for i in 0..r {
                let d = (y[(i, j)] - hist.iterates[s + 1][i].re).abs();
                assert!(
                    d <= 1e-12 * y.max_abs().max(1.0),
                    "λ={lambda} sweep {s}: {d:e}"
                );
            }
        }
    }
}

fn started(p: &OdeProblem, sm: &SolverMethod, h: f64) -> Vec<(f64, Vec<f64>)> {
    let opts = SolverOptions {
        fixed_h: Some(h),
        rtol: 1e-13,
        atol: 1e-13,
        iteration: IterationControl {
            max_sweeps: 60,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut e = Engine::new(p, sm, opts).unwrap();
    e.start().unwrap();
    (0..=sm.k())
        .map(|i| {
            let t = p.t0 + i as f64 * h;
            (t, e.history().interpolate(t))
        })
        .collect()
}

#[test]
fn start_keeps_constants_and_integrates_low_degree_forcing() {
    let sm = method(6);
    let p = OdeProblem::new("const", vec![3.0, -1.0], (0.0, 1.0), |_, _, dy| {
        dy.iter_mut().for_each(|v| *v = 0.0)
    });
    for (_, y) in started(&p, &sm, 0.05) {
        assert_eq!(y, vec![3.0, -1.0]);
    }
    // y' = 5t⁴ − 2t, exact for the order-6 start
    let p = OdeProblem::new("quad", vec![1.0], (0.0, 1.0), |t, _, dy| {
        dy[0] = 5.0 * t.powi(4) - 2.0 * t
    });
    for (t, y) in started(&p, &sm, 0.1) {
        assert!((y[0] - (1.0 + t.powi(5) - t * t)).abs() < 1e-14, "t={t}");
    }
}

#[test]
fn start_error_is_of_order_k_plus_one() {
    for k in [4, 6] {
        let sm = method(k);
        let p = linear_test(-1.0);
        let err = |h: f64| {
            started(&p, &sm, h)
                .iter()
                .map(|(t, y)| (y[0] - (-t).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.1) / err(0.05);
        let slope = ratio.log2();
        assert!(
            slope > k as f64 + 0.5 && slope < k as f64 + 1.5,
            "k={k}: {slope}"
        );
    }
}

#[test]
fn extrapolation_error_is_fifth_order() {
    let err = |h: f64| {
        let mut hist = History::new(4);
        for i in 0..5 {
            let t = i as f64 * h;
            hist.push(t, vec![t.exp()]);
        }
        let t = 6.0 * h;
        (hist.extrapolate(t)[0] - t.exp()).abs()
    };
    let ratio = err(0.05) / err(0.025);
    assert!((ratio / 32.0 - 1.0).abs() < 0.1, "{ratio}");
}

/// Deferred-correction estimate for exact data of `y = P(t)` at `t`.
fn polynomial_estimate(sm: &SolverMethod, deg: u32, t: f64, h: f64) -> f64 {
    let poly = move |s: f64| (1.0 + s).powi(deg as i32);
    let dpoly = move |s: f64| deg as f64 * (1.0 + s).powi(deg as i32 - 1);
    let p = OdeProblem::new("poly", vec![1.0], (0.0, 10.0), move |s, _, dy| {
        dy[0] = dpoly(s)
    });
    let past: Vec<Vec<f64>> = sm
        .tableau
        .past_times()
        .iter()
        .map(|s| vec![poly(t + s * h)])
        .collect();
    let block: Vec<Vec<f64>> = sm.main.c.iter().map(|c| vec![poly(t + c * h)]).collect();
    let n = IterationMatrix::new(&DenseMatrix::zeros(1, 1), h, sm.main.gamma, 0).unwrap();
    let w = Weights::new(1e-6, 1e-6, &[1.0]);
    let est = estimate_error(
        &p,
        &sm.main,
        &sm.estimator,
        t,
        h,
        &block_from(&past),
        &block_from(&block),
        &n,
        &w,
    )
    .unwrap();
    est.e.max_abs() / poly(t + sm.ell() as f64 * h)
}

#[test]
fn estimate_vanishes_on_companion_polynomials() {
    for k in [4, 6, 8] {
        let sm = method(k);
        let e = polynomial_estimate(&sm, k as u32 + 1, 0.3, 0.1);
        assert!(e < 1e-12, "k={k}: {e:e}");
        assert!(polynomial_estimate(&sm, k as u32 + 2, 0.3, 0.1) > 1e-10);
    }
}

#[test]
fn step_ratio_formula() {
    assert!((step_ratio(8.0, 4) - 0.9 * 8f64.powf(-0.2)).abs() < 1e-15);
    assert!((step_ratio(8.0, 4) - 0.594).abs() < 5e-4);
    assert_eq!(step_ratio(1e-30, 4), 5.0);
    assert_eq!(step_ratio(1e30, 4), 0.2);
    assert_eq!(step_ratio(0.0, 6), 5.0);
}

#[test]
fn tolerance_controls_the_global_error() {
    let p = linear_test(-1.0).with_span(0.0, 1.0);
    for k in [4, 6, 8] {
        let opts = SolverOptions {
            rtol: 1e-6,
            atol: 1e-6,
            ..Default::default()
        };
        let res = integrate(&p, &method(k), opts).unwrap();
        assert!(res.success);
        assert_eq!(res.t_final, 1.0);
        assert!((res.y_final[0] - (-1f64).exp()).abs() <= 1e-4, "k={k}");
    }
    let opts = SolverOptions {
        rtol: 1e-8,
        atol: 1e-8,
        ..Default::default()
    };
    let res = integrate(&linear_test(-1.0), &method(4), opts).unwrap();
    assert!((res.y_final[0] - (-10f64).exp()).abs() < 1e-6);
}

#[test]
fn fixed_steps_are_deterministic() {
    let p = builtin("vanderpol").unwrap().with_span(0.0, 0.5);
    let sm = method(6);
    let opts = || SolverOptions {
        fixed_h: Some(0.01),
        ..Default::default()
    };
    let a = integrate(&p, &sm, opts()).unwrap();
    let b = integrate(&p, &sm, opts()).unwrap();
    assert!(a.success);
    assert_eq!(a, b);
    assert_eq!(a.stats.rejected, 0);
}

fn fixed_step_error(p: &OdeProblem, sm: &SolverMethod, h: f64) -> f64 {
    let opts = SolverOptions {
        fixed_h: Some(h),
        rtol: 1e-13,
        atol: 1e-13,
        iteration: IterationControl {
            max_sweeps: 60,
            ..Default::default()
        },
        ..Default::default()
    };
    let r = integrate(p, sm, opts).unwrap();
    assert!(r.success, "{:?}", r.failure);
    (r.y_final[0] - r.t_final.sin()).abs()
}

#[test]
fn fixed_step_error_decays_with_the_order() {
    let p = prothero_robinson(-1.0).with_span(0.0, 2.0);
    for k in [4, 6] {
        let sm = method(k);
        let e: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| fixed_step_error(&p, &sm, h))
            .collect();
        for w in e.windows(2) {
            assert!((w[0] / w[1]).log2() >= k as f64 - 1.0, "k={k}: {e:?}");
        }
    }
}

#[test]
fn stiff_limit_is_accurate_at_every_step() {
    let p = prothero_robinson(-1e6).with_span(0.0, 2.0);
    for k in [4, 6, 8] {
        for h in [0.2, 0.1, 0.05] {
            assert!(fixed_step_error(&p, &method(k), h) <= 1e-10, "k={k} h={h}");
        }
    }
}

#[test]
fn robertson_conserves_mass_and_matches_the_reference() {
    let p = builtin("robertson").unwrap();
    let reference = reference_solution(&p, p.t_end, None).unwrap();
    for k in [4, 6] {
        let opts = SolverOptions {
            rtol: 1e-6,
            atol: 1e-10,
            ..Default::default()
        };
        let res = integrate(&p, &method(k), opts).unwrap();
        assert!(res.success);
        for s in &res.steps {
            assert!((s.y.iter().sum::<f64>() - 1.0).abs() <= 1e-5, "t={}", s.t);
        }
        assert!(scd(&res.y_final, &reference.y, 1e-10) >= 4.0);
        assert!((res.stats.rejected as f64) < 0.05 * res.stats.steps as f64);
    }
}

#[test]
fn dense_output_interpolates_the_solution() {
    let p = linear_test(-1.0);
    let opts = SolverOptions {
        rtol: 1e-9,
        atol: 1e-12,
        output_times: vec![7.5, 0.0, 0.3, 10.0, 2.2],
        ..Default::default()
    };
    let res = integrate(&p, &method(6), opts).unwrap();
    let ts: Vec<f64> = res.dense.iter().map(|s| s.t).collect();
    assert_eq!(ts, vec![0.0, 0.3, 2.2, 7.5, 10.0]);
    for s in &res.dense {
        assert!((s.y[0] - (-s.t).exp()).abs() < 1e-7, "t={}", s.t);
    }
}

#[test]
fn configuration_errors() {
    assert!(matches!(
        SolverMethod::new(3, AuxChoice::Rational),
        Err(SolverError::NotEligible { .. })
    ));
    let p = linear_test(-1.0);
    let sm = method(4);
    for opts in [
        SolverOptions {
            rtol: 0.0,
            ..Default::default()
        },
        SolverOptions {
            fixed_h: Some(-1.0),
            ..Default::default()
        },
        SolverOptions {
            output_times: vec![11.0],
            ..Default::default()
        },
    ] {
        let e = integrate(&p, &sm, opts).unwrap_err();
        assert!(e.is_configuration(), "{e}");
    }
}

#[test]
fn step_limit_is_reported_with_partial_results() {
    let p = builtin("vanderpol").unwrap();
    let opts = SolverOptions {
        max_steps: 3,
        ..Default::default()
    };
    let res = integrate(&p, &method(4), opts).unwrap();
    assert!(!res.success);
    assert!(res.failure.unwrap().contains("step limit"));
    assert!(res.t_final > p.t0 && res.t_final < p.t_end);
}
