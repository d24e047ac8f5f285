use super::{OdeProblem, ProblemError, ProblemFile, RhsSpec, Term};

pub const BUILTIN_NAMES: [&str; 5] = [
    "linear_test",
    "prothero_robinson",
    "vanderpol",
    "robertson",
    "pollution",
];

pub fn builtin(name: &str) -> Result<OdeProblem, ProblemError> {
    match name {
        "linear_test" => Ok(linear_test(-1.0)),
        "prothero_robinson" => Ok(prothero_robinson(-1e6)),
        "vanderpol" => Ok(vanderpol(1e-6)),
        "robertson" => robertson(),
        "pollution" => pollution(),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}

/// `y' = λy`, `y(0) = 1` on `[0, 10]`.
pub fn linear_test(lambda: f64) -> OdeProblem {
    OdeProblem::new("linear_test", vec![1.0], (0.0, 10.0), move |_, y, dy| {
        dy[0] = lambda * y[0];
    })
    .with_jacobian(move |_, _, j| j[(0, 0)] = lambda)
    .with_exact(move |t| vec![(lambda * t).exp()])
    .with_tolerances(1e-6, 1e-12)
}

/// `y' = λ(y − sin t) + cos t`, `y(0) = 0`, solution `sin t`, on `[0, 10]`.
pub fn prothero_robinson(lambda: f64) -> OdeProblem {
    OdeProblem::new(
        "prothero_robinson",
        vec![0.0],
        (0.0, 10.0),
        move |t, y, dy| {
            dy[0] = lambda * (y[0] - t.sin()) + t.cos();
        },
    )
    .with_jacobian(move |_, _, j| j[(0, 0)] = lambda)
    .with_exact(|t| vec![t.sin()])
    .with_tolerances(1e-6, 1e-6)
}

/// Van der Pol in the singular-perturbation scaling
/// `y₁' = y₂`, `ε y₂' = (1 − y₁²)y₂ − y₁` on `[0, 2]`.
pub fn vanderpol(eps: f64) -> OdeProblem {
    OdeProblem::new(
        "vanderpol",
        vec![2.0, -0.66],
        (0.0, 2.0),
        move |_, y, dy| {
            dy[0] = y[1];
            dy[1] = ((1.0 - y[0] * y[0]) * y[1] - y[0]) / eps;
        },
    )
    .with_jacobian(move |_, y, j| {
        j[(0, 0)] = 0.0;
        j[(0, 1)] = 1.0;
        j[(1, 0)] = (-2.0 * y[0] * y[1] - 1.0) / eps;
        j[(1, 1)] = (1.0 - y[0] * y[0]) / eps;
    })
    .with_tolerances(1e-6, 1e-6)
}

/// Mass-action kinetics: each reaction is `(rate constant, reactants,
/// net changes)` with 0-based species indices.
type Reaction<'a> = (f64, &'a [usize], &'a [(usize, f64)]);

fn mass_action(m: usize, reactions: &[Reaction]) -> RhsSpec {
    let mut components: Vec<Vec<Term>> = vec![Vec::new(); m];
    for &(k, reactants, changes) in reactions {
        let mut powers: Vec<(usize, u32)> = Vec::new();
        for &s in reactants {
            match powers.iter_mut().find(|(i, _)| *i == s) {
                Some(p) => p.1 += 1,
                None => powers.push((s, 1)),
            }
        }
        for &(species, nu) in changes {
            components[species].push(Term::new(nu * k, &powers));
        }
    }
    RhsSpec::Polynomial { components }
}

fn robertson_file() -> ProblemFile {
    let reactions: [Reaction; 3] = [
        (0.04, &[0], &[(0, -1.0), (1, 1.0)]),
        (1e4, &[1, 2], &[(0, 1.0), (1, -1.0)]),
        (3e7, &[1, 1], &[(1, -1.0), (2, 1.0)]),
    ];
    ProblemFile {
        name: "robertson".into(),
        dimension: 3,
        y0: vec![1.0, 0.0, 0.0],
        t_span: [0.0, 1e4],
        rtol: Some(1e-6),
        atol: Some(1e-10),
        h0: None,
        rhs: mass_action(3, &reactions),
    }
}

/// Robertson's three-species reaction on `[0, 1e4]`.
pub fn robertson() -> Result<OdeProblem, ProblemError> {
    robertson_file().to_problem()
}

fn pollution_file() -> ProblemFile {
    // species 1..20 as 0..19, reactions r1..r25
    let reactions: [Reaction; 25] = [
        (0.35, &[0], &[(0, -1.0), (1, 1.0), (2, 1.0)]),
        (26.6, &[1, 3], &[(0, 1.0), (1, -1.0), (3, -1.0)]),
        (1.23e4, &[4, 1], &[(0, 1.0), (1, -1.0), (4, -1.0), (5, 1.0)]),
        (8.6e-4, &[6], &[(4, 2.0), (6, -1.0), (7, 1.0)]),
        (8.2e-4, &[6], &[(6, -1.0), (7, 1.0)]),
        (1.5e4, &[6, 5], &[(4, 1.0), (5, -1.0), (6, -1.0), (7, 1.0)]),
        (1.3e-4, &[8], &[(4, 1.0), (7, 1.0), (8, -1.0), (9, 1.0)]),
        (2.4e4, &[8, 5], &[(5, -1.0), (8, -1.0), (10, 1.0)]),
        (
            1.65e4,
            &[10, 1],
            &[(0, 1.0), (1, -1.0), (9, 1.0), (10, -1.0), (11, 1.0)],
        ),
        (9e3, &[10, 0], &[(0, -1.0), (10, -1.0), (12, 1.0)]),
        (0.022, &[12], &[(0, 1.0), (10, 1.0), (12, -1.0)]),
        (1.2e4, &[9, 1], &[(0, 1.0), (1, -1.0), (9, -1.0), (13, 1.0)]),
        (1.88, &[13], &[(4, 1.0), (6, 1.0), (13, -1.0)]),
        (1.63e4, &[0, 5], &[(0, -1.0), (5, -1.0), (14, 1.0)]),
        (4.8e6, &[2], &[(2, -1.0), (3, 1.0)]),
        (3.5e-4, &[3], &[(3, -1.0), (15, 1.0)]),
        (0.0175, &[3], &[(2, 1.0), (3, -1.0)]),
        (1e8, &[15], &[(5, 2.0), (15, -1.0)]),
        (4.44e11, &[15], &[(2, 1.0), (15, -1.0)]),
        (
            1.24e3,
            &[16, 5],
            &[(4, 1.0), (5, -1.0), (16, -1.0), (17, 1.0)],
        ),
        (2.1, &[18], &[(1, 1.0), (18, -1.0)]),
        (5.78, &[18], &[(0, 1.0), (2, 1.0), (18, -1.0)]),
        (0.0474, &[0, 3], &[(0, -1.0), (3, -1.0), (18, 1.0)]),
        (1.78e3, &[18, 0], &[(0, -1.0), (18, -1.0), (19, 1.0)]),
        (3.12, &[19], &[(0, 1.0), (18, 1.0), (19, -1.0)]),
    ];
    let mut y0 = vec![0.0; 20];
    y0[1] = 0.2;
    y0[3] = 0.04;
    y0[6] = 0.1;
    y0[7] = 0.3;
    y0[8] = 0.01;
    y0[16] = 0.007;
    ProblemFile {
        name: "pollution".into(),
        dimension: 20,
        y0,
        t_span: [0.0, 60.0],
        rtol: Some(1e-6),
        atol: Some(1e-10),
        h0: None,
        rhs: mass_action(20, &reactions),
    }
}

/// Air-pollution reaction scheme with 20 species and 25 reactions on
/// `[0, 60]`.
pub fn pollution() -> Result<OdeProblem, ProblemError> {
    pollution_file().to_problem()
}
