use fraclangevin::analysis::{check_uniqueness, compute_psi, LipschitzSpec};
use fraclangevin::kernels::OrderParams;
use fraclangevin::oracle::{
    closed_form_constant_forcing, dense_reference, dense_reference_on, manufactured_poly,
};
use fraclangevin::solver::{picard_solve, residual_sup, Grid, ProblemSpec, SolutionField};

fn odd_pow(u: f64, p: f64) -> f64 {
    u.signum() * u.abs().powf(p)
}

fn sine_problem(w: f64, gamma: f64) -> ProblemSpec {
    ProblemSpec::new(
        OrderParams::new(0.5, 2.5, gamma).unwrap(),
        move |t: f64, x: f64, dx: f64| w * (x.sin() + dx.sin()) + t,
    )
}

fn example_one() -> ProblemSpec {
    let e = std::f64::consts::E;
    ProblemSpec::new(
        OrderParams::new(0.5, 2.5, 0.2).unwrap(),
        move |t: f64, x: f64, dx: f64| {
            t.atan() + (t - 1.0 / 3.0).powi(2) * odd_pow(x, 0.5) + (t / e) * odd_pow(dx, 0.5)
        },
    )
}

#[test]
fn measured_contraction_stays_below_the_bound() {
    for (w, gamma) in [(0.06, 0.01), (0.1, 0.0), (0.02, 0.02)] {
        let p = sine_problem(w, gamma);
        let lip = LipschitzSpec::new(w).unwrap();
        let psi = compute_psi(&p.orders, &lip).psi;
        assert_eq!(check_uniqueness(&p.orders, &lip).uniqueness_ok, Some(true));
        let (_, report) = picard_solve(&p, &Grid::new(128).unwrap(), 1e-10, 200).unwrap();
        assert!(report.converged);
        for f in &report.contraction_factors {
            assert!(*f <= psi, "factor {f} above bound {psi}");
        }
    }
}

#[test]
fn a_posteriori_residual_bound() {
    let p = sine_problem(0.2, 0.05);
    let tol = 1e-8;
    let (_, report) = picard_solve(&p, &Grid::new(128).unwrap(), tol, 200).unwrap();
    let psi_hat = report
        .contraction_factors
        .iter()
        .skip(1)
        .cloned()
        .fold(0.0, f64::max);
    assert!(psi_hat < 1.0);
    assert!(report.residual <= tol * (1.0 + psi_hat) / (1.0 - psi_hat));
}

#[test]
fn derivative_samples_agree_with_differenced_values() {
    for n in [64, 256] {
        let grid = Grid::new(n).unwrap();
        let (z, _) = picard_solve(&example_one(), &grid, 1e-10, 200).unwrap();
        let h = grid.h();
        let allowed = (10.0 * h).max(1e-3);
        for i in 1..n {
            let fd = (z.x[i + 1] - z.x[i - 1]) / (2.0 * h);
            assert!((fd - z.dx[i]).abs() <= allowed, "n={n} i={i}");
        }
    }
}

#[test]
fn solutions_depend_linearly_on_small_coupling_changes() {
    let grid = Grid::new(128).unwrap();
    let solve = |gamma: f64| {
        picard_solve(&sine_problem(0.2, gamma), &grid, 1e-12, 200)
            .unwrap()
            .0
    };
    let base = solve(0.05);
    let d1 = solve(0.05 + 1e-3).c1_distance(&base);
    let d2 = solve(0.05 + 5e-4).c1_distance(&base);
    assert!(d1 < 1e-2);
    let ratio = d1 / d2;
    assert!((1.9..2.1).contains(&ratio), "ratio {ratio}");
}

#[test]
fn returned_fields_satisfy_boundary_conditions() {
    let grid = Grid::new(64).unwrap();
    let (z, _) = picard_solve(&example_one(), &grid, 1e-8, 200).unwrap();
    let n = grid.n_panels();
    assert_eq!([z.x[0], z.x[n], z.dx[0], z.dx[n]], [0.0; 4]);
}

#[test]
fn manufactured_error_converges_at_second_order() {
    let case = manufactured_poly(OrderParams::new(0.5, 2.25, 0.2).unwrap()).unwrap();
    let p = case.problem();
    let errors: Vec<f64> = [32, 64, 128, 256]
        .iter()
        .map(|&n| {
            let grid = Grid::new(n).unwrap();
            let (z, _) = picard_solve(&p, &grid, 1e-12, 200).unwrap();
            z.c1_distance(&case.exact_field(&grid))
        })
        .collect();
    for pair in errors.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        assert!(order >= 1.5, "errors {errors:?}");
    }
}

#[test]
fn constant_forcing_fixed_point_has_tiny_residual() {
    let orders = OrderParams::new(0.7, 2.3, 0.0).unwrap();
    let cf = closed_form_constant_forcing(orders).unwrap();
    let d = cf.derivative();
    let grid = Grid::new(64).unwrap();
    let exact = SolutionField::from_fn(&grid, |t| cf.eval(t), |t| d.eval(t));
    let p = ProblemSpec::new(orders, |_t, _x, _dx| 1.0);
    assert!(residual_sup(&p, &grid, &exact).unwrap() < 1e-13);
}

#[test]
fn fine_reference_matches_closed_form() {
    let orders = OrderParams::new(0.5, 2.5, 0.0).unwrap();
    let cf = closed_form_constant_forcing(orders).unwrap();
    let d = cf.derivative();
    let p = ProblemSpec::new(orders, |_t, _x, _dx| 1.0);
    let z = dense_reference(&p, 1024).unwrap();
    let exact = SolutionField::from_fn(&Grid::new(1024).unwrap(), |t| cf.eval(t), |t| d.eval(t));
    assert!(z.c1_distance(&exact) <= 1e-4);
}

#[test]
fn coarse_and_fine_example_solutions_agree() {
    let p = example_one();
    let coarse = Grid::new(128).unwrap();
    let (z, _) = picard_solve(&p, &coarse, 1e-10, 200).unwrap();
    let reference = dense_reference_on(&p, &coarse, 1024).unwrap();
    assert!(z.c1_distance(&reference) <= 1e-2);
}
