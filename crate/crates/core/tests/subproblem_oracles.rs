//! Every solver step solves a stated subproblem; these tests pit the
//! closed-form steps against independent grid + golden-section oracles on
//! 1-D and 2-D instances.

mod common;

use common::{grid_minimize, grid_minimize_1d};
use ndarray::{array, Array1};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use splitgap::convex::{BregmanDistance, FnKind, ProjSet};
use splitgap::gap::smoothed_conjugate;
use splitgap::linop::norm2;
use splitgap::problems::{build_composite, build_cone_projection, ConeProjectionOptions, ProblemSpec};
use splitgap::sadmm::{SadmmConfig, SadmmSolver};
use splitgap::sama::{SamaConfig, SamaSolver, SamaVariant, ScRule};
use splitgap::{LinearMap, ProperConvexFn};

const ORACLE_TOL: f64 = 1e-6;

/// g = delta_[-1,1] + q_g u, h = delta_[-1,1] + q_h v, A = B = [1], c = [c0].
fn one_d_box(q_g: f64, q_h: f64, c0: f64) -> ProblemSpec {
    let lin_box = |q: f64| {
        ProperConvexFn::sum(
            1,
            vec![
                FnKind::Linear { q: array![q] },
                FnKind::IndicatorBox {
                    lo: array![-1.0],
                    hi: array![1.0],
                },
            ],
        )
        .unwrap()
    };
    ProblemSpec::new(
        lin_box(q_g),
        lin_box(q_h),
        LinearMap::identity(1),
        LinearMap::identity(1),
        array![c0],
        array![0.0],
    )
    .unwrap()
}

#[test]
fn sama_init_matches_grid_oracles_on_the_1d_box_instance() {
    let spec = one_d_box(0.7, -0.3, 0.4);
    let solver = SamaSolver::new(&spec, SamaConfig::default()).unwrap();
    let state = solver.init().unwrap();
    let gamma1 = solver.gamma1();
    let eta0 = gamma1 / 2.0; // ||A|| = 1

    // First subproblem: min g(u) - <A^T l0, u> + gamma1 b(u, center), l0 = 0.
    let u_oracle = grid_minimize_1d(
        |u| {
            let uv = array![u];
            spec.g.eval(&uv).unwrap() + gamma1 * 0.5 * u * u
        },
        -1.0,
        1.0,
    );
    assert!(
        (state.u_bar[0] - u_oracle).abs() <= ORACLE_TOL,
        "u1 {} vs oracle {u_oracle}",
        state.u_bar[0]
    );

    // Second subproblem: min h(v) - <l0, Bv> + eta0/2 ||A u1 + v - c||^2.
    let u1 = state.u_bar[0];
    let v_oracle = grid_minimize_1d(
        |v| {
            let vv = array![v];
            spec.h.eval(&vv).unwrap() + eta0 / 2.0 * (u1 + v - 0.4).powi(2)
        },
        -1.0,
        1.0,
    );
    assert!(
        (state.v_bar[0] - v_oracle).abs() <= ORACLE_TOL,
        "v1 {} vs oracle {v_oracle}",
        state.v_bar[0]
    );
}

#[test]
fn sama_step_matches_grid_oracles_on_the_1d_box_instance() {
    let spec = one_d_box(0.7, -0.3, 0.4);
    let solver = SamaSolver::new(&spec, SamaConfig::default()).unwrap();
    let mut state = solver.init().unwrap();
    // Reproduce the step's inputs, then compare its outputs to the oracles.
    let params = splitgap::sama::schedule(1, solver.gamma1(), solver.norm_a());
    let lambda_hat = (1.0 - params.tau) * state.lambda_bar[0] + params.tau * state.lambda_star[0];
    let (u_bar1, v_bar1) = (state.u_bar[0], state.v_bar[0]);

    let u_oracle = grid_minimize_1d(
        |u| {
            let uv = array![u];
            spec.g.eval(&uv).unwrap() - lambda_hat * u + params.gamma_next * 0.5 * u * u
        },
        -1.0,
        1.0,
    );
    solver.step(&mut state).unwrap();
    // Recover the inner iterates from the averaging identity
    // bar_2 = (1 - tau) bar_1 + tau hat_2.
    let u_hat2 = (state.u_bar[0] - (1.0 - params.tau) * u_bar1) / params.tau;
    assert!(
        (u_hat2 - u_oracle).abs() <= ORACLE_TOL,
        "u_hat2 {u_hat2} vs oracle {u_oracle}"
    );

    let v_oracle = grid_minimize_1d(
        |v| {
            let vv = array![v];
            spec.h.eval(&vv).unwrap() - lambda_hat * v
                + params.eta / 2.0 * (u_oracle + v - 0.4).powi(2)
        },
        -1.0,
        1.0,
    );
    let v_hat2 = (state.v_bar[0] - (1.0 - params.tau) * v_bar1) / params.tau;
    assert!(
        (v_hat2 - v_oracle).abs() <= ORACLE_TOL,
        "v_hat2 {v_hat2} vs oracle {v_oracle}"
    );
}

#[test]
fn sadmm_step_matches_grid_oracles_on_the_1d_box_instance() {
    let spec = one_d_box(-0.5, 0.2, -0.3);
    let solver = SadmmSolver::new(&spec, SadmmConfig::default()).unwrap();
    let mut state = solver.init().unwrap();
    let params = splitgap::sadmm::schedule(1, solver.gamma1(), solver.norm_a(), false);
    let lambda_hat = (1.0 - params.tau) * state.lambda_bar[0] + params.tau * state.lambda_star[0];
    let v_hat1 = state.v_hat[0];
    let (u_bar1, v_bar1) = (state.u_bar[0], state.v_bar[0]);

    // rho-augmented u-subproblem of the scheme.
    let u_oracle = grid_minimize_1d(
        |u| {
            let uv = array![u];
            spec.g.eval(&uv).unwrap() - lambda_hat * u
                + params.rho / 2.0 * (u + v_hat1 + 0.3).powi(2)
                + params.gamma_next * 0.5 * u * u
        },
        -1.0,
        1.0,
    );
    solver.step(&mut state).unwrap();
    let u_hat2 = (state.u_bar[0] - (1.0 - params.tau) * u_bar1) / params.tau;
    assert!(
        (u_hat2 - u_oracle).abs() <= ORACLE_TOL,
        "u_hat2 {u_hat2} vs oracle {u_oracle}"
    );

    let v_oracle = grid_minimize_1d(
        |v| {
            let vv = array![v];
            spec.h.eval(&vv).unwrap() - lambda_hat * v
                + params.eta / 2.0 * (u_oracle + v + 0.3).powi(2)
        },
        -1.0,
        1.0,
    );
    let v_hat2 = (state.v_bar[0] - (1.0 - params.tau) * v_bar1) / params.tau;
    assert!(
        (v_hat2 - v_oracle).abs() <= ORACLE_TOL,
        "v_hat2 {v_hat2} vs oracle {v_oracle}"
    );
    assert_eq!(state.v_hat[0], v_hat2);
}

#[test]
fn sc_init_matches_grid_oracle_to_1e8() {
    // Strongly convex instance with a nonzero dual start so the tilt term
    // participates: u1 = argmin { g(u) - <A^T l0, u> }.
    let spec = build_cone_projection(&ConeProjectionOptions::default_2d(2.0)).unwrap();
    let l0 = array![0.3, -0.4];
    let solver = SamaSolver::new(
        &spec,
        SamaConfig {
            variant: SamaVariant::StronglyConvex(ScRule::Rule1),
            lambda0: Some(l0.clone()),
            ..SamaConfig::default()
        },
    )
    .unwrap();
    let state = solver.init().unwrap();
    let oracle = grid_minimize(
        |u| spec.g.eval(u).unwrap() - l0.dot(u),
        -2.0,
        2.0,
        2,
        200,
    );
    assert!(
        norm2(&(&state.u_bar - &oracle)) <= 1e-8,
        "sc init {:?} vs oracle {:?}",
        state.u_bar,
        oracle
    );
}

#[test]
fn composite_sama_step_matches_per_subproblem_oracles() {
    // 2-D l1/l1 composite instance: g = ||.||_1, h = ||.||_1 (support
    // functions of the unit box), constraint F u - v = y.
    let dim = 2;
    let l1 = || {
        ProperConvexFn::support_of(ProjSet::Box {
            lo: Array1::from_elem(dim, -1.0),
            hi: Array1::from_elem(dim, 1.0),
        })
    };
    let f_map = LinearMap::dense(array![[1.0, 0.4], [-0.3, 0.9]]);
    let y = array![0.3, -0.2];
    let spec = build_composite(l1(), l1(), f_map, y.clone(), Array1::zeros(dim)).unwrap();
    let solver = SamaSolver::new(
        &spec,
        SamaConfig {
            lambda0: Some(array![0.5, 0.7]),
            ..SamaConfig::default()
        },
    )
    .unwrap();
    let mut state = solver.init().unwrap();
    let params = splitgap::sama::schedule(1, solver.gamma1(), solver.norm_a());
    let lambda_hat =
        &(&state.lambda_bar * (1.0 - params.tau)) + &(&state.lambda_star * params.tau);
    let (u_bar1, v_bar1) = (state.u_bar.clone(), state.v_bar.clone());

    let ft_lambda = spec.a.apply_adjoint(&lambda_hat).unwrap();
    let u_oracle = grid_minimize(
        |u| {
            spec.g.eval(u).unwrap() - ft_lambda.dot(u)
                + params.gamma_next * 0.5 * u.dot(u)
        },
        -4.0,
        4.0,
        dim,
        300,
    );
    solver.step(&mut state).unwrap();
    let u_hat2 = (&state.u_bar - &(&u_bar1 * (1.0 - params.tau))) / params.tau;
    assert!(
        norm2(&(&u_hat2 - &u_oracle)) <= ORACLE_TOL,
        "u_hat2 {u_hat2:?} vs oracle {u_oracle:?}"
    );

    // v-subproblem: min h(v) - <B^T lh, v> + eta/2 ||F u_hat - v - y||^2.
    let f_u = spec.a.apply(&u_hat2).unwrap();
    let v_oracle = grid_minimize(
        |v| {
            let r = &f_u - v - &y;
            spec.h.eval(v).unwrap() + lambda_hat.dot(v) + params.eta / 2.0 * r.dot(&r)
        },
        -4.0,
        4.0,
        dim,
        300,
    );
    let v_hat2 = (&state.v_bar - &(&v_bar1 * (1.0 - params.tau))) / params.tau;
    assert!(
        norm2(&(&v_hat2 - &v_oracle)) <= ORACLE_TOL,
        "v_hat2 {v_hat2:?} vs oracle {v_oracle:?}"
    );
}

#[test]
fn ama_step_matches_grid_oracles_on_a_1d_strongly_convex_instance() {
    use splitgap::baselines::{ama_step, admm_initial_state};
    // g = quadratic (strongly convex), h = box indicator.
    let g = ProperConvexFn::quadratic(2.0, array![0.5]);
    let h = ProperConvexFn::indicator_box(array![-1.0], array![1.0]);
    let spec = ProblemSpec::new(
        g,
        h,
        LinearMap::identity(1),
        LinearMap::identity(1),
        array![0.3],
        array![0.5],
    )
    .unwrap();
    let rho = 0.8;
    let state = admm_initial_state(&spec, array![0.2], array![0.6]).unwrap();
    let next = ama_step(&spec, &state, rho).unwrap();
    // u-subproblem: min g(u) - lambda u (unpenalized).
    let u_oracle = grid_minimize_1d(
        |u| spec.g.eval(&array![u]).unwrap() - 0.6 * u,
        -4.0,
        4.0,
    );
    assert!((next.u[0] - u_oracle).abs() <= ORACLE_TOL);
    // v-subproblem with the fixed penalty.
    let v_oracle = grid_minimize_1d(
        |v| {
            spec.h.eval(&array![v]).unwrap() - 0.6 * v
                + rho / 2.0 * (u_oracle + v - 0.3).powi(2)
        },
        -1.0,
        1.0,
    );
    assert!((next.v[0] - v_oracle).abs() <= ORACLE_TOL);

    // Fixed point: start at the coupled optimum of the same instance and
    // the multiplier that supports it; one step stays put.
    // At the optimum: u* + v* = c, 2(u* - 0.5) = lambda*, lambda* in N_box(v*) + 0.
    // Interior v*: lambda* = 0 -> u* = 0.5, v* = -0.2.
    let state = admm_initial_state(&spec, array![-0.2], array![0.0]).unwrap();
    let next = ama_step(&spec, &state, rho).unwrap();
    assert!((next.u[0] - 0.5).abs() <= 1e-12);
    assert!((next.v[0] + 0.2).abs() <= 1e-12);
    assert!(next.lambda[0].abs() <= 1e-12);
}

#[test]
fn smoothed_conjugate_gradient_fd_on_50_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let kinds: Vec<ProperConvexFn> = vec![
        ProperConvexFn::indicator_box(array![-1.0, -1.0], array![1.0, 1.0]),
        ProperConvexFn::sum(
            2,
            vec![
                FnKind::Linear {
                    q: array![0.4, -0.2],
                },
                FnKind::IndicatorBox {
                    lo: array![-1.0, -1.0],
                    hi: array![1.0, 1.0],
                },
            ],
        )
        .unwrap(),
        ProperConvexFn::quadratic(0.8, array![0.1, -0.3]),
        ProperConvexFn::support_of(ProjSet::Ball {
            center: array![0.0, 0.0],
            radius: 1.0,
        }),
        ProperConvexFn::support_of(ProjSet::Box {
            lo: array![-1.0, -1.0],
            hi: array![1.0, 1.0],
        }),
    ];
    let mut checked = 0;
    while checked < 50 {
        let g = &kinds[checked % kinds.len()];
        let center = Array1::from_shape_fn(2, |_| rng.gen_range(-0.5..0.5));
        let center = match g.sample_domain(&mut rng) {
            Some(c) => c,
            None => center,
        };
        let b = BregmanDistance::squared_euclidean(center);
        let gamma = rng.gen_range(0.2..2.0);
        let z = Array1::from_shape_fn(2, |_| rng.gen_range(-1.5..1.5));
        let (_, grad) = smoothed_conjugate(g, &b, gamma, &z).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            let (vp, _) = smoothed_conjugate(g, &b, gamma, &zp).unwrap();
            let (vm, _) = smoothed_conjugate(g, &b, gamma, &zm).unwrap();
            let fd = (vp - vm) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() <= 1e-5 * (1.0 + grad[i].abs()),
                "case {checked} coord {i}: fd {fd} vs maximizer {}",
                grad[i]
            );
        }
        checked += 1;
    }
}

#[test]
fn smoothed_conjugate_of_zero_fn_matches_grid_refinement_in_2d() {
    let g = ProperConvexFn::zero(2);
    let b = BregmanDistance::squared_euclidean(array![0.0, 0.0]);
    let gamma = 0.6;
    let z = array![0.8, -0.5];
    let (value, maximizer) = smoothed_conjugate(&g, &b, gamma, &z).unwrap();
    // Independent maximization of <z,u> - gamma/2 ||u||^2 by grid + golden.
    let arg = grid_minimize(
        |u| -(z.dot(u) - gamma * 0.5 * u.dot(u)),
        -5.0,
        5.0,
        2,
        200,
    );
    assert!(norm2(&(&maximizer - &arg)) <= 1e-6);
    let grid_value = z.dot(&arg) - gamma * 0.5 * arg.dot(&arg);
    assert!((value - grid_value).abs() <= 1e-9);
}

#[test]
fn prox_matches_subproblem_oracle_for_every_kind() {
    // prox(t, x) minimizes f(z) + ||z - x||^2/(2 t); check against the grid
    // oracle on 1-D sections of each kind.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kinds: Vec<ProperConvexFn> = vec![
        ProperConvexFn::zero(1),
        ProperConvexFn::linear(array![0.8]),
        ProperConvexFn::indicator_box(array![-0.5], array![1.5]),
        ProperConvexFn::quadratic(1.3, array![0.4]),
        ProperConvexFn::support_of(ProjSet::Halfspace {
            a: array![1.0],
            b: 0.0,
        }),
        ProperConvexFn::sum(
            1,
            vec![
                FnKind::Quadratic {
                    mu: 0.7,
                    center: array![-0.2],
                },
                FnKind::Linear { q: array![0.3] },
                FnKind::IndicatorBox {
                    lo: array![-1.0],
                    hi: array![1.0],
                },
            ],
        )
        .unwrap(),
    ];
    for f in &kinds {
        for _ in 0..20 {
            let t = rng.gen_range(0.1..3.0);
            let x = rng.gen_range(-3.0..3.0);
            let got = f.prox(t, &array![x]).unwrap()[0];
            let oracle = grid_minimize_1d(
                |z| f.eval(&array![z]).unwrap() + (z - x) * (z - x) / (2.0 * t),
                -6.0,
                6.0,
            );
            assert!(
                (got - oracle).abs() <= ORACLE_TOL,
                "prox of {:?} at t={t}, x={x}: {got} vs {oracle}",
                f.kind()
            );
        }
    }
}
