//! Structural equivalences between the implemented schemes: the
//! Douglas-Rachford form against the feasibility ADMM, the general ADMM
//! specialization, the penalty-scaling property, the auxiliary-dual
//! recursion, and the per-iteration operator-application counts.

mod common;

use ndarray::Array1;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use splitgap::baselines::{
    admm_feasibility_step, admm_initial_state, admm_step, dr_feasibility_step, dykstra_step,
    haugazeau_step, run_baseline, AdmmState, BaselineConfig, BaselineMethod, DrState,
    DykstraState, FeasAdmmState, HaugazeauState,
};
use splitgap::linop::norm2;
use splitgap::problems::{build_feasibility_instance, feasibility_projectors};
use splitgap::sadmm::{SadmmConfig, SadmmSolver};
use splitgap::sama::{SamaConfig, SamaSolver};

fn rand_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.gen_range(-scale..scale))
}

#[test]
fn dr_matches_feasibility_admm_over_1000_iterations() {
    let n = 40;
    let (pi1, pi2) = feasibility_projectors(n, 1e-2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lambda0 = rand_vec(&mut rng, n, 2.0);
    let v0 = rand_vec(&mut rng, n, 2.0);

    let mut admm = FeasAdmmState {
        u: Array1::zeros(n),
        v: v0.clone(),
        lambda: lambda0.clone(),
    };
    let mut dr = DrState::from_feasibility_start(&v0, &lambda0, &pi1, &pi2);
    // The DR init already performs the first sweep's projections; its
    // recovered pair equals the ADMM state after one step.
    let mut max_dev = 0.0_f64;
    let mut prev_lambda = lambda0.clone();
    for _ in 0..1000 {
        admm = admm_feasibility_step(&admm, &pi1, &pi2);
        let u = &prev_lambda - &dr.z;
        let v = &dr.z - &dr.lambda;
        max_dev = max_dev
            .max(norm2(&(&u - &admm.u)))
            .max(norm2(&(&v - &admm.v)))
            .max(norm2(&(&dr.lambda - &admm.lambda)));
        prev_lambda = dr.lambda.clone();
        let (next, _, _) = dr_feasibility_step(&dr, &pi1, &pi2);
        dr = next;
    }
    assert!(max_dev < 1e-10, "max deviation {max_dev}");
}

#[test]
fn dr_recovered_pair_matches_step_output() {
    let n = 12;
    let (pi1, pi2) = feasibility_projectors(n, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut state = DrState::from_feasibility_start(
        &rand_vec(&mut rng, n, 1.0),
        &rand_vec(&mut rng, n, 1.0),
        &pi1,
        &pi2,
    );
    for _ in 0..50 {
        let prev_lambda = state.lambda.clone();
        let (next, u, v) = dr_feasibility_step(&state, &pi1, &pi2);
        // u = lambda_k - z_{k+1}, v = z_{k+1} - lambda_{k+1}
        assert!(norm2(&(&u - &(&prev_lambda - &next.z))) == 0.0);
        assert!(norm2(&(&v - &(&next.z - &next.lambda))) == 0.0);
        // lambda stays in the second set by construction.
        assert!(pi2.distance(&next.lambda) <= 1e-12);
        state = next;
    }
}

#[test]
fn general_admm_at_rho_one_matches_the_specialized_scheme() {
    // On the pure support-function template the two code paths evaluate the
    // same floating-point expressions, so the trajectories agree exactly.
    let n = 30;
    let (pi1, pi2) = feasibility_projectors(n, 1e-2);
    let spec = splitgap::ProblemSpec::new(
        splitgap::ProperConvexFn::support_of(pi1.clone()),
        splitgap::ProperConvexFn::support_of(pi2.clone()),
        splitgap::LinearMap::identity(n),
        splitgap::LinearMap::identity(n),
        Array1::zeros(n),
        Array1::zeros(n),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lambda0 = rand_vec(&mut rng, n, 1.0);

    let mut general = admm_initial_state(&spec, Array1::zeros(n), lambda0.clone()).unwrap();
    let mut special = FeasAdmmState {
        u: Array1::zeros(n),
        v: Array1::zeros(n),
        lambda: lambda0.clone(),
    };
    for k in 0..100 {
        general = admm_step(&spec, &general, 1.0).unwrap();
        special = admm_feasibility_step(&special, &pi1, &pi2);
        assert_eq!(general.u, special.u, "u diverged at step {k}");
        assert_eq!(general.v, special.v, "v diverged at step {k}");
        assert_eq!(general.lambda, special.lambda, "lambda diverged at step {k}");
    }

    // The ball-bounded builder routes the prox through the (inactive)
    // segment projection; the trajectories still agree to rounding.
    let built = build_feasibility_instance(n, 1e-2, None).unwrap();
    let mut general = admm_initial_state(&built, Array1::zeros(n), lambda0.clone()).unwrap();
    let mut special = FeasAdmmState {
        u: Array1::zeros(n),
        v: Array1::zeros(n),
        lambda: lambda0,
    };
    let mut max_dev = 0.0_f64;
    for _ in 0..100 {
        general = admm_step(&built, &general, 1.0).unwrap();
        special = admm_feasibility_step(&special, &pi1, &pi2);
        max_dev = max_dev
            .max(norm2(&(&general.u - &special.u)))
            .max(norm2(&(&general.lambda - &special.lambda)));
    }
    assert!(max_dev <= 1e-10, "built-instance deviation {max_dev}");
}

#[test]
fn admm_penalty_scaling_maps_onto_the_parameter_free_scheme() {
    // The specialized scheme has no penalty; running the general ADMM with
    // penalty rho from (u0, v0, lambda0) matches it from (rho u0, rho v0,
    // lambda0) after scaling the primal iterates by rho (the halfspaces are
    // cones, so projections commute with positive scaling).
    let n = 20;
    let spec = build_feasibility_instance(n, 1e-1, None).unwrap();
    let (pi1, pi2) = feasibility_projectors(n, 1e-1);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let v0 = rand_vec(&mut rng, n, 1.0);
    let lambda0 = rand_vec(&mut rng, n, 1.0);

    for rho in [0.5, 2.0] {
        let mut general = admm_initial_state(&spec, v0.clone(), lambda0.clone()).unwrap();
        let mut special = FeasAdmmState {
            u: Array1::zeros(n),
            v: &v0 * rho,
            lambda: lambda0.clone(),
        };
        let mut max_dev = 0.0_f64;
        for _ in 0..200 {
            general = admm_step(&spec, &general, rho).unwrap();
            special = admm_feasibility_step(&special, &pi1, &pi2);
            max_dev = max_dev
                .max(norm2(&(&(&general.u * rho) - &special.u)))
                .max(norm2(&(&(&general.v * rho) - &special.v)))
                .max(norm2(&(&general.lambda - &special.lambda)));
        }
        assert!(max_dev < 1e-10, "rho {rho}: max deviation {max_dev}");
    }
}

#[test]
fn lambda_star_recursion_on_the_feasibility_instance() {
    let n = 100;
    let spec = build_feasibility_instance(n, 1e-2, None).unwrap();
    let ones = Array1::ones(n);

    let sama = SamaSolver::new(
        &spec,
        SamaConfig {
            lambda0: Some(ones.clone()),
            ..SamaConfig::default()
        },
    )
    .unwrap();
    let mut state = sama.init().unwrap();
    for _ in 0..1000 {
        sama.step(&mut state).unwrap();
        let (z, _) = spec.constraint_residual(&state.u_bar, &state.v_bar).unwrap();
        let direct = &z * (-1.0 / state.params.beta());
        let err = norm2(&(&direct - &state.lambda_star));
        assert!(err <= 1e-9 * (1.0 + norm2(&direct)), "SAMA drift {err} at k {}", state.k);
    }

    let sadmm = SadmmSolver::new(
        &spec,
        SadmmConfig {
            lambda0: Some(ones),
            ..SadmmConfig::default()
        },
    )
    .unwrap();
    let mut state = sadmm.init().unwrap();
    for _ in 0..1000 {
        sadmm.step(&mut state).unwrap();
        let (z, _) = spec.constraint_residual(&state.u_bar, &state.v_bar).unwrap();
        let direct = &z * (-1.0 / state.params.beta);
        let err = norm2(&(&direct - &state.lambda_star));
        assert!(err <= 1e-9 * (1.0 + norm2(&direct)), "SADMM drift {err} at k {}", state.k);
    }
}

#[test]
fn dual_accel_modification_changes_the_recursion() {
    let n = 20;
    let spec = build_feasibility_instance(n, 1e-1, None).unwrap();
    let ones = Array1::ones(n);
    let solver = SamaSolver::new(
        &spec,
        SamaConfig {
            lambda0: Some(ones),
            dual_accel_mod: true,
            ..SamaConfig::default()
        },
    )
    .unwrap();
    let mut state = solver.init().unwrap();
    let mut diverged = false;
    for _ in 0..20 {
        solver.step(&mut state).unwrap();
        let (z, _) = spec.constraint_residual(&state.u_bar, &state.v_bar).unwrap();
        let direct = &z * (-1.0 / state.params.beta());
        if norm2(&(&direct - &state.lambda_star)) > 1e-6 {
            diverged = true;
        }
    }
    assert!(diverged, "the accelerated recursion should leave the averaged form");
}

#[test]
fn baseline_steps_are_nonexpansive_in_their_fixed_point_variable() {
    let n = 16;
    let (pi1, pi2) = feasibility_projectors(n, 1e-1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        // Feasibility-ADMM / DR in (v, lambda); projections compose to a
        // nonexpansive map of the pair.
        let a = FeasAdmmState {
            u: Array1::zeros(n),
            v: rand_vec(&mut rng, n, 3.0),
            lambda: rand_vec(&mut rng, n, 3.0),
        };
        let b = FeasAdmmState {
            u: Array1::zeros(n),
            v: rand_vec(&mut rng, n, 3.0),
            lambda: rand_vec(&mut rng, n, 3.0),
        };
        let before = (norm2(&(&a.v - &b.v)).powi(2) + norm2(&(&a.lambda - &b.lambda)).powi(2)).sqrt();
        let fa = admm_feasibility_step(&a, &pi1, &pi2);
        let fb = admm_feasibility_step(&b, &pi1, &pi2);
        let after =
            (norm2(&(&fa.v - &fb.v)).powi(2) + norm2(&(&fa.lambda - &fb.lambda)).powi(2)).sqrt();
        assert!(after <= before * (1.0 + 1e-12) + 1e-12);

        // Dykstra's projection sweep is nonexpansive in x for fixed
        // corrections.
        let x1 = rand_vec(&mut rng, n, 3.0);
        let x2 = rand_vec(&mut rng, n, 3.0);
        let d1 = dykstra_step(&DykstraState::new(x1.clone()), &pi1, &pi2);
        let d2 = dykstra_step(&DykstraState::new(x2.clone()), &pi1, &pi2);
        assert!(norm2(&(&d1.x - &d2.x)) <= norm2(&(&x1 - &x2)) * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn dykstra_corrections_stay_bounded_on_the_benchmark_instance() {
    let n = 100;
    let (pi1, pi2) = feasibility_projectors(n, 1e-2);
    let mut state = DykstraState::new(Array1::ones(n));
    let mut max_correction = 0.0_f64;
    for _ in 0..10_000 {
        state = dykstra_step(&state, &pi1, &pi2);
        let c = state.correction_size();
        assert!(c.is_finite());
        max_correction = max_correction.max(c);
    }
    // Bounded by a modest multiple of the start-point scale.
    assert!(
        max_correction <= 100.0 * (n as f64).sqrt(),
        "corrections grew to {max_correction}"
    );
}

#[test]
fn haugazeau_residual_decreases_over_the_long_run() {
    let n = 100;
    let (pi1, pi2) = feasibility_projectors(n, 1e-1);
    let dual = |x: &Array1<f64>| pi1.distance(x) + pi2.distance(x);
    let mut state = HaugazeauState::new(Array1::ones(n));
    state = haugazeau_step(&state, &pi1, &pi2);
    let first = dual(&state.x);
    for _ in 1..10_000 {
        state = haugazeau_step(&state, &pi1, &pi2);
    }
    let last = dual(&state.x);
    assert!(
        last < first,
        "residual at k = 10^4 ({last}) should be below the first residual ({first})"
    );
    assert!(!state.degenerate);
}

#[test]
fn per_iteration_operator_application_counts() {
    // One forward pair (Au, Bv) and one adjoint pair (A^T, B^T) per
    // iteration for SAMA and SADMM; the classical ADMM costs the same, so
    // the smoothing schemes stay within "classical ADMM plus one adjoint".
    let n = 10;
    let spec = build_feasibility_instance(n, 1e-1, None).unwrap();
    let ones = Array1::ones(n);

    let sama = SamaSolver::new(
        &spec,
        SamaConfig {
            lambda0: Some(ones.clone()),
            ..SamaConfig::default()
        },
    )
    .unwrap();
    let mut state = sama.init().unwrap();
    let (a0, b0) = (spec.a.op_counts(), spec.b.op_counts());
    for i in 1..=5u64 {
        sama.step(&mut state).unwrap();
        let da = spec.a.op_counts().since(a0);
        let db = spec.b.op_counts().since(b0);
        assert_eq!((da.forward, da.adjoint), (i, i), "SAMA A-applications");
        assert_eq!((db.forward, db.adjoint), (i, i), "SAMA B-applications");
    }

    let spec2 = build_feasibility_instance(n, 1e-1, None).unwrap();
    let sadmm = SadmmSolver::new(
        &spec2,
        SadmmConfig {
            lambda0: Some(ones.clone()),
            ..SadmmConfig::default()
        },
    )
    .unwrap();
    let mut state = sadmm.init().unwrap();
    let (a0, b0) = (spec2.a.op_counts(), spec2.b.op_counts());
    for i in 1..=5u64 {
        sadmm.step(&mut state).unwrap();
        let da = spec2.a.op_counts().since(a0);
        let db = spec2.b.op_counts().since(b0);
        assert_eq!((da.forward, da.adjoint), (i, i), "SADMM A-applications");
        assert_eq!((db.forward, db.adjoint), (i, i), "SADMM B-applications");
    }

    let spec3 = build_feasibility_instance(n, 1e-1, None).unwrap();
    let mut admm: AdmmState =
        admm_initial_state(&spec3, Array1::zeros(n), ones.clone()).unwrap();
    let (a0, b0) = (spec3.a.op_counts(), spec3.b.op_counts());
    for i in 1..=5u64 {
        admm = admm_step(&spec3, &admm, 1.0).unwrap();
        let da = spec3.a.op_counts().since(a0);
        let db = spec3.b.op_counts().since(b0);
        assert_eq!((da.forward, da.adjoint), (i, i), "ADMM A-applications");
        assert_eq!((db.forward, db.adjoint), (i, i), "ADMM B-applications");
    }
}

#[test]
fn ama_rejects_the_feasibility_instance() {
    // The benchmark objective has no strong convexity, so AMA must refuse.
    let spec = build_feasibility_instance(8, 1e-1, None).unwrap();
    let mut config = BaselineConfig::new(BaselineMethod::Ama { rho: 1.0 });
    config.max_iters = 3;
    let err = run_baseline(&spec, &config).unwrap_err();
    assert!(matches!(err, splitgap::Error::Configuration(_)));
}
