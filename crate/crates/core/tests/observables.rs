use hhl_core::observables::*;
use hhl_core::pipeline::{self, Overrides};
use hhl_core::sim::StateVector;
use hhl_core::{Problem, RhsSpec, ToeplitzF64};
use proptest::prelude::*;

/// Wires: system `0..n_b`, one register qubit, inversion ancilla, state-prep ancilla.
fn context(n_b: usize, c_rot: f64, c_load: f64, b: &[f64]) -> ObservableContext {
    ObservableContext {
        system: (0..n_b).collect(),
        register: vec![n_b],
        inversion_ancilla: n_b + 1,
        stateprep_ancilla: Some(n_b + 2),
        fixed: Vec::new(),
        c_rot,
        c_load,
        norm_b: b.iter().map(|v| v * v).sum::<f64>().sqrt(),
        norm_b_inf: b.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Ideal output of an exact run: success branch `C·x_i` times the loader
/// factor of `mode`, the rest of the mass on a failure branch.
fn ideal_state(x: &[f64], ctx: &ObservableContext, mode: Mode) -> StateVector<f64> {
    let n_b = ctx.system.len();
    let n = x.len() as f64;
    let scale = match mode {
        Mode::PostSelected => ctx.c_rot / ctx.norm_b,
        Mode::FullRun => ctx.c_load * ctx.c_rot / (n.sqrt() * ctx.norm_b_inf),
    };
    let mut amps = vec![0.0; 1 << (n_b + 3)];
    let success = 1 << (n_b + 1) | 1 << (n_b + 2);
    let mut mass = 0.0;
    for (i, &v) in x.iter().enumerate() {
        amps[i | success] = scale * v;
        mass += (scale * v).powi(2);
    }
    assert!(mass <= 1.0 + 1e-12, "mass {mass}");
    amps[0] = (1.0 - mass).max(0.0).sqrt();
    StateVector::from_real(&amps).unwrap()
}

fn theta_rhs(n_b: usize, theta: f64) -> Vec<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    (0..1usize << n_b)
        .map(|i| (0..n_b).map(|b| if (i >> b) & 1 == 1 { s } else { c }).product())
        .collect()
}

fn solve(n_b: usize, a: f64, b: f64, rhs: &[f64]) -> (Vec<f64>, f64) {
    let m = ToeplitzF64::new(n_b, a, b);
    (m.solve(rhs).unwrap(), m.spectrum_summary().unwrap().lambda_min)
}

#[test]
fn identity_matrix_unit_rhs_gives_unit_norm() {
    let b = [1.0, 0.0];
    let ctx = context(1, 1.0, 1.0, &b);
    let state = ideal_state(&b, &ctx, Mode::PostSelected);
    let r = measure_norm(&state, &ctx, Mode::PostSelected).unwrap();
    assert!((r.raw[0] - 1.0).abs() < 1e-14);
    assert!((r.scaled - 1.0).abs() < 1e-14);
}

#[test]
fn zero_mass_is_impossible() {
    let ctx = context(1, 1.0, 1.0, &[1.0, 0.0]);
    let state = StateVector::<f64>::zero(4);
    assert!(matches!(
        measure_norm(&state, &ctx, Mode::PostSelected),
        Err(hhl_core::Error::ImpossibleOutcome)
    ));
    assert!(measure_quadratic_form(&state, &ctx, 1.0, 0.5, Mode::FullRun).is_err());
}

#[test]
fn ideal_state_reproduces_every_observable() {
    let b = theta_rhs(2, 0.35);
    let (x, lmin) = solve(2, 1.0, -1.0 / 3.0, &b);
    let ctx = context(2, lmin, 0.9, &b);
    for mode in [Mode::PostSelected, Mode::FullRun] {
        let state = ideal_state(&x, &ctx, mode);
        for kind in [
            ObservableKind::Norm,
            ObservableKind::QuadraticForm { p: 1.0, q: -1.0 / 3.0 },
            ObservableKind::QuadraticForm { p: 0.3, q: 2.0 },
            ObservableKind::AbsoluteAverage,
        ] {
            let r = measure(&state, &ctx, &ObservableRequest { kind, mode }).unwrap();
            let expect = classical_value(&kind, &x);
            assert!(
                (r.scaled - expect).abs() < 1e-10 * expect.abs().max(1.0),
                "{kind:?} {mode:?}"
            );
        }
    }
}

#[test]
fn full_run_and_post_selected_agree_after_factor() {
    let b = [0.3, 1.0, -0.2, 0.7];
    let (x, lmin) = solve(2, 2.0, -0.5, &b);
    let ctx = context(2, lmin, 0.4, &b);
    let n = 4.0;
    let factor = ctx.c_load.powi(2) * ctx.norm_b.powi(2) / (n * ctx.norm_b_inf.powi(2));
    let post = ideal_state(&x, &ctx, Mode::PostSelected);
    let full = ideal_state(&x, &ctx, Mode::FullRun);
    let p_post = measure_norm(&post, &ctx, Mode::PostSelected).unwrap();
    let p_full = measure_norm(&full, &ctx, Mode::FullRun).unwrap();
    assert!((p_full.raw[0] - factor * p_post.raw[0]).abs() < 1e-10);
    assert!((p_full.scaled - p_post.scaled).abs() < 1e-10);
}

#[test]
fn quadratic_form_without_coupling_is_scaled_norm_squared() {
    let b = [1.0, -0.4, 0.25, 0.8, 0.1, 0.0, -0.6, 0.3];
    let (x, lmin) = solve(3, 2.0, -0.5, &b);
    let ctx = context(3, lmin, 1.0, &b);
    let state = ideal_state(&x, &ctx, Mode::PostSelected);
    let norm = measure_norm(&state, &ctx, Mode::PostSelected).unwrap().scaled;
    let f = measure_quadratic_form(&state, &ctx, 2.5, 0.0, Mode::PostSelected).unwrap();
    assert!((f.scaled - 2.5 * norm * norm).abs() < 1e-10);
}

#[test]
fn single_qubit_difference_is_twice_the_product() {
    // After H: n(0) − n(1) = 2·x₀x₁ in units of the branch amplitudes.
    let ctx = context(1, 1.0, 1.0, &[1.0, 1.0]);
    let norm_b2 = 2.0;
    let x = [0.6, 0.3];
    let state = ideal_state(&x, &ctx, Mode::PostSelected);
    let r = measure_quadratic_form(&state, &ctx, 0.0, 1.0, Mode::PostSelected).unwrap();
    assert_eq!(r.raw.len(), 2);
    assert!((r.raw[1] - 2.0 * x[0] * x[1] / norm_b2).abs() < 1e-14);
    assert!((r.scaled - 2.0 * x[0] * x[1]).abs() < 1e-14);
}

#[test]
fn quadratic_family_covers_each_pair_once() {
    for n_b in 1..=6 {
        let n = 1usize << n_b;
        let mut all: Vec<usize> = (1..=n_b).flat_map(|k| pair_indices(n_b, k)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..n - 1).collect::<Vec<_>>());
    }
    assert_eq!(pair_indices(3, 1), vec![0, 2, 4, 6]);
    assert_eq!(pair_indices(3, 2), vec![1, 5]);
    assert_eq!(pair_indices(3, 3), vec![3]);
}

#[test]
fn each_difference_measures_its_pair_set() {
    let x = [0.9, -0.2, 0.4, 0.1, 0.7, -0.5, 0.3, 0.2];
    let ctx = context(3, 1.0, 1.0, &[1.0; 8]);
    let state = ideal_state(&x, &ctx, Mode::PostSelected);
    let r = measure_quadratic_form(&state, &ctx, 1.0, 1.0, Mode::PostSelected).unwrap();
    for k in 1..=3 {
        let s: f64 = pair_indices(3, k).iter().map(|&i| x[i] * x[i + 1]).sum();
        assert!((r.raw[k] - 2.0 * s / 8.0).abs() < 1e-14, "k={k}");
    }
}

#[test]
fn average_of_first_basis_vector() {
    for n_b in 1..=4 {
        let n = 1usize << n_b;
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let ctx = context(n_b, 1.0, 1.0, &b);
        let state = ideal_state(&b, &ctx, Mode::PostSelected);
        let r = measure_absolute_average(&state, &ctx, Mode::PostSelected).unwrap();
        assert!((r.scaled - 1.0 / n as f64).abs() < 1e-14);
    }
}

#[test]
fn antisymmetric_solution_has_zero_average() {
    let x = [0.5, -0.25, 0.25, -0.5];
    let ctx = context(2, 1.0, 1.0, &[1.0; 4]);
    let state = ideal_state(&x, &ctx, Mode::FullRun);
    let r = measure_absolute_average(&state, &ctx, Mode::FullRun).unwrap();
    assert!(r.raw[0] < 1e-30);
    assert!(r.scaled.abs() < 1e-14);
}

fn demo_problem(n_b: usize, theta: f64) -> Problem {
    Problem {
        n_b,
        a: 1.0,
        b: -1.0 / 3.0,
        rhs: RhsSpec::Vector {
            values: theta_rhs(n_b, theta),
        },
        epsilon: 0.1,
    }
}

/// λ = 2/3 and 4/3 map exactly to register values 1 and 2.
fn demo_overrides(n_b: usize) -> Overrides {
    if n_b == 1 {
        Overrides {
            n_l: Some(2),
            t: Some(0.75 * std::f64::consts::PI),
            exact_inversion: true,
            no_extrapolation: true,
            ..Overrides::default()
        }
    } else {
        Overrides {
            oracle_inversion: true,
            no_extrapolation: true,
            ..Overrides::default()
        }
    }
}

fn theta(k: usize) -> f64 {
    (k as f64 + 0.5) * std::f64::consts::PI / 20.0
}

#[test]
fn pipeline_norm_at_fixed_theta() {
    let p = demo_problem(2, 0.35);
    let ov = Overrides {
        observables: Some(vec![ObservableRequest {
            kind: ObservableKind::Norm,
            mode: Mode::PostSelected,
        }]),
        ..demo_overrides(2)
    };
    let r = pipeline::run(&pipeline::plan(&p, &ov).unwrap()).unwrap();
    let o = &r.observables[0];
    assert!(
        (o.scaled / o.classical - 1.0).abs() < 0.02,
        "{} vs {}",
        o.scaled,
        o.classical
    );
}

#[test]
fn average_sweep_on_two_level_system() {
    for k in 0..10 {
        let p = demo_problem(1, theta(k));
        let ov = Overrides {
            observables: Some(vec![ObservableRequest {
                kind: ObservableKind::AbsoluteAverage,
                mode: Mode::FullRun,
            }]),
            ..demo_overrides(1)
        };
        let r = pipeline::run(&pipeline::plan(&p, &ov).unwrap()).unwrap();
        let o = &r.observables[0];
        let (x, _) = solve(1, 1.0, -1.0 / 3.0, &theta_rhs(1, theta(k)));
        assert!(((x[0] + x[1]).abs() / 2.0 - o.classical).abs() < 1e-14);
        assert!(
            (o.scaled / o.classical - 1.0).abs() < 0.02,
            "k={k}: {} vs {}",
            o.scaled,
            o.classical
        );
    }
}

#[test]
fn quadratic_form_on_published_instance() {
    let p = Problem {
        n_b: 3,
        a: 2.0,
        b: -0.5,
        rhs: RhsSpec::Poly {
            coeffs: vec![1.0, 1.0, -1.0, 1.0],
        },
        epsilon: 2f64.powi(-5),
    };
    let ov = Overrides {
        observables: Some(vec![ObservableRequest {
            kind: ObservableKind::QuadraticForm { p: 2.0, q: -0.5 },
            mode: Mode::PostSelected,
        }]),
        ..Overrides::paper_preset()
    };
    let r = pipeline::run(&pipeline::plan(&p, &ov).unwrap()).unwrap();
    let o = &r.observables[0];
    assert!(
        (o.scaled / o.classical - 1.0).abs() < 0.05,
        "{} vs {}",
        o.scaled,
        o.classical
    );
}

#[test]
fn shots_are_reproducible_and_converge() {
    let b = theta_rhs(1, 0.6);
    let (x, lmin) = solve(1, 1.0, -1.0 / 3.0, &b);
    let ctx = context(1, lmin, 1.0, &b);
    let state = ideal_state(&x, &ctx, Mode::FullRun);
    let exact = measure_absolute_average(&state, &ctx, Mode::FullRun).unwrap();
    let a = shot_estimate(&exact, &ctx, 8192, 11).unwrap();
    let b2 = shot_estimate(&exact, &ctx, 8192, 11).unwrap();
    assert_eq!(a, b2);
    assert_eq!(a.shots, Some(8192));
    assert!(shot_estimate(&exact, &ctx, 0, 1).is_err());

    let mut prev = f64::INFINITY;
    for shots in [100u64, 10_000, 1_000_000, 100_000_000] {
        let mean_dev: f64 = (0..8)
            .map(|s| (shot_estimate(&exact, &ctx, shots, s).unwrap().scaled - exact.scaled).abs())
            .sum::<f64>()
            / 8.0;
        assert!(mean_dev < prev, "{shots}");
        prev = mean_dev;
    }
    assert!(prev < 1e-3 * exact.scaled);
}

#[test]
fn shot_estimates_stay_within_four_sigma() {
    let b = theta_rhs(1, 0.6);
    let (x, lmin) = solve(1, 1.0, -1.0 / 3.0, &b);
    let ctx = context(1, lmin, 1.0, &b);
    let state = ideal_state(&x, &ctx, Mode::FullRun);
    let exact = measure_absolute_average(&state, &ctx, Mode::FullRun).unwrap();
    let mut z2 = 0.0;
    for seed in 0..200 {
        let s = shot_estimate(&exact, &ctx, 8192, seed).unwrap();
        let z = (s.scaled - exact.scaled) / s.stderr.unwrap();
        assert!(z.abs() < 4.0, "seed {seed}: z = {z}");
        z2 += z * z;
    }
    // The delta-method error is calibrated: mean z² ≈ 1.
    let mean = z2 / 200.0;
    assert!((0.7..1.3).contains(&mean), "{mean}");
}

#[test]
fn quadratic_form_shots_have_calibrated_error() {
    let b = theta_rhs(2, 0.35);
    let (x, lmin) = solve(2, 1.0, -1.0 / 3.0, &b);
    let ctx = context(2, lmin, 1.0, &b);
    let state = ideal_state(&x, &ctx, Mode::PostSelected);
    let exact = measure_quadratic_form(&state, &ctx, 1.0, -1.0 / 3.0, Mode::PostSelected).unwrap();
    let z2: f64 = (0..200)
        .map(|seed| {
            let s = shot_estimate(&exact, &ctx, 8192, seed).unwrap();
            ((s.scaled - exact.scaled) / s.stderr.unwrap()).powi(2)
        })
        .sum();
    let mean = z2 / 200.0;
    assert!((0.7..1.3).contains(&mean), "{mean}");
}

#[test]
fn expected_repetition_counts() {
    let (a, b) = expected_repetitions(0.25, 3.0, 0.1);
    assert_eq!(a, 4.0);
    assert!((b - 3.0 / 0.9).abs() < 1e-15);
}

#[test]
fn circuits_have_expected_shape() {
    let c = quadratic_form_circuit::<f64>(5, &[0, 1, 2], 3).unwrap();
    let meta = c.metadata();
    assert_eq!(meta.by_kind["h"], 1);
    assert_eq!(meta.by_kind["x"], 2);
    assert!(quadratic_form_circuit::<f64>(5, &[0, 1, 2], 0).is_err());
    assert!(quadratic_form_circuit::<f64>(5, &[0, 1, 2], 4).is_err());
    assert_eq!(
        average_circuit::<f64>(4, &[0, 1, 2]).unwrap().metadata().by_kind["h"],
        3
    );
}

proptest! {
    #[test]
    fn classical_quadratic_form_matches_dense(x in prop::collection::vec(-2.0f64..2.0, 2..9), p in -3.0f64..3.0, q in -3.0f64..3.0) {
        let n = x.len();
        let mut dense = 0.0;
        for i in 0..n {
            for j in 0..n {
                let bij = if i == j { p } else if i.abs_diff(j) == 1 { q } else { 0.0 };
                dense += x[i] * bij * x[j];
            }
        }
        let v = classical_value(&ObservableKind::QuadraticForm { p, q }, &x);
        prop_assert!((v - dense).abs() < 1e-12);
    }
}
