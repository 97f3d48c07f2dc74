use std::f64::consts::FRAC_PI_2;

use hhl_core::chebyshev::nodes;
use hhl_core::inversion::*;
use hhl_core::sim::{apply, StateVector};
use num_complex::Complex;

/// Independent grid sup-error of a piecewise fit against `arcsin(C/x)`.
fn measured_sup(pc: &PiecewiseChebyshev<f64>) -> Vec<f64> {
    pc.intervals
        .iter()
        .map(|s| {
            (0..=2000)
                .map(|i| s.lo + (s.hi - s.lo) * i as f64 / 2000.0)
                .map(|x| (s.eval(x) - (pc.c / x).min(1.0).asin()).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn vanishing_constant_gives_zero_polynomial() {
    let s = chebyshev_fit(2.0, 10.0, 6, 0.0f64);
    assert!(s.coeffs.iter().all(|c| c.abs() < 1e-15));
}

fn sup_on(s: &hhl_core::chebyshev::ChebSeries<f64>, c: f64) -> f64 {
    (0..=20000)
        .map(|i| s.lo + (s.hi - s.lo) * i as f64 / 20000.0)
        .map(|x| (s.eval(x) - (c / x).asin()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn high_degree_fit_is_accurate() {
    // The branch point x = C sits at ρ = 2 for [2C, 10C], so the error falls like 2^{-d}.
    // Reference sup-errors from an independent numpy Chebyshev interpolation.
    let c = 1.5f64;
    for (d, reference) in [(20, 2.211_101e-8), (22, 4.771_083e-9), (24, 1.043_325e-9)] {
        let sup = sup_on(&chebyshev_fit(2.0 * c, 10.0 * c, d, c), c);
        assert!((sup / reference - 1.0).abs() < 1e-3, "d={d}: {sup}");
    }
    assert!(sup_on(&chebyshev_fit(2.0 * c, 10.0 * c, 22, c), c) < 1e-8);
}

#[test]
fn interpolant_hits_nodes() {
    let (lo, hi, c) = (16.0f64, 80.0, 4.0);
    for d in [1, 3, 5, 8] {
        let s = chebyshev_fit(lo, hi, d, c);
        for x in nodes(lo, hi, d) {
            assert!((s.eval(x) - (c / x).asin()).abs() < 1e-13);
        }
    }
}

#[test]
fn bound_at_unit_ratio() {
    for d in [0, 3, 7] {
        let b = lemma8_bound(8.0f64, 4.0, d);
        let expect = 8.13 * FRAC_PI_2 / (2f64.powi(d as i32 + 1) - 1.0);
        assert!((b - expect).abs() < 1e-14);
    }
    assert!(lemma8_bound(16.0f64, 4.0, 60) < 1e-16);
}

#[test]
fn piecewise_fit_within_bound() {
    for d in [3usize, 5, 8] {
        let pc = PiecewiseChebyshev::fit(16.0, 4.0, d, 6).unwrap();
        let bound = lemma8_bound(16.0, 4.0, d);
        for (e, own) in measured_sup(&pc).iter().zip(pc.interval_errors()) {
            assert!(*e <= bound, "d={d}: {e} > {bound}");
            assert!(own <= bound);
        }
    }
    for d in 3..8 {
        let r = lemma8_bound(16.0f64, 4.0, d) / lemma8_bound(16.0, 4.0, d + 1);
        assert!(r >= 1.9, "{r}");
    }
}

#[test]
fn bound_holds_over_a_parameter_matrix() {
    for n_l in [6usize, 9, 12] {
        for a_start in [4.0f64, 16.0, 40.0] {
            // The bound needs 2C ≤ a_start; see the test below for C = a_start.
            for c in [1.0, 0.25 * a_start, 0.5 * a_start] {
                for d in [2usize, 4, 6, 9] {
                    let pc = PiecewiseChebyshev::fit(a_start, c, d, n_l).unwrap();
                    let bound = lemma8_bound(a_start, c, d);
                    let worst = measured_sup(&pc).into_iter().fold(0.0, f64::max);
                    assert!(worst <= bound, "n_l={n_l} a={a_start} C={c} d={d}: {worst} > {bound}");
                }
            }
        }
    }
}

#[test]
fn bound_fails_when_branch_point_enters_ellipse() {
    // With C = a_start the singularity of arcsin(C/x) lies on the first interval.
    let pc = PiecewiseChebyshev::fit(4.0f64, 4.0, 6, 6).unwrap();
    let worst = measured_sup(&pc).into_iter().fold(0.0, f64::max);
    assert!(worst > lemma8_bound(4.0, 4.0, 6));
}

#[test]
fn intervals_cover_register_range() {
    let pc = PiecewiseChebyshev::fit(16.0f64, 4.0, 5, 9).unwrap();
    assert_eq!(pc.intervals[0].lo, 16.0);
    for w in pc.intervals.windows(2) {
        assert_eq!(w[0].hi, w[1].lo);
        assert_eq!(w[0].hi, 5.0 * w[0].lo);
    }
    assert!(pc.intervals.last().unwrap().hi >= 511.0);
    assert!(pc.intervals[pc.m() - 1].lo < 511.0);
}

#[test]
fn clamped_fit_starts_at_the_kink() {
    let pc = PiecewiseChebyshev::fit_clamped(10.0f64, 37.5, 6, 10).unwrap();
    assert_eq!(pc.fit_start, 37.5);
    assert!(!pc.has_kink());
    assert_eq!(pc.angle(20), Some(FRAC_PI_2));
    let plain = PiecewiseChebyshev::fit(10.0f64, 37.5, 6, 10).unwrap();
    assert!(plain.has_kink());
    assert!(pc.register_error() < plain.register_error());
}

#[test]
fn params_examples() {
    let p = derive_params(1.0, 0.5, 1.0, 1.0).unwrap();
    assert_eq!(p.n_l, 9);
    assert_eq!(lemma_n_l(1.0, 0.5), 9);
    assert!((p.eps_c - 0.5 / (2.0 * 1.5)).abs() < 1e-15);
    assert!((p.a_start - 64.0).abs() < 1e-9);

    for kappa in [1.0, 2.0, 3.34, 10.0] {
        let mut prev = 0;
        for k in 1..12 {
            let eps = 0.9 / 2f64.powi(k);
            let n = derive_params(kappa, eps, 1.0, 1.0).unwrap().n_l;
            assert!(n >= prev);
            prev = n;
        }
    }
    assert!(derive_params(1.0, 0.0, 1.0, 1.0).is_err());
    assert!(derive_params(0.5, 0.1, 1.0, 1.0).is_err());
}

#[test]
fn degree_agrees_with_bound_inversion() {
    for kappa in [1.0, 2.0, 3.34] {
        for eps_r in [0.3, 0.1, 0.01] {
            let n_l = 12;
            let t = 2.0;
            let p = derive_params_with_n_l(kappa, eps_r, t, 0.46, n_l).unwrap();
            let solved = (0..64)
                .find(|&d| lemma8_bound(p.a_start, p.c_prime, d) <= p.eps_c)
                .unwrap();
            assert!(
                p.d.abs_diff(solved) <= 1,
                "kappa={kappa} eps={eps_r}: {} vs {solved}",
                p.d
            );
        }
    }
}

#[test]
fn success_probability_examples() {
    assert_eq!(success_probability(1.0, 0.0), 1.0);
    assert!((success_probability(2.0, 0.1) - 0.2025).abs() < 1e-15);
}

#[test]
fn arcsin_magnitude_examples() {
    assert!((arcsin_magnitude(1.0 + 1e-12f64) - FRAC_PI_2).abs() < 1e-5);
    let oracle = Complex::new(2.0f64, 0.0).asin().norm();
    assert!((arcsin_magnitude(2.0f64) - oracle).abs() < 1e-12);
    assert!((arcsin_magnitude(2.0f64) - 2.0498).abs() < 1e-4);
    let mut prev = FRAC_PI_2;
    for i in 1..200 {
        let m = arcsin_magnitude(1.0 + i as f64 * 0.05);
        assert!(m > prev);
        prev = m;
    }
}

/// Ancilla |1⟩ amplitude after the rotation with the register prepared in `v`.
fn rotated_amplitude(angles: &[Option<f64>], n_l: usize, v: usize) -> f64 {
    let register: Vec<usize> = (0..n_l).collect();
    let circ = rotation_circuit(angles, &register, n_l, n_l + 1).unwrap();
    let out = apply(&circ, &StateVector::basis(n_l + 1, v)).unwrap();
    out.amplitudes()[v | 1 << n_l].re
}

#[test]
fn rotation_amplitudes() {
    let n_l = 6;
    let c = 6.0;
    let pc = PiecewiseChebyshev::fit(12.0, c, 25, n_l).unwrap();
    let angles = fitted_angles(&pc);
    for v in 1..12 {
        assert!((rotated_amplitude(&angles, n_l, v) - 1.0).abs() < 1e-15);
    }
    let worst = (12..64)
        .map(|v| (rotated_amplitude(&angles, n_l, v) - c / v as f64).abs())
        .fold(0.0, f64::max);
    assert!(worst <= pc.register_error() + 1e-14);
    assert!(worst < 1e-8);

    let exact = exact_angles(c, n_l);
    assert!((rotated_amplitude(&exact, n_l, 6) - 1.0).abs() < 1e-15);
    assert_eq!(exact[0], None);
    for v in 1..64usize {
        let expect = (c / v as f64).min(1.0);
        assert!((rotated_amplitude(&exact, n_l, v) - expect).abs() < 1e-14);
    }
    assert!(rotated_amplitude(&exact, n_l, 0).abs() < 1e-15);
}

#[test]
fn rotation_gate_count_is_one_per_value() {
    let pc = PiecewiseChebyshev::fit(4.0f64, 2.0, 4, 5).unwrap();
    let circ = rotation_circuit(&fitted_angles(&pc), &[0, 1, 2, 3, 4], 5, 6).unwrap();
    let meta = circ.metadata();
    assert_eq!(meta.by_kind["ry"], 31);
    assert_eq!(meta.by_arity[&5], 31);
    assert!(rotation_circuit(&fitted_angles(&pc), &[0, 1, 2], 5, 6).is_err());
}
