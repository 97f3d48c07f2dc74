//! Parameter derivation for an end-to-end run.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamsim::H3Mode;
use crate::inversion::{self, InversionParams};
use crate::mpf::{self, ExtrapolationPlan};
use crate::observables::{Mode, ObservableKind, ObservableRequest};
use crate::qpe;
use crate::stateprep::fit_polynomial;
use crate::toeplitz::{eval_poly, grid_point, norm_inf, ClassicalSolution, Problem, RhsSpec, SpectrumSummary};

/// Widest circuit the pipeline simulates.
pub const MAX_QUBITS: usize = 16;

/// Share of the total error assigned to each approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    pub epsilon: f64,
    /// State preparation.
    pub eps_s: f64,
    /// Hamiltonian simulation, counted twice (forward and inverse QPE).
    pub eps_a: f64,
    /// Eigenvalue inversion.
    pub eps_r: f64,
}

impl Budget {
    pub fn split(epsilon: f64) -> Self {
        Self {
            epsilon,
            eps_s: epsilon / 3.0,
            eps_a: epsilon / 6.0,
            eps_r: epsilon / 3.0,
        }
    }

    /// `ε_S + 2ε_A + ε_R`.
    pub fn total(&self) -> f64 {
        self.eps_s + 2.0 * self.eps_a + self.eps_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoaderMode {
    /// Multi-controlled `Ry` per multilinear monomial, amplitude `sin(c·p(x_i))`.
    Polynomial,
    /// One fully controlled `Ry` per basis state, amplitude `b_i/‖b⃗‖_∞`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoaderPlan {
    pub mode: LoaderMode,
    /// Ascending coefficients fed to the loader; empty in exact mode.
    pub poly: Vec<f64>,
    pub c: f64,
    /// `ε_p = ε_S/(8κC_b)`, the accuracy the choice of `c` is derived from.
    pub eps_p_target: f64,
    /// Grid sup-error of `poly` against `f/‖b⃗‖_∞` (zero when `poly` is exact).
    pub fit_error: f64,
    /// `C_b = √N‖b⃗‖_∞/‖b⃗‖`.
    pub c_b: f64,
    /// Branch amplitudes are `≈ c_eff·b_i/(‖b⃗‖_∞√N)`.
    pub c_effective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    Strang,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMode {
    /// Piecewise-Chebyshev angles with the identity region below `a_start`.
    Chebyshev,
    /// Exact `arcsin(C'/y)` on every nonzero register value.
    Exact,
    /// QPE bypassed: the rotation is applied in the exact eigenbasis.
    Oracle,
}

/// Optional changes to the derived parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub no_extrapolation: bool,
    pub force_l: Option<usize>,
    /// Base Trotter exponents; `l` becomes their count.
    pub base_m: Option<Vec<u64>>,
    pub n_l: Option<usize>,
    pub t: Option<f64>,
    /// Loader constant applied to the raw right-hand-side polynomial.
    pub raw_poly_c: Option<f64>,
    pub poly_degree: Option<usize>,
    pub exact_stateprep: bool,
    pub exact_evolution: bool,
    pub exact_inversion: bool,
    pub oracle_inversion: bool,
    pub h3_mode: H3Mode,
    pub observables: Option<Vec<ObservableRequest>>,
    pub shots: Option<u64>,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for Overrides {
    fn default() -> Self {
        Self {
            epsilon: None,
            no_extrapolation: false,
            force_l: None,
            base_m: None,
            n_l: None,
            t: None,
            raw_poly_c: None,
            poly_degree: None,
            exact_stateprep: false,
            exact_evolution: false,
            exact_inversion: false,
            oracle_inversion: false,
            h3_mode: H3Mode::Flag,
            observables: None,
            shots: None,
            seed: 0,
            parallel: false,
        }
    }
}

impl Overrides {
    /// Settings of the published simulator experiment: `c = 0.1` on the raw
    /// polynomial and base exponents `(2, 3, 4)`.
    pub fn paper_preset() -> Self {
        Self {
            base_m: Some(vec![2, 3, 4]),
            raw_poly_c: Some(0.1),
            ..Self::default()
        }
    }
}

/// Default requests: norm, `x⃗ᵀAx⃗` and the absolute average, post-selected.
pub fn default_observables(problem: &Problem) -> Vec<ObservableRequest> {
    [
        ObservableKind::Norm,
        ObservableKind::QuadraticForm {
            p: problem.a,
            q: problem.b,
        },
        ObservableKind::AbsoluteAverage,
    ]
    .into_iter()
    .map(|kind| ObservableRequest {
        kind,
        mode: Mode::PostSelected,
    })
    .collect()
}

/// Every parameter of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunPlan {
    pub problem: Problem,
    pub budget: Budget,
    pub spectrum: SpectrumSummary<f64>,
    pub t: f64,
    pub n_l: usize,
    pub l: usize,
    pub extrapolation: ExtrapolationPlan,
    pub loader: LoaderPlan,
    pub inversion: InversionParams,
    pub evolution_mode: EvolutionMode,
    pub inversion_mode: InversionMode,
    pub h3_mode: H3Mode,
    pub observables: Vec<ObservableRequest>,
    pub shots: Option<u64>,
    pub seed: u64,
    pub parallel: bool,
    /// `n_b + n_l + 3`.
    pub qubits: usize,
    pub warnings: Vec<String>,
}

impl RunPlan {
    pub fn n_b(&self) -> usize {
        self.problem.n_b
    }

    pub fn classical(&self) -> Result<ClassicalSolution<f64>> {
        self.problem.matrix().solve_classical(&self.problem.rhs)
    }
}

fn loader_plan(problem: &Problem, budget: &Budget, kappa: f64, ov: &Overrides) -> Result<LoaderPlan> {
    let n = 1usize << problem.n_b;
    let values: Vec<f64> = problem.rhs.values(n);
    let inf = norm_inf(&values);
    let norm = crate::toeplitz::norm2(&values);
    let c_b = (n as f64).sqrt() * inf / norm;
    let eps_p_target = budget.eps_s / (8.0 * kappa * c_b);
    let exact = LoaderPlan {
        mode: LoaderMode::Exact,
        poly: Vec::new(),
        c: 1.0,
        eps_p_target,
        fit_error: 0.0,
        c_b,
        c_effective: 1.0,
    };
    let coeffs = match &problem.rhs {
        RhsSpec::Poly { coeffs } if !ov.exact_stateprep => coeffs,
        _ => return Ok(exact),
    };
    let (poly, c, fit_error) = if let Some(c) = ov.raw_poly_c {
        (coeffs.clone(), c, 0.0)
    } else if let Some(d) = ov.poly_degree.filter(|&d| d + 1 < coeffs.len()) {
        let fit = fit_polynomial(|x| eval_poly(coeffs, x), d, problem.n_b)?;
        (fit.coeffs, eps_p_target.sqrt(), fit.eps_p)
    } else {
        (coeffs.iter().map(|v| v / inf).collect(), eps_p_target.sqrt(), 0.0)
    };
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidArgument(format!("loader constant c = {c} not in (0, 1]")));
    }
    let peak = (0..n).fold(0.0f64, |m, i| m.max(eval_poly(&poly, grid_point(i, n)).abs()));
    Ok(LoaderPlan {
        mode: LoaderMode::Polynomial,
        c_effective: c * peak,
        poly,
        c,
        eps_p_target,
        fit_error,
        c_b,
    })
}

/// Derives every parameter of a run from the problem and overrides.
pub fn plan(problem: &Problem, ov: &Overrides) -> Result<RunPlan> {
    let matrix = problem.matrix();
    problem.rhs.validate(matrix.dim())?;
    let spectrum = matrix.spectrum_summary()?;
    if spectrum.lambda_min <= 0.0 {
        return Err(Error::IndefiniteSpectrum {
            lambda_min: spectrum.lambda_min,
        });
    }
    let epsilon = ov.epsilon.unwrap_or(problem.epsilon);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} not in (0, 1)")));
    }
    let budget = Budget::split(epsilon);
    let kappa = spectrum.kappa;
    let mut warnings = Vec::new();

    let width_cap = MAX_QUBITS
        .checked_sub(problem.n_b + 3)
        .filter(|&w| w >= 1)
        .ok_or(Error::SizeCap {
            what: "qubits",
            got: problem.n_b + 4,
            limit: MAX_QUBITS,
        })?;
    let lemma_n_l = inversion::lemma_n_l(kappa, budget.eps_r);
    let n_l = match ov.n_l {
        Some(n) if n + problem.n_b + 3 > MAX_QUBITS => {
            return Err(Error::SizeCap {
                what: "qubits",
                got: n + problem.n_b + 3,
                limit: MAX_QUBITS,
            })
        }
        Some(0) => return Err(Error::InvalidArgument("n_l must be at least 1".into())),
        Some(n) => n,
        None => lemma_n_l.min(width_cap),
    };
    if n_l < lemma_n_l {
        warnings.push(format!(
            "register width {n_l} below the {lemma_n_l} the inversion analysis asks for"
        ));
    }
    let t = ov.t.unwrap_or_else(|| qpe::default_time(n_l, spectrum.lambda_max));
    if t > std::f64::consts::TAU / spectrum.lambda_max * (1.0 + 1e-12) {
        warnings.push(format!("t = {t} exceeds 2π/λ_max: eigenvalue phases wrap"));
    }
    let inversion = inversion::derive_params_with_n_l(kappa, budget.eps_r, t, spectrum.lambda_min, n_l)?;
    if inversion.c_prime > inversion.a_start {
        warnings.push(format!(
            "C' = {:.3} exceeds a_start = {:.3}: fitted intervals start at C'",
            inversion.c_prime, inversion.a_start
        ));
    }
    if inversion.c_prime < inversion.a_start {
        warnings.push(format!(
            "λ_min maps to {:.3} < a_start = {:.3}: part of the spectrum is inverted by the identity region",
            inversion.c_prime, inversion.a_start
        ));
    }

    let evolution_mode = if ov.exact_evolution {
        EvolutionMode::Exact
    } else {
        EvolutionMode::Strang
    };
    let base: Vec<u64> = if let Some(m) = &ov.base_m {
        m.clone()
    } else if ov.no_extrapolation || evolution_mode == EvolutionMode::Exact {
        vec![1]
    } else {
        let d_norm = problem.b.abs();
        let l = ov.force_l.unwrap_or_else(|| mpf::optimal_l(d_norm, t, budget.eps_a));
        (1..=l as u64).collect()
    };
    let extrapolation = mpf::build_plan_with_base(&base, n_l)?;
    let loader = loader_plan(problem, &budget, kappa, ov)?;
    let inversion_mode = if ov.oracle_inversion {
        InversionMode::Oracle
    } else if ov.exact_inversion {
        InversionMode::Exact
    } else {
        InversionMode::Chebyshev
    };
    Ok(RunPlan {
        problem: problem.clone(),
        budget,
        spectrum,
        t,
        n_l,
        l: extrapolation.l,
        extrapolation,
        loader,
        inversion,
        evolution_mode,
        inversion_mode,
        h3_mode: ov.h3_mode,
        observables: ov.observables.clone().unwrap_or_else(|| default_observables(problem)),
        shots: ov.shots,
        seed: ov.seed,
        parallel: ov.parallel,
        qubits: problem.n_b + n_l + 3,
        warnings,
    })
}
