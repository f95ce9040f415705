//! Equilibrium holdings and trading rates.
//!
//! Both players follow the feedback law
//!
//! ```text
//! dX̂ⁱ_t = (c⁺_t + c⁻_t)/(2λ) · (ξ̂ⁱ_t - w⁵_t X̂ʲ_t - X̂ⁱ_t) dt
//! ```
//!
//! In sum/difference coordinates `X± = X¹ ± X²` the system decouples into
//! `dX± = ((c⁺+c⁻) ξ̂± / (2λ) - (c±/λ) X±) dt`, which [`solve_closed_form`]
//! integrates by variation of constants. [`solve_ode`] integrates the coupled
//! system directly and serves as an independent cross-check.

use serde::{Deserialize, Serialize};

use crate::coefficients::{coefficients_at, Branch, ModelParams};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, TimeGrid};
use crate::quadrature::GL5;
use crate::signals::{SignalModel, SignalPath};
use crate::targets::{PricePath, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Ode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub params: ModelParams,
    pub grid: TimeGrid,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub signal: SignalPath,
    pub method: Method,
    /// `|X̂ⁱ(last node) - Ξⁱ_T|`.
    pub terminal_gaps: [f64; 2],
    pub terminals: [f64; 2],
}

impl EquilibriumSolution {
    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn holdings(&self, player: usize) -> &[f64] {
        if player == 0 {
            &self.x1
        } else {
            &self.x2
        }
    }

    pub fn rates(&self, player: usize) -> &[f64] {
        if player == 0 {
            &self.alpha1
        } else {
            &self.alpha2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperOpts {
    /// Fixed RK4 steps per grid cell.
    pub substeps: usize,
    /// Step-doubling error control inside each substep.
    pub adaptive: bool,
    pub tol: f64,
    pub max_halvings: u32,
}

impl Default for StepperOpts {
    fn default() -> Self {
        Self {
            substeps: 1,
            adaptive: true,
            tol: 1e-11,
            max_halvings: 20,
        }
    }
}

impl StepperOpts {
    pub fn fixed(substeps: usize) -> Self {
        Self {
            substeps,
            adaptive: false,
            ..Self::default()
        }
    }
}

/// Grid for a scenario with target breakpoints pinned onto nodes.
pub fn scenario_grid(scenario: &ScenarioSpec, spec: GridSpec) -> Result<TimeGrid> {
    if spec.horizon != scenario.params.horizon {
        return Err(Error::GridMismatch(format!(
            "grid horizon {} differs from scenario horizon {}",
            spec.horizon, scenario.params.horizon
        )));
    }
    TimeGrid::from_spec_with_nodes(spec, &scenario.jump_times())
}

fn check_grid(model: &SignalModel, grid: &TimeGrid) -> Result<()> {
    let horizon = model.params().horizon;
    if grid.horizon() != horizon {
        return Err(Error::GridMismatch(format!(
            "grid horizon {} differs from scenario horizon {horizon}",
            grid.horizon()
        )));
    }
    if let Some(path) = model.path() {
        if !path.on_grid(grid) {
            return Err(Error::GridMismatch(
                "price path was simulated on a different grid".into(),
            ));
        }
    }
    Ok(())
}

/// Variation-of-constants solution in sum/difference coordinates.
pub fn solve_closed_form(model: &SignalModel, grid: &TimeGrid) -> Result<EquilibriumSolution> {
    check_grid(model, grid)?;
    let scenario = model.scenario();
    let params = scenario.params;
    let lambda = params.lambda;
    let horizon = params.horizon;
    let coeffs = [params.branch(Branch::Plus), params.branch(Branch::Minus)];
    let nodes = grid.nodes();

    let (x_plus0, x_minus0) = sum_diff(scenario.x1, scenario.x2);
    let mut state = [vec![0.0; nodes.len()], vec![0.0; nodes.len()]];
    state[0][0] = x_plus0;
    state[1][0] = x_minus0;

    for (k, (t0, t1)) in grid.cells().enumerate() {
        let tau1 = horizon - t1;
        let h = t1 - t0;
        let mut forcing = [0.0; 2];
        for (&node, &weight) in GL5.0.iter().zip(&GL5.1) {
            let s = t0 + h * node;
            let c = coefficients_at(&params, s)?;
            let [xi1, xi2] = model.eval(s)?;
            let total = c.c_plus + c.c_minus;
            forcing[0] += weight * total * (xi1 + xi2) * coeffs[0].propagator(horizon - s, tau1);
            forcing[1] += weight * total * (xi1 - xi2) * coeffs[1].propagator(horizon - s, tau1);
        }
        for j in 0..2 {
            state[j][k + 1] = state[j][k] * coeffs[j].propagator(horizon - t0, tau1)
                + forcing[j] * h / (2.0 * lambda);
        }
    }

    let [x_plus, x_minus] = state;
    let (x1, x2) = sum_diff_inverse(&x_plus, &x_minus);
    assemble(model, grid, x1, x2, Method::ClosedForm)
}

/// RK4 integration of the coupled feedback ODE in player coordinates.
pub fn solve_ode(
    model: &SignalModel,
    grid: &TimeGrid,
    opts: StepperOpts,
) -> Result<EquilibriumSolution> {
    check_grid(model, grid)?;
    if opts.substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be positive".into()));
    }
    let scenario = model.scenario();
    let params = scenario.params;
    let rhs = |t: f64, x: [f64; 2]| -> Result<[f64; 2]> {
        let c = coefficients_at(&params, t)?;
        let [xi1, xi2] = model.eval(t)?;
        let w5 = c.weights.w5;
        Ok([
            c.urgency * (xi1 - w5 * x[1] - x[0]),
            c.urgency * (xi2 - w5 * x[0] - x[1]),
        ])
    };

    let nodes = grid.nodes();
    let mut x1 = Vec::with_capacity(nodes.len());
    let mut x2 = Vec::with_capacity(nodes.len());
    let mut x = [scenario.x1, scenario.x2];
    x1.push(x[0]);
    x2.push(x[1]);
    for (t0, t1) in grid.cells() {
        let h = (t1 - t0) / opts.substeps as f64;
        for s in 0..opts.substeps {
            let a = t0 + s as f64 * h;
            let b = if s + 1 == opts.substeps { t1 } else { a + h };
            x = if opts.adaptive {
                adaptive_step(&rhs, a, b, x, &opts, 0)?
            } else {
                rk4_step(&rhs, a, b, x)?
            };
        }
        x1.push(x[0]);
        x2.push(x[1]);
    }
    assemble(model, grid, x1, x2, Method::Ode)
}

type Rhs<'a> = dyn Fn(f64, [f64; 2]) -> Result<[f64; 2]> + 'a;

fn rk4_step(f: &Rhs<'_>, a: f64, b: f64, x: [f64; 2]) -> Result<[f64; 2]> {
    let h = b - a;
    let mid = a + 0.5 * h;
    let axpy = |x: [f64; 2], k: [f64; 2], s: f64| [x[0] + s * k[0], x[1] + s * k[1]];
    let k1 = f(a, x)?;
    let k2 = f(mid, axpy(x, k1, 0.5 * h))?;
    let k3 = f(mid, axpy(x, k2, 0.5 * h))?;
    let k4 = f(b, axpy(x, k3, h))?;
    Ok([
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

fn adaptive_step(
    f: &Rhs<'_>,
    a: f64,
    b: f64,
    x: [f64; 2],
    opts: &StepperOpts,
    depth: u32,
) -> Result<[f64; 2]> {
    let full = rk4_step(f, a, b, x)?;
    let mid = 0.5 * (a + b);
    let half = rk4_step(f, mid, b, rk4_step(f, a, mid, x)?)?;
    let err = (0..2)
        .map(|i| (half[i] - full[i]).abs() / 15.0)
        .fold(0.0, f64::max);
    let scale = 1.0f64.max(half[0].abs()).max(half[1].abs());
    if !err.is_finite() {
        return Err(Error::IntegrationFailure {
            t: a,
            reason: "non-finite state".into(),
        });
    }
    if err <= opts.tol * scale {
        return Ok(half);
    }
    if depth >= opts.max_halvings {
        return Err(Error::IntegrationFailure {
            t: a,
            reason: format!("step rejected after {depth} halvings (error {err:.3e})"),
        });
    }
    let left = adaptive_step(f, a, mid, x, opts, depth + 1)?;
    adaptive_step(f, mid, b, left, opts, depth + 1)
}

fn assemble(
    model: &SignalModel,
    grid: &TimeGrid,
    mut x1: Vec<f64>,
    mut x2: Vec<f64>,
    method: Method,
) -> Result<EquilibriumSolution> {
    x1[0] = model.scenario().x1;
    x2[0] = model.scenario().x2;
    let signal = SignalPath::sample(model, grid)?;
    let params = *model.params();
    let (alpha1, alpha2) = feedback_rates(&params, grid.nodes(), &x1, &x2, &signal)?;
    let (xi1_term, xi2_term) = model.scenario().terminals()?;
    let terminal_gaps = [
        (x1.last().unwrap() - xi1_term).abs(),
        (x2.last().unwrap() - xi2_term).abs(),
    ];
    Ok(EquilibriumSolution {
        params,
        grid: grid.clone(),
        x1,
        x2,
        alpha1,
        alpha2,
        signal,
        method,
        terminal_gaps,
        terminals: [xi1_term, xi2_term],
    })
}

fn feedback_rates(
    params: &ModelParams,
    nodes: &[f64],
    x1: &[f64],
    x2: &[f64],
    signal: &SignalPath,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut alpha1 = Vec::with_capacity(nodes.len());
    let mut alpha2 = Vec::with_capacity(nodes.len());
    for (i, &t) in nodes.iter().enumerate() {
        let c = coefficients_at(params, t)?;
        let w5 = c.weights.w5;
        alpha1.push(c.urgency * (signal.xi_hat_1[i] - w5 * x2[i] - x1[i]));
        alpha2.push(c.urgency * (signal.xi_hat_2[i] - w5 * x1[i] - x2[i]));
    }
    Ok((alpha1, alpha2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
}

/// Feedback-law rates recomputed from the solution's holdings and signals.
pub fn trading_rates(solution: &EquilibriumSolution) -> Rates {
    let (alpha1, alpha2) = feedback_rates(
        &solution.params,
        solution.nodes(),
        &solution.x1,
        &solution.x2,
        &solution.signal,
    )
    .expect("solution nodes lie in [0, T)");
    Rates { alpha1, alpha2 }
}

/// Solves one scenario. Stochastic scenarios need a price path on `grid`.
pub fn solve(
    scenario: &ScenarioSpec,
    path: Option<&PricePath>,
    grid: &TimeGrid,
    method: Method,
) -> Result<EquilibriumSolution> {
    let model = SignalModel::for_scenario(scenario, path)?;
    match method {
        Method::ClosedForm => solve_closed_form(&model, grid),
        Method::Ode => solve_ode(&model, grid, StepperOpts::default()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidationPath {
    pub nodes: Vec<f64>,
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Optimal single-agent liquidation `X_t = x₀ sinh(κ(T-t)) / sinh(κT)`, `κ = √(σ/λ)`.
pub fn single_player_liquidation(
    sigma: f64,
    lambda: f64,
    horizon: f64,
    x0: f64,
    grid: &TimeGrid,
) -> Result<LiquidationPath> {
    if !(sigma > 0.0 && lambda > 0.0 && horizon > 0.0) || !x0.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need sigma, lambda, T > 0 and finite x0 (got {sigma}, {lambda}, {horizon}, {x0})"
        )));
    }
    if grid.horizon() != horizon {
        return Err(Error::GridMismatch(format!(
            "grid horizon {} differs from {horizon}",
            grid.horizon()
        )));
    }
    let kappa = (sigma / lambda).sqrt();
    let denom = -(-2.0 * kappa * horizon).exp_m1();
    let mut x = Vec::with_capacity(grid.len());
    let mut alpha = Vec::with_capacity(grid.len());
    for &t in grid.nodes() {
        let tau = horizon - t;
        // sinh(κτ)/sinh(κT) = e^{-κt} (1 - e^{-2κτ}) / (1 - e^{-2κT})
        let xt = x0 * (-kappa * t).exp() * (-(-2.0 * kappa * tau).exp_m1()) / denom;
        x.push(xt);
        alpha.push(-kappa / (kappa * tau).tanh() * xt);
    }
    Ok(LiquidationPath {
        nodes: grid.nodes().to_vec(),
        x,
        alpha,
    })
}

fn sum_diff(a: f64, b: f64) -> (f64, f64) {
    (a + b, a - b)
}

/// `(X¹ + X², X¹ - X²)`.
pub fn sum_diff_transform(x1: &[f64], x2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x1.iter().zip(x2).map(|(&a, &b)| sum_diff(a, b)).unzip()
}

/// `((X⁺ + X⁻)/2, (X⁺ - X⁻)/2)`.
pub fn sum_diff_inverse(x_plus: &[f64], x_minus: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x_plus
        .iter()
        .zip(x_minus)
        .map(|(&p, &m)| (0.5 * (p + m), 0.5 * (p - m)))
        .unzip()
}
