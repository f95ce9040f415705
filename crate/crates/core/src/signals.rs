//! Optimal signal processes `ξ̂¹`, `ξ̂²`.
//!
//! Each signal blends the forecast terminal positions with kernel-weighted
//! averages of the expected future targets:
//!
//! ```text
//! ξ̂¹_t = w¹(Ξ¹+Ξ²) + w²(Ξ¹-Ξ²) + w³ ∫ₜᵀ (ξ¹+ξ²) K¹(t,u) du + w⁴ ∫ₜᵀ (ξ¹-ξ²) K²(t,u) du
//! ```
//!
//! and symmetrically for `ξ̂²`. Only target classes with closed-form
//! conditional forecasts are supported: deterministic piecewise-constant
//! targets are integrated exactly piece by piece, and for martingale targets
//! `E[ξ_u | F_t] = ξ_t` collapses each kernel integral to `ξ_t` because the
//! kernels have unit mass.

use serde::{Deserialize, Serialize};

use crate::coefficients::{coefficients_at, Branch, ModelParams, Weights};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::targets::{bachelier_delta, PricePath, ScenarioSpec, TargetSpec};

/// `∫ₐᵇ K(t, u) du` for `t ≤ a ≤ b ≤ T`, from the closed-form antiderivative.
pub fn kernel_piece_integral(
    params: &ModelParams,
    branch: Branch,
    t: f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    let horizon = params.horizon;
    if !(0.0 <= t && t <= a && a <= b && b <= horizon) {
        return Err(Error::Domain {
            t,
            domain: format!("0 ≤ t ≤ a ≤ b ≤ {horizon} (got t={t}, a={a}, b={b})"),
        });
    }
    if a == b {
        return Ok(0.0);
    }
    if t >= horizon {
        return Err(Error::Singularity { t, horizon });
    }
    Ok(params
        .branch(branch)
        .mass_ratio(horizon - t, horizon - b, horizon - a))
}

/// Continuous-time signal, evaluable at any `t` in `[0, T)`.
#[derive(Debug, Clone)]
pub enum SignalModel {
    Deterministic {
        scenario: ScenarioSpec,
        terminals: (f64, f64),
    },
    Martingale {
        scenario: ScenarioSpec,
        terminals: (f64, f64),
        scales: (f64, f64),
        path: PricePath,
    },
}

impl SignalModel {
    pub fn deterministic(scenario: &ScenarioSpec) -> Result<Self> {
        scenario.validate()?;
        if !scenario.is_deterministic() {
            return Err(Error::Unsupported(
                "deterministic signal requires Zero or PiecewiseConstant targets".into(),
            ));
        }
        Ok(Self::Deterministic {
            scenario: scenario.clone(),
            terminals: scenario.terminals()?,
        })
    }

    pub fn martingale(scenario: &ScenarioSpec, path: &PricePath) -> Result<Self> {
        scenario.validate()?;
        let scales = match (scenario.target1.delta_scale(), scenario.target2.delta_scale()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Unsupported(
                    "martingale signal requires Zero or ScaledBachelierDelta targets".into(),
                ))
            }
        };
        Ok(Self::Martingale {
            scenario: scenario.clone(),
            terminals: scenario.terminals()?,
            scales,
            path: path.clone(),
        })
    }

    /// Picks the matching signal class for the scenario.
    pub fn for_scenario(scenario: &ScenarioSpec, path: Option<&PricePath>) -> Result<Self> {
        if scenario.is_deterministic() {
            Self::deterministic(scenario)
        } else {
            Self::martingale(scenario, path.ok_or(Error::MissingPath)?)
        }
    }

    pub fn scenario(&self) -> &ScenarioSpec {
        match self {
            Self::Deterministic { scenario, .. } | Self::Martingale { scenario, .. } => scenario,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.scenario().params
    }

    pub fn path(&self) -> Option<&PricePath> {
        match self {
            Self::Martingale { path, .. } => Some(path),
            Self::Deterministic { .. } => None,
        }
    }

    /// `(ξ̂¹_t, ξ̂²_t)`.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        let params = self.params();
        let (terminals, weights, sum_avg, diff_avg) = match self {
            Self::Deterministic {
                scenario,
                terminals,
            } => {
                let weights = weights_or_limit(params, t)?;
                let (sum_avg, diff_avg) = if t < params.horizon {
                    (
                        kernel_average(params, Branch::Plus, t, scenario, 1.0)?,
                        kernel_average(params, Branch::Minus, t, scenario, -1.0)?,
                    )
                } else {
                    (0.0, 0.0)
                };
                (*terminals, weights, sum_avg, diff_avg)
            }
            Self::Martingale {
                terminals,
                scales,
                path,
                ..
            } => {
                let weights = weights_or_limit(params, t)?;
                let delta = bachelier_delta(params, path.value_at(t), path.initial(), t);
                let (xi1, xi2) = (scales.0 * delta, scales.1 * delta);
                (*terminals, weights, xi1 + xi2, xi1 - xi2)
            }
        };
        Ok(combine(&weights, terminals, sum_avg, diff_avg))
    }
}

fn weights_or_limit(params: &ModelParams, t: f64) -> Result<Weights> {
    crate::coefficients::weights_at(params, t)
}

fn combine(w: &Weights, terminals: (f64, f64), sum_avg: f64, diff_avg: f64) -> [f64; 2] {
    let plus = terminals.0 + terminals.1;
    let minus = terminals.0 - terminals.1;
    let common = w.w1 * plus + w.w3 * sum_avg;
    let own = w.w2 * minus + w.w4 * diff_avg;
    [common + own, common - own]
}

/// `∫ₜᵀ (ξ¹ + sign·ξ²) K(t,u) du` for deterministic targets.
fn kernel_average(
    params: &ModelParams,
    branch: Branch,
    t: f64,
    scenario: &ScenarioSpec,
    sign: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (target, factor) in [(&scenario.target1, 1.0), (&scenario.target2, sign)] {
        total += factor * piecewise_kernel_average(params, branch, t, target)?;
    }
    Ok(total)
}

fn piecewise_kernel_average(
    params: &ModelParams,
    branch: Branch,
    t: f64,
    target: &TargetSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for (start, end, level) in target.pieces() {
        if end <= t || level == 0.0 {
            continue;
        }
        total += level * kernel_piece_integral(params, branch, t, start.max(t), end)?;
    }
    Ok(total)
}

/// Signal values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPath {
    pub nodes: Vec<f64>,
    pub xi_hat_1: Vec<f64>,
    pub xi_hat_2: Vec<f64>,
    pub xi_hat_sum: Vec<f64>,
    pub xi_hat_diff: Vec<f64>,
}

impl SignalPath {
    pub fn sample(model: &SignalModel, grid: &TimeGrid) -> Result<Self> {
        if let Some(path) = model.path() {
            if !path.on_grid(grid) {
                return Err(Error::GridMismatch(
                    "price path was simulated on a different grid".into(),
                ));
            }
        }
        let mut xi_hat_1 = Vec::with_capacity(grid.len());
        let mut xi_hat_2 = Vec::with_capacity(grid.len());
        for &t in grid.nodes() {
            let [a, b] = model.eval(t)?;
            xi_hat_1.push(a);
            xi_hat_2.push(b);
        }
        let xi_hat_sum = xi_hat_1.iter().zip(&xi_hat_2).map(|(a, b)| a + b).collect();
        let xi_hat_diff = xi_hat_1.iter().zip(&xi_hat_2).map(|(a, b)| a - b).collect();
        Ok(Self {
            nodes: grid.nodes().to_vec(),
            xi_hat_1,
            xi_hat_2,
            xi_hat_sum,
            xi_hat_diff,
        })
    }

    pub fn last(&self) -> [f64; 2] {
        [*self.xi_hat_1.last().unwrap(), *self.xi_hat_2.last().unwrap()]
    }
}

pub fn signal_deterministic(scenario: &ScenarioSpec, grid: &TimeGrid) -> Result<SignalPath> {
    SignalPath::sample(&SignalModel::deterministic(scenario)?, grid)
}

pub fn signal_martingale(
    scenario: &ScenarioSpec,
    path: &PricePath,
    grid: &TimeGrid,
) -> Result<SignalPath> {
    SignalPath::sample(&SignalModel::martingale(scenario, path)?, grid)
}

/// The processes `Y±` and `M±` on a grid. `w¹(M⁺-Y⁺) ± w²(M⁻-Y⁻)` reproduces
/// the signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxProcesses {
    pub nodes: Vec<f64>,
    pub y_plus: Vec<f64>,
    pub y_minus: Vec<f64>,
    pub m_plus: Vec<f64>,
    pub m_minus: Vec<f64>,
}

pub fn aux_processes(
    scenario: &ScenarioSpec,
    path: Option<&PricePath>,
    grid: &TimeGrid,
) -> Result<AuxProcesses> {
    let model = SignalModel::for_scenario(scenario, path)?;
    let params = &scenario.params;
    let horizon = params.horizon;
    let (xi1_term, xi2_term) = scenario.terminals()?;
    let terminal = [xi1_term + xi2_term, xi1_term - xi2_term];
    let coeffs = [params.branch(Branch::Plus), params.branch(Branch::Minus)];
    // absolute (unnormalized) kernel mass G(τ)
    let mass = |k: usize, tau: f64| coeffs[k].ln_mass(tau).exp();

    let n = grid.len();
    let mut y = [vec![0.0; n], vec![0.0; n]];
    let mut m = [vec![0.0; n], vec![0.0; n]];

    match &model {
        SignalModel::Deterministic { scenario, .. } => {
            // Y±_t = Σ_pieces level · (G(T-start) - G(T-min(end,t))), exact.
            let signs = [1.0, -1.0];
            for (k, sign) in signs.iter().enumerate() {
                let pieces: Vec<(f64, f64, f64)> = scenario
                    .target1
                    .pieces()
                    .into_iter()
                    .chain(
                        scenario
                            .target2
                            .pieces()
                            .into_iter()
                            .map(|(a, b, l)| (a, b, sign * l)),
                    )
                    .collect();
                let integral_to = |t: f64| -> f64 {
                    pieces
                        .iter()
                        .filter(|(a, _, _)| *a < t)
                        .map(|&(a, b, l)| l * (mass(k, horizon - a) - mass(k, horizon - b.min(t))))
                        .sum()
                };
                let total = integral_to(horizon);
                for (i, &t) in grid.nodes().iter().enumerate() {
                    y[k][i] = integral_to(t);
                    m[k][i] = terminal[k] + total;
                }
            }
        }
        SignalModel::Martingale {
            scales,
            path,
            ..
        } => {
            // Y± by trapezoid on the grid; M±_t = Ξ± + Y±_t + ξ±_t G±(T-t).
            let amplitude = [scales.0 + scales.1, scales.0 - scales.1];
            let density = |k: usize, t: f64, delta: f64| -> f64 {
                amplitude[k] * delta * coeffs[k].ln_density(horizon - t).exp()
            };
            let nodes = grid.nodes();
            let deltas: Vec<f64> = nodes
                .iter()
                .zip(&path.values)
                .map(|(&t, &p)| bachelier_delta(params, p, path.initial(), t))
                .collect();
            for k in 0..2 {
                for i in 0..n {
                    if i > 0 {
                        let h = nodes[i] - nodes[i - 1];
                        y[k][i] = y[k][i - 1]
                            + 0.5
                                * h
                                * (density(k, nodes[i - 1], deltas[i - 1])
                                    + density(k, nodes[i], deltas[i]));
                    }
                    m[k][i] =
                        terminal[k] + y[k][i] + amplitude[k] * deltas[i] * mass(k, horizon - nodes[i]);
                }
            }
        }
    }
    let [y_plus, y_minus] = y;
    let [m_plus, m_minus] = m;
    Ok(AuxProcesses {
        nodes: grid.nodes().to_vec(),
        y_plus,
        y_minus,
        m_plus,
        m_minus,
    })
}

impl AuxProcesses {
    /// `(w¹(M⁺-Y⁺) + w²(M⁻-Y⁻), w¹(M⁺-Y⁺) - w²(M⁻-Y⁻))` at node `i`.
    pub fn reconstruct(&self, params: &ModelParams, i: usize) -> Result<[f64; 2]> {
        let w = coefficients_at(params, self.nodes[i])?.weights;
        let common = w.w1 * (self.m_plus[i] - self.y_plus[i]);
        let own = w.w2 * (self.m_minus[i] - self.y_minus[i]);
        Ok([common + own, common - own])
    }
}
