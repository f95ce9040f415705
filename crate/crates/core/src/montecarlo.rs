//! Ensemble runs over simulated price paths and regime sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{coefficients_at, ModelParams};
use crate::equilibrium::{solve, solve_closed_form, EquilibriumSolution, Method};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::signals::SignalModel;
use crate::targets::{simulate_price_path, PricePath, ScenarioSpec};

pub const BAND_QUANTILES: (f64, f64) = (0.1, 0.9);
pub const REPORT_POINTS: usize = 101;
const CHUNK: usize = 32;

/// Running mean and sum of squared deviations per node.
#[derive(Debug, Clone)]
struct Moments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(values) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.n += other.n;
    }

    fn std_err(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.n as f64;
        self.m2
            .iter()
            .map(|s| (s.max(0.0) / (n - 1.0) / n).sqrt())
            .collect()
    }
}

/// Ensemble statistics of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    /// Mean over paths at every grid node.
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Nearest-rank quantile band at the report nodes.
    pub band_lower: Vec<f64>,
    pub band_upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_paths: usize,
    pub seed: u64,
    pub nodes: Vec<f64>,
    /// Grid indices at which the bands are reported.
    pub report_indices: Vec<usize>,
    /// Band definition; bands are a summary added on top of the model output.
    pub band_note: String,
    pub band_quantiles: (f64, f64),
    pub x1: PathStats,
    pub x2: PathStats,
    pub alpha1: PathStats,
    pub alpha2: PathStats,
    pub xi_hat_1: PathStats,
    pub xi_hat_2: PathStats,
    /// Mean raw targets `ξ¹`, `ξ²` per node.
    pub target_mean: [Vec<f64>; 2],
    /// Gaps of both players pooled over all paths.
    pub terminal_gaps: GapSummary,
    /// Largest gap per player.
    pub max_gap_per_player: [f64; 2],
}

const QUANTITIES: usize = 8;

struct ChunkResult {
    moments: Vec<Moments>,
    /// Per path: quantity × report node samples.
    samples: Vec<[Vec<f64>; 6]>,
    gaps: Vec<[f64; 2]>,
}

fn report_indices(len: usize) -> Vec<usize> {
    let points = REPORT_POINTS.min(len);
    let mut idx: Vec<usize> = (0..points)
        .map(|i| ((i as f64) * (len - 1) as f64 / (points - 1).max(1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

/// Pathwise solution for path `index` of the ensemble `seed`.
pub fn solve_path(
    scenario: &ScenarioSpec,
    grid: &TimeGrid,
    seed: u64,
    index: u64,
) -> Result<(EquilibriumSolution, PricePath)> {
    let path = simulate_price_path(&scenario.params, grid, 0.0, seed, index);
    let model = SignalModel::martingale(scenario, &path)?;
    Ok((solve_closed_form(&model, grid)?, path))
}

fn target_values(scenario: &ScenarioSpec, path: &PricePath) -> Result<[Vec<f64>; 2]> {
    let p = &scenario.params;
    let eval = |k: usize| {
        path.nodes
            .iter()
            .map(|&t| scenario.targets()[k].value(p, Some(path), t))
            .collect::<Result<Vec<_>>>()
    };
    Ok([eval(0)?, eval(1)?])
}

/// Solves the equilibrium on `n_paths` simulated price paths and reduces the
/// results. Output depends only on `(scenario, n_paths, seed, grid)`.
pub fn run_ensemble(
    scenario: &ScenarioSpec,
    n_paths: usize,
    seed: u64,
    grid: &TimeGrid,
) -> Result<EnsembleResult> {
    scenario.validate()?;
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be positive".into()));
    }
    if !scenario.is_martingale() {
        return Err(Error::Unsupported(
            "ensembles need ScaledBachelierDelta or Zero targets".into(),
        ));
    }
    let len = grid.len();
    let report = report_indices(len);
    let chunks: Vec<(usize, usize)> = (0..n_paths)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(n_paths)))
        .collect();

    let results = chunks
        .par_iter()
        .map(|&(start, end)| -> Result<ChunkResult> {
            let mut out = ChunkResult {
                moments: vec![Moments::new(len); QUANTITIES],
                samples: Vec::with_capacity(end - start),
                gaps: Vec::with_capacity(end - start),
            };
            for index in start..end {
                let (sol, path) = solve_path(scenario, grid, seed, index as u64)?;
                let targets = target_values(scenario, &path)?;
                let series: [&[f64]; QUANTITIES] = [
                    &sol.x1,
                    &sol.x2,
                    &sol.alpha1,
                    &sol.alpha2,
                    &sol.signal.xi_hat_1,
                    &sol.signal.xi_hat_2,
                    &targets[0],
                    &targets[1],
                ];
                for (m, s) in out.moments.iter_mut().zip(series) {
                    m.push(s);
                }
                out.samples
                    .push([0, 1, 2, 3, 4, 5].map(|q| report.iter().map(|&i| series[q][i]).collect()));
                out.gaps.push(sol.terminal_gaps);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    // sequential merge in chunk order keeps the result independent of scheduling
    let mut moments = vec![Moments::new(len); QUANTITIES];
    let mut samples = Vec::with_capacity(n_paths);
    let mut gaps = Vec::with_capacity(n_paths);
    for chunk in results {
        for (m, c) in moments.iter_mut().zip(&chunk.moments) {
            m.merge(c);
        }
        samples.extend(chunk.samples);
        gaps.extend(chunk.gaps);
    }

    let stats = |q: usize| {
        let (lower, upper): (Vec<f64>, Vec<f64>) = (0..report.len())
            .map(|r| {
                let mut v: Vec<f64> = samples.iter().map(|s| s[q][r]).collect();
                v.sort_by(f64::total_cmp);
                (
                    nearest_rank(&v, BAND_QUANTILES.0),
                    nearest_rank(&v, BAND_QUANTILES.1),
                )
            })
            .unzip();
        PathStats {
            mean: moments[q].mean.clone(),
            std_err: moments[q].std_err(),
            band_lower: lower,
            band_upper: upper,
        }
    };

    let mut pooled: Vec<f64> = gaps.iter().flat_map(|g| g.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    let terminal_gaps = GapSummary {
        max: *pooled.last().unwrap(),
        mean: pooled.iter().sum::<f64>() / pooled.len() as f64,
        median: nearest_rank(&pooled, 0.5),
        q90: nearest_rank(&pooled, 0.9),
        q99: nearest_rank(&pooled, 0.99),
    };
    let max_gap_per_player = [0, 1].map(|i| gaps.iter().map(|g| g[i]).fold(0.0, f64::max));

    Ok(EnsembleResult {
        n_paths,
        seed,
        nodes: grid.nodes().to_vec(),
        band_note: format!(
            "nearest-rank {}%/{}% quantile band across paths",
            BAND_QUANTILES.0 * 100.0,
            BAND_QUANTILES.1 * 100.0
        ),
        band_quantiles: BAND_QUANTILES,
        x1: stats(0),
        x2: stats(1),
        alpha1: stats(2),
        alpha2: stats(3),
        xi_hat_1: stats(4),
        xi_hat_2: stats(5),
        target_mean: [moments[6].mean.clone(), moments[7].mean.clone()],
        report_indices: report,
        terminal_gaps,
        max_gap_per_player,
    })
}

/// Nearest-rank quantile of sorted data.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub lambda: f64,
    pub w5_at_0: f64,
    /// `(t, sign(w³ - w⁴))` at `0, T/4, T/2, 3T/4`.
    pub w3_minus_w4_signs: Vec<(f64, i8)>,
    pub opponent_min: f64,
    pub opponent_min_t: f64,
    pub opponent_max: f64,
    pub opponent_max_t: f64,
    pub opponent_mid: f64,
    /// Opponent inventory drops below zero.
    pub predation: bool,
    /// Opponent inventory positive at mid-horizon.
    pub cooperation: bool,
}

const FLAG_TOL: f64 = 1e-9;

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Phenomenology of player two's inventory over a `(γ, λ)` grid. The template's
/// horizon and `σ` are kept; deterministic templates only.
pub fn regime_sweep(
    template: &ScenarioSpec,
    gammas: &[f64],
    lambdas: &[f64],
    grid: &TimeGrid,
) -> Result<Vec<SweepRow>> {
    if gammas.is_empty() || lambdas.is_empty() {
        return Err(Error::InvalidArgument("γ and λ lists must be nonempty".into()));
    }
    let horizon = template.params.horizon;
    let mut rows = Vec::with_capacity(gammas.len() * lambdas.len());
    for &gamma in gammas {
        for &lambda in lambdas {
            let params = ModelParams::new(lambda, gamma, template.params.sigma, horizon)?;
            let scenario = template.with_params(params);
            let sol = solve(&scenario, None, grid, Method::ClosedForm)?;
            let nodes = grid.nodes();
            let x2 = &sol.x2;
            let (imin, imax) = (0..x2.len()).fold((0, 0), |(lo, hi), i| {
                (
                    if x2[i] < x2[lo] { i } else { lo },
                    if x2[i] > x2[hi] { i } else { hi },
                )
            });
            let mid = x2[grid.nearest(0.5 * horizon)];
            let w3_minus_w4_signs = [0.0, 0.25, 0.5, 0.75]
                .iter()
                .map(|f| {
                    let t = f * horizon;
                    let w = coefficients_at(&params, t)?.weights;
                    Ok((t, sign(w.w3 - w.w4)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(SweepRow {
                gamma,
                lambda,
                w5_at_0: coefficients_at(&params, 0.0)?.weights.w5,
                w3_minus_w4_signs,
                opponent_min: x2[imin],
                opponent_min_t: nodes[imin],
                opponent_max: x2[imax],
                opponent_max_t: nodes[imax],
                opponent_mid: mid,
                predation: x2[imin] < -FLAG_TOL,
                cooperation: mid > FLAG_TOL,
            });
        }
    }
    Ok(rows)
}

/// `γ` at which `w⁵(0)` changes sign, by bisection on `[lo, hi]`.
pub fn w5_sign_flip_gamma(lambda: f64, sigma: f64, horizon: f64, lo: f64, hi: f64) -> Result<f64> {
    let w5 = |g: f64| -> Result<f64> {
        Ok(coefficients_at(&ModelParams::new(lambda, g, sigma, horizon)?, 0.0)?
            .weights
            .w5)
    };
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (w5(lo)?, w5(hi)?);
    if sign(flo) == sign(fhi) {
        return Err(Error::InvalidArgument(format!(
            "w5(0) does not change sign on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sign(w5(mid)?) == sign(flo) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
