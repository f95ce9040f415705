//! Tracking targets, terminal constraints, scenarios and unaffected price paths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::coefficients::{Branch, ModelParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Terminal inventory constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Terminal {
    Constant(f64),
    Random(RandomTerminal),
}

impl Default for Terminal {
    fn default() -> Self {
        Terminal::Constant(0.0)
    }
}

/// Random terminal positions. Representable in scenario files but rejected by
/// every solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RandomTerminal {
    /// Either `low` or `high`, decided by an event only revealed at `T`.
    CoinFlipAtMaturity { low: f64, high: f64 },
}

impl Terminal {
    pub fn constant(&self) -> Option<f64> {
        match self {
            Terminal::Constant(v) => Some(*v),
            Terminal::Random(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TargetKind {
    Zero,
    /// `levels[i]` applies on `[breakpoints[i], breakpoints[i+1])`; the final
    /// interval is closed. The target is zero outside the covered range.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        levels: Vec<f64>,
    },
    /// `scale · Φ((P_t - P_0)/√(σ(T - t)))`, the Bachelier delta of an
    /// at-the-money call.
    ScaledBachelierDelta { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    #[serde(flatten)]
    pub kind: TargetKind,
    #[serde(default)]
    pub terminal: Terminal,
}

impl TargetSpec {
    pub fn zero() -> Self {
        Self {
            kind: TargetKind::Zero,
            terminal: Terminal::Constant(0.0),
        }
    }

    pub fn constant(level: f64, horizon: f64, terminal: f64) -> Self {
        Self {
            kind: TargetKind::PiecewiseConstant {
                breakpoints: vec![0.0, horizon],
                levels: vec![level],
            },
            terminal: Terminal::Constant(terminal),
        }
    }

    pub fn piecewise(breakpoints: Vec<f64>, levels: Vec<f64>, terminal: f64) -> Self {
        Self {
            kind: TargetKind::PiecewiseConstant {
                breakpoints,
                levels,
            },
            terminal: Terminal::Constant(terminal),
        }
    }

    pub fn bachelier_delta(scale: f64, terminal: f64) -> Self {
        Self {
            kind: TargetKind::ScaledBachelierDelta { scale },
            terminal: Terminal::Constant(terminal),
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        match &self.kind {
            TargetKind::Zero => {}
            TargetKind::PiecewiseConstant {
                breakpoints,
                levels,
            } => {
                if breakpoints.len() < 2 || levels.len() + 1 != breakpoints.len() {
                    return Err(Error::InvalidTarget(format!(
                        "need n+1 breakpoints for n levels, got {} and {}",
                        breakpoints.len(),
                        levels.len()
                    )));
                }
                if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidTarget(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
                if breakpoints[0] < 0.0 || *breakpoints.last().unwrap() > horizon {
                    return Err(Error::InvalidTarget(format!(
                        "breakpoints must lie in [0, {horizon}]"
                    )));
                }
                if !levels.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidTarget("levels must be finite".into()));
                }
            }
            TargetKind::ScaledBachelierDelta { scale } => {
                if !scale.is_finite() {
                    return Err(Error::InvalidTarget("scale must be finite".into()));
                }
            }
        }
        match self.terminal {
            Terminal::Constant(v) if !v.is_finite() => {
                Err(Error::InvalidTarget("terminal value must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self.kind, TargetKind::ScaledBachelierDelta { .. })
    }

    /// Targets whose conditional forecast `E[ξ_u | F_t]` equals `ξ_t`.
    pub fn is_martingale(&self) -> bool {
        matches!(
            self.kind,
            TargetKind::Zero | TargetKind::ScaledBachelierDelta { .. }
        )
    }

    /// Multiple of the common Bachelier delta `Φ(·)` this target equals, for
    /// martingale targets.
    pub fn delta_scale(&self) -> Option<f64> {
        match self.kind {
            TargetKind::Zero => Some(0.0),
            TargetKind::ScaledBachelierDelta { scale } => Some(scale),
            TargetKind::PiecewiseConstant { .. } => None,
        }
    }

    /// Interior jump times of a deterministic target.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            TargetKind::PiecewiseConstant { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    /// Constant pieces `(start, end, level)` of a deterministic target.
    pub fn pieces(&self) -> Vec<(f64, f64, f64)> {
        match &self.kind {
            TargetKind::PiecewiseConstant {
                breakpoints,
                levels,
            } => breakpoints
                .windows(2)
                .zip(levels)
                .map(|(w, &l)| (w[0], w[1], l))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Right-continuous value at `t`.
    pub fn value(&self, params: &ModelParams, path: Option<&PricePath>, t: f64) -> Result<f64> {
        check_time(params, t)?;
        Ok(match &self.kind {
            TargetKind::Zero => 0.0,
            TargetKind::PiecewiseConstant {
                breakpoints,
                levels,
            } => {
                let last = *breakpoints.last().unwrap();
                if t < breakpoints[0] || t > last {
                    0.0
                } else if t == last {
                    *levels.last().unwrap()
                } else {
                    levels[breakpoints.partition_point(|&b| b <= t) - 1]
                }
            }
            TargetKind::ScaledBachelierDelta { scale } => {
                let path = path.ok_or(Error::MissingPath)?;
                scale * bachelier_delta(params, path.value_at(t), path.initial(), t)
            }
        })
    }

    /// Limit from the left at `t`; equal to [`TargetSpec::value`] except at jumps.
    pub fn left_limit(&self, params: &ModelParams, path: Option<&PricePath>, t: f64) -> Result<f64> {
        check_time(params, t)?;
        match &self.kind {
            TargetKind::PiecewiseConstant {
                breakpoints,
                levels,
            } => {
                let first = breakpoints[0];
                let last = *breakpoints.last().unwrap();
                Ok(if t <= first || t > last {
                    0.0
                } else {
                    levels[breakpoints.partition_point(|&b| b < t) - 1]
                })
            }
            _ => self.value(params, path, t),
        }
    }
}

/// `target_value` entry point.
pub fn target_value(
    spec: &TargetSpec,
    path: Option<&PricePath>,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    spec.value(params, path, t)
}

fn check_time(params: &ModelParams, t: f64) -> Result<()> {
    if (0.0..=params.horizon).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain {
            t,
            domain: format!("[0, {}]", params.horizon),
        })
    }
}

/// `Φ((p - p0)/√(σ(T - t)))`; at `t = T` the pathwise limit.
pub fn bachelier_delta(params: &ModelParams, p: f64, p0: f64, t: f64) -> f64 {
    let tau = params.horizon - t;
    if tau <= 0.0 {
        return match (p - p0).partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 1.0,
            Some(std::cmp::Ordering::Less) => 0.0,
            _ => 0.5,
        };
    }
    normal_cdf((p - p0) / (params.sigma * tau).sqrt())
}

/// Both players' initial holdings and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub params: ModelParams,
    pub x1: f64,
    pub x2: f64,
    pub target1: TargetSpec,
    pub target2: TargetSpec,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.x1.is_finite() && self.x2.is_finite()) {
            return Err(Error::InvalidTarget("initial holdings must be finite".into()));
        }
        self.target1.validate(self.params.horizon)?;
        self.target2.validate(self.params.horizon)
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let spec: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn targets(&self) -> [&TargetSpec; 2] {
        [&self.target1, &self.target2]
    }

    pub fn is_deterministic(&self) -> bool {
        self.target1.is_deterministic() && self.target2.is_deterministic()
    }

    pub fn is_martingale(&self) -> bool {
        self.target1.is_martingale() && self.target2.is_martingale()
    }

    /// Deterministic terminal constraints; random ones are rejected.
    pub fn terminals(&self) -> Result<(f64, f64)> {
        match (self.target1.terminal.constant(), self.target2.terminal.constant()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Unsupported(
                "random terminal positions are not supported by the solvers".into(),
            )),
        }
    }

    /// Interior jump times of both targets, sorted and deduplicated.
    pub fn jump_times(&self) -> Vec<f64> {
        let horizon = self.params.horizon;
        let mut times: Vec<f64> = self
            .targets()
            .iter()
            .flat_map(|t| t.breakpoints())
            .filter(|&b| b > 0.0 && b < horizon)
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        times
    }

    /// The same scenario with the players' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            params: self.params,
            x1: self.x2,
            x2: self.x1,
            target1: self.target2.clone(),
            target2: self.target1.clone(),
        }
    }

    pub fn with_params(&self, params: ModelParams) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }
}

/// One realization of the unaffected price on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Stream index this path was drawn from.
    pub seed: u64,
    pub path_index: u64,
}

impl PricePath {
    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    /// Linear interpolation between grid nodes, flat beyond the last node.
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.nodes.partition_point(|&x| x <= t);
        if idx == 0 {
            return self.values[0];
        }
        if idx >= self.nodes.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.nodes[idx - 1], self.nodes[idx]);
        let (p0, p1) = (self.values[idx - 1], self.values[idx]);
        p0 + (p1 - p0) * (t - t0) / (t1 - t0)
    }

    pub fn on_grid(&self, grid: &TimeGrid) -> bool {
        self.nodes == grid.nodes()
    }
}

/// Brownian price path with variance rate `σ` starting at `p0`, drawn from the
/// stream `(seed, path_index)`.
pub fn simulate_price_path(
    params: &ModelParams,
    grid: &TimeGrid,
    p0: f64,
    seed: u64,
    path_index: u64,
) -> PricePath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    let nodes = grid.nodes().to_vec();
    let mut values = Vec::with_capacity(nodes.len());
    values.push(p0);
    let mut p = p0;
    for w in nodes.windows(2) {
        let z: f64 = StandardNormal.sample(&mut rng);
        p += (params.sigma * (w[1] - w[0])).sqrt() * z;
        values.push(p);
    }
    PricePath {
        nodes,
        values,
        seed,
        path_index,
    }
}

/// Independent paths starting at `P_0 = 0`. Path `i` depends only on
/// `(seed, i)`, so any prefix of a larger ensemble is reproduced exactly.
pub fn simulate_price_paths(
    params: &ModelParams,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Vec<PricePath> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_price_path(params, grid, 0.0, seed, i))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AdmissibilityStatus {
    /// Conditional expectations of the terminal quantities are constant.
    AnalyticallySatisfied,
    /// Truncated bracket integrals estimated by Monte Carlo.
    Estimated { estimates: Vec<BracketEstimate>, stable: bool },
    NotVerifiable { reason: String },
}

/// Monte Carlo estimate of `E[∫₀^{T-ε} (T-s)⁻¹ d⟨M±⟩_s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEstimate {
    pub eps: f64,
    pub plus: f64,
    pub minus: f64,
    pub plus_std_err: f64,
    pub minus_std_err: f64,
}

/// Relative change between consecutive truncation levels below which the
/// estimates count as converged.
const BRACKET_STABILITY: f64 = 1e-2;

/// Checks the integrability condition on the conditional-expectation martingales
/// `M±` that makes the terminal constraints attainable.
pub fn admissibility_diagnostic(
    scenario: &ScenarioSpec,
    ensemble: &[PricePath],
    eps_levels: &[f64],
) -> Result<AdmissibilityStatus> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument("ensemble must not be empty".into()));
    }
    if scenario.terminals().is_err() {
        return Ok(AdmissibilityStatus::NotVerifiable {
            reason: "terminal position is only revealed at maturity".into(),
        });
    }
    if scenario.is_deterministic() {
        return Ok(AdmissibilityStatus::AnalyticallySatisfied);
    }
    if !scenario.is_martingale() {
        return Err(Error::Unsupported(
            "mixed deterministic and stochastic targets".into(),
        ));
    }

    // With ξ = s·Φ(Z_t), M±_t = Ξ± + Y±_t + ξ±_t G±(T-t), so
    // d⟨M±⟩_t = G±(T-t)² (s₁ ± s₂)² φ(Z_t)² / (T-t) dt.
    let params = &scenario.params;
    let s1 = scenario.target1.delta_scale().unwrap();
    let s2 = scenario.target2.delta_scale().unwrap();
    let amplitude = [(s1 + s2).powi(2), (s1 - s2).powi(2)];
    let horizon = params.horizon;

    let mut estimates = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        let cutoff = horizon - eps * horizon;
        let per_path: Vec<[f64; 2]> = ensemble
            .par_iter()
            .map(|path| {
                let mut acc = [0.0; 2];
                let density = |t: f64, p: f64| -> [f64; 2] {
                    let tau = horizon - t;
                    let z = (p - path.initial()) / (params.sigma * tau).sqrt();
                    let phi2 = normal_pdf(z).powi(2);
                    let mut out = [0.0; 2];
                    for (k, b) in Branch::BOTH.iter().enumerate() {
                        let g = params.branch(*b).ln_mass(tau).exp();
                        out[k] = amplitude[k] * g * g * phi2 / (tau * tau);
                    }
                    out
                };
                for (w, pv) in path.nodes.windows(2).zip(path.values.windows(2)) {
                    if w[1] > cutoff {
                        break;
                    }
                    let lo = density(w[0], pv[0]);
                    let hi = density(w[1], pv[1]);
                    for k in 0..2 {
                        acc[k] += 0.5 * (lo[k] + hi[k]) * (w[1] - w[0]);
                    }
                }
                acc
            })
            .collect();
        let n = per_path.len() as f64;
        let mut stats = [(0.0, 0.0); 2];
        for k in 0..2 {
            let mean = per_path.iter().map(|v| v[k]).sum::<f64>() / n;
            let var = if per_path.len() > 1 {
                per_path.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            stats[k] = (mean, (var / n).sqrt());
        }
        estimates.push(BracketEstimate {
            eps,
            plus: stats[0].0,
            minus: stats[1].0,
            plus_std_err: stats[0].1,
            minus_std_err: stats[1].1,
        });
    }
    let stable = estimates.windows(2).all(|w| {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        w[0].plus.is_finite()
            && w[1].plus.is_finite()
            && rel(w[0].plus, w[1].plus) < BRACKET_STABILITY
            && rel(w[0].minus, w[1].minus) < BRACKET_STABILITY
    });
    Ok(AdmissibilityStatus::Estimated { estimates, stable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn params(horizon: f64) -> ModelParams {
        ModelParams::new(1.0, 2.0, 1.0, horizon).unwrap()
    }

    #[test]
    fn piecewise_lookup_is_right_continuous_and_closed_at_end() {
        let p = params(10.0);
        let spec = TargetSpec::piecewise(vec![0.0, 5.0, 10.0], vec![1.0, 2.0], 2.0);
        assert_eq!(spec.value(&p, None, 0.0).unwrap(), 1.0);
        assert_eq!(spec.value(&p, None, 4.999).unwrap(), 1.0);
        assert_eq!(spec.value(&p, None, 5.0).unwrap(), 2.0);
        assert_eq!(spec.value(&p, None, 10.0).unwrap(), 2.0);
        assert_eq!(spec.left_limit(&p, None, 5.0).unwrap(), 1.0);
        assert_eq!(spec.left_limit(&p, None, 10.0).unwrap(), 2.0);
        assert!(spec.value(&p, None, 10.5).is_err());
    }

    #[test]
    fn piecewise_is_zero_outside_coverage() {
        let p = params(10.0);
        let spec = TargetSpec::piecewise(vec![2.0, 4.0], vec![3.0], 0.0);
        assert_eq!(spec.value(&p, None, 1.0).unwrap(), 0.0);
        assert_eq!(spec.value(&p, None, 3.0).unwrap(), 3.0);
        assert_eq!(spec.value(&p, None, 4.0).unwrap(), 3.0);
        assert_eq!(spec.value(&p, None, 4.5).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        let bad = [
            TargetSpec::piecewise(vec![0.0, 5.0, 5.0], vec![1.0, 2.0], 0.0),
            TargetSpec::piecewise(vec![0.0, 5.0], vec![1.0, 2.0], 0.0),
            TargetSpec::piecewise(vec![0.0, 12.0], vec![1.0], 0.0),
            TargetSpec::piecewise(vec![-1.0, 5.0], vec![1.0], 0.0),
            TargetSpec::bachelier_delta(f64::INFINITY, 0.0),
        ];
        for spec in bad {
            assert!(spec.validate(10.0).is_err(), "{spec:?}");
        }
        assert!(TargetSpec::constant(1.0, 10.0, 1.0).validate(10.0).is_ok());
    }

    #[test]
    fn zero_and_delta_values() {
        let p = params(5.0);
        assert_eq!(TargetSpec::zero().value(&p, None, 3.0).unwrap(), 0.0);
        let grid = make_grid(5.0, 10, 0, 1e-3).unwrap();
        let path = simulate_price_path(&p, &grid, 100.0, 1, 0);
        let spec = TargetSpec::bachelier_delta(0.1, 0.0);
        assert!((spec.value(&p, Some(&path), 0.0).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(spec.value(&p, None, 1.0), Err(Error::MissingPath));
    }

    #[test]
    fn delta_is_strictly_inside_scale() {
        let p = params(5.0);
        let grid = make_grid(5.0, 200, 20, 1e-6).unwrap();
        let spec = TargetSpec::bachelier_delta(2.0, 0.0);
        for i in 0..20 {
            let path = simulate_price_path(&p, &grid, 0.0, 3, i);
            for &t in grid.nodes().iter().step_by(7) {
                let v = spec.value(&p, Some(&path), t).unwrap();
                assert!(v >= 0.0 && v <= 2.0);
                if t < 4.0 {
                    assert!(v > 0.0 && v < 2.0);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let spec = ScenarioSpec {
            params: params(10.0),
            x1: 0.0,
            x2: 0.0,
            target1: TargetSpec::piecewise(vec![0.0, 5.0, 10.0], vec![1.0, 2.0], 2.0),
            target2: TargetSpec::zero(),
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"horizon_T\""));
        assert!(text.contains("\"kind\":\"PiecewiseConstant\""));
        assert_eq!(ScenarioSpec::from_json(&text).unwrap(), spec);

        let zero_default = r#"{"params":{"lambda":1,"gamma":2,"sigma":1,"horizon_T":2},
            "x1":1,"x2":0,"target1":{"kind":"Zero"},"target2":{"kind":"Zero"}}"#;
        let parsed = ScenarioSpec::from_json(zero_default).unwrap();
        assert_eq!(parsed.terminals().unwrap(), (0.0, 0.0));

        let random = r#"{"params":{"lambda":1,"gamma":2,"sigma":1,"horizon_T":2},
            "x1":1,"x2":0,"target1":{"kind":"Zero","terminal":{"kind":"CoinFlipAtMaturity","low":0,"high":1}},
            "target2":{"kind":"Zero"}}"#;
        let parsed = ScenarioSpec::from_json(random).unwrap();
        assert!(parsed.terminals().is_err());
    }

    #[test]
    fn paths_are_reproducible_and_prefix_stable() {
        let p = params(2.0);
        let grid = make_grid(2.0, 100, 10, 1e-6).unwrap();
        let a = simulate_price_paths(&p, &grid, 8, 42);
        let b = simulate_price_paths(&p, &grid, 3, 42);
        assert_eq!(&a[..3], &b[..]);
        assert_ne!(a[0].values, a[1].values);
        assert_eq!(a[0].values[0], 0.0);
        let c = simulate_price_paths(&p, &grid, 8, 43);
        assert_ne!(a[0].values, c[0].values);
    }

    #[test]
    fn path_interpolation() {
        let path = PricePath {
            nodes: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 2.0, 1.0],
            seed: 0,
            path_index: 0,
        };
        assert_eq!(path.value_at(0.5), 1.0);
        assert_eq!(path.value_at(1.5), 1.5);
        assert_eq!(path.value_at(1.0), 2.0);
        assert_eq!(path.value_at(3.0), 1.0);
    }

    #[test]
    fn admissibility_classes() {
        let p = params(2.0);
        let grid = make_grid(2.0, 50, 10, 1e-6).unwrap();
        let paths = simulate_price_paths(&p, &grid, 2, 0);
        let liq = ScenarioSpec {
            params: p,
            x1: 1.0,
            x2: 0.0,
            target1: TargetSpec::zero(),
            target2: TargetSpec::zero(),
        };
        assert_eq!(
            admissibility_diagnostic(&liq, &paths, &[1e-2]).unwrap(),
            AdmissibilityStatus::AnalyticallySatisfied
        );
        let mut jump = liq.clone();
        jump.target1.terminal = Terminal::Random(RandomTerminal::CoinFlipAtMaturity {
            low: 0.0,
            high: 1.0,
        });
        assert!(matches!(
            admissibility_diagnostic(&jump, &paths, &[1e-2]).unwrap(),
            AdmissibilityStatus::NotVerifiable { .. }
        ));
        assert!(admissibility_diagnostic(&liq, &[], &[1e-2]).is_err());
    }
}
