//! Equilibrium trading strategies for two agents tracking stochastic targets
//! under linear price impact.

pub mod coefficients;
pub mod equilibrium;
pub mod error;
pub mod grid;
pub mod montecarlo;
pub mod quadrature;
pub mod scenarios;
pub mod signals;
pub mod targets;
pub mod verification;

pub use coefficients::{
    coefficients_at, kernel, kernel_mass, propagator, riccati_residual, weights_at, Branch,
    CoefficientEval, ModelParams, ParamWarning, Weights,
};
pub use error::{Error, Result};
pub use grid::{make_grid, GridSpec, TimeGrid};
pub use signals::{aux_processes, signal_deterministic, signal_martingale, SignalModel, SignalPath};
pub use targets::{PricePath, ScenarioSpec, TargetKind, TargetSpec, Terminal};
pub use equilibrium::{
    scenario_grid, single_player_liquidation, solve, solve_closed_form, solve_ode,
    EquilibriumSolution, Method, StepperOpts,
};
pub use verification::{
    cost_functional, fbsde_residual, gateaux_derivative, nash_deviation_test, own_impact_identity,
    run_verification, Check, Perturbation, Player, VerificationReport, VerifyOpts,
};
pub use montecarlo::{regime_sweep, run_ensemble, EnsembleResult, SweepRow};
pub use scenarios::{builtin, builtins, BUILTIN_NAMES};
