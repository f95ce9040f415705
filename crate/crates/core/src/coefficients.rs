//! Deterministic coefficient functions of the equilibrium.
//!
//! Both Riccati solutions share the shape `c(τ) = λ (b coth(bτ) + a)` with
//! `τ = T - t` the time to maturity. The plus branch uses
//! `a = γ/(3λ)`, `b = √δ⁺/(3λ)` and the minus branch `a = -γ/λ`, `b = √δ⁻/λ`.
//! Every quantity below (weights, kernels, propagators) is written in terms of
//! these two constants, which keeps the exponentials in ratio form and avoids
//! overflow of `sinh` for long horizons or small temporary impact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default distance from the horizon at which time-dependent evaluation stops,
/// as a fraction of `T`.
pub const DEFAULT_EPS_FRAC: f64 = 1e-9;

/// Below this variance rate the model is accepted but flagged.
const SMALL_SIGMA: f64 = 1e-6;

/// Market and horizon constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Temporary impact.
    pub lambda: f64,
    /// Permanent impact.
    pub gamma: f64,
    /// Variance rate of the unaffected price.
    pub sigma: f64,
    #[serde(rename = "horizon_T")]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamWarning {
    /// `γ = 0`: the equilibrium formulas still evaluate but the model assumes `γ > 0`.
    ZeroPermanentImpact,
    /// `σ` is positive but tiny; weights approach a degenerate limit.
    SmallVariance,
}

impl ModelParams {
    pub fn new(lambda: f64, gamma: f64, sigma: f64, horizon: f64) -> Result<Self> {
        let params = Self {
            lambda,
            gamma,
            sigma,
            horizon,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.lambda, self.gamma, self.sigma, self.horizon]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        let mut out = Vec::new();
        if self.gamma == 0.0 {
            out.push(ParamWarning::ZeroPermanentImpact);
        }
        if self.sigma < SMALL_SIGMA {
            out.push(ParamWarning::SmallVariance);
        }
        out
    }

    pub fn delta_plus(&self) -> f64 {
        self.gamma * self.gamma + 6.0 * self.lambda * self.sigma
    }

    pub fn delta_minus(&self) -> f64 {
        self.gamma * self.gamma + 2.0 * self.lambda * self.sigma
    }

    pub fn branch(&self, branch: Branch) -> BranchCoeffs {
        match branch {
            Branch::Plus => BranchCoeffs {
                lambda: self.lambda,
                a: self.gamma / (3.0 * self.lambda),
                b: self.delta_plus().sqrt() / (3.0 * self.lambda),
                scale: 2.0 * self.sigma / self.delta_plus().sqrt(),
            },
            Branch::Minus => BranchCoeffs {
                lambda: self.lambda,
                a: -self.gamma / self.lambda,
                b: self.delta_minus().sqrt() / self.lambda,
                scale: 2.0 * self.sigma / self.delta_minus().sqrt(),
            },
        }
    }

    /// Time to maturity, rejecting `t` outside `[0, T)`.
    fn time_to_maturity(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                t,
                domain: format!("[0, {})", self.horizon),
            });
        }
        if t >= self.horizon {
            return Err(Error::Singularity {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.horizon - t)
    }
}

/// Sum (`Plus`) and difference (`Minus`) coordinates. `K¹` is the plus kernel
/// and `K²` the minus kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];
}

/// Constants of one Riccati branch, `c(τ) = λ (b coth(bτ) + a)`.
///
/// `scale` is the prefactor of the kernel density
/// `g(τ) = scale · e^{-aτ} sinh(bτ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCoeffs {
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub scale: f64,
}

impl BranchCoeffs {
    /// Riccati solution at time to maturity `tau > 0`.
    pub fn c(&self, tau: f64) -> f64 {
        self.lambda * (self.b / (self.b * tau).tanh() + self.a)
    }

    /// `exp(-∫ c/λ)` between times to maturity `tau_from ≥ tau_to > 0`.
    pub fn propagator(&self, tau_from: f64, tau_to: f64) -> f64 {
        let elapsed = tau_from - tau_to;
        let ratio = (-expm1(-2.0 * self.b * tau_to)) / (-expm1(-2.0 * self.b * tau_from));
        ((-self.a - self.b) * elapsed).exp() * ratio
    }

    /// `λ b e^{aτ} / sinh(bτ)`; dividing by `c⁺ + c⁻` gives `w¹` or `w²`.
    fn weight_numerator(&self, tau: f64) -> f64 {
        2.0 * self.lambda * self.b * ((self.a - self.b) * tau).exp()
            / (-expm1(-2.0 * self.b * tau))
    }

    fn ln_weight_numerator(&self, tau: f64) -> f64 {
        (2.0 * self.lambda * self.b).ln() + (self.a - self.b) * tau
            - (-expm1(-2.0 * self.b * tau)).ln()
    }

    /// `c(τ)` minus the weight numerator, free of cancellation as `τ → 0`.
    fn kernel_weight_numerator(&self, tau: f64) -> f64 {
        let x = self.b * tau;
        if x > 0.5 {
            return self.c(tau) - self.weight_numerator(tau);
        }
        let y = self.a * tau;
        // b(cosh x - 1) - b(eʸ - 1 - y) + a(sinh x - x), all over sinh x
        let cosh_m1 = 2.0 * (0.5 * x).sinh().powi(2);
        let numer = self.b * cosh_m1 - self.b * y * y * expm1_excess(y) + self.a * sinh_excess(x);
        self.lambda * numer / x.sinh()
    }

    /// Natural log of the kernel density `g(τ)`.
    pub fn ln_density(&self, tau: f64) -> f64 {
        self.scale.ln() - self.a * tau + ln_sinh(self.b * tau)
    }

    /// Natural log of `G(τ) = ∫₀^τ g`, the closed-form kernel antiderivative.
    /// Returns `-∞` at `τ = 0`.
    pub fn ln_mass(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return f64::NEG_INFINITY;
        }
        // G(τ) = scale · τ²/2 · (k E(kτ) + m E(-mτ)) with k = b - a, m = b + a;
        // both summands are positive so there is no cancellation.
        let k = self.b - self.a;
        let m = self.b + self.a;
        let kt = k * tau;
        let base = self.scale.ln() + (0.5 * tau * tau).ln();
        if kt <= 30.0 {
            base + (k * expm1_excess(kt) + m * expm1_excess(-m * tau)).ln()
        } else {
            // k E(kτ) = e^{kτ} · k (1 - (1 + kτ) e^{-kτ}) / (kτ)²
            let damp = (-kt).exp();
            let lead = k * (1.0 - (1.0 + kt) * damp) / (kt * kt);
            base + kt + (lead + damp * m * expm1_excess(-m * tau)).ln()
        }
    }

    /// `∫ g` over times to maturity in `[tau_lo, tau_hi]`, normalized by `G(tau_ref)`.
    pub fn mass_ratio(&self, tau_ref: f64, tau_lo: f64, tau_hi: f64) -> f64 {
        let denom = self.ln_mass(tau_ref);
        (self.ln_mass(tau_hi) - denom).exp() - (self.ln_mass(tau_lo) - denom).exp()
    }
}

/// `(e^x - 1 - x) / x²`, accurate for all `x`.
fn expm1_excess(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // Taylor series Σ xⁿ/(n+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for n in 1..12 {
            term *= x / (n as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (expm1(x) - x) / (x * x)
    }
}

/// `sinh(x) - x` for `|x| ≤ 1/2`.
fn sinh_excess(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x * x2 / 6.0;
    let mut sum = term;
    for n in 2..10 {
        term *= x2 / ((2 * n) as f64 * (2 * n + 1) as f64);
        sum += term;
    }
    sum
}

fn expm1(x: f64) -> f64 {
    x.exp_m1()
}

/// `ln sinh(x)` for `x > 0` without overflow.
fn ln_sinh(x: f64) -> f64 {
    x + (-expm1(-2.0 * x) / 2.0).ln()
}

/// Weight functions at one time point. `w1..w4` sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
}

impl Weights {
    /// Limits as `t ↑ T`.
    pub const TERMINAL: Weights = Weights {
        w1: 0.5,
        w2: 0.5,
        w3: 0.0,
        w4: 0.0,
        w5: 0.0,
    };

    pub fn as_array(&self) -> [f64; 5] {
        [self.w1, self.w2, self.w3, self.w4, self.w5]
    }
}

/// All coefficients at one time point `t < T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEval {
    pub t: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub weights: Weights,
    /// `(c⁺ + c⁻)/(2λ)`, the mean-reversion speed of the feedback law.
    pub urgency: f64,
}

pub fn delta_constants(params: &ModelParams) -> (f64, f64) {
    (params.delta_plus(), params.delta_minus())
}

/// `(c⁺_t, c⁻_t)` for `0 ≤ t < T`.
pub fn c_functions(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let tau = params.time_to_maturity(t)?;
    Ok((
        params.branch(Branch::Plus).c(tau),
        params.branch(Branch::Minus).c(tau),
    ))
}

pub fn coefficients_at(params: &ModelParams, t: f64) -> Result<CoefficientEval> {
    let tau = params.time_to_maturity(t)?;
    let plus = params.branch(Branch::Plus);
    let minus = params.branch(Branch::Minus);
    let c_plus = plus.c(tau);
    let c_minus = minus.c(tau);
    let total = c_plus + c_minus;
    let w1 = plus.weight_numerator(tau) / total;
    let w2 = minus.weight_numerator(tau) / total;
    let weights = Weights {
        w1,
        w2,
        w3: plus.kernel_weight_numerator(tau) / total,
        w4: minus.kernel_weight_numerator(tau) / total,
        w5: (c_plus - c_minus) / total,
    };
    Ok(CoefficientEval {
        t,
        c_plus,
        c_minus,
        weights,
        urgency: total / (2.0 * params.lambda),
    })
}

/// Weights on `[0, T]`; at `t = T` the analytic limits are returned.
pub fn weights_at(params: &ModelParams, t: f64) -> Result<Weights> {
    if t == params.horizon {
        return Ok(Weights::TERMINAL);
    }
    coefficients_at(params, t).map(|c| c.weights)
}

/// Kernel density `K(t, u)` for `0 ≤ t ≤ u < T`.
///
/// Evaluated in normalized form `g(T-u) / G(T-t)`, which equals the weight-ratio
/// form `(w¹/w³) g(T-u)` (resp. `(w²/w⁴) g(T-u)`) but stays accurate near `T`.
pub fn kernel(params: &ModelParams, branch: Branch, t: f64, u: f64) -> Result<f64> {
    let tau_t = params.time_to_maturity(t)?;
    if !(u >= t) {
        return Err(Error::Domain {
            t: u,
            domain: format!("[{t}, {})", params.horizon),
        });
    }
    let tau_u = params.time_to_maturity(u)?;
    let coeffs = params.branch(branch);
    Ok((coeffs.ln_density(tau_u) - coeffs.ln_mass(tau_t)).exp())
}

/// Mass of `K¹(t, ·)` and `K²(t, ·)` over `[t, T]`, assembled from the weight
/// ratios and the closed-form antiderivative of the kernel density. Both are one
/// whenever the weights and the kernels are mutually consistent.
pub fn kernel_mass(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let tau = params.time_to_maturity(t)?;
    let mass = |branch: Branch| {
        let c = params.branch(branch);
        // w¹/w³ (resp. w²/w⁴) in log form, since w² can underflow for large τ.
        (c.ln_weight_numerator(tau) - c.kernel_weight_numerator(tau).ln() + c.ln_mass(tau)).exp()
    };
    Ok((mass(Branch::Plus), mass(Branch::Minus)))
}

/// `exp(-∫ₛᵗ c_u/λ du)` for `0 ≤ s ≤ t < T`.
pub fn propagator(params: &ModelParams, branch: Branch, s: f64, t: f64) -> Result<f64> {
    let tau_s = params.time_to_maturity(s)?;
    let tau_t = params.time_to_maturity(t)?;
    if s > t {
        return Err(Error::Domain {
            t: s,
            domain: format!("[0, {t}]"),
        });
    }
    Ok(params.branch(branch).propagator(tau_s, tau_t))
}

/// Central-difference derivative of `c±` at `t` minus the Riccati right-hand side.
pub fn riccati_residual(params: &ModelParams, t: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if t - h < 0.0 || t + h >= params.horizon {
        return Err(Error::Domain {
            t,
            domain: format!("[{h}, {} - {h})", params.horizon),
        });
    }
    let (cp_hi, cm_hi) = c_functions(params, t + h)?;
    let (cp_lo, cm_lo) = c_functions(params, t - h)?;
    let (cp, cm) = c_functions(params, t)?;
    let rhs = riccati_rhs(params, cp, cm);
    Ok((
        (cp_hi - cp_lo) / (2.0 * h) - rhs.0,
        (cm_hi - cm_lo) / (2.0 * h) - rhs.1,
    ))
}

/// Right-hand sides `(c⁺)' ` and `(c⁻)'` of the Riccati equations in forward time.
pub fn riccati_rhs(params: &ModelParams, c_plus: f64, c_minus: f64) -> (f64, f64) {
    let ModelParams {
        lambda,
        gamma,
        sigma,
        ..
    } = *params;
    (
        c_plus * c_plus / lambda - 2.0 * gamma * c_plus / (3.0 * lambda) - 2.0 * sigma / 3.0,
        c_minus * c_minus / lambda + 2.0 * gamma * c_minus / lambda - 2.0 * sigma,
    )
}
