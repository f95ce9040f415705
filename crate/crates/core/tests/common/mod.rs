//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use tracking_game::coefficients::{kernel, weights_at, Branch, ModelParams};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || err <= 1e-15 * v.abs() || depth >= 30 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Riccati solution at time to maturity `tau`, by RK4 in `ln τ` started from the
/// Laurent expansion `λ/τ + A + Bτ` at a tiny `τ₀`.
///
/// In `τ` the equations read
/// `dc⁺/dτ = -(c⁺)²/λ + 2γc⁺/(3λ) + 2σ/3` and `dc⁻/dτ = -(c⁻)²/λ - 2γc⁻/λ + 2σ`.
pub fn riccati_oracle(p: &ModelParams, branch: Branch, tau: f64) -> f64 {
    let ModelParams {
        lambda: l,
        gamma: g,
        sigma: s,
        ..
    } = *p;
    let (lin, konst, a, b) = match branch {
        Branch::Plus => (2.0 * g / (3.0 * l), 2.0 * s / 3.0, g / 3.0, g * g / (27.0 * l) + 2.0 * s / 9.0),
        Branch::Minus => (-2.0 * g / l, 2.0 * s, -g, g * g / (3.0 * l) + 2.0 * s / 3.0),
    };
    let tau0 = 1e-6f64.min(0.5 * tau);
    let rhs = |lt: f64, c: f64| {
        let t = lt.exp();
        t * (-c * c / l + lin * c + konst)
    };
    let (start, end) = (tau0.ln(), tau.ln());
    let n = ((end - start) / 2e-3).ceil().max(1.0) as usize;
    let h = (end - start) / n as f64;
    let mut c = l / tau0 + a + b * tau0;
    let mut x = start;
    for _ in 0..n {
        let k1 = rhs(x, c);
        let k2 = rhs(x + 0.5 * h, c + 0.5 * h * k1);
        let k3 = rhs(x + 0.5 * h, c + 0.5 * h * k2);
        let k4 = rhs(x + h, c + h * k3);
        c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        x += h;
    }
    c
}

/// Single-agent liquidation by RK4 on `dX = -κ coth(κ(T-t)) X dt`.
pub fn single_player_oracle(sigma: f64, lambda: f64, horizon: f64, x0: f64, t: f64) -> f64 {
    let kappa = (sigma / lambda).sqrt();
    let f = |s: f64, x: f64| -kappa / (kappa * (horizon - s)).tanh() * x;
    let n = (t / 1e-4).ceil() as usize;
    let h = t / n as f64;
    let mut x = x0;
    for i in 0..n {
        let s = i as f64 * h;
        let k1 = f(s, x);
        let k2 = f(s + 0.5 * h, x + 0.5 * h * k1);
        let k3 = f(s + 0.5 * h, x + 0.5 * h * k2);
        let k4 = f(s + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

/// `∫ₜᵀ K(t, u) du` by adaptive quadrature of the kernel density.
pub fn kernel_mass_oracle(p: &ModelParams, branch: Branch, t: f64) -> f64 {
    integrate(
        &|u| {
            if u >= p.horizon {
                0.0
            } else {
                kernel(p, branch, t, u).unwrap()
            }
        },
        t,
        p.horizon,
        1e-13,
    )
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn sup_dev(a: &[f64], b: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (x, y))| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Unnormalized kernel density `e^{-aτ} sinh(bτ)` with the branch constants
/// written out from the model parameters.
pub fn kernel_density_oracle(p: &ModelParams, branch: Branch, tau: f64) -> f64 {
    let (a, b) = match branch {
        Branch::Plus => (
            p.gamma / (3.0 * p.lambda),
            (p.gamma * p.gamma + 6.0 * p.lambda * p.sigma).sqrt() / (3.0 * p.lambda),
        ),
        Branch::Minus => (
            -p.gamma / p.lambda,
            (p.gamma * p.gamma + 2.0 * p.lambda * p.sigma).sqrt() / p.lambda,
        ),
    };
    (-a * tau).exp() * (b * tau).sinh()
}

/// `E[Φ((P_u - P₀)/√(σ(T-u))) | P_t = p]` by quadrature over the Gaussian increment.
pub fn conditional_delta(p: &ModelParams, dp: f64, t: f64, u: f64) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let n = Normal::new(0.0, 1.0).unwrap();
    let spread = (p.sigma * (u - t)).sqrt();
    let scale = (p.sigma * (p.horizon - u)).sqrt();
    if spread == 0.0 {
        return n.cdf(dp / scale);
    }
    integrate(&|z| n.pdf(z) * n.cdf((dp + spread * z) / scale), -9.0, 9.0, 1e-13)
}

/// Signal of a pair of scaled Bachelier-delta targets at `t`, with the kernel
/// averages of the conditional target expectations computed by nested quadrature.
pub fn brute_force_martingale_signal(
    p: &ModelParams,
    terminals: (f64, f64),
    scales: (f64, f64),
    dp: f64,
    t: f64,
) -> [f64; 2] {
    let w = weights_at(p, t).unwrap();
    let avg = |branch: Branch| {
        let tau_t = p.horizon - t;
        let mass = integrate(&|s| kernel_density_oracle(p, branch, s), 0.0, tau_t, 1e-15);
        let num = integrate(
            &|u| kernel_density_oracle(p, branch, p.horizon - u) * conditional_delta(p, dp, t, u),
            t,
            p.horizon,
            1e-14 * mass,
        );
        num / mass
    };
    let avg_plus = avg(Branch::Plus);
    let avg_minus = avg(Branch::Minus);
    let plus = terminals.0 + terminals.1;
    let minus = terminals.0 - terminals.1;
    let common = w.w1 * plus + w.w3 * (scales.0 + scales.1) * avg_plus;
    let own = w.w2 * minus + w.w4 * (scales.0 - scales.1) * avg_minus;
    [common + own, common - own]
}
