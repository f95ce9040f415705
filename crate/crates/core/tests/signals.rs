mod common;

use common::{brute_force_martingale_signal, integrate, kernel_density_oracle};
use tracking_game::targets::simulate_price_path;
use tracking_game::*;

/// `ξ̂` for deterministic targets with the kernel averages done by quadrature.
fn quadrature_signal(s: &ScenarioSpec, t: f64) -> [f64; 2] {
    let p = &s.params;
    let w = weights_at(p, t).unwrap();
    let (xi1_t, xi2_t) = s.terminals().unwrap();
    let target = |k: usize, u: f64| s.targets()[k].value(p, None, u).unwrap();
    let avg = |branch: Branch, sign: f64| {
        let mut cuts: Vec<f64> = s.jump_times().into_iter().filter(|&j| j > t).collect();
        cuts.insert(0, t);
        cuts.push(p.horizon);
        let density = |u: f64| kernel_density_oracle(p, branch, p.horizon - u);
        let mass: f64 = cuts.windows(2).map(|c| integrate(&density, c[0], c[1], 1e-14)).sum();
        let num: f64 = cuts
            .windows(2)
            .map(|c| {
                integrate(
                    &|u| density(u) * (target(0, u) + sign * target(1, u)),
                    c[0],
                    c[1],
                    1e-14,
                )
            })
            .sum();
        num / mass
    };
    let common = w.w1 * (xi1_t + xi2_t) + w.w3 * avg(Branch::Plus, 1.0);
    let own = w.w2 * (xi1_t - xi2_t) + w.w4 * avg(Branch::Minus, -1.0);
    [common + own, common - own]
}

#[test]
fn deterministic_signals_match_quadrature() {
    for name in ["buying-schedule", "buying-schedule-elastic", "constant-targets"] {
        let s = builtin(name).unwrap();
        let model = SignalModel::deterministic(&s).unwrap();
        for t in [0.0, 2.5, 4.999, 5.0, 7.0, 9.9] {
            let got = model.eval(t).unwrap();
            let want = quadrature_signal(&s, t);
            for k in 0..2 {
                assert!((got[k] - want[k]).abs() < 1e-9, "{name} t={t}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn signal_tends_to_terminal_targets() {
    let s = builtin("buying-schedule").unwrap();
    let model = SignalModel::deterministic(&s).unwrap();
    let end = model.eval(10.0 - 1e-9).unwrap();
    assert!((end[0] - 2.0).abs() < 1e-6 && end[1].abs() < 1e-6, "{end:?}");
    assert_eq!(model.eval(10.0).unwrap(), [2.0, 0.0]);
}

#[test]
fn martingale_signal_matches_brute_force() {
    let s = builtin("delta-hedge-pair-elastic").unwrap();
    let p = s.params;
    let grid = make_grid(p.horizon, 100, 20, 1e-9 * p.horizon).unwrap();
    let scales = (s.target1.delta_scale().unwrap(), s.target2.delta_scale().unwrap());
    for idx in 0..5 {
        let path = simulate_price_path(&p, &grid, 0.0, 21, idx);
        let signal = signal_martingale(&s, &path, &grid).unwrap();
        for i in [0, 37, 99] {
            let t = grid.nodes()[i];
            let want = brute_force_martingale_signal(&p, s.terminals().unwrap(), scales, path.values[i], t);
            assert!((signal.xi_hat_1[i] - want[0]).abs() < 1e-10);
            assert!((signal.xi_hat_2[i] - want[1]).abs() < 1e-10);
        }
    }
}

#[test]
fn auxiliary_processes_reconstruct_martingale_signal() {
    let s = builtin("delta-hedge-pair").unwrap();
    let p = s.params;
    let grid = make_grid(p.horizon, 2000, 200, 1e-9 * p.horizon).unwrap();
    let path = simulate_price_path(&p, &grid, 0.0, 4, 0);
    let signal = signal_martingale(&s, &path, &grid).unwrap();
    let aux = aux_processes(&s, Some(&path), &grid).unwrap();
    let mut worst: f64 = 0.0;
    for i in (0..grid.len() - 1).step_by(7) {
        if grid.nodes()[i] > 0.99 * p.horizon {
            break;
        }
        let r = aux.reconstruct(&p, i).unwrap();
        worst = worst
            .max((r[0] - signal.xi_hat_1[i]).abs())
            .max((r[1] - signal.xi_hat_2[i]).abs());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn sampling_checks_the_grid() {
    let s = builtin("delta-hedge").unwrap();
    let grid = make_grid(5.0, 100, 10, 1e-8).unwrap();
    let other = make_grid(5.0, 120, 10, 1e-8).unwrap();
    let path = simulate_price_path(&s.params, &other, 0.0, 0, 0);
    assert!(signal_martingale(&s, &path, &grid).is_err());
    assert!(SignalModel::for_scenario(&s, None).is_err());
}

#[test]
fn zero_targets_give_zero_signal() {
    let s = builtin("liquidation-plastic").unwrap();
    let grid = make_grid(2.0, 200, 20, 2e-9).unwrap();
    let sig = signal_deterministic(&s, &grid).unwrap();
    assert!(sig.xi_hat_1.iter().chain(&sig.xi_hat_2).all(|&v| v == 0.0));
}
