use serde::Serialize;
use serde_json::json;
use tracking_game::montecarlo::REPORT_POINTS;
use tracking_game::targets::simulate_price_path;
use tracking_game::verification::{run_verification, VerifyOpts};
use tracking_game::{
    coefficients_at, regime_sweep, run_ensemble, solve, EquilibriumSolution, Method, ScenarioSpec,
    TimeGrid,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{fmt, write_json, Table};

pub const COEFF_HEADER: [&str; 9] = ["t", "c_plus", "c_minus", "w1", "w2", "w3", "w4", "w5", "urgency"];

fn coeff_table(scenario: &ScenarioSpec, grid: &TimeGrid) -> Result<Table> {
    let mut table = Table::new(&COEFF_HEADER);
    for &t in grid.nodes() {
        let c = coefficients_at(&scenario.params, t)?;
        let w = c.weights;
        table.push_numbers(&[t, c.c_plus, c.c_minus, w.w1, w.w2, w.w3, w.w4, w.w5, c.urgency]);
    }
    Ok(table)
}

pub fn coeffs(cfg: &RunConfig) -> Result<()> {
    let scenario = cfg.resolve_scenario()?;
    let grid = cfg.grid(&scenario)?;
    cfg.prepare_out()?;
    coeff_table(&scenario, &grid)?.write(&cfg.out_file("coeffs.csv"))
}

fn player_table(cfg: &RunConfig, sol: &EquilibriumSolution, player: usize) -> Result<Table> {
    let mut header = vec!["t"];
    if cfg.outputs.paths {
        header.push("x");
    }
    if cfg.outputs.rates {
        header.push("alpha");
    }
    if cfg.outputs.signals {
        header.extend(["xi_hat", "xi_hat_minus_w5_x_opp"]);
    }
    let xi_hat = [&sol.signal.xi_hat_1, &sol.signal.xi_hat_2][player];
    let opp = sol.holdings(1 - player);
    let mut table = Table::new(&header);
    for (i, &t) in sol.nodes().iter().enumerate() {
        let mut row = vec![t];
        if cfg.outputs.paths {
            row.push(sol.holdings(player)[i]);
        }
        if cfg.outputs.rates {
            row.push(sol.rates(player)[i]);
        }
        if cfg.outputs.signals {
            let w5 = coefficients_at(&sol.params, t)?.weights.w5;
            row.extend([xi_hat[i], xi_hat[i] - w5 * opp[i]]);
        }
        table.push_numbers(&row);
    }
    Ok(table)
}

fn method_agreement(a: &EquilibriumSolution, b: &EquilibriumSolution) -> f64 {
    let cutoff = 0.99 * a.params.horizon;
    (0..a.grid.len())
        .filter(|&i| a.nodes()[i] <= cutoff)
        .map(|i| (a.x1[i] - b.x1[i]).abs().max((a.x2[i] - b.x2[i]).abs()))
        .fold(0.0, f64::max)
}

#[derive(Serialize)]
struct PathRef {
    seed: u64,
    index: u64,
}

pub fn solve_cmd(cfg: &RunConfig) -> Result<()> {
    let scenario = cfg.resolve_scenario()?;
    let grid = cfg.grid(&scenario)?;
    if cfg.n_paths == 0 {
        return Err(CliError::Validation("--paths must be positive".into()));
    }
    cfg.prepare_out()?;
    if !scenario.is_deterministic() && cfg.n_paths > 1 {
        return ensemble(cfg, &scenario, &grid);
    }

    let path = (!scenario.is_deterministic())
        .then(|| simulate_price_path(&scenario.params, &grid, 0.0, cfg.seed, 0));
    let sol = solve(&scenario, path.as_ref(), &grid, Method::ClosedForm)?;
    let ode = solve(&scenario, path.as_ref(), &grid, Method::Ode)?;

    let mut files = Vec::new();
    for player in 0..2 {
        let name = format!("player{}.csv", player + 1);
        player_table(cfg, &sol, player)?.write(&cfg.out_file(&name))?;
        files.push(name);
    }
    if cfg.outputs.paths {
        write_json(&cfg.out_file("solution.json"), &sol)?;
        files.push("solution.json".into());
    }
    if cfg.outputs.weights {
        coeff_table(&scenario, &grid)?.write(&cfg.out_file("coeffs.csv"))?;
        files.push("coeffs.csv".into());
    }
    let verification = if cfg.outputs.verification {
        Some(run_verification(&scenario, &sol, verify_opts(cfg))?)
    } else {
        None
    };
    files.push("summary.json".into());
    let summary = json!({
        "config": cfg,
        "scenario": scenario,
        "grid": { "spec": grid.spec(), "nodes": grid.len() },
        "path": path.as_ref().map(|p| PathRef { seed: p.seed, index: p.path_index }),
        "terminals": sol.terminals,
        "terminal_gaps": sol.terminal_gaps,
        "final_holdings": [sol.x1.last(), sol.x2.last()],
        "method_agreement": {
            "max_abs_diff": method_agreement(&sol, &ode),
            "restricted_to": "t <= 0.99 T",
        },
        "verification": verification,
        "files": files,
    });
    write_json(&cfg.out_file("summary.json"), &summary)
}

fn ensemble(cfg: &RunConfig, scenario: &ScenarioSpec, grid: &TimeGrid) -> Result<()> {
    let ens = run_ensemble(scenario, cfg.n_paths, cfg.seed, grid)?;
    let mut files = Vec::new();
    for player in 0..2 {
        let (x, a, xi) = if player == 0 {
            (&ens.x1, &ens.alpha1, &ens.xi_hat_1)
        } else {
            (&ens.x2, &ens.alpha2, &ens.xi_hat_2)
        };
        let mut means = Table::new(&[
            "t",
            "x_mean",
            "x_std_err",
            "alpha_mean",
            "alpha_std_err",
            "xi_hat_mean",
            "xi_hat_std_err",
            "target_mean",
        ]);
        for (i, &t) in ens.nodes.iter().enumerate() {
            means.push_numbers(&[
                t,
                x.mean[i],
                x.std_err[i],
                a.mean[i],
                a.std_err[i],
                xi.mean[i],
                xi.std_err[i],
                ens.target_mean[player][i],
            ]);
        }
        let name = format!("ensemble_player{}.csv", player + 1);
        means.write(&cfg.out_file(&name))?;
        files.push(name);

        let mut bands = Table::new(&[
            "t",
            "x_lower",
            "x_upper",
            "alpha_lower",
            "alpha_upper",
            "xi_hat_lower",
            "xi_hat_upper",
        ]);
        for (k, &i) in ens.report_indices.iter().enumerate() {
            bands.push_numbers(&[
                ens.nodes[i],
                x.band_lower[k],
                x.band_upper[k],
                a.band_lower[k],
                a.band_upper[k],
                xi.band_lower[k],
                xi.band_upper[k],
            ]);
        }
        let name = format!("bands_player{}.csv", player + 1);
        bands.write(&cfg.out_file(&name))?;
        files.push(name);
    }
    files.push("summary.json".into());
    let summary = json!({
        "config": cfg,
        "scenario": scenario,
        "grid": { "spec": grid.spec(), "nodes": grid.len() },
        "n_paths": ens.n_paths,
        "seed": ens.seed,
        "bands": {
            "note": ens.band_note,
            "quantiles": ens.band_quantiles,
            "report_points": REPORT_POINTS,
        },
        "terminal_gaps": ens.terminal_gaps,
        "max_gap_per_player": ens.max_gap_per_player,
        "files": files,
    });
    write_json(&cfg.out_file("summary.json"), &summary)
}

fn verify_opts(cfg: &RunConfig) -> VerifyOpts {
    VerifyOpts {
        n_perturbations: cfg.perturbations,
        seed: cfg.seed,
    }
}

fn load_solution(path: &std::path::Path, scenario: &ScenarioSpec) -> Result<EquilibriumSolution> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let sol: EquilibriumSolution = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("solution {}: {e}", path.display())))?;
    if sol.params != scenario.params {
        return Err(CliError::Validation(format!(
            "solution {} was computed for different model parameters",
            path.display()
        )));
    }
    let n = sol.grid.len();
    let lens = [sol.x1.len(), sol.x2.len(), sol.alpha1.len(), sol.alpha2.len()];
    if lens.iter().any(|&l| l != n) || sol.signal.nodes.len() != n {
        return Err(CliError::Validation(format!(
            "solution {}: series lengths {lens:?} do not match {n} grid nodes",
            path.display()
        )));
    }
    Ok(sol)
}

pub fn verify(cfg: &RunConfig, solution: Option<&std::path::Path>) -> Result<()> {
    let scenario = cfg.resolve_scenario()?;
    cfg.prepare_out()?;
    let sol = match solution {
        Some(p) => load_solution(p, &scenario)?,
        None => {
            let grid = cfg.grid(&scenario)?;
            let path = (!scenario.is_deterministic())
                .then(|| simulate_price_path(&scenario.params, &grid, 0.0, cfg.seed, 0));
            solve(&scenario, path.as_ref(), &grid, Method::ClosedForm)?
        }
    };
    let report = run_verification(&scenario, &sol, verify_opts(cfg))?;
    let failing: Vec<String> = report
        .checks()
        .iter()
        .filter(|(_, c)| !c.passed)
        .map(|(name, _)| name.to_string())
        .collect();
    write_json(
        &cfg.out_file("verification.json"),
        &json!({
            "config": cfg,
            "solution": solution,
            "report": report,
            "passed": failing.is_empty(),
            "failing": failing,
        }),
    )?;
    for (name, c) in report.checks() {
        let status = match (c.skipped, c.passed) {
            (true, _) => "skip",
            (false, true) => "ok",
            (false, false) => "FAIL",
        };
        eprintln!("{status:>4}  {name:<20} {:.3e} (tolerance {:e})", c.value, c.tolerance);
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failing))
    }
}

pub const SWEEP_HEADER: [&str; 11] = [
    "gamma",
    "lambda",
    "w5_at_0",
    "predation",
    "cooperation",
    "opponent_min",
    "opponent_min_t",
    "opponent_max",
    "opponent_max_t",
    "opponent_mid",
    "w3_minus_w4_signs",
];

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let template = cfg.resolve_scenario()?;
    if !template.is_deterministic() {
        return Err(CliError::Validation("sweeps need a deterministic template scenario".into()));
    }
    let grid = cfg.grid(&template)?;
    let rows = regime_sweep(&template, &cfg.gammas, &cfg.lambdas, &grid)?;
    cfg.prepare_out()?;
    let mut table = Table::new(&SWEEP_HEADER);
    for r in &rows {
        let signs = r
            .w3_minus_w4_signs
            .iter()
            .map(|(t, s)| format!("{}:{s}", fmt(*t)))
            .collect::<Vec<_>>()
            .join(";");
        table.push(vec![
            fmt(r.gamma),
            fmt(r.lambda),
            fmt(r.w5_at_0),
            r.predation.to_string(),
            r.cooperation.to_string(),
            fmt(r.opponent_min),
            fmt(r.opponent_min_t),
            fmt(r.opponent_max),
            fmt(r.opponent_max_t),
            fmt(r.opponent_mid),
            signs,
        ]);
    }
    table.write(&cfg.out_file("sweep.csv"))?;
    write_json(
        &cfg.out_file("sweep.json"),
        &json!({ "config": cfg, "rows": rows }),
    )
}
