//! Scratch probe for the simulation margins (not part of the test suite).

use mpo_core::sim::*;

fn main() {
    let seeds = 500;
    let cfg = ExperimentConfig::paper_like(seeds);

    // KL check at eta = 0.05.
    let worlds: Vec<SimWorld> = (0..200)
        .map(|i| make_world(9, &GapProfile::PaperLike, 1717 + i).unwrap())
        .collect();
    let pairs = world_prior_kl_pairs(&worlds, &PriorModel::Noisy { eta: 0.05 }, 5);
    let kl = check_kl_assumption(&pairs, 1000, 7).unwrap();
    println!("KL check: mean={:.4} ci=({:.4},{:.4})", kl.mean, kl.ci_low, kl.ci_high);

    // Proposition 1: paired suboptimal pulls at full budget.
    let inh = run_cell(Strategy::BayesUcbInherited, 900, &cfg).unwrap();
    let free = run_cell(Strategy::BayesUcbUniform, 900, &cfg).unwrap();
    let diffs: Vec<f64> = free
        .iter()
        .zip(&inh)
        .map(|(f, i)| f.suboptimal_examples as f64 - i.suboptimal_examples as f64)
        .collect();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let (lo, hi) = bootstrap_mean_ci(&diffs, 1000, 11);
    let mi = inh.iter().map(|s| s.suboptimal_examples as f64).sum::<f64>() / seeds as f64;
    let mf = free.iter().map(|s| s.suboptimal_examples as f64).sum::<f64>() / seeds as f64;
    println!("Prop1: subopt inherited={mi:.1} free={mf:.1} paired-diff={mean_diff:.1} ci=({lo:.1},{hi:.1})");

    // Figure 6: budget-to-target.
    let report = run_strategy_experiment(
        &[Strategy::BayesUcbInherited, Strategy::BayesUcbUniform, Strategy::Ucb1],
        &cfg,
    )
    .unwrap();
    for s in [Strategy::BayesUcbInherited, Strategy::BayesUcbUniform, Strategy::Ucb1] {
        let rates: Vec<String> = cfg
            .budgets
            .iter()
            .map(|&b| format!("{:.2}", report.cell(s, b).unwrap().identification_rate))
            .collect();
        println!("{s}: {}", rates.join(" "));
    }
    let t_free = report.terminal_rate(Strategy::BayesUcbUniform).unwrap();
    let t_ucb = report.terminal_rate(Strategy::Ucb1).unwrap();
    let b_inh_vs_free = report.budget_to_target(Strategy::BayesUcbInherited, t_free);
    let b_free = report.budget_to_target(Strategy::BayesUcbUniform, t_free);
    let b_inh_vs_ucb = report.budget_to_target(Strategy::BayesUcbInherited, t_ucb);
    let b_ucb = report.budget_to_target(Strategy::Ucb1, t_ucb);
    println!("fig6 vs free: target={t_free:.3} inherited={b_inh_vs_free:?} free={b_free:?}");
    println!("fig6 vs ucb1: target={t_ucb:.3} inherited={b_inh_vs_ucb:?} ucb1={b_ucb:?}");

    // Figure 8: sweep at eta = 0.15.
    for budget in [180u64, 270, 450] {
        let sweep_cfg = ExperimentConfig {
            prior: PriorModel::Noisy { eta: 0.15 },
            ..cfg.clone()
        };
        let points = sweep_prior_strength(&[0.0, 10.0, 1000.0], budget, &sweep_cfg).unwrap();
        let fmt: Vec<String> = points
            .iter()
            .map(|p| format!("S={} rate={:.3}", p.prior_strength, p.identification_rate))
            .collect();
        println!("fig8 @N={budget}: {}", fmt.join("  "));
    }
}
