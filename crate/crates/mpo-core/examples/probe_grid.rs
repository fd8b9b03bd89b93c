//! Scratch probe: budget-to-target robustness across base seeds.

use mpo_core::sim::*;

fn main() {
    for base_seed in [1717u64, 42, 9001, 555, 31337] {
        let cfg = ExperimentConfig {
            budgets: vec![45, 90, 135, 180, 225, 270],
            base_seed,
            seeds: 1000,
            ..ExperimentConfig::paper_like(1000)
        };
        let report = run_strategy_experiment(
            &[Strategy::BayesUcbInherited, Strategy::BayesUcbUniform, Strategy::Ucb1],
            &cfg,
        )
        .unwrap();
        let t_free = report.terminal_rate(Strategy::BayesUcbUniform).unwrap();
        let t_ucb = report.terminal_rate(Strategy::Ucb1).unwrap();
        let b_inh_f = report.budget_to_target(Strategy::BayesUcbInherited, t_free);
        let b_free = report.budget_to_target(Strategy::BayesUcbUniform, t_free);
        let b_inh_u = report.budget_to_target(Strategy::BayesUcbInherited, t_ucb);
        let b_ucb = report.budget_to_target(Strategy::Ucb1, t_ucb);
        println!(
            "seed={base_seed}: vs-free target={t_free:.3} inh={b_inh_f:?} free={b_free:?} | vs-ucb target={t_ucb:.3} inh={b_inh_u:?} ucb={b_ucb:?}"
        );
        for s in [Strategy::BayesUcbInherited, Strategy::BayesUcbUniform, Strategy::Ucb1] {
            let rates: Vec<String> = cfg
                .budgets
                .iter()
                .map(|&b| format!("{:.3}", report.cell(s, b).unwrap().identification_rate))
                .collect();
            println!("  {s}: {}", rates.join(" "));
        }
    }
}
