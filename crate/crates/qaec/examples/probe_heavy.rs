// Scratch probe for the heavier trainings: 5-1-5 under depolarizing and
// bit-flip noise, and the correlated-noise strategy adaptation.

use qaec::codes::{five_qubit_code, PauliString};
use qaec::experiments::presets::{qae_settings, train_denoising_qae, Preset};
use qaec::experiments::validation::{pattern_class_fidelity, NoiseSpec};
use qaec::training::TrainingConfig;

fn main() {
    let which: String = std::env::args().nth(1).unwrap_or_else(|| "fig5a".into());
    match which.as_str() {
        "fig5a" | "fig5b" => {
            let preset = if which == "fig5a" {
                Preset::Fig5a
            } else {
                Preset::Fig5b
            };
            for seed in [1u64, 2] {
                let t0 = std::time::Instant::now();
                let settings = qae_settings(preset, None).unwrap();
                let config = TrainingConfig::new(
                    settings.epsilon,
                    settings.epochs,
                    settings.minibatch_size,
                    seed,
                )
                .unwrap()
                .with_restarts(2, 0.2);
                let trained = train_denoising_qae(&settings, &config, None, 1).unwrap();
                let code = five_qubit_code();
                let mut singles = Vec::new();
                for q in 0..5 {
                    for p in ["X", "Y", "Z"] {
                        let mut s = vec!['I'; 5];
                        s[q] = p.chars().next().unwrap();
                        singles.push(PauliString::parse(&s.iter().collect::<String>()).unwrap());
                    }
                }
                let single_fid =
                    pattern_class_fidelity(&trained.channel, &code, &singles, 10, 99);
                // Double-X patterns for the bit-flip variant.
                let mut doubles = Vec::new();
                for a in 0..5 {
                    for b in a + 1..5 {
                        let mut s = vec!['I'; 5];
                        s[a] = 'X';
                        s[b] = 'X';
                        doubles.push(PauliString::parse(&s.iter().collect::<String>()).unwrap());
                    }
                }
                let double_fid =
                    pattern_class_fidelity(&trained.channel, &code, &doubles, 10, 99);
                println!(
                    "{which} seed {seed}: cost {:.4e} restarts {} singles {:.6} doublesX {:.6} [{:?}]",
                    trained.outcome.final_cost,
                    trained.outcome.restarts_used,
                    single_fid,
                    double_fid,
                    t0.elapsed()
                );
            }
        }
        "fig6" => {
            let t0 = std::time::Instant::now();
            let config = TrainingConfig::new(0.1, 200, 3, 5).unwrap().with_restarts(4, 1.0);
            let rows =
                qaec::experiments::correlated_noise_study(0.2, &[1.0, 2.0, 8.0, 16.0], &config, 2000)
                    .unwrap();
            for r in &rows {
                println!(
                    "eta {:>4}: strategy {:<11} cost {:.4e} d_std {:.3e} d_alt {:.3e} mean_fid {:.4} (std {:.4} alt {:.4}) [{:?}]",
                    r.eta,
                    r.strategy.as_str(),
                    r.final_cost,
                    r.chi_distance_standard,
                    r.chi_distance_alternative,
                    r.report.mean_fidelity(),
                    r.analytic_standard,
                    r.analytic_alternative,
                    t0.elapsed()
                );
            }
        }
        other => eprintln!("unknown probe '{other}'"),
    }
}
