// Scratch probe for the erasure collections and the encoding finder.

use qaec::codes::{five_qubit_code, four_qubit_erasure_code};
use qaec::experiments::erasure::{erasure_collection, ErasureConfig};
use qaec::experiments::discovery::{encoding_discovery, DiscoveryConfig};
use qaec::experiments::validation::ErrorClass;

fn main() {
    let which: String = std::env::args().nth(1).unwrap_or_else(|| "x14".into());
    let t0 = std::time::Instant::now();
    match which.as_str() {
        "x14" => {
            let code = four_qubit_erasure_code();
            let mut config = ErasureConfig::for_code(&code, 11).unwrap();
            config.member_probe_target = 0.9995;
            config.validation_samples = 10_000;
            let out = erasure_collection(&code, 0.25, 0.0, &config).unwrap();
            println!("phase1 cost {:.3e}", out.no_loss.final_cost);
            for (pattern, cost) in &out.member_costs {
                println!("  member {pattern:?}: cost {cost:.3e}");
            }
            for (class, stat) in &out.report.classes {
                println!(
                    "  class {class}: mean {:.6} (count {})",
                    stat.mean(),
                    stat.count
                );
            }
            println!("overall {:.6} [{:?}]", out.report.mean_fidelity(), t0.elapsed());
        }
        "x15" => {
            let code = five_qubit_code();
            let config = ErasureConfig::for_code(&code, 13).unwrap();
            let out = erasure_collection(&code, 0.4, 0.1, &config).unwrap();
            println!("phase1 cost {:.3e}", out.no_loss.final_cost);
            for (pattern, cost) in &out.member_costs {
                println!(
                    "  member {pattern:?}: cost {cost:.3e} probe {:.6}",
                    out.member_probes[pattern]
                );
            }
            for (class, stat) in &out.report.classes {
                println!(
                    "  class {class}: mean {:.6} (count {})",
                    stat.mean(),
                    stat.count
                );
            }
            let single_pauli = out.report.class_mean(ErrorClass::pauli_only(1));
            println!(
                "single Pauli no loss: {:?}; overall {:.6} [{:?}]",
                single_pauli,
                out.report.mean_fidelity(),
                t0.elapsed()
            );
        }
        "discover" => {
            let config = DiscoveryConfig {
                seed: 3,
                max_restarts: 9,
                ..DiscoveryConfig::default()
            };
            let out = encoding_discovery(&config).unwrap();
            println!(
                "attempts {} cost {:.4e} meets {}",
                out.attempts, out.final_cost, out.meets_targets
            );
            for (lost, (mean, se)) in &out.per_loss {
                println!("  loss {lost:?}: {mean:.5} ± {se:.5}");
            }
            println!("  dfs deviation {:.3e}", out.dfs_max_deviation);
            println!("  marginals {:?}", out.marginal_fidelities);
            println!("  [{:?}]", t0.elapsed());
        }
        other => eprintln!("unknown probe '{other}'"),
    }
}
