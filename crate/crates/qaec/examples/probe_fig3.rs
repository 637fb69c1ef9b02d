// Scratch probe: trains the fig3 preset under several optimizer settings
// and reports cost, chi distance to the reference recovery and single-flip
// class fidelity.

use qaec::codes::{perfect_recovery, three_qubit_code, PauliString};
use qaec::experiments::presets::{qae_settings, train_denoising_qae, Preset};
use qaec::experiments::validation::{pattern_class_fidelity, NoiseSpec};
use qaec::linalg::DensityMatrix;
use qaec::tomography::{channel_distance, chi_matrix};
use qaec::training::TrainingConfig;

fn run(label: &str, epochs: usize, epsilon: f64, betas: Option<(f64, f64)>, seed: u64) {
    let t0 = std::time::Instant::now();
    let settings = qae_settings(Preset::Fig3, Some(NoiseSpec::BitFlip { p: 0.1 })).unwrap();
    let mut config = TrainingConfig::new(epsilon, epochs, settings.minibatch_size, seed)
        .unwrap()
        .with_restarts(3, 0.04);
    if let Some((b1, b2)) = betas {
        config.beta1 = b1;
        config.beta2 = b2;
    }
    let trained = train_denoising_qae(&settings, &config, None, 1).unwrap();
    let code = three_qubit_code();
    let channel = trained.channel.clone();
    let trained_chi = chi_matrix(move |rho: &DensityMatrix| channel.apply(rho), 3, 3).unwrap();
    let ref_chi = chi_matrix(|rho: &DensityMatrix| perfect_recovery(&code, rho), 3, 3).unwrap();
    let dist = channel_distance(&trained_chi, &ref_chi).unwrap();
    let singles: Vec<PauliString> = ["XII", "IXI", "IIX"]
        .iter()
        .map(|s| PauliString::parse(s).unwrap())
        .collect();
    let single_fid = pattern_class_fidelity(&trained.channel, &code, &singles, 20, 99);
    println!(
        "{label}: cost {:.4e} chi_dist {:.3e} single {:.8} [{:?}]",
        trained.outcome.final_cost,
        dist.max_abs,
        single_fid,
        t0.elapsed()
    );
}

fn main() {
    run("nadam e=0.1 200ep", 200, 0.1, None, 1);
    run("nadam e=0.1 1000ep", 1000, 0.1, None, 1);
    run("nadam e=0.1 3000ep", 3000, 0.1, None, 1);
    run("nadam e=0.02 1000ep", 1000, 0.02, None, 1);
    run("plain e=0.5 200ep", 200, 0.5, Some((0.0, 0.0)), 1);
    run("plain e=1.0 1000ep", 1000, 1.0, Some((0.0, 0.0)), 1);
}
