// Spectrum of the rescaled block matrix, the expected adjacency spectrum it
// induces, and the conductance of the block graph.

use sbm_hitting::spectral::{block_matrix_spectrum, cheeger_bound, expected_adjacency_spectrum};
use sbm_hitting::{derive, BlockModelConfig};

pub fn run_example() -> sbm_hitting::Result<()> {
    let configs = [
        BlockModelConfig::new(40, 2, vec![0.5, 0.3], 0.1)?,
        BlockModelConfig::identical(60, 3, 0.4, 0.1)?,
        BlockModelConfig::identical(60, 4, 0.01, 0.1)?,
    ];
    for config in &configs {
        let params = derive(config)?;
        let scale = params.block_size() as f64;
        let block = block_matrix_spectrum(&params)?;
        let scaled: Vec<String> = block.eigenvalues.iter().map(|l| format!("{:.4}", l * scale)).collect();
        println!("p={:?} q={}: (N/M) lambda(P') = [{}]", config.p, config.q, scaled.join(", "));

        let full = expected_adjacency_spectrum(&params)?;
        let nonzero = full.eigenvalues.iter().filter(|l| l.abs() > 1e-12).count();
        println!("  E[A'] has {} nonzero eigenvalues out of {}", nonzero, full.len());

        let cb = cheeger_bound(&params)?;
        let lambda2 = scaled[1].parse::<f64>().unwrap_or(f64::NAN);
        println!(
            "  lambda_2 = {lambda2:.4}, envelope {:.4} (singleton cut {:.4}), classical {:.4} (conductance {:.4})",
            cb.bound, cb.conductance, cb.classical_bound, cb.min_conductance
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
