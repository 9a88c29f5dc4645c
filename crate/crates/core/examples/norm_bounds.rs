// Compare one sampled graph with its expectation: norms of `X = A' - E[A']`
// and `R = B - A'`, eigenvalue locations, and the Weyl inequalities.

use sbm_hitting::spectral::{bounds_to_csv, evaluate_bounds, required_c, snapshot, weyl_check, BoundSettings};
use sbm_hitting::{derive, sample, BlockModelConfig};

pub fn run_example() -> sbm_hitting::Result<()> {
    let config = BlockModelConfig::identical(400, 2, 0.2, 0.05)?.with_seed(3);
    let params = derive(&config)?;
    let g = sample(&config)?;
    let snap = snapshot(&g, &params)?;

    print!("{}", bounds_to_csv(&evaluate_bounds(&snap, &params, &BoundSettings::default())));
    println!("smallest c for the ||X|| envelope: {:.3}", required_c(&params, snap.x_norm));

    let w = weyl_check(&snap);
    println!(
        "Weyl: max|l(B) - l(A')| = {:.4} <= ||R||_inf = {:.4}; max|l(A') - l(E A')| = {:.4} <= ||X|| = {:.4}",
        w.b_vs_a_prime, w.r_inf_norm, w.a_prime_vs_expected, w.x_norm
    );
    println!("top of spectrum of B: {:?}", &snap.b[..4]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
