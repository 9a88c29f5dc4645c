// Hitting times three ways on one graph: the fundamental matrix, the
// spectrum of `B`, and simulated walks.

use sbm_hitting::hitting::{
    default_max_steps, hitting_rows, hitting_to_csv, mc_hitting, mc_target_hitting, zn_decomposition,
};
use sbm_hitting::spectral::{normalized_adjacency, symmetric_eigen, MatrixKind};
use sbm_hitting::{exact_hitting, sample, BlockModelConfig};

pub fn run_example() -> sbm_hitting::Result<()> {
    let config = BlockModelConfig::new(100, 2, vec![0.4, 0.2], 0.1)?.with_seed(11);
    let g = sample(&config)?;
    let spec = symmetric_eigen(normalized_adjacency(&g)?.as_ref(), MatrixKind::B)?;

    let mut h = exact_hitting(&g)?;
    h.attach_spectral(&spec, &g)?;
    println!(
        "H^v exact {:.6}, spectral {:.6}",
        h.h_start[0],
        h.spectral_h_start.unwrap_or(f64::NAN)
    );

    let cap = default_max_steps(g.n());
    let mut rows = hitting_rows(&g, &h, &[0, 50, 99])?;
    for row in &mut rows {
        row.mc = Some(mc_target_hitting(&g, row.w, 4000, cap, 5)?);
    }
    print!("{}", hitting_to_csv(&rows, &h));

    let hm = h.h_matrix.as_ref().expect("exact route keeps the matrix");
    let walk = mc_hitting(&g, 3, 70, 4000, cap, 6)?;
    println!(
        "H(4 -> 71): exact {:.2}, walks {:.2} +- {:.2}",
        hm[(3, 70)],
        walk.estimate,
        walk.std_error
    );

    let z = zn_decomposition(&spec, &g, 0)?;
    println!(
        "Z_N at w=1: 1 + {:.4} - {:.4} + {:.4} = {:.6} (direct {:.6})",
        z.b_ww, z.two_pi_w, z.tail, z.total, z.direct
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
