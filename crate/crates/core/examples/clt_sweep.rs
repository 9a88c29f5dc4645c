// Standardized `H_w` and `|E|` across replicates, summarized against their
// normal limits.

use sbm_hitting::experiments::{run_clt_edges, run_clt_target, standardize_all, ExperimentPlan, Mode};
use sbm_hitting::model::CltScaling;
use sbm_hitting::stats::{CltSummary, CltTolerances};
use sbm_hitting::{derive, BlockModelConfig};

pub fn run_example() -> sbm_hitting::Result<()> {
    let config = BlockModelConfig::identical(300, 2, 0.1, 0.05)?.with_seed(2);
    let params = derive(&config)?;

    let general = run_clt_target(&ExperimentPlan::new(config.clone(), Mode::CltTarget, 60))?;
    let (identical, var) = standardize_all(&params, 0, &general.raw, CltScaling::IdenticalP)?;
    let identical = CltSummary::from_samples(&identical, var);
    let tol = CltTolerances::default();
    for (label, s) in [("general", &general.summary), ("identical p", &identical)] {
        println!(
            "{label}: mean {:+.3} variance/target {:.3} ks {:.3} accepted {}",
            s.mean,
            s.variance / s.target_variance,
            s.ks_distance,
            tol.accepts(s)
        );
    }

    let edges = run_clt_edges(&ExperimentPlan::new(config, Mode::CltEdges, 200))?;
    print!("{}", edges.summary.footer());
    print!("{}", edges.histogram_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
