// Start- and target-averaged hitting times over a few replicates, divided by
// their large-N predictions.

use sbm_hitting::experiments::{run_lln, ExperimentPlan, Mode};
use sbm_hitting::BlockModelConfig;

pub fn run_example() -> sbm_hitting::Result<()> {
    let config = BlockModelConfig::new(400, 4, vec![0.3, 0.25, 0.2, 0.15], 0.05)?.with_seed(1);

    let start = run_lln(&ExperimentPlan::new(config.clone(), Mode::LlnStart, 3))?;
    print!("{}", start.to_csv());

    let target = run_lln(&ExperimentPlan::new(config, Mode::LlnTarget, 3))?;
    print!("{}", target.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
