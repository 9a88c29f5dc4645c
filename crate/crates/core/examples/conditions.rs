// Evaluate the growth conditions behind the limit theorems at a concrete N.

use sbm_hitting::model::{check_conditions, ConditionMode, DEFAULT_CONDITION_THRESHOLD};
use sbm_hitting::BlockModelConfig;

pub fn run_example() -> sbm_hitting::Result<()> {
    let heterogeneous = BlockModelConfig::new(2000, 4, vec![0.3, 0.25, 0.2, 0.15], 0.05)?;
    let identical = BlockModelConfig::identical(1_000_000, 2, 0.3, 0.1)?;

    for (label, config, mode) in [
        ("lln", &heterogeneous, ConditionMode::Lln),
        ("clt", &heterogeneous, ConditionMode::Clt),
        ("identical p, N = 10^6", &identical, ConditionMode::IdenticalP),
    ] {
        let report = check_conditions(config, mode, DEFAULT_CONDITION_THRESHOLD)?;
        println!("== {label}");
        print!("{}", report.to_csv());
        for r in report.records.iter().filter(|r| r.marginal()) {
            println!("   {} is marginal (ratio {:.3})", r.name, r.ratio);
        }
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
