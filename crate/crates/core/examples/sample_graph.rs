// Sample a block model graph, look at its degrees and round-trip it through
// the edge-list format.

use sbm_hitting::graph::{degree_concentration, is_connected};
use sbm_hitting::{derive, sample, BlockModelConfig, Graph};

pub fn run_example() -> sbm_hitting::Result<()> {
    let config = BlockModelConfig::new(300, 3, vec![0.3, 0.25, 0.2], 0.05)?.with_seed(7);
    let params = derive(&config)?;
    let g = sample(&config)?;

    println!(
        "n={} |E|={} |L|={} connected={}",
        g.n(),
        g.edge_count(),
        g.loop_count(),
        is_connected(&g)
    );
    for b in 0..config.m {
        let degs: Vec<usize> = (0..g.n()).filter(|&v| g.block_of(v) == b).map(|v| g.degree(v)).collect();
        let mean = degs.iter().sum::<usize>() as f64 / degs.len() as f64;
        println!("block {}: mean degree {:.1}, expected {:.1}", b + 1, mean, params.gamma[b]);
    }

    let conc = degree_concentration(&g, &params, 3.0)?;
    println!("{} vertices with degree more than 3 sqrt(gamma) from gamma", conc.violations);

    let dir = std::env::temp_dir().join(format!("sbm-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("graph.el");
    g.write_edge_list(&path)?;
    let back = Graph::read_edge_list(&path)?;
    assert_eq!(back, g);
    println!("edge list written to {} and read back", path.display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
