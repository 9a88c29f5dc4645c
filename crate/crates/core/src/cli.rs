//! The `sbm` command line.
//!
//! Exit status is 0 on success, 1 for bad input (flags, config, graph files,
//! disconnected graphs) and 2 when a numerical routine fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentPlan, Mode, Targets};
use crate::graph::{sample, Graph};
use crate::hitting::{default_max_steps, exact_averages, hitting_rows, hitting_to_csv, mc_target_hitting};
use crate::model::{check_conditions, derive, BlockModelConfig, CltScaling, ConditionMode, DEFAULT_CONDITION_THRESHOLD};
use crate::spectral::{
    block_matrix_spectrum, bounds_to_csv, build_rescaled, norm_bounds, symmetric_eigen, symmetric_eigenvalues,
    BoundSettings, MatrixKind, RBoundForm,
};

#[derive(Debug, Parser)]
#[command(name = "sbm", version, about = "Stochastic block model graphs, spectra and random-walk hitting times")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and write it as an edge list.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        /// Output edge list (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of a graph matrix, plus the norm envelopes when the model is known.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Read the graph from an edge list instead of sampling it.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MatrixArg::B)]
        matrix: MatrixArg,
        /// Include eigenvectors in the CSV.
        #[arg(long)]
        vectors: bool,
        /// Eigenvalue CSV; bound reports go next to it as `<stem>_bounds.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact, spectral and Monte Carlo target-averaged hitting times.
    Hitting {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// 1-based target vertices, comma separated (all vertices if omitted).
        #[arg(long, value_delimiter = ',')]
        target: Vec<usize>,
        /// Random walks per target; 0 skips the Monte Carlo column.
        #[arg(long, default_value_t = 10_000)]
        walks: usize,
        /// Step cap per walk (default 100 N ln N).
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the asymptotic conditions at the configured N.
    CheckConditions {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = ConditionArg::Lln)]
        mode: ConditionArg,
        #[arg(long, default_value_t = DEFAULT_CONDITION_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replicate sweep.
    Experiment {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        /// `one-per-block`, `all`, or a comma-separated list of 1-based vertices.
        #[arg(long, default_value = "one-per-block")]
        targets: String,
        /// 1-based block whose first vertex is the CLT target.
        #[arg(long, default_value_t = 1)]
        clt_block: usize,
        #[arg(long, value_enum, default_value_t = ScalingArg::General)]
        scaling: ScalingArg,
        /// Constant in the ||X||_2 envelope.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.5)]
        slack: f64,
        /// Use the identical-p form sqrt(ln N / gamma) for the ||R||_inf envelope.
        #[arg(long)]
        identical_r_bound: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Main CSV; CLT modes also write `<stem>_hist.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Model parameters: a TOML config, flags, or a config overridden by flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// TOML file with n, m, p, q, allow_loops, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Intra-block probabilities, comma separated, one per block.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disallow loops.
    #[arg(long)]
    pub no_loops: bool,
}

impl ModelArgs {
    fn is_empty(&self) -> bool {
        self.config.is_none() && self.n.is_none() && self.m.is_none() && self.p.is_none() && self.q.is_none()
    }

    pub fn resolve(&self) -> Result<BlockModelConfig> {
        let base = match &self.config {
            Some(path) => Some(BlockModelConfig::from_path(path)?),
            None => None,
        };
        let missing = |name: &str| Error::InvalidConfig(format!("--{name} is required without --config"));
        let n = self.n.or(base.as_ref().map(|b| b.n)).ok_or_else(|| missing("n"))?;
        let m = self.m.or(base.as_ref().map(|b| b.m)).ok_or_else(|| missing("m"))?;
        let p = self.p.clone().or(base.as_ref().map(|b| b.p.clone())).ok_or_else(|| missing("p"))?;
        let q = self.q.or(base.as_ref().map(|b| b.q)).ok_or_else(|| missing("q"))?;
        let seed = self.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0);
        let loops = !self.no_loops && base.as_ref().map_or(true, |b| b.allow_loops);
        let p = if p.len() == 1 && m > 1 { vec![p[0]; m] } else { p };
        Ok(BlockModelConfig::new(n, m, p, q)?.with_seed(seed).with_loops(loops))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixArg {
    B,
    APrime,
    X,
    R,
    PPrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    Lln,
    Clt,
    #[value(name = "identical_p", alias = "identical-p")]
    IdenticalP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "lln_start")]
    LlnStart,
    #[value(name = "lln_target")]
    LlnTarget,
    #[value(name = "clt_target")]
    CltTarget,
    #[value(name = "clt_edges")]
    CltEdges,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingArg {
    General,
    #[value(name = "identical_p", alias = "identical-p")]
    IdenticalP,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// `dir/stem.ext` -> `dir/stem_suffix.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn load_graph(model: &ModelArgs, input: Option<&Path>) -> Result<Graph> {
    match input {
        Some(path) => Graph::read_edge_list(path),
        None => sample(&model.resolve()?),
    }
}

fn spectrum(model: &ModelArgs, input: Option<&Path>, matrix: MatrixArg, vectors: bool, out: Option<&Path>) -> Result<()> {
    let decompose = |m: faer::MatRef<'_, f64>, kind| {
        if vectors {
            symmetric_eigen(m, kind)
        } else {
            symmetric_eigenvalues(m, kind)
        }
    };
    if matrix == MatrixArg::PPrime {
        let params = derive(&model.resolve()?)?;
        let mut s = block_matrix_spectrum(&params)?;
        if !vectors {
            s.eigenvectors = None;
        }
        return emit(out, &s.to_csv(vectors)?);
    }
    let g = load_graph(model, input)?;
    // Bounds need the model; a bare edge list only gets them with --config or flags.
    let params = if input.is_none() || !model.is_empty() {
        let p = derive(&model.resolve()?)?;
        if p.n() != g.n() || p.m() != g.n_blocks() {
            return Err(Error::InvalidConfig("model parameters do not match the graph".into()));
        }
        Some(p)
    } else {
        None
    };
    let s = match (matrix, &params) {
        (MatrixArg::B, _) => decompose(crate::spectral::normalized_adjacency(&g)?.as_ref(), MatrixKind::B)?,
        (_, None) => {
            return Err(Error::InvalidConfig(
                "this matrix depends on the model; pass --config or --n/--m/--p/--q".into(),
            ))
        }
        (kind, Some(p)) => {
            let mats = build_rescaled(&g, p)?;
            match kind {
                MatrixArg::APrime => decompose(mats.a_prime.as_ref(), MatrixKind::APrime)?,
                MatrixArg::X => decompose(mats.x.as_ref(), MatrixKind::X)?,
                _ => decompose(mats.r.as_ref(), MatrixKind::R)?,
            }
        }
    };
    emit(out, &s.to_csv(vectors)?)?;
    if let Some(p) = &params {
        let reports = norm_bounds(&g, p, &BoundSettings::default())?;
        let csv = bounds_to_csv(&reports);
        match out {
            Some(path) => emit(Some(&sibling(path, "bounds")), &csv)?,
            None => emit(None, &csv)?,
        }
    }
    Ok(())
}

fn hitting_cmd(
    model: &ModelArgs,
    input: Option<&Path>,
    targets: &[usize],
    walks: usize,
    max_steps: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let g = load_graph(model, input)?;
    let seed = match &model.config {
        Some(_) => model.resolve()?.seed,
        None => model.seed.unwrap_or(0),
    };
    let targets: Vec<usize> = if targets.is_empty() {
        (0..g.n()).collect()
    } else {
        targets
            .iter()
            .map(|&t| {
                if t == 0 || t > g.n() {
                    Err(Error::InvalidArgument(format!("target {t} out of range 1..={}", g.n())))
                } else {
                    Ok(t - 1)
                }
            })
            .collect::<Result<_>>()?
    };
    let mut result = exact_averages(&g)?;
    let b = crate::spectral::normalized_adjacency(&g)?;
    result.attach_spectral(&symmetric_eigen(b.as_ref(), MatrixKind::B)?, &g)?;
    let mut rows = hitting_rows(&g, &result, &targets)?;
    if walks > 0 {
        let cap = max_steps.unwrap_or_else(|| default_max_steps(g.n()));
        for row in &mut rows {
            row.mc = Some(mc_target_hitting(&g, row.w, walks, cap, seed.wrapping_add(row.w as u64))?);
        }
    }
    emit(out, &hitting_to_csv(&rows, &result))
}

fn parse_targets(spec: &str) -> Result<Targets> {
    match spec {
        "one-per-block" => Ok(Targets::OnePerBlock),
        "all" => Ok(Targets::All),
        list => list
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::InvalidArgument(format!("bad target '{t}'; use 1-based vertex numbers"))),
            })
            .collect::<Result<_>>()
            .map(Targets::Fixed),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { model, out } => {
            let g = sample(&model.resolve()?)?;
            emit(out.as_deref(), &g.to_edge_list())
        }
        Command::Spectrum {
            model,
            input,
            matrix,
            vectors,
            out,
        } => spectrum(&model, input.as_deref(), matrix, vectors, out.as_deref()),
        Command::Hitting {
            model,
            input,
            target,
            walks,
            max_steps,
            out,
        } => hitting_cmd(&model, input.as_deref(), &target, walks, max_steps, out.as_deref()),
        Command::CheckConditions {
            model,
            mode,
            threshold,
            out,
        } => {
            let mode = match mode {
                ConditionArg::Lln => ConditionMode::Lln,
                ConditionArg::Clt => ConditionMode::Clt,
                ConditionArg::IdenticalP => ConditionMode::IdenticalP,
            };
            let report = check_conditions(&model.resolve()?, mode, threshold)?;
            emit(out.as_deref(), &report.to_csv())
        }
        Command::Experiment {
            model,
            mode,
            replicates,
            targets,
            clt_block,
            scaling,
            c,
            slack,
            identical_r_bound,
            threads,
            out,
        } => {
            let mode = match mode {
                ModeArg::LlnStart => Mode::LlnStart,
                ModeArg::LlnTarget => Mode::LlnTarget,
                ModeArg::CltTarget => Mode::CltTarget,
                ModeArg::CltEdges => Mode::CltEdges,
                ModeArg::Bounds => Mode::Bounds,
            };
            if clt_block == 0 {
                return Err(Error::InvalidArgument("--clt-block is 1-based".into()));
            }
            let mut plan = ExperimentPlan::new(model.resolve()?, mode, replicates);
            plan.targets = parse_targets(&targets)?;
            plan.clt_block = clt_block - 1;
            plan.scaling = match scaling {
                ScalingArg::General => CltScaling::General,
                ScalingArg::IdenticalP => CltScaling::IdenticalP,
            };
            plan.bounds = BoundSettings {
                c,
                slack,
                r_form: if identical_r_bound {
                    RBoundForm::IdenticalP { constant: 3f64.sqrt() }
                } else {
                    BoundSettings::default().r_form
                },
            };
            plan.output = out.clone();
            plan.validate()?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                pool = pool.num_threads(t);
            }
            let pool = pool
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start {threads:?} threads: {e}")))?;
            let result = pool.install(|| experiments::run(&plan))?;
            emit(out.as_deref(), &result.to_csv())?;
            if let Some(hist) = result.histogram_csv() {
                match &out {
                    Some(path) => emit(Some(&sibling(path, "hist")), &hist)?,
                    None => emit(None, &hist)?,
                }
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn model_flags_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        fs::write(&path, "n = 20\nm = 2\np = [0.5, 0.3]\nq = 0.1\nseed = 4\n").unwrap();
        let args = ModelArgs {
            config: Some(path),
            q: Some(0.2),
            no_loops: true,
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!((c.n, c.q, c.seed, c.allow_loops), (20, 0.2, 4, false));
        assert!(ModelArgs { n: Some(10), ..Default::default() }.resolve().is_err());
        let uniform = ModelArgs {
            n: Some(30),
            m: Some(3),
            p: Some(vec![0.4]),
            q: Some(0.1),
            ..Default::default()
        };
        assert_eq!(uniform.resolve().unwrap().p, vec![0.4; 3]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["sbm", "--help"]), 0);
        assert_eq!(run(["sbm", "generate", "--bogus"]), 1);
        assert_eq!(run(["sbm", "generate", "--n", "10", "--m", "3", "--p", "0.5", "--q", "0.1"]), 1);
        assert_eq!(run(["sbm", "check-conditions", "--n", "10", "--m", "2", "--p", "0.5,0.6", "--q", "0.1"]), 1);
    }

    #[test]
    fn targets_parse() {
        assert_eq!(parse_targets("all").unwrap(), Targets::All);
        assert_eq!(parse_targets("3,1").unwrap(), Targets::Fixed(vec![2, 0]));
        assert!(parse_targets("0").is_err());
        assert!(parse_targets("x").is_err());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("/tmp/run.csv"), "hist"), PathBuf::from("/tmp/run_hist.csv"));
    }
}
