//! Replicate sweeps over sampled graphs: laws of large numbers for the
//! averaged hitting times, normal limits for `H_w` and `|E|`, and the
//! empirical pass rates of the spectral envelopes.
//!
//! Replicates run in parallel and are gathered in replicate order, so a plan
//! with a fixed base seed always produces the same output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_connected, sample, Graph};
use crate::hitting::{exact_averages, target_hitting_time};
use crate::model::{clt_standardize, derive, BlockModelConfig, CltScaling, DerivedParams};
use crate::rng::replicate_seed;
use crate::spectral::{evaluate_bounds, required_c, snapshot, weyl_check, BoundReport, BoundSettings, WeylCheck};
use crate::stats::{default_bins, histogram_csv, CltSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    LlnStart,
    LlnTarget,
    CltTarget,
    CltEdges,
    Bounds,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lln_start" => Ok(Mode::LlnStart),
            "lln_target" => Ok(Mode::LlnTarget),
            "clt_target" => Ok(Mode::CltTarget),
            "clt_edges" => Ok(Mode::CltEdges),
            "bounds" => Ok(Mode::Bounds),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}'; expected lln_start, lln_target, clt_target, clt_edges or bounds"
            ))),
        }
    }
}

/// Which vertices an LLN target sweep reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Targets {
    /// The first vertex of every block.
    OnePerBlock,
    /// 0-based vertex indices.
    Fixed(Vec<usize>),
    All,
}

impl Targets {
    pub fn resolve(&self, config: &BlockModelConfig) -> Result<Vec<usize>> {
        let nb = config.block_size();
        match self {
            Targets::OnePerBlock => Ok((0..config.m).map(|b| b * nb).collect()),
            Targets::All => Ok((0..config.n).collect()),
            Targets::Fixed(list) => {
                if let Some(&bad) = list.iter().find(|&&v| v >= config.n) {
                    return Err(Error::InvalidConfig(format!(
                        "target {} out of range 1..={}",
                        bad + 1,
                        config.n
                    )));
                }
                if list.is_empty() {
                    return Err(Error::InvalidConfig("empty target list".into()));
                }
                Ok(list.clone())
            }
        }
    }
}

/// Resampling cap per replicate when a draw is disconnected.
pub const DEFAULT_MAX_RESAMPLE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub config: BlockModelConfig,
    pub mode: Mode,
    pub replicates: usize,
    pub targets: Targets,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    pub bounds: BoundSettings,
    /// Block whose first vertex is the target in `clt_target` mode.
    pub clt_block: usize,
    pub scaling: CltScaling,
    pub max_resample: usize,
}

impl ExperimentPlan {
    /// Defaults: one target per block, base seed taken from the config,
    /// CLT target in the first block with general scaling.
    pub fn new(config: BlockModelConfig, mode: Mode, replicates: usize) -> Self {
        Self {
            base_seed: config.seed,
            config,
            mode,
            replicates,
            targets: Targets::OnePerBlock,
            output: None,
            bounds: BoundSettings::default(),
            clt_block: 0,
            scaling: CltScaling::General,
            max_resample: DEFAULT_MAX_RESAMPLE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.clt_block >= self.config.m {
            return Err(Error::InvalidConfig(format!(
                "clt block {} out of range 1..={}",
                self.clt_block + 1,
                self.config.m
            )));
        }
        self.targets.resolve(&self.config)?;
        Ok(())
    }
}

/// Samples replicate `r`, moving to the next seed while the draw is
/// disconnected. Returns the graph and the number of rejected draws.
pub fn sample_connected(
    config: &BlockModelConfig,
    base_seed: u64,
    replicate: usize,
    max_resample: usize,
) -> Result<(Graph, usize)> {
    let seed = replicate_seed(base_seed, replicate);
    for attempt in 0..=max_resample {
        let g = sample(&config.clone().with_seed(seed.wrapping_add(attempt as u64)))?;
        if is_connected(&g) && (g.n() == 1 || !g.degrees().contains(&0)) {
            if attempt > 0 {
                log::info!("replicate {replicate}: {attempt} disconnected draws rejected");
            }
            return Ok((g, attempt));
        }
    }
    Err(Error::Disconnected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlnRecord {
    pub replicate: usize,
    /// `None` for start-averaged records.
    pub target: Option<usize>,
    pub block: Option<usize>,
    pub value: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlnRun {
    pub mode: Mode,
    pub records: Vec<LlnRecord>,
    /// `max |ratio - 1|` over the records.
    pub max_deviation: f64,
    /// Target mode only: `max |mean_{w in block} ratio_w - 1|` over blocks and
    /// replicates, using every vertex of the block.
    pub block_mean_deviation: Option<f64>,
    /// Target mode only: the per-vertex maximum over every vertex.
    pub vertex_max_deviation: Option<f64>,
    pub resamples: usize,
}

impl LlnRun {
    pub fn to_csv(&self) -> String {
        let mut out = match self.mode {
            Mode::LlnStart => String::from("replicate,h_start,ratio\n"),
            _ => String::from("replicate,w,block,h_w,ratio\n"),
        };
        for r in &self.records {
            match (r.target, r.block) {
                (Some(w), Some(b)) => {
                    let _ = writeln!(out, "{},{},{},{},{}", r.replicate, w + 1, b + 1, r.value, r.ratio);
                }
                _ => {
                    let _ = writeln!(out, "{},{},{}", r.replicate, r.value, r.ratio);
                }
            }
        }
        let _ = writeln!(out, "# max_deviation={}", self.max_deviation);
        if let Some(d) = self.block_mean_deviation {
            let _ = writeln!(out, "# block_mean_deviation={d}");
        }
        if let Some(d) = self.vertex_max_deviation {
            let _ = writeln!(out, "# vertex_max_deviation={d}");
        }
        let _ = writeln!(out, "# resamples={}", self.resamples);
        out
    }
}

struct LlnReplicate {
    records: Vec<LlnRecord>,
    block_dev: f64,
    vertex_dev: f64,
    resamples: usize,
}

fn lln_replicate(plan: &ExperimentPlan, params: &DerivedParams, targets: &[usize], r: usize) -> Result<LlnReplicate> {
    let (g, resamples) = sample_connected(&plan.config, plan.base_seed, r, plan.max_resample)?;
    let h = exact_averages(&g)?;
    let n = g.n() as f64;
    if plan.mode == Mode::LlnStart {
        let hv = h.h_start[0];
        return Ok(LlnReplicate {
            records: vec![LlnRecord {
                replicate: r,
                target: None,
                block: None,
                value: hv,
                ratio: hv / n,
            }],
            block_dev: 0.0,
            vertex_dev: 0.0,
            resamples,
        });
    }
    let ratio = |w: usize| h.h_target[w] * params.gamma[g.block_of(w)] / (n * params.gamma_bar);
    let records = targets
        .iter()
        .map(|&w| LlnRecord {
            replicate: r,
            target: Some(w),
            block: Some(g.block_of(w)),
            value: h.h_target[w],
            ratio: ratio(w),
        })
        .collect();
    let mut sums = vec![0.0; params.m()];
    let mut vertex_dev = 0.0f64;
    for w in 0..g.n() {
        let x = ratio(w);
        sums[g.block_of(w)] += x;
        vertex_dev = vertex_dev.max((x - 1.0).abs());
    }
    let nb = params.block_size() as f64;
    let block_dev = sums.iter().fold(0.0f64, |acc, s| acc.max((s / nb - 1.0).abs()));
    Ok(LlnReplicate {
        records,
        block_dev,
        vertex_dev,
        resamples,
    })
}

/// Start mode records `H^v / N`; target mode records
/// `H_w gamma_{B(w)} / (N gamma_bar)` for the plan's targets.
pub fn run_lln(plan: &ExperimentPlan) -> Result<LlnRun> {
    plan.validate()?;
    if !matches!(plan.mode, Mode::LlnStart | Mode::LlnTarget) {
        return Err(Error::InvalidArgument("run_lln needs mode lln_start or lln_target".into()));
    }
    let params = derive(&plan.config)?;
    let targets = plan.targets.resolve(&plan.config)?;
    let reps: Vec<LlnReplicate> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| lln_replicate(plan, &params, &targets, r))
        .collect::<Result<_>>()?;
    let records: Vec<LlnRecord> = reps.iter().flat_map(|r| r.records.iter().cloned()).collect();
    let max_deviation = records.iter().fold(0.0f64, |acc, r| acc.max((r.ratio - 1.0).abs()));
    let target_mode = plan.mode == Mode::LlnTarget;
    Ok(LlnRun {
        mode: plan.mode,
        max_deviation,
        block_mean_deviation: target_mode.then(|| reps.iter().fold(0.0f64, |a, r| a.max(r.block_dev))),
        vertex_max_deviation: target_mode.then(|| reps.iter().fold(0.0f64, |a, r| a.max(r.vertex_dev))),
        resamples: reps.iter().map(|r| r.resamples).sum(),
        records,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltRun {
    pub mode: Mode,
    /// Raw per-replicate values: `H_w` or `|E|`.
    pub raw: Vec<f64>,
    pub statistics: Vec<f64>,
    pub summary: CltSummary,
    pub resamples: usize,
}

impl CltRun {
    pub fn to_csv(&self) -> String {
        let column = if self.mode == Mode::CltEdges { "edges" } else { "h_w" };
        let mut out = format!("replicate,{column},statistic\n");
        for (i, (x, s)) in self.raw.iter().zip(&self.statistics).enumerate() {
            let _ = writeln!(out, "{i},{x},{s}");
        }
        out.push_str(&self.summary.footer());
        let _ = writeln!(out, "# resamples={}", self.resamples);
        out
    }

    pub fn histogram_csv(&self) -> String {
        histogram_csv(&self.statistics, default_bins(self.statistics.len()))
    }
}

/// Standardizes raw `H_w` values taken in `block`; lets the two scalings be
/// compared on the same graphs.
pub fn standardize_all(params: &DerivedParams, block: usize, raw: &[f64], scaling: CltScaling) -> Result<(Vec<f64>, f64)> {
    let mut target_variance = 1.0;
    let stats = raw
        .iter()
        .map(|&h| {
            let s = clt_standardize(params, block, h, scaling)?;
            target_variance = s.target_variance;
            Ok(s.statistic)
        })
        .collect::<Result<_>>()?;
    Ok((stats, target_variance))
}

/// `H_w` for the first vertex of `plan.clt_block` in every replicate,
/// standardized with `plan.scaling`.
pub fn run_clt_target(plan: &ExperimentPlan) -> Result<CltRun> {
    plan.validate()?;
    let params = derive(&plan.config)?;
    if plan.scaling == CltScaling::IdenticalP && plan.config.identical_p().is_none() {
        return Err(Error::InvalidArgument(
            "identical-p scaling requested but the intra-block probabilities differ".into(),
        ));
    }
    let w = plan.clt_block * plan.config.block_size();
    let reps: Vec<(f64, usize)> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| {
            let (g, resamples) = sample_connected(&plan.config, plan.base_seed, r, plan.max_resample)?;
            Ok((target_hitting_time(&g, w)?, resamples))
        })
        .collect::<Result<_>>()?;
    let raw: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let (statistics, target_variance) = standardize_all(&params, plan.clt_block, &raw, plan.scaling)?;
    Ok(CltRun {
        mode: Mode::CltTarget,
        summary: CltSummary::from_samples(&statistics, target_variance),
        statistics,
        raw,
        resamples: reps.iter().map(|r| r.1).sum(),
    })
}

/// `(|E| - mu_in - mu_out) / tau` over replicates; graphs need not be connected.
pub fn run_clt_edges(plan: &ExperimentPlan) -> Result<CltRun> {
    plan.validate()?;
    let params = derive(&plan.config)?;
    if !(params.tau2 > 0.0) {
        return Err(Error::Degenerate("no edge randomness: every probability is 0 or 1".into()));
    }
    let mean = params.mu_in + params.mu_out;
    let tau = params.tau2.sqrt();
    let raw: Vec<f64> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| {
            let c = plan.config.clone().with_seed(replicate_seed(plan.base_seed, r));
            Ok(sample(&c)?.edge_count() as f64)
        })
        .collect::<Result<_>>()?;
    let statistics: Vec<f64> = raw.iter().map(|e| (e - mean) / tau).collect();
    Ok(CltRun {
        mode: Mode::CltEdges,
        summary: CltSummary::from_samples(&statistics, 1.0),
        statistics,
        raw,
        resamples: 0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReplicate {
    pub replicate: usize,
    pub reports: Vec<BoundReport>,
    pub weyl: WeylCheck,
    /// Smallest `c` that makes this replicate's `||X||_2` envelope hold.
    pub required_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRun {
    pub replicates: Vec<BoundsReplicate>,
    /// Pass fraction per bound name, in name order.
    pub pass_fractions: BTreeMap<&'static str, f64>,
    /// 95% empirical quantile of the per-replicate required `c`.
    pub calibrated_c: f64,
    pub weyl_holds: bool,
    pub resamples: usize,
}

impl BoundsRun {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replicate,bound,empirical,envelope,satisfied\n");
        for rep in &self.replicates {
            for b in &rep.reports {
                let _ = writeln!(out, "{},{},{},{},{}", rep.replicate, b.name, b.empirical, b.envelope, b.satisfied);
            }
        }
        for (name, f) in &self.pass_fractions {
            let _ = writeln!(out, "# pass_fraction_{name}={f}");
        }
        let _ = writeln!(out, "# calibrated_c={}", self.calibrated_c);
        let _ = writeln!(out, "# weyl_holds={}", self.weyl_holds);
        let _ = writeln!(out, "# resamples={}", self.resamples);
        out
    }
}

/// Empirical `level`-quantile (nearest rank).
pub fn quantile(values: &[f64], level: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((level * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn run_bounds(plan: &ExperimentPlan) -> Result<BoundsRun> {
    plan.validate()?;
    let params = derive(&plan.config)?;
    let reps: Vec<(BoundsReplicate, usize)> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| {
            let (g, resamples) = sample_connected(&plan.config, plan.base_seed, r, plan.max_resample)?;
            let snap = snapshot(&g, &params)?;
            Ok((
                BoundsReplicate {
                    replicate: r,
                    reports: evaluate_bounds(&snap, &params, &plan.bounds),
                    weyl: weyl_check(&snap),
                    required_c: required_c(&params, snap.x_norm),
                },
                resamples,
            ))
        })
        .collect::<Result<_>>()?;
    let mut pass: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    for (rep, _) in &reps {
        for b in &rep.reports {
            let e = pass.entry(b.name).or_default();
            e.0 += b.satisfied as usize;
            e.1 += 1;
        }
    }
    let cs: Vec<f64> = reps.iter().map(|r| r.0.required_c).collect();
    Ok(BoundsRun {
        pass_fractions: pass.into_iter().map(|(k, (p, t))| (k, p as f64 / t as f64)).collect(),
        calibrated_c: quantile(&cs, 0.95),
        weyl_holds: reps.iter().all(|r| r.0.weyl.holds),
        resamples: reps.iter().map(|r| r.1).sum(),
        replicates: reps.into_iter().map(|r| r.0).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Lln(LlnRun),
    Clt(CltRun),
    Bounds(BoundsRun),
}

impl ExperimentOutput {
    pub fn to_csv(&self) -> String {
        match self {
            ExperimentOutput::Lln(r) => r.to_csv(),
            ExperimentOutput::Clt(r) => r.to_csv(),
            ExperimentOutput::Bounds(r) => r.to_csv(),
        }
    }

    pub fn histogram_csv(&self) -> Option<String> {
        match self {
            ExperimentOutput::Clt(r) => Some(r.histogram_csv()),
            _ => None,
        }
    }
}

pub fn run(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    Ok(match plan.mode {
        Mode::LlnStart | Mode::LlnTarget => ExperimentOutput::Lln(run_lln(plan)?),
        Mode::CltTarget => ExperimentOutput::Clt(run_clt_target(plan)?),
        Mode::CltEdges => ExperimentOutput::Clt(run_clt_edges(plan)?),
        Mode::Bounds => ExperimentOutput::Bounds(run_bounds(plan)?),
    })
}
