//! Block model configuration, the scalar parameters derived from it, and
//! finite-N checks of the asymptotic conditions under which the hitting-time
//! laws hold.
//!
//! Block indices are zero-based throughout the library API.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cut-off for the finite-N surrogates of `a -> 0`, `a << b` and `a >> b`.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 0.1;

fn default_true() -> bool {
    true
}

/// Parameters of a stochastic block model with `m` equal blocks of `n / m`
/// vertices, intra-block edge probabilities `p` (descending) and a common
/// inter-block probability `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockModelConfig {
    pub n: usize,
    pub m: usize,
    pub p: Vec<f64>,
    pub q: f64,
    #[serde(default = "default_true")]
    pub allow_loops: bool,
    #[serde(default)]
    pub seed: u64,
}

impl BlockModelConfig {
    pub fn new(n: usize, m: usize, p: Vec<f64>, q: f64) -> Result<Self> {
        let config = Self {
            n,
            m,
            p,
            q,
            allow_loops: true,
            seed: 0,
        };
        config.validate()?;
        Ok(config)
    }

    /// Convenience constructor for `m` blocks sharing one intra-block probability.
    pub fn identical(n: usize, m: usize, p: f64, q: f64) -> Result<Self> {
        Self::new(n, m, vec![p; m], q)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_loops(mut self, allow_loops: bool) -> Self {
        self.allow_loops = allow_loops;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.m == 0 || self.m >= self.n {
            return bad(format!("m must satisfy 1 <= m < n (got m={}, n={})", self.m, self.n));
        }
        if self.n % self.m != 0 {
            return bad(format!(
                "n must be a multiple of m so that blocks have equal size (got n={}, m={})",
                self.n, self.m
            ));
        }
        if self.p.len() != self.m {
            return bad(format!(
                "p must list exactly m={} intra-block probabilities (got {})",
                self.m,
                self.p.len()
            ));
        }
        for (i, &pi) in self.p.iter().enumerate() {
            if !(0.0..=1.0).contains(&pi) {
                return bad(format!("p[{}]={} is not a probability in [0,1]", i + 1, pi));
            }
        }
        if !(0.0..=1.0).contains(&self.q) {
            return bad(format!("q={} is not a probability in [0,1]", self.q));
        }
        if self.p.windows(2).any(|w| w[0] < w[1]) {
            return bad("p must be sorted in descending order; relabel the blocks".into());
        }
        Ok(())
    }

    pub fn block_size(&self) -> usize {
        self.n / self.m
    }

    /// Block index of vertex `v` (both zero-based).
    pub fn block_of(&self, v: usize) -> usize {
        v / self.block_size()
    }

    /// The common intra-block probability, if all blocks share one.
    pub fn identical_p(&self) -> Option<f64> {
        let first = self.p[0];
        self.p.iter().all(|&x| x == first).then_some(first)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }
}

/// Scalar quantities derived from a [`BlockModelConfig`].
///
/// `gamma`/`upsilon2` are the expected degree and degree variance of a vertex
/// in each block, with the loop counted once. The edge-count moments honour
/// `allow_loops`. The regime values `kappa_tilde`, `zeta`, `rho_n` and `alpha`
/// only exist when every block has the same intra-block probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub config: BlockModelConfig,
    pub gamma: Vec<f64>,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_bar: f64,
    pub p_bar: f64,
    pub sigma2: f64,
    pub upsilon2: Vec<f64>,
    pub upsilon_bar2: f64,
    pub mu_in: f64,
    pub mu_out: f64,
    pub tau_in2: f64,
    pub tau_out2: f64,
    pub tau2: f64,
    /// `(m-1) q / p_min` at this N; `None` when `m = 1` or `q = 0`.
    pub kappa: Option<f64>,
    pub kappa_tilde: Option<f64>,
    pub zeta: Option<f64>,
    pub rho_n: Option<f64>,
    pub alpha: Option<f64>,
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Variance correction of the identical-p central limit theorem.
///
/// Equals `1 - (1 + kt) / (1 + zeta kt)^2`; zero at both ends of the regime.
pub fn variance_correction(kappa_tilde: f64, zeta: f64) -> f64 {
    if kappa_tilde == 0.0 || kappa_tilde.is_infinite() {
        return 0.0;
    }
    let denom = 1.0 + zeta * kappa_tilde;
    kappa_tilde * (2.0 * zeta - 1.0 + kappa_tilde * zeta * zeta) / (denom * denom)
}

fn finite_or_none(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

pub fn derive(config: &BlockModelConfig) -> Result<DerivedParams> {
    config.validate()?;
    let n = config.n as f64;
    let m = config.m as f64;
    let nb = n / m;
    let q = config.q;
    let p = &config.p;

    let gamma: Vec<f64> = p.iter().map(|&pm| nb * pm + (m - 1.0) * nb * q).collect();
    let upsilon2: Vec<f64> = p
        .iter()
        .map(|&pm| nb * pm * (1.0 - pm) + (m - 1.0) * nb * q * (1.0 - q))
        .collect();
    let gamma_min = gamma.iter().copied().fold(f64::INFINITY, f64::min);
    let gamma_max = gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gamma_bar = gamma.iter().sum::<f64>() / m;
    let p_bar = p.iter().sum::<f64>() / m;
    let max_var = p.iter().map(|&pm| pm * (1.0 - pm)).fold(0.0, f64::max);
    let sigma2 = (max_var + (m - 1.0) * q * (1.0 - q)) / m;
    let upsilon_bar2 = upsilon2.iter().sum::<f64>() / m;

    // Pairs inside one block, loops included when they can occur.
    let inside_pairs = if config.allow_loops {
        choose2(nb + 1.0)
    } else {
        choose2(nb)
    };
    let mu_in = p.iter().map(|&pm| inside_pairs * pm).sum();
    let tau_in2 = p.iter().map(|&pm| inside_pairs * pm * (1.0 - pm)).sum();
    let across_pairs = choose2(m) * nb * nb;
    let mu_out = across_pairs * q;
    let tau_out2 = across_pairs * q * (1.0 - q);

    let p_min = p[config.m - 1];
    let kappa = (config.m > 1 && q > 0.0).then(|| (m - 1.0) * q / p_min);

    let (mut kappa_tilde, mut zeta, mut rho_n, mut alpha) = (None, None, None, None);
    if let Some(pc) = config.identical_p() {
        let num = (m - 1.0) * q * (1.0 - q);
        let den = pc * (1.0 - pc);
        let kt = if num == 0.0 { 0.0 } else { num / den };
        let z = finite_or_none((1.0 - pc) / (1.0 - q));
        let rho = if kt.is_finite() {
            (pc / (n * m * (1.0 - pc))).sqrt()
        } else {
            ((m - 1.0) * q / (n * m * (1.0 - q))).sqrt()
        };
        kappa_tilde = Some(kt);
        zeta = z;
        rho_n = Some(rho);
        alpha = match z {
            Some(zv) => finite_or_none(variance_correction(kt, zv)),
            None if kt == 0.0 || kt.is_infinite() => Some(0.0),
            None => None,
        };
    }

    Ok(DerivedParams {
        config: config.clone(),
        gamma,
        gamma_min,
        gamma_max,
        gamma_bar,
        p_bar,
        sigma2,
        upsilon2,
        upsilon_bar2,
        mu_in,
        mu_out,
        tau_in2,
        tau_out2,
        tau2: tau_in2 + tau_out2,
        kappa,
        kappa_tilde,
        zeta,
        rho_n,
        alpha,
    })
}

impl DerivedParams {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn block_size(&self) -> usize {
        self.config.block_size()
    }

    pub fn p_min(&self) -> f64 {
        self.config.p[self.config.m - 1]
    }

    pub fn p_max(&self) -> f64 {
        self.config.p[0]
    }

    pub fn upsilon(&self, block: usize) -> f64 {
        self.upsilon2[block].sqrt()
    }

    /// The assortativity surrogate `(m-1) q / p_min`, with a diagnostic when
    /// it does not exist.
    pub fn kappa(&self) -> Result<f64> {
        if self.config.m == 1 {
            return Err(Error::Undefined(
                "kappa needs at least two blocks; with m = 1 the model is Erdos-Renyi".into(),
            ));
        }
        self.kappa
            .ok_or(Error::DisconnectedInExpectation { blocks: self.config.m })
    }

    fn check_block(&self, block: usize) -> Result<()> {
        if block >= self.config.m {
            return Err(Error::InvalidArgument(format!(
                "block index {} out of range for {} blocks",
                block, self.config.m
            )));
        }
        Ok(())
    }
}

/// Law-of-large-numbers predictions for the start- and target-averaged
/// hitting times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlnPrediction {
    pub h_v_pred: f64,
    pub h_w_pred: f64,
}

pub fn lln_prediction(params: &DerivedParams, block: usize) -> Result<LlnPrediction> {
    params.check_block(block)?;
    let n = params.n() as f64;
    Ok(LlnPrediction {
        h_v_pred: n,
        h_w_pred: n * params.gamma_bar / params.gamma[block],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CltScaling {
    /// `gamma_m^2 / (N upsilon_m gamma_bar) (H_w - N gamma_bar / gamma_m)` against N(0, 1).
    General,
    /// `rho_N (H_w - N)` against N(0, 1 - alpha); identical p only.
    IdenticalP,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardized {
    pub statistic: f64,
    pub target_variance: f64,
}

/// Centres and scales a target-averaged hitting time for comparison with its
/// limiting normal law.
pub fn clt_standardize(
    params: &DerivedParams,
    block: usize,
    h_w: f64,
    scaling: CltScaling,
) -> Result<Standardized> {
    params.check_block(block)?;
    let n = params.n() as f64;
    match scaling {
        CltScaling::General => {
            let g = params.gamma[block];
            let slope = g * g / (n * params.upsilon(block) * params.gamma_bar);
            Ok(Standardized {
                statistic: slope * (h_w - n * params.gamma_bar / g),
                target_variance: 1.0,
            })
        }
        CltScaling::IdenticalP => {
            if params.config.identical_p().is_none() {
                return Err(Error::InvalidArgument(
                    "identical-p scaling requested but the intra-block probabilities differ".into(),
                ));
            }
            let (rho, alpha) = params.rho_n.zip(params.alpha).ok_or_else(|| {
                Error::Undefined("rho_N / alpha undefined for this parameter choice".into())
            })?;
            Ok(Standardized {
                statistic: rho * (h_w - n),
                target_variance: 1.0 - alpha,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionMode {
    Lln,
    Clt,
    IdenticalP,
}

/// How the two sides of an asymptotic condition are compared at finite N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `lhs -> 0`; `rhs` is 1 and passes when `ratio < threshold`.
    Vanishes,
    /// `lhs << rhs`; passes when `lhs / rhs < threshold`.
    MuchLess,
    /// `lhs >> rhs`; passes when `lhs / rhs > 1 / threshold`.
    MuchGreater,
    /// Holds exactly or not at all.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRecord {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl ConditionRecord {
    fn new(name: &'static str, lhs: f64, rhs: f64, relation: Relation, threshold: f64) -> Self {
        let ratio = match (lhs, rhs) {
            (l, _) if l == 0.0 => 0.0,
            (_, r) if r == 0.0 => f64::INFINITY,
            (l, r) => l / r,
        };
        let pass = match relation {
            Relation::Vanishes | Relation::MuchLess => ratio < threshold,
            Relation::MuchGreater => ratio > 1.0 / threshold,
            Relation::Exact => lhs == 0.0,
        };
        Self {
            name,
            lhs,
            rhs,
            ratio,
            relation,
            pass,
        }
    }

    /// Fails the threshold but the ratio still points the right way.
    pub fn marginal(&self) -> bool {
        !self.pass
            && match self.relation {
                Relation::Vanishes | Relation::MuchLess => self.ratio < 1.0,
                Relation::MuchGreater => self.ratio > 1.0,
                Relation::Exact => false,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub mode: ConditionMode,
    pub n: usize,
    pub threshold: f64,
    pub records: Vec<ConditionRecord>,
    pub kappa: Option<f64>,
    pub kappa_tilde: Option<f64>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// `condition,lhs,rhs,ratio,pass`, followed by `#`-prefixed regime lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,lhs,rhs,ratio,pass\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{},{}", r.name, r.lhs, r.rhs, r.ratio, r.pass);
        }
        let _ = writeln!(out, "# threshold={}", self.threshold);
        let fmt = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), |v| v.to_string());
        let _ = writeln!(out, "# kappa={}", fmt(self.kappa));
        if self.mode == ConditionMode::IdenticalP {
            let _ = writeln!(out, "# kappa_tilde={}", fmt(self.kappa_tilde));
        }
        out
    }
}

fn worst_over_blocks<F: Fn(usize) -> (f64, f64)>(m: usize, f: F) -> (f64, f64) {
    (0..m)
        .map(f)
        .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)))
        .expect("at least one block")
}

pub fn check_conditions(
    config: &BlockModelConfig,
    mode: ConditionMode,
    threshold: f64,
) -> Result<ConditionReport> {
    let params = derive(config)?;
    let n = config.n as f64;
    let m = config.m as f64;
    let ln = n.ln();
    let q = config.q;
    let (p_min, p_max) = (params.p_min(), params.p_max());
    let mut records = Vec::new();

    match mode {
        ConditionMode::Lln => {
            let spread = (params.gamma_max / params.gamma_min).powi(2);
            let (lhs, _) = worst_over_blocks(config.m, |b| {
                let pb = config.p[b];
                (m * ln.powi(4) / (n * pb + n * (m - 1.0) * q) * spread, 1.0)
            });
            records.push(ConditionRecord::new("connectivity", lhs, 1.0, Relation::Vanishes, threshold));
            let lhs = ((m - 1.0) * q).powi(2);
            let rhs = (m * ln / n).powf(0.25) * p_min.powf(1.25) * p_max.sqrt();
            records.push(ConditionRecord::new(
                "inter_block_density",
                lhs,
                rhs,
                Relation::MuchGreater,
                threshold,
            ));
        }
        ConditionMode::Clt => {
            let spread = (p_max / p_min).powi(2);
            let (lhs, _) = worst_over_blocks(config.m, |b| {
                let pb = config.p[b];
                let var = n * pb * (1.0 - pb) + n * (m - 1.0) * q * (1.0 - q);
                (m * ln.powi(4) / var * spread, 1.0)
            });
            records.push(ConditionRecord::new(
                "connectivity_clt",
                lhs,
                1.0,
                Relation::Vanishes,
                threshold,
            ));
            let (lhs, rhs) = worst_over_blocks(config.m, |b| {
                (params.gamma[b] / params.gamma_bar, params.upsilon(b) / params.p_bar)
            });
            records.push(ConditionRecord::new("degree_balance", lhs, rhs, Relation::MuchLess, threshold));
            let ups_bar = params.upsilon_bar2.sqrt();
            let (lhs, rhs) = worst_over_blocks(config.m, |b| {
                (
                    ups_bar / params.upsilon(b) * params.gamma[b] / params.gamma_bar,
                    n.sqrt(),
                )
            });
            records.push(ConditionRecord::new(
                "variance_balance",
                lhs,
                rhs,
                Relation::MuchLess,
                threshold,
            ));
            let (lhs, _) = worst_over_blocks(config.m, |b| {
                let denom = params.gamma_min * ((m - 1.0) * q).powi(2);
                let lhs = params.gamma[b] / params.upsilon(b) * p_min * p_min / denom;
                (if lhs.is_nan() { f64::INFINITY } else { lhs }, 1.0)
            });
            records.push(ConditionRecord::new(
                "spectral_negligibility",
                lhs,
                1.0,
                Relation::Vanishes,
                threshold,
            ));
        }
        ConditionMode::IdenticalP => {
            let p = params.p_bar;
            records.push(ConditionRecord::new(
                "identical_p",
                p_max - p_min,
                p,
                Relation::Exact,
                threshold,
            ));
            let lhs = m * ln.powi(4) / (n * p + n * (m - 1.0) * q);
            records.push(ConditionRecord::new(
                "connectivity_identical_p",
                lhs,
                1.0,
                Relation::Vanishes,
                threshold,
            ));
            let rhs = (p * ln / (n * m)).sqrt();
            records.push(ConditionRecord::new(
                "inter_block_density_identical_p",
                q,
                rhs,
                Relation::MuchGreater,
                threshold,
            ));
        }
    }

    Ok(ConditionReport {
        mode,
        n: config.n,
        threshold,
        records,
        kappa: params.kappa,
        kappa_tilde: params.kappa_tilde,
    })
}
