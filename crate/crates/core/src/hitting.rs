//! Hitting times of the simple random walk, computed three ways: exactly from
//! the fundamental matrix, from the spectrum of `B = D^{-1/2} A D^{-1/2}`, and
//! by simulating walks.
//!
//! A loop at `v` counts once in `d_v`, so the walk stays put with probability
//! `1 / d_v`. The stationary law is `pi_v = d_v / (2|E| - |L|)`.

use std::fmt::Write as _;

use faer::prelude::*;
use faer::{Mat, Side};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{is_connected, Graph};
use crate::model::DerivedParams;
use crate::rng::stream_rng;
use crate::spectral::{normalized_adjacency, SpectralDecomposition};

/// Where the numbers in a [`HittingResult`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// LU solve with the non-symmetric fundamental matrix; full `H_vw` kept.
    FundamentalMatrix,
    /// Cholesky inverse of the symmetrised fundamental matrix; averages only.
    SymmetricInverse,
}

#[derive(Debug, Clone)]
pub struct HittingResult {
    /// `H[(v, w)]`, expected steps from `v` to first reach `w`.
    pub h_matrix: Option<Mat<f64>>,
    pub pi: Vec<f64>,
    /// `H_w = sum_v pi_v H_vw`.
    pub h_target: Vec<f64>,
    /// `H^v = sum_w pi_w H_vw`.
    pub h_start: Vec<f64>,
    pub spectral_h_start: Option<f64>,
    pub spectral_h_target: Option<Vec<f64>>,
    pub method: Method,
}

impl HittingResult {
    /// Fills the spectral columns from a full decomposition of `B`.
    pub fn attach_spectral(&mut self, spec: &SpectralDecomposition, g: &Graph) -> Result<()> {
        self.spectral_h_start = Some(spectral_h_start(spec)?);
        self.spectral_h_target = Some(spectral_h_target_all(spec, g)?);
        Ok(())
    }
}

pub fn stationary_distribution(g: &Graph) -> Vec<f64> {
    let vol = g.volume() as f64;
    g.degrees().iter().map(|&d| d as f64 / vol).collect()
}

fn require_connected(g: &Graph) -> Result<()> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        if g.n() > 1 {
            return Err(Error::IsolatedVertex { vertex: v + 1 });
        }
    }
    if !is_connected(g) || g.volume() == 0 {
        return Err(Error::Disconnected);
    }
    Ok(())
}

fn check_vertex(g: &Graph, v: usize) -> Result<()> {
    if v >= g.n() {
        return Err(Error::InvalidArgument(format!(
            "vertex {} out of range 1..={}",
            v + 1,
            g.n()
        )));
    }
    Ok(())
}

/// All pairwise hitting times from `Z = (I - P + 1 pi^T)^{-1}`:
/// `H_vw = (Z_ww - Z_vw) / pi_w`.
pub fn exact_hitting(g: &Graph) -> Result<HittingResult> {
    require_connected(g)?;
    let n = g.n();
    let pi = stationary_distribution(g);
    let inv_deg: Vec<f64> = g.degrees().iter().map(|&d| 1.0 / d as f64).collect();
    let fundamental = Mat::from_fn(n, n, |v, w| {
        let id = if v == w { 1.0 } else { 0.0 };
        let step = if g.has_edge(v, w) { inv_deg[v] } else { 0.0 };
        id - step + pi[w]
    });
    let z = fundamental.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    if (0..n).any(|i| !z[(i, i)].is_finite()) {
        return Err(Error::Numerical("fundamental matrix is singular".into()));
    }
    let h = Mat::from_fn(n, n, |v, w| if v == w { 0.0 } else { (z[(w, w)] - z[(v, w)]) / pi[w] });
    let h_target = (0..n)
        .map(|w| (0..n).map(|v| pi[v] * h[(v, w)]).sum())
        .collect();
    let h_start = (0..n)
        .map(|v| (0..n).map(|w| pi[w] * h[(v, w)]).sum())
        .collect();
    Ok(HittingResult {
        h_matrix: Some(h),
        pi,
        h_target,
        h_start,
        spectral_h_start: None,
        spectral_h_target: None,
        method: Method::FundamentalMatrix,
    })
}

/// `I - B + u u^T` with `u = sqrt(pi)`. Similar to `I - P + 1 pi^T`, so its
/// inverse has the same diagonal as the fundamental matrix, and it is
/// symmetric positive definite on a connected graph.
fn symmetric_fundamental(g: &Graph, pi: &[f64]) -> Result<Mat<f64>> {
    let b = normalized_adjacency(g)?;
    let u: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let n = g.n();
    Ok(Mat::from_fn(n, n, |v, w| {
        let id = if v == w { 1.0 } else { 0.0 };
        id - b[(v, w)] + u[v] * u[w]
    }))
}

/// `H_w` for every target and the common `H^v`, without forming `H`.
pub fn exact_averages(g: &Graph) -> Result<HittingResult> {
    require_connected(g)?;
    let n = g.n();
    let pi = stationary_distribution(g);
    let s = symmetric_fundamental(g, &pi)?;
    let llt = s
        .llt(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Cholesky of the fundamental matrix failed: {e:?}")))?;
    let z = llt.solve(Mat::<f64>::identity(n, n));
    let h_target: Vec<f64> = (0..n).map(|w| z[(w, w)] / pi[w] - 1.0).collect();
    let trace: f64 = (0..n).map(|w| z[(w, w)]).sum();
    Ok(HittingResult {
        h_matrix: None,
        pi,
        h_target,
        h_start: vec![trace - 1.0; n],
        spectral_h_start: None,
        spectral_h_target: None,
        method: Method::SymmetricInverse,
    })
}

/// `H_w` for one target with a single Cholesky factorisation and one solve.
pub fn target_hitting_time(g: &Graph, w: usize) -> Result<f64> {
    check_vertex(g, w)?;
    require_connected(g)?;
    let pi = stationary_distribution(g);
    let s = symmetric_fundamental(g, &pi)?;
    let llt = s
        .llt(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Cholesky of the fundamental matrix failed: {e:?}")))?;
    let mut e = Mat::<f64>::zeros(g.n(), 1);
    e[(w, 0)] = 1.0;
    let col = llt.solve(e);
    Ok(col[(w, 0)] / pi[w] - 1.0)
}

/// Smallest admissible `|1 - lambda_k|`, `k >= 2`.
pub const SPECTRAL_GAP_FLOOR: f64 = 1e-12;

fn check_gap(spec: &SpectralDecomposition) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if spec.eigenvalues[1..].iter().any(|l| (1.0 - l).abs() < SPECTRAL_GAP_FLOOR) {
        return Err(Error::Degenerate(
            "graph effectively disconnected or bipartite-degenerate: 1 - lambda_k vanishes for some k >= 2".into(),
        ));
    }
    Ok(())
}

/// `H^v = sum_{k>=2} 1 / (1 - lambda_k(B))`.
pub fn spectral_h_start(spec: &SpectralDecomposition) -> Result<f64> {
    check_gap(spec)?;
    Ok(spec.eigenvalues[1..].iter().map(|l| 1.0 / (1.0 - l)).sum())
}

fn weighted_sum(spec: &SpectralDecomposition, w: usize) -> Result<f64> {
    let u = spec.vectors()?;
    Ok(spec.eigenvalues[1..]
        .iter()
        .enumerate()
        .map(|(i, l)| u[(w, i + 1)].powi(2) / (1.0 - l))
        .sum())
}

fn check_decomposition(spec: &SpectralDecomposition, g: &Graph) -> Result<()> {
    if spec.len() != g.n() {
        return Err(Error::InvalidArgument("decomposition does not match the graph size".into()));
    }
    check_gap(spec)?;
    if g.degrees().contains(&0) {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// `H_w = ((2|E| - |L|) / d_w) sum_{k>=2} u_{k,w}^2 / (1 - lambda_k)`.
pub fn spectral_h_target(spec: &SpectralDecomposition, g: &Graph, w: usize) -> Result<f64> {
    check_vertex(g, w)?;
    check_decomposition(spec, g)?;
    Ok(g.volume() as f64 / g.degree(w) as f64 * weighted_sum(spec, w)?)
}

pub fn spectral_h_target_all(spec: &SpectralDecomposition, g: &Graph) -> Result<Vec<f64>> {
    (0..g.n()).map(|w| spectral_h_target(spec, g, w)).collect()
}

/// Split of `sum_{k>=2} u_{k,w}^2 / (1 - lambda_k)` into
/// `1 + B_ww - 2 pi_w + tail` with `tail = sum_{k>=2} lambda_k^2 u_{k,w}^2 / (1 - lambda_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZnDecomposition {
    pub one: f64,
    pub b_ww: f64,
    pub two_pi_w: f64,
    pub tail: f64,
    /// `one + b_ww - two_pi_w + tail`.
    pub total: f64,
    /// The left-hand sum, evaluated directly.
    pub direct: f64,
}

pub fn zn_decomposition(spec: &SpectralDecomposition, g: &Graph, w: usize) -> Result<ZnDecomposition> {
    check_vertex(g, w)?;
    check_decomposition(spec, g)?;
    let u = spec.vectors()?;
    let tail = spec.eigenvalues[1..]
        .iter()
        .enumerate()
        .map(|(i, l)| l * l * u[(w, i + 1)].powi(2) / (1.0 - l))
        .sum::<f64>();
    let d = g.degree(w) as f64;
    let b_ww = if g.has_edge(w, w) { 1.0 / d } else { 0.0 };
    let two_pi_w = 2.0 * d / g.volume() as f64;
    Ok(ZnDecomposition {
        one: 1.0,
        b_ww,
        two_pi_w,
        tail,
        total: 1.0 + b_ww - two_pi_w + tail,
        direct: weighted_sum(spec, w)?,
    })
}

/// Scale against which the Z_N tail is measured: `1 / (gamma_min kappa^2)`
/// when `kappa < 1`, `1 / gamma_min` otherwise. `tail / scale` is the
/// constant the sample needs.
pub fn zn_tail_scale(params: &DerivedParams) -> f64 {
    match params.kappa {
        Some(k) if k < 1.0 => 1.0 / (params.gamma_min * k * k),
        _ => 1.0 / params.gamma_min,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkEstimate {
    pub estimate: f64,
    /// Sample standard deviation over `sqrt` of the completed walks.
    pub std_error: f64,
    pub n_walks: usize,
    pub max_steps: u64,
    /// Walks that hit the step cap; they are left out of the mean.
    pub truncated: usize,
    pub biased: bool,
}

/// `100 N ln N`, at least 1000.
pub fn default_max_steps(n: usize) -> u64 {
    let n = n as f64;
    ((100.0 * n * n.max(1.0).ln()).ceil() as u64).max(1000)
}

fn adjacency_lists(g: &Graph) -> Vec<Vec<u32>> {
    (0..g.n()).map(|v| g.neighbors(v).map(|w| w as u32).collect()).collect()
}

fn walk<R: Rng>(adj: &[Vec<u32>], start: usize, w: usize, max_steps: u64, rng: &mut R) -> Option<u64> {
    let mut at = start;
    let mut steps = 0u64;
    while at != w {
        if steps == max_steps {
            return None;
        }
        let nb = &adj[at];
        at = nb[rng.gen_range(0..nb.len())] as usize;
        steps += 1;
    }
    Some(steps)
}

fn summarize(samples: Vec<Option<u64>>, max_steps: u64) -> WalkEstimate {
    let n_walks = samples.len();
    let done: Vec<f64> = samples.iter().flatten().map(|&s| s as f64).collect();
    let truncated = n_walks - done.len();
    let k = done.len() as f64;
    let mean = if done.is_empty() { f64::NAN } else { done.iter().sum::<f64>() / k };
    let std_error = if done.len() > 1 {
        let var = done.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    WalkEstimate {
        estimate: mean,
        std_error,
        n_walks,
        max_steps,
        truncated,
        biased: truncated > 0,
    }
}

fn check_walk_args(g: &Graph, n_walks: usize) -> Result<()> {
    if n_walks == 0 {
        return Err(Error::InvalidArgument("n_walks must be positive".into()));
    }
    require_connected(g)
}

/// Monte Carlo estimate of `H_vw`; walk `i` draws from stream `i` of `seed`.
pub fn mc_hitting(
    g: &Graph,
    v: usize,
    w: usize,
    n_walks: usize,
    max_steps: u64,
    seed: u64,
) -> Result<WalkEstimate> {
    check_vertex(g, v)?;
    check_vertex(g, w)?;
    check_walk_args(g, n_walks)?;
    let adj = adjacency_lists(g);
    let samples = (0..n_walks)
        .into_par_iter()
        .map(|i| walk(&adj, v, w, max_steps, &mut stream_rng(seed, i as u64)))
        .collect();
    Ok(summarize(samples, max_steps))
}

/// Monte Carlo estimate of `H_w`: each walk starts from a `pi`-distributed
/// vertex drawn from its own stream.
pub fn mc_target_hitting(
    g: &Graph,
    w: usize,
    n_walks: usize,
    max_steps: u64,
    seed: u64,
) -> Result<WalkEstimate> {
    check_vertex(g, w)?;
    check_walk_args(g, n_walks)?;
    let adj = adjacency_lists(g);
    let vol = g.volume() as u64;
    let mut cumulative = Vec::with_capacity(g.n());
    let mut acc = 0u64;
    for &d in g.degrees() {
        acc += d as u64;
        cumulative.push(acc);
    }
    let samples = (0..n_walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let r = rng.gen_range(0..vol);
            let start = cumulative.partition_point(|&c| c <= r);
            walk(&adj, start, w, max_steps, &mut rng)
        })
        .collect();
    Ok(summarize(samples, max_steps))
}

/// One line of the hitting CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingRow {
    pub w: usize,
    pub block: usize,
    pub degree: usize,
    pub exact: f64,
    pub spectral: f64,
    pub mc: Option<WalkEstimate>,
}

/// Rows for the chosen targets of a result that carries spectral columns.
pub fn hitting_rows(g: &Graph, result: &HittingResult, targets: &[usize]) -> Result<Vec<HittingRow>> {
    let spectral = result
        .spectral_h_target
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("spectral columns missing; call attach_spectral".into()))?;
    targets
        .iter()
        .map(|&w| {
            check_vertex(g, w)?;
            Ok(HittingRow {
                w,
                block: g.block_of(w),
                degree: g.degree(w),
                exact: result.h_target[w],
                spectral: spectral[w],
                mc: None,
            })
        })
        .collect()
}

/// `w,block,d_w,H_w_exact,H_w_spectral,H_w_mc,mc_stderr` with 1-based `w`
/// and block; empty MC cells when no walks were run. Footer lines carry `H^v`.
pub fn hitting_to_csv(rows: &[HittingRow], result: &HittingResult) -> String {
    let mut out = String::from("w,block,d_w,H_w_exact,H_w_spectral,H_w_mc,mc_stderr\n");
    for r in rows {
        let (mc, se) = match r.mc {
            Some(e) => (e.estimate.to_string(), e.std_error.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.w + 1,
            r.block + 1,
            r.degree,
            r.exact,
            r.spectral,
            mc,
            se
        );
    }
    if let Some(h) = result.h_start.first() {
        let _ = writeln!(out, "# H_start={h}");
    }
    if let Some(h) = result.spectral_h_start {
        let _ = writeln!(out, "# H_start_spectral={h}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample;
    use crate::model::{derive, BlockModelConfig};
    use crate::spectral::{symmetric_eigen, MatrixKind};

    fn edge() -> Graph {
        Graph::from_edges(2, 1, &[(0, 1)]).unwrap()
    }

    fn complete_with_loops(n: usize) -> Graph {
        let c = BlockModelConfig::new(n, 1, vec![1.0], 0.0).unwrap();
        sample(&c).unwrap()
    }

    fn spectrum(g: &Graph) -> SpectralDecomposition {
        symmetric_eigen(normalized_adjacency(g).unwrap().as_ref(), MatrixKind::B).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = edge();
        let r = exact_hitting(&g).unwrap();
        let h = r.h_matrix.as_ref().unwrap();
        assert!((h[(0, 1)] - 1.0).abs() < 1e-12 && (h[(1, 0)] - 1.0).abs() < 1e-12);
        assert_eq!(r.pi, vec![0.5, 0.5]);
        assert!((r.h_start[0] - 0.5).abs() < 1e-12);
        assert!((r.h_target[1] - 0.5).abs() < 1e-12);
        let s = spectrum(&g);
        assert!((spectral_h_start(&s).unwrap() - 0.5).abs() < 1e-12);
        assert!((spectral_h_target(&s, &g, 1).unwrap() - 0.5).abs() < 1e-12);
        let z = zn_decomposition(&s, &g, 1).unwrap();
        assert_eq!(z.b_ww, 0.0);
        assert!((z.tail - 0.25).abs() < 1e-12);
        assert!((z.total - 0.25).abs() < 1e-12 && (z.direct - 0.25).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_with_loops() {
        let n = 7;
        let g = complete_with_loops(n);
        let r = exact_hitting(&g).unwrap();
        let h = r.h_matrix.as_ref().unwrap();
        for v in 0..n {
            for w in 0..n {
                let want = if v == w { 0.0 } else { n as f64 };
                assert!((h[(v, w)] - want).abs() < 1e-10);
            }
            assert!((r.h_start[v] - (n as f64 - 1.0)).abs() < 1e-10);
        }
        let s = spectrum(&g);
        assert!((spectral_h_start(&s).unwrap() - (n as f64 - 1.0)).abs() < 1e-10);
        let z = zn_decomposition(&s, &g, 2).unwrap();
        assert!((z.b_ww - 1.0 / n as f64).abs() < 1e-15);
        assert!(z.tail.abs() < 1e-12);
        assert!((z.total - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
    }

    #[test]
    fn three_routes_agree_on_a_sample() {
        let c = BlockModelConfig::new(90, 3, vec![0.5, 0.4, 0.3], 0.1).unwrap().with_seed(5);
        let g = sample(&c).unwrap();
        let mut exact = exact_hitting(&g).unwrap();
        let avg = exact_averages(&g).unwrap();
        exact.attach_spectral(&spectrum(&g), &g).unwrap();
        let hs = exact.spectral_h_start.unwrap();
        let spectral = exact.spectral_h_target.as_ref().unwrap();
        for v in 0..g.n() {
            assert!((exact.h_start[v] - hs).abs() / hs < 1e-9);
            assert!((avg.h_start[v] - hs).abs() / hs < 1e-9);
            let hw = exact.h_target[v];
            assert!((avg.h_target[v] - hw).abs() / hw < 1e-9);
            assert!((spectral[v] - hw).abs() / hw < 1e-9);
        }
        let w = 17;
        assert!((target_hitting_time(&g, w).unwrap() - exact.h_target[w]).abs() / exact.h_target[w] < 1e-9);
        let pi_sum: f64 = exact.pi.iter().sum();
        assert!((pi_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_graphs_are_rejected() {
        let g = Graph::from_edges(4, 1, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(exact_hitting(&g), Err(Error::Disconnected)));
        assert!(matches!(exact_averages(&g), Err(Error::Disconnected)));
        let g = Graph::from_edges(3, 1, &[(0, 1)]).unwrap();
        assert!(matches!(target_hitting_time(&g, 0), Err(Error::IsolatedVertex { vertex: 3 })));
    }

    #[test]
    fn monte_carlo_trivial_cases() {
        let g = edge();
        let e = mc_hitting(&g, 0, 0, 10, 100, 1).unwrap();
        assert_eq!((e.estimate, e.std_error), (0.0, 0.0));
        let e = mc_hitting(&g, 0, 1, 10_000, 100, 1).unwrap();
        assert_eq!((e.estimate, e.std_error, e.truncated), (1.0, 0.0, 0));

        let g = complete_with_loops(50);
        let e = mc_hitting(&g, 3, 9, 10_000, default_max_steps(50), 2).unwrap();
        assert!(!e.biased);
        assert!((e.estimate - 50.0).abs() <= 3.0 * e.std_error, "{e:?}");
        assert_eq!(mc_hitting(&g, 3, 9, 500, default_max_steps(50), 2).unwrap(), mc_hitting(&g, 3, 9, 500, default_max_steps(50), 2).unwrap());
    }

    #[test]
    fn truncation_is_reported() {
        let g = complete_with_loops(50);
        let e = mc_hitting(&g, 0, 1, 1000, 5, 3).unwrap();
        assert!(e.truncated > 0 && e.biased);
        assert!(e.estimate <= 5.0);
    }

    #[test]
    fn target_walks_match_exact() {
        let c = BlockModelConfig::new(60, 2, vec![0.4, 0.2], 0.1).unwrap().with_seed(8);
        let g = sample(&c).unwrap();
        let exact = target_hitting_time(&g, 4).unwrap();
        let e = mc_target_hitting(&g, 4, 20_000, default_max_steps(60), 9).unwrap();
        assert!((e.estimate - exact).abs() <= 4.0 * e.std_error, "{e:?} vs {exact}");
    }

    #[test]
    fn csv_layout() {
        let g = edge();
        let mut r = exact_hitting(&g).unwrap();
        r.attach_spectral(&spectrum(&g), &g).unwrap();
        let mut rows = hitting_rows(&g, &r, &[1]).unwrap();
        rows[0].mc = Some(mc_hitting(&g, 0, 1, 10, 10, 0).unwrap());
        let csv = hitting_to_csv(&rows, &r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "w,block,d_w,H_w_exact,H_w_spectral,H_w_mc,mc_stderr");
        assert!(lines[1].starts_with("2,1,1,0.5"));
        assert!(lines[2].starts_with("# H_start=0.5"));
    }

    #[test]
    fn tail_scale_follows_kappa() {
        let d = derive(&BlockModelConfig::identical(100, 2, 0.4, 0.1).unwrap()).unwrap();
        assert!((zn_tail_scale(&d) - 16.0 / d.gamma_min).abs() < 1e-12);
        let d = derive(&BlockModelConfig::identical(100, 2, 0.1, 0.4).unwrap()).unwrap();
        assert!((zn_tail_scale(&d) - 1.0 / d.gamma_min).abs() < 1e-12);
    }
}
