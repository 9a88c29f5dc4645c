//! Matrices attached to a block model and its realizations, their symmetric
//! spectra, and the norm and eigenvalue envelopes that describe how close a
//! sampled graph sits to its expectation.
//!
//! Notation: `P` is the `m x m` edge-probability matrix, `Gamma` the diagonal
//! of expected block degrees, `P' = Gamma^{-1/2} P Gamma^{-1/2}`, `A'` the
//! adjacency rescaled by expected degrees, `B = D^{-1/2} A D^{-1/2}`,
//! `X = A' - E[A']` and `R = B - A'`.

use std::fmt::Write as _;

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::graph::{is_connected, Graph};
use crate::model::DerivedParams;

/// Tolerance for the closed-form identical-p spectrum of `P`.
pub const IDENTICAL_P_TOLERANCE: f64 = 1e-12;
/// Relative residual `max ||Mu - lambda u||_inf / (1 + ||M||_inf)` accepted from the eigensolver.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    PPrime,
    ExpectedAPrime,
    APrime,
    X,
    B,
    R,
}

impl MatrixKind {
    pub fn label(self) -> &'static str {
        match self {
            MatrixKind::PPrime => "p_prime",
            MatrixKind::ExpectedAPrime => "expected_a_prime",
            MatrixKind::APrime => "a_prime",
            MatrixKind::X => "x",
            MatrixKind::B => "b",
            MatrixKind::R => "r",
        }
    }
}

/// Eigenvalues in descending order, optionally with the matching orthonormal
/// eigenvectors stored as columns. Each eigenvector's first non-negligible
/// entry is positive.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub kind: MatrixKind,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Mat<f64>>,
    pub residual: Option<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |lambda_k|`, the spectral norm of a symmetric matrix.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    pub fn vectors(&self) -> Result<MatRef<'_, f64>> {
        self.eigenvectors
            .as_ref()
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::InvalidArgument("decomposition was computed without eigenvectors".into()))
    }

    /// `k,lambda` rows (1-based `k`); with `with_vectors`, the entries of
    /// eigenvector `k` follow as `u_1..u_n`.
    pub fn to_csv(&self, with_vectors: bool) -> Result<String> {
        let vectors = if with_vectors { Some(self.vectors()?) } else { None };
        let mut out = String::from("k,lambda");
        if let Some(u) = vectors {
            for i in 0..u.nrows() {
                let _ = write!(out, ",u_{}", i + 1);
            }
        }
        out.push('\n');
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            let _ = write!(out, "{},{}", k + 1, lambda);
            if let Some(u) = vectors {
                for i in 0..u.nrows() {
                    let _ = write!(out, ",{}", u[(i, k)]);
                }
            }
            out.push('\n');
        }
        Ok(out)
    }
}

pub fn inf_norm(m: MatRef<'_, f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_square(m: MatRef<'_, f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix (lower triangle is read).
pub fn symmetric_eigen(m: MatRef<'_, f64>, kind: MatrixKind) -> Result<SpectralDecomposition> {
    check_square(m)?;
    let n = m.nrows();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed on {}: {e:?}", kind.label())))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Mat::<f64>::zeros(n, n);
    for (k, src) in (0..n).rev().enumerate() {
        eigenvalues.push(s[src]);
        let scale = 1e-12 * (0..n).fold(0.0f64, |a, i| a.max(u[(i, src)].abs()));
        let first = (0..n).find(|&i| u[(i, src)].abs() > scale).unwrap_or(0);
        let sign = if u[(first, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, k)] = sign * u[(i, src)];
        }
    }
    let mu = m * &vectors;
    let mut residual = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            residual = residual.max((mu[(i, k)] - eigenvalues[k] * vectors[(i, k)]).abs());
        }
    }
    let limit = RESIDUAL_TOLERANCE * (1.0 + inf_norm(m));
    if !(residual <= limit) {
        return Err(Error::Numerical(format!(
            "eigendecomposition of {} has residual {residual:e} above {limit:e}",
            kind.label()
        )));
    }
    Ok(SpectralDecomposition {
        kind,
        eigenvalues,
        eigenvectors: Some(vectors),
        residual: Some(residual),
    })
}

/// Eigenvalues only, descending.
pub fn symmetric_eigenvalues(m: MatRef<'_, f64>, kind: MatrixKind) -> Result<SpectralDecomposition> {
    check_square(m)?;
    let mut eigenvalues = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failed on {}: {e:?}", kind.label())))?;
    eigenvalues.reverse();
    Ok(SpectralDecomposition {
        kind,
        eigenvalues,
        eigenvectors: None,
        residual: None,
    })
}

/// The `m x m` edge-probability matrix.
pub fn probability_matrix(params: &DerivedParams) -> Mat<f64> {
    let c = &params.config;
    Mat::from_fn(c.m, c.m, |i, j| if i == j { c.p[i] } else { c.q })
}

/// `P' = Gamma^{-1/2} P Gamma^{-1/2}`.
pub fn rescaled_probability_matrix(params: &DerivedParams) -> Result<Mat<f64>> {
    if params.gamma.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Degenerate("a block has zero expected degree".into()));
    }
    let p = probability_matrix(params);
    let g = &params.gamma;
    Ok(Mat::from_fn(p.nrows(), p.ncols(), |i, j| p[(i, j)] / (g[i] * g[j]).sqrt()))
}

/// Spectrum of `P'`. With identical intra-block probabilities the spectrum of
/// `P` must be `{p + (m-1) q, p - q, ..., p - q}`; a violation is reported as
/// a numerical failure.
pub fn block_matrix_spectrum(params: &DerivedParams) -> Result<SpectralDecomposition> {
    let rescaled = rescaled_probability_matrix(params)?;
    if let Some(p) = params.config.identical_p() {
        let q = params.config.q;
        let m = params.m();
        let raw = symmetric_eigenvalues(probability_matrix(params).as_ref(), MatrixKind::PPrime)?;
        let mut expected = vec![p - q; m];
        expected[0] = p + (m as f64 - 1.0) * q;
        expected.sort_by(|a, b| b.total_cmp(a));
        let worst = raw
            .eigenvalues
            .iter()
            .zip(&expected)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if worst > IDENTICAL_P_TOLERANCE {
            return Err(Error::Numerical(format!(
                "identical-p spectrum of P off by {worst:e} from the closed form"
            )));
        }
    }
    symmetric_eigen(rescaled.as_ref(), MatrixKind::PPrime)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheegerBound {
    /// `1 - 2 (1 + p_m / ((m-1) q))^{-2}`.
    pub bound: f64,
    /// Conductance of the singleton cut around the last (sparsest) block.
    pub conductance: f64,
    /// Exact conductance of the weighted block graph, by subset enumeration.
    pub min_conductance: f64,
    /// `1 - min_conductance^2 / 2`, the classical Cheeger envelope for the
    /// second eigenvalue of the normalised block matrix.
    pub classical_bound: f64,
}

/// Largest block count for which the exact conductance is enumerated.
pub const MAX_ENUMERATED_BLOCKS: usize = 20;

pub fn cheeger_bound(params: &DerivedParams) -> Result<CheegerBound> {
    let m = params.m();
    if m == 1 {
        return Err(Error::Undefined("the Cheeger envelope needs at least two blocks".into()));
    }
    let q = params.config.q;
    if !(q > 0.0) {
        return Err(Error::DisconnectedInExpectation { blocks: m });
    }
    if m > MAX_ENUMERATED_BLOCKS {
        return Err(Error::InvalidArgument(format!(
            "exact conductance is enumerated for at most {MAX_ENUMERATED_BLOCKS} blocks"
        )));
    }
    let cross = (m as f64 - 1.0) * q;
    let p_last = params.p_min();
    let bound = 1.0 - 2.0 * (1.0 + p_last / cross).powi(-2);
    let conductance = cross / (p_last + cross);

    let p = &params.config.p;
    let deg: Vec<f64> = p.iter().map(|&pm| pm + cross).collect();
    let total: f64 = deg.iter().sum();
    let mut min_conductance = f64::INFINITY;
    for mask in 1u32..(1u32 << m) - 1 {
        let size = mask.count_ones() as f64;
        let vol: f64 = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| deg[i]).sum();
        if vol > total / 2.0 {
            continue;
        }
        let boundary = size * (m as f64 - size) * q;
        min_conductance = min_conductance.min(boundary / vol);
    }
    Ok(CheegerBound {
        bound,
        conductance,
        min_conductance,
        classical_bound: 1.0 - min_conductance * min_conductance / 2.0,
    })
}

/// Spectrum of `E[A'] = P' (x) J` read off the Kronecker structure: the values
/// `(n/m) lambda_k(P')` and `n - m` zeros, merged in descending order.
pub fn expected_adjacency_spectrum(params: &DerivedParams) -> Result<SpectralDecomposition> {
    let block = block_matrix_spectrum(params)?;
    let scale = params.block_size() as f64;
    let mut eigenvalues: Vec<f64> = block.eigenvalues.iter().map(|l| l * scale).collect();
    eigenvalues.extend(std::iter::repeat(0.0).take(params.n() - params.m()));
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(SpectralDecomposition {
        kind: MatrixKind::ExpectedAPrime,
        eigenvalues,
        eigenvectors: None,
        residual: block.residual,
    })
}

/// The dense `n x n` matrix `E[A']`; meant for small-N cross-checks.
pub fn expected_adjacency_matrix(params: &DerivedParams) -> Result<Mat<f64>> {
    let pp = rescaled_probability_matrix(params)?;
    let c = &params.config;
    Ok(Mat::from_fn(c.n, c.n, |v, w| pp[(c.block_of(v), c.block_of(w))]))
}

/// `B = D^{-1/2} A D^{-1/2}`; needs every degree positive.
pub fn normalized_adjacency(g: &Graph) -> Result<Mat<f64>> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(Error::IsolatedVertex { vertex: v + 1 });
    }
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    Ok(Mat::from_fn(g.n(), g.n(), |v, w| {
        if g.has_edge(v, w) {
            inv_sqrt[v] * inv_sqrt[w]
        } else {
            0.0
        }
    }))
}

#[derive(Debug, Clone)]
pub struct RescaledMatrices {
    pub a_prime: Mat<f64>,
    pub b: Mat<f64>,
    pub x: Mat<f64>,
    pub r: Mat<f64>,
}

pub fn build_rescaled(g: &Graph, params: &DerivedParams) -> Result<RescaledMatrices> {
    if g.n() != params.n() || g.n_blocks() != params.m() {
        return Err(Error::InvalidArgument("graph and parameters disagree on n or m".into()));
    }
    let b = normalized_adjacency(g)?;
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let pp = rescaled_probability_matrix(params)?;
    let n = g.n();
    let gamma = &params.gamma;
    let a_prime = Mat::from_fn(n, n, |v, w| {
        if g.has_edge(v, w) {
            1.0 / (gamma[g.block_of(v)] * gamma[g.block_of(w)]).sqrt()
        } else {
            0.0
        }
    });
    let x = Mat::from_fn(n, n, |v, w| a_prime[(v, w)] - pp[(g.block_of(v), g.block_of(w))]);
    let r = Mat::from_fn(n, n, |v, w| b[(v, w)] - a_prime[(v, w)]);
    Ok(RescaledMatrices { a_prime, b, x, r })
}

/// Which functional form the `||R||_inf` envelope takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RBoundForm {
    /// `constant * (ln N / gamma_min)^{1/4} * sqrt(gamma_max / gamma_min)`.
    General { constant: f64 },
    /// `constant * sqrt(ln N / gamma)`, for identical intra-block probabilities.
    IdenticalP { constant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSettings {
    /// The free constant in the `||X||_2` envelope.
    pub c: f64,
    /// Multiplies the O-term envelopes and divides the spectral gap.
    pub slack: f64,
    pub r_form: RBoundForm,
}

impl Default for BoundSettings {
    fn default() -> Self {
        Self {
            c: 1.0,
            slack: 1.5,
            r_form: RBoundForm::General {
                constant: 3f64.sqrt(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: &'static str,
    pub empirical: f64,
    pub envelope: f64,
    pub satisfied: bool,
}

impl BoundReport {
    fn upper(name: &'static str, empirical: f64, envelope: f64) -> Self {
        Self {
            name,
            empirical,
            envelope,
            satisfied: empirical <= envelope,
        }
    }
}

pub fn bounds_to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("bound,empirical,envelope,satisfied\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{},{}", r.name, r.empirical, r.envelope, r.satisfied);
    }
    out
}

/// Everything the envelopes need from one realization.
#[derive(Debug, Clone)]
pub struct SpectralSnapshot {
    pub b: Vec<f64>,
    pub a_prime: Vec<f64>,
    pub x: Vec<f64>,
    pub expected_a_prime: Vec<f64>,
    /// `(n/m) lambda_k(P')`, `k = 1..m`.
    pub block: Vec<f64>,
    pub x_norm: f64,
    pub r_inf_norm: f64,
    pub trace_b: f64,
}

pub fn snapshot(g: &Graph, params: &DerivedParams) -> Result<SpectralSnapshot> {
    let mats = build_rescaled(g, params)?;
    let b = symmetric_eigenvalues(mats.b.as_ref(), MatrixKind::B)?.eigenvalues;
    let a_prime = symmetric_eigenvalues(mats.a_prime.as_ref(), MatrixKind::APrime)?.eigenvalues;
    let x_spec = symmetric_eigenvalues(mats.x.as_ref(), MatrixKind::X)?;
    let scale = params.block_size() as f64;
    let block = block_matrix_spectrum(params)?
        .eigenvalues
        .iter()
        .map(|l| l * scale)
        .collect();
    let trace_b = (0..g.n()).map(|v| mats.b[(v, v)]).sum();
    Ok(SpectralSnapshot {
        b,
        a_prime,
        x_norm: x_spec.spectral_norm(),
        x: x_spec.eigenvalues,
        expected_a_prime: expected_adjacency_spectrum(params)?.eigenvalues,
        block,
        r_inf_norm: inf_norm(mats.r.as_ref()),
        trace_b,
    })
}

/// The two envelope scales shared by the eigenvalue bounds: the degree term
/// `(ln N / gamma_min)^{1/4} sqrt(gamma_max / gamma_min)` and the fluctuation
/// term `(sqrt(N sigma^2) + c ln N (N sigma^2)^{1/4}) / gamma_min`.
pub fn envelope_terms(params: &DerivedParams, c: f64) -> (f64, f64) {
    let n = params.n() as f64;
    let ln = n.ln();
    let ns = n * params.sigma2;
    let degree = (ln / params.gamma_min).powf(0.25) * (params.gamma_max / params.gamma_min).sqrt();
    let fluct = (ns.sqrt() + c * ln * ns.powf(0.25)) / params.gamma_min;
    (degree, fluct)
}

/// `(2 sqrt(N sigma^2) + c ln N (N sigma^2)^{1/4}) / gamma_min`.
pub fn x_norm_envelope(params: &DerivedParams, c: f64) -> f64 {
    let n = params.n() as f64;
    let ns = n * params.sigma2;
    (2.0 * ns.sqrt() + c * n.ln() * ns.powf(0.25)) / params.gamma_min
}

/// Smallest `c` for which `x_norm` meets [`x_norm_envelope`]; zero when the
/// leading term alone suffices.
pub fn required_c(params: &DerivedParams, x_norm: f64) -> f64 {
    let n = params.n() as f64;
    let ns = n * params.sigma2;
    ((params.gamma_min * x_norm - 2.0 * ns.sqrt()) / (n.ln() * ns.powf(0.25))).max(0.0)
}

pub fn r_norm_envelope(params: &DerivedParams, form: RBoundForm) -> f64 {
    let ln = (params.n() as f64).ln();
    match form {
        RBoundForm::General { constant } => {
            constant
                * (ln / params.gamma_min).powf(0.25)
                * (params.gamma_max / params.gamma_min).sqrt()
        }
        RBoundForm::IdenticalP { constant } => constant * (ln / params.gamma_min).sqrt(),
    }
}

/// Spectral gap guaranteed for `lambda_2(B)`: `2 (p_m / ((m-1) q))^{-2}` in
/// the assortative regime (`kappa < 1`) and `2 (1 + p_m / ((m-1) q))^{-2}`
/// otherwise. `None` when `m = 1` or `q = 0`.
pub fn second_eigenvalue_gap(params: &DerivedParams) -> Option<f64> {
    let kappa = params.kappa?;
    let ratio = 1.0 / kappa;
    Some(if kappa < 1.0 {
        2.0 * ratio.powi(-2)
    } else {
        2.0 * (1.0 + ratio).powi(-2)
    })
}

/// Evaluates every envelope on one realization.
///
/// * `x_spectral_norm`: `||X||_2` against [`x_norm_envelope`].
/// * `r_inf_norm`: `||R||_inf` against `slack *` [`r_norm_envelope`].
/// * `b_leading_eigenvalues`: `max_{k<=m} |lambda_k(B) - (n/m) lambda_k(P')|`.
/// * `b_bulk_eigenvalues`: `max_{k>m} |lambda_k(B)|`.
/// * `b_second_eigenvalue`: `lambda_2(B)` against `1 - gap / slack`.
///
/// The two eigenvalue-location checks use `slack * (degree + fluctuation)`.
pub fn evaluate_bounds(
    snap: &SpectralSnapshot,
    params: &DerivedParams,
    settings: &BoundSettings,
) -> Vec<BoundReport> {
    let m = params.m();
    let (degree, fluct) = envelope_terms(params, settings.c);
    let eig_env = settings.slack * (degree + fluct);
    let leading = snap
        .b
        .iter()
        .zip(&snap.block)
        .fold(0.0f64, |acc, (b, p)| acc.max((b - p).abs()));
    let bulk = snap.b[m..].iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let mut out = vec![
        BoundReport::upper("x_spectral_norm", snap.x_norm, x_norm_envelope(params, settings.c)),
        BoundReport::upper(
            "r_inf_norm",
            snap.r_inf_norm,
            settings.slack * r_norm_envelope(params, settings.r_form),
        ),
        BoundReport::upper("b_leading_eigenvalues", leading, eig_env),
        BoundReport::upper("b_bulk_eigenvalues", bulk, eig_env),
    ];
    if let (Some(gap), true) = (second_eigenvalue_gap(params), snap.b.len() > 1) {
        out.push(BoundReport::upper("b_second_eigenvalue", snap.b[1], 1.0 - gap / settings.slack));
    }
    out
}

pub fn norm_bounds(g: &Graph, params: &DerivedParams, settings: &BoundSettings) -> Result<Vec<BoundReport>> {
    Ok(evaluate_bounds(&snapshot(g, params)?, params, settings))
}

/// Tolerance for the finite-dimensional Weyl inequalities.
pub const WEYL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylCheck {
    /// `max_k |lambda_k(B) - lambda_k(A')|`.
    pub b_vs_a_prime: f64,
    pub r_inf_norm: f64,
    /// `max_k |lambda_k(A') - lambda_k(E[A'])|`.
    pub a_prime_vs_expected: f64,
    pub x_norm: f64,
    pub holds: bool,
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn weyl_check(snap: &SpectralSnapshot) -> WeylCheck {
    let b_vs_a_prime = max_gap(&snap.b, &snap.a_prime);
    let a_prime_vs_expected = max_gap(&snap.a_prime, &snap.expected_a_prime);
    WeylCheck {
        b_vs_a_prime,
        r_inf_norm: snap.r_inf_norm,
        a_prime_vs_expected,
        x_norm: snap.x_norm,
        holds: b_vs_a_prime <= snap.r_inf_norm + WEYL_TOLERANCE
            && a_prime_vs_expected <= snap.x_norm + WEYL_TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample;
    use crate::model::{derive, BlockModelConfig};

    fn params(n: usize, m: usize, p: Vec<f64>, q: f64) -> DerivedParams {
        derive(&BlockModelConfig::new(n, m, p, q).unwrap()).unwrap()
    }

    #[test]
    fn identical_p_block_spectrum() {
        let d = params(30, 3, vec![0.4; 3], 0.1);
        let raw = symmetric_eigenvalues(probability_matrix(&d).as_ref(), MatrixKind::PPrime).unwrap();
        for (got, want) in raw.eigenvalues.iter().zip([0.6, 0.3, 0.3]) {
            assert!((got - want).abs() < 1e-12);
        }
        let s = block_matrix_spectrum(&d).unwrap();
        let gamma = d.gamma[0];
        assert!((s.eigenvalues[0] - 0.6 / gamma).abs() < 1e-14);
    }

    #[test]
    fn single_block_spectrum() {
        let d = params(10, 1, vec![0.3], 0.0);
        let s = block_matrix_spectrum(&d).unwrap();
        assert_eq!(s.len(), 1);
        assert!((10.0 * s.eigenvalues[0] - 1.0).abs() < 1e-14);
        let e = expected_adjacency_spectrum(&d).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!(e.eigenvalues[1..].iter().all(|&l| l == 0.0));
        assert!(matches!(cheeger_bound(&d), Err(Error::Undefined(_))));
    }

    #[test]
    fn two_by_two_against_quadratic_formula() {
        let d = params(100, 2, vec![0.5, 0.3], 0.1);
        let pp = rescaled_probability_matrix(&d).unwrap();
        let (a, b, c) = (pp[(0, 0)], pp[(0, 1)], pp[(1, 1)]);
        let mid = (a + c) / 2.0;
        let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        let s = block_matrix_spectrum(&d).unwrap();
        assert!((s.eigenvalues[0] - (mid + rad)).abs() < 1e-15);
        assert!((s.eigenvalues[1] - (mid - rad)).abs() < 1e-15);
    }

    #[test]
    fn cheeger_examples() {
        // p_M = (M-1) q gives conductance 1/2 and bound 1/2.
        let d = params(30, 3, vec![0.4, 0.3, 0.2], 0.1);
        let cb = cheeger_bound(&d).unwrap();
        assert!((cb.conductance - 0.5).abs() < 1e-15);
        assert!((cb.bound - 0.5).abs() < 1e-15);

        let d = params(100, 2, vec![0.5, 0.3], 0.1);
        let cb = cheeger_bound(&d).unwrap();
        assert!((cb.bound - 0.875).abs() < 1e-15);
        let lambda2 = 50.0 * block_matrix_spectrum(&d).unwrap().eigenvalues[1];
        assert!(lambda2 <= cb.bound);
        assert!(lambda2 <= cb.classical_bound);

        let zero_q = params(100, 2, vec![0.5, 0.3], 0.0);
        assert!(cheeger_bound(&zero_q).is_err());
    }

    #[test]
    fn p_equals_q_has_zero_second_eigenvalue() {
        for m in 2..6 {
            let d = params(60, m, vec![0.3; m], 0.3);
            let s = block_matrix_spectrum(&d).unwrap();
            let scaled = d.block_size() as f64 * s.eigenvalues[1];
            assert!(scaled.abs() < 1e-12);
            let cb = cheeger_bound(&d).unwrap();
            assert!(scaled <= cb.classical_bound);
            // The envelope 1 - 2((m-1)/m)^2 drops below zero from m = 4 on.
            assert_eq!(scaled <= cb.bound, m < 4, "m = {m}");
        }
    }

    #[test]
    fn complete_graph_b_is_uniform() {
        let c = BlockModelConfig::new(12, 2, vec![1.0, 1.0], 1.0).unwrap();
        let g = sample(&c).unwrap();
        let b = normalized_adjacency(&g).unwrap();
        assert!((b[(3, 7)] - 1.0 / 12.0).abs() < 1e-15);
        let s = symmetric_eigen(b.as_ref(), MatrixKind::B).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(s.eigenvalues[1..].iter().all(|l| l.abs() < 1e-12));
        let mats = build_rescaled(&g, &derive(&c).unwrap()).unwrap();
        assert!(inf_norm(mats.x.as_ref()) < 1e-15);
        assert!(inf_norm(mats.r.as_ref()) < 1e-15);
    }

    #[test]
    fn two_vertex_path() {
        let g = Graph::from_edges(2, 1, &[(0, 1)]).unwrap();
        let b = normalized_adjacency(&g).unwrap();
        let s = symmetric_eigen(b.as_ref(), MatrixKind::B).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
        let u = s.vectors().unwrap();
        assert!(u[(0, 0)] > 0.0 && u[(1, 0)] > 0.0);
        assert!(u[(0, 1)] > 0.0 && u[(1, 1)] < 0.0);
    }

    #[test]
    fn isolated_vertex_is_rejected() {
        let g = Graph::from_edges(3, 1, &[(0, 1), (2, 2)]).unwrap();
        let d = params(3, 1, vec![0.5], 0.0);
        assert!(matches!(build_rescaled(&g, &d), Err(Error::Disconnected)));
        let g = Graph::from_edges(3, 1, &[(0, 1)]).unwrap();
        assert!(matches!(build_rescaled(&g, &d), Err(Error::IsolatedVertex { vertex: 3 })));
    }

    #[test]
    fn deterministic_graph_bounds_pass() {
        let c = BlockModelConfig::new(20, 2, vec![1.0, 1.0], 1.0).unwrap();
        let g = sample(&c).unwrap();
        let d = derive(&c).unwrap();
        let snap = snapshot(&g, &d).unwrap();
        assert!(snap.x_norm < 1e-12);
        let reports = evaluate_bounds(&snap, &d, &BoundSettings::default());
        assert!(reports.iter().all(|r| r.satisfied), "{reports:?}");
        assert!(weyl_check(&snap).holds);
        assert!(bounds_to_csv(&reports).starts_with("bound,empirical,envelope,satisfied\n"));
    }

    #[test]
    fn spectrum_csv_layout() {
        let g = Graph::from_edges(2, 1, &[(0, 1)]).unwrap();
        let s = symmetric_eigen(normalized_adjacency(&g).unwrap().as_ref(), MatrixKind::B).unwrap();
        let plain = s.to_csv(false).unwrap();
        assert_eq!(plain.lines().next().unwrap(), "k,lambda");
        assert_eq!(plain.lines().count(), 3);
        let full = s.to_csv(true).unwrap();
        assert_eq!(full.lines().next().unwrap(), "k,lambda,u_1,u_2");
        let values_only = symmetric_eigenvalues(normalized_adjacency(&g).unwrap().as_ref(), MatrixKind::B).unwrap();
        assert!(values_only.to_csv(true).is_err());
    }

    #[test]
    fn required_c_inverts_the_envelope() {
        let d = params(2000, 2, vec![0.2, 0.2], 0.05);
        for x in [0.1, 0.2, 0.3] {
            let c = required_c(&d, x);
            if c > 0.0 {
                assert!((x_norm_envelope(&d, c) - x).abs() < 1e-12);
            } else {
                assert!(x_norm_envelope(&d, 0.0) >= x);
            }
        }
    }
}
