//! Reference implementations that share no code with the library: a cyclic
//! Jacobi eigensolver and hitting times by Gaussian elimination.

#![allow(dead_code)]

use sbm_hitting::Graph;

/// Eigenvalues (descending) and eigenvectors (columns, `v[i][k]`) of a
/// symmetric matrix.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&k| v[r][k]).collect()).collect();
    (values, vectors)
}

pub fn jacobi_eigenvalues(a: Vec<Vec<f64>>) -> Vec<f64> {
    jacobi_eigen(a).0
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// `H_vw` for all `v`, from `H_vw = 1 + sum_u P_vu H_uw`, `H_ww = 0`.
pub fn hitting_column(g: &Graph, w: usize) -> Vec<f64> {
    let n = g.n();
    let others: Vec<usize> = (0..n).filter(|&v| v != w).collect();
    let a: Vec<Vec<f64>> = others
        .iter()
        .map(|&v| {
            let d = g.degree(v) as f64;
            others
                .iter()
                .map(|&u| {
                    let id = if u == v { 1.0 } else { 0.0 };
                    id - if g.has_edge(v, u) { 1.0 / d } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let x = solve(a, vec![1.0; n - 1]);
    let mut h = vec![0.0; n];
    for (i, &v) in others.iter().enumerate() {
        h[v] = x[i];
    }
    h
}

pub fn stationary(g: &Graph) -> Vec<f64> {
    let total: usize = g.degrees().iter().sum();
    g.degrees().iter().map(|&d| d as f64 / total as f64).collect()
}

/// `B = D^{-1/2} A D^{-1/2}` as nested vectors.
pub fn normalized(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    (0..n)
        .map(|v| {
            (0..n)
                .map(|w| {
                    if g.has_edge(v, w) {
                        1.0 / ((g.degree(v) * g.degree(w)) as f64).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
