use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues at or below this fraction of the largest are rank-deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// Principal axes of a row-major data matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `k` unit rows, by descending eigenvalue; the largest-magnitude entry
    /// of each is positive.
    pub components: Vec<Vec<f64>>,
    /// All eigenvalues of the covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Share of total variance carried by each kept component.
    pub explained: Vec<f64>,
    /// `false` for kept components whose eigenvalue is numerically zero.
    pub informative: Vec<bool>,
}

/// Sample covariance `XᵀX/(n−1)` of the centered rows.
pub fn covariance<R: AsRef<[f64]>>(rows: &[R]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::precondition(format!("covariance needs at least 2 rows, got {n}")));
    }
    let p = rows[0].as_ref().len();
    if p == 0 || rows.iter().any(|r| r.as_ref().len() != p) {
        return Err(Error::param("rows must share a non-zero width"));
    }
    let mut mean = vec![0.0; p];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::zeros(p, p);
    for r in rows {
        let r = r.as_ref();
        for a in 0..p {
            let da = r[a] - mean[a];
            for b in a..p {
                cov[(a, b)] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok((mean, cov))
}

/// Descending eigenpairs of a symmetric matrix with the sign convention applied.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    (values, vectors)
}

impl Pca {
    pub fn fit<R: AsRef<[f64]>>(rows: &[R], k: usize) -> Result<Self> {
        let (mean, cov) = covariance(rows)?;
        let p = mean.len();
        if k == 0 || k > p {
            return Err(Error::param(format!("component count {k} must lie in 1..={p}")));
        }
        if rows.len() < p {
            return Err(Error::precondition(format!("PCA on {p} features needs at least {p} rows, got {}", rows.len())));
        }
        let (eigenvalues, vectors) = sorted_eigen(&cov);
        let top = eigenvalues[0].max(0.0);
        let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
        let informative: Vec<bool> = eigenvalues[..k].iter().map(|&l| l > RANK_TOLERANCE * top).collect();
        let explained = eigenvalues[..k]
            .iter()
            .map(|&l| if total > 0.0 { l.max(0.0) / total } else { 0.0 })
            .collect();
        Ok(Self { mean, components: vectors.into_iter().take(k).collect(), eigenvalues, explained, informative })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((w, x), m)| w * (x - m)).sum())
            .collect()
    }

    /// Indices of kept components that carry no variance.
    pub fn surplus_components(&self) -> Vec<usize> {
        (0..self.informative.len()).filter(|&i| !self.informative[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Eigenvalues of a symmetric 3×3 matrix from its characteristic cubic,
    /// solved with the trigonometric form.
    fn cubic_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
        let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| (a[i][j] - if i == j { q } else { 0.0 }) / p).collect())
            .collect();
        let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let l1 = q + 2.0 * p * phi.cos();
        let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [l1, 3.0 * q - l1 - l3, l3]
    }

    #[test]
    fn collinear_pair() {
        let rows: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, i as f64]).collect();
        let pca = Pca::fit(&rows, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pca.components[0][0] - h).abs() < 1e-12 && (pca.components[0][1] - h).abs() < 1e-12);
        assert!((pca.explained[0] - 1.0).abs() < 1e-9);
        assert_eq!(pca.surplus_components(), vec![1]);
    }

    #[test]
    fn three_by_three_matches_cubic_oracle() {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let t = i as f64;
                [t.sin() * 3.0 + 0.1 * t, (1.7 * t).cos() + 0.5 * t.sin(), (0.3 * t).sin() - 0.2 * (2.3 * t).cos()]
            })
            .collect();
        let (_, cov) = covariance(&rows).unwrap();
        let a = [[cov[(0, 0)], cov[(0, 1)], cov[(0, 2)]], [cov[(1, 0)], cov[(1, 1)], cov[(1, 2)]], [
            cov[(2, 0)],
            cov[(2, 1)],
            cov[(2, 2)],
        ]];
        let oracle = cubic_eigenvalues(a);
        let pca = Pca::fit(&rows, 3).unwrap();
        for (l, o) in pca.eigenvalues.iter().zip(oracle) {
            assert!((l - o).abs() < 1e-8, "{l} vs {o}");
        }
        for (i, v) in pca.components.iter().enumerate() {
            // A v = λ v
            for r in 0..3 {
                let av: f64 = (0..3).map(|c| a[r][c] * v[c]).sum();
                assert!((av - pca.eigenvalues[i] * v[r]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_rank_fractions_sum_to_one_and_are_orthonormal() {
        let rows: Vec<[f64; 6]> =
            (0..50).map(|i| std::array::from_fn(|j| ((i * (j + 3)) as f64 * 0.37).sin() + j as f64 * 0.01 * i as f64)).collect();
        let pca = Pca::fit(&rows, 6).unwrap();
        assert!((pca.explained.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for a in 0..6 {
            for b in 0..6 {
                let dot: f64 = pca.components[a].iter().zip(&pca.components[b]).map(|(x, y)| x * y).sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
            let lead = pca.components[a].iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn rejects_bad_k() {
        let rows = vec![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]];
        assert!(Pca::fit(&rows, 0).is_err());
        assert!(Pca::fit(&rows, 3).is_err());
    }
}
