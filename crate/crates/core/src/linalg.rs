//! Small dense linear algebra: vectors as slices, row-major matrices,
//! orthonormal frames, Jacobi singular values and eigenvalues.
//!
//! Everything here targets dimensions up to 64.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::stream_rng;

/// Orthonormality tolerance for frames.
pub const ORTHO_TOL: f64 = 1e-10;
/// Relative rank tolerance.
pub const RANK_TOL: f64 = 1e-10;
/// Determinant threshold below which a matrix is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;
/// Largest dimension handled by the dense routines.
pub const MAX_DIM: usize = 64;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Returns `x / ‖x‖₂`, or `None` for the zero vector.
pub fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let r = norm2(x);
    (r > 0.0 && r.is_finite()).then(|| scale(1.0 / r, x))
}

pub fn unit_vector(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Standard Gaussian vector.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: bad.len(),
            });
        }
        Self::new(r, c, rows.concat())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Diagonal entries when the matrix is square and diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        if !self.is_square() {
            return None;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j && self[(i, j)] != 0.0 {
                    return None;
                }
            }
        }
        Some((0..self.rows).map(|i| self[(i, i)]).collect())
    }

    /// LU decomposition with partial pivoting; returns (lu, permutation, sign).
    fn lu(&self) -> (Matrix, Vec<usize>, f64, bool) {
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        (lu, perm, sign, singular)
    }

    pub fn determinant(&self) -> Result<f64> {
        self.require_square()?;
        let (lu, _, sign, singular) = self.lu();
        if singular {
            return Ok(0.0);
        }
        Ok(sign * (0..self.rows).map(|i| lu[(i, i)]).product::<f64>())
    }

    /// Inverse of a square matrix; fails when `|det| <= SINGULAR_DET`.
    pub fn inverse(&self) -> Result<Matrix> {
        self.require_square()?;
        let det = self.determinant()?;
        if det.abs() <= SINGULAR_DET {
            return Err(Error::SingularMatrix { det });
        }
        if let Some(d) = self.as_diagonal() {
            return Ok(Matrix::diag(&d.iter().map(|v| 1.0 / v).collect::<Vec<_>>()));
        }
        let n = self.rows;
        let (lu, perm, _, _) = self.lu();
        let mut inv = Matrix::zeros(n, n);
        for col in 0..n {
            let mut y: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
            for i in 0..n {
                for k in 0..i {
                    y[i] -= lu[(i, k)] * y[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    y[i] -= lu[(i, k)] * y[k];
                }
                y[i] /= lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = y[i];
            }
        }
        Ok(inv)
    }

    /// Solves `self · x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.require_square()?;
        let n = self.rows;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let (lu, perm, sign, singular) = self.lu();
        let det = sign * (0..n).map(|i| lu[(i, i)]).product::<f64>();
        if singular || det == 0.0 {
            return Err(Error::SingularMatrix { det });
        }
        let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= lu[(i, k)] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= lu[(i, k)] * y[k];
            }
            y[i] /= lu[(i, i)];
        }
        Ok(y)
    }

    /// Singular values in descending order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<f64> {
        // Work on the orientation with fewer columns.
        let a = if self.cols > self.rows {
            self.transpose()
        } else {
            self.clone()
        };
        let (m, n) = (a.rows, a.cols);
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        for _sweep in 0..100 {
            let mut rotated = false;
            for i in 0..n {
                for j in i + 1..n {
                    let alpha = dot(&cols[i], &cols[i]);
                    let beta = dot(&cols[j], &cols[j]);
                    let gamma = dot(&cols[i], &cols[j]);
                    if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for k in 0..m {
                        let (x, y) = (cols[i][k], cols[j][k]);
                        cols[i][k] = c * x - s * y;
                        cols[j][k] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        sv
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi.
    /// Returns eigenvalues ascending and the matching eigenvectors.
    pub fn symmetric_eigen(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.clone();
        let mut v = Matrix::identity(n);
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            let scale: f64 = a.data.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
            if off <= 1e-30 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|i| (a[(i, i)], v.column(i))).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(pairs.into_iter().unzip())
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            })
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// ϱ(A) = ρ((A⁻¹)ᵀA⁻¹)^(−1/2), i.e. the smallest singular value of `A`.
/// `ϱ(A)·B₂ⁿ ⊆ A·B₂ⁿ` is the largest centred Euclidean ball inside the image.
pub fn varrho(a: &Matrix) -> Result<f64> {
    let det = a.determinant()?;
    if det.abs() <= SINGULAR_DET {
        return Err(Error::SingularMatrix { det });
    }
    if let Some(d) = a.as_diagonal() {
        return Ok(d.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
    }
    Ok(*a.singular_values().last().expect("non-empty"))
}

/// An s-dimensional subspace of ℝⁿ held as an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    ambient_dim: usize,
    frame: Vec<Vec<f64>>,
}

impl Subspace {
    /// Orthonormalizes `vectors` (modified Gram–Schmidt with one
    /// re-orthogonalization pass) and keeps their span.
    pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::BadDimensions("need at least one vector".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(Error::BadDimensions("vectors must be non-empty".into()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("vector entries must be finite".into()));
        }
        if vectors.len() > n {
            return Err(Error::RankDeficient {
                rank: n,
                count: vectors.len(),
            });
        }
        let largest = vectors.iter().map(|v| norm2(v)).fold(0.0, f64::max);
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let mut w = v.clone();
            for _ in 0..2 {
                for q in &frame {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let r = norm2(&w);
            if r <= RANK_TOL * largest || r == 0.0 {
                continue;
            }
            frame.push(scale(1.0 / r, &w));
        }
        if frame.len() < vectors.len() {
            return Err(Error::RankDeficient {
                rank: frame.len(),
                count: vectors.len(),
            });
        }
        Ok(Self {
            ambient_dim: n,
            frame,
        })
    }

    /// The whole ambient space with the canonical frame.
    pub fn full(n: usize) -> Self {
        Self {
            ambient_dim: n,
            frame: (0..n).map(|k| unit_vector(n, k)).collect(),
        }
    }

    /// Span of the listed canonical basis vectors.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let vs: Vec<Vec<f64>> = axes
            .iter()
            .map(|&k| {
                if k < n {
                    Ok(unit_vector(n, k))
                } else {
                    Err(Error::BadDimensions(format!("axis {k} out of range for n={n}")))
                }
            })
            .collect::<Result<_>>()?;
        Self::orthonormalize(&vs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// Largest deviation of the frame Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.frame.iter().enumerate() {
            for (j, b) in self.frame.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// Frame coordinates `Uᵀx`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|u| dot(u, x)).collect()
    }

    /// Point `Σ yⱼ uⱼ` of the ambient space.
    pub fn embed(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim];
        for (c, u) in y.iter().zip(&self.frame) {
            axpy(*c, u, &mut x);
        }
        x
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.len(),
            });
        }
        Ok(self.embed(&self.coordinates(x)))
    }

    /// Orthonormal frame of the orthogonal complement, or `None` when the
    /// subspace is the whole space.
    pub fn complement(&self) -> Option<Subspace> {
        let n = self.ambient_dim;
        if self.dim() == n {
            return None;
        }
        let mut frame = self.frame.clone();
        let mut extra = Vec::new();
        for k in 0..n {
            let mut w = unit_vector(n, k);
            for _ in 0..2 {
                for q in &frame {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let r = norm2(&w);
            if r > 1e-6 {
                let q = scale(1.0 / r, &w);
                frame.push(q.clone());
                extra.push(q);
            }
            if frame.len() == n {
                break;
            }
        }
        Some(Subspace {
            ambient_dim: n,
            frame: extra,
        })
    }

    /// Orthonormal basis of ℝⁿ whose first `dim()` vectors are this frame.
    pub fn completed_basis(&self) -> Vec<Vec<f64>> {
        let mut basis = self.frame.clone();
        if let Some(c) = self.complement() {
            basis.extend(c.frame);
        }
        basis
    }
}

/// Haar-distributed s-dimensional subspace of ℝⁿ: s standard Gaussian
/// vectors, orthonormalized. Deterministic given `seed`.
pub fn random_subspace(n: usize, s: usize, seed: u64) -> Result<Subspace> {
    if s == 0 || s > n || n > MAX_DIM {
        return Err(Error::BadDimensions(format!(
            "random subspace requires 1 <= s <= n <= {MAX_DIM}, got s={s}, n={n}"
        )));
    }
    let mut rng = stream_rng(seed, 0x5u64);
    random_subspace_with(&mut rng, n, s)
}

/// As [`random_subspace`], drawing from a caller-supplied RNG.
pub fn random_subspace_with<R: Rng + ?Sized>(rng: &mut R, n: usize, s: usize) -> Result<Subspace> {
    if s == 0 || s > n {
        return Err(Error::BadDimensions(format!(
            "random subspace requires 1 <= s <= n, got s={s}, n={n}"
        )));
    }
    loop {
        let vs: Vec<Vec<f64>> = (0..s).map(|_| gaussian_vector(rng, n)).collect();
        match Subspace::orthonormalize(&vs) {
            Ok(sub) => return Ok(sub),
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn orthonormalize_axis_pair() {
        let s = Subspace::orthonormalize(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(close(&s.frame()[0], &[1.0, 0.0], 1e-12));
        assert!(close(&s.frame()[1], &[0.0, 1.0], 1e-12));
    }

    #[test]
    fn orthonormalize_normalizes() {
        let s = Subspace::orthonormalize(&[vec![2.0, 0.0, 0.0]]).unwrap();
        assert!(close(&s.frame()[0], &[1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn orthonormalize_rejects_duplicate_direction() {
        let err = Subspace::orthonormalize(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { rank: 1, count: 2 }));
    }

    #[test]
    fn project_examples() {
        let e1 = Subspace::coordinate(2, &[0]).unwrap();
        assert!(close(&e1.project(&[3.0, 4.0]).unwrap(), &[3.0, 0.0], 1e-15));
        let diag = Subspace::orthonormalize(&[vec![1.0, 1.0]]).unwrap();
        assert!(close(&diag.project(&[1.0, 1.0]).unwrap(), &[1.0, 1.0], 1e-12));
        // rank-1 projector uuᵀ with u = (1,1)/√2 applied to e₁: (1/2, 1/2)
        assert!(close(&diag.project(&[1.0, 0.0]).unwrap(), &[0.5, 0.5], 1e-12));
        assert!(matches!(
            diag.project(&[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn varrho_examples() {
        assert_eq!(varrho(&Matrix::identity(3)).unwrap(), 1.0);
        assert_eq!(varrho(&Matrix::diag(&[3.0, 2.0, 1.0])).unwrap(), 1.0);
        let a = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.5, 0.0]]).unwrap();
        // 2×2 oracle: σ² are the roots of t² − tr(AᵀA)t + det(A)² = 0.
        let tr = 4.0 + 0.25;
        let det2: f64 = 1.0;
        let smallest = ((tr - (tr * tr - 4.0 * det2).sqrt()) / 2.0).sqrt();
        assert!((varrho(&a).unwrap() - smallest).abs() < 1e-12);
        assert!((smallest - 0.5).abs() < 1e-12);
        assert!(matches!(
            varrho(&Matrix::diag(&[1.0, 0.0])),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn inverse_and_determinant() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]).unwrap();
        assert!((a.determinant().unwrap() - 18.0).abs() < 1e-12);
        let prod = a.matmul(&a.inverse().unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - t).abs() < 1e-12);
            }
        }
        let b = [1.0, -2.0, 0.5];
        let x = a.solve(&b).unwrap();
        assert!(close(&a.mul_vec(&x), &b, 1e-12));
        let p = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(&p.solve(&[3.0, 4.0]).unwrap(), &[4.0, 3.0], 1e-15));
    }

    #[test]
    fn symmetric_eigen_matches_trace_and_det() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (vals, vecs) = a.symmetric_eigen().unwrap();
        assert!(close(&vals, &[1.0, 3.0], 1e-12));
        let v = &vecs[1];
        assert!((v[0].abs() - v[1].abs()).abs() < 1e-12);
    }

    #[test]
    fn singular_values_rectangular() {
        let a = Matrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]).unwrap();
        assert!(close(&a.singular_values(), &[4.0, 3.0], 1e-12));
    }

    #[test]
    fn random_subspace_full_and_deterministic() {
        let s = random_subspace(3, 3, 1).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(s.orthonormality_defect() < ORTHO_TOL);
        let a = random_subspace(5, 2, 42).unwrap();
        let b = random_subspace(5, 2, 42).unwrap();
        assert_eq!(a, b);
        assert!(matches!(random_subspace(2, 3, 0), Err(Error::BadDimensions(_))));
    }

    #[test]
    fn complement_is_orthogonal() {
        let s = random_subspace(5, 2, 9).unwrap();
        let c = s.complement().unwrap();
        assert_eq!(c.dim(), 3);
        for u in s.frame() {
            for v in c.frame() {
                assert!(dot(u, v).abs() < 1e-12);
            }
        }
        assert!(Subspace::full(3).complement().is_none());
    }
}
