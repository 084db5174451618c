//! Dense linear-algebra kernel for the simulation.
//!
//! Row-major `f64` matrices with exactly the operations the bandit loop
//! needs: Cholesky solves for ridge systems, Sherman-Morrison rank-one
//! inverse updates, a cyclic Jacobi eigensolver for extracting the top
//! singular subspace of small moment matrices, and the subspace-distance
//! metric between orthonormal bases.
//!
//! Everything here is a pure function of its inputs; no shared state.
//! Sizes are desk scale (a few hundred rows), which is why plain cyclic
//! Jacobi on the Gram matrix is accurate enough and dependency-free.

use crate::error::{Error, Result};

/// Numerical tolerances used across the kernel. One block on purpose:
/// tests and callers refer to these rather than re-deriving literals.
pub mod tol {
    /// Max-abs tolerance for exact-algebra identities (e.g. BᵀB = I).
    pub const EXACT: f64 = 1e-8;
    /// Tolerance for iterative results (subspace extraction).
    pub const ITERATIVE: f64 = 1e-6;
    /// Sherman-Morrison denominator floor; below this we declare the
    /// updated matrix no longer positive definite.
    pub const SPD_DENOM_MIN: f64 = 1e-14;
    /// Cyclic Jacobi sweep cap before reporting non-convergence.
    pub const JACOBI_MAX_SWEEPS: usize = 64;
}

/// Dense row-major matrix. Entries are validated finite at every public
/// construction point; internal arithmetic trusts that invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Identity scaled by `s` (λI initializers).
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged row lengths".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Matrix::from_vec(r, c, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidArgument(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let brow = rhs.row(k);
                for j in 0..rhs.cols {
                    orow[j] += a * brow[j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::InvalidArgument(format!(
                "matvec shape mismatch: {}x{} * len {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// A += scale * x xᵀ (symmetric rank-one accumulation).
    pub fn add_outer(&mut self, x: &[f64], scale: f64) {
        debug_assert_eq!(self.rows, self.cols);
        debug_assert_eq!(x.len(), self.rows);
        let n = self.rows;
        for i in 0..n {
            let xi = scale * x[i];
            let row = &mut self.data[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] += xi * x[j];
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Max-abs difference, for closeness checks between same-shape matrices.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Dot product with four independent accumulators. The fixed summation
/// order keeps results deterministic while letting the loop pipeline;
/// a single strict accumulator would serialize every add.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0_f64; 4];
    let a_chunks = a.chunks_exact(4);
    let b_chunks = b.chunks_exact(4);
    let a_rest = a_chunks.remainder();
    let b_rest = b_chunks.remainder();
    for (ca, cb) in a_chunks.zip(b_chunks) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in a_rest.iter().zip(b_rest) {
        s += x * y;
    }
    s
}

/// y = M·x for symmetric M, accumulated row-by-row into `out`.
///
/// Writing `out[j] += x[i]·M[i][j]` has no reduction dependency, so the
/// inner loop vectorizes fully; symmetry makes this equal to the usual
/// row-dot result up to summation order.
#[inline]
pub fn sym_matvec_into(m: &Matrix, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.rows, m.cols);
    debug_assert_eq!(x.len(), m.rows);
    debug_assert_eq!(out.len(), m.rows);
    let n = m.rows;
    out.fill(0.0);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &m.data[i * n..(i + 1) * n];
        for (o, &v) in out.iter_mut().zip(row) {
            *o += xi * v;
        }
    }
}

/// xᵀ M x for square M. The hot path of UCB index evaluation.
#[inline]
pub fn quad_form(m: &Matrix, x: &[f64]) -> f64 {
    debug_assert_eq!(m.rows, m.cols);
    debug_assert_eq!(x.len(), m.rows);
    let n = m.rows;
    let mut s = 0.0;
    for i in 0..n {
        s += x[i] * dot(&m.data[i * n..(i + 1) * n], x);
    }
    s
}

/// out_k = M·x_k for every row x_k of `xs` (row-major k×n), streaming M
/// through cache once instead of once per vector. Requires symmetric M
/// like [`sym_matvec_into`]; this is what keeps candidate-set scoring
/// from being memory-bound when M outgrows L2.
pub fn sym_matvec_batch(m: &Matrix, xs: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.rows, m.cols);
    let n = m.rows;
    debug_assert!(n > 0 && xs.len() % n == 0);
    debug_assert_eq!(out.len(), xs.len());
    let k = xs.len() / n;
    out.fill(0.0);
    for i in 0..n {
        let row = &m.data[i * n..(i + 1) * n];
        for kk in 0..k {
            let xi = xs[kk * n + i];
            if xi == 0.0 {
                continue;
            }
            let yk = &mut out[kk * n..(kk + 1) * n];
            for (o, &v) in yk.iter_mut().zip(row) {
                *o += xi * v;
            }
        }
    }
}

/// Orthonormal-column basis of an r-dimensional subspace of ℝᵈ.
///
/// Construction checks max-abs(BᵀB − I) ≤ `tol::EXACT`; all kernel
/// routines that output bases keep that invariant.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    matrix: Matrix,
}

impl OrthonormalBasis {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.cols() > matrix.rows() {
            return Err(Error::InvalidArgument(format!(
                "basis rank {} exceeds dimension {}",
                matrix.cols(),
                matrix.rows()
            )));
        }
        let r = matrix.cols();
        let mut worst = 0.0_f64;
        for a in 0..r {
            for b in a..r {
                let mut s = 0.0;
                for i in 0..matrix.rows() {
                    s += matrix.get(i, a) * matrix.get(i, b);
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        if worst > tol::EXACT {
            return Err(Error::InvalidArgument(format!(
                "columns not orthonormal: max-abs(BᵀB - I) = {worst:.3e}"
            )));
        }
        Ok(OrthonormalBasis { matrix })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Bᵀx: coordinates of `x` in the basis (length `rank`).
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        let r = self.rank();
        let mut out = vec![0.0; r];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = self.matrix.row(i);
            for j in 0..r {
                out[j] += xi * row[j];
            }
        }
        out
    }

    /// Bw: embed basis coordinates back into ℝᵈ.
    pub fn lift(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.rank());
        (0..self.dim()).map(|i| dot(self.matrix.row(i), w)).collect()
    }
}

/// Subspace distance ‖(I − B₁B₁ᵀ)B₂‖_F.
///
/// Asymmetric by definition: it measures how much of span(B₂) lies
/// outside span(B₁). Zero iff span(B₂) ⊆ span(B₁); at most √rank(B₂).
pub fn subspace_distance(b1: &OrthonormalBasis, b2: &OrthonormalBasis) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(Error::InvalidArgument(format!(
            "subspace distance between dimensions {} and {}",
            b1.dim(),
            b2.dim()
        )));
    }
    // (I − B₁B₁ᵀ)B₂ = B₂ − B₁(B₁ᵀB₂), no d×d projector materialized.
    let cross = b1.matrix.transpose().matmul(&b2.matrix)?;
    let reproj = b1.matrix.matmul(&cross)?;
    let mut s = 0.0;
    for (a, b) in b2.matrix.data.iter().zip(&reproj.data) {
        let diff = a - b;
        s += diff * diff;
    }
    Ok(s.sqrt())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching eigenvectors as
/// columns. Deterministic: ties keep sweep order and each eigenvector is
/// sign-fixed so its first entry above 1e-12 in magnitude is positive.
pub fn jacobi_eigen_sym(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition of non-square {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        let vals = if n == 1 { vec![m.get(0, 0)] } else { vec![] };
        return Ok((vals, v));
    }

    let norm = m.frobenius_norm();
    let off_tol = if norm > 0.0 { norm * 1e-15 } else { 0.0 };

    let mut converged = false;
    for _sweep in 0..tol::JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if off.sqrt() <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= off_tol / (n as f64) {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Update M = JᵀMJ over rows/cols p and q.
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "jacobi eigensolver did not converge within {} sweeps",
            tol::JACOBI_MAX_SWEEPS
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));

    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let mut sign = 1.0;
        for i in 0..n {
            let e = v.get(i, old_j);
            if e.abs() > 1e-12 {
                sign = e.signum();
                break;
            }
        }
        for i in 0..n {
            vecs.set(i, new_j, sign * v.get(i, old_j));
        }
    }
    Ok((vals, vecs))
}

/// Top-r left singular subspace of `m`, with the singular values of the
/// extracted directions. Computed as the top-r eigenvectors of the Gram
/// matrix m·mᵀ; positive scaling of `m` leaves the subspace unchanged.
pub fn top_r_left_singular_with_values(
    m: &Matrix,
    r: usize,
) -> Result<(OrthonormalBasis, Vec<f64>)> {
    if r == 0 || r > m.rows().min(m.cols()) {
        return Err(Error::InvalidArgument(format!(
            "requested rank {} from a {}x{} matrix",
            r,
            m.rows(),
            m.cols()
        )));
    }
    let gram = m.matmul(&m.transpose())?;
    let (vals, vecs) = jacobi_eigen_sym(&gram)?;
    let mut basis = Matrix::zeros(m.rows(), r);
    for j in 0..r {
        for i in 0..m.rows() {
            basis.set(i, j, vecs.get(i, j));
        }
    }
    let singular: Vec<f64> = vals[..r].iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok((OrthonormalBasis::new(basis)?, singular))
}

/// Top-r left singular subspace of `m` (Algorithm step "top-r singular
/// vectors"; only the left subspace is needed downstream).
pub fn top_r_left_singular_vectors(m: &Matrix, r: usize) -> Result<OrthonormalBasis> {
    top_r_left_singular_with_values(m, r).map(|(b, _)| b)
}

/// Given inv = A⁻¹ for SPD A, returns (A + xxᵀ)⁻¹ by the Sherman-Morrison
/// identity: inv − (inv·x)(inv·x)ᵀ / (1 + xᵀ·inv·x).
pub fn sherman_morrison_update(inv: &Matrix, x: &[f64]) -> Result<Matrix> {
    let mut out = inv.clone();
    sherman_morrison_update_in_place(&mut out, x)?;
    Ok(out)
}

/// In-place Sherman-Morrison, for the per-round inverse maintenance loop.
pub fn sherman_morrison_update_in_place(inv: &mut Matrix, x: &[f64]) -> Result<()> {
    if inv.rows() != inv.cols() || x.len() != inv.rows() {
        return Err(Error::InvalidArgument(format!(
            "sherman-morrison shape mismatch: inv {}x{}, x len {}",
            inv.rows(),
            inv.cols(),
            x.len()
        )));
    }
    let n = inv.rows();
    let mut ix = vec![0.0; n];
    sym_matvec_into(inv, x, &mut ix);
    let denom = 1.0 + dot(x, &ix);
    if !(denom > tol::SPD_DENOM_MIN) {
        return Err(Error::NumericalFailure(format!(
            "sherman-morrison denominator {denom:.3e} signals loss of positive definiteness"
        )));
    }
    let scale = 1.0 / denom;
    for i in 0..n {
        let coeff = scale * ix[i];
        let row = &mut inv.data[i * n..(i + 1) * n];
        for j in 0..n {
            row[j] -= coeff * ix[j];
        }
    }
    Ok(())
}

/// Lower Cholesky factor L with A = LLᵀ. Fails if a pivot is not
/// positive, which is the SPD detection used everywhere in this crate.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "cholesky of non-square {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NumericalFailure(format!(
                        "cholesky pivot {s:.3e} at index {i}: matrix not positive definite"
                    )));
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve LLᵀx = b given the lower factor from [`cholesky`].
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    solve_with_cholesky(l, b)
}

/// log det A from A's lower Cholesky factor.
pub fn cholesky_logdet(l: &Matrix) -> f64 {
    (0..l.rows()).map(|i| l.get(i, i).ln()).sum::<f64>() * 2.0
}

fn solve_with_cholesky(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    y
}

/// Solve A x = b for symmetric positive definite A via Cholesky; never by
/// explicit inversion.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::InvalidArgument(format!(
            "solve_spd shape mismatch: A is {}x{}, b has length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let l = cholesky(a)?;
    Ok(solve_with_cholesky(&l, b))
}

/// log det A for SPD A, from the Cholesky factor.
pub fn spd_logdet(a: &Matrix) -> Result<f64> {
    Ok(cholesky_logdet(&cholesky(a)?))
}

/// Dense inverse of an SPD matrix from its Cholesky factor. Used for the
/// periodic resynchronization of incrementally maintained inverses.
///
/// Computes W = L⁻¹ by a blocked forward substitution over the whole
/// identity at once (row operations instead of per-column solves), then
/// A⁻¹ = WᵀW. Exactly symmetric by construction.
pub fn spd_inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let l = cholesky(a)?;
    // W = L⁻¹ is lower triangular; row i of W has nonzeros in 0..=i.
    let mut w = Matrix::identity(n);
    for i in 0..n {
        let (head, tail) = w.data.split_at_mut(i * n);
        let wi = &mut tail[..n];
        for k in 0..i {
            let lik = l.get(i, k);
            if lik == 0.0 {
                continue;
            }
            let wk = &head[k * n..k * n + k + 1];
            for (o, &v) in wi[..=k].iter_mut().zip(wk) {
                *o -= lik * v;
            }
        }
        let inv_diag = 1.0 / l.get(i, i);
        for v in wi[..=i].iter_mut() {
            *v *= inv_diag;
        }
    }
    // A⁻¹ = WᵀW accumulated row-wise: out[i] += W[k][i] · W[k][..].
    let mut inv = Matrix::zeros(n, n);
    for k in 0..n {
        let wk = &w.data[k * n..k * n + k + 1];
        for i in 0..=k {
            let s = wk[i];
            if s == 0.0 {
                continue;
            }
            let row = &mut inv.data[i * n..i * n + k + 1];
            for (o, &v) in row.iter_mut().zip(wk) {
                *o += s * v;
            }
        }
    }
    Ok(inv)
}

/// Matrix-determinant lemma in log form:
/// log det(M + zzᵀ) = log det M + log(1 + zᵀM⁻¹z).
///
/// `quad` is zᵀM⁻¹z, strictly greater than −1 for SPD M.
pub fn logdet_rank_one_update(logdet: f64, quad: f64) -> Result<f64> {
    if !(quad > -1.0) {
        return Err(Error::NumericalFailure(format!(
            "rank-one log-det update with quadratic form {quad:.3e} <= -1"
        )));
    }
    Ok(logdet + (1.0 + quad).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_from_cols(d: usize, cols: &[usize]) -> OrthonormalBasis {
        let mut m = Matrix::zeros(d, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            m.set(c, j, 1.0);
        }
        OrthonormalBasis::new(m).unwrap()
    }

    #[test]
    fn subspace_distance_to_self_is_zero() {
        let b = basis_from_cols(5, &[0, 2]);
        assert!(subspace_distance(&b, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn subspace_distance_orthogonal_spans() {
        // b1 spans coordinates {0,1}, b2 spans {2,3} of R^6: distance √2.
        let b1 = basis_from_cols(6, &[0, 1]);
        let b2 = basis_from_cols(6, &[2, 3]);
        let d = subspace_distance(&b1, &b2).unwrap();
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn subspace_distance_dimension_mismatch() {
        let b1 = basis_from_cols(5, &[0]);
        let b2 = basis_from_cols(6, &[0]);
        assert!(matches!(
            subspace_distance(&b1, &b2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn top_r_of_diagonal_matrix() {
        let m = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let b = top_r_left_singular_vectors(&m, 2).unwrap();
        let expect = basis_from_cols(3, &[0, 1]);
        assert!(subspace_distance(&expect, &b).unwrap() < 1e-10);
    }

    #[test]
    fn top_r_rank_one_outer_product() {
        let u = [0.6, 0.8];
        let v = [1.0, 2.0, -1.0];
        let mut m = Matrix::zeros(2, 3);
        for i in 0..2 {
            for j in 0..3 {
                m.set(i, j, u[i] * v[j]);
            }
        }
        let b = top_r_left_singular_vectors(&m, 1).unwrap();
        let got = [b.matrix().get(0, 0), b.matrix().get(1, 0)];
        let aligned = (got[0] - u[0]).abs().max((got[1] - u[1]).abs());
        let flipped = (got[0] + u[0]).abs().max((got[1] + u[1]).abs());
        assert!(aligned.min(flipped) < 1e-10);
    }

    #[test]
    fn top_r_rank_exceeds_dimensions() {
        let m = Matrix::zeros(3, 2);
        assert!(matches!(
            top_r_left_singular_vectors(&m, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sherman_morrison_zero_update_is_identity() {
        let inv = Matrix::identity(2);
        let out = sherman_morrison_update(&inv, &[0.0, 0.0]).unwrap();
        assert!(out.max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn sherman_morrison_scalar_case() {
        // A = 1, x = 1: (1 + 1)⁻¹ = 0.5.
        let inv = Matrix::identity(1);
        let out = sherman_morrison_update(&inv, &[1.0]).unwrap();
        assert!((out.get(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn solve_spd_identity_and_scaling() {
        let b = vec![1.0, -2.0, 3.0];
        let x = solve_spd(&Matrix::identity(3), &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
        let a = Matrix::scaled_identity(2, 2.0);
        let x = solve_spd(&a, &[4.0, 6.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_spd_rejects_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::NumericalFailure(_))
        ));
    }

    #[test]
    fn orthonormal_basis_rejects_skewed_columns() {
        let m = Matrix::from_rows(&[vec![1.0, 0.9], vec![0.0, 0.4359]]).unwrap();
        assert!(OrthonormalBasis::new(m).is_err());
    }

    #[test]
    fn from_vec_rejects_nan() {
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn logdet_rank_one_matches_scalar_determinant() {
        // M = 2 (1x1), z = 1: det(M + zzᵀ) = 3.
        let got = logdet_rank_one_update(2.0_f64.ln(), 0.5).unwrap();
        assert!((got - 3.0_f64.ln()).abs() < 1e-14);
    }
}
