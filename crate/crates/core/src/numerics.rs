//! Dense complex Hermitian linear-algebra kernels.
//!
//! Everything here operates on `Complex64` in double precision: the
//! clutter-to-noise ratios involved (tens of dB) combined with matrix
//! inversion do not leave room for single precision.

use nalgebra::linalg::{Cholesky, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A Hermitian linear system `(A + ridge*I) x = b`.
#[derive(Debug, Clone)]
pub struct HermitianSystem {
    pub matrix: CMatrix,
    pub rhs: CVector,
    pub ridge: f64,
}

impl HermitianSystem {
    /// Validates shapes, Hermitian symmetry and `ridge >= 0`.
    pub fn new(matrix: CMatrix, rhs: CVector, ridge: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims(format!(
                "system matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != rhs.len() {
            return Err(Error::dims(format!(
                "rhs length {} does not match matrix order {}",
                rhs.len(),
                matrix.nrows()
            )));
        }
        if !(ridge >= 0.0) {
            return Err(Error::invalid(format!("ridge must be >= 0, got {ridge}")));
        }
        let asym = hermitian_asymmetry(&matrix);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self { matrix, rhs, ridge })
    }
}

/// Relative Frobenius asymmetry `||A - A^H||_F / ||A||_F` (0 for the zero matrix).
pub fn hermitian_asymmetry(a: &CMatrix) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / norm
}

/// Solves `(A + ridge*I) x = b` by Cholesky factorization.
///
/// One step of iterative refinement is applied so the returned residual is
/// at the level of machine precision rather than the factorization error.
pub fn hermitian_solve(system: &HermitianSystem) -> Result<CVector> {
    let n = system.matrix.nrows();
    let mut m = system.matrix.clone();
    for i in 0..n {
        m[(i, i)] += Complex64::new(system.ridge, 0.0);
    }
    let chol = Cholesky::new(m.clone())
        .ok_or_else(|| Error::Singular("Cholesky factorization failed".into()))?;
    // nalgebra's complex Cholesky does not reject indefinite input (the
    // complex square root always exists); a valid factor of a positive
    // definite matrix has a strictly positive real diagonal.
    let factor = chol.l_dirty();
    for i in 0..n {
        let d = factor[(i, i)];
        if !(d.re > 0.0) || d.im.abs() > 1e-10 * d.re {
            return Err(Error::Singular(
                "matrix is not positive definite after ridge".into(),
            ));
        }
    }
    let mut x = chol.solve(&system.rhs);
    let residual = &system.rhs - &m * &x;
    x += chol.solve(&residual);
    let rel = (&system.rhs - &m * &x).norm() / system.rhs.norm().max(f64::MIN_POSITIVE);
    if rel > 1e-8 {
        return Err(Error::Singular(format!(
            "solve residual {rel:.3e} exceeds tolerance; system is numerically singular"
        )));
    }
    Ok(x)
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
///
/// Returns `(eigenvalues, eigenvectors)` with `A = V diag(lambda) V^H` and
/// unitary `V` (columns are the eigenvectors).
pub fn eig_hermitian(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !a.is_square() {
        return Err(Error::dims(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let asym = hermitian_asymmetry(a);
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian(asym));
    }
    // Symmetrize before factorizing so rounding in the input cannot leak
    // a tiny non-Hermitian part into the decomposition.
    let sym = (a + a.adjoint()).scale(0.5);
    let decomp = SymmetricEigen::new(sym);

    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| decomp.eigenvalues[j].total_cmp(&decomp.eigenvalues[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    Ok((eigenvalues, vectors))
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: CVector,
    /// False when `max_iter` was reached before the tolerance; the solution
    /// is then the best iterate found, not a failure.
    pub converged: bool,
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Conjugate gradient for `(op + ridge*I) x = b` without materializing the
/// operator. `op` must be the application of a Hermitian positive
/// semidefinite matrix; `ridge > 0` keeps the shifted operator definite.
///
/// Stops when the residual drops below `tol * ||b||` or after `max_iter`
/// steps, whichever comes first.
pub fn cg_regularized_solve<F>(
    op: F,
    b: &CVector,
    ridge: f64,
    tol: f64,
    max_iter: usize,
) -> CgOutcome
where
    F: Fn(&CVector) -> CVector,
{
    let n = b.len();
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return CgOutcome {
            solution: CVector::zeros(n),
            converged: true,
            iterations: 0,
            rel_residual: 0.0,
        };
    }

    let apply = |v: &CVector| -> CVector {
        let mut out = op(v);
        if ridge != 0.0 {
            out.axpy(Complex64::new(ridge, 0.0), v, Complex64::new(1.0, 0.0));
        }
        out
    };

    let mut x = CVector::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rho = r.norm_squared();
    let threshold = tol * b_norm;

    let mut iterations = 0;
    while iterations < max_iter {
        let ap = apply(&p);
        let denom = p.dotc(&ap).re;
        if denom <= 0.0 {
            // Lost definiteness to rounding; the current iterate is the best
            // we can certify.
            break;
        }
        let alpha = rho / denom;
        x.axpy(Complex64::new(alpha, 0.0), &p, Complex64::new(1.0, 0.0));
        r.axpy(Complex64::new(-alpha, 0.0), &ap, Complex64::new(1.0, 0.0));
        iterations += 1;

        let rho_next = r.norm_squared();
        if rho_next.sqrt() <= threshold {
            rho = rho_next;
            break;
        }
        let beta = rho_next / rho;
        rho = rho_next;
        p = &r + p.scale(beta);
    }

    let rel_residual = rho.sqrt() / b_norm;
    CgOutcome {
        converged: rel_residual <= tol,
        solution: x,
        iterations,
        rel_residual,
    }
}
