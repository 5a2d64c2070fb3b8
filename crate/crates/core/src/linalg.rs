//! Dense complex linear algebra helpers shared by every module.
//!
//! All operators are `DMatrix<Complex64>` with qubit 0 as the most
//! significant bit of the row/column index. Vectorization is column-stacking
//! throughout: `vec(A X B) = (B^T ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Column-stacking vec. nalgebra stores matrices column-major, so this is a
/// straight copy of the backing slice.
pub fn vec_op(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec_op(v: &CVec, dim: usize) -> CMat {
    assert_eq!(v.len(), dim * dim);
    CMat::from_column_slice(dim, dim, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Embed an operator acting on `qubits` (in the listed order, first qubit =
/// most significant factor of `op`) into the full `n`-qubit space.
pub fn embed(op: &CMat, qubits: &[usize], n: usize) -> CMat {
    let k = qubits.len();
    assert_eq!(op.nrows(), 1 << k);
    let rest: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    // position of qubit q in the global index (qubit 0 = MSB)
    let place = |bits_q: usize, bits_r: usize| -> usize {
        let mut idx = 0usize;
        for (j, &q) in qubits.iter().enumerate() {
            if (bits_q >> (k - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - q);
            }
        }
        for (j, &q) in rest.iter().enumerate() {
            if (bits_r >> (rest.len() - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - q);
            }
        }
        idx
    };
    for r_op in 0..(1 << k) {
        for c_op in 0..(1 << k) {
            let v = op[(r_op, c_op)];
            if v == ZERO {
                continue;
            }
            for br in 0..(1usize << rest.len()) {
                out[(place(r_op, br), place(c_op, br))] += v;
            }
        }
    }
    out
}

/// Hermitian eigendecomposition. Errors if the asymmetry exceeds `1e-10`
/// relative to the matrix scale; otherwise the input is symmetrized first.
pub fn eigh(m: &CMat) -> Result<(DVector<f64>, CMat)> {
    let scale = max_abs(m).max(1.0);
    let asym = max_abs(&(m - m.adjoint()));
    if asym > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "matrix is not Hermitian (asymmetry {asym:.3e})"
        )));
    }
    let h = (m + m.adjoint()).scale(0.5);
    // bounded iterations so degenerate inputs fail loudly instead of hanging
    let se = h
        .clone()
        .try_symmetric_eigen(1e-13, 100_000)
        .or_else(|| h.try_symmetric_eigen(1e-10, 100_000))
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    Ok((se.eigenvalues, se.eigenvectors))
}

/// f(M) for Hermitian M via eigendecomposition.
pub fn funm_hermitian(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&x| cr(f(x))),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// Principal square root of a PSD matrix (negative eigenvalues clamped to 0).
pub fn sqrtm_psd(m: &CMat) -> Result<CMat> {
    funm_hermitian(m, |x| x.max(0.0).sqrt())
}

/// Spectral pseudo-inverse square root with relative cutoff.
pub fn pinv_sqrt(m: &CMat, cutoff: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter()
            .map(|&x| if x > cutoff * scale { cr(1.0 / x.sqrt()) } else { ZERO }),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// log(M) of a strictly positive definite Hermitian matrix, with eigenvalues
/// clamped away from zero so regularized density matrices are safe inputs.
pub fn logm_pd(m: &CMat) -> Result<CMat> {
    funm_hermitian(m, |x| x.max(1e-300).ln())
}

/// General matrix exponential (scaling and squaring, via nalgebra).
pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

/// Eigenvalues of a general complex matrix via the Schur form.
///
/// The QR iteration is run with a convergence floor of 1e-12 and a bounded
/// iteration count; structured (highly degenerate) inputs that stall it are
/// retried under a seeded random unitary similarity, which preserves the
/// spectrum but breaks the stalling sparsity pattern.
pub fn eigenvalues(m: &CMat) -> Result<CVec> {
    let dim = m.nrows();
    if let Some(schur) = m.clone().try_schur(1e-12, 100_000) {
        if let Some(ev) = schur.eigenvalues() {
            return Ok(ev);
        }
    }
    for attempt in 0..3u64 {
        let q = random_unitary(dim, 0xD15C_0000 + attempt);
        let rotated = q.adjoint() * m * &q;
        if let Some(schur) = rotated.try_schur(1e-12, 200_000) {
            if let Some(ev) = schur.eigenvalues() {
                return Ok(ev);
            }
        }
    }
    Err(Error::Numerical(
        "Schur iteration failed to converge after randomized retries".into(),
    ))
}

/// Haar-ish random unitary from the QR factor of a seeded Ginibre matrix.
pub fn random_unitary(dim: usize, seed: u64) -> CMat {
    use rand::Rng;
    let mut rng = crate::noise::stream_rng(seed, 0);
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    g.qr().q()
}

/// Trace norm ‖M‖₁ of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    let (vals, _) = eigh(m)?;
    Ok(vals.iter().map(|x| x.abs()).sum())
}

/// ½‖ρ−σ‖₁ without the DensityMatrix wrapper.
pub fn trace_distance_raw(a: &CMat, b: &CMat) -> Result<f64> {
    Ok(0.5 * trace_norm_hermitian(&(a - b))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_unvec_roundtrip() {
        let m = CMat::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64));
        assert_eq!(unvec_op(&vec_op(&m), 3), m);
    }

    #[test]
    fn vec_is_column_stacking() {
        // vec(A X B) = (B^T ⊗ A) vec X on a random-ish instance
        let a = CMat::from_fn(2, 2, |i, j| Complex64::new((i + 2 * j) as f64, 1.0));
        let b = CMat::from_fn(2, 2, |i, j| Complex64::new(j as f64 - i as f64, 0.5));
        let x = CMat::from_fn(2, 2, |i, j| Complex64::new((i * j) as f64, -1.0));
        let lhs = vec_op(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_op(&x);
        assert!((lhs - rhs).iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn embed_matches_kron_for_leading_qubits() {
        let z = CMat::from_diagonal(&CVec::from_vec(vec![ONE, -ONE]));
        let full = embed(&z, &[0], 2);
        let direct = kron(&z, &identity(2));
        assert!(max_abs(&(full - direct)) < 1e-15);
        let full1 = embed(&z, &[1], 2);
        let direct1 = kron(&identity(2), &z);
        assert!(max_abs(&(full1 - direct1)) < 1e-15);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let m = CMat::zeros(4, 4);
        assert!(max_abs(&(expm(&m) - identity(4))) < 1e-14);
    }
}
