//! Superoperators on vectorized operators.
//!
//! Column-stacking is the single project-wide convention: the map
//! X ↦ A X B has matrix B^T ⊗ A. Everything downstream (Lindbladians,
//! discriminants, Choi matrices) depends on this one choice.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{self, kron, unvec_op, vec_op, CMat};

#[derive(Debug, Clone)]
pub struct Superoperator {
    n: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn new(n: usize, mat: CMat) -> Self {
        assert_eq!(mat.nrows(), 1 << (2 * n));
        assert_eq!(mat.ncols(), 1 << (2 * n));
        Superoperator { n, mat }
    }

    pub fn zero(n: usize) -> Self {
        let d = 1usize << (2 * n);
        Superoperator {
            n,
            mat: CMat::zeros(d, d),
        }
    }

    pub fn identity(n: usize) -> Self {
        let d = 1usize << (2 * n);
        Superoperator {
            n,
            mat: linalg::identity(d),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Hilbert space dimension 2^n (the matrix itself is 4^n × 4^n).
    pub fn op_dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn matrix_mut(&mut self) -> &mut CMat {
        &mut self.mat
    }

    /// X ↦ A X B.
    pub fn sandwich(n: usize, a: &CMat, b: &CMat) -> Self {
        Superoperator::new(n, kron(&b.transpose(), a))
    }

    /// X ↦ U X U†.
    pub fn conjugation(n: usize, u: &CMat) -> Self {
        Superoperator::new(n, kron(&u.conjugate(), u))
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let d = self.op_dim();
        assert_eq!(x.nrows(), d);
        unvec_op(&(&self.mat * vec_op(x)), d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Superoperator {
            n: self.n,
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &Superoperator) -> Self {
        assert_eq!(self.n, other.n);
        Superoperator {
            n: self.n,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Superoperator) -> Self {
        assert_eq!(self.n, other.n);
        Superoperator {
            n: self.n,
            mat: &self.mat - &other.mat,
        }
    }

    /// e^{t·S} as a superoperator.
    pub fn expm(&self, t: f64) -> Self {
        Superoperator {
            n: self.n,
            mat: linalg::expm(&self.mat.scale(t)),
        }
    }

    /// Unnormalized Choi matrix Σ_ij E_ij ⊗ S(E_ij); the (i,j) block in the
    /// first factor is S(|i⟩⟨j|).
    pub fn choi(&self) -> CMat {
        let d = self.op_dim();
        let mut out = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(i, j)] = Complex64::new(1.0, 0.0);
                let img = self.apply(&e);
                for r in 0..d {
                    for c in 0..d {
                        out[(i * d + r, j * d + c)] = img[(r, c)];
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CptpReport {
    pub is_cp: bool,
    pub is_tp: bool,
    pub min_choi_eig: f64,
}

/// Complete positivity and trace preservation via the Choi matrix.
pub fn cptp_check(s: &Superoperator, tol: f64) -> Result<CptpReport> {
    let d = s.op_dim();
    let choi = s.choi();
    let herm_res = linalg::max_abs(&(&choi - choi.adjoint()));
    let sym = (&choi + choi.adjoint()).scale(0.5);
    let (vals, _) = linalg::eigh(&sym)?;
    let min_choi_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let is_cp = herm_res <= tol && min_choi_eig >= -tol;

    let mut tp_res = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let tr = s.apply(&e).trace();
            let want = if i == j { 1.0 } else { 0.0 };
            tp_res = tp_res.max((tr - Complex64::new(want, 0.0)).norm());
        }
    }
    let is_tp = tp_res <= tol;
    Ok(CptpReport {
        is_cp,
        is_tp,
        min_choi_eig,
    })
}
