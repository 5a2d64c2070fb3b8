//! Density matrices, partial traces, and distance measures.
//!
//! Entropies and relative entropies are in nats throughout; conversion to
//! bits happens only at reporting boundaries.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};

/// A validated quantum state: Hermitian, unit trace, PSD (within tolerance).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        Self::with_tolerance(mat, 1e-12)
    }

    /// Looser validation for states coming out of numerical evolution.
    pub fn with_tolerance(mat: CMat, tol: f64) -> Result<Self> {
        let dim = mat.nrows();
        if !dim.is_power_of_two() || mat.ncols() != dim {
            return Err(Error::invalid("density matrix must be square, dim 2^n"));
        }
        let n = dim.trailing_zeros() as usize;
        let herm = linalg::max_abs(&(&mat - mat.adjoint()));
        if herm > tol {
            return Err(Error::Numerical(format!(
                "state is not Hermitian (residual {herm:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr - cr(1.0)).norm() > tol.max(1e-12) {
            return Err(Error::Numerical(format!("state trace is {tr}, not 1")));
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        let (vals, _) = linalg::eigh(&sym)?;
        if let Some(min) = vals.iter().cloned().reduce(f64::min) {
            if min < -tol {
                return Err(Error::Numerical(format!(
                    "state has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(DensityMatrix { n, mat: sym })
    }

    pub fn from_pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("state vector norm {norm}")));
        }
        let mat = psi * psi.adjoint();
        Self::new(mat)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix {
            n,
            mat: linalg::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn basis_state(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        let mut mat = CMat::zeros(dim, dim);
        mat[(index, index)] = cr(1.0);
        DensityMatrix { n, mat }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// (1−ε)ρ + ε·I/2^n, the standard full-rank regularization.
    pub fn regularized(&self, eps: f64) -> DensityMatrix {
        let dim = self.dim();
        let mat = self.mat.scale(1.0 - eps) + linalg::identity(dim).scale(eps / dim as f64);
        DensityMatrix { n: self.n, mat }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (vals, _) = linalg::eigh(&self.mat)?;
        let mut v: Vec<f64> = vals.iter().cloned().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(v)
    }
}

/// Seeded Ginibre-ensemble mixed state, for probe sets and randomized tests.
pub fn random_density(n: usize, seed: u64) -> DensityMatrix {
    use rand::Rng;
    let mut rng = crate::noise::stream_rng(seed, 0);
    let dim = 1usize << n;
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix {
        n,
        mat: m.scale(1.0 / tr),
    }
}

/// Partial trace keeping `keep` (output factors follow the order of `keep`).
/// An empty `keep` yields the 1×1 matrix [Tr ρ].
pub fn partial_trace_ordered(mat: &CMat, n: usize, keep: &[usize]) -> Result<CMat> {
    for &q in keep {
        if q >= n {
            return Err(Error::invalid(format!("qubit {q} out of range for n={n}")));
        }
    }
    let mut seen = vec![false; n];
    for &q in keep {
        if seen[q] {
            return Err(Error::invalid("duplicate qubit in keep set"));
        }
        seen[q] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
    let dk = 1usize << keep.len();
    let dr = 1usize << rest.len();
    let full_index = |bits_k: usize, bits_r: usize| -> usize {
        let mut idx = 0usize;
        for (j, &q) in keep.iter().enumerate() {
            if (bits_k >> (keep.len() - 1 - j)) & 1 == 1 {
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
    let mut out = CMat::zeros(dk, dk);
    for rk in 0..dk {
        for ck in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for br in 0..dr {
                acc += mat[(full_index(rk, br), full_index(ck, br))];
            }
            out[(rk, ck)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace of a density matrix onto `keep` (sorted ascending).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let mat = partial_trace_ordered(rho.matrix(), rho.n(), &keep)?;
    DensityMatrix::new(mat)
}

pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let vals = rho.eigenvalues()?;
    Ok(vals
        .iter()
        .filter(|&&x| x > 1e-14)
        .map(|&x| -x * x.ln())
        .sum())
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Divergences {
    pub trace_distance: f64,
    /// Tr[ρ(log ρ − log σ)] in nats; +∞ when supp(ρ) ⊄ supp(σ).
    pub relative_entropy: f64,
    /// Uhlmann fidelity (Tr√(√ρ σ √ρ))².
    pub fidelity: f64,
}

pub fn divergences(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Divergences> {
    if rho.n() != sigma.n() {
        return Err(Error::invalid("states must have the same qubit count"));
    }
    let trace_distance = linalg::trace_distance_raw(rho.matrix(), sigma.matrix())?;

    let sqrt_rho = linalg::sqrtm_psd(rho.matrix())?;
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let fid_root: f64 = {
        let (vals, _) = linalg::eigh(&inner)?;
        vals.iter().map(|x| x.max(0.0).sqrt()).sum()
    };
    let fidelity = fid_root * fid_root;

    // relative entropy: Tr ρ log ρ − Σ_j log(μ_j)⟨v_j|ρ|v_j⟩ over σ's eigenbasis
    let (rvals, _) = linalg::eigh(rho.matrix())?;
    let tr_rho_log_rho: f64 = rvals
        .iter()
        .filter(|&&x| x > 1e-14)
        .map(|&x| x * x.ln())
        .sum();
    let (svals, svecs) = linalg::eigh(sigma.matrix())?;
    let mut tr_rho_log_sigma = 0.0f64;
    let mut infinite = false;
    for j in 0..svals.len() {
        let v = svecs.column(j);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if svals[j] > 1e-14 {
            tr_rho_log_sigma += weight * svals[j].ln();
        } else if weight > 1e-12 {
            infinite = true;
        }
    }
    let relative_entropy = if infinite {
        f64::INFINITY
    } else {
        (tr_rho_log_rho - tr_rho_log_sigma).max(0.0)
    };
    Ok(Divergences {
        trace_distance,
        relative_entropy,
        fidelity,
    })
}

/// Relative entropy D(ρ‖σ) for full-rank σ, skipping the other measures.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let log_rho = linalg::logm_pd(rho)?;
    let log_sigma = linalg::logm_pd(sigma)?;
    Ok((rho * (log_rho - log_sigma)).trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs};

    fn bell_pair() -> DensityMatrix {
        let mut psi = DVector::from_element(4, Complex64::new(0.0, 0.0));
        psi[0] = cr(1.0 / 2.0_f64.sqrt());
        psi[3] = cr(1.0 / 2.0_f64.sqrt());
        DensityMatrix::from_pure(&psi).unwrap()
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let rho = bell_pair();
        let red = partial_trace(&rho, &[0]).unwrap();
        assert!(max_abs(&(red.matrix() - DensityMatrix::maximally_mixed(1).matrix())) < 1e-12);
    }

    #[test]
    fn product_state_reduces_to_factor() {
        let a = DensityMatrix::basis_state(1, 1);
        let b = DensityMatrix::maximally_mixed(1);
        let joint = DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
        let red = partial_trace(&joint, &[0]).unwrap();
        assert!(max_abs(&(red.matrix() - a.matrix())) < 1e-12);
    }

    #[test]
    fn empty_keep_gives_scalar_one() {
        let rho = bell_pair();
        let red = partial_trace_ordered(rho.matrix(), 2, &[]).unwrap();
        assert_eq!(red.nrows(), 1);
        assert!((red[(0, 0)] - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn divergences_identical_states() {
        let rho = bell_pair();
        let d = divergences(&rho, &rho).unwrap();
        assert!(d.trace_distance < 1e-12);
        assert!(d.relative_entropy.abs() < 1e-10);
        assert!((d.fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn divergences_orthogonal_states() {
        let zero = DensityMatrix::basis_state(1, 0);
        let one = DensityMatrix::basis_state(1, 1);
        let d = divergences(&zero, &one).unwrap();
        assert!((d.trace_distance - 1.0).abs() < 1e-12);
        assert!(d.relative_entropy.is_infinite());
        assert!(d.fidelity < 1e-12);
    }

    #[test]
    fn relative_entropy_pure_vs_mixed_is_ln2() {
        let zero = DensityMatrix::basis_state(1, 0);
        let mixed = DensityMatrix::maximally_mixed(1);
        let d = divergences(&zero, &mixed).unwrap();
        assert!((d.relative_entropy - std::f64::consts::LN_2).abs() < 1e-10);
    }
}
