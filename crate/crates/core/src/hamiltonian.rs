//! Parent Hamiltonians of circuits in projector form: H = Σ_i h_i with
//! h_i = C(|1⟩⟨1|_i ⊗ I)C†, integer spectrum {0..n}, eigenbasis {C|x⟩}.

use std::collections::BTreeSet;

use crate::circuit::{self, Circuit, ZImage};
use crate::dense::{partial_trace_ordered, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, embed, CMat, CVec};

#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    /// Qubits the term acts on (sorted ascending).
    pub support: Vec<usize>,
    /// The projector h_i restricted to its support.
    pub local: CMat,
}

#[derive(Debug, Clone)]
pub struct ParentHamiltonian {
    circuit: Circuit,
    unitary: CMat,
    terms: Vec<HamiltonianTerm>,
    lightcones: Vec<BTreeSet<usize>>,
    ell: usize,
    locality: usize,
}

impl ParentHamiltonian {
    pub fn n(&self) -> usize {
        self.circuit.n()
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// The circuit unitary C; its columns are the eigenvectors C|x⟩.
    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn lightcones(&self) -> &[BTreeSet<usize>] {
        &self.lightcones
    }

    /// Max lightcone size ℓ.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Max term support size r.
    pub fn locality(&self) -> usize {
        self.locality
    }

    /// Energy of the eigenvector in column x: the Hamming weight |x|.
    pub fn energies(&self) -> Vec<u32> {
        (0..self.unitary.ncols() as u64)
            .map(|x| x.count_ones())
            .collect()
    }

    /// Dense embedding of term i on the full space.
    pub fn term_embedded(&self, i: usize) -> CMat {
        embed(&self.terms[i].local, &self.terms[i].support, self.n())
    }

    /// Dense H = Σ_i h_i.
    pub fn dense_hamiltonian(&self) -> CMat {
        let dim = 1usize << self.n();
        let mut h = CMat::zeros(dim, dim);
        for i in 0..self.terms.len() {
            h += self.term_embedded(i);
        }
        h
    }

    /// Σ of the terms whose support lies entirely inside `region`, restricted
    /// to the region's qubits (sorted order). This is the subsystem
    /// Hamiltonian used by the lattice experiments.
    pub fn subsystem_hamiltonian(&self, region: &[usize]) -> CMat {
        let mut region = region.to_vec();
        region.sort_unstable();
        let dim = 1usize << region.len();
        let mut h = CMat::zeros(dim, dim);
        for t in &self.terms {
            if t.support.iter().all(|q| region.contains(q)) {
                let local_positions: Vec<usize> = t
                    .support
                    .iter()
                    .map(|q| region.iter().position(|r| r == q).unwrap())
                    .collect();
                h += embed(&t.local, &local_positions, region.len());
            }
        }
        h
    }
}

/// Build the parent Hamiltonian of `c`. Term supports come from the Z-support
/// engine; local matrices are (I − C Z_i C†)/2 on the support.
pub fn build_parent(c: &Circuit) -> Result<ParentHamiltonian> {
    if c.n() > circuit::MAX_DENSE_QUBITS {
        return Err(Error::capacity(
            "build_parent",
            c.n(),
            circuit::MAX_DENSE_QUBITS,
        ));
    }
    let n = c.n();
    let sup = circuit::supports(c)?;
    let unitary = circuit::build_unitary(c)?;
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let image = circuit::propagate_z(c, i)?;
        let support: Vec<usize> = sup.z_support[i].iter().cloned().collect();
        let k = support.len();
        let local_image = match &image {
            ZImage::Pauli(p) => p.restrict(&support).to_matrix(),
            ZImage::Dense { qubits, op } => {
                // op = I_{Q∖S} ⊗ op_S up to qubit interleaving; divide the
                // traced identity factor back out
                let keep: Vec<usize> = support
                    .iter()
                    .map(|q| qubits.iter().position(|r| r == q).unwrap())
                    .collect();
                let excess = qubits.len() - keep.len();
                partial_trace_ordered(op, qubits.len(), &keep)?
                    .scale(1.0 / (1usize << excess) as f64)
            }
        };
        let local = (linalg::identity(1 << k) - local_image).scale(0.5);
        // projector sanity: h² = h
        let proj_res = linalg::max_abs(&(&local * &local - &local));
        if proj_res > 1e-10 {
            return Err(Error::Numerical(format!(
                "term {i} is not a projector (residual {proj_res:.3e})"
            )));
        }
        terms.push(HamiltonianTerm { support, local });
    }
    // pairwise commutation on overlapping supports
    for i in 0..n {
        for j in (i + 1)..n {
            if terms[i].support.iter().any(|q| terms[j].support.contains(q)) {
                let union: Vec<usize> = {
                    let mut u: BTreeSet<usize> = terms[i].support.iter().cloned().collect();
                    u.extend(terms[j].support.iter().cloned());
                    u.into_iter().collect()
                };
                let a = embed_into(&terms[i], &union);
                let b = embed_into(&terms[j], &union);
                let comm = linalg::max_abs(&(&a * &b - &b * &a));
                if comm > 1e-10 {
                    return Err(Error::Numerical(format!(
                        "terms {i},{j} do not commute (residual {comm:.3e})"
                    )));
                }
            }
        }
    }
    Ok(ParentHamiltonian {
        circuit: c.clone(),
        unitary,
        lightcones: sup.lightcone,
        ell: sup.ell,
        locality: sup.r.max(1),
        terms,
    })
}

fn embed_into(term: &HamiltonianTerm, region: &[usize]) -> CMat {
    let positions: Vec<usize> = term
        .support
        .iter()
        .map(|q| region.iter().position(|r| r == q).unwrap())
        .collect();
    embed(&term.local, &positions, region.len())
}

/// Π_k = C(Σ_{|x|=k} |x⟩⟨x|)C†.
pub fn eigenprojector(hp: &ParentHamiltonian, k: usize) -> Result<CMat> {
    let n = hp.n();
    if k > n {
        return Err(Error::invalid(format!("energy {k} out of range 0..={n}")));
    }
    let dim = 1usize << n;
    let mut p = CMat::zeros(dim, dim);
    for x in 0..dim {
        if (x as u64).count_ones() as usize == k {
            let col = hp.unitary().column(x);
            p += col * col.adjoint();
        }
    }
    Ok(p)
}

/// Gibbs state ρ_β = e^{−βH}/Z together with the numerical partition
/// function. Built in the eigenbasis, so it is exact for the integer
/// spectrum; Z must agree with the closed form (1+e^{−β})^n.
pub fn gibbs_state(hp: &ParentHamiltonian, beta: f64) -> Result<(DensityMatrix, f64)> {
    if beta < 0.0 {
        return Err(Error::invalid("beta must be nonnegative"));
    }
    let n = hp.n();
    let dim = 1usize << n;
    let mut z = 0.0f64;
    let mut weights = Vec::with_capacity(dim);
    for x in 0..dim {
        let w = (-beta * (x as u64).count_ones() as f64).exp();
        z += w;
        weights.push(w);
    }
    let diag = CVec::from_iterator(dim, weights.iter().map(|&w| cr(w / z)));
    let u = hp.unitary();
    let rho = u * CMat::from_diagonal(&diag) * u.adjoint();
    Ok((DensityMatrix::new(rho)?, z))
}

/// Closed-form partition function of the projector-form parent Hamiltonian.
pub fn partition_function_formula(n: usize, beta: f64) -> f64 {
    (1.0 + (-beta).exp()).powi(n as i32)
}

/// Greedy coloring of the term-overlap graph: terms are adjacent iff their
/// supports intersect; lowest available color in index order.
pub fn color_interactions(hp: &ParentHamiltonian) -> Vec<usize> {
    let n = hp.terms().len();
    let mut colors = vec![usize::MAX; n];
    for i in 0..n {
        let mut used = BTreeSet::new();
        for j in 0..i {
            if hp.terms()[i]
                .support
                .iter()
                .any(|q| hp.terms()[j].support.contains(q))
            {
                used.insert(colors[j]);
            }
        }
        let mut c = 0;
        while used.contains(&c) {
            c += 1;
        }
        colors[i] = c;
    }
    colors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_iqp_cluster, random_circuit, random_exponents, Gate};
    use crate::linalg::max_abs;

    #[test]
    fn identity_circuit_n2_diagonal() {
        let hp = build_parent(&Circuit::new(2)).unwrap();
        let h = hp.dense_hamiltonian();
        let want = [0.0, 1.0, 1.0, 2.0];
        for i in 0..4 {
            assert!((h[(i, i)].re - want[i]).abs() < 1e-12);
        }
        assert_eq!(hp.ell(), 1);
        assert_eq!(hp.locality(), 1);
    }

    #[test]
    fn cnot_circuit_spectrum_and_support() {
        let mut c = Circuit::new(2);
        c.push_gate(Gate::Cnot(0, 1)).unwrap();
        let hp = build_parent(&c).unwrap();
        assert_eq!(hp.terms()[1].support, vec![0, 1]);
        let (vals, _) = linalg::eigh(&hp.dense_hamiltonian()).unwrap();
        let mut v: Vec<f64> = vals.iter().cloned().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in v.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_state_is_circuit_output() {
        let c = random_circuit(3, 3, 21);
        let hp = build_parent(&c).unwrap();
        let h = hp.dense_hamiltonian();
        let psi = circuit::simulate(&c).unwrap();
        assert!((&h * &psi).norm() < 1e-10);
    }

    #[test]
    fn spectral_decomposition_recovers_h() {
        let c = random_circuit(3, 3, 5);
        let hp = build_parent(&c).unwrap();
        let mut acc = CMat::zeros(8, 8);
        let mut rank_total = 0usize;
        for k in 0..=3usize {
            let p = eigenprojector(&hp, k).unwrap();
            assert!(max_abs(&(&p * &p - &p)) < 1e-10);
            let rank = p.trace().re.round() as usize;
            let binom = [1usize, 3, 3, 1][k];
            assert_eq!(rank, binom);
            rank_total += rank;
            acc += p.scale(k as f64);
        }
        assert_eq!(rank_total, 8);
        assert!(max_abs(&(acc - hp.dense_hamiltonian())) < 1e-10);
    }

    #[test]
    fn affine_identity_with_z_form() {
        // H = (n·I + C ΣZ_i C†)/2 ... with our sign, h_i = (I − CZ_iC†)/2
        let c = random_circuit(3, 2, 8);
        let hp = build_parent(&c).unwrap();
        let u = hp.unitary();
        let mut zsum = CMat::zeros(8, 8);
        for i in 0..3 {
            zsum += crate::pauli::PauliString::single(3, i, 3).to_matrix();
        }
        let rhs = (linalg::identity(8).scale(3.0) - u * zsum * u.adjoint()).scale(0.5);
        assert!(max_abs(&(hp.dense_hamiltonian() - rhs)) < 1e-10);
    }

    #[test]
    fn gibbs_partition_function() {
        let c = Circuit::new(2);
        let hp = build_parent(&c).unwrap();
        let (rho, z) = gibbs_state(&hp, 0.0).unwrap();
        assert!((z - 4.0).abs() < 1e-12);
        assert!(max_abs(&(rho.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-12);
        let (_, z2) = gibbs_state(&hp, 2.0_f64.ln()).unwrap();
        assert!((z2 - 2.25).abs() < 1e-12);
    }

    #[test]
    fn gibbs_eigenvalues_boltzmann() {
        let c = random_circuit(3, 3, 13);
        let hp = build_parent(&c).unwrap();
        let beta = 1.0;
        let (rho, z) = gibbs_state(&hp, beta).unwrap();
        assert!((z - partition_function_formula(3, beta)).abs() < 1e-10 * z);
        let mut want: Vec<f64> = (0..8u64)
            .map(|x| (-beta * x.count_ones() as f64).exp() / z)
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = rho.eigenvalues().unwrap();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn coloring_valid_and_bounded() {
        for seed in [1u64, 2, 3] {
            let c = random_circuit(5, 2, seed);
            let hp = build_parent(&c).unwrap();
            let colors = color_interactions(&hp);
            for i in 0..5 {
                for j in (i + 1)..5 {
                    if colors[i] == colors[j] {
                        assert!(!hp.terms()[i]
                            .support
                            .iter()
                            .any(|q| hp.terms()[j].support.contains(q)));
                    }
                }
            }
            let bound = hp.ell() * (1usize << c.depth()) + 1;
            let used = colors.iter().max().unwrap() + 1;
            assert!(used <= bound, "{used} > {bound}");
        }
    }

    #[test]
    fn eigenprojector_rejects_out_of_range() {
        let hp = build_parent(&Circuit::new(2)).unwrap();
        assert!(eigenprojector(&hp, 3).is_err());
    }

    #[test]
    fn coloring_cnot_and_cluster() {
        let mut c = Circuit::new(2);
        c.push_gate(Gate::Cnot(0, 1)).unwrap();
        let hp = build_parent(&c).unwrap();
        let colors = color_interactions(&hp);
        assert_eq!(colors.iter().max().unwrap() + 1, 2);
        assert!(2 <= hp.ell() * (1 << c.depth()) + 1); // bound 5

        let cluster = build_iqp_cluster(2, 2, &random_exponents(4, 7)).unwrap();
        let hp = build_parent(&cluster).unwrap();
        let colors = color_interactions(&hp);
        let used = colors.iter().max().unwrap() + 1;
        assert!(used <= hp.ell() * (1 << cluster.depth()) + 1);
    }

    #[test]
    fn coloring_identity_single_color() {
        let hp = build_parent(&Circuit::new(3)).unwrap();
        let colors = color_interactions(&hp);
        assert!(colors.iter().all(|&c| c == 0));
    }

    #[test]
    fn cluster_iqp_parent_builds() {
        let c = build_iqp_cluster(2, 2, &random_exponents(4, 7)).unwrap();
        let hp = build_parent(&c).unwrap();
        // integer spectrum
        let (vals, _) = linalg::eigh(&hp.dense_hamiltonian()).unwrap();
        for v in vals.iter() {
            assert!((v - v.round()).abs() < 1e-8);
            assert!(*v > -1e-8 && *v < 4.0 + 1e-8);
        }
    }
}
