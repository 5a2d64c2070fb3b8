//! Davies generators for parent Hamiltonians: frequency-resolved Pauli jumps
//! on circuit lightcones with Glauber transition weights.
//!
//! Weight convention: a component A_ν = Π_{k+ν} A Π_k raises the energy by ν
//! and carries weight w(ν) = (1+e^{βν})^{−1}, so that w(ν)/w(−ν) = e^{−βν}.
//! The numerical detailed-balance checker is the authority for this choice;
//! the opposite sign fails it by orders of magnitude.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::circuit::Circuit;
use crate::dense::{relative_entropy, DensityMatrix};
use crate::error::{Error, Result};
use crate::hamiltonian::{self, ParentHamiltonian};
use crate::linalg::{self, cr, kron, unvec_op, vec_op, CMat, CVec};
use crate::pauli::{pauli_set_on, PauliString};
use crate::superop::{cptp_check, CptpReport, Superoperator};

/// Superoperators get dense here (4^n × 4^n).
pub const MAX_DAVIES_QUBITS: usize = 5;

/// Glauber weight for a transition that raises the energy by `nu`.
pub fn glauber_weight(nu: f64, beta: f64) -> f64 {
    1.0 / (1.0 + (beta * nu).exp())
}

#[derive(Debug, Clone)]
pub struct Jump {
    /// Lightcone center this jump belongs to.
    pub site: usize,
    /// The Pauli factor (full-width string).
    pub pauli: PauliString,
    /// Amplitude normalization 2^{−|L_site|}.
    pub norm: f64,
}

impl Jump {
    pub fn dense(&self) -> CMat {
        self.pauli.to_matrix().scale(self.norm)
    }
}

#[derive(Debug, Clone)]
pub struct DaviesGenerator {
    hp: ParentHamiltonian,
    beta: f64,
    jumps: Vec<Jump>,
    superop: Superoperator,
    rho_beta: DensityMatrix,
    partition: f64,
}

impl DaviesGenerator {
    pub fn hp(&self) -> &ParentHamiltonian {
        &self.hp
    }

    pub fn n(&self) -> usize {
        self.hp.n()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn rho_beta(&self) -> &DensityMatrix {
        &self.rho_beta
    }

    pub fn partition_function(&self) -> f64 {
        self.partition
    }

    /// ρ_β^t through the known eigenbasis (exact for the integer spectrum).
    pub fn sigma_power(&self, t: f64) -> CMat {
        let u = self.hp.unitary();
        let dim = u.nrows();
        let diag = CVec::from_iterator(
            dim,
            (0..dim).map(|x| {
                let p = (-self.beta * (x as u64).count_ones() as f64).exp() / self.partition;
                cr(p.powf(t))
            }),
        );
        u * CMat::from_diagonal(&diag) * u.adjoint()
    }

    /// Frequency components Π_{k+ν} A Π_k of jump `a`, keyed by ν.
    pub fn jump_components(&self, a: usize) -> Result<BTreeMap<i64, CMat>> {
        let dense = self.jumps[a].dense();
        Ok(frequency_components(
            self.hp.unitary(),
            &self.hp.energies(),
            &dense,
        ))
    }
}

/// Decompose `a` into fixed-energy-transfer components in the eigenbasis
/// given by the columns of `u` with integer `energies`.
pub fn frequency_components(u: &CMat, energies: &[u32], a: &CMat) -> BTreeMap<i64, CMat> {
    let dim = u.nrows();
    let atil = u.adjoint() * a * u;
    let mut comps: BTreeMap<i64, CMat> = BTreeMap::new();
    for i in 0..dim {
        for k in 0..dim {
            let v = atil[(i, k)];
            if v.norm() <= 1e-14 {
                continue;
            }
            let nu = energies[i] as i64 - energies[k] as i64;
            let entry = comps
                .entry(nu)
                .or_insert_with(|| CMat::zeros(dim, dim));
            entry[(i, k)] = v;
        }
    }
    // rotate back to the computational basis
    comps
        .into_iter()
        .map(|(nu, m)| (nu, u * m * u.adjoint()))
        .collect()
}

/// Assemble Σ_{a,ν} w(ν)[A_ν·A_ν† − ½{A_ν†A_ν, ·}] for arbitrary dense jumps
/// over an eigenbasis with integer energies. Work happens in the eigenbasis,
/// where the ν-resolved sums collapse to an entrywise weight mask.
pub fn assemble_generator<I>(
    u: &CMat,
    energies: &[u32],
    jumps: I,
    beta: f64,
    weight: &dyn Fn(f64, f64) -> f64,
) -> Superoperator
where
    I: IntoIterator<Item = CMat>,
{
    let dim = u.nrows();
    let n = dim.trailing_zeros() as usize;
    let sdim = dim * dim;
    let mut transition = CMat::zeros(sdim, sdim);
    let mut decay = CMat::zeros(dim, dim);
    for a in jumps {
        let atil = u.adjoint() * &a * u;
        let conj = atil.conjugate();
        // Σ_ν kron(conj A_ν, A_ν) = kron(conj Ã, Ã) ∘ mask, applied after the sum
        transition += kron(&conj, &atil);
        // M = Σ_ν w(ν) A_ν†A_ν is block diagonal over equal energies
        for k in 0..dim {
            for l in 0..dim {
                if energies[k] != energies[l] {
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    let w = weight(energies[i] as f64 - energies[k] as f64, beta);
                    acc += conj[(i, k)] * atil[(i, l)] * w;
                }
                decay[(k, l)] += acc;
            }
        }
    }
    // entrywise mask: w(E_i−E_k) when E_i−E_k == E_j−E_l, else 0
    for col in 0..sdim {
        let (l, k) = (col / dim, col % dim);
        for row in 0..sdim {
            let (j, i) = (row / dim, row % dim);
            let nu_right = energies[i] as i64 - energies[k] as i64;
            let nu_left = energies[j] as i64 - energies[l] as i64;
            if nu_right == nu_left {
                transition[(row, col)] *= cr(weight(nu_right as f64, beta));
            } else {
                transition[(row, col)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let id = linalg::identity(dim);
    let ltilde =
        transition - kron(&id, &decay).scale(0.5) - kron(&decay.transpose(), &id).scale(0.5);
    // back to the computational basis: L = (V̄⊗V) L̃ (V̄⊗V)†
    let w = kron(&u.conjugate(), u);
    Superoperator::new(n, &w * ltilde * w.adjoint())
}

/// The crate's jump set: every Pauli on each lightcone L_i, amplitude
/// 2^{−|L_i|}, giving Σ_i 4^{|L_i|} jumps.
pub fn lightcone_jumps(hp: &ParentHamiltonian) -> Vec<Jump> {
    let n = hp.n();
    let mut jumps = Vec::new();
    for site in 0..n {
        let cone: Vec<usize> = hp.lightcones()[site].iter().cloned().collect();
        let norm = 0.5_f64.powi(cone.len() as i32);
        for pauli in pauli_set_on(n, &cone) {
            jumps.push(Jump { site, pauli, norm });
        }
    }
    jumps
}

pub fn build_davies(hp: &ParentHamiltonian, beta: f64) -> Result<DaviesGenerator> {
    build_davies_with_weight(hp, beta, &glauber_weight)
}

/// Same construction with a caller-supplied weight function; exists so the
/// detailed-balance checker can be pointed at a deliberately wrong sign.
pub fn build_davies_with_weight(
    hp: &ParentHamiltonian,
    beta: f64,
    weight: &dyn Fn(f64, f64) -> f64,
) -> Result<DaviesGenerator> {
    if hp.n() > MAX_DAVIES_QUBITS {
        return Err(Error::capacity("build_davies", hp.n(), MAX_DAVIES_QUBITS));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta must be finite and nonnegative"));
    }
    let jumps = lightcone_jumps(hp);
    let superop = assemble_generator(
        hp.unitary(),
        &hp.energies(),
        jumps.iter().map(Jump::dense),
        beta,
        weight,
    );
    let (rho_beta, partition) = hamiltonian::gibbs_state(hp, beta)?;
    Ok(DaviesGenerator {
        hp: hp.clone(),
        beta,
        jumps,
        superop,
        rho_beta,
        partition,
    })
}

// ---------------------------------------------------------------------------
// detailed balance and the discriminant
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DetailedBalanceReport {
    /// max over Hermitian basis pairs of |⟨A,ℒ†[B]⟩_s − ⟨ℒ†[A],B⟩_s|
    pub pair_residual: f64,
    /// Hermiticity residual of the discriminant at the same s
    pub discriminant_residual: f64,
}

pub fn detailed_balance_check(gen: &DaviesGenerator, s: f64) -> Result<DetailedBalanceReport> {
    let n = gen.n();
    let dim = 1usize << n;
    let l = gen.superop().matrix();
    // ⟨A, ℒ†[B]⟩_s = vec(A)† G_s L† vec(B) with G_s = (σ^s)^T ⊗ σ^{1−s};
    // s-DB ⇔ G_s L† = L G_s
    let gs = kron(&gen.sigma_power(s).transpose(), &gen.sigma_power(1.0 - s));
    let delta = &gs * l.adjoint() - l * &gs;
    // sandwich with the normalized Pauli basis to express it as pair products
    let basis = pauli_basis_matrix(n);
    let pair = basis.adjoint() * delta * &basis;
    let pair_residual = linalg::max_abs(&pair) / dim as f64;
    let disc = discriminant(gen, s)?;
    Ok(DetailedBalanceReport {
        pair_residual,
        discriminant_residual: disc.herm_residual,
    })
}

/// Columns are vec(P)/√2^n over all 4^n Pauli strings.
fn pauli_basis_matrix(n: usize) -> CMat {
    let dim = 1usize << n;
    let all: Vec<usize> = (0..n).collect();
    let paulis = pauli_set_on(n, &all);
    let mut b = CMat::zeros(dim * dim, dim * dim);
    for (j, p) in paulis.iter().enumerate() {
        let v = vec_op(&p.to_matrix());
        let scale = 1.0 / (dim as f64).sqrt();
        for i in 0..dim * dim {
            b[(i, j)] = v[i] * scale;
        }
    }
    b
}

#[derive(Debug, Clone)]
pub struct Discriminant {
    pub s: f64,
    /// 𝒦_s = σ^{−(1−s)/2} ℒ(σ^{(1−s)/2} · σ^{s/2}) σ^{−s/2}, Hermitized;
    /// eigenvalues match ℒ and are ≤ 0.
    pub matrix: CMat,
    pub herm_residual: f64,
    /// Second-smallest distinct eigenvalue magnitude of −𝒦.
    pub gap: f64,
    /// Eigenvector of the zero eigenvalue (the vectorized √ρ_β).
    pub kernel: CVec,
}

pub fn discriminant(gen: &DaviesGenerator, s: f64) -> Result<Discriminant> {
    let l = gen.superop().matrix();
    let outer = kron(
        &gen.sigma_power(-s / 2.0).transpose(),
        &gen.sigma_power(-(1.0 - s) / 2.0),
    );
    let inner = kron(
        &gen.sigma_power(s / 2.0).transpose(),
        &gen.sigma_power((1.0 - s) / 2.0),
    );
    let k = outer * l * inner;
    let herm_residual = linalg::max_abs(&(&k - k.adjoint()));
    let kh = (&k + k.adjoint()).scale(0.5);
    let (vals, vecs) = linalg::eigh(&kh.scale(-1.0))?;
    // eigenvalues of −𝒦 ascending; kernel first, gap = first value clear of 0
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let kernel = vecs.column(order[0]).into_owned();
    let gap = order
        .iter()
        .map(|&i| vals[i])
        .find(|&v| v > 1e-9)
        .unwrap_or(0.0);
    Ok(Discriminant {
        s,
        matrix: kh,
        herm_residual,
        gap,
        kernel,
    })
}

// ---------------------------------------------------------------------------
// evolution, mixing, entropy production
// ---------------------------------------------------------------------------

pub fn evolve(gen: &DaviesGenerator, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::invalid("evolution time must be nonnegative"));
    }
    let e = gen.superop().expm(t);
    DensityMatrix::with_tolerance(e.apply(rho.matrix()), 1e-8)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MixingReport {
    pub halving_time: Option<f64>,
    pub entropy_curve: Vec<(f64, f64)>,
    pub fitted_rate: f64,
}

/// Fixed probe set: regularized computational basis states, ρ_β, the
/// maximally mixed state, and 5 seeded Ginibre states.
pub fn probe_states(n: usize, rho_beta: &DensityMatrix) -> Vec<DensityMatrix> {
    let dim = 1usize << n;
    let mut probes: Vec<DensityMatrix> = (0..dim)
        .map(|i| DensityMatrix::basis_state(n, i).regularized(1e-9))
        .collect();
    probes.push(rho_beta.clone());
    probes.push(DensityMatrix::maximally_mixed(n));
    let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);
    for _ in 0..5 {
        let g = CMat::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(rand_distr_standard()), rng.sample(rand_distr_standard()))
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        probes.push(DensityMatrix::new(m.scale(1.0 / tr)).expect("Ginibre state"));
    }
    probes
}

// rand 0.8's StandardNormal without pulling in rand_distr: Box-Muller on demand
fn rand_distr_standard() -> impl rand::distributions::Distribution<f64> {
    struct BoxMuller;
    impl rand::distributions::Distribution<f64> for BoxMuller {
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }
    BoxMuller
}

pub fn mixing_diagnostics(gen: &DaviesGenerator, t_grid: &[f64]) -> Result<MixingReport> {
    if t_grid.is_empty() {
        return Err(Error::invalid("time grid must be nonempty"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid[0] < 0.0 {
        return Err(Error::invalid("time grid must be nonnegative and ascending"));
    }
    let n = gen.n();
    let probes = probe_states(n, gen.rho_beta());
    let diffs: Vec<CMat> = {
        let mut d = Vec::new();
        for i in 0..probes.len() {
            for j in (i + 1)..probes.len() {
                d.push(probes[i].matrix() - probes[j].matrix());
            }
        }
        d
    };
    let base_norms: Vec<f64> = diffs
        .iter()
        .map(|d| linalg::trace_norm_hermitian(d).unwrap())
        .collect();
    let entropy_probe = probes[0].clone();
    let log_sigma = linalg::logm_pd(gen.rho_beta().matrix())?;

    // uniform grids reuse one step exponential
    let uniform_step = if t_grid.len() >= 2 {
        let dt = t_grid[1] - t_grid[0];
        if t_grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() < 1e-12)
        {
            Some(dt)
        } else {
            None
        }
    } else {
        None
    };

    let mut halving_time = None;
    let mut entropy_curve = Vec::with_capacity(t_grid.len());
    let mut propagator = gen.superop().expm(t_grid[0]);
    let step = uniform_step.map(|dt| gen.superop().expm(dt));
    for (gi, &t) in t_grid.iter().enumerate() {
        if gi > 0 {
            propagator = match &step {
                Some(e) => Superoperator::new(n, e.matrix() * propagator.matrix()),
                None => gen.superop().expm(t),
            };
        }
        if halving_time.is_none() {
            let mut worst: f64 = 0.0;
            for (d, d0) in diffs.iter().zip(&base_norms) {
                let dt_norm = linalg::trace_norm_hermitian(&propagator.apply(d))?;
                worst = worst.max(dt_norm / d0);
            }
            if worst <= 0.5 {
                halving_time = Some(t);
            }
        }
        let evolved = propagator.apply(entropy_probe.matrix());
        let evolved = (&evolved + evolved.adjoint()).scale(0.5);
        let log_rho = linalg::logm_pd(&evolved)?;
        let d = (&evolved * (log_rho - &log_sigma)).trace().re.max(0.0);
        entropy_curve.push((t, d));
    }

    // log-linear fit over the decaying part of the curve
    let pts: Vec<(f64, f64)> = entropy_curve
        .iter()
        .filter(|(_, d)| *d > 1e-12)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    let fitted_rate = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = m * sxx - sx * sx;
        if denom.abs() > 1e-30 {
            -(m * sxy - sx * sy) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(MixingReport {
        halving_time,
        entropy_curve,
        fitted_rate,
    })
}

/// EP(ρ) = Tr ℒ[ρ](log ρ − log ρ_β) ≤ 0 for detailed-balanced generators.
/// The state is regularized to full rank before the logarithms.
pub fn entropy_production(gen: &DaviesGenerator, rho: &DensityMatrix) -> Result<f64> {
    let reg = rho.regularized(1e-9);
    let lrho = gen.superop().apply(reg.matrix());
    let log_rho = linalg::logm_pd(reg.matrix())?;
    let log_sigma = linalg::logm_pd(gen.rho_beta().matrix())?;
    Ok((lrho * (log_rho - log_sigma)).trace().re)
}

/// D(ρ_reg ‖ ρ_β) companion to `entropy_production` (same regularization).
pub fn relative_entropy_to_fixed_point(gen: &DaviesGenerator, rho: &DensityMatrix) -> Result<f64> {
    let reg = rho.regularized(1e-9);
    relative_entropy(reg.matrix(), gen.rho_beta().matrix())
}

// ---------------------------------------------------------------------------
// convex decomposition
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ConvexReport {
    /// 4^{1−ℓ} with ℓ the max lightcone size.
    pub q: f64,
    pub l_ni: Superoperator,
    pub l_rest: Superoperator,
    /// ‖ℒ̃ − qℒ_NI − (1−q)ℒ_rest‖_max
    pub identity_residual: f64,
    /// ‖ℒ_rest[σ_β]‖_max
    pub rest_fixed_point_residual: f64,
    /// CPTP report of e^{εℒ_rest} at ε = 1e-3
    pub rest_cptp: CptpReport,
}

/// Single-qubit-jump Davies generator of the non-interacting Hamiltonian.
pub fn build_noninteracting(n: usize, beta: f64) -> Result<DaviesGenerator> {
    let hp = hamiltonian::build_parent(&Circuit::new(n))?;
    build_davies(&hp, beta)
}

/// Rewrite C†ℒ[C·C†]C as qℒ_NI + (1−q)ℒ_rest per the lightcone cancellation:
/// jumps on lightcone L_i are conjugated by U_i (the gates inside L_i), which
/// turns the single-qubit-at-i Paulis into exactly the non-interacting jumps
/// and leaves the rest as an explicit Davies generator sharing σ_β.
pub fn convex_decomposition(gen: &DaviesGenerator) -> Result<ConvexReport> {
    let n = gen.n();
    if n > 4 {
        return Err(Error::capacity("convex_decomposition", n, 4));
    }
    let hp = gen.hp();
    let beta = gen.beta();
    let v = hp.unitary();
    let energies = hp.energies();
    let ell = hp.ell();
    let q = 4.0_f64.powi(1 - ell as i32);

    // rotated generator ℒ̃ = (V̄⊗V)† L (V̄⊗V)
    let w = kron(&v.conjugate(), v);
    let ltilde = Superoperator::new(n, w.adjoint() * gen.superop().matrix() * &w);

    let ni = build_noninteracting(n, beta)?;
    let id = linalg::identity(1 << n);

    // ℒ_rest jumps: C†U_i Q U_i†C for Q beyond the single-qubit-at-i set,
    // plus the excess single-qubit weight of sites with |L_i| < ℓ
    let mut rest_jumps: Vec<CMat> = Vec::new();
    for site in 0..n {
        let cone: Vec<usize> = hp.lightcones()[site].iter().cloned().collect();
        let cone_set = &hp.lightcones()[site];
        let u_i = lightcone_unitary(hp.circuit(), cone_set)?;
        let norm = 0.5_f64.powi(cone.len() as i32);
        for pauli in pauli_set_on(n, &cone) {
            let support = pauli.support();
            let single_at_site = support.is_empty() || support == vec![site];
            if single_at_site {
                continue;
            }
            rest_jumps.push(v.adjoint() * &u_i * pauli.to_matrix().scale(norm) * u_i.adjoint() * v);
        }
        let q_i = 4.0_f64.powi(1 - cone.len() as i32);
        if q_i - q > 1e-15 {
            let excess = (q_i - q).sqrt();
            for letter in 0..4u8 {
                rest_jumps.push(
                    PauliString::single(n, site, letter)
                        .to_matrix()
                        .scale(0.5 * excess),
                );
            }
        }
    }
    let l_rest = if (1.0 - q).abs() < 1e-15 {
        Superoperator::zero(n)
    } else {
        assemble_generator(&id, &energies, rest_jumps, beta, &glauber_weight)
            .scale(1.0 / (1.0 - q))
    };

    let combo = ni.superop().scale(q).add(&l_rest.scale(1.0 - q));
    let identity_residual = linalg::max_abs(&(ltilde.matrix() - combo.matrix()));

    let sigma_ni = ni.rho_beta().matrix().clone();
    let rest_fixed_point_residual =
        linalg::max_abs(&unvec_op(&(l_rest.matrix() * vec_op(&sigma_ni)), 1 << n));
    let rest_cptp = cptp_check(&l_rest.expm(1e-3), 1e-8)?;

    Ok(ConvexReport {
        q,
        l_ni: ni.superop().clone(),
        l_rest,
        identity_residual,
        rest_fixed_point_residual,
        rest_cptp,
    })
}

/// Dense unitary of the gates whose support lies inside `cone`, in time order.
pub fn lightcone_unitary(
    c: &Circuit,
    cone: &std::collections::BTreeSet<usize>,
) -> Result<CMat> {
    let mut sub = Circuit::new(c.n());
    for layer in c.layers() {
        let inside: Vec<_> = layer
            .iter()
            .filter(|g| g.qubits().iter().all(|q| cone.contains(q)))
            .cloned()
            .collect();
        if !inside.is_empty() {
            sub.push_layer(inside)?;
        }
    }
    crate::circuit::build_unitary(&sub)
}

// ---------------------------------------------------------------------------
// operator Fourier transform and the Boltzmann filter
// ---------------------------------------------------------------------------

/// Reconstruct every frequency component of jump `a` from the uniform-grid
/// time average (2n+1 points, spacing 2π/(2n+1), which exactly annihilates
/// all nonzero integer frequency differences) and return the max error.
pub fn oft_check(gen: &DaviesGenerator, a: usize) -> Result<f64> {
    let n = gen.n();
    let u = gen.hp().unitary();
    let energies = gen.hp().energies();
    let dense = gen.jumps()[a].dense();
    let comps = frequency_components(u, &energies, &dense);
    let dim = 1usize << n;
    let points = 2 * n + 1;
    // e^{iHt} columns: U diag(e^{iE_x t}) U†
    let exp_ih = |t: f64| -> CMat {
        let d = CVec::from_iterator(
            dim,
            (0..dim).map(|x| Complex64::from_polar(1.0, energies[x] as f64 * t)),
        );
        u * CMat::from_diagonal(&d) * u.adjoint()
    };
    let mut max_err = 0.0f64;
    for nu in -(n as i64)..=(n as i64) {
        let mut rec = CMat::zeros(dim, dim);
        for m in -(n as i64)..=(n as i64) {
            let t = 2.0 * std::f64::consts::PI * m as f64 / points as f64;
            let phase = Complex64::from_polar(1.0, -(nu as f64) * t);
            rec += (exp_ih(t) * &dense * exp_ih(-t)).scale_complex(phase);
        }
        let rec = rec.scale(1.0 / points as f64);
        let target = comps
            .get(&nu)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(dim, dim));
        max_err = max_err.max(linalg::max_abs(&(rec - target)));
    }
    Ok(max_err)
}

trait ScaleComplex {
    fn scale_complex(self, c: Complex64) -> Self;
}

impl ScaleComplex for CMat {
    fn scale_complex(mut self, c: Complex64) -> Self {
        for v in self.iter_mut() {
            *v *= c;
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct BoltzmannFilter {
    /// Block-diagonal rotation over ω ∈ [−n, n]; block at ω is
    /// [[√γ(ω), −√(1−γ(ω))], [√(1−γ(ω)), √γ(ω)]].
    pub w: CMat,
    pub w_trunc: CMat,
    pub actual_norm_err: f64,
    pub paper_bound: f64,
}

/// γ(ω) = (1+e^{−βω})^{−1} with the tail clamp γ̃ = 0/1 outside
/// [−n_δ, n_δ], n_δ = β^{−1} log(1/δ). Truncation obeys ‖W−W_δ‖ ≤ 8n√δ.
pub fn boltzmann_filter(n: usize, beta: f64, delta: f64) -> Result<BoltzmannFilter> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0,1)"));
    }
    if beta < 0.0 {
        return Err(Error::invalid("beta must be nonnegative"));
    }
    let gamma = |omega: f64| 1.0 / (1.0 + (-beta * omega).exp());
    let omegas: Vec<i64> = (-(n as i64)..=(n as i64)).collect();
    let dim = 2 * omegas.len();
    let block = |g: f64| -> [[f64; 2]; 2] {
        let c = g.max(0.0).sqrt();
        let s = (1.0 - g).max(0.0).sqrt();
        [[c, -s], [s, c]]
    };
    let mut w = CMat::zeros(dim, dim);
    let mut w_trunc = CMat::zeros(dim, dim);
    let n_delta = if beta > 0.0 {
        (1.0 / delta).ln() / beta
    } else {
        f64::INFINITY // beta = 0: n_δ undefined, no truncation
    };
    let mut actual_norm_err = 0.0f64;
    for (bi, &omega) in omegas.iter().enumerate() {
        let g = gamma(omega as f64);
        let gt = if (omega as f64) > n_delta {
            1.0
        } else if (omega as f64) < -n_delta {
            0.0
        } else {
            g
        };
        let b = block(g);
        let bt = block(gt);
        let mut diff_sq = [[0.0f64; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                w[(2 * bi + r, 2 * bi + c)] = cr(b[r][c]);
                w_trunc[(2 * bi + r, 2 * bi + c)] = cr(bt[r][c]);
            }
        }
        // spectral norm of the 2×2 difference via its Gram matrix
        let d = [
            [b[0][0] - bt[0][0], b[0][1] - bt[0][1]],
            [b[1][0] - bt[1][0], b[1][1] - bt[1][1]],
        ];
        for r in 0..2 {
            for c in 0..2 {
                diff_sq[r][c] = d[0][r] * d[0][c] + d[1][r] * d[1][c];
            }
        }
        let tr = diff_sq[0][0] + diff_sq[1][1];
        let det = diff_sq[0][0] * diff_sq[1][1] - diff_sq[0][1] * diff_sq[1][0];
        let lam = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
        actual_norm_err = actual_norm_err.max(lam.max(0.0).sqrt());
    }
    Ok(BoltzmannFilter {
        w,
        w_trunc,
        actual_norm_err,
        paper_bound: 8.0 * n as f64 * delta.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_circuit, Gate};
    use crate::linalg::max_abs;

    fn cnot_generator(beta: f64) -> DaviesGenerator {
        let mut c = Circuit::new(2);
        c.push_gate(Gate::Cnot(0, 1)).unwrap();
        let hp = hamiltonian::build_parent(&c).unwrap();
        build_davies(&hp, beta).unwrap()
    }

    #[test]
    fn weight_ratios() {
        assert!((glauber_weight(0.0, 1.7) - 0.5).abs() < 1e-15);
        assert!((glauber_weight(1.0, 0.0) - 0.5).abs() < 1e-15);
        for nu in [-3.0f64, -2.0, -1.0, 1.0, 2.0, 3.0] {
            for beta in [0.5, 1.0, 2.0] {
                let ratio = glauber_weight(nu, beta) / glauber_weight(-nu, beta);
                assert!((ratio - (-beta * nu).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_qubit_matches_direct_assembly() {
        // direct 4×4 assembly from the three explicit components
        let beta = 0.8;
        let hp = hamiltonian::build_parent(&Circuit::new(1)).unwrap();
        let gen = build_davies(&hp, beta).unwrap();
        let mut direct = CMat::zeros(4, 4);
        let lower = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]); // |0⟩⟨1|
        let raise = lower.transpose();
        let zmat = PauliString::single(1, 0, 3).to_matrix();
        let id2 = linalg::identity(2);
        // unit-amplitude components with the 2^{-1} jump normalization (and
        // the X/Y doubling for the ladder parts) folded into the weights:
        // Z at ν=0 once, |1⟩⟨0| and |0⟩⟨1| from (X ± iY)/2 twice each
        for (a, w) in [
            (zmat.clone(), glauber_weight(0.0, beta) * 0.25),
            (raise.clone(), glauber_weight(1.0, beta) * 2.0 * 0.25),
            (lower.clone(), glauber_weight(-1.0, beta) * 2.0 * 0.25),
        ] {
            let ada = a.adjoint() * &a;
            direct += kron(&a.conjugate(), &a).scale(w)
                - kron(&id2, &ada).scale(w / 2.0)
                - kron(&ada.transpose(), &id2).scale(w / 2.0);
        }
        assert!(max_abs(&(gen.superop().matrix() - direct)) < 1e-12);
    }

    #[test]
    fn jump_count_identity_n2() {
        let hp = hamiltonian::build_parent(&Circuit::new(2)).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        assert_eq!(gen.jumps().len(), 8); // n·4^ℓ at ℓ=1
    }

    #[test]
    fn frequency_components_sum_to_jump() {
        let gen = cnot_generator(1.0);
        for a in (0..gen.jumps().len()).step_by(5) {
            let comps = gen.jump_components(a).unwrap();
            let mut acc = CMat::zeros(4, 4);
            for m in comps.values() {
                acc += m;
            }
            assert!(max_abs(&(acc - gen.jumps()[a].dense())) < 1e-10);
        }
    }

    #[test]
    fn gibbs_state_is_fixed_point() {
        for seed in [2u64, 9] {
            let c = random_circuit(3, 3, seed);
            let hp = hamiltonian::build_parent(&c).unwrap();
            let gen = build_davies(&hp, 1.0).unwrap();
            let res = gen.superop().apply(gen.rho_beta().matrix());
            assert!(max_abs(&res) < 1e-9, "seed {seed}: {}", max_abs(&res));
        }
    }

    #[test]
    fn detailed_balance_holds_and_wrong_sign_fails() {
        let gen = cnot_generator(1.0);
        let rep = detailed_balance_check(&gen, 0.5).unwrap();
        assert!(rep.pair_residual < 1e-10, "{}", rep.pair_residual);
        assert!(rep.discriminant_residual < 1e-10);

        let hp = gen.hp().clone();
        let wrong = build_davies_with_weight(&hp, 1.0, &|nu, beta| {
            1.0 / (1.0 + (-beta * nu).exp())
        })
        .unwrap();
        let rep = detailed_balance_check(&wrong, 0.5).unwrap();
        assert!(rep.pair_residual > 1e-3, "{}", rep.pair_residual);
    }

    #[test]
    fn detailed_balance_single_qubit() {
        let hp = hamiltonian::build_parent(&Circuit::new(1)).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        let rep = detailed_balance_check(&gen, 0.5).unwrap();
        assert!(rep.pair_residual < 1e-10);
    }

    #[test]
    fn discriminant_independent_of_s() {
        let gen = cnot_generator(0.7);
        let k0 = discriminant(&gen, 0.0).unwrap();
        let kh = discriminant(&gen, 0.5).unwrap();
        let k1 = discriminant(&gen, 1.0).unwrap();
        assert!(max_abs(&(&k0.matrix - &kh.matrix)) < 1e-9);
        assert!(max_abs(&(&k1.matrix - &kh.matrix)) < 1e-9);
    }

    #[test]
    fn single_qubit_gap_and_kernel() {
        for beta in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let hp = hamiltonian::build_parent(&Circuit::new(1)).unwrap();
            let gen = build_davies(&hp, beta).unwrap();
            let disc = discriminant(&gen, 0.5).unwrap();
            assert!((disc.gap - 0.5).abs() < 1e-12, "beta={beta}: {}", disc.gap);
            assert!(disc.gap >= 0.25);
            // kernel ∝ |00⟩ + e^{−β/2}|11⟩
            let mut target = CVec::zeros(4);
            target[0] = cr(1.0);
            target[3] = cr((-beta / 2.0).exp());
            let target = target.scale(1.0 / target.norm());
            let overlap = (disc.kernel.adjoint() * &target)[(0, 0)].norm();
            assert!((overlap - 1.0).abs() < 1e-10, "beta={beta}");
        }
    }

    #[test]
    fn spectrum_of_l_is_real() {
        let gen = cnot_generator(1.3);
        let ev = linalg::eigenvalues(gen.superop().matrix()).unwrap();
        for lam in ev.iter() {
            assert!(lam.im.abs() < 1e-8);
            assert!(lam.re < 1e-9);
        }
    }

    #[test]
    fn evolve_preserves_state_and_converges() {
        let gen = cnot_generator(1.0);
        let rho0 = DensityMatrix::basis_state(2, 3);
        let same = evolve(&gen, &rho0, 0.0).unwrap();
        assert!(max_abs(&(same.matrix() - rho0.matrix())) < 1e-10);
        let rho_t = evolve(&gen, &rho0, 7.0).unwrap();
        assert!((rho_t.matrix().trace().re - 1.0).abs() < 1e-10);
        let disc = discriminant(&gen, 0.5).unwrap();
        let late = evolve(&gen, &rho0, 200.0 / disc.gap).unwrap();
        let td = crate::dense::divergences(&late, gen.rho_beta())
            .unwrap()
            .trace_distance;
        assert!(td < 1e-6, "{td}");
    }

    #[test]
    fn short_time_evolution_is_cptp() {
        let gen = cnot_generator(0.9);
        let rep = cptp_check(&gen.superop().expm(1e-3), 1e-8).unwrap();
        assert!(rep.is_cp && rep.is_tp, "min Choi eig {}", rep.min_choi_eig);
    }

    #[test]
    fn fitted_rate_beats_mlsi_constant() {
        // identity circuit (ell = 1): fitted decay ≥ α_single − 1e-6
        let hp = hamiltonian::build_parent(&Circuit::new(2)).unwrap();
        let beta = 1.0;
        let gen = build_davies(&hp, beta).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.4).collect();
        let rep = mixing_diagnostics(&gen, &grid).unwrap();
        let alpha = 1.0 / (16.0 * (1.0 + beta.exp()));
        assert!(
            rep.fitted_rate >= alpha - 1e-6,
            "fitted {} < alpha {alpha}",
            rep.fitted_rate
        );
    }

    #[test]
    fn mixing_halving_time_and_bound() {
        let hp = hamiltonian::build_parent(&Circuit::new(2)).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let rep = mixing_diagnostics(&gen, &grid).unwrap();
        let t_half = rep.halving_time.expect("must halve within grid");
        assert!(t_half <= 50.0);
        // spectral-gap mixing bound plus grid resolution
        let disc = discriminant(&gen, 0.5).unwrap();
        let min_eig = gen.rho_beta().eigenvalues().unwrap()[0];
        let bound = (2.0 / min_eig.sqrt()).ln() / disc.gap;
        assert!(t_half <= bound + 0.5, "{t_half} vs {bound}");
        // entropy curve non-increasing
        for pair in rep.entropy_curve.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-9);
        }
    }

    #[test]
    fn entropy_production_nonpositive_and_mlsi() {
        let gen = cnot_generator(1.0);
        let alpha = 0.25 / (16.0 * (1.0 + 1.0f64.exp()));
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..50 {
            let g = CMat::from_fn(4, 4, |_, _| {
                Complex64::new(
                    rng.sample(rand_distr_standard()),
                    rng.sample(rand_distr_standard()),
                )
            });
            let m = &g * g.adjoint();
            let tr = m.trace().re;
            let rho = DensityMatrix::new(m.scale(1.0 / tr)).unwrap();
            let ep = entropy_production(&gen, &rho).unwrap();
            let d = relative_entropy_to_fixed_point(&gen, &rho).unwrap();
            assert!(ep <= 1e-12, "{ep}");
            assert!(ep <= -alpha * d + 1e-9, "ep={ep} d={d}");
        }
        let ep_fixed = entropy_production(&gen, gen.rho_beta()).unwrap();
        assert!(ep_fixed.abs() < 1e-9);
    }

    #[test]
    fn convex_identity_cnot() {
        let gen = cnot_generator(1.0);
        let rep = convex_decomposition(&gen).unwrap();
        assert!((rep.q - 0.25).abs() < 1e-15);
        assert!(rep.identity_residual < 1e-8, "{}", rep.identity_residual);
        assert!(rep.rest_fixed_point_residual < 1e-9);
        assert!(rep.rest_cptp.is_cp && rep.rest_cptp.is_tp);
    }

    #[test]
    fn convex_identity_trivial_circuit() {
        let hp = hamiltonian::build_parent(&Circuit::new(2)).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        let rep = convex_decomposition(&gen).unwrap();
        assert!((rep.q - 1.0).abs() < 1e-15);
        assert!(max_abs(rep.l_rest.matrix()) < 1e-12);
        assert!(rep.identity_residual < 1e-12);
    }

    #[test]
    fn second_moment_depolarizes() {
        // Σ_{Q∈𝒫_ℓ} Q X Q / 4^ℓ = Tr_L[X] ⊗ I / 2^ℓ on a random X (ℓ = 2)
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let x = CMat::from_fn(4, 4, |_, _| {
            Complex64::new(
                rng.sample(rand_distr_standard()),
                rng.sample(rand_distr_standard()),
            )
        });
        let mut acc = CMat::zeros(4, 4);
        for p in pauli_set_on(2, &[0, 1]) {
            let m = p.to_matrix();
            acc += &m * &x * &m;
        }
        acc = acc.scale(1.0 / 16.0);
        let want = linalg::identity(4).scale(x.trace().re / 4.0)
            + linalg::identity(4).scale_complex(Complex64::new(0.0, x.trace().im / 4.0));
        assert!(max_abs(&(acc - want)) < 1e-12);
    }

    #[test]
    fn jump_rotation_invariance() {
        // replacing the Pauli set on L_i by U_i (Paulis) U_i† leaves ℒ unchanged
        let mut c = Circuit::new(2);
        c.push_gate(Gate::Cnot(0, 1)).unwrap();
        let hp = hamiltonian::build_parent(&c).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        let u_i = lightcone_unitary(hp.circuit(), &hp.lightcones()[0]).unwrap();
        let rotated: Vec<CMat> = gen
            .jumps()
            .iter()
            .map(|j| {
                if j.site == 0 {
                    &u_i * j.dense() * u_i.adjoint()
                } else {
                    j.dense()
                }
            })
            .collect();
        let l2 = assemble_generator(
            hp.unitary(),
            &hp.energies(),
            rotated,
            1.0,
            &glauber_weight,
        );
        assert!(max_abs(&(gen.superop().matrix() - l2.matrix())) < 1e-9);
    }

    #[test]
    fn oft_reconstructs_components() {
        // diagonal jump: only ν=0 survives; X on 1 qubit: ν=±1 ladder
        let hp = hamiltonian::build_parent(&Circuit::new(1)).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        for a in 0..gen.jumps().len() {
            assert!(oft_check(&gen, a).unwrap() < 1e-10);
        }
        let comps_z = gen.jump_components(3).unwrap(); // Z jump is diagonal
        assert!(comps_z.len() == 1 && comps_z.contains_key(&0));
        let comps_x = gen.jump_components(1).unwrap();
        let raise = comps_x.get(&1).unwrap();
        assert!((raise[(1, 0)].re - 0.5).abs() < 1e-12); // |1⟩⟨0|/2

        let c = random_circuit(3, 3, 4);
        let hp = hamiltonian::build_parent(&c).unwrap();
        let gen = build_davies(&hp, 1.0).unwrap();
        for a in (0..gen.jumps().len()).step_by(17) {
            assert!(oft_check(&gen, a).unwrap() < 1e-10);
        }
    }

    #[test]
    fn boltzmann_filter_bounds() {
        let f = boltzmann_filter(32, 1.0, 1e-6).unwrap();
        assert!(f.actual_norm_err <= f.paper_bound);
        assert!((f.paper_bound - 0.256).abs() < 1e-12);
        // W orthogonal
        let wtw = f.w.adjoint() * &f.w;
        assert!(max_abs(&(wtw - linalg::identity(f.w.nrows()))) < 1e-12);
        // n_δ ≥ n → no truncation
        let f2 = boltzmann_filter(4, 1.0, 1e-9).unwrap();
        assert!(max_abs(&(&f2.w - &f2.w_trunc)) < 1e-15);
        assert_eq!(f2.actual_norm_err, 0.0);
        // beta = 0: truncation disabled
        let f3 = boltzmann_filter(8, 0.0, 1e-3).unwrap();
        assert!(max_abs(&(&f3.w - &f3.w_trunc)) < 1e-15);
    }
}
