//! Markov structure of Gibbs states: conditional mutual information,
//! shielding tripartitions, Petz recovery, and exact local
//! indistinguishability for lattice circuits.

use std::collections::{BTreeSet, VecDeque};

use crate::circuit::Circuit;
use crate::dense::{partial_trace_ordered, DensityMatrix};
use crate::error::{Error, Result};
use crate::hamiltonian::{self, ParentHamiltonian};
use crate::linalg::{self, cr, kron, CMat};

/// Nearest-neighbor lattice geometry (1D chains and 2D grids).
#[derive(Debug, Clone)]
pub struct Lattice {
    n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl Lattice {
    pub fn chain(n: usize) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n.saturating_sub(1) {
            adjacency[i].push(i + 1);
            adjacency[i + 1].push(i);
        }
        Lattice { n, adjacency }
    }

    pub fn grid(width: usize, height: usize) -> Self {
        let n = width * height;
        let mut adjacency = vec![Vec::new(); n];
        let q = |r: usize, c: usize| r * width + c;
        for r in 0..height {
            for c in 0..width {
                if c + 1 < width {
                    adjacency[q(r, c)].push(q(r, c + 1));
                    adjacency[q(r, c + 1)].push(q(r, c));
                }
                if r + 1 < height {
                    adjacency[q(r, c)].push(q(r + 1, c));
                    adjacency[q(r + 1, c)].push(q(r, c));
                }
            }
        }
        Lattice { n, adjacency }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// BFS distances from a set of sources.
    fn distances_from(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = Some(0);
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// min over a∈A, c∈C of the path length over lattice edges.
    pub fn set_distance(&self, a: &[usize], c: &[usize]) -> Option<usize> {
        let dist = self.distances_from(a);
        c.iter().filter_map(|&v| dist[v]).min()
    }
}

#[derive(Debug, Clone)]
pub struct Tripartition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl Tripartition {
    pub fn new(a: Vec<usize>, b: Vec<usize>, c: Vec<usize>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for q in a.iter().chain(&b).chain(&c) {
            if !seen.insert(*q) {
                return Err(Error::invalid(format!("qubit {q} appears twice")));
            }
        }
        Ok(Tripartition { a, b, c })
    }

    pub fn union(&self) -> Vec<usize> {
        let mut u: Vec<usize> = self
            .a
            .iter()
            .chain(&self.b)
            .chain(&self.c)
            .cloned()
            .collect();
        u.sort_unstable();
        u
    }

    pub fn distance_ac(&self, lattice: &Lattice) -> Option<usize> {
        lattice.set_distance(&self.a, &self.c)
    }
}

/// I(A:C|B) = S(AB) + S(BC) − S(ABC) − S(B), in nats.
pub fn cmi(rho: &DensityMatrix, t: &Tripartition) -> Result<f64> {
    let n = rho.n();
    for &q in t.a.iter().chain(&t.b).chain(&t.c) {
        if q >= n {
            return Err(Error::invalid(format!("qubit {q} out of range")));
        }
    }
    let entropy_of = |keep: Vec<usize>| -> Result<f64> {
        let mut keep = keep;
        keep.sort_unstable();
        let m = partial_trace_ordered(rho.matrix(), n, &keep)?;
        let (vals, _) = linalg::eigh(&m)?;
        Ok(vals
            .iter()
            .filter(|&&x| x > 1e-14)
            .map(|&x| -x * x.ln())
            .sum())
    };
    let sab = entropy_of([t.a.clone(), t.b.clone()].concat())?;
    let sbc = entropy_of([t.b.clone(), t.c.clone()].concat())?;
    let sabc = entropy_of(t.union())?;
    let sb = entropy_of(t.b.clone())?;
    Ok(sab + sbc - sabc - sb)
}

/// Does B shield A from C in the interaction hypergraph? Separation is in the
/// vertex sense: two qubits outside B are adjacent iff some term support
/// contains both; shielding means no A→C path avoids B's vertices.
pub fn is_shielding(hp: &ParentHamiltonian, t: &Tripartition) -> bool {
    let n = hp.n();
    let in_b = |q: usize| t.b.contains(&q);
    let mut adj = vec![BTreeSet::new(); n];
    for term in hp.terms() {
        for &u in &term.support {
            for &v in &term.support {
                if u != v && !in_b(u) && !in_b(v) {
                    adj[u].insert(v);
                }
            }
        }
    }
    let mut visited = vec![false; n];
    let mut queue: VecDeque<usize> = t.a.iter().filter(|q| !in_b(**q)).cloned().collect();
    for &q in &queue {
        visited[q] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !visited[v] {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    !t.c.iter().any(|&q| visited[q])
}

/// Restriction of a full-space density matrix to the tripartition's union
/// (other qubits traced out), with the local qubit positions of A, B, C.
struct LocalizedState {
    mat: CMat,
    nq: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<usize>,
}

fn localize(rho: &DensityMatrix, t: &Tripartition) -> Result<LocalizedState> {
    let union = t.union();
    let mat = partial_trace_ordered(rho.matrix(), rho.n(), &union)?;
    let pos = |qs: &[usize]| -> Vec<usize> {
        qs.iter()
            .map(|q| union.iter().position(|u| u == q).unwrap())
            .collect()
    };
    Ok(LocalizedState {
        mat,
        nq: union.len(),
        a: pos(&t.a),
        b: pos(&t.b),
        c: pos(&t.c),
    })
}

/// Petz transpose map: (I_A ⊗ ℛ_{B→BC})(ρ_AB) with
/// ℛ_{B→BC}[X] = ρ_BC^{1/2}(ρ_B^{−1/2} X ρ_B^{−1/2} ⊗ I_C)ρ_BC^{1/2}.
/// Rank-deficient ρ_B is handled by the spectral pseudo-inverse.
pub fn petz_recover(rho: &DensityMatrix, t: &Tripartition) -> Result<DensityMatrix> {
    let loc = localize(rho, t)?;
    let nq = loc.nq;
    let rho_b = partial_trace_ordered(&loc.mat, nq, &loc.b)?;
    let bc: Vec<usize> = [loc.b.clone(), loc.c.clone()].concat();
    let rho_bc = partial_trace_ordered(&loc.mat, nq, &bc)?;
    let ab: Vec<usize> = [loc.a.clone(), loc.b.clone()].concat();
    let rho_ab = partial_trace_ordered(&loc.mat, nq, &ab)?;

    let b_pinv_sqrt = linalg::pinv_sqrt(&rho_b, 1e-12)?;
    let bc_sqrt = linalg::sqrtm_psd(&rho_bc)?;

    let emb_b = linalg::embed(&b_pinv_sqrt, &loc.b, nq);
    let emb_bc = linalg::embed(&bc_sqrt, &bc, nq);
    let emb_ab = linalg::embed(&rho_ab, &ab, nq);

    let recovered = &emb_bc * &emb_b * emb_ab * &emb_b * &emb_bc;
    let tr = recovered.trace().re;
    if tr <= 1e-12 {
        return Err(Error::Numerical("recovered state has vanishing trace".into()));
    }
    DensityMatrix::with_tolerance(recovered.scale(1.0 / tr), 1e-8)
}

/// Choi test of the B→BC Petz channel built from `rho` (CP and TP on the
/// support of ρ_B).
pub fn petz_channel_choi_check(rho: &DensityMatrix, t: &Tripartition) -> Result<(f64, f64)> {
    let loc = localize(rho, t)?;
    let nq = loc.nq;
    let rho_b = partial_trace_ordered(&loc.mat, nq, &loc.b)?;
    let bc: Vec<usize> = [loc.b.clone(), loc.c.clone()].concat();
    let rho_bc = partial_trace_ordered(&loc.mat, nq, &bc)?;
    let b_pinv_sqrt = linalg::pinv_sqrt(&rho_b, 1e-12)?;
    let bc_sqrt = linalg::sqrtm_psd(&rho_bc)?;
    let db = 1usize << loc.b.len();
    let dbc = 1usize << bc.len();
    let dc = dbc / db;
    // ℛ(E_ij) over the matrix units of B
    let mut choi = CMat::zeros(db * dbc, db * dbc);
    let mut tp_residual = 0.0f64;
    for i in 0..db {
        for j in 0..db {
            let mut e = CMat::zeros(db, db);
            e[(i, j)] = cr(1.0);
            let inner = kron(&(&b_pinv_sqrt * e * &b_pinv_sqrt), &linalg::identity(dc));
            let img = &bc_sqrt * inner * &bc_sqrt;
            for r in 0..dbc {
                for c in 0..dbc {
                    choi[(i * dbc + r, j * dbc + c)] = img[(r, c)];
                }
            }
            // TP on the support: Tr ℛ(E_ij) = ⟨j| Π_supp |i⟩
            let supp_proj = {
                let (vals, vecs) = linalg::eigh(&rho_b)?;
                let mut p = CMat::zeros(db, db);
                for k in 0..db {
                    if vals[k] > 1e-12 {
                        let col = vecs.column(k);
                        p += col * col.adjoint();
                    }
                }
                p
            };
            tp_residual = tp_residual.max((img.trace() - supp_proj[(j, i)]).norm());
        }
    }
    let (vals, _) = linalg::eigh(&(&choi + choi.adjoint()).scale(0.5))?;
    let min_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min_eig, tp_residual))
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LiReport {
    /// ‖Tr_{BC} ρ^X − Tr_B ρ^{AB}‖_tr / 2
    pub residual: f64,
    /// Product-split residual of the reverse-lightcone-rotated Gibbs state.
    pub decoupling_residual: f64,
    pub distance_ac: usize,
    /// 4d+1 for the circuit's depth d: exactness threshold.
    pub threshold: usize,
}

/// Exact local indistinguishability on a lattice: compare the reduced Gibbs
/// state of H_X on A against that of H_{AB}, and run the decoupling witness
/// (conjugating by the gates inside B's fully-contained lightcones splits
/// ρ^X into a product across the A∪B_A | rest cut).
pub fn local_indistinguishability_check(
    c: &Circuit,
    lattice: &Lattice,
    t: &Tripartition,
    beta: f64,
) -> Result<LiReport> {
    if lattice.n() != c.n() {
        return Err(Error::Geometry(format!(
            "lattice has {} sites, circuit {}",
            lattice.n(),
            c.n()
        )));
    }
    let hp = hamiltonian::build_parent(c)?;
    let x_region = t.union();
    let ab_region = {
        let mut r: Vec<usize> = t.a.iter().chain(&t.b).cloned().collect();
        r.sort_unstable();
        r
    };
    let gibbs_on = |region: &[usize]| -> Result<CMat> {
        let h = hp.subsystem_hamiltonian(region);
        let g = linalg::funm_hermitian(&h, |e| (-beta * e).exp())?;
        let z = g.trace().re;
        Ok(g.scale(1.0 / z))
    };
    let rho_x = gibbs_on(&x_region)?;
    let rho_ab = gibbs_on(&ab_region)?;
    let pos = |region: &[usize], qs: &[usize]| -> Vec<usize> {
        qs.iter()
            .map(|q| region.iter().position(|u| u == q).unwrap())
            .collect()
    };
    let a_in_x = pos(&x_region, &t.a);
    let a_in_ab = pos(&ab_region, &t.a);
    let red_x = partial_trace_ordered(&rho_x, x_region.len(), &a_in_x)?;
    let red_ab = partial_trace_ordered(&rho_ab, ab_region.len(), &a_in_ab)?;
    let residual = linalg::trace_distance_raw(&red_x, &red_ab)?;

    let distance_ac = t
        .distance_ac(lattice)
        .ok_or_else(|| Error::Geometry("A and C are disconnected on the lattice".into()))?;
    let depth = c.depth();

    // decoupling witness: U = gates in lightcones entirely contained in B
    let b_set: BTreeSet<usize> = t.b.iter().cloned().collect();
    let mut u_sub = Circuit::new(c.n());
    for layer in c.layers() {
        let inside: Vec<_> = layer
            .iter()
            .filter(|g| {
                (0..c.n()).any(|i| {
                    hp.lightcones()[i].is_subset(&b_set)
                        && g.qubits().iter().all(|q| hp.lightcones()[i].contains(q))
                })
            })
            .cloned()
            .collect();
        if !inside.is_empty() {
            u_sub.push_layer(inside)?;
        }
    }
    // restrict the witness unitary to X (its support is inside B ⊆ X)
    let mut u_local = Circuit::new(x_region.len());
    for layer in u_sub.layers() {
        let remapped: Vec<_> = layer
            .iter()
            .map(|g| remap(g, &x_region))
            .collect::<Result<_>>()?;
        u_local.push_layer(remapped)?;
    }
    let u_mat = crate::circuit::build_unitary(&u_local)?;
    let rotated = u_mat.adjoint() * &rho_x * &u_mat;
    // cut: A ∪ {b ∈ B : d(b, A) ≤ depth} versus the rest of X
    let dist_from_a = lattice.distances_from(&t.a);
    let mut part1: Vec<usize> = a_in_x.clone();
    for (&q, &pos_x) in t.b.iter().zip(pos(&x_region, &t.b).iter()) {
        if dist_from_a[q].is_some_and(|d| d <= depth) {
            part1.push(pos_x);
        }
    }
    part1.sort_unstable();
    let decoupling_residual = product_split_residual(&rotated, x_region.len(), &part1)?;

    Ok(LiReport {
        residual,
        decoupling_residual,
        distance_ac,
        threshold: 4 * depth + 1,
    })
}

fn remap(g: &crate::circuit::Gate, region: &[usize]) -> Result<crate::circuit::Gate> {
    use crate::circuit::Gate;
    let m = |q: usize| -> Result<usize> {
        region
            .iter()
            .position(|u| *u == q)
            .ok_or_else(|| Error::Geometry(format!("gate qubit {q} outside region")))
    };
    Ok(match g {
        Gate::H(q) => Gate::H(m(*q)?),
        Gate::Cnot(c, t) => Gate::Cnot(m(*c)?, m(*t)?),
        Gate::Cz(a, b) => Gate::Cz(m(*a)?, m(*b)?),
        Gate::TPow(q, k) => Gate::TPow(m(*q)?, *k),
        Gate::ZRot(q, th) => Gate::ZRot(m(*q)?, *th),
        Gate::MZRot(th, qs) => Gate::MZRot(
            *th,
            qs.iter().map(|&q| m(q)).collect::<Result<Vec<_>>>()?,
        ),
    })
}

/// ‖W − W_1 ⊗ W_2‖_tr across the (part1 | rest) qubit cut, with the tensor
/// factors permuted back into natural qubit order.
pub fn product_split_residual(w: &CMat, nq: usize, part1: &[usize]) -> Result<f64> {
    let part2: Vec<usize> = (0..nq).filter(|q| !part1.contains(q)).collect();
    let w1 = partial_trace_ordered(w, nq, part1)?;
    let w2 = partial_trace_ordered(w, nq, &part2)?;
    let product = kron(&w1, &w2);
    let order: Vec<usize> = part1.iter().chain(&part2).cloned().collect();
    let perm = qubit_permutation(nq, &order);
    let candidate = &perm * product * perm.adjoint();
    linalg::trace_norm_hermitian(&(w - candidate))
}

/// Permutation matrix sending the basis ordered by `order` (qubit order[j] is
/// factor j) back to the natural qubit order.
fn qubit_permutation(nq: usize, order: &[usize]) -> CMat {
    let dim = 1usize << nq;
    let mut p = CMat::zeros(dim, dim);
    for idx in 0..dim {
        // idx is a basis state in the permuted factor order
        let mut natural = 0usize;
        for (j, &q) in order.iter().enumerate() {
            if (idx >> (nq - 1 - j)) & 1 == 1 {
                natural |= 1 << (nq - 1 - q);
            }
        }
        p[(natural, idx)] = cr(1.0);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_brickwork_1d, Gate};
    use crate::dense::divergences;
    use crate::linalg::CVec;
    use num_complex::Complex64;
    use rand::Rng;

    fn ghz_pure() -> DensityMatrix {
        let mut v = CVec::zeros(8);
        v[0] = cr(1.0 / 2.0f64.sqrt());
        v[7] = cr(1.0 / 2.0f64.sqrt());
        DensityMatrix::from_pure(&v).unwrap()
    }

    fn ghz_mixture() -> DensityMatrix {
        let mut m = CMat::zeros(8, 8);
        m[(0, 0)] = cr(0.5);
        m[(7, 7)] = cr(0.5);
        DensityMatrix::new(m).unwrap()
    }

    fn random_mixed(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = crate::noise::stream_rng(seed, 0);
        let dim = 1 << n;
        let g = CMat::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(m.scale(1.0 / tr)).unwrap()
    }

    fn abc111() -> Tripartition {
        Tripartition::new(vec![0], vec![1], vec![2]).unwrap()
    }

    #[test]
    fn cmi_product_state_zero() {
        let rho = DensityMatrix::new(kron(
            &kron(
                random_mixed(1, 1).matrix(),
                random_mixed(1, 2).matrix(),
            ),
            random_mixed(1, 3).matrix(),
        ))
        .unwrap();
        assert!(cmi(&rho, &abc111()).unwrap().abs() < 1e-10);
    }

    #[test]
    fn cmi_ghz_variants() {
        // classical correlations through B: the dephased GHZ is a Markov
        // chain; the pure GHZ is not (I = ln 2)
        assert!(cmi(&ghz_mixture(), &abc111()).unwrap().abs() < 1e-10);
        let pure = cmi(&ghz_pure(), &abc111()).unwrap();
        assert!((pure - std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn cmi_nonnegative_random_pure() {
        for seed in 0..20 {
            let mut rng = crate::noise::stream_rng(seed, 7);
            let mut v = CVec::from_fn(8, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            v /= cr(v.norm());
            let rho = DensityMatrix::from_pure(&v).unwrap();
            assert!(cmi(&rho, &abc111()).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn cmi_rejects_overlap() {
        assert!(Tripartition::new(vec![0], vec![0], vec![1]).is_err());
    }

    #[test]
    fn shielding_identity_and_counterexample() {
        let hp = hamiltonian::build_parent(&Circuit::new(4)).unwrap();
        let t = Tripartition::new(vec![0], vec![1, 2], vec![3]).unwrap();
        assert!(is_shielding(&hp, &t));

        // depth-1 brickwork: terms {0,1},{2,3} say; B={1,2} shields
        let mut c = Circuit::new(4);
        c.push_layer(vec![Gate::Cnot(0, 1), Gate::Cnot(2, 3)]).unwrap();
        let hp = hamiltonian::build_parent(&c).unwrap();
        assert!(is_shielding(&hp, &t));
        // bridging term {0,2,3} unshields A={0} from C={3} across B={1}
        let mut c2 = Circuit::new(4);
        c2.push_layer(vec![Gate::Cnot(0, 2)]).unwrap();
        c2.push_layer(vec![Gate::Cnot(2, 3)]).unwrap();
        let hp2 = hamiltonian::build_parent(&c2).unwrap();
        let t2 = Tripartition::new(vec![0], vec![1], vec![3]).unwrap();
        assert!(!is_shielding(&hp2, &t2));
    }

    #[test]
    fn petz_recovers_product_state() {
        let rho = DensityMatrix::new(kron(
            &kron(
                random_mixed(1, 4).matrix(),
                random_mixed(1, 5).matrix(),
            ),
            random_mixed(1, 6).matrix(),
        ))
        .unwrap();
        let rec = petz_recover(&rho, &abc111()).unwrap();
        let d = divergences(&rho, &rec).unwrap();
        assert!(d.trace_distance < 1e-10, "{}", d.trace_distance);
    }

    #[test]
    fn petz_recovers_markov_gibbs() {
        // Gibbs state of a 1D parent Hamiltonian at a shielding tripartition
        let c = random_brickwork_1d(4, 1, 3);
        let hp = hamiltonian::build_parent(&c).unwrap();
        let (rho, _) = hamiltonian::gibbs_state(&hp, 1.0).unwrap();
        let t = Tripartition::new(vec![0], vec![1, 2], vec![3]).unwrap();
        if is_shielding(&hp, &t) {
            assert!(cmi(&rho, &t).unwrap() < 1e-8);
            let rec = petz_recover(&rho, &t).unwrap();
            let d = divergences(&rho, &rec).unwrap();
            assert!(d.trace_distance < 1e-7, "{}", d.trace_distance);
        }
    }

    #[test]
    fn fawzi_renner_on_random_states() {
        let t = abc111();
        for seed in 0..100 {
            let rho = if seed % 2 == 0 {
                random_mixed(3, 100 + seed)
            } else {
                let mut rng = crate::noise::stream_rng(seed, 3);
                let mut v = CVec::from_fn(8, |_, _| {
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                v /= cr(v.norm());
                DensityMatrix::from_pure(&v).unwrap()
            };
            let i = cmi(&rho, &t).unwrap();
            let rec = petz_recover(&rho, &t).unwrap();
            let err = divergences(&rho, &rec).unwrap().trace_distance * 2.0; // ‖·‖₁
            let rhs = err * err / (4.0 * std::f64::consts::LN_2);
            assert!(i >= rhs - 1e-9, "seed {seed}: I={i} rhs={rhs}");
        }
    }

    #[test]
    fn petz_channel_is_cptp_for_full_rank() {
        let rho = random_mixed(3, 77);
        let (min_eig, tp_res) = petz_channel_choi_check(&rho, &abc111()).unwrap();
        assert!(min_eig > -1e-10, "{min_eig}");
        assert!(tp_res < 1e-10, "{tp_res}");
    }

    #[test]
    fn li_identity_circuit() {
        let c = Circuit::new(4);
        let lat = Lattice::chain(4);
        let t = Tripartition::new(vec![0], vec![1, 2], vec![3]).unwrap();
        let rep = local_indistinguishability_check(&c, &lat, &t, 1.0).unwrap();
        assert!(rep.residual < 1e-12);
        assert!(rep.decoupling_residual < 1e-12);
        assert_eq!(rep.threshold, 1);
    }

    #[test]
    fn li_depth1_brickwork() {
        // 6 qubits, gates on (0,1),(2,3),(4,5); A={0}, B={1..4}, C={5}
        let mut c = Circuit::new(6);
        c.push_layer(vec![Gate::Cnot(0, 1), Gate::Cnot(2, 3), Gate::Cnot(4, 5)])
            .unwrap();
        let lat = Lattice::chain(6);
        let t = Tripartition::new(vec![0], vec![1, 2, 3, 4], vec![5]).unwrap();
        let rep = local_indistinguishability_check(&c, &lat, &t, 1.0).unwrap();
        assert_eq!(rep.distance_ac, 5);
        assert_eq!(rep.threshold, 5);
        assert!(rep.residual < 1e-10, "{}", rep.residual);
        assert!(rep.decoupling_residual < 1e-10, "{}", rep.decoupling_residual);
    }

    #[test]
    fn qubit_permutation_roundtrip() {
        let w1 = random_mixed(1, 8);
        let w2 = random_mixed(2, 9);
        // product in order [2 | 0,1]: factor layout (q2)(q0 q1)
        let prod = kron(w1.matrix(), w2.matrix());
        let perm = qubit_permutation(3, &[2, 0, 1]);
        let natural = &perm * prod * perm.adjoint();
        // tracing out {0,1} must recover w1 on qubit 2
        let red = partial_trace_ordered(&natural, 3, &[2]).unwrap();
        assert!(linalg::max_abs(&(red - w1.matrix())) < 1e-12);
    }
}
