//! Gate-level circuit model: layers, dense unitaries, exact output
//! distributions, lightcone / Z-support analysis, and the cluster-state IQP
//! family builder.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bits::BitMask;
use crate::error::{Error, Result};
use crate::linalg::{cr, CMat, CVec};
use crate::pauli::PauliString;

/// Dense state-level work is capped here; superoperator modules impose
/// their own tighter limits.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    /// (control, target)
    Cnot(usize, usize),
    Cz(usize, usize),
    /// T^k = diag(1, e^{ikπ/4})
    TPow(usize, u8),
    /// exp(iθZ)
    ZRot(usize, f64),
    /// exp(iθ Z⊗...⊗Z) on the listed qubits
    MZRot(f64, Vec<usize>),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::TPow(q, _) | Gate::ZRot(q, _) => vec![*q],
            Gate::Cnot(c, t) => vec![*c, *t],
            Gate::Cz(a, b) => vec![*a, *b],
            Gate::MZRot(_, qs) => qs.clone(),
        }
    }

    /// Diagonal in the computational basis (commutes with every Z).
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            Gate::Cz(..) | Gate::TPow(..) | Gate::ZRot(..) | Gate::MZRot(..)
        )
    }

    /// Depth contribution in layers of ≤2-qubit gates: an MZRot of arity k
    /// costs its decomposed depth 2⌈log₂k⌉+1.
    pub fn depth_cost(&self) -> usize {
        match self {
            Gate::MZRot(_, qs) if qs.len() > 2 => {
                2 * (qs.len() as f64).log2().ceil() as usize + 1
            }
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, layers: Vec::new() }
    }

    pub fn from_layers(n: usize, layers: Vec<Vec<Gate>>) -> Result<Self> {
        let mut c = Circuit::new(n);
        for layer in layers {
            c.push_layer(layer)?;
        }
        Ok(c)
    }

    pub fn push_layer(&mut self, layer: Vec<Gate>) -> Result<()> {
        let mut used = vec![false; self.n];
        for g in &layer {
            let qs = g.qubits();
            if qs.is_empty() {
                return Err(Error::structure("gate with no qubits"));
            }
            let mut distinct = BTreeSet::new();
            for &q in &qs {
                if q >= self.n {
                    return Err(Error::structure(format!(
                        "qubit {q} out of range (n={})",
                        self.n
                    )));
                }
                if !distinct.insert(q) {
                    return Err(Error::structure(format!("repeated qubit {q} in gate")));
                }
                if used[q] {
                    return Err(Error::structure(format!(
                        "qubit {q} used twice within a layer"
                    )));
                }
                used[q] = true;
            }
        }
        self.layers.push(layer);
        Ok(())
    }

    /// Append a single gate as its own layer.
    pub fn push_gate(&mut self, gate: Gate) -> Result<()> {
        self.push_layer(vec![gate])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Depth in layers of ≤2-qubit gates (MZRot counts its decomposition).
    pub fn depth(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.iter().map(Gate::depth_cost).max().unwrap_or(0))
            .sum()
    }

    /// The adjoint circuit: layers reversed, each gate inverted.
    pub fn adjoint(&self) -> Circuit {
        let layers = self
            .layers
            .iter()
            .rev()
            .map(|l| l.iter().map(invert_gate).collect())
            .collect();
        Circuit { n: self.n, layers }
    }

    /// IQP shape: a leading layer of H on every qubit, a trailing layer of H
    /// on every qubit, and only diagonal gates in between.
    pub fn is_iqp_shaped(&self) -> bool {
        if self.layers.len() < 2 {
            return false;
        }
        let all_h = |layer: &Vec<Gate>| {
            layer.len() == self.n
                && layer.iter().all(|g| matches!(g, Gate::H(_)))
                && (0..self.n).all(|q| layer.iter().any(|g| g.qubits() == vec![q]))
        };
        if !all_h(&self.layers[0]) || !all_h(self.layers.last().unwrap()) {
            return false;
        }
        self.layers[1..self.layers.len() - 1]
            .iter()
            .flatten()
            .all(Gate::is_diagonal)
    }
}

fn invert_gate(g: &Gate) -> Gate {
    match g {
        Gate::H(q) => Gate::H(*q),
        Gate::Cnot(c, t) => Gate::Cnot(*c, *t),
        Gate::Cz(a, b) => Gate::Cz(*a, *b),
        Gate::TPow(q, k) => Gate::TPow(*q, (8 - k % 8) % 8),
        Gate::ZRot(q, th) => Gate::ZRot(*q, -th),
        Gate::MZRot(th, qs) => Gate::MZRot(-th, qs.clone()),
    }
}

// ---------------------------------------------------------------------------
// statevector kernels
// ---------------------------------------------------------------------------

/// In-place gate application; qubit 0 is the most significant index bit.
pub fn apply_gate(gate: &Gate, psi: &mut [Complex64], n: usize) {
    let bit = |q: usize| 1usize << (n - 1 - q);
    match gate {
        Gate::H(q) => {
            let b = bit(*q);
            let s = 1.0 / 2.0_f64.sqrt();
            for i in 0..psi.len() {
                if i & b == 0 {
                    let (a0, a1) = (psi[i], psi[i | b]);
                    psi[i] = (a0 + a1).scale(s);
                    psi[i | b] = (a0 - a1).scale(s);
                }
            }
        }
        Gate::Cnot(c, t) => {
            let (bc, bt) = (bit(*c), bit(*t));
            for i in 0..psi.len() {
                if i & bc != 0 && i & bt == 0 {
                    psi.swap(i, i | bt);
                }
            }
        }
        Gate::Cz(a, b) => {
            let (ba, bb) = (bit(*a), bit(*b));
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & ba != 0 && i & bb != 0 {
                    *amp = -*amp;
                }
            }
        }
        Gate::TPow(q, k) => {
            let b = bit(*q);
            let ph = Complex64::from_polar(1.0, *k as f64 * std::f64::consts::FRAC_PI_4);
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & b != 0 {
                    *amp *= ph;
                }
            }
        }
        Gate::ZRot(q, th) => {
            let b = bit(*q);
            let plus = Complex64::from_polar(1.0, *th);
            let minus = Complex64::from_polar(1.0, -th);
            for (i, amp) in psi.iter_mut().enumerate() {
                *amp *= if i & b == 0 { plus } else { minus };
            }
        }
        Gate::MZRot(th, qs) => {
            let mask: usize = qs.iter().map(|&q| bit(q)).fold(0, |a, b| a | b);
            let plus = Complex64::from_polar(1.0, *th);
            let minus = Complex64::from_polar(1.0, -th);
            for (i, amp) in psi.iter_mut().enumerate() {
                *amp *= if (i & mask).count_ones() % 2 == 0 {
                    plus
                } else {
                    minus
                };
            }
        }
    }
}

/// C|0…0⟩ as a state vector.
pub fn simulate(c: &Circuit) -> Result<CVec> {
    if c.n() > MAX_DENSE_QUBITS {
        return Err(Error::capacity("statevector", c.n(), MAX_DENSE_QUBITS));
    }
    let dim = 1usize << c.n();
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = cr(1.0);
    for g in c.gates() {
        apply_gate(g, &mut psi, c.n());
    }
    Ok(DVector::from_vec(psi))
}

/// Dense unitary of the whole circuit (product of layer unitaries in time
/// order), built column by column through the statevector kernels.
pub fn build_unitary(c: &Circuit) -> Result<CMat> {
    if c.n() > MAX_DENSE_QUBITS {
        return Err(Error::capacity("build_unitary", c.n(), MAX_DENSE_QUBITS));
    }
    let dim = 1usize << c.n();
    let mut u = CMat::identity(dim, dim);
    let n = c.n();
    for g in c.gates() {
        // column-major storage: each contiguous chunk is one column
        for col in u.as_mut_slice().chunks_exact_mut(dim) {
            apply_gate(g, col, n);
        }
    }
    Ok(u)
}

/// Exact output probabilities |⟨x|C|0⟩|² over {0,1}^n.
pub fn output_distribution(c: &Circuit) -> Result<Vec<f64>> {
    let psi = simulate(c)?;
    Ok(psi.iter().map(|a| a.norm_sqr()).collect())
}

/// Inverse-CDF sampling from the exact table; deterministic given the seed.
pub fn sample(c: &Circuit, seed: u64, count: usize) -> Result<Vec<u64>> {
    let table = output_distribution(c)?;
    Ok(sample_from_table(&table, seed, count))
}

pub fn sample_from_table(table: &[f64], seed: u64, count: usize) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(table.len());
    let mut acc = 0.0f64;
    for &p in table {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * total;
            match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
                Ok(i) | Err(i) => (i.min(table.len() - 1)) as u64,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// lightcones and Z-supports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Supports {
    pub lightcone: Vec<BTreeSet<usize>>,
    pub reverse_lightcone: Vec<BTreeSet<usize>>,
    pub z_support: Vec<BTreeSet<usize>>,
    /// max lightcone size
    pub ell: usize,
    /// max reverse lightcone size
    pub ell_r: usize,
    /// max Z-support size (Hamiltonian locality)
    pub r: usize,
}

/// The conjugated operator C Z_i C†, either still a Pauli string (symbolic
/// propagation succeeded all the way) or a dense operator on a small qubit
/// subset where non-Clifford gates forced a dense fallback.
#[derive(Debug, Clone)]
pub enum ZImage {
    Pauli(PauliString),
    Dense { qubits: Vec<usize>, op: CMat },
}

impl ZImage {
    pub fn support(&self) -> Vec<usize> {
        match self {
            ZImage::Pauli(p) => p.support(),
            ZImage::Dense { qubits, op } => {
                let k = qubits.len();
                let mut out = Vec::new();
                for (j, &q) in qubits.iter().enumerate() {
                    if dense_acts_on(op, k, j) {
                        out.push(q);
                    }
                }
                out
            }
        }
    }
}

/// Does `op` (on k qubits, qubit `j` = bit k−1−j) act nontrivially on `j`?
/// Checked against commutation with X_j and Z_j by index arithmetic.
fn dense_acts_on(op: &CMat, k: usize, j: usize) -> bool {
    let b = 1usize << (k - 1 - j);
    let dim = 1usize << k;
    let tol = 1e-10;
    for r in 0..dim {
        for c in 0..dim {
            // [op, Z_j] ≠ 0 ⇔ some entry with differing j-bits
            if (r & b) != (c & b) && op[(r, c)].norm() > tol {
                return true;
            }
            // [op, X_j] ≠ 0 ⇔ op[r, c^b] ≠ op[r^b, c]
            if (op[(r, c ^ b)] - op[(r ^ b, c)]).norm() > tol {
                return true;
            }
        }
    }
    false
}

/// Propagate Z_i forward through the circuit. Clifford gates and diagonal
/// gates acting on Z-only wires update the masks; anything else falls back
/// to a dense conjugation on the causal closure of the current support.
pub fn propagate_z(c: &Circuit, i: usize) -> Result<ZImage> {
    let n = c.n();
    let mut p = PauliString::single(n, i, 3);
    let gates: Vec<&Gate> = c.gates().collect();
    for (gi, g) in gates.iter().enumerate() {
        match propagate_step(&mut p, g) {
            StepResult::Ok => {}
            StepResult::NeedDense => {
                return dense_fallback(n, &p, &gates[gi..]);
            }
        }
    }
    Ok(ZImage::Pauli(p))
}

enum StepResult {
    Ok,
    NeedDense,
}

fn propagate_step(p: &mut PauliString, g: &Gate) -> StepResult {
    // Clifford conjugation in the i^t X^x Z^z representation. The only phase
    // corrections come from reordering X and Z on a shared qubit:
    //   H:  X↔Z swap, (−1) when both present (HYH = −Y)
    //   CZ: X_a picks up Z_b and vice versa, (−1) when x_a∧x_b
    //   CNOT: X spreads control→target, Z target→control, no sign
    let mut x = p.x_mask().clone();
    let mut z = p.z_mask().clone();
    let mut phase = p.phase_exp();
    match g {
        Gate::H(q) => {
            let (xq, zq) = (x.get(*q), z.get(*q));
            if xq && zq {
                phase = (phase + 2) % 4;
            }
            x.set(*q, zq);
            z.set(*q, xq);
        }
        Gate::Cnot(c, t) => {
            if x.get(*c) {
                x.toggle(*t);
            }
            if z.get(*t) {
                z.toggle(*c);
            }
        }
        Gate::Cz(a, b) => {
            if x.get(*a) && x.get(*b) {
                phase = (phase + 2) % 4;
            }
            if x.get(*a) {
                z.toggle(*b);
            }
            if x.get(*b) {
                z.toggle(*a);
            }
        }
        Gate::TPow(q, _) | Gate::ZRot(q, _) => {
            if x.get(*q) {
                return StepResult::NeedDense;
            }
        }
        Gate::MZRot(_, qs) => {
            if qs.iter().any(|&q| x.get(q)) {
                return StepResult::NeedDense;
            }
        }
    }
    *p = PauliString::from_masks(p.n(), x, z, phase);
    StepResult::Ok
}

fn dense_fallback(n: usize, p: &PauliString, remaining: &[&Gate]) -> Result<ZImage> {
    // causal closure of the current support over the remaining gates
    let mut q_set = BitMask::from_indices(n, &p.support());
    for g in remaining {
        let qs = g.qubits();
        if qs.iter().any(|&q| q_set.get(q)) {
            for q in qs {
                q_set.set(q, true);
            }
        }
    }
    let qubits: Vec<usize> = q_set.ones().collect();
    if qubits.len() > MAX_DENSE_QUBITS {
        return Err(Error::capacity(
            "z-support dense fallback",
            qubits.len(),
            MAX_DENSE_QUBITS,
        ));
    }
    let local_index: std::collections::BTreeMap<usize, usize> =
        qubits.iter().enumerate().map(|(j, &q)| (q, j)).collect();
    let k = qubits.len();
    let mut op = p.restrict(&qubits).to_matrix();
    for g in remaining {
        let qs = g.qubits();
        if !qs.iter().any(|&q| local_index.contains_key(&q)) {
            continue; // acts outside the closure: conjugates trivially
        }
        let local_gate = remap_gate(g, &local_index);
        // G op G† = (G (G op)†)†
        apply_gate_to_columns(&local_gate, &mut op, k);
        let mut opd = op.adjoint();
        apply_gate_to_columns(&local_gate, &mut opd, k);
        op = opd.adjoint();
    }
    Ok(ZImage::Dense { qubits, op })
}

fn remap_gate(g: &Gate, map: &std::collections::BTreeMap<usize, usize>) -> Gate {
    let m = |q: &usize| map[q];
    match g {
        Gate::H(q) => Gate::H(m(q)),
        Gate::Cnot(c, t) => Gate::Cnot(m(c), m(t)),
        Gate::Cz(a, b) => Gate::Cz(m(a), m(b)),
        Gate::TPow(q, k) => Gate::TPow(m(q), *k),
        Gate::ZRot(q, th) => Gate::ZRot(m(q), *th),
        Gate::MZRot(th, qs) => Gate::MZRot(*th, qs.iter().map(|q| map[q]).collect()),
    }
}

fn apply_gate_to_columns(g: &Gate, m: &mut CMat, n: usize) {
    let dim = 1usize << n;
    for col in m.as_mut_slice().chunks_exact_mut(dim) {
        apply_gate(g, col, n);
    }
}

/// Lightcones via forward causal reachability, Z-supports via `propagate_z`.
pub fn supports(c: &Circuit) -> Result<Supports> {
    let n = c.n();
    let mut lightcone = Vec::with_capacity(n);
    for i in 0..n {
        let mut reach = BitMask::zeros(n);
        reach.set(i, true);
        for g in c.gates() {
            let qs = g.qubits();
            if qs.iter().any(|&q| reach.get(q)) {
                for q in qs {
                    reach.set(q, true);
                }
            }
        }
        lightcone.push(reach.ones().collect::<BTreeSet<usize>>());
    }
    let mut reverse_lightcone = vec![BTreeSet::new(); n];
    for (i, cone) in lightcone.iter().enumerate() {
        for &q in cone {
            reverse_lightcone[q].insert(i);
        }
    }
    let mut z_support = Vec::with_capacity(n);
    for i in 0..n {
        let img = propagate_z(c, i)?;
        z_support.push(img.support().into_iter().collect::<BTreeSet<usize>>());
    }
    let ell = lightcone.iter().map(BTreeSet::len).max().unwrap_or(0);
    let ell_r = reverse_lightcone.iter().map(BTreeSet::len).max().unwrap_or(0);
    let r = z_support.iter().map(BTreeSet::len).max().unwrap_or(0);
    // S_i ⊆ L_i always; cheap to keep as a hard invariant
    for i in 0..n {
        debug_assert!(z_support[i].is_subset(&lightcone[i]));
    }
    Ok(Supports {
        lightcone,
        reverse_lightcone,
        z_support,
        ell,
        ell_r,
        r,
    })
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

/// Fig-2-style family: cluster state on a width×height grid, T^{b_i} phases,
/// X-basis measurement realized as the trailing H layer.
pub fn build_iqp_cluster(width: usize, height: usize, b: &[u8]) -> Result<Circuit> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    let n = width * height;
    if b.len() != n {
        return Err(Error::invalid(format!(
            "need {n} T-power exponents, got {}",
            b.len()
        )));
    }
    let q = |row: usize, col: usize| row * width + col;
    let mut c = Circuit::new(n);
    c.push_layer((0..n).map(Gate::H).collect())?;
    // 4 CZ layers from the edge coloring of the grid: horizontal edges by
    // column parity, vertical edges by row parity; empty classes are skipped
    for parity in 0..2 {
        let layer: Vec<Gate> = (0..height)
            .flat_map(|rw| {
                (0..width.saturating_sub(1))
                    .filter(move |cl| cl % 2 == parity)
                    .map(move |cl| Gate::Cz(q(rw, cl), q(rw, cl + 1)))
            })
            .collect();
        if !layer.is_empty() {
            c.push_layer(layer)?;
        }
    }
    for parity in 0..2 {
        let layer: Vec<Gate> = (0..height.saturating_sub(1))
            .filter(|rw| rw % 2 == parity)
            .flat_map(|rw| (0..width).map(move |cl| Gate::Cz(q(rw, cl), q(rw + 1, cl))))
            .collect();
        if !layer.is_empty() {
            c.push_layer(layer)?;
        }
    }
    let t_layer: Vec<Gate> = (0..n)
        .filter(|&i| b[i] % 8 != 0)
        .map(|i| Gate::TPow(i, b[i] % 8))
        .collect();
    if !t_layer.is_empty() {
        c.push_layer(t_layer)?;
    }
    c.push_layer((0..n).map(Gate::H).collect())?;
    Ok(c)
}

/// Seeded uniform draw of T-gate exponents in {0..7}.
pub fn random_exponents(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..8u8)).collect()
}

/// Random shallow test circuit: `depth` layers, each either a layer of
/// single-qubit gates (H / T-powers) or of disjoint 2-qubit gates (CNOT/CZ).
pub fn random_circuit(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        let mut layer = Vec::new();
        if n >= 2 && rng.gen_bool(0.6) {
            let mut qubits: Vec<usize> = (0..n).collect();
            for i in (1..qubits.len()).rev() {
                qubits.swap(i, rng.gen_range(0..=i));
            }
            for pair in qubits.chunks(2) {
                if pair.len() == 2 && rng.gen_bool(0.8) {
                    layer.push(if rng.gen_bool(0.5) {
                        Gate::Cnot(pair[0], pair[1])
                    } else {
                        Gate::Cz(pair[0], pair[1])
                    });
                }
            }
        } else {
            for q in 0..n {
                match rng.gen_range(0..3) {
                    0 => layer.push(Gate::H(q)),
                    1 => layer.push(Gate::TPow(q, rng.gen_range(1..8))),
                    _ => {}
                }
            }
        }
        if !layer.is_empty() {
            c.push_layer(layer).expect("disjoint by construction");
        }
    }
    c
}

/// 1D brickwork of nearest-neighbor 2-qubit gates (alternating even/odd
/// bonds), used by the lattice-geometry experiments.
pub fn random_brickwork_1d(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for layer_idx in 0..depth {
        let start = layer_idx % 2;
        let mut layer = Vec::new();
        let mut q = start;
        while q + 1 < n {
            layer.push(match rng.gen_range(0..3) {
                0 => Gate::Cnot(q, q + 1),
                1 => Gate::Cnot(q + 1, q),
                _ => Gate::Cz(q, q + 1),
            });
            q += 2;
        }
        if !layer.is_empty() {
            c.push_layer(layer).expect("disjoint by construction");
        }
    }
    c
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

/// One gate per line, `#` comments, layers separated by `---`, leading
/// `qubits n` header.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n: Option<usize> = None;
    let mut circuit: Option<Circuit> = None;
    let mut layer: Vec<Gate> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let mut tok = line.split_whitespace();
        let head = tok.next().unwrap();
        if n.is_none() {
            if head != "qubits" {
                return Err(err("expected `qubits n` header".into()));
            }
            let count: usize = tok
                .next()
                .ok_or_else(|| err("missing qubit count".into()))?
                .parse()
                .map_err(|e| err(format!("bad qubit count: {e}")))?;
            n = Some(count);
            circuit = Some(Circuit::new(count));
            continue;
        }
        let c = circuit.as_mut().unwrap();
        if head == "---" {
            if !layer.is_empty() {
                c.push_layer(std::mem::take(&mut layer))
                    .map_err(|e| err(e.to_string()))?;
            }
            continue;
        }
        let parse_q = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| err("missing qubit index".into()))?
                .parse()
                .map_err(|e| err(format!("bad qubit index: {e}")))
        };
        let gate = match head {
            "H" => Gate::H(parse_q(tok.next())?),
            "CNOT" => Gate::Cnot(parse_q(tok.next())?, parse_q(tok.next())?),
            "CZ" => Gate::Cz(parse_q(tok.next())?, parse_q(tok.next())?),
            "TPOW" => {
                let q = parse_q(tok.next())?;
                let k: u8 = tok
                    .next()
                    .ok_or_else(|| err("missing T power".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad T power: {e}")))?;
                Gate::TPow(q, k % 8)
            }
            "ZROT" => {
                let q = parse_q(tok.next())?;
                let th: f64 = tok
                    .next()
                    .ok_or_else(|| err("missing angle".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad angle: {e}")))?;
                Gate::ZRot(q, th)
            }
            "MZROT" => {
                let th: f64 = tok
                    .next()
                    .ok_or_else(|| err("missing angle".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad angle: {e}")))?;
                let mut qs = Vec::new();
                for t in tok.by_ref() {
                    qs.push(
                        t.parse()
                            .map_err(|e| err(format!("bad qubit index: {e}")))?,
                    );
                }
                if qs.is_empty() {
                    return Err(err("MZROT needs at least one qubit".into()));
                }
                Gate::MZRot(th, qs)
            }
            other => return Err(err(format!("unknown gate `{other}`"))),
        };
        if tok.next().is_some() {
            return Err(err("trailing tokens".into()));
        }
        layer.push(gate);
    }
    let mut c = circuit.ok_or(Error::Parse {
        line: 0,
        message: "empty circuit file".into(),
    })?;
    if !layer.is_empty() {
        c.push_layer(layer).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
    }
    Ok(c)
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "qubits {}", c.n());
    for (i, layer) in c.layers().iter().enumerate() {
        if i > 0 {
            let _ = writeln!(out, "---");
        }
        for g in layer {
            match g {
                Gate::H(q) => {
                    let _ = writeln!(out, "H {q}");
                }
                Gate::Cnot(c_, t) => {
                    let _ = writeln!(out, "CNOT {c_} {t}");
                }
                Gate::Cz(a, b) => {
                    let _ = writeln!(out, "CZ {a} {b}");
                }
                Gate::TPow(q, k) => {
                    let _ = writeln!(out, "TPOW {q} {k}");
                }
                Gate::ZRot(q, th) => {
                    let _ = writeln!(out, "ZROT {q} {th:.17}");
                }
                Gate::MZRot(th, qs) => {
                    let qs_str: Vec<String> = qs.iter().map(ToString::to_string).collect();
                    let _ = writeln!(out, "MZROT {th:.17} {}", qs_str.join(" "));
                }
            }
        }
    }
    out
}
