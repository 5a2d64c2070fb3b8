//! B-tree distillation gadgets: CNOT trees whose leaf/ancilla measurements
//! let a classical decoder infer the root's input noise bit by iterated
//! majority, plus the assembled fault-tolerant IQP pipeline.

use rand::Rng;

use crate::circuit::{self, Circuit, Gate};
use crate::error::{Error, Result};
use crate::noise;

pub const MAX_GADGET_NODES: usize = 1_000_000;

/// A complete B-ary tree with D node levels, k = (B^D − 1)/(B − 1) nodes.
/// Node 0 is the root (the designated circuit-input bit); children of node v
/// are Bv+1 ..= Bv+B in level order.
#[derive(Debug, Clone)]
pub struct BTreeGadget {
    arity: usize,
    levels: usize,
    k: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// (parent, child) pairs, grouped leaf-adjacent level first, sequential
    /// over children of a common parent in increasing child order.
    cnot_schedule: Vec<(usize, usize)>,
}

impl BTreeGadget {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of node levels D (so there are D−1 majority stages).
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self) -> &[Vec<usize>] {
        &self.children
    }

    pub fn cnot_schedule(&self) -> &[(usize, usize)] {
        &self.cnot_schedule
    }

    /// Depth (distance from root) of node v.
    fn level_of(&self, v: usize) -> usize {
        let mut lvl = 0;
        let mut u = v;
        while let Some(p) = self.parent[u] {
            u = p;
            lvl += 1;
        }
        lvl
    }

    /// Nodes at a given distance from the root.
    pub fn nodes_at_level(&self, lvl: usize) -> Vec<usize> {
        (0..self.k).filter(|&v| self.level_of(v) == lvl).collect()
    }

    /// Render the gadget as a circuit of CNOT layers: per level (leaf-adjacent
    /// parents first), B sublayers by child rank, so gates sharing a parent
    /// stay sequential while disjoint subtrees run in parallel.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.k);
        for lvl in (0..self.levels - 1).rev() {
            let parents = self.nodes_at_level(lvl);
            for rank in 0..self.arity {
                let layer: Vec<Gate> = parents
                    .iter()
                    .filter(|&&p| !self.children[p].is_empty())
                    .map(|&p| Gate::Cnot(p, self.children[p][rank]))
                    .collect();
                if !layer.is_empty() {
                    c.push_layer(layer)?;
                }
            }
        }
        Ok(c)
    }

    /// Classical action of the gadget unitary on |s⟩: since CNOTs fire from
    /// leaves-adjacent level upward, every child is XORed with its parent's
    /// original bit.
    pub fn encode_bits(&self, s: &[u8]) -> Result<Vec<u8>> {
        if s.len() != self.k {
            return Err(Error::invalid(format!(
                "expected {} bits, got {}",
                self.k,
                s.len()
            )));
        }
        let mut out = s.to_vec();
        for v in 1..self.k {
            out[v] = s[v] ^ s[self.parent[v].unwrap()];
        }
        Ok(out)
    }

    /// Algorithm-2 decoding: majority from leaves upward; `measured[v-1]` is
    /// the measured bit of node v (the root bit is withheld).
    pub fn decode(&self, measured: &[u8]) -> Result<u8> {
        if self.arity % 2 == 0 {
            return Err(Error::invalid(
                "majority decoding needs odd arity (no tie rule)",
            ));
        }
        if measured.len() != self.k - 1 {
            return Err(Error::invalid(format!(
                "expected {} measured bits, got {}",
                self.k - 1,
                measured.len()
            )));
        }
        let b = |v: usize| measured[v - 1];
        // btilde[v]: running guess for s_v ⊕ s_parent(v), leaves up
        let mut btilde = vec![0u8; self.k];
        for v in 1..self.k {
            if self.children[v].is_empty() {
                btilde[v] = b(v);
            }
        }
        for lvl in (0..self.levels - 1).rev() {
            for p in self.nodes_at_level(lvl) {
                if self.children[p].is_empty() {
                    continue;
                }
                let ones: usize = self.children[p].iter().map(|&c| btilde[c] as usize).sum();
                let s_guess = u8::from(2 * ones > self.arity);
                if p == self.root() {
                    return Ok(s_guess);
                }
                btilde[p] = s_guess ^ b(p);
            }
        }
        unreachable!("root is always reached");
    }
}

pub fn build_gadget(arity: usize, levels: usize) -> Result<BTreeGadget> {
    if arity < 2 {
        return Err(Error::invalid("arity must be at least 2"));
    }
    if levels < 2 {
        return Err(Error::invalid("need at least 2 node levels"));
    }
    let mut k = 1usize;
    let mut pow = 1usize;
    for _ in 1..levels {
        pow = pow
            .checked_mul(arity)
            .ok_or_else(|| Error::capacity("build_gadget", usize::MAX, MAX_GADGET_NODES))?;
        k += pow;
    }
    if k > MAX_GADGET_NODES {
        return Err(Error::capacity("build_gadget", k, MAX_GADGET_NODES));
    }
    let mut parent = vec![None; k];
    let mut children = vec![Vec::new(); k];
    for v in 0..k {
        for j in 0..arity {
            let c = arity * v + 1 + j;
            if c < k {
                parent[c] = Some(v);
                children[v].push(c);
            }
        }
    }
    let gadget = BTreeGadget {
        arity,
        levels,
        k,
        parent,
        children,
        cnot_schedule: Vec::new(),
    };
    let mut schedule = Vec::with_capacity(k - 1);
    for lvl in (0..levels - 1).rev() {
        for p in gadget.nodes_at_level(lvl) {
            for &c in &gadget.children[p] {
                schedule.push((p, c));
            }
        }
    }
    Ok(BTreeGadget {
        cnot_schedule: schedule,
        ..gadget
    })
}

/// P[Binom(B, x) > B/2] — one majority stage. Stable incremental pmf.
pub fn majority_failure(arity: usize, x: f64) -> f64 {
    let b = arity;
    let mut pmf = (1.0 - x).powi(b as i32); // P[j = 0]
    let mut acc = 0.0;
    for j in 0..=b {
        if 2 * j > b {
            acc += pmf;
        }
        if j < b {
            // pmf(j+1) = pmf(j) · (B−j)/(j+1) · x/(1−x); guard x = 1
            pmf = if x >= 1.0 {
                if j + 1 == b {
                    1.0
                } else {
                    0.0
                }
            } else {
                pmf * (b - j) as f64 / (j + 1) as f64 * x / (1.0 - x)
            };
        }
    }
    acc.min(1.0)
}

/// Exact root-error probability of decode∘encode under i.i.d. Bern(p) input
/// noise: the iterated per-stage majority failure f_B^{(D−1)}(p). Stage
/// errors are independent across disjoint subtrees and internal-node noise
/// cancels in the decoder's update rule, so the recursion is exact.
pub fn exact_failure_rate(arity: usize, levels: usize, p: f64) -> Result<f64> {
    if arity % 2 == 0 {
        return Err(Error::invalid("odd arity required for majority"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p must be a probability"));
    }
    let mut rate = p;
    for _ in 0..levels - 1 {
        rate = majority_failure(arity, rate);
    }
    Ok(rate)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct McEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Monte Carlo counterpart of `exact_failure_rate`; per-trial derived seeds
/// keep the estimate independent of execution order.
pub fn mc_failure_rate(
    arity: usize,
    levels: usize,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 1_000 {
        return Err(Error::invalid("need at least 1000 trials"));
    }
    let gadget = build_gadget(arity, levels)?;
    if arity % 2 == 0 {
        return Err(Error::invalid("odd arity required for majority"));
    }
    let mut failures = 0usize;
    let mut s = vec![0u8; gadget.k()];
    for trial in 0..trials {
        let mut rng = noise::stream_rng(seed, trial as u64);
        for bit in s.iter_mut() {
            *bit = u8::from(rng.gen_bool(p));
        }
        let encoded = gadget.encode_bits(&s)?;
        let guess = gadget.decode(&encoded[1..])?;
        if guess != s[0] {
            failures += 1;
        }
    }
    let rate = failures as f64 / trials as f64;
    Ok(McEstimate {
        rate,
        stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        trials,
    })
}

// ---------------------------------------------------------------------------
// fault-tolerant circuit assembly
// ---------------------------------------------------------------------------

/// An IQP base circuit with one distillation gadget per input wire. Gadget i
/// occupies bits [i·k, (i+1)·k); its root (node 0) is wired into base
/// qubit i.
#[derive(Debug, Clone)]
pub struct FTCircuit {
    base: Circuit,
    gadget: BTreeGadget,
}

impl FTCircuit {
    pub fn base(&self) -> &Circuit {
        &self.base
    }

    pub fn gadget(&self) -> &BTreeGadget {
        &self.gadget
    }

    pub fn n_base(&self) -> usize {
        self.base.n()
    }

    pub fn total_bits(&self) -> usize {
        self.base.n() * self.gadget.k()
    }

    /// Global wire of base qubit i (its gadget's root).
    pub fn root_wire(&self, i: usize) -> usize {
        i * self.gadget.k()
    }

    /// The full circuit: all gadget CNOT trees in parallel, then the base
    /// circuit acting on the root wires.
    pub fn combined_circuit(&self) -> Result<Circuit> {
        let n = self.base.n();
        let k = self.gadget.k();
        let mut c = Circuit::new(n * k);
        let gadget_circuit = self.gadget.to_circuit()?;
        for layer in gadget_circuit.layers() {
            let mut combined = Vec::with_capacity(layer.len() * n);
            for i in 0..n {
                for g in layer {
                    combined.push(offset_gate(g, i * k));
                }
            }
            c.push_layer(combined)?;
        }
        for layer in self.base.layers() {
            let remapped: Vec<Gate> = layer
                .iter()
                .map(|g| map_gate(g, &|q| self.root_wire(q)))
                .collect();
            c.push_layer(remapped)?;
        }
        Ok(c)
    }
}

fn offset_gate(g: &Gate, offset: usize) -> Gate {
    map_gate(g, &|q| q + offset)
}

fn map_gate(g: &Gate, f: &dyn Fn(usize) -> usize) -> Gate {
    match g {
        Gate::H(q) => Gate::H(f(*q)),
        Gate::Cnot(c, t) => Gate::Cnot(f(*c), f(*t)),
        Gate::Cz(a, b) => Gate::Cz(f(*a), f(*b)),
        Gate::TPow(q, k) => Gate::TPow(f(*q), *k),
        Gate::ZRot(q, th) => Gate::ZRot(f(*q), *th),
        Gate::MZRot(th, qs) => Gate::MZRot(*th, qs.iter().map(|&q| f(q)).collect()),
    }
}

pub fn assemble_ft_circuit(base: &Circuit, arity: usize, levels: usize) -> Result<FTCircuit> {
    if !base.is_iqp_shaped() {
        return Err(Error::structure(
            "fault-tolerant assembly requires an IQP-shaped base circuit",
        ));
    }
    let gadget = build_gadget(arity, levels)?;
    Ok(FTCircuit {
        base: base.clone(),
        gadget,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FtReport {
    /// Decoded and corrected base samples, as basis indices.
    pub corrected_samples: Vec<u64>,
    /// Empirical TVD of the corrected samples against the exact ideal table.
    pub tvd: f64,
    /// Union bound n · f_B^{(D−1)}(p) on the decode failure probability.
    pub failure_bound: f64,
    /// Bounded-difference scale 1/(2√N) for the empirical TVD statistic.
    pub sampling_stderr: f64,
    pub samples: usize,
    pub noise_rate: f64,
}

/// Sample the fault-tolerant circuit under input noise at the temperature's
/// equivalent rate, decode every gadget, and compare the corrected samples
/// with the ideal base distribution.
pub fn ft_pipeline(ft: &FTCircuit, beta: f64, seed: u64, count: usize) -> Result<FtReport> {
    let n = ft.n_base();
    if n > 6 {
        return Err(Error::capacity("ft_pipeline", n, 6));
    }
    let p = noise::beta_to_p(beta)?;
    let samples = noise::sample_noisy_iqp(ft, p, seed, count)?;
    let table = circuit::output_distribution(ft.base())?;
    let k = ft.gadget().k();
    let mut counts = vec![0usize; 1 << n];
    let mut corrected_samples = Vec::with_capacity(count);
    for bits in &samples {
        let mut corrected_index = 0u64;
        for i in 0..n {
            let block = &bits[i * k..(i + 1) * k];
            let guess = ft.gadget().decode(&block[1..])?;
            let bit = block[0] ^ guess;
            corrected_index = corrected_index << 1 | bit as u64;
        }
        counts[corrected_index as usize] += 1;
        corrected_samples.push(corrected_index);
    }
    let tvd = 0.5
        * table
            .iter()
            .enumerate()
            .map(|(x, &px)| (counts[x] as f64 / count as f64 - px).abs())
            .sum::<f64>();
    let failure_bound = n as f64 * exact_failure_rate(ft.gadget().arity(), ft.gadget().levels(), p)?;
    Ok(FtReport {
        corrected_samples,
        tvd,
        failure_bound,
        sampling_stderr: 0.5 / (count as f64).sqrt(),
        samples: count,
        noise_rate: p,
    })
}
