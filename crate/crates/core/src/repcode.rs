//! Input+output-noise fault tolerance for IQP circuits via the repetition
//! code: diagonal parts as (M, θ) programs, the M → M·Gᵀ encoding, log-depth
//! multi-Z rotations, and block-majority decoding.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{self, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::noise::{self, NoiseSpec};

/// A diagonal IQP core D = e^{iφ} exp[i Σ_j θ_j ⊗_{q∈row_j} Z_q].
/// CZ and T-power re-expressions track their scalar in `global_phase` so the
/// program reproduces the circuit's diagonal exactly, not just up to phase.
#[derive(Debug, Clone)]
pub struct IQPProgram {
    n: usize,
    rows: Vec<ProgramRow>,
    global_phase: f64,
}

#[derive(Debug, Clone)]
pub struct ProgramRow {
    /// Monomial support, sorted ascending; never empty.
    pub qubits: Vec<usize>,
    pub theta: f64,
}

impl IQPProgram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[ProgramRow] {
        &self.rows
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    /// Dense diagonal of D over {0,1}^n.
    pub fn diagonal(&self) -> Result<CVec> {
        if self.n > 20 {
            return Err(Error::capacity("program diagonal", self.n, 20));
        }
        let dim = 1usize << self.n;
        let mut phases = vec![self.global_phase; dim];
        for row in &self.rows {
            let mask: usize = row
                .qubits
                .iter()
                .map(|&q| 1usize << (self.n - 1 - q))
                .fold(0, |a, b| a | b);
            for (idx, ph) in phases.iter_mut().enumerate() {
                let sign = if (idx & mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                *ph += sign * row.theta;
            }
        }
        Ok(CVec::from_iterator(
            dim,
            phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
        ))
    }
}

/// Extract the (M, θ) data of an IQP circuit's diagonal part. Each diagonal
/// gate contributes rows: ZROT and MZROT directly; T^k = e^{ikπ/8}e^{−ikπ/8·Z};
/// CZ = e^{−iπ/4} e^{i(π/4)(Z_a + Z_b − Z_a Z_b)}.
pub fn iqp_to_program(c: &Circuit) -> Result<IQPProgram> {
    if !c.is_iqp_shaped() {
        return Err(Error::structure("circuit is not IQP-shaped"));
    }
    let n = c.n();
    let mut rows = Vec::new();
    let mut global_phase = 0.0f64;
    let inner = &c.layers()[1..c.layers().len() - 1];
    for gate in inner.iter().flatten() {
        match gate {
            Gate::ZRot(q, th) => rows.push(ProgramRow {
                qubits: vec![*q],
                theta: *th,
            }),
            Gate::TPow(q, k) => {
                let th = *k as f64 * std::f64::consts::FRAC_PI_8;
                rows.push(ProgramRow {
                    qubits: vec![*q],
                    theta: -th,
                });
                global_phase += th;
            }
            Gate::Cz(a, b) => {
                let quarter = std::f64::consts::FRAC_PI_4;
                rows.push(ProgramRow {
                    qubits: vec![*a],
                    theta: quarter,
                });
                rows.push(ProgramRow {
                    qubits: vec![*b],
                    theta: quarter,
                });
                let mut qs = vec![*a, *b];
                qs.sort_unstable();
                rows.push(ProgramRow {
                    qubits: qs,
                    theta: -quarter,
                });
                global_phase -= quarter;
            }
            Gate::MZRot(th, qs) => {
                let mut qs = qs.clone();
                qs.sort_unstable();
                rows.push(ProgramRow { qubits: qs, theta: *th });
            }
            Gate::H(_) | Gate::Cnot(..) => {
                return Err(Error::structure("non-diagonal gate in the IQP core"))
            }
        }
    }
    Ok(IQPProgram {
        n,
        rows,
        global_phase,
    })
}

/// Render a program back into an IQP circuit (one rotation layer per row;
/// the tracked global phase is physically immaterial here).
pub fn program_to_circuit(p: &IQPProgram) -> Result<Circuit> {
    let mut c = Circuit::new(p.n);
    c.push_layer((0..p.n).map(Gate::H).collect())?;
    for row in &p.rows {
        let gate = if row.qubits.len() == 1 {
            Gate::ZRot(row.qubits[0], row.theta)
        } else {
            Gate::MZRot(row.theta, row.qubits.clone())
        };
        c.push_gate(gate)?;
    }
    c.push_layer((0..p.n).map(Gate::H).collect())?;
    Ok(c)
}

/// Repetition encoding M → M·Gᵀ: logical qubit i becomes replicas
/// i·r ..= i·r+r−1, every monomial picks up all replicas of its qubits.
pub fn encode_program(p: &IQPProgram, r: usize) -> Result<IQPProgram> {
    if r < 1 {
        return Err(Error::invalid("replication factor must be ≥ 1"));
    }
    let rows = p
        .rows
        .iter()
        .map(|row| ProgramRow {
            qubits: row
                .qubits
                .iter()
                .flat_map(|&q| (0..r).map(move |j| q * r + j))
                .collect(),
            theta: row.theta,
        })
        .collect();
    Ok(IQPProgram {
        n: p.n * r,
        rows,
        global_phase: p.global_phase,
    })
}

/// G·x: each logical bit copied to its r replicas.
pub fn repetition_expand(x: &[u8], r: usize) -> Vec<u8> {
    x.iter().flat_map(|&b| std::iter::repeat(b).take(r)).collect()
}

/// Gᵀ·y mod 2: per-block parity.
pub fn repetition_parity(y: &[u8], r: usize) -> Vec<u8> {
    y.chunks(r)
        .map(|block| block.iter().fold(0u8, |a, &b| a ^ (b & 1)))
        .collect()
}

/// Per-logical-bit majority over the r replicas.
pub fn block_decode(y: &[u8], r: usize) -> Result<Vec<u8>> {
    if r % 2 == 0 {
        return Err(Error::invalid("majority decoding needs odd r"));
    }
    if y.len() % r != 0 {
        return Err(Error::invalid("length must be a multiple of r"));
    }
    Ok(y.chunks(r)
        .map(|block| {
            let ones: usize = block.iter().map(|&b| b as usize).sum();
            u8::from(2 * ones > r)
        })
        .collect())
}

/// exp(iθ Z^{⊗k}) as V† · ZROT(θ) · V with V = ⌈log₂k⌉ CNOT matching layers
/// halving the Z weight; total depth 2⌈log₂k⌉ + 1.
pub fn decompose_multiz(k: usize, theta: f64) -> Result<Circuit> {
    if k == 0 {
        return Err(Error::invalid("need at least one qubit"));
    }
    decompose_multiz_on(&(0..k).collect::<Vec<_>>(), theta, k)
}

/// Same decomposition embedded on the listed qubits of an n-wire circuit.
pub fn decompose_multiz_on(qubits: &[usize], theta: f64, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    let mut fold_layers: Vec<Vec<Gate>> = Vec::new();
    let mut survivors: Vec<usize> = qubits.to_vec();
    while survivors.len() > 1 {
        let mut layer = Vec::new();
        let mut next = Vec::new();
        for pair in survivors.chunks(2) {
            if pair.len() == 2 {
                // CNOT(control=pair[1], target=pair[0]) maps Z⊗Z to Z on pair[0]
                layer.push(Gate::Cnot(pair[1], pair[0]));
                next.push(pair[0]);
            } else {
                next.push(pair[0]);
            }
        }
        fold_layers.push(layer);
        survivors = next;
    }
    for layer in &fold_layers {
        c.push_layer(layer.clone())?;
    }
    c.push_gate(Gate::ZRot(survivors[0], theta))?;
    for layer in fold_layers.iter().rev() {
        c.push_layer(layer.clone())?;
    }
    Ok(c)
}

/// Encoded circuit rendering: H layers around the per-row decomposed
/// rotations. Intermediate gates are not diagonal, but the whole is the
/// same IQP unitary.
pub fn render_encoded_circuit(p: &IQPProgram) -> Result<Circuit> {
    let mut c = Circuit::new(p.n);
    c.push_layer((0..p.n).map(Gate::H).collect())?;
    for row in &p.rows {
        if row.qubits.len() == 1 {
            c.push_gate(Gate::ZRot(row.qubits[0], row.theta))?;
        } else {
            let sub = decompose_multiz_on(&row.qubits, row.theta, p.n)?;
            for layer in sub.layers() {
                c.push_layer(layer.clone())?;
            }
        }
    }
    c.push_layer((0..p.n).map(Gate::H).collect())?;
    Ok(c)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RepcodeReport {
    pub q: f64,
    /// n · (4q(1−q))^{r/2}
    pub bound: f64,
    pub tvd: f64,
    pub sampling_stderr: f64,
    pub samples: usize,
}

/// End-to-end repetition pipeline: the ideal encoded output is supported on
/// codewords G·y with the base probabilities (the ⟨Gᵀx|D|Gᵀx⟩ = ⟨x|D̃|x⟩
/// identity), input and output masks collapse to one mask at the combined
/// rate, and block majority recovers y.
pub fn repcode_pipeline(
    base: &Circuit,
    r: usize,
    spec: NoiseSpec,
    seed: u64,
    count: usize,
) -> Result<RepcodeReport> {
    let n = base.n();
    if n > 4 {
        return Err(Error::capacity("repcode_pipeline", n, 4));
    }
    if r % 2 == 0 {
        return Err(Error::invalid("replication factor must be odd"));
    }
    // validates IQP shape as a side effect
    let _program = iqp_to_program(base)?;
    let table = circuit::output_distribution(base)?;
    let ideal = circuit::sample_from_table(&table, seed, count);
    let q = spec.combined();
    let mut counts = vec![0usize; 1 << n];
    for (si, &y) in ideal.iter().enumerate() {
        let logical: Vec<u8> = (0..n).map(|i| ((y >> (n - 1 - i)) & 1) as u8).collect();
        let mut word = repetition_expand(&logical, r);
        let mut rng = noise::stream_rng(seed.wrapping_add(0xEC0DE), si as u64);
        for bit in word.iter_mut() {
            *bit ^= u8::from(rng.gen_bool(q));
        }
        let decoded = block_decode(&word, r)?;
        let idx: usize = decoded.iter().fold(0, |acc, &b| acc << 1 | b as usize);
        counts[idx] += 1;
    }
    let tvd = 0.5
        * table
            .iter()
            .enumerate()
            .map(|(x, &px)| (counts[x] as f64 / count as f64 - px).abs())
            .sum::<f64>();
    let bound = n as f64 * (4.0 * q * (1.0 - q)).powf(r as f64 / 2.0);
    Ok(RepcodeReport {
        q,
        bound,
        tvd,
        sampling_stderr: 0.5 / (count as f64).sqrt(),
        samples: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_iqp_cluster, build_unitary, random_exponents, simulate};
    use crate::linalg::{cr, max_abs, CMat};

    /// Diagonal of the middle (diagonal) section of an IQP circuit.
    fn circuit_core_diagonal(c: &Circuit) -> CVec {
        let n = c.n();
        let dim = 1usize << n;
        let mut phases = vec![Complex64::new(1.0, 0.0); dim];
        for layer in &c.layers()[1..c.layers().len() - 1] {
            for g in layer {
                assert!(g.is_diagonal());
                crate::circuit::apply_gate(g, &mut phases, n);
            }
        }
        CVec::from_vec(phases)
    }

    #[test]
    fn tpow_row_matches_t_gate() {
        let c = build_iqp_cluster(1, 1, &[1]).unwrap();
        let p = iqp_to_program(&c).unwrap();
        assert_eq!(p.rows().len(), 1);
        assert!((p.rows()[0].theta + std::f64::consts::FRAC_PI_8).abs() < 1e-15);
        assert!((p.global_phase() - std::f64::consts::FRAC_PI_8).abs() < 1e-15);
        let d = p.diagonal().unwrap();
        assert!((d[0] - cr(1.0)).norm() < 1e-12);
        assert!((d[1] - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-12);
    }

    #[test]
    fn cz_rows_reconstruct_diagonal() {
        let c = build_iqp_cluster(2, 1, &[0, 0]).unwrap();
        let p = iqp_to_program(&c).unwrap();
        assert_eq!(p.rows().len(), 3);
        assert!(p.rows().iter().all(|r| r.qubits.len() <= 2));
        let want = circuit_core_diagonal(&c);
        let got = p.diagonal().unwrap();
        assert!((0..4).all(|i| (want[i] - got[i]).norm() < 1e-12));
    }

    #[test]
    fn program_diagonal_matches_circuit_core_exactly() {
        let c = build_iqp_cluster(2, 2, &random_exponents(4, 7)).unwrap();
        let p = iqp_to_program(&c).unwrap();
        let want = circuit_core_diagonal(&c);
        let got = p.diagonal().unwrap();
        for i in 0..16 {
            assert!((want[i] - got[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_preserves_distribution() {
        let c = build_iqp_cluster(2, 2, &random_exponents(4, 19)).unwrap();
        let p = iqp_to_program(&c).unwrap();
        let c2 = program_to_circuit(&p).unwrap();
        let d1 = circuit::output_distribution(&c).unwrap();
        let d2 = circuit::output_distribution(&c2).unwrap();
        for (a, b) in d1.iter().zip(&d2) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn encoding_row_structure() {
        let c = build_iqp_cluster(2, 1, &[1, 2]).unwrap();
        let p = iqp_to_program(&c).unwrap();
        let e1 = encode_program(&p, 1).unwrap();
        assert_eq!(e1.rows().len(), p.rows().len());
        assert_eq!(e1.n(), p.n());
        let e3 = encode_program(&p, 3).unwrap();
        for (orig, enc) in p.rows().iter().zip(e3.rows()) {
            assert_eq!(enc.qubits.len(), 3 * orig.qubits.len());
        }
        // row (1,0) → (1,1,1,0,0,0)
        let row = &p.rows()[0];
        assert_eq!(row.qubits, vec![0]);
        assert_eq!(e3.rows()[0].qubits, vec![0, 1, 2]);
    }

    #[test]
    fn encoding_identity_exhaustive() {
        // ⟨Gᵀx|D|Gᵀx⟩ = ⟨x|D̃|x⟩ for all x, small n and r
        for (w, h, r) in [(2usize, 1usize, 2usize), (2, 1, 3), (3, 1, 2)] {
            let c = build_iqp_cluster(w, h, &random_exponents(w * h, 31)).unwrap();
            let p = iqp_to_program(&c).unwrap();
            let enc = encode_program(&p, r).unwrap();
            let d = p.diagonal().unwrap();
            let dt = enc.diagonal().unwrap();
            let n = p.n();
            let np = enc.n();
            for x in 0..(1usize << np) {
                let bits: Vec<u8> = (0..np).map(|i| ((x >> (np - 1 - i)) & 1) as u8).collect();
                let folded = repetition_parity(&bits, r);
                let fidx: usize = folded.iter().fold(0, |acc, &b| acc << 1 | b as usize);
                assert!((dt[x] - d[fidx]).norm() < 1e-12, "x={x}");
                let _ = n;
            }
        }
    }

    #[test]
    fn multiz_decomposition_matches_exponential() {
        for k in 1..=6usize {
            let theta = 0.7;
            let c = decompose_multiz(k, theta).unwrap();
            assert_eq!(
                c.layers().len(),
                2 * (k as f64).log2().ceil() as usize + 1
            );
            let u = build_unitary(&c).unwrap();
            let want = Gate::MZRot(theta, (0..k).collect());
            let mut direct = CMat::identity(1 << k, 1 << k);
            for col in 0..(1usize << k) {
                let mut v = vec![Complex64::new(0.0, 0.0); 1 << k];
                v[col] = cr(1.0);
                crate::circuit::apply_gate(&want, &mut v, k);
                for row in 0..(1usize << k) {
                    direct[(row, col)] = v[row];
                }
            }
            assert!(max_abs(&(u - direct)) < 1e-10, "k={k}");
        }
    }

    #[test]
    fn multiz_random_angles() {
        let mut rng = noise::stream_rng(5, 5);
        for _ in 0..10 {
            let theta: f64 = rng.gen::<f64>() * 6.28;
            let c = decompose_multiz(4, theta).unwrap();
            let u = build_unitary(&c).unwrap();
            // diagonal entries e^{±iθ} by parity
            for idx in 0..16usize {
                let want = if (idx.count_ones()) % 2 == 0 {
                    Complex64::from_polar(1.0, theta)
                } else {
                    Complex64::from_polar(1.0, -theta)
                };
                assert!((u[(idx, idx)] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_decode_majority() {
        assert_eq!(block_decode(&[1, 1, 1, 0, 0, 0], 3).unwrap(), vec![1, 0]);
        assert_eq!(block_decode(&[1, 0, 1, 0, 1, 0], 3).unwrap(), vec![1, 0]);
        assert!(block_decode(&[1, 0], 2).is_err());
        // clean codeword
        let x = [1u8, 0, 1];
        let y = repetition_expand(&x, 5);
        assert_eq!(block_decode(&y, 5).unwrap().to_vec(), x.to_vec());
    }

    #[test]
    fn block_decode_error_rate_matches_binomial() {
        let r = 5;
        let p = 0.2;
        let trials = 100_000;
        let mut wrong = 0usize;
        for t in 0..trials {
            let mut rng = noise::stream_rng(123, t as u64);
            let mut y = vec![0u8; r];
            for b in y.iter_mut() {
                *b = u8::from(rng.gen_bool(p));
            }
            if block_decode(&y, r).unwrap()[0] == 1 {
                wrong += 1;
            }
        }
        let want = crate::distill::majority_failure(r, p); // 0.05792
        assert!((want - 0.05792).abs() < 1e-10);
        let got = wrong as f64 / trials as f64;
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!((got - want).abs() < 4.0 * sigma, "{got} vs {want}");
    }

    #[test]
    fn encoded_circuit_is_codeword_pushforward() {
        // dense check of the codeword-support claim behind the pipeline
        let c = build_iqp_cluster(2, 1, &random_exponents(2, 13)).unwrap();
        let p = iqp_to_program(&c).unwrap();
        let enc = encode_program(&p, 2).unwrap();
        let rendered = render_encoded_circuit(&enc).unwrap();
        let psi = simulate(&rendered).unwrap();
        let base = circuit::output_distribution(&c).unwrap();
        let mut seen = 0.0;
        for x in 0..16usize {
            let pr = psi[x].norm_sqr();
            let bits: Vec<u8> = (0..4).map(|i| ((x >> (3 - i)) & 1) as u8).collect();
            let is_codeword = bits[0] == bits[1] && bits[2] == bits[3];
            if is_codeword {
                let y = ((bits[0] as usize) << 1) | bits[2] as usize;
                assert!((pr - base[y]).abs() < 1e-10);
                seen += pr;
            } else {
                assert!(pr < 1e-12);
            }
        }
        assert!((seen - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pipeline_formulas_and_small_run() {
        let spec = NoiseSpec::new(0.1, 0.2).unwrap();
        assert!((spec.combined() - 0.26).abs() < 1e-15);
        let bound = 4.0 * (4.0 * 0.26 * 0.74_f64).powf(21.0 / 2.0);
        assert!((bound - 0.2596).abs() < 0.015); // ≈ 0.26 per the arithmetic
        let base = build_iqp_cluster(2, 1, &random_exponents(2, 3)).unwrap();
        let spec = NoiseSpec::new(0.05, 0.05).unwrap();
        let rep = repcode_pipeline(&base, 9, spec, 41, 20_000).unwrap();
        assert!((rep.q - 0.095).abs() < 1e-12);
        assert!(
            rep.tvd <= rep.bound + 3.0 * rep.sampling_stderr,
            "tvd {} bound {}",
            rep.tvd,
            rep.bound
        );
    }

    #[test]
    fn chernoff_form_dominates_majority_failure() {
        // P[Binom(r,q) > r/2] ≤ (4q(1−q))^{r/2}
        for q in [0.05f64, 0.26] {
            for r in (3..=21usize).step_by(2) {
                let exact = crate::distill::majority_failure(r, q);
                let chernoff = (4.0 * q * (1.0 - q)).powf(r as f64 / 2.0);
                assert!(exact <= chernoff + 1e-12, "r={r} q={q}");
            }
        }
    }
}
