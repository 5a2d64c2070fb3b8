//! Bit-flip input/output noise: the temperature ↔ noise-rate dictionary, the
//! Gibbs = noisy-circuit identity, and fast classical-shift samplers for
//! noisy IQP outputs.
//!
//! Input X errors commute through IQP circuits (they turn into phase flips
//! after the first H layer and back into bit flips at the output), so noisy
//! sampling reduces to XOR masks on ideal samples. The density-matrix path
//! below exists as the small-instance oracle for that shortcut.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::circuit::{self, Circuit};
use crate::dense::DensityMatrix;
use crate::error::{Error, Result};
use crate::hamiltonian;
use crate::linalg::{cr, kron, CMat};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct NoiseSpec {
    pub p_in: f64,
    pub p_out: f64,
}

impl NoiseSpec {
    pub fn new(p_in: f64, p_out: f64) -> Result<Self> {
        for p in [p_in, p_out] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::invalid(format!("noise rate {p} outside [0, 1/2)")));
            }
        }
        Ok(NoiseSpec { p_in, p_out })
    }

    /// Combined single-mask rate q = p_in(1−p_out) + p_out(1−p_in).
    pub fn combined(&self) -> f64 {
        combine_rates(self.p_in, self.p_out)
    }
}

pub fn combine_rates(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// p = (1+e^β)^{−1}: the input bit-flip rate equivalent to temperature β.
pub fn beta_to_p(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::invalid("beta must be nonnegative"));
    }
    Ok(1.0 / (1.0 + beta.exp()))
}

pub fn p_to_beta(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::invalid(format!(
            "p = {p} has no finite inverse temperature (need 0 < p ≤ 1/2)"
        )));
    }
    Ok((1.0 / p - 1.0).ln())
}

/// 𝒟_p(σ) = (1−p)σ + p XσX on one qubit, as a dense 2×2 map of |0⟩⟨0|.
fn flipped_zero(p: f64) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(1.0 - p), cr(p)]))
}

/// C (𝒟_p|0⟩⟨0|)^{⊗n} C†.
pub fn noisy_output_state(c: &Circuit, p: f64) -> Result<DensityMatrix> {
    if c.n() > 10 {
        return Err(Error::capacity("noisy_output_state", c.n(), 10));
    }
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::invalid("p outside [0, 1/2]"));
    }
    let mut rho = CMat::from_element(1, 1, cr(1.0));
    let single = flipped_zero(p);
    for _ in 0..c.n() {
        rho = kron(&rho, &single);
    }
    let u = circuit::build_unitary(c)?;
    DensityMatrix::new(&u * rho * u.adjoint())
}

/// Trace distance between the Gibbs state of the parent Hamiltonian at β and
/// the noisy circuit output at p = (1+e^β)^{−1}. Zero up to roundoff.
pub fn gibbs_equivalence_check(c: &Circuit, beta: f64) -> Result<f64> {
    if c.n() > 6 {
        return Err(Error::capacity("gibbs_equivalence_check", c.n(), 6));
    }
    let hp = hamiltonian::build_parent(c)?;
    let (gibbs, _z) = hamiltonian::gibbs_state(&hp, beta)?;
    let noisy = noisy_output_state(c, beta_to_p(beta)?)?;
    crate::dense::divergences(&gibbs, &noisy).map(|d| d.trace_distance)
}

/// Per-call deterministic RNG derived from (seed, stream index).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    // splitmix-style mix keeps per-trial streams decorrelated
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha12Rng::seed_from_u64(z ^ (z >> 31))
}

/// Ideal IQP samples masked by input and output bit flips: per sample,
/// draw x from the exact table and return x ⊕ e_in ⊕ e_out.
pub fn noisy_iqp_samples(
    c: &Circuit,
    spec: NoiseSpec,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<u8>>> {
    if !c.is_iqp_shaped() {
        return Err(Error::structure(
            "classical-shift sampling needs an IQP-shaped circuit",
        ));
    }
    let n = c.n();
    let table = circuit::output_distribution(c)?;
    let ideal = circuit::sample_from_table(&table, seed, count);
    let q = spec.combined();
    let mut out = Vec::with_capacity(count);
    for (i, &x) in ideal.iter().enumerate() {
        let mut rng = stream_rng(seed.wrapping_add(0x51AB), i as u64);
        let bits: Vec<u8> = (0..n)
            .map(|qubit| {
                let ideal_bit = ((x >> (n - 1 - qubit)) & 1) as u8;
                let flip = u8::from(rng.gen_bool(q));
                ideal_bit ^ flip
            })
            .collect();
        out.push(bits);
    }
    Ok(out)
}

/// Classical-shift sampler for a gadget-prefixed IQP circuit under input
/// bit-flip noise at rate `p`: the error mask propagates through the CNOT
/// trees as classical bits, the roots' errors shift the ideal IQP sample,
/// and ancilla wires are measured directly. Distributionally identical to
/// density-matrix simulation of the input noise.
pub fn sample_noisy_iqp(
    ft: &crate::distill::FTCircuit,
    p: f64,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<u8>>> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::invalid("p outside [0, 1/2]"));
    }
    let n = ft.n_base();
    let k = ft.gadget().k();
    let table = circuit::output_distribution(ft.base())?;
    let ideal = circuit::sample_from_table(&table, seed, count);
    let mut out = Vec::with_capacity(count);
    let mut mask = vec![0u8; k];
    for (si, &x) in ideal.iter().enumerate() {
        let mut rng = stream_rng(seed.wrapping_add(0xF7), si as u64);
        let mut bits = vec![0u8; n * k];
        for i in 0..n {
            for m in mask.iter_mut() {
                *m = u8::from(rng.gen_bool(p));
            }
            let encoded = ft.gadget().encode_bits(&mask)?;
            let block = &mut bits[i * k..(i + 1) * k];
            block.copy_from_slice(&encoded);
            // the root wire runs through the IQP core: its X error commutes
            // out and shifts the ideal sample
            let ideal_bit = ((x >> (n - 1 - i)) & 1) as u8;
            block[0] = ideal_bit ^ mask[0];
        }
        out.push(bits);
    }
    Ok(out)
}
