//! n-qubit Pauli strings as paired X/Z bit masks with a quarter phase.
//!
//! A `PauliString` with masks `(x, z)` and phase exponent `t` represents
//! `i^t · ⊗_q X^{x_q} Z^{z_q}` (so `Y = i·XZ` has `t = 1`).

use crate::bits::BitMask;
use crate::linalg::CMat;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: BitMask,
    z: BitMask,
    phase_exp: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            x: BitMask::zeros(n),
            z: BitMask::zeros(n),
            phase_exp: 0,
        }
    }

    pub fn from_masks(n: usize, x: BitMask, z: BitMask, phase_exp: u8) -> Self {
        assert_eq!(x.len(), n);
        assert_eq!(z.len(), n);
        PauliString {
            n,
            x,
            z,
            phase_exp: phase_exp % 4,
        }
    }

    /// Single-qubit letter at `qubit` (0=I, 1=X, 2=Y, 3=Z), phase 0.
    /// Y is stored as masks (1,1) with `t=1`.
    pub fn single(n: usize, qubit: usize, letter: u8) -> Self {
        let mut p = PauliString::identity(n);
        match letter {
            0 => {}
            1 => p.x.set(qubit, true),
            2 => {
                p.x.set(qubit, true);
                p.z.set(qubit, true);
                p.phase_exp = 1;
            }
            3 => p.z.set(qubit, true),
            _ => panic!("letter must be 0..=3"),
        }
        p
    }

    /// Pauli indexed by base-4 digits over `qubits` (digit order follows the
    /// slice; 0=I,1=X,2=Y,3=Z). Used to enumerate jump-operator sets.
    pub fn from_digits(n: usize, qubits: &[usize], digits: &[u8]) -> Self {
        assert_eq!(qubits.len(), digits.len());
        let mut p = PauliString::identity(n);
        for (&q, &d) in qubits.iter().zip(digits) {
            match d {
                0 => {}
                1 => p.x.set(q, true),
                2 => {
                    p.x.set(q, true);
                    p.z.set(q, true);
                    p.phase_exp = (p.phase_exp + 1) % 4;
                }
                3 => p.z.set(q, true),
                _ => panic!("digit must be 0..=3"),
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> &BitMask {
        &self.x
    }

    pub fn z_mask(&self) -> &BitMask {
        &self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Qubits on which the string acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// Product with phase accumulation:
    /// (i^s X^a Z^b)(i^t X^c Z^d) = i^{s+t+2·|b∧c|} X^{a⊕c} Z^{b⊕d}.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n);
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        let cross = self.z.and_count(&other.x);
        PauliString {
            n: self.n,
            x,
            z,
            phase_exp: ((self.phase_exp as usize + other.phase_exp as usize + 2 * cross) % 4)
                as u8,
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        (self.x.and_count(&other.z) + self.z.and_count(&other.x)) % 2 == 0
    }

    /// Dense matrix, qubit 0 as the most significant index bit.
    /// `X^x Z^z |b⟩ = (−1)^{z·b} |b⊕x⟩`, one entry per column.
    pub fn to_matrix(&self) -> CMat {
        assert!(self.n <= 26, "dense Pauli beyond 26 qubits");
        let dim = 1usize << self.n;
        let phase = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][self.phase_exp as usize];
        let mut xbits = 0usize;
        let mut zbits = 0usize;
        for q in 0..self.n {
            if self.x.get(q) {
                xbits |= 1 << (self.n - 1 - q);
            }
            if self.z.get(q) {
                zbits |= 1 << (self.n - 1 - q);
            }
        }
        let mut m = CMat::zeros(dim, dim);
        for col in 0..dim {
            let mut sign = 1.0;
            if (col & zbits).count_ones() % 2 == 1 {
                sign = -1.0;
            }
            m[(col ^ xbits, col)] = phase * sign;
        }
        m
    }

    /// Restriction to a qubit subset that must contain the support;
    /// the subset order defines the tensor factor order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let k = qubits.len();
        let mut p = PauliString::identity(k);
        p.phase_exp = self.phase_exp;
        for (j, &q) in qubits.iter().enumerate() {
            if self.x.get(q) {
                p.x.set(j, true);
            }
            if self.z.get(q) {
                p.z.set(j, true);
            }
        }
        debug_assert_eq!(p.weight(), self.weight(), "subset must cover the support");
        p
    }
}

/// `pauli_to_matrix` spelled as a free function to mirror the operation table.
pub fn pauli_to_matrix(p: &PauliString) -> CMat {
    p.to_matrix()
}

/// All 4^k Pauli strings supported on `qubits`, identity included, phase 0
/// except for the stored `i` of each Y factor.
pub fn pauli_set_on(n: usize, qubits: &[usize]) -> Vec<PauliString> {
    let k = qubits.len();
    let mut out = Vec::with_capacity(1 << (2 * k));
    let mut digits = vec![0u8; k];
    loop {
        out.push(PauliString::from_digits(n, qubits, &digits));
        // base-4 increment
        let mut j = 0;
        loop {
            if j == k {
                return out;
            }
            digits[j] += 1;
            if digits[j] < 4 {
                break;
            }
            digits[j] = 0;
            j += 1;
        }
    }
}
