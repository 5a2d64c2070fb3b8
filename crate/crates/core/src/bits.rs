/// Fixed-width bit vector used for Pauli masks and classical bit propagation.
///
/// Wide enough for fault-tolerant circuits with hundreds of wires; qubit `q`
/// is bit `q` counted from the least significant word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    len: usize,
    words: Vec<u64>,
}

impl BitMask {
    pub fn zeros(len: usize) -> Self {
        BitMask {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitMask) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitMask) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Popcount of the bitwise AND; the symplectic-form workhorse.
    pub fn and_count(&self, other: &BitMask) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &BitMask) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut m = BitMask::zeros(len);
        for &i in indices {
            m.set(i, true);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_xor() {
        let mut a = BitMask::zeros(130);
        a.set(0, true);
        a.set(129, true);
        assert!(a.get(0) && a.get(129) && !a.get(64));
        let b = BitMask::from_indices(130, &[0, 5]);
        a.xor_assign(&b);
        assert!(!a.get(0) && a.get(5) && a.get(129));
        assert_eq!(a.count_ones(), 2);
        assert_eq!(a.and_count(&b), 1);
    }
}
