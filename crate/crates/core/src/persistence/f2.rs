//! Dense F2 linear algebra on packed bit vectors. Used as the independent
//! rank oracle; it never looks at a reduction or a diagram.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn highest(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }
}

/// Rank over F2 of the span of `vectors`.
pub fn rank(vectors: impl IntoIterator<Item = BitVec>) -> usize {
    // Echelon basis keyed by highest set bit.
    let mut basis: std::collections::BTreeMap<usize, BitVec> = Default::default();
    for mut v in vectors {
        while let Some(h) = v.highest() {
            match basis.get(&h) {
                Some(b) => v.xor_assign(b),
                None => {
                    basis.insert(h, v);
                    break;
                }
            }
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(bits: &[usize], len: usize) -> BitVec {
        let mut v = BitVec::zeros(len);
        for &b in bits {
            v.set(b);
        }
        v
    }

    #[test]
    fn small_ranks() {
        assert_eq!(rank(Vec::<BitVec>::new()), 0);
        assert_eq!(rank([vec_of(&[], 3)]), 0);
        // The three edges of a triangle are dependent over F2.
        let tri = [vec_of(&[0, 1], 3), vec_of(&[1, 2], 3), vec_of(&[0, 2], 3)];
        assert_eq!(rank(tri), 2);
        let wide = [vec_of(&[0, 130], 200), vec_of(&[130], 200), vec_of(&[0], 200)];
        assert_eq!(rank(wide), 2);
        assert!(vec_of(&[70], 100).get(70));
    }
}
