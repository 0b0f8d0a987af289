//! Packed binary vectors.
//!
//! `BitVector` is the common currency of the engine: encoder outputs, SDRs,
//! per-step cell activity and column masks are all fixed-length bit vectors
//! packed into 64-bit words. Bits past `len` are kept zero in every word so
//! popcounts and distances can run word-wise without masking.

const WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = BitVector::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        debug_assert!(index < self.len);
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Hamming distance: popcount of the XOR.
    pub fn distance(&self, other: &BitVector) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn intersection_count(&self, other: &BitVector) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + bit)
                }
            })
        })
    }

    /// Lowercase hex of the packed payload, little-endian word order,
    /// exactly ceil(len/4) digits.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4);
        let mut out = String::with_capacity(nibbles);
        for i in 0..nibbles {
            let nib = (self.words[i * 4 / WORD_BITS] >> ((i * 4) % WORD_BITS)) & 0xF;
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: usize, hex: &str) -> Option<Self> {
        if hex.len() != len.div_ceil(4) {
            return None;
        }
        let mut v = BitVector::zeros(len);
        for (i, ch) in hex.chars().enumerate() {
            let nib = ch.to_digit(16)? as u64;
            v.words[i * 4 / WORD_BITS] |= nib << ((i * 4) % WORD_BITS);
        }
        // reject set bits past len
        if v.popcount() != v.ones().filter(|&i| i < len).count() {
            return None;
        }
        Some(v)
    }
}
