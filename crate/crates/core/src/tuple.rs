//! Dense indexing of tuples of field elements.
//!
//! A tuple `(e_0, ..., e_{len-1})` of field element indices maps to
//! `sum e_i q^(len-1-i)`, so the first entry is the most significant and
//! tuple indices follow lexicographic digit order.

/// Tuples of a fixed length over an alphabet of size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleSpace {
    pub q: usize,
    pub len: usize,
}

impl TupleSpace {
    pub fn new(q: usize, len: usize) -> Self {
        Self { q, len }
    }

    pub fn size(&self) -> usize {
        self.q.pow(self.len as u32)
    }

    pub fn encode(&self, entries: &[usize]) -> usize {
        debug_assert_eq!(entries.len(), self.len);
        entries.iter().fold(0, |acc, &e| acc * self.q + e)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len];
        for slot in out.iter_mut().rev() {
            *slot = index % self.q;
            index /= self.q;
        }
        out
    }

    /// Entry at position `pos` of the tuple with index `index`.
    pub fn entry(&self, index: usize, pos: usize) -> usize {
        index / self.q.pow((self.len - 1 - pos) as u32) % self.q
    }
}
