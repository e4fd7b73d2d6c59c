/// Growable dense bit-vector over non-negative integers.
#[derive(Debug, Clone, Default)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitSet {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    #[inline]
    pub fn contains(&self, value: u64) -> bool {
        let word = (value >> 6) as usize;
        match self.words.get(word) {
            Some(w) => (w >> (value & 63)) & 1 == 1,
            None => false,
        }
    }

    #[inline]
    pub fn insert(&mut self, value: u64) {
        let word = (value >> 6) as usize;
        if word >= self.words.len() {
            // grow geometrically; values arrive in increasing order
            let new_len = (word + 1).max(self.words.len() * 2);
            self.words.resize(new_len, 0);
        }
        self.words[word] |= 1 << (value & 63);
    }

    pub fn union_with(&mut self, other: &BitSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

impl PartialEq for BitSet {
    fn eq(&self, other: &Self) -> bool {
        let (short, long) = if self.words.len() <= other.words.len() {
            (&self.words, &other.words)
        } else {
            (&other.words, &self.words)
        };
        long[..short.len()] == short[..] && long[short.len()..].iter().all(|&w| w == 0)
    }
}

impl Eq for BitSet {}
