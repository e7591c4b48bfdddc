//! Small stable hashing helpers. Persisted artifacts depend on these values,
//! so they must not change between builds or platforms.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over `bytes`, keyed by `seed`.
pub fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET ^ seed.wrapping_mul(FNV_PRIME);
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    // Final avalanche so low bits are usable as bucket indices.
    hash ^= hash >> 33;
    hash = hash.wrapping_mul(0xff51_afd7_ed55_8ccd);
    hash ^= hash >> 33;
    hash
}

/// Incremental form of [`fnv1a`] for hashing structured content.
#[derive(Debug, Clone)]
pub struct StableHasher {
    state: u64,
}

impl StableHasher {
    pub fn new(seed: u64) -> Self {
        Self {
            state: FNV_OFFSET ^ seed.wrapping_mul(FNV_PRIME),
        }
    }

    pub fn write(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(FNV_PRIME);
        }
        // Length separator keeps ("ab","c") and ("a","bc") apart.
        self.state ^= bytes.len() as u64;
        self.state = self.state.wrapping_mul(FNV_PRIME);
        self
    }

    pub fn write_f64s(&mut self, values: &[f64]) -> &mut Self {
        for v in values {
            self.write(&v.to_bits().to_le_bytes());
        }
        self
    }

    pub fn finish(&self) -> u64 {
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_separate_hashes() {
        assert_ne!(fnv1a(0, b"isDigit@0"), fnv1a(1, b"isDigit@0"));
        assert_eq!(fnv1a(3, b"word=six@0"), fnv1a(3, b"word=six@0"));
    }

    #[test]
    fn structured_hash_respects_boundaries() {
        let a = StableHasher::new(0).write(b"ab").write(b"c").finish();
        let b = StableHasher::new(0).write(b"a").write(b"bc").finish();
        assert_ne!(a, b);
    }
}
