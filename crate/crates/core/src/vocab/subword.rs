use super::VocabError;

pub const BOW: char = '<';
pub const EOW: char = '>';

/// 32-bit FNV-1a.
pub fn fnv1a_32(bytes: &[u8]) -> u32 {
    let mut hash: u32 = 2_166_136_261;
    for &b in bytes {
        hash ^= u32::from(b);
        hash = hash.wrapping_mul(16_777_619);
    }
    hash
}

/// Maps a word's boundary-wrapped character n-grams to hashed buckets that
/// live after the vocabulary rows: ids are in
/// `[vocab_size, vocab_size + bucket_count)`.
///
/// Grams are taken over codepoints; the hash runs over their UTF-8 bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubwordIndexer {
    min_n: usize,
    max_n: usize,
    bucket_count: usize,
    vocab_size: usize,
}

impl SubwordIndexer {
    pub const DEFAULT_MIN_N: usize = 3;
    pub const DEFAULT_MAX_N: usize = 6;
    pub const DEFAULT_BUCKETS: usize = 2_000_000;

    pub fn new(min_n: usize, max_n: usize, bucket_count: usize, vocab_size: usize) -> Result<Self, VocabError> {
        if min_n == 0 || min_n > max_n {
            return Err(VocabError::InvalidNgramRange { min_n, max_n });
        }
        if bucket_count == 0 {
            return Err(VocabError::InvalidBucketCount);
        }
        Ok(SubwordIndexer {
            min_n,
            max_n,
            bucket_count,
            vocab_size,
        })
    }

    pub fn min_n(&self) -> usize {
        self.min_n
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_count
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Total number of input rows: vocabulary plus buckets.
    pub fn rows(&self) -> usize {
        self.vocab_size + self.bucket_count
    }

    /// The n-gram strings of `<word>`, ordered by start position, then length.
    pub fn ngrams(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = std::iter::once(BOW).chain(word.chars()).chain(std::iter::once(EOW)).collect();
        let mut grams = Vec::new();
        for start in 0..chars.len() {
            for n in self.min_n..=self.max_n {
                if start + n > chars.len() {
                    break;
                }
                grams.push(chars[start..start + n].iter().collect());
            }
        }
        grams
    }

    /// Row id of a single n-gram.
    pub fn gram_id(&self, gram: &str) -> usize {
        self.vocab_size + fnv1a_32(gram.as_bytes()) as usize % self.bucket_count
    }

    /// Row ids of all n-grams of `word`, in [`SubwordIndexer::ngrams`] order.
    pub fn extract_ngrams(&self, word: &str) -> Vec<usize> {
        self.ngrams(word).iter().map(|g| self.gram_id(g)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indexer() -> SubwordIndexer {
        SubwordIndexer::new(3, 6, 1000, 50).unwrap()
    }

    fn sorted(mut v: Vec<String>) -> Vec<String> {
        v.sort();
        v
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a_32(b""), 0x811c9dc5);
        assert_eq!(fnv1a_32(b"a"), 0xe40c292c);
        assert_eq!(fnv1a_32(b"foobar"), 0xbf9cf968);
    }

    #[test]
    fn ngram_examples() {
        let ix = indexer();
        assert_eq!(sorted(ix.ngrams("ab")), sorted(vec!["<ab".into(), "ab>".into(), "<ab>".into()]));
        assert_eq!(ix.ngrams("a"), vec!["<a>".to_string()]);
        assert_eq!(ix.ngrams("iya"), vec!["<iy", "<iya", "<iya>", "iya", "iya>", "ya>"]);
    }

    #[test]
    fn grams_are_codepoints() {
        // ọ is one codepoint but three UTF-8 bytes
        let grams = indexer().ngrams("ọ");
        assert_eq!(grams, vec!["<ọ>".to_string()]);
    }

    #[test]
    fn ids_in_bucket_range() {
        let ix = indexer();
        for id in ix.extract_ngrams("ọ̀rẹ́-kùnrin") {
            assert!((50..1050).contains(&id));
        }
        assert_eq!(ix.rows(), 1050);
    }

    #[test]
    fn invalid_ranges() {
        assert!(SubwordIndexer::new(4, 3, 10, 0).is_err());
        assert!(SubwordIndexer::new(0, 3, 10, 0).is_err());
        assert!(SubwordIndexer::new(3, 6, 0, 0).is_err());
    }
}
