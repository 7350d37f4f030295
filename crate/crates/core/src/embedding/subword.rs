//! Character n-gram decomposition for subword embeddings.

pub const BOW: char = '<';
pub const EOW: char = '>';

/// Character n-grams of `<word>` for every `n` in `min..=max`, ordered by
/// length and then by position.
pub fn char_ngrams(word: &str, min: usize, max: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let mut out = Vec::new();
    for n in min.max(1)..=max.min(chars.len()) {
        for start in 0..=chars.len() - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

/// 32-bit FNV-1a over the UTF-8 bytes.
pub fn fnv1a32(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in s.as_bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Bucket indices of every n-gram of `word`.
pub fn ngram_buckets(word: &str, min: usize, max: usize, buckets: usize) -> Vec<u32> {
    char_ngrams(word, min, max)
        .iter()
        .map(|g| (fnv1a32(g) as usize % buckets) as u32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apple_trigrams() {
        assert_eq!(char_ngrams("apple", 3, 3), ["<ap", "app", "ppl", "ple", "le>"]);
    }

    #[test]
    fn ranges_and_short_words() {
        assert_eq!(char_ngrams("a", 3, 6), ["<a>"]);
        let grams = char_ngrams("apple", 3, 6);
        // 5 trigrams, 4 four-grams, 3 five-grams, 2 six-grams
        assert_eq!(grams.len(), 14);
        assert_eq!(grams.last().unwrap(), "apple>");
    }

    #[test]
    fn multibyte_characters_are_single_units() {
        assert_eq!(char_ngrams("né", 3, 3), ["<né", "né>"]);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a32(""), 0x811c_9dc5);
        assert_eq!(fnv1a32("a"), 0xe40c_292c);
    }

    #[test]
    fn buckets_are_corpus_independent() {
        let a = ngram_buckets("applle", 3, 6, 1000);
        assert_eq!(a, ngram_buckets("applle", 3, 6, 1000));
        assert!(a.iter().all(|&b| b < 1000));
    }
}
