/// 32-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a_32(s: &str) -> u32 {
    let mut hash: u32 = 0x811c_9dc5;
    for &b in s.as_bytes() {
        hash ^= b as u32;
        hash = hash.wrapping_mul(0x0100_0193);
    }
    hash
}

/// Character n-grams of `<token>` with lengths in `min_n..=max_n`, in order of
/// start position then length. The full bracketed token is not included, and
/// tokens shorter than `min_n` characters have no subwords.
pub fn char_ngrams(token: &str, min_n: usize, max_n: usize) -> Vec<String> {
    if token.chars().count() < min_n {
        return Vec::new();
    }
    let chars: Vec<char> = std::iter::once('<').chain(token.chars()).chain(std::iter::once('>')).collect();
    let mut grams = Vec::new();
    for start in 0..chars.len() {
        for n in min_n..=max_n {
            let end = start + n;
            if end > chars.len() {
                break;
            }
            if start == 0 && end == chars.len() {
                continue;
            }
            grams.push(chars[start..end].iter().collect());
        }
    }
    grams
}

pub fn subword_buckets(token: &str, min_n: usize, max_n: usize, bucket_count: usize) -> Vec<usize> {
    char_ngrams(token, min_n, max_n)
        .iter()
        .map(|g| fnv1a_32(g) as usize % bucket_count)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 32-bit test vectors
        assert_eq!(fnv1a_32(""), 0x811c9dc5);
        assert_eq!(fnv1a_32("a"), 0xe40c292c);
        assert_eq!(fnv1a_32("foobar"), 0xbf9cf968);
    }

    #[test]
    fn ngrams_of_short_word() {
        assert_eq!(char_ngrams("war", 3, 4), ["<wa", "<war", "war", "war>", "ar>"]);
    }

    #[test]
    fn tokens_shorter_than_min_n_have_none() {
        assert!(char_ngrams("ab", 3, 6).is_empty());
        assert!(subword_buckets("ab", 3, 6, 100).is_empty());
    }

    #[test]
    fn buckets_in_range() {
        let b = subword_buckets("buddhists", 3, 6, 17);
        assert!(!b.is_empty());
        assert!(b.iter().all(|&i| i < 17));
    }
}
