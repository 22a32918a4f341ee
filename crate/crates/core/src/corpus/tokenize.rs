use serde::{Deserialize, Serialize};

/// Lowercased tokens of a text. Letters and digits are kept, every other
/// character separates tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        TokenSequence(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// All contiguous windows of `n` tokens.
    pub fn ngrams(&self, n: usize) -> impl Iterator<Item = &[String]> {
        let n = n.max(1);
        self.0.windows(n)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenSequence(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text).into_inner()
    }

    #[test]
    fn lowercases_and_drops_punctuation() {
        assert_eq!(toks("Send them to HELL!"), ["send", "them", "to", "hell"]);
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks("  ?! ...").is_empty());
    }

    #[test]
    fn hyphen_is_a_separator() {
        assert_eq!(toks("well-done Myanmar"), ["well", "done", "myanmar"]);
    }

    #[test]
    fn keeps_non_ascii_letters_and_digits() {
        assert_eq!(toks("Ünïcode 2017 Rakhine’s"), ["ünïcode", "2017", "rakhine", "s"]);
    }

    #[test]
    fn ngram_windows() {
        let t = tokenize("a b c");
        let bigrams: Vec<_> = t.ngrams(2).map(|g| g.join(" ")).collect();
        assert_eq!(bigrams, ["a b", "b c"]);
        assert_eq!(t.ngrams(4).count(), 0);
    }
}
