use super::tokenize::TokenSequence;

/// Default minimum share of function words for a comment to count as English.
pub const DEFAULT_STOPWORD_RATIO: f64 = 0.15;

/// Comments with fewer tokens than this always pass the filter.
pub const MIN_TOKENS_FOR_FILTER: usize = 3;

/// Built-in English function words used by the language filter.
pub const FUNCTION_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "even",
    "every", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here",
    "hers", "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "let", "may", "me", "might", "more", "most", "must", "my", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own", "same",
    "shall", "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "us", "very", "was", "we", "were", "what", "when", "where", "which", "while",
    "who", "whom", "whose", "why", "will", "with", "would", "you", "your", "yours",
];

pub fn is_function_word(token: &str) -> bool {
    FUNCTION_WORDS.binary_search(&token).is_ok()
}

/// Share of tokens that are English function words; `None` for an empty sequence.
pub fn function_word_ratio(tokens: &TokenSequence) -> Option<f64> {
    if tokens.is_empty() {
        return None;
    }
    let hits = tokens.iter().filter(|t| is_function_word(t)).count();
    Some(hits as f64 / tokens.len() as f64)
}

/// Function-word ratio test. Short comments pass unconditionally.
pub fn passes_english_filter(tokens: &TokenSequence, threshold: f64) -> bool {
    if tokens.len() < MIN_TOKENS_FOR_FILTER {
        return true;
    }
    function_word_ratio(tokens).is_some_and(|r| r >= threshold)
}
