//! Shared text analysis: the single tokenizer used by both the BM25 index
//! and the model vocabulary, so lexical matching behaves identically in
//! both stages.

/// Lowercase the input and split it on runs of non-alphanumeric characters,
/// dropping empty tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}
