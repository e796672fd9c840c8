use super::HarvestError;

/// Most keywords a query keeps.
pub const MAX_KEYWORDS: usize = 8;

/// Words dropped from snippet descriptions before searching.
pub const STOPWORDS: [&str; 50] = [
    "a", "about", "all", "also", "an", "and", "any", "are", "as", "at", "be", "by", "can",
    "code", "do", "does", "from", "given", "how", "i", "if", "in", "into", "is", "it",
    "its", "me", "my", "of", "on", "or", "program", "so", "some", "such", "that", "the",
    "their", "them", "then", "this", "to", "using", "want", "we", "what", "when", "which", "with",
    "you",
];

/// Case-folds `description`, turns punctuation into spaces, drops stopwords
/// and repeats, and keeps the first [`MAX_KEYWORDS`] words.
pub fn build_query(description: &str) -> Result<Vec<String>, HarvestError> {
    let folded: String = description
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase();
    let mut keywords: Vec<String> = Vec::new();
    for word in folded.split_whitespace() {
        if !STOPWORDS.contains(&word) && !keywords.iter().any(|k| k == word) {
            keywords.push(word.to_string());
            if keywords.len() == MAX_KEYWORDS {
                break;
            }
        }
    }
    if keywords.is_empty() {
        return Err(HarvestError::EmptyQuery);
    }
    Ok(keywords)
}
