use serde::{Deserialize, Serialize};

/// Preprocessing options applied to raw document text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub remove_stopwords: bool,
    /// Tokens shorter than this (in chars) are dropped.
    pub min_token_len: usize,
    /// Skip everything up to the first blank line (mail/news headers).
    pub strip_headers: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            remove_stopwords: false,
            min_token_len: 2,
            strip_headers: false,
        }
    }
}

// Common English function words.
const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Splits raw text into normalized terms.
///
/// Every character that is not alphanumeric acts as a separator, so
/// punctuation never survives inside a token.
pub fn tokenize(raw_text: &str, config: &TokenizerConfig) -> Vec<String> {
    let body = if config.strip_headers {
        strip_header_block(raw_text)
    } else {
        raw_text
    };

    body.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(|piece| {
            if config.lowercase {
                piece.to_lowercase()
            } else {
                piece.to_owned()
            }
        })
        .filter(|token| token.chars().count() >= config.min_token_len)
        .filter(|token| !(config.remove_stopwords && is_stopword(token)))
        .collect()
}

fn strip_header_block(text: &str) -> &str {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        offset += line.len();
        if line.trim().is_empty() {
            return &text[offset..];
        }
    }
    // no blank line: the whole text is header
    ""
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keep_all() -> TokenizerConfig {
        TokenizerConfig {
            min_token_len: 1,
            ..TokenizerConfig::default()
        }
    }

    #[test]
    fn stopword_table_is_sorted() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lowercases_and_strips_punctuation() {
        assert_eq!(
            tokenize("The CAT, the cat.", &keep_all()),
            vec!["the", "cat", "the", "cat"]
        );
    }

    #[test]
    fn removes_stopwords_when_asked() {
        let config = TokenizerConfig {
            remove_stopwords: true,
            ..keep_all()
        };
        assert_eq!(tokenize("The CAT, the cat.", &config), vec!["cat", "cat"]);
    }

    #[test]
    fn empty_input_gives_no_tokens() {
        assert!(tokenize("", &TokenizerConfig::default()).is_empty());
        assert!(tokenize("  ,.;  ", &TokenizerConfig::default()).is_empty());
    }

    #[test]
    fn min_length_filter() {
        let tokens = tokenize("a bb ccc I x9", &TokenizerConfig::default());
        assert_eq!(tokens, vec!["bb", "ccc", "x9"]);
    }

    #[test]
    fn header_block_is_skipped() {
        let text = "From: someone@example.com\nSubject: Re: graphics\n\nbody text here\n";
        let config = TokenizerConfig {
            strip_headers: true,
            ..TokenizerConfig::default()
        };
        assert_eq!(tokenize(text, &config), vec!["body", "text", "here"]);
        assert!(tokenize("Subject: only headers", &config).is_empty());
    }

    #[test]
    fn non_ascii_letters_are_kept() {
        assert_eq!(
            tokenize("Über café", &TokenizerConfig::default()),
            vec!["über", "café"]
        );
    }
}
