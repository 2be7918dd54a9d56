/// Punctuation split off as standalone tokens.
pub const PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?', '(', ')', '/', '-'];

/// Lowercased tokens with punctuation detached. Never contains empty tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds from pre-split tokens, lowercasing and dropping empties.
    pub fn from_tokens<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Self {
        TokenSeq(
            tokens
                .into_iter()
                .map(|t| t.as_ref().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }
}

pub fn tokenize(text: &str) -> TokenSeq {
    let mut spaced = String::with_capacity(text.len() + 8);
    for ch in text.chars() {
        if PUNCTUATION.contains(&ch) {
            spaced.push(' ');
            spaced.push(ch);
            spaced.push(' ');
        } else {
            spaced.push(ch);
        }
    }
    TokenSeq(
        spaced
            .to_lowercase()
            .split_whitespace()
            .map(str::to_string)
            .collect(),
    )
}
