//! Word tokenization, spans and edit application.
//!
//! A token is a maximal run of alphanumeric characters and ASCII apostrophes.
//! Everything else (whitespace, punctuation) separates tokens but stays in
//! the raw text, so byte offsets of every token remain addressable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest text accepted by [`tokenize`], in bytes.
pub const MAX_INPUT_BYTES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub text: String,
    /// Inclusive byte offset into the source text.
    pub byte_start: usize,
    /// Exclusive byte offset into the source text.
    pub byte_end: usize,
    pub index: usize,
}

impl Token {
    /// Lowercased form used for lexicon, embedding and language-model lookups.
    pub fn folded(&self) -> String {
        fold(&self.text)
    }
}

/// Contiguous, half-open range of token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start_token: usize,
    pub end_token: usize,
}

impl Span {
    pub fn new(start_token: usize, end_token: usize) -> Self {
        Span {
            start_token,
            end_token,
        }
    }

    pub fn single(index: usize) -> Self {
        Span::new(index, index + 1)
    }

    pub fn len(&self) -> usize {
        self.end_token.saturating_sub(self.start_token)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    raw: String,
    tokens: Vec<Token>,
}

impl Document {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, index: usize) -> Result<&Token> {
        self.tokens.get(index).ok_or(Error::SpanOutOfBounds {
            start: index,
            end: index + 1,
            len: self.tokens.len(),
        })
    }

    /// Checks that `span` is non-empty and lies inside the document.
    pub fn check_span(&self, span: Span) -> Result<()> {
        if span.start_token < span.end_token && span.end_token <= self.tokens.len() {
            Ok(())
        } else {
            Err(Error::SpanOutOfBounds {
                start: span.start_token,
                end: span.end_token,
                len: self.tokens.len(),
            })
        }
    }

    pub fn span_tokens(&self, span: Span) -> Result<&[Token]> {
        self.check_span(span)?;
        Ok(&self.tokens[span.start_token..span.end_token])
    }

    /// Byte range covered by `span`, from its first token's start to its
    /// last token's end. Separators between the tokens are included.
    pub fn span_bytes(&self, span: Span) -> Result<(usize, usize)> {
        let tokens = self.span_tokens(span)?;
        Ok((tokens[0].byte_start, tokens[tokens.len() - 1].byte_end))
    }

    pub fn span_text(&self, span: Span) -> Result<&str> {
        let (start, end) = self.span_bytes(span)?;
        Ok(&self.raw[start..end])
    }
}

pub fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

pub fn fold(word: &str) -> String {
    word.to_lowercase()
}

/// Iterates over `(byte_start, byte_end)` of every token in `text`, without
/// any length limit.
pub fn token_ranges(text: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut chars = text.char_indices().peekable();
    std::iter::from_fn(move || {
        let start = loop {
            let (i, c) = chars.next()?;
            if is_token_char(c) {
                break i;
            }
        };
        let mut end = text.len();
        while let Some(&(i, c)) = chars.peek() {
            if !is_token_char(c) {
                end = i;
                break;
            }
            chars.next();
        }
        Some((start, end))
    })
}

/// Iterates over the token slices of `text`.
pub fn words(text: &str) -> impl Iterator<Item = &str> + '_ {
    token_ranges(text).map(move |(s, e)| &text[s..e])
}

pub fn tokenize(text: &str) -> Result<Document> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(Error::InputTooLarge {
            len: text.len(),
            max: MAX_INPUT_BYTES,
        });
    }
    let tokens = token_ranges(text)
        .enumerate()
        .map(|(index, (byte_start, byte_end))| Token {
            text: text[byte_start..byte_end].to_string(),
            byte_start,
            byte_end,
            index,
        })
        .collect();
    Ok(Document {
        raw: text.to_string(),
        tokens,
    })
}

/// Splices `replacement` over the bytes of `span` and returns the result as
/// raw text. An empty replacement deletes the span; the run of spaces left at
/// the junction collapses to a single space, or to nothing at either edge.
pub fn splice(doc: &Document, span: Span, replacement: &str) -> Result<String> {
    let (start, end) = doc.span_bytes(span)?;
    let (left, right) = (&doc.raw[..start], &doc.raw[end..]);
    if !replacement.is_empty() {
        let mut out = String::with_capacity(left.len() + replacement.len() + right.len());
        out.push_str(left);
        out.push_str(replacement);
        out.push_str(right);
        return Ok(out);
    }

    let l = left.trim_end_matches(' ');
    let r = right.trim_start_matches(' ');
    let had_space = l.len() < left.len() || r.len() < right.len();
    let needs_separator = had_space
        && !l.is_empty()
        && !r.is_empty()
        && !l.ends_with(char::is_whitespace)
        && !r.starts_with(char::is_whitespace);
    let mut out = String::with_capacity(l.len() + r.len() + 1);
    out.push_str(l);
    if needs_separator {
        out.push(' ');
    }
    out.push_str(r);
    Ok(out)
}

/// Returns a new document with `span` replaced by `replacement`.
pub fn apply_replacement(doc: &Document, span: Span, replacement: &str) -> Result<Document> {
    tokenize(&splice(doc, span, replacement)?)
}
