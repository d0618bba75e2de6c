use super::vocab::Vocabulary;

/// Longest word (in chars) WordPiece will try to split before giving up.
const MAX_WORD_CHARS: usize = 100;

/// A lowercased token with the byte span it came from in the raw text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace() && !c.is_control())
}

/// Whitespace split with every punctuation character broken out into its
/// own token. Everything is lowercased.
pub fn basic_tokens(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word_start: Option<usize> = None;

    let flush = |out: &mut Vec<Token>, start: Option<usize>, end: usize| {
        if let Some(s) = start {
            out.push(Token {
                text: text[s..end].to_lowercase(),
                start: s,
                end,
            });
        }
    };

    for (pos, c) in text.char_indices() {
        if c.is_whitespace() || c.is_control() {
            flush(&mut out, word_start.take(), pos);
        } else if is_punctuation(c) {
            flush(&mut out, word_start.take(), pos);
            let end = pos + c.len_utf8();
            out.push(Token {
                text: text[pos..end].to_lowercase(),
                start: pos,
                end,
            });
        } else if word_start.is_none() {
            word_start = Some(pos);
        }
    }
    flush(&mut out, word_start, text.len());
    out
}

/// Greedy longest-match-first subword split of one (already lowercased)
/// word. A word that cannot be fully covered becomes a single unknown unit.
pub fn wordpiece(word: &str, vocab: &Vocabulary) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return vec![vocab.unk().to_string()];
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut found = None;
        while start < end {
            let body: String = chars[start..end].iter().collect();
            let candidate = if start > 0 { format!("##{body}") } else { body };
            if vocab.contains(&candidate) {
                found = Some(candidate);
                break;
            }
            end -= 1;
        }
        match found {
            Some(piece) => {
                pieces.push(piece);
                start = end;
            }
            None => return vec![vocab.unk().to_string()],
        }
    }
    pieces
}

/// Tokenize with spans. With a vocabulary every word is further split
/// into subword units, each carrying the span of its source word.
pub fn tokenize_spans(text: &str, vocab: Option<&Vocabulary>) -> Vec<Token> {
    let words = basic_tokens(text);
    match vocab {
        None => words,
        Some(v) => words
            .into_iter()
            .flat_map(|w| {
                wordpiece(&w.text, v).into_iter().map(move |piece| Token {
                    text: piece,
                    start: w.start,
                    end: w.end,
                })
            })
            .collect(),
    }
}

pub fn tokenize(text: &str, vocab: Option<&Vocabulary>) -> Vec<String> {
    tokenize_spans(text, vocab).into_iter().map(|t| t.text).collect()
}

/// Subword-split tokens that were already produced by [`basic_tokens`].
pub fn subword_tokens<S: AsRef<str>>(words: &[S], vocab: &Vocabulary) -> Vec<String> {
    words
        .iter()
        .flat_map(|w| wordpiece(w.as_ref(), vocab))
        .collect()
}
