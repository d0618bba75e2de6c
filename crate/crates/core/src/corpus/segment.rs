use std::ops::Range;

use super::{CorpusError, Sentence, Token};

pub const SENTENCE_MARKERS: [&str; 3] = [".", "?", "!"];

/// Token ranges of each sentence: a sentence closes at every marker token
/// and at the last token.
pub fn sentence_bounds<S: AsRef<str>>(tokens: &[S]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if SENTENCE_MARKERS.contains(&tok.as_ref()) || i + 1 == tokens.len() {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    out
}

pub fn segment_sentences(tokens: &[Token]) -> Result<Vec<Sentence>, CorpusError> {
    if tokens.is_empty() {
        return Err(CorpusError::DegeneratePassage);
    }
    let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    Ok(sentence_bounds(&texts)
        .into_iter()
        .enumerate()
        .map(|(index, r)| Sentence {
            index,
            char_span: (tokens[r.start].start, tokens[r.end - 1].end),
            tokens: tokens[r].iter().map(|t| t.text.clone()).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize_spans;
    use proptest::prelude::*;

    fn toks(xs: &[&str]) -> Vec<Token> {
        xs.iter()
            .enumerate()
            .map(|(i, t)| Token {
                text: t.to_string(),
                start: i,
                end: i + 1,
            })
            .collect()
    }

    #[test]
    fn markers_and_last_token_close_sentences() {
        let s = segment_sentences(&toks(&["a", ".", "b", "?", "c"])).unwrap();
        let got: Vec<Vec<String>> = s.iter().map(|s| s.tokens.clone()).collect();
        assert_eq!(got, vec![vec!["a", "."], vec!["b", "?"], vec!["c"]]);
        assert_eq!(s.iter().map(|s| s.index).collect::<Vec<_>>(), vec![0, 1, 2]);

        assert_eq!(segment_sentences(&toks(&["hello", "!"])).unwrap().len(), 1);
    }

    #[test]
    fn empty_is_degenerate() {
        assert!(matches!(
            segment_sentences(&[]),
            Err(CorpusError::DegeneratePassage)
        ));
    }

    #[test]
    fn spans_cover_sentence_text() {
        let text = "First one. Second? Third!  tail";
        let s = segment_sentences(&tokenize_spans(text, None)).unwrap();
        let spans: Vec<&str> = s.iter().map(|s| &text[s.char_span.0..s.char_span.1]).collect();
        assert_eq!(spans, vec!["First one.", "Second?", "Third!", "tail"]);
    }

    proptest! {
        #[test]
        fn concatenation_is_identity(
            raw in proptest::collection::vec(
                prop_oneof![Just("."), Just("?"), Just("!"), Just("w"), Just("x"), Just(",")],
                1..80,
            )
        ) {
            let tokens = toks(&raw);
            let sentences = segment_sentences(&tokens).unwrap();
            let joined: Vec<String> = sentences.iter().flat_map(|s| s.tokens.clone()).collect();
            prop_assert_eq!(joined, raw.iter().map(|s| s.to_string()).collect::<Vec<_>>());
            for (i, s) in sentences.iter().enumerate() {
                prop_assert_eq!(s.index, i);
                prop_assert!(!s.tokens.is_empty());
                // only the last token of a sentence may be a marker
                let inner = &s.tokens[..s.tokens.len() - 1];
                prop_assert!(inner.iter().all(|t| !SENTENCE_MARKERS.contains(&t.as_str())));
            }
        }
    }
}
