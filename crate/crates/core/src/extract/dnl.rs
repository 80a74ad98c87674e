//! Lexer for the `dnl` M4 macro, which discards everything that follows it
//! on the same line. Only a `dnl` at a word boundary counts; `dnlx` or
//! `_dnl` do not.

use super::{lines_keep_ends, RawEvent, Segment};

/// Scan the whole input for `dnl` comments; returns events plus the exact
/// code/comment segmentation.
pub(crate) fn scan_dnl(contents: &str) -> (Vec<RawEvent>, Vec<Segment>) {
    let mut events = Vec::new();
    let mut segments = Vec::new();

    for (idx, (line, term)) in lines_keep_ends(contents).iter().enumerate() {
        let lineno = idx + 1;
        match find_dnl(line) {
            Some(pos) => {
                if pos > 0 {
                    segments.push(Segment::code(&line[..pos]));
                }
                segments.push(Segment::comment(&line[pos..]));
                events.push(RawEvent {
                    start_line: lineno,
                    end_line: lineno,
                    text: line[pos + 3..].trim().to_string(),
                    full_line: line[..pos].trim().is_empty(),
                    mergeable: true,
                });
            }
            None => {
                if !line.is_empty() {
                    segments.push(Segment::code(*line));
                }
            }
        }
        if !term.is_empty() {
            segments.push(Segment::code(*term));
        }
    }

    (events, segments)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte offset of the first word-boundary `dnl` token, if any.
fn find_dnl(line: &str) -> Option<usize> {
    for (pos, _) in line.match_indices("dnl") {
        let before_ok = line[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !is_word_char(c));
        let after_ok = line[pos + 3..]
            .chars()
            .next()
            .is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            return Some(pos);
        }
    }
    None
}
