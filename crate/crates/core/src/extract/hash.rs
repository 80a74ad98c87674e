//! Lexer for `#` line comments with quote awareness and optional CMake
//! `#[[ ... ]]` bracket comments.
//!
//! Quote state: `"` and `'` open string regions in which `#` is literal;
//! backslash escapes the next character outside single quotes; unterminated
//! quotes close at end of line. Scanning is byte-wise, which is safe on
//! UTF-8 because every byte we match on is ASCII.

use super::{lines_keep_ends, strip_hash_marker, RawEvent, Segment};

struct BracketAcc {
    start_line: usize,
    full_line: bool,
    lines: Vec<String>,
}

/// Scan the whole input; returns comment events plus the exact
/// code/comment segmentation.
pub(crate) fn scan_hash(contents: &str, bracket_comments: bool) -> (Vec<RawEvent>, Vec<Segment>) {
    let mut events = Vec::new();
    let mut segments = Vec::new();
    let mut open: Option<BracketAcc> = None;

    for (idx, (line, term)) in lines_keep_ends(contents).iter().enumerate() {
        let lineno = idx + 1;
        let mut cursor = 0usize;
        let mut code_seen = false;

        if let Some(acc) = open.as_mut() {
            if let Some(pos) = line.find("]]") {
                acc.lines.push(line[..pos].trim().to_string());
                segments.push(Segment::comment(&line[..pos + 2]));
                let acc = open.take().unwrap();
                events.push(RawEvent {
                    start_line: acc.start_line,
                    end_line: lineno,
                    text: acc.lines.join("\n"),
                    full_line: acc.full_line,
                    mergeable: false,
                });
                cursor = pos + 2;
            } else {
                acc.lines.push(line.trim().to_string());
                segments.push(Segment::comment(*line));
                if !term.is_empty() {
                    segments.push(Segment::code(*term));
                }
                continue;
            }
        }

        scan_line(
            line,
            cursor,
            lineno,
            bracket_comments,
            &mut code_seen,
            &mut open,
            &mut events,
            &mut segments,
        );
        if !term.is_empty() {
            segments.push(Segment::code(*term));
        }
    }

    // Unterminated bracket comment: lexing is total, close at EOF.
    if let Some(acc) = open.take() {
        let end = acc.start_line + acc.lines.len() - 1;
        events.push(RawEvent {
            start_line: acc.start_line,
            end_line: end,
            text: acc.lines.join("\n"),
            full_line: acc.full_line,
            mergeable: false,
        });
    }

    (events, segments)
}

#[allow(clippy::too_many_arguments)]
fn scan_line(
    line: &str,
    mut cursor: usize,
    lineno: usize,
    bracket_comments: bool,
    code_seen: &mut bool,
    open: &mut Option<BracketAcc>,
    events: &mut Vec<RawEvent>,
    segments: &mut Vec<Segment>,
) {
    let bytes = line.as_bytes();
    loop {
        let mut quote: Option<u8> = None;
        let mut i = cursor;
        let mut marker: Option<usize> = None;
        while i < bytes.len() {
            let b = bytes[i];
            match quote {
                Some(q) => {
                    if b == b'\\' && q == b'"' {
                        i += 2;
                        continue;
                    }
                    if b == q {
                        quote = None;
                    }
                    i += 1;
                }
                None => match b {
                    b'\\' => i += 2,
                    b'"' | b'\'' => {
                        quote = Some(b);
                        i += 1;
                    }
                    b'#' => {
                        marker = Some(i);
                        break;
                    }
                    _ => i += 1,
                },
            }
        }

        let Some(pos) = marker else {
            if cursor < line.len() {
                if !line[cursor..].trim().is_empty() {
                    *code_seen = true;
                }
                segments.push(Segment::code(&line[cursor..]));
            }
            return;
        };

        if !line[cursor..pos].trim().is_empty() {
            *code_seen = true;
        }
        if pos > cursor {
            segments.push(Segment::code(&line[cursor..pos]));
        }
        let full_line = !*code_seen;

        if bracket_comments && line[pos..].starts_with("#[[") {
            let inner_start = pos + 3;
            if let Some(rel) = line[inner_start..].find("]]") {
                let inner_end = inner_start + rel;
                segments.push(Segment::comment(&line[pos..inner_end + 2]));
                events.push(RawEvent {
                    start_line: lineno,
                    end_line: lineno,
                    text: line[inner_start..inner_end].trim().to_string(),
                    full_line,
                    mergeable: false,
                });
                cursor = inner_end + 2;
                continue;
            }
            segments.push(Segment::comment(&line[pos..]));
            *open = Some(BracketAcc {
                start_line: lineno,
                full_line,
                lines: vec![line[inner_start..].trim().to_string()],
            });
            return;
        }

        segments.push(Segment::comment(&line[pos..]));
        events.push(RawEvent {
            start_line: lineno,
            end_line: lineno,
            text: strip_hash_marker(&line[pos..]),
            full_line,
            mergeable: true,
        });
        return;
    }
}
