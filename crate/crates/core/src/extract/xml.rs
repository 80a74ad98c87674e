//! Token-based scanner for XML block comments. No tree is built, so
//! malformed markup elsewhere never blocks comment extraction; the only
//! error is an unterminated `<!--`. Comment lookalikes inside CDATA
//! sections are not comments.

use crate::error::{Error, Result};

use super::{RawEvent, Segment};

/// Scan the input for `<!-- ... -->` regions outside CDATA. `file` is only
/// used to label errors.
pub(crate) fn scan_xml(contents: &str, file: &str) -> Result<(Vec<RawEvent>, Vec<Segment>)> {
    let bytes = contents.as_bytes();
    let mut events = Vec::new();
    let mut segments = Vec::new();
    let mut line = 1usize;
    let mut i = 0usize;
    let mut code_start = 0usize;

    while i < bytes.len() {
        // Both tokens start with ASCII '<', so slicing below always lands
        // on a character boundary.
        if bytes[i] != b'<' {
            if bytes[i] == b'\n' {
                line += 1;
            }
            i += 1;
            continue;
        }
        if contents[i..].starts_with("<!--") {
            let start_line = line;
            let inner_start = i + 4;
            let Some(rel) = contents[inner_start..].find("-->") else {
                return Err(Error::Extract {
                    file: file.to_string(),
                    line: start_line,
                    message: "unterminated XML comment".into(),
                });
            };
            let inner_end = inner_start + rel;
            let region_end = inner_end + 3;
            if i > code_start {
                segments.push(Segment::code(&contents[code_start..i]));
            }
            segments.push(Segment::comment(&contents[i..region_end]));
            let inner = &contents[inner_start..inner_end];
            let end_line = line + newline_count(inner);
            events.push(RawEvent {
                start_line,
                end_line,
                text: trim_joined(inner),
                full_line: true,
                mergeable: false,
            });
            line = end_line + newline_count(&contents[inner_end..region_end]);
            i = region_end;
            code_start = region_end;
        } else if contents[i..].starts_with("<![CDATA[") {
            let after = i + 9;
            let end = contents[after..]
                .find("]]>")
                .map(|rel| after + rel + 3)
                .unwrap_or(contents.len());
            line += newline_count(&contents[i..end]);
            i = end;
        } else {
            i += 1;
        }
    }
    if code_start < contents.len() {
        segments.push(Segment::code(&contents[code_start..]));
    }
    Ok((events, segments))
}

fn newline_count(s: &str) -> usize {
    s.bytes().filter(|&b| b == b'\n').count()
}

/// Per-line trim of the inner text, joined back with newlines; fully blank
/// leading/trailing lines are dropped.
fn trim_joined(inner: &str) -> String {
    let trimmed: Vec<&str> = inner.lines().map(str::trim).collect();
    let first = trimmed.iter().position(|l| !l.is_empty());
    let last = trimmed.iter().rposition(|l| !l.is_empty());
    match (first, last) {
        (Some(a), Some(b)) => trimmed[a..=b].join("\n"),
        _ => String::new(),
    }
}
