//! Comment lexers for build-specification files.
//!
//! Three lexers cover the studied families: `#` line comments (CMake,
//! Autotools, including CMake `#[[ ... ]]` bracket comments), `dnl` M4
//! macro comments, and XML block comments. Lexing is token-based and total:
//! arbitrary byte input (after lossy UTF-8 decoding) never panics, and the
//! only reported error is an unterminated XML comment.
//!
//! Every lexer can also emit an exact segmentation of the input
//! ([`split_segments`]): concatenating the segments reproduces the input
//! byte-for-byte, which is the invariant the robustness tests lean on.

mod dnl;
mod hash;
mod xml;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BuildTool, CommentSyntax, SourceComment};

/// Extraction knobs. Merging of adjacent full-line comments is on by
/// default; the boundary is any non-comment or blank line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub merge_adjacent: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            merge_adjacent: true,
        }
    }
}

/// Which lexer to run over a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexerKind {
    Hash { bracket_comments: bool },
    Dnl,
    Xml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Code,
    Comment,
}

/// A contiguous piece of the input, labeled code or comment. The
/// concatenation of all segments equals the input exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub text: String,
}

impl Segment {
    pub(crate) fn code(text: impl Into<String>) -> Self {
        Segment {
            kind: SegmentKind::Code,
            text: text.into(),
        }
    }

    pub(crate) fn comment(text: impl Into<String>) -> Self {
        Segment {
            kind: SegmentKind::Comment,
            text: text.into(),
        }
    }
}

/// One comment occurrence before merging, as produced by a lexer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawEvent {
    pub start_line: usize,
    pub end_line: usize,
    /// Marker-stripped text, per-line trimmed; merged lines joined by \n.
    pub text: String,
    /// True when only whitespace precedes the marker on the start line.
    pub full_line: bool,
    /// Single-line `#`/`dnl` events merge with adjacent ones; bracket and
    /// XML block events never do.
    pub mergeable: bool,
}

/// Split the input into code/comment segments under one lexer.
pub fn split_segments(contents: &str, lexer: LexerKind) -> Result<Vec<Segment>> {
    match lexer {
        LexerKind::Hash { bracket_comments } => {
            Ok(hash::scan_hash(contents, bracket_comments).1)
        }
        LexerKind::Dnl => Ok(dnl::scan_dnl(contents).1),
        LexerKind::Xml => xml::scan_xml(contents, "<input>").map(|(_, segs)| segs),
    }
}

/// `#` comments for CMake and Autotools files. CMake additionally gets
/// `#[[ ... ]]` bracket comments.
pub fn extract_comments_hash(
    repo_id: &str,
    relative_path: &str,
    tool: BuildTool,
    contents: &str,
    opts: &ExtractOptions,
) -> Vec<SourceComment> {
    let bracket = tool == BuildTool::Cmake;
    let (events, _) = hash::scan_hash(contents, bracket);
    assemble(repo_id, relative_path, tool, CommentSyntax::Hash, events, opts)
}

/// `dnl` comments for Autotools-family files.
pub fn extract_comments_dnl(
    repo_id: &str,
    relative_path: &str,
    contents: &str,
    opts: &ExtractOptions,
) -> Vec<SourceComment> {
    let (events, _) = dnl::scan_dnl(contents);
    assemble(
        repo_id,
        relative_path,
        BuildTool::Autotools,
        CommentSyntax::Dnl,
        events,
        opts,
    )
}

/// `<!-- ... -->` comments for XML build files. Regions inside CDATA
/// sections are not comments; an unterminated `<!--` is an error naming the
/// file and line.
pub fn extract_comments_xml(
    repo_id: &str,
    relative_path: &str,
    tool: BuildTool,
    contents: &str,
) -> Result<Vec<SourceComment>> {
    let file = format!("{repo_id}:{relative_path}");
    let (events, _) = xml::scan_xml(contents, &file)?;
    Ok(assemble(
        repo_id,
        relative_path,
        tool,
        CommentSyntax::XmlBlock,
        events,
        &ExtractOptions {
            merge_adjacent: false,
        },
    ))
}

/// Dispatch to the lexer(s) for a build tool; Autotools files get both the
/// hash and the dnl pass. Output is sorted by start line.
pub fn extract_comments_raw(
    repo_id: &str,
    relative_path: &str,
    tool: BuildTool,
    contents: &str,
    opts: &ExtractOptions,
) -> Result<Vec<SourceComment>> {
    let mut comments = match tool {
        BuildTool::Cmake => extract_comments_hash(repo_id, relative_path, tool, contents, opts),
        BuildTool::Autotools => {
            let mut v = extract_comments_hash(repo_id, relative_path, tool, contents, opts);
            v.extend(extract_comments_dnl(repo_id, relative_path, contents, opts));
            v
        }
        BuildTool::Maven | BuildTool::Ant | BuildTool::Ivy => {
            extract_comments_xml(repo_id, relative_path, tool, contents)?
        }
    };
    comments.sort_by(|a, b| {
        a.start_line
            .cmp(&b.start_line)
            .then_with(|| a.syntax.cmp(&b.syntax))
    });
    Ok(comments)
}

/// Dispatcher over a scanned build-file record.
pub fn extract_comments(
    file: &crate::corpus::BuildFileRecord,
    contents: &str,
    opts: &ExtractOptions,
) -> Result<Vec<SourceComment>> {
    extract_comments_raw(
        &file.repo_id,
        &file.relative_path,
        file.build_tool,
        contents,
        opts,
    )
}

/// Read a file with lossy UTF-8 decoding; real corpora mix encodings.
pub fn read_lossy(path: &std::path::Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Merge adjacent full-line events and materialize [`SourceComment`]s.
fn assemble(
    repo_id: &str,
    relative_path: &str,
    tool: BuildTool,
    syntax: CommentSyntax,
    mut events: Vec<RawEvent>,
    opts: &ExtractOptions,
) -> Vec<SourceComment> {
    events.sort_by_key(|e| e.start_line);
    let mut out: Vec<SourceComment> = Vec::new();
    let mut acc: Option<RawEvent> = None;

    let flush = |acc: &mut Option<RawEvent>, out: &mut Vec<SourceComment>| {
        if let Some(e) = acc.take() {
            out.push(SourceComment {
                repo_id: repo_id.to_string(),
                relative_path: relative_path.to_string(),
                build_tool: tool,
                start_line: e.start_line,
                end_line: e.end_line,
                raw_text: e.text,
                syntax,
            });
        }
    };

    for event in events {
        let can_merge = opts.merge_adjacent && event.mergeable && event.full_line;
        if can_merge {
            if let Some(prev) = acc.as_mut() {
                if prev.mergeable && prev.full_line && event.start_line == prev.end_line + 1 {
                    prev.end_line = event.end_line;
                    prev.text.push('\n');
                    prev.text.push_str(&event.text);
                    continue;
                }
            }
            flush(&mut acc, &mut out);
            acc = Some(event);
        } else {
            flush(&mut acc, &mut out);
            acc = Some(event);
            flush(&mut acc, &mut out);
        }
    }
    flush(&mut acc, &mut out);
    out
}

/// Split text into lines keeping terminators separate, so scanners can work
/// on terminator-free lines while segments still reconstruct the input.
pub(crate) fn lines_keep_ends(text: &str) -> Vec<(&str, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            let (line, term) = if i > start && bytes[i - 1] == b'\r' {
                (&text[start..i - 1], &text[i - 1..=i])
            } else {
                (&text[start..i], &text[i..=i])
            };
            out.push((line, term));
            start = i + 1;
        }
        i += 1;
    }
    if start < text.len() {
        out.push((&text[start..], ""));
    }
    out
}

/// Strip the leading run of marker characters and surrounding whitespace
/// from one physical comment line.
pub(crate) fn strip_hash_marker(s: &str) -> String {
    s.trim_start_matches('#').trim().to_string()
}
