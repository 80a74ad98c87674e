//! Shared domain types: build tools, comment syntaxes, and extracted comments.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Build-system family a specification file belongs to, determined solely by
/// filename convention.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BuildTool {
    Autotools,
    Cmake,
    Maven,
    Ant,
    Ivy,
}

impl BuildTool {
    /// All tools in the fixed column order used by tabular artifacts.
    pub const ALL: [BuildTool; 5] = [
        BuildTool::Autotools,
        BuildTool::Cmake,
        BuildTool::Maven,
        BuildTool::Ant,
        BuildTool::Ivy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BuildTool::Autotools => "AUTOTOOLS",
            BuildTool::Cmake => "CMAKE",
            BuildTool::Maven => "MAVEN",
            BuildTool::Ant => "ANT",
            BuildTool::Ivy => "IVY",
        }
    }
}

impl fmt::Display for BuildTool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lexical form the comment was written in.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CommentSyntax {
    Hash,
    Dnl,
    XmlBlock,
}

impl CommentSyntax {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommentSyntax::Hash => "HASH",
            CommentSyntax::Dnl => "DNL",
            CommentSyntax::XmlBlock => "XML_BLOCK",
        }
    }
}

impl fmt::Display for CommentSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One comment in one build-specification file.
///
/// `(repo_id, relative_path, start_line, syntax)` is unique within a corpus
/// and [`SourceComment::comment_id`] renders that key as a stable string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceComment {
    pub repo_id: String,
    pub relative_path: String,
    pub build_tool: BuildTool,
    /// 1-based first physical line of the comment.
    pub start_line: usize,
    /// 1-based last physical line, >= start_line.
    pub end_line: usize,
    /// Comment text with marker characters stripped; inner whitespace kept.
    pub raw_text: String,
    pub syntax: CommentSyntax,
}

impl SourceComment {
    /// Stable identifier derived from the uniqueness key.
    pub fn comment_id(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.repo_id, self.relative_path, self.start_line, self.syntax
        )
    }
}

/// Non-fatal event recorded while processing a corpus (skipped symlink
/// cycles, dropped zero vectors, groups without usable context, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarningRecord {
    /// Pipeline area that produced the warning, e.g. `scan` or `context`.
    pub scope: String,
    /// Object the warning refers to (path, comment id, group id).
    pub subject: String,
    pub message: String,
}

impl WarningRecord {
    pub fn new(
        scope: impl Into<String>,
        subject: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        WarningRecord {
            scope: scope.into(),
            subject: subject.into(),
            message: message.into(),
        }
    }
}
