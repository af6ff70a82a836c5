//! Static template expansion from DSL trees to front-end source.
//!
//! Compilation is a pure tree homomorphism: the output of a subtree is a
//! contiguous substring of its parent's output, wrapped once in the document
//! preamble and postamble. The HTML target is fully realized; the native
//! Android/iOS targets emit well-formed skeleton markup.

mod templates;

pub use templates::builtin_templates;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::DslTree;

/// Compilation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Html,
    AndroidXml,
    IosStoryboard,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Html, Target::AndroidXml, Target::IosStoryboard];

    pub fn name(self) -> &'static str {
        match self {
            Target::Html => "html",
            Target::AndroidXml => "android-xml",
            Target::IosStoryboard => "ios-storyboard",
        }
    }

    /// Conventional file extension for emitted sources.
    pub fn extension(self) -> &'static str {
        match self {
            Target::Html => "html",
            Target::AndroidXml => "xml",
            Target::IosStoryboard => "storyboard",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "html" => Ok(Target::Html),
            "android-xml" => Ok(Target::AndroidXml),
            "ios-storyboard" => Ok(Target::IosStoryboard),
            other => Err(format!(
                "unknown target `{other}` (html|android-xml|ios-storyboard)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("no template for token `{token}` in target `{target}`")]
    MissingTemplate { target: String, token: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Open/close snippet pair for one token. Leaves leave `close` empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTemplate {
    pub open: String,
    #[serde(default)]
    pub close: String,
}

/// Every snippet needed to compile trees for one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetTemplateSet {
    pub target: String,
    pub preamble: String,
    pub postamble: String,
    pub tokens: BTreeMap<String, TokenTemplate>,
}

impl TargetTemplateSet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("template set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CodegenError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Compile a tree to source text for a built-in target.
pub fn compile(tree: &DslTree, target: Target) -> Result<String, CodegenError> {
    compile_with(tree, &builtin_templates(target))
}

/// Compile against an explicit template set (possibly loaded from JSON).
pub fn compile_with(tree: &DslTree, set: &TargetTemplateSet) -> Result<String, CodegenError> {
    let mut out = String::with_capacity(set.preamble.len() + set.postamble.len() + 64);
    out.push_str(&set.preamble);
    fragment(tree, set, &mut out)?;
    out.push_str(&set.postamble);
    Ok(out)
}

/// The subtree fragment alone, without preamble/postamble. Useful for
/// checking the substring homomorphism.
pub fn compile_fragment(tree: &DslTree, set: &TargetTemplateSet) -> Result<String, CodegenError> {
    let mut out = String::new();
    fragment(tree, set, &mut out)?;
    Ok(out)
}

fn fragment(node: &DslTree, set: &TargetTemplateSet, out: &mut String) -> Result<(), CodegenError> {
    let tpl = set
        .tokens
        .get(node.label())
        .ok_or_else(|| CodegenError::MissingTemplate {
            target: set.target.clone(),
            token: node.label().to_string(),
        })?;
    out.push_str(&tpl.open);
    for child in node.children() {
        fragment(child, set, out)?;
    }
    out.push_str(&tpl.close);
    Ok(())
}

/// A structural problem found in emitted source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Defect {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.message)
    }
}

/// Verify tag balance (all targets) and brace balance (HTML embeds CSS).
/// Compiled output must always come back clean.
pub fn check_wellformed(source: &str, target: Target) -> Vec<Defect> {
    let mut defects = Vec::new();
    let mut stack: Vec<(String, usize)> = Vec::new();
    let bytes = source.as_bytes();
    let mut i = 0usize;
    let mut brace_depth: i64 = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                let start = i;
                let Some(end) = source[i..].find('>').map(|e| i + e) else {
                    defects.push(Defect {
                        position: start,
                        message: "`<` without closing `>`".to_string(),
                    });
                    break;
                };
                let inner = &source[i + 1..end];
                if inner.starts_with('!') || inner.starts_with('?') {
                    // doctype / processing instruction
                } else if let Some(name) = inner.strip_prefix('/') {
                    let name = name.trim();
                    match stack.pop() {
                        Some((open, _)) if open == name => {}
                        Some((open, pos)) => defects.push(Defect {
                            position: start,
                            message: format!("`</{name}>` closes `<{open}>` opened at byte {pos}"),
                        }),
                        None => defects.push(Defect {
                            position: start,
                            message: format!("`</{name}>` has no matching open tag"),
                        }),
                    }
                } else if inner.ends_with('/') {
                    // self-closing
                } else {
                    let name: String = inner
                        .chars()
                        .take_while(|c| !c.is_whitespace())
                        .collect();
                    stack.push((name, start));
                }
                i = end + 1;
            }
            b'{' if target == Target::Html => {
                brace_depth += 1;
                i += 1;
            }
            b'}' if target == Target::Html => {
                brace_depth -= 1;
                if brace_depth < 0 {
                    defects.push(Defect {
                        position: i,
                        message: "`}` without matching `{`".to_string(),
                    });
                    brace_depth = 0;
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    for (name, pos) in stack {
        defects.push(Defect {
            position: pos,
            message: format!("`<{name}>` is never closed"),
        });
    }
    if brace_depth > 0 {
        defects.push(Defect {
            position: source.len(),
            message: format!("{brace_depth} unclosed `{{`"),
        });
    }
    defects
}
