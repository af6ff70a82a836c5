//! Per-platform grammars over the closed token alphabet.
//!
//! Container tokens are shared (`body`, `stack`, `row`, `footer`); control
//! tokens differ per platform. A pruned grammar restricts each row and the
//! footer to a fixed table of admissible control sequences; the unpruned
//! grammar only bounds the control count per block.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::DslTree;

/// Target platform of a GUI image and its DSL dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Web,
    Ios,
    Android,
}

impl Platform {
    pub const ALL: [Platform; 3] = [Platform::Web, Platform::Ios, Platform::Android];

    pub fn name(self) -> &'static str {
        match self {
            Platform::Web => "web",
            Platform::Ios => "ios",
            Platform::Android => "android",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "web" => Ok(Platform::Web),
            "ios" => Ok(Platform::Ios),
            "android" => Ok(Platform::Android),
            other => Err(format!("unknown platform `{other}` (web|ios|android)")),
        }
    }
}

pub const TOKEN_BODY: &str = "body";
pub const TOKEN_STACK: &str = "stack";
pub const TOKEN_ROW: &str = "row";
pub const TOKEN_FOOTER: &str = "footer";

/// Every token any platform grammar may use. `parse` accepts exactly these.
pub const UNION_ALPHABET: &[&str] = &[
    "body",
    "stack",
    "row",
    "footer",
    // web row controls
    "title",
    "text",
    "btn",
    "img",
    // ios / android row controls
    "label",
    "switch",
    "slider",
    "check",
    "rating",
    // web footer links
    "link-home",
    "link-about",
    "link-contact",
    // ios footer buttons
    "btn-home",
    "btn-search",
    "btn-contact",
    "btn-download",
    // android footer tabs
    "tab-home",
    "tab-search",
    "tab-profile",
    "tab-settings",
];

pub(crate) fn in_union_alphabet(token: &str) -> bool {
    UNION_ALPHABET.contains(&token)
}

const WEB_ROW_CONTROLS: &[&str] = &["title", "text", "btn", "img"];
const WEB_FOOTER_CONTROLS: &[&str] = &["link-home", "link-about", "link-contact"];
const IOS_ROW_CONTROLS: &[&str] = &["label", "btn", "switch", "slider", "img"];
const IOS_FOOTER_CONTROLS: &[&str] = &["btn-home", "btn-search", "btn-contact", "btn-download"];
const ANDROID_ROW_CONTROLS: &[&str] = &["label", "btn", "check", "slider", "img", "rating"];
const ANDROID_FOOTER_CONTROLS: &[&str] = &["tab-home", "tab-search", "tab-profile", "tab-settings"];

/// Pruned row tables. Sequences are ordered; every pattern has 2..=4
/// controls and sliders never appear outside a `label slider label` group.
const WEB_ROW_PATTERNS: &[&[&str]] = &[
    &["title", "text"],
    &["text", "btn"],
    &["img", "text"],
    &["title", "text", "btn"],
    &["img", "title", "text"],
    &["img", "title", "text", "btn"],
];

const IOS_ROW_PATTERNS: &[&[&str]] = &[
    &["label", "btn"],
    &["label", "switch"],
    &["img", "label"],
    &["btn", "switch"],
    &["label", "slider", "label"],
    &["img", "label", "btn"],
    &["img", "label", "btn", "switch"],
];

const ANDROID_ROW_PATTERNS: &[&[&str]] = &[
    &["label", "btn"],
    &["label", "check"],
    &["img", "label"],
    &["label", "rating"],
    &["check", "btn"],
    &["label", "slider", "label"],
    &["img", "label", "btn"],
    &["label", "check", "btn"],
    &["img", "label", "check", "btn"],
];

const WEB_FOOTER_PATTERNS: &[&[usize]] = &[
    &[0, 1],
    &[0, 2],
    &[1, 2],
    &[1, 0],
    &[2, 0],
    &[2, 1],
    &[0, 1, 2],
    &[1, 2, 0],
    &[2, 0, 1],
    &[0, 2, 1],
];

/// Shared footer index table for the four-control platforms (ios, android).
const QUAD_FOOTER_PATTERNS: &[&[usize]] = &[
    &[0, 1],
    &[0, 2],
    &[0, 3],
    &[1, 2],
    &[1, 3],
    &[2, 3],
    &[1, 0],
    &[2, 0],
    &[3, 0],
    &[2, 1],
    &[3, 1],
    &[0, 1, 2],
    &[0, 1, 3],
    &[0, 2, 3],
    &[1, 2, 3],
    &[0, 1, 2, 3],
];

/// Control-count bounds for unpruned blocks. Pruned tables carry 2..=4
/// controls by construction.
const UNPRUNED_MIN_CONTROLS: usize = 1;
const UNPRUNED_MAX_CONTROLS: usize = 4;

/// Structural rules for one platform, pruned or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    platform: Platform,
    pruned: bool,
    max_rows: usize,
    has_stack: bool,
    row_controls: Vec<&'static str>,
    footer_controls: Vec<&'static str>,
    row_patterns: Vec<Vec<&'static str>>,
    footer_patterns: Vec<Vec<&'static str>>,
}

impl Grammar {
    pub fn for_platform(platform: Platform, pruned: bool) -> Self {
        let (row_controls, footer_controls, row_tbl, footer_idx, max_rows, has_stack) =
            match platform {
                Platform::Web => (
                    WEB_ROW_CONTROLS,
                    WEB_FOOTER_CONTROLS,
                    WEB_ROW_PATTERNS,
                    WEB_FOOTER_PATTERNS,
                    5,
                    false,
                ),
                Platform::Ios => (
                    IOS_ROW_CONTROLS,
                    IOS_FOOTER_CONTROLS,
                    IOS_ROW_PATTERNS,
                    QUAD_FOOTER_PATTERNS,
                    8,
                    true,
                ),
                Platform::Android => (
                    ANDROID_ROW_CONTROLS,
                    ANDROID_FOOTER_CONTROLS,
                    ANDROID_ROW_PATTERNS,
                    QUAD_FOOTER_PATTERNS,
                    8,
                    true,
                ),
            };
        let footer_patterns = footer_idx
            .iter()
            .map(|ix| ix.iter().map(|&i| footer_controls[i]).collect())
            .collect();
        Self {
            platform,
            pruned,
            max_rows,
            has_stack,
            row_controls: row_controls.to_vec(),
            footer_controls: footer_controls.to_vec(),
            row_patterns: row_tbl.iter().map(|p| p.to_vec()).collect(),
            footer_patterns,
        }
    }

    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn pruned(&self) -> bool {
        self.pruned
    }

    pub fn max_rows(&self) -> usize {
        self.max_rows
    }

    /// Whether rows live under a `stack` container instead of directly under
    /// `body`.
    pub fn has_stack(&self) -> bool {
        self.has_stack
    }

    pub fn row_controls(&self) -> &[&'static str] {
        &self.row_controls
    }

    pub fn footer_controls(&self) -> &[&'static str] {
        &self.footer_controls
    }

    /// Admissible row control sequences in bit order (pruned grammars only).
    pub fn row_patterns(&self) -> &[Vec<&'static str>] {
        &self.row_patterns
    }

    /// Admissible footer control sequences in bit order (pruned grammars only).
    pub fn footer_patterns(&self) -> &[Vec<&'static str>] {
        &self.footer_patterns
    }

    fn row_sequence_admissible(&self, tokens: &[&str]) -> bool {
        if self.pruned {
            self.row_patterns.iter().any(|p| p.as_slice() == tokens)
        } else {
            (UNPRUNED_MIN_CONTROLS..=UNPRUNED_MAX_CONTROLS).contains(&tokens.len())
                && tokens.iter().all(|t| self.row_controls.contains(t))
        }
    }

    fn footer_sequence_admissible(&self, tokens: &[&str]) -> bool {
        if self.pruned {
            self.footer_patterns.iter().any(|p| p.as_slice() == tokens)
        } else {
            (UNPRUNED_MIN_CONTROLS..=UNPRUNED_MAX_CONTROLS).contains(&tokens.len())
                && tokens.iter().all(|t| self.footer_controls.contains(t))
        }
    }

    /// Check a tree against this grammar. Empty result means the tree is
    /// valid; violations are data, not errors.
    pub fn validate(&self, tree: &DslTree) -> Vec<Violation> {
        let mut out = Vec::new();
        if tree.label() != TOKEN_BODY {
            out.push(Violation::WrongRoot {
                found: tree.label().to_string(),
            });
            return out;
        }

        let (rows, footer) = if self.has_stack {
            let mut rows: &[DslTree] = &[];
            let mut footer = None;
            match tree.children() {
                [stack, foot] if stack.label() == TOKEN_STACK && foot.label() == TOKEN_FOOTER => {
                    rows = stack.children();
                    footer = Some(foot);
                }
                _ => out.push(Violation::BadBodyShape {
                    expected: "stack footer",
                }),
            }
            (rows, footer)
        } else {
            match tree.children() {
                [head @ .., foot] if foot.label() == TOKEN_FOOTER => (head, Some(foot)),
                _ => {
                    out.push(Violation::BadBodyShape {
                        expected: "row... footer",
                    });
                    (&[] as &[DslTree], None)
                }
            }
        };

        if footer.is_some() {
            if rows.is_empty() {
                out.push(Violation::NoRows);
            }
            if rows.len() > self.max_rows {
                out.push(Violation::TooManyRows {
                    found: rows.len(),
                    max: self.max_rows,
                });
            }
            for (i, row) in rows.iter().enumerate() {
                if row.label() != TOKEN_ROW {
                    out.push(Violation::UnexpectedChild {
                        parent: if self.has_stack { TOKEN_STACK } else { TOKEN_BODY }.to_string(),
                        child: row.label().to_string(),
                    });
                    continue;
                }
                self.check_block(row, i + 1, true, &mut out);
            }
            if let Some(foot) = footer {
                self.check_block(foot, 0, false, &mut out);
            }
        }
        out
    }

    fn check_block(&self, block: &DslTree, row: usize, is_row: bool, out: &mut Vec<Violation>) {
        let mut tokens = Vec::with_capacity(block.children().len());
        for child in block.children() {
            if !child.children().is_empty() {
                out.push(Violation::LeafWithChildren {
                    label: child.label().to_string(),
                });
                return;
            }
            let allowed = if is_row {
                &self.row_controls
            } else {
                &self.footer_controls
            };
            if !allowed.contains(&child.label()) {
                out.push(Violation::UnknownToken {
                    parent: block.label().to_string(),
                    label: child.label().to_string(),
                });
                return;
            }
            tokens.push(child.label());
        }
        let admissible = if is_row {
            self.row_sequence_admissible(&tokens)
        } else {
            self.footer_sequence_admissible(&tokens)
        };
        if !admissible {
            let pattern = tokens.iter().map(|t| t.to_string()).collect();
            if is_row {
                out.push(Violation::RowPatternNotAdmissible { row, pattern });
            } else {
                out.push(Violation::FooterPatternNotAdmissible { pattern });
            }
        }
    }

    /// `validate` returned no violations.
    pub fn accepts(&self, tree: &DslTree) -> bool {
        self.validate(tree).is_empty()
    }

    pub(crate) fn max_block_controls(&self) -> usize {
        UNPRUNED_MAX_CONTROLS
    }

    /// Reduced pruned grammar for enumeration tests.
    #[cfg(test)]
    pub(crate) fn custom_for_tests(
        row_patterns: Vec<Vec<&'static str>>,
        footer_patterns: Vec<Vec<&'static str>>,
        max_rows: usize,
    ) -> Self {
        let mut row_controls: Vec<&'static str> = Vec::new();
        for p in &row_patterns {
            for t in p {
                if !row_controls.contains(t) {
                    row_controls.push(t);
                }
            }
        }
        let mut footer_controls: Vec<&'static str> = Vec::new();
        for p in &footer_patterns {
            for t in p {
                if !footer_controls.contains(t) {
                    footer_controls.push(t);
                }
            }
        }
        Self {
            platform: Platform::Web,
            pruned: true,
            max_rows,
            has_stack: false,
            row_controls,
            footer_controls,
            row_patterns,
            footer_patterns,
        }
    }
}

/// One way a tree fails its grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongRoot { found: String },
    BadBodyShape { expected: &'static str },
    UnexpectedChild { parent: String, child: String },
    UnknownToken { parent: String, label: String },
    LeafWithChildren { label: String },
    NoRows,
    TooManyRows { found: usize, max: usize },
    RowPatternNotAdmissible { row: usize, pattern: Vec<String> },
    FooterPatternNotAdmissible { pattern: Vec<String> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongRoot { found } => write!(f, "root must be `body`, found `{found}`"),
            Violation::BadBodyShape { expected } => {
                write!(f, "body must contain `{expected}`")
            }
            Violation::UnexpectedChild { parent, child } => {
                write!(f, "`{parent}` does not admit `{child}`")
            }
            Violation::UnknownToken { parent, label } => {
                write!(f, "`{label}` is not a control of `{parent}` on this platform")
            }
            Violation::LeafWithChildren { label } => {
                write!(f, "control `{label}` cannot have children")
            }
            Violation::NoRows => write!(f, "layout needs at least one row"),
            Violation::TooManyRows { found, max } => {
                write!(f, "{found} rows exceed the maximum of {max}")
            }
            Violation::RowPatternNotAdmissible { row, pattern } => {
                write!(f, "row {row} pattern `{}` is not admissible", pattern.join(" "))
            }
            Violation::FooterPatternNotAdmissible { pattern } => {
                write!(f, "footer pattern `{}` is not admissible", pattern.join(" "))
            }
        }
    }
}
