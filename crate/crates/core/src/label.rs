//! The six-way site label scheme and its three-way consolidation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Raw six-way veracity label as published by the fact-checking site.
///
/// Serializes as a snake_case string; deserialization is lenient and
/// accepts any display variant ("Pants on Fire!", "mostly-true", ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RawLabel {
    True,
    MostlyTrue,
    HalfTrue,
    MostlyFalse,
    False,
    PantsOnFire,
}

impl TryFrom<String> for RawLabel {
    type Error = CoreError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RawLabel> for String {
    fn from(label: RawLabel) -> String {
        match label {
            RawLabel::True => "true",
            RawLabel::MostlyTrue => "mostly_true",
            RawLabel::HalfTrue => "half_true",
            RawLabel::MostlyFalse => "mostly_false",
            RawLabel::False => "false",
            RawLabel::PantsOnFire => "pants_on_fire",
        }
        .to_string()
    }
}

impl RawLabel {
    pub const ALL: [RawLabel; 6] = [
        RawLabel::True,
        RawLabel::MostlyTrue,
        RawLabel::HalfTrue,
        RawLabel::MostlyFalse,
        RawLabel::False,
        RawLabel::PantsOnFire,
    ];

    /// Display name as used on the site and in prompts.
    pub fn display_name(&self) -> &'static str {
        match self {
            RawLabel::True => "True",
            RawLabel::MostlyTrue => "Mostly True",
            RawLabel::HalfTrue => "Half True",
            RawLabel::MostlyFalse => "Mostly False",
            RawLabel::False => "False",
            RawLabel::PantsOnFire => "Pants on Fire",
        }
    }
}

impl fmt::Display for RawLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for RawLabel {
    type Err = CoreError;

    /// Case-insensitive; punctuation and hyphen variants such as
    /// "Pants on Fire!" or "pants-fire" are accepted. "Barely True" is the
    /// site's legacy name for Mostly False and maps accordingly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label_text(s).as_str() {
            "true" => Ok(RawLabel::True),
            "mostly true" => Ok(RawLabel::MostlyTrue),
            "half true" => Ok(RawLabel::HalfTrue),
            "mostly false" | "barely true" => Ok(RawLabel::MostlyFalse),
            "false" => Ok(RawLabel::False),
            "pants on fire" | "pants fire" => Ok(RawLabel::PantsOnFire),
            _ => Err(CoreError::UnknownLabel(s.to_string())),
        }
    }
}

/// Three-way consolidated veracity label.
///
/// The ordering `True < HalfTrue < False` is the reporting order used by
/// every table and CSV export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsolidatedLabel {
    True,
    HalfTrue,
    False,
}

impl ConsolidatedLabel {
    pub const ALL: [ConsolidatedLabel; 3] = [
        ConsolidatedLabel::True,
        ConsolidatedLabel::HalfTrue,
        ConsolidatedLabel::False,
    ];

    pub fn display_name(&self) -> &'static str {
        match self {
            ConsolidatedLabel::True => "True",
            ConsolidatedLabel::HalfTrue => "Half True",
            ConsolidatedLabel::False => "False",
        }
    }

    /// Index into the fixed reporting order.
    pub fn index(&self) -> usize {
        match self {
            ConsolidatedLabel::True => 0,
            ConsolidatedLabel::HalfTrue => 1,
            ConsolidatedLabel::False => 2,
        }
    }
}

impl fmt::Display for ConsolidatedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for ConsolidatedLabel {
    type Err = CoreError;

    /// Accepts "Half-True", "Half True", "half_true" and similar variants.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label_text(s).as_str() {
            "true" => Ok(ConsolidatedLabel::True),
            "half true" => Ok(ConsolidatedLabel::HalfTrue),
            "false" => Ok(ConsolidatedLabel::False),
            _ => Err(CoreError::UnknownLabel(s.to_string())),
        }
    }
}

/// Collapse the six-way scheme to three categories.
///
/// True stays True; Mostly True and Half True become Half True; Mostly
/// False, False, and Pants on Fire become False.
pub fn consolidate_label(raw: RawLabel) -> ConsolidatedLabel {
    match raw {
        RawLabel::True => ConsolidatedLabel::True,
        RawLabel::MostlyTrue | RawLabel::HalfTrue => ConsolidatedLabel::HalfTrue,
        RawLabel::MostlyFalse | RawLabel::False | RawLabel::PantsOnFire => {
            ConsolidatedLabel::False
        }
    }
}

/// Lowercase, strip punctuation, collapse hyphens/underscores and runs of
/// whitespace to single spaces.
fn normalize_label_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut last_space = true;
    for ch in s.chars() {
        let mapped = match ch {
            c if c.is_alphanumeric() => Some(c.to_ascii_lowercase()),
            '-' | '_' => Some(' '),
            c if c.is_whitespace() => Some(' '),
            _ => None,
        };
        if let Some(c) = mapped {
            if c == ' ' {
                if !last_space {
                    out.push(' ');
                    last_space = true;
                }
            } else {
                out.push(c);
                last_space = false;
            }
        }
    }
    out.trim_end().to_string()
}
