use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Binary cycle label. Crackle is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "no-crackle")]
    NoCrackle,
    #[serde(rename = "crackle")]
    Crackle,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Crackle
    }

    pub fn index(self) -> usize {
        match self {
            Label::NoCrackle => 0,
            Label::Crackle => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::NoCrackle
        } else {
            Label::Crackle
        }
    }

    /// ±1 encoding used by the SVM.
    pub fn sign(self) -> f64 {
        match self {
            Label::NoCrackle => -1.0,
            Label::Crackle => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NoCrackle => "no-crackle",
            Label::Crackle => "crackle",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-crackle" => Ok(Label::NoCrackle),
            "crackle" => Ok(Label::Crackle),
            other => Err(Error::Format(format!("unknown label `{other}`"))),
        }
    }
}

/// How the corpus (crackle, wheeze) annotation flags collapse to a binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    /// none, wheeze → no-crackle; crackle, both → crackle.
    #[default]
    General,
    /// none → no-crackle; crackle only → crackle; wheeze-only and both are dropped.
    Pure,
}

impl LabelScheme {
    /// `None` means the cycle is excluded under this scheme.
    pub fn label(self, crackle: bool, wheeze: bool) -> Option<Label> {
        match (self, crackle, wheeze) {
            (LabelScheme::General, true, _) => Some(Label::Crackle),
            (LabelScheme::General, false, _) => Some(Label::NoCrackle),
            (LabelScheme::Pure, false, false) => Some(Label::NoCrackle),
            (LabelScheme::Pure, true, false) => Some(Label::Crackle),
            (LabelScheme::Pure, _, true) => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelScheme::General => "general",
            LabelScheme::Pure => "pure",
        }
    }
}

impl FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(LabelScheme::General),
            "pure" => Ok(LabelScheme::Pure),
            other => Err(Error::InvalidArgument(format!(
                "unknown label scheme `{other}` (expected general|pure)"
            ))),
        }
    }
}
