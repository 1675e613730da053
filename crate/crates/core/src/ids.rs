//! Identifier newtypes shared by every stage of the pipeline.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdError {
    #[error("invalid concept identifier {0:?}, expected C followed by 7 digits")]
    Cui(String),
    #[error("invalid semantic type identifier {0:?}, expected T followed by 3 digits")]
    Tui(String),
    #[error("unknown semantic group code {0:?}")]
    Group(String),
}

fn is_prefixed_digits(s: &str, prefix: u8, digits: usize) -> bool {
    let b = s.as_bytes();
    b.len() == digits + 1 && b[0] == prefix && b[1..].iter().all(u8::is_ascii_digit)
}

/// Concept unique identifier, `C` followed by seven digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Cui(String);

impl Cui {
    pub fn new(s: &str) -> Result<Self, IdError> {
        if is_prefixed_digits(s, b'C', 7) {
            Ok(Cui(s.to_string()))
        } else {
            Err(IdError::Cui(s.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Cui {
    type Error = IdError;

    fn try_from(s: String) -> Result<Self, IdError> {
        if is_prefixed_digits(&s, b'C', 7) {
            Ok(Cui(s))
        } else {
            Err(IdError::Cui(s))
        }
    }
}

impl From<Cui> for String {
    fn from(c: Cui) -> String {
        c.0
    }
}

impl FromStr for Cui {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, IdError> {
        Cui::new(s)
    }
}

impl fmt::Display for Cui {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Semantic type identifier, `T` followed by three digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tui(String);

impl Tui {
    pub fn new(s: &str) -> Result<Self, IdError> {
        if is_prefixed_digits(s, b'T', 3) {
            Ok(Tui(s.to_string()))
        } else {
            Err(IdError::Tui(s.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Tui {
    type Error = IdError;

    fn try_from(s: String) -> Result<Self, IdError> {
        Tui::new(&s)
    }
}

impl From<Tui> for String {
    fn from(t: Tui) -> String {
        t.0
    }
}

impl fmt::Display for Tui {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Coarse category over semantic types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "&'static str")]
pub enum SemanticGroup {
    Diso,
    Chem,
    Proc,
    Anat,
    Livb,
    Phen,
    Devi,
    Phys,
    Acti,
    Objc,
    Gene,
    Occu,
    Conc,
    Other,
}

impl SemanticGroup {
    pub const ALL: [SemanticGroup; 14] = [
        SemanticGroup::Diso,
        SemanticGroup::Chem,
        SemanticGroup::Proc,
        SemanticGroup::Anat,
        SemanticGroup::Livb,
        SemanticGroup::Phen,
        SemanticGroup::Devi,
        SemanticGroup::Phys,
        SemanticGroup::Acti,
        SemanticGroup::Objc,
        SemanticGroup::Gene,
        SemanticGroup::Occu,
        SemanticGroup::Conc,
        SemanticGroup::Other,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SemanticGroup::Diso => "DISO",
            SemanticGroup::Chem => "CHEM",
            SemanticGroup::Proc => "PROC",
            SemanticGroup::Anat => "ANAT",
            SemanticGroup::Livb => "LIVB",
            SemanticGroup::Phen => "PHEN",
            SemanticGroup::Devi => "DEVI",
            SemanticGroup::Phys => "PHYS",
            SemanticGroup::Acti => "ACTI",
            SemanticGroup::Objc => "OBJC",
            SemanticGroup::Gene => "GENE",
            SemanticGroup::Occu => "OCCU",
            SemanticGroup::Conc => "CONC",
            SemanticGroup::Other => "OTHER",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        SemanticGroup::ALL.into_iter().find(|g| g.code() == code)
    }
}

impl FromStr for SemanticGroup {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, IdError> {
        SemanticGroup::from_code(s).ok_or_else(|| IdError::Group(s.to_string()))
    }
}

impl TryFrom<String> for SemanticGroup {
    type Error = IdError;

    fn try_from(s: String) -> Result<Self, IdError> {
        s.parse()
    }
}

impl From<SemanticGroup> for &'static str {
    fn from(g: SemanticGroup) -> &'static str {
        g.code()
    }
}

impl fmt::Display for SemanticGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cui_shape() {
        assert!(Cui::new("C0000001").is_ok());
        assert!(Cui::new("C000001").is_err());
        assert!(Cui::new("c0000001").is_err());
        assert!(Cui::new("C00000012").is_err());
        assert!(Cui::new("C00000a1").is_err());
    }

    #[test]
    fn tui_shape() {
        assert!(Tui::new("T047").is_ok());
        assert!(Tui::new("T47").is_err());
    }

    #[test]
    fn group_codes_round_trip() {
        for g in SemanticGroup::ALL {
            assert_eq!(SemanticGroup::from_code(g.code()), Some(g));
        }
        assert!("XYZ".parse::<SemanticGroup>().is_err());
    }
}
