use std::fmt;

use serde::{Deserialize, Serialize};

/// Class (identity) label. Labels are 1-based, matching subject indices
/// 1..=N_out; index `i` of a model's class list holds label `i + 1` for the
/// default label set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl Label {
    /// Letter used in printed tables: 1 → A, 2 → B, ...
    pub fn letter(self) -> String {
        match self.0 {
            n @ 1..=26 => char::from(b'A' + (n - 1) as u8).to_string(),
            n => format!("#{n}"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for Label {
    fn from(v: u32) -> Self {
        Label(v)
    }
}
