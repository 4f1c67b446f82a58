use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a point or vertex as it appears in input files.
///
/// Integer ids order before string ids; within each kind the natural order
/// applies. Every deterministic tie-break in the crate follows this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(u64),
    Str(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<u64> for Label {
    fn from(v: u64) -> Self {
        Label::Int(v)
    }
}

impl From<usize> for Label {
    fn from(v: usize) -> Self {
        Label::Int(v as u64)
    }
}

impl From<&str> for Label {
    fn from(v: &str) -> Self {
        Label::Str(v.to_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ints_sort_before_strings() {
        let mut v = vec![Label::from("a"), Label::from(10u64), Label::from(2u64)];
        v.sort();
        assert_eq!(v, vec![Label::Int(2), Label::Int(10), Label::Str("a".into())]);
    }

    #[test]
    fn untagged_json() {
        let v: Vec<Label> = serde_json::from_str(r#"[3, "p"]"#).unwrap();
        assert_eq!(v, vec![Label::Int(3), Label::Str("p".into())]);
    }
}
