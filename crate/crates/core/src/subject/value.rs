use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;
use crate::text::quote;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlValue {
    Num(Rational),
    Str(String),
    Bool(bool),
    List(Vec<SlValue>),
    Record(BTreeMap<String, SlValue>),
    /// Holds only numbers, strings and booleans.
    Set(BTreeSet<SlValue>),
}

impl SlValue {
    pub fn num(n: i64) -> SlValue {
        SlValue::Num(Rational::from_integer(n))
    }

    pub fn str(s: &str) -> SlValue {
        SlValue::Str(s.to_string())
    }

    pub fn record<'a>(fields: impl IntoIterator<Item = (&'a str, SlValue)>) -> SlValue {
        SlValue::Record(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn is_hashable(&self) -> bool {
        matches!(self, SlValue::Num(_) | SlValue::Str(_) | SlValue::Bool(_))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            SlValue::Num(_) => "number",
            SlValue::Str(_) => "string",
            SlValue::Bool(_) => "bool",
            SlValue::List(_) => "list",
            SlValue::Record(_) => "record",
            SlValue::Set(_) => "set",
        }
    }
}

impl fmt::Display for SlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn seq<'a>(f: &mut fmt::Formatter<'_>, xs: impl Iterator<Item = &'a SlValue>) -> fmt::Result {
            for (i, x) in xs.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        }
        match self {
            SlValue::Num(n) => write!(f, "{n}"),
            SlValue::Str(s) => f.write_str(&quote(s)),
            SlValue::Bool(b) => write!(f, "{b}"),
            SlValue::List(xs) => {
                f.write_str("[")?;
                seq(f, xs.iter())?;
                f.write_str("]")
            }
            SlValue::Set(xs) => {
                f.write_str("set([")?;
                seq(f, xs.iter())?;
                f.write_str("])")
            }
            SlValue::Record(fs) => {
                f.write_str("{")?;
                for (i, (k, v)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {v}", quote(k))?;
                }
                f.write_str("}")
            }
        }
    }
}
