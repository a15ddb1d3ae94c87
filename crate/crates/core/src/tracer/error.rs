use alloc::string::String;
use core::fmt;

/// Classification of runtime failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorKind {
    NameError,
    TypeError,
    ValueError,
    IndexError,
    KeyError,
    ZeroDivisionError,
    AttributeError,
    AssertionError,
    /// Float or integer results out of representable range.
    OverflowError,
    StepLimitExceeded,
    RecursionLimit,
    UnsupportedConstruct,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 12] = [
        ErrorKind::NameError,
        ErrorKind::TypeError,
        ErrorKind::ValueError,
        ErrorKind::IndexError,
        ErrorKind::KeyError,
        ErrorKind::ZeroDivisionError,
        ErrorKind::AttributeError,
        ErrorKind::AssertionError,
        ErrorKind::OverflowError,
        ErrorKind::StepLimitExceeded,
        ErrorKind::RecursionLimit,
        ErrorKind::UnsupportedConstruct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::NameError => "NameError",
            ErrorKind::TypeError => "TypeError",
            ErrorKind::ValueError => "ValueError",
            ErrorKind::IndexError => "IndexError",
            ErrorKind::KeyError => "KeyError",
            ErrorKind::ZeroDivisionError => "ZeroDivisionError",
            ErrorKind::AttributeError => "AttributeError",
            ErrorKind::AssertionError => "AssertionError",
            ErrorKind::OverflowError => "OverflowError",
            ErrorKind::StepLimitExceeded => "StepLimitExceeded",
            ErrorKind::RecursionLimit => "RecursionLimit",
            ErrorKind::UnsupportedConstruct => "UnsupportedConstruct",
        }
    }

    pub fn from_name(name: &str) -> Option<ErrorKind> {
        ErrorKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A raised runtime error. `line` is filled in by the innermost statement it passes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exc {
    pub kind: ErrorKind,
    pub message: String,
    pub line: Option<u32>,
}

impl Exc {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Exc { kind, message: message.into(), line: None }
    }

    pub fn type_error(message: impl Into<String>) -> Self {
        Exc::new(ErrorKind::TypeError, message)
    }

    pub fn value_error(message: impl Into<String>) -> Self {
        Exc::new(ErrorKind::ValueError, message)
    }

    pub fn at(mut self, line: u32) -> Self {
        if self.line.is_none() {
            self.line = Some(line);
        }
        self
    }
}

pub type VResult<T> = Result<T, Exc>;
