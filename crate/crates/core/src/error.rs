use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("component {component} has {width} exits, more than the target width {target}")]
    TooWide {
        component: String,
        width: usize,
        target: usize,
    },
    #[error("instance {0} refers to a component that is not in the library")]
    DanglingComponent(String),
    #[error("malformed composer: {0}")]
    Composer(String),
    #[error("invalid strategy: {0}")]
    Strategy(String),
    #[error("invalid choice function: {0}")]
    Choice(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("automaton shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input:\n{}", render(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("state space exploration exceeded {0} states")]
    Limit(usize),
}

fn render(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
