//! Error type shared by the fallible constructors and budgeted searches.
//!
//! Name queries themselves are total and panic only on certified contract
//! violations (a negative value fed to a square root, an envelope breach);
//! everything that can fail gracefully reports through [`CoreError`].

use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// Vector or half-space dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// Half-space with zero normal and positive offset denotes the empty set.
    EmptyHalfSpace,
    /// Build-time net probe found no point of the box inside all half-spaces.
    EmptyIntersectionProbe,
    /// A staged search ran out of its stage budget.
    BudgetExhausted { budget: u64 },
    /// Interval stage with lower endpoint above upper endpoint after clipping.
    InconsistentStages { stage: u64 },
    /// Both enumerations fired on the same index.
    DisjointFiringViolated { index: u32 },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            CoreError::EmptyHalfSpace => {
                write!(f, "half-space with zero normal and positive offset is empty")
            }
            CoreError::EmptyIntersectionProbe => {
                write!(f, "no probe point of the box satisfies all half-spaces")
            }
            CoreError::BudgetExhausted { budget } => {
                write!(f, "stage budget of {budget} exhausted")
            }
            CoreError::InconsistentStages { stage } => {
                write!(f, "interval endpoints cross at stage {stage}")
            }
            CoreError::DisjointFiringViolated { index } => {
                write!(f, "both enumerations fired on index {index}")
            }
        }
    }
}

impl core::error::Error for CoreError {}
