//! Exact computations for finitely presented pro-p groups.
//!
//! Group words are sent into the free algebra `F_p⟨⟨X⟩⟩` by the Magnus
//! embedding `x_i ↦ 1 + X_i`. From the expansions of the relators we read off
//! weighted initial forms, the Zassenhaus invariant and the Massey product
//! tensor, and decide mildness either through Anick's criterion (a proof) or
//! by comparing Hilbert series degree by degree (evidence or refutation).
//!
//! Commutators follow the convention `[a, b] = a⁻¹ b⁻¹ a b`.

pub mod algebra;
pub mod freeness;
pub mod lie;
pub mod linalg;
pub mod magnus;
pub mod massey;
pub mod orders;
pub mod syntax;

use thiserror::Error;

pub use algebra::{AlgebraError, IntSeries, Monomial, Poly, PrimeField, Weights};
pub use linalg::{Budget, BudgetExceeded};

/// The commutator convention, echoed in machine-readable output.
pub const COMMUTATOR_CONVENTION: &str = "[a,b] = a^-1 b^-1 a b";

/// Any failure raised by the library, grouped by origin.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error(transparent)]
    Order(#[from] orders::OrderError),
    #[error(transparent)]
    Freeness(#[from] freeness::FreenessError),
    #[error(transparent)]
    Magnus(#[from] magnus::MagnusError),
    #[error(transparent)]
    Lie(#[from] lie::LieError),
    #[error(transparent)]
    Massey(#[from] massey::MasseyError),
    #[error(transparent)]
    Syntax(#[from] syntax::SyntaxError),
}

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input.
    Input,
    /// A budget or precision limit was hit; retrying with larger limits may help.
    Resource,
    /// An internal invariant failed. Always a bug.
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Budget(_) => ErrorKind::Resource,
            Error::Magnus(magnus::MagnusError::PrecisionExceeded { .. }) => ErrorKind::Resource,
            Error::Massey(e) if e.is_resource() => ErrorKind::Resource,
            Error::Massey(e) if e.is_internal() => ErrorKind::Internal,
            Error::Freeness(freeness::FreenessError::Budget(_)) => ErrorKind::Resource,
            Error::Freeness(freeness::FreenessError::PositivityViolated { .. }) => {
                ErrorKind::Internal
            }
            Error::Lie(lie::LieError::Budget(_)) => ErrorKind::Resource,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
