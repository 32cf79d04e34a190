//! Error taxonomy of the dynamics layer. Geometry failures (unreachable or
//! singular configurations) are kept distinct from physics failures
//! (degenerate inertia) so callers can report actionable causes.

use std::error::Error;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    /// The requested configuration violates the closure constraints
    /// (arccos domain, negative extension, wrong branch).
    UnreachableConfiguration {
        module: Option<usize>,
        detail: String,
    },
    /// A passive joint sits at (or numerically at) a kinematic singularity.
    SingularConfiguration {
        module: Option<usize>,
        detail: String,
    },
    /// The articulated inertia felt by an actuator is not invertible;
    /// the model is non-physical.
    DegenerateInertia {
        module: Option<usize>,
        detail: String,
    },
    /// Input vectors do not match the model's degree-of-freedom count.
    DimensionMismatch { detail: String },
}

impl DynamicsError {
    pub fn unreachable(detail: impl Into<String>) -> Self {
        Self::UnreachableConfiguration {
            module: None,
            detail: detail.into(),
        }
    }

    pub fn singular(detail: impl Into<String>) -> Self {
        Self::SingularConfiguration {
            module: None,
            detail: detail.into(),
        }
    }

    pub fn degenerate(detail: impl Into<String>) -> Self {
        Self::DegenerateInertia {
            module: None,
            detail: detail.into(),
        }
    }

    /// Attach the index of the module the failure occurred in.
    pub fn with_module(self, index: usize) -> Self {
        match self {
            Self::UnreachableConfiguration { detail, .. } => Self::UnreachableConfiguration {
                module: Some(index),
                detail,
            },
            Self::SingularConfiguration { detail, .. } => Self::SingularConfiguration {
                module: Some(index),
                detail,
            },
            Self::DegenerateInertia { detail, .. } => Self::DegenerateInertia {
                module: Some(index),
                detail,
            },
            other => other,
        }
    }

    pub fn module(&self) -> Option<usize> {
        match self {
            Self::UnreachableConfiguration { module, .. }
            | Self::SingularConfiguration { module, .. }
            | Self::DegenerateInertia { module, .. } => *module,
            Self::DimensionMismatch { .. } => None,
        }
    }
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let module = |m: &Option<usize>| match m {
            Some(i) => format!(" (module {i})"),
            None => String::new(),
        };
        match self {
            Self::UnreachableConfiguration { module: m, detail } => {
                write!(f, "unreachable configuration{}: {detail}", module(m))
            }
            Self::SingularConfiguration { module: m, detail } => {
                write!(f, "singular configuration{}: {detail}", module(m))
            }
            Self::DegenerateInertia { module: m, detail } => {
                write!(f, "degenerate inertia{}: {detail}", module(m))
            }
            Self::DimensionMismatch { detail } => write!(f, "dimension mismatch: {detail}"),
        }
    }
}

impl Error for DynamicsError {}
