use thiserror::Error;

pub type Result<T> = std::result::Result<T, DpgError>;

#[derive(Debug, Error)]
pub enum DpgError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate element {element}: area {area:e}")]
    DegenerateElement { element: usize, area: f64 },

    #[error("unsupported quadrature degree {requested} (maximum {max})")]
    UnsupportedQuadrature { requested: usize, max: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("level n = {n}: {source}")]
    Level {
        n: usize,
        #[source]
        source: Box<DpgError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl DpgError {
    /// True for errors produced by a linear-algebra phase rather than by bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            DpgError::Level { source, .. } => source.is_solver_failure(),
            _ => matches!(
                self,
                DpgError::NotPositiveDefinite(_) | DpgError::Solver(_) | DpgError::DegenerateElement { .. }
            ),
        }
    }

    /// Tag an error with the refinement level it came from.
    pub fn at_level(self, n: usize) -> Self {
        DpgError::Level {
            n,
            source: Box::new(self),
        }
    }
}
