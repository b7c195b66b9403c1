use std::fmt;

use thiserror::Error;

/// Where in a grid a fault was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Cell(usize),
    Cell2D(usize, usize),
    /// Not tied to a specific cell (e.g. a whole-field check).
    Field,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Cell(j) => write!(f, "cell {j}"),
            Location::Cell2D(i, j) => write!(f, "cell ({i}, {j})"),
            Location::Field => write!(f, "field"),
        }
    }
}

/// A state that a conservation law cannot evaluate (negative density or pressure).
#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("non-physical state: density {density}, pressure {pressure}")]
pub struct NonPhysical {
    pub density: f64,
    pub pressure: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("positivity fault at {location}: density {density}, pressure {pressure}")]
    Positivity {
        location: Location,
        density: f64,
        pressure: f64,
    },

    #[error("time step {dt:e} violates the CFL limit {cfl}; suggested dt = {suggested:e}")]
    StepRejected { dt: f64, cfl: f64, suggested: f64 },

    #[error("non-finite values in stage {stage} at t = {t}")]
    Divergence { stage: usize, t: f64 },

    #[error("Poisson solver did not converge in {iterations} iterations (last residual {:e})", residuals.last().copied().unwrap_or(f64::NAN))]
    PoissonNotConverged {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("incompatible resolutions: {0}")]
    IncompatibleGrids(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn positivity(location: Location, np: NonPhysical) -> Self {
        Error::Positivity {
            location,
            density: np.density,
            pressure: np.pressure,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
