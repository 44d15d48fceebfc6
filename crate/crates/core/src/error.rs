use crate::laurent::SeriesError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),

    #[error("cutoff outside its domain: {0}")]
    CutoffDomain(String),

    #[error("epsilon must be positive")]
    NonPositiveEpsilon,

    #[error("invalid plate geometry: {0}")]
    InvalidGeometry(String),

    #[error("mode sum not converged at n_max = {n_max}: remainder bound {bound} exceeds tolerance {tolerance}")]
    NotConverged {
        n_max: u64,
        bound: String,
        tolerance: String,
    },

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("singular fit matrix while separating the a-dependence")]
    FitSingular,

    #[error("separation must be positive")]
    NonPositiveSeparation,

    #[error("coth argument (s - lambda * s_frozen) must be positive")]
    CothPole,

    #[error("separation vector is lightlike or timelike")]
    LightlikeSeparation,

    #[error("separation vector must have zero z-component")]
    NonZeroZComponent,

    #[error("point z = {0} lies on a plate")]
    WallContact(String),
}

impl Error {
    /// True for errors that mark a single grid point as out of domain.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::NotConverged { .. })
    }
}
