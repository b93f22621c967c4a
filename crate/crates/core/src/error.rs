use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("transmission factor has a pole at k = {k_re} + {k_im}i")]
    Pole { k_re: f64, k_im: f64 },

    #[error("root solver did not converge: {0}")]
    RootConvergence(String),

    #[error("quadrature did not converge on [{a}, {b}]: value {value:e}, error {error:e} after {subdivisions} subdivisions")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("semi-infinite integral did not decay beyond x = {reached:e} (last panel {last_panel:e})")]
    DecayFailure { reached: f64, last_panel: f64 },

    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),

    #[error("tilted contour leaves an imaginary residue {residue:e} (allowed {allowed:e})")]
    TiltResidue { residue: f64, allowed: f64 },

    #[error("principal-value node within {distance:e} of a pole at {pole}")]
    PoleProximity { pole: f64, distance: f64 },

    #[error("at k_par = {k_par:?}: {source}")]
    AtGridPoint {
        k_par: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{part}: {source}")]
    InPart {
        part: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_k_par(self, k_par: f64) -> Self {
        Error::AtGridPoint {
            k_par,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_part(self, part: &'static str) -> Self {
        Error::InPart {
            part,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
