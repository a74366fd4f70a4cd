use thiserror::Error;

/// Errors produced by the pose pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rotation is within numerical reach of 180 degrees; Cayley parameters are unbounded")]
    NearPiRotation,
    #[error("invalid camera rig: {0}")]
    InvalidRig(&'static str),
    #[error("camera index {index} out of range for a rig of {cameras} cameras")]
    CameraIndex { index: usize, cameras: usize },
    #[error("invalid affine correspondence: {0}")]
    InvalidCorrespondence(&'static str),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("the 5DOF equation system requires a rotation-angle prior")]
    MissingAnglePrior,
    #[error("determinant expansion supports 2x2 and 3x3 matrices, got {rows}x{cols}")]
    UnsupportedSize { rows: usize, cols: usize },
    #[error("no seed converged to a root of the polynomial system")]
    NoRootsFound,
    #[error("correspondence pair does not match the requested solver mode")]
    ModeMismatch,
    #[error("depth null vector has a vanishing homogeneous component")]
    NormalizationFailure,
    #[error("need at least two correspondences of the requested mode, found {0}")]
    InsufficientCorrespondences(usize),
    #[error("every RANSAC sample failed to produce a candidate")]
    AllSamplesFailed,
    #[error("homography maps the point to infinity")]
    PointAtInfinity,
    #[error("noisy support corners are collinear")]
    DegenerateQuad,
    #[error("hallucinated correspondence spread must be positive")]
    InvalidSpread,
    #[error("translation direction undefined for a zero-length translation")]
    ZeroTranslation,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
