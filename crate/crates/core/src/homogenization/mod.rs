//! Resolvent discrepancy between the periodic operator and its effective
//! constant-coefficient limit, and fitted convergence rates.

pub mod fit;
pub mod grid;
pub mod resolvent;
pub mod study;

pub use fit::{fit_rate, least_squares, loglog_fit, LineFit, RateFit};
pub use grid::{log_space, XiGrid, XiGridSpec};
pub use resolvent::{fiber_resolvent_diff, threshold_resolvent_diff, FiberResolvents};
pub use study::{
    discrepancy_study, grid_maxima, rate_bound, threshold_sup, RateStudyResult, StudyOptions, StudyVerdict,
};
