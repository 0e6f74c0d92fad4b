//! Pixel-based environment sensing from communication signals.
//!
//! A region of interest is divided into pixels, each carrying a real scattering
//! coefficient in `[0, 1]`. Transmitters send orthogonal pilots on several
//! subcarriers; receivers estimate the channel, remove the direct path and the
//! remaining multipath is inverted for the coefficients with GAMP.
//!
//! Two gain models are supported: the point gain evaluated at the pixel center
//! ([`GainModel::Conventional`]) and the gain averaged over the pixel area
//! ([`GainModel::Integral`]).
//!
//! Module map:
//! - [`scene`]: pixel grid, targets, fine scatterer cloud
//! - [`propagation`]: gains, channel matrices, stacked measurement matrix
//! - [`forward`]: pilots and received signals from the scatterer cloud
//! - [`estimation`]: LS channel estimates, LOS removal, stacking
//! - [`gamp`]: the solver and its prior
//! - [`analysis`]: phase error of the two models
//! - [`metrics`]: MD/FA and NMSE
//! - [`experiment`]: configs, pipeline, sweeps, output files
//! - [`matfile`]: binary matrix format and cache

pub mod analysis;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod forward;
pub mod gamp;
pub mod geometry;
pub mod io;
pub mod matfile;
pub mod metrics;
pub mod propagation;
pub mod quadrature;
pub mod scene;

pub use error::{Error, Result};
pub use geometry::{Point2, Rect};
pub use propagation::GainModel;
