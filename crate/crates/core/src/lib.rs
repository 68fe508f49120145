//! Numerical toolkit for closed hypersurfaces of the unit sphere: Gauss map
//! degree, minimax balls, curvature bounds that force a hypersurface to be a
//! sphere, and their analogues in spherical space forms.

pub mod ball;
pub mod beltrami;
pub mod cli;
pub mod error;
pub mod gallery;
pub mod gauss_map;
pub mod immersion;
pub mod quotient;
pub mod rigidity;
pub mod sphere;

pub use error::{Error, Result};
pub use immersion::{ChartMap, HypersurfaceMesh, ImmersionChart, ParamBox};
pub use sphere::{SpherePoint, TangentVector};
