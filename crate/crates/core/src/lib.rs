//! Numerical laboratory for measures on high-dimensional ellipsoids and
//! Gaussian spaces: sampling, radial transport maps, statistical distances
//! (total variation, Prokhorov, Ky Fan, Wasserstein), observable-diameter
//! estimates, and reproducible convergence-experiment suites.

pub mod error;
pub mod harness;
pub mod measures;
pub mod metrics;
pub mod observables;
pub mod rng;
pub mod transport;

pub use error::{MmError, Result};
pub use harness::{run_suite, Config, ExperimentReport, SequenceFamily};
pub use measures::{EllipsoidKind, EllipsoidSpec, GaussianSpec, PointCloud, RegionSpec};
pub use metrics::{CouplingFeasibility, DiscretePair};
pub use observables::{DominationMap, ObsDiamEstimate, WitnessKind};
pub use transport::{RadialProfile, TransportMapSpec, TransportVariant};
