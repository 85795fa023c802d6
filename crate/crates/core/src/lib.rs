//! Frames in `R^n`, certified column subset selection, and the extraction
//! of large subsystems equivalent to an orthonormal basis.
//!
//! The numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the command-line tool uses.
//! Exact identities are checked with rationals ([`Rational`]).
//!
//! * [`frame`]: frame bounds, tightening, certificates.
//! * [`selection`]: restriction-norm, restricted-invertibility and
//!   zero-diagonal subset selection with exact oracles.
//! * [`extraction`]: the extraction pipeline and its refinement.
//! * [`infinite`]: greedy selection from frames given as streams.
//! * [`counterexamples`]: a frame with no basis with brackets, and a tight
//!   frame with badly conditioned partial sums.
//! * [`io`]: frame files and deterministic JSON.
//! * [`oracle`]: greedy selections against exhaustive optima.

pub mod counterexamples;
pub mod error;
pub mod extraction;
pub mod frame;
pub mod infinite;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod random;
pub mod scalar;
pub mod selection;

pub use error::{FrameError, Result};
pub use extraction::{ExtractionParams, ExtractionReport, StopReason};
pub use frame::{EquivalenceCertificate, Frame, FrameBounds};
pub use infinite::{FrameSequence, GreedySelection};
pub use linalg::Matrix;
pub use scalar::Scalar;
pub use selection::{SelectionConfig, SelectionMethod, SubsetSelection};

/// Schema tag written into every JSON report.
pub const SCHEMA: &str = "frame-extract/1";

pub type Frame64 = Frame<f64>;
pub type Frame32 = Frame<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Bounds64 = FrameBounds<f64>;
pub type Certificate64 = EquivalenceCertificate<f64>;
pub type Selection64 = SubsetSelection<f64>;
pub type Report64 = ExtractionReport<f64>;
pub type GreedySelection64 = GreedySelection<f64>;
pub type Rational = num_rational::Ratio<i64>;
