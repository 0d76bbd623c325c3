//! Policy synthesis by a penalty convex-concave procedure.

mod ccp;
pub mod convexify;
pub mod program;

pub use ccp::{run_ccp, CcpParams, CcpState, SynthesisResult, SynthesisStatus, Trace};
pub use convexify::{convexify_bilinear, BilinearRole, BilinearSplit, ConvexPart};
pub use program::{build_program, Family, LinearizationPoint, ObjectiveChoice, Program};
