//! Discrete unit sphere, finite-element operators, analytic field jets and
//! their flows.

pub mod fem;
pub mod flow;
pub mod jet;
pub mod locate;
pub mod mesh;
pub mod v3;

pub use fem::{assemble_fem, Discretization, FemOperators};
pub use flow::{conformal_flow, flow_point, rk4_flow};
pub use jet::{conformal_field_jet, rotation_field_jet, FieldJet, JetKind};
pub use locate::{pullback_field, PointLocator};
pub use mesh::{build_icosphere, TriMesh, MAX_LEVEL};
