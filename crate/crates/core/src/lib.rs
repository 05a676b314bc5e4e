//! Rotation sets of torus homeomorphisms and their images under projective
//! transformations in SL(3,Z).
//!
//! The crate estimates the classical rotation set of a lift `F`, the rotation
//! set of a Z^3 action `(U, V, G)` on the plane, builds the action obtained
//! from `F` and a matrix `L`, and checks both that `U, V` act properly
//! discontinuously and that the rotation set of `G` is the projective image
//! of the rotation set of `F`.

pub mod dynamics;
pub mod geometry;
pub mod par;
pub mod projective;
pub mod pushforward;
pub mod rotation;

pub use dynamics::{ActionWord, OrbitCache, Retention, ShearAxis, TorusLift};
pub use geometry::{hausdorff, hull, inflate, ConvexRegion, Rect};
pub use projective::{IntMatrix3, PlanarLine, ProjPoint, Vector2};
