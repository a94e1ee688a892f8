//! Points, planes, convex polytopes and surface patches.

pub mod halfspace;
pub mod patch;
pub mod plane;
pub mod polytope;
pub mod vector;

pub use halfspace::{halfspaces_to_vertices, HalfSpace, HullStatus, VertexEnumeration};
pub use patch::{ray_hit, segment_blocked, triangulate_patch, TrianglePatch};
pub use plane::{plane_basis, Plane};
pub use polytope::{hausdorff, signed_distance, ConvexPolytope, GeometryError, VoxelSet};
pub use vector::{centroid, Aabb, Point3, Vec3, Vector3};
