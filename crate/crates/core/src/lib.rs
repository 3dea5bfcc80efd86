//! Infinitesimal rigidity of frameworks with exact certificates, and
//! placement of triangulated surfaces into small generic point sets.

pub mod complex;
pub mod contraction;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod placement;
pub mod rigidity;

/// Vertex ids are arbitrary nonnegative integers and are preserved by every operation.
pub type Vertex = u32;

pub use complex::{build_and_validate, Complex2, ComplexError, CycleReport, SurfaceReport, Triangle};
pub use linalg::{kernel_basis, rank, RankCertificate, RankMethod, RankMode, RationalMatrix, Side};
pub use rigidity::{
    is_infinitesimally_rigid, motion_witness, rigidity_matrix, stress_basis, Framework, Graph, MotionWitness, RigidityError,
    RigidityReport, StressVector,
};
pub use contraction::{
    contract_edge, find_reducible_vertex, reduction_schedule, vertex_split, ContractionError, ContractionStep, ReductionSchedule,
};
pub use placement::{
    avoidance_set, certify_placement, check_condition_c, generate_locations, place, ConditionMode, LocationSet, PlacementCertificate,
    PlacementError, PlacementResult, Strategy,
};
pub use generators::{
    collision_motion_witness, cone, genus_surface, laman_counterexample, minimal_cycle_counterexample, primitive, random_laman_graph,
    random_sphere, stacked_sphere, GeneratorError, LamanInstance, MinimalCycleInstance,
};
