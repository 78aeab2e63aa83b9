//! Plane geometry for connectedness of two-map self-affine systems.

pub mod cover;
pub mod linalg;
pub mod robust;

pub use cover::{
    compose_affine, cover_check, point_in, verify_covering_lemma, AffineMap2, Cell,
    CoverCertificate, CoverFailure, CoveringLemma, CoveringSetup, Parallelogram, UncoveredCell,
};
pub use linalg::{Mat2, Vec2};
pub use robust::{
    locus_interior_test, max_passing_eta, robustness_eta, trivial_connected, ChainBreak,
    ChainInput, InteriorKind, InteriorReport, RobustnessChain, TrivialError, INTERIOR_ETA,
};
