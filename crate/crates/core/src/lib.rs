//! Numerical laboratory for Schlesinger isomonodromic deformations of rank-2
//! Fuchsian systems, their Garnier-system counterparts, and the movable
//! singularities of both.
//!
//! The pipeline goes: build a Fuchsian family ([`fuchsian`]), deform its pole
//! configuration under the Schlesinger flow ([`schlesinger`]), map states to
//! Garnier data ([`garnier`]), and probe the meromorphic continuation for
//! movable poles with contour-based order estimates ([`contour`], [`slices`]).
//! The n = 1 case is cross-checked against the Painleve VI equation ([`pvi`]),
//! and reducible-monodromy solutions are built from Lauricella hypergeometric
//! functions ([`lauricella`]).

pub mod contour;
pub mod fuchsian;
pub mod garnier;
pub mod lauricella;
pub mod linalg;
pub mod mat2;
pub mod ode;
pub mod polyroots;
pub mod pvi;
pub mod quad;
pub mod randgen;
pub mod schlesinger;
pub mod slices;
pub mod special;

pub use mat2::Mat2;
pub use num_complex::Complex64;
