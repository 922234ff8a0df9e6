//! Iterated prime-index progressions: counting, rays and their matrices,
//! analytic laws along rays, and webs of rays drawn on spiral curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > a)` also rejects NaN

pub mod appendix;
pub mod engine;
pub mod error;
pub mod laws;
pub mod numeric;
pub mod sequences;
pub mod special;
pub mod spiral;
pub mod web;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/rays.md")]
    mod rays {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/laws.md")]
    mod laws {}
    #[doc = include_str!("../../../book/src/spirals.md")]
    mod spirals {}
    #[doc = include_str!("../../../book/src/webs.md")]
    mod webs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
