//! Exact-arithmetic third-degree price discrimination under interval price
//! regulation.
//!
//! The crate builds market segmentations whose instructed prices lie in a
//! contiguous regulated window, for an intermediary that only recommends
//! prices (passive) or one that can force them (active). The extreme schemes
//! come from [`passive`] and [`active`]; [`lp`] re-derives the same optima
//! from a linear program over standard-form schemes.
//!
//! [`region`] mixes extreme schemes to hit any achievable surplus pair, and
//! [`regulator`] covers window design and the uniform-market sweep.

pub mod active;
pub mod equal_revenue;
pub mod error;
pub mod io;
pub mod lp;
pub mod market;
pub mod passive;
pub mod rational;
pub mod region;
pub mod regulator;
pub mod scheme;

pub use error::{Error, Result};
pub use market::{IndexSet, Market, RegulatedSet, ValueGrid};
pub use rational::Rational;
pub use scheme::{MarketScheme, Model, Segment, Surplus};
