//! Construction, decoding, and verification of multiset-window positioning
//! codes: periodic grid colourings whose every `m^d` window carries a
//! distinct multiset of colours, so a sensor that can only count colour
//! intensities can still recover its position in constant arithmetic.

pub mod error;
pub mod grid;
pub mod io;
pub mod packing;
pub mod params;
pub mod profiles;
pub mod verify;

pub use error::{Error, Result};
