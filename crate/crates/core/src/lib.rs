//! Displaced-frame simulator for high-power dispersive readout in circuit QED.

pub mod device;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod scenario;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as c64;

/// Float formatting used in every CSV artifact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
