//! Simulation of pre- and post-selected von Neumann measurements of
//! projectors.
//!
//! * [`quantum`]: system states, projectors, weak and modular values.
//! * [`pointer`]: continuous pointer states on a periodic grid, spectral
//!   translation, overlaps and centroids.
//! * [`dynamics`]: the modular valued operator `(1 - A_w) 1 + A_w S` acting on a
//!   pointer, its position profile, and a joint-space oracle that checks it.
//! * [`faux`]: the pointer as a non-orthogonal two-level system and the
//!   peak-ratio readout of a real weak value.
//! * [`mzi`]: a twin Mach-Zehnder interferometer mapped onto the above.

pub mod dynamics;
pub mod error;
pub mod faux;
pub mod mzi;
pub mod output;
pub mod pointer;
pub mod quantum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
