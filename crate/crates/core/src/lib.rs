//! Hardy's Z(t) on the critical line, the Jacob's ladder φ(T), and the
//! balance of the areas of Z²(t) above and below its mean level.

pub mod engine;
pub mod error;
pub mod ladder;
pub mod oscillation;
pub mod quad;
pub mod roots;
pub mod sweep;
pub mod zeta;

pub use engine::{AreaMode, AreaReport, Engine};
pub use error::{Error, Result};
