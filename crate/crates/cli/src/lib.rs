//! Experiment drivers, spec parsers, and table output for the `rbfquad`
//! binary. Exposed as a library so integration tests can drive the same
//! code paths the executable uses.

// Matrix-flavored code keeps indexed loops; cell drivers take their full
// parameter lists.
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod experiments;
pub mod output;
pub mod pool;
pub mod specs;
