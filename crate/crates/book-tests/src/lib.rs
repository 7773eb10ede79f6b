//! Compiles every Rust listing of the guide in `book/src` as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/kinematics.md")]
pub mod kinematics {}

#[doc = include_str!("../../../book/src/parallel.md")]
pub mod parallel {}

#[doc = include_str!("../../../book/src/uj_chain.md")]
pub mod uj_chain {}

#[doc = include_str!("../../../book/src/statics.md")]
pub mod statics {}

#[doc = include_str!("../../../book/src/transmission.md")]
pub mod transmission {}

#[doc = include_str!("../../../book/src/plant.md")]
pub mod plant {}

#[doc = include_str!("../../../book/src/calibration.md")]
pub mod calibration {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
