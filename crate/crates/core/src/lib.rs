//! Kinematics, statics and elastic-transmission model of a three-leg
//! variable-stiffness wrist, with a quasi-static plant simulator and the
//! calibration and stiffness-identification tools built on top of it.
//!
//! Lengths are in millimetres, angles in radians, forces in newtons and
//! torques in N·mm.
//!
//! ```
//! use vswrist::{leg, MinPose};
//!
//! let u = MinPose::new(0.2, -0.1);
//! let pose = leg::coupler_pose_from_minpose(&u).unwrap();
//! assert!((pose.position().norm() - leg::coupler_distance()).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod leg;
pub mod linalg;
pub mod optim;
pub mod parallel;
pub mod plant;
pub mod ps;
pub mod root;
pub mod statics;
pub mod svg;
pub mod transmission;

pub use error::{Error, Result};
pub use geometry::{MinPose, Pose, Transform};
pub use leg::{Leg, LegJointState, LegParams};
