//! Bell-inequality violation toolkit.
//!
//! Builds random-sign Bell functionals with matching POVMs and Schmidt
//! states, and evaluates them every way that is tractable at desk scale:
//! exact and heuristic classical values, closed-form and see-saw quantum
//! values, an SDP relaxation with explicit vector certificates, and
//! entanglement measures of the states involved.
//!
//! The crate is `no_std` (it needs `alloc`). IO, parallel sweeps and the
//! command line live in the `bellforge` crate.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bell;
pub mod classical;
pub mod construction;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod povm;
pub mod quantum;
pub mod rng;
pub mod sdp;
pub mod state;

pub use error::{Error, Result};
