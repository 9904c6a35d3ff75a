//! Secrecy outage and intercept probability of RIS-aided terahertz links
//! under α-μ fading with pointing errors.
//!
//! The guide in `book/` walks through the model; the modules follow it:
//! [`channel`] for the per-hop laws, [`legit`] and [`eve`] for the two
//! end-to-end gains, [`secrecy`] for the outage metrics and [`mc`] for the
//! simulator that checks them.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod eve;
pub mod legit;
pub mod mc;
pub mod secrecy;
pub mod specfun;
pub mod validate;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/legitimate.md")]
    mod legitimate {}
    #[doc = include_str!("../../../book/src/eavesdropper.md")]
    mod eavesdropper {}
    #[doc = include_str!("../../../book/src/secrecy.md")]
    mod secrecy {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
