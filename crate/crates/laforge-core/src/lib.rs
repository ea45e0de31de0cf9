//! Construction and numerical verification of LA-groups and LA-matched pairs
//! over finite-dimensional data.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line live
//! in the companion `laforge` crate.
#![no_std]

extern crate alloc;

pub mod auth;
pub mod catalog;
pub mod error;
pub mod group;
pub mod lie;
pub mod matched;
pub mod numkit;
pub mod report;
pub mod ruth;

pub use error::{Error, Result};
