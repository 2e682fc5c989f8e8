//! Exact arithmetic for Iwasawa theory over function fields.
//!
//! Truncated Iwasawa algebras, finitely presented modules and their Koszul
//! homology, characteristic elements and Akashi series, Stickelberger series
//! over `F_q(t)`, and an evaluator for Selmer Euler characteristics.

pub mod akashi;
pub mod cyclo;
pub mod error;
pub mod io;
pub mod lfun;
pub mod linalg;
pub mod module;
pub mod padic;
pub mod ring;
pub mod selmer;
pub mod verify;

pub use error::{Error, Result};
