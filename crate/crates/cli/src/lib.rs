//! Library surface of the `supercartan` command-line tool: the problem
//! definition language and the identity-verification suite.

pub mod dsl;
pub mod verify;
