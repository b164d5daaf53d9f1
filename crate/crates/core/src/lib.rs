//! Rational points on the genus-3 family C_a: y^2 = x^8 + (4-4a^4)x^6 + (8a^4+6)x^4 + (4-4a^4)x^2 + 1,
//! determined through two independent maps to an elliptic curve of rank one.

pub mod descent;
pub mod dmsearch;
pub mod ecq;
pub mod family;
pub mod numth;
pub mod poly;
pub mod rootnum;
pub mod serial;

pub use numth::{Int, Rat};
