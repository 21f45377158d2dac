//! Exact `p`-adic arithmetic in cyclotomic towers over unramified bases, with
//! brute-force verification of resolvent valuations, ramification data,
//! uniformizer systems and formal-group identities.

pub mod error;
pub mod formal_group;
pub mod formulas;
pub mod linalg;
pub mod padic;
pub mod ramification;
pub mod resolvent;
pub mod suite;
pub mod tower;

pub use error::{Error, Result};
pub use padic::{PrimeProfile, Valuation};
pub use tower::{BaseElement, GaloisElement, RingElement, ScaledElement, TowerRing};
