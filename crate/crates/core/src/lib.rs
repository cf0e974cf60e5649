//! Algebraic dynamics of a single integer polynomial: classification of the
//! places of its root field, β-expansion arithmetic for Pisot roots, the
//! two-sided β-shift and its natural coding onto the phase space.

pub mod beta;
pub mod coding;
pub mod numfield;
pub mod padic;
pub mod places;
pub mod polyring;
pub mod qpoly;
pub mod roots;
pub mod shift;

pub use padic::PadicNumber;
pub use places::{classify_places, PlaceClassification, PlaceError};
pub use polyring::{AssociatedPoly, IntLaurentPoly, PolyError};
pub use numfield::{BetaContext, FieldElem, NumberField, ZBetaElement};
pub use beta::{BetaDigits, ParryAutomaton, ParryData};
pub use shift::{BiSequence, PeriodicSequence};
pub use coding::{CodingError, CodingSystem, HomoclinicSeq, PhasePoint};
