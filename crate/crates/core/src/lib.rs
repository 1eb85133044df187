//! Precision-tracked p-adic arithmetic for the signed factorisation of
//! symmetric squares of non-ordinary eigenforms.

pub mod cli;
pub mod dieudonne;
pub mod dirichlet;
pub mod lfunctions;
pub mod distribution;
pub mod error;
pub mod eulersys;
pub mod iwasawa;
pub mod json;
pub mod logs;
pub mod padic;
pub mod quad;
pub mod series;
pub mod signed;

pub use error::{DivisibilityFailure, IwaError, Result};
pub use iwasawa::{ESeries, FiniteCharacter, IwasawaElement, Precision};
pub use padic::{HalfVal, PadicScalar};
pub use quad::{alpha_from_form, Form, QuadExtScalar};
pub use series::Series;
