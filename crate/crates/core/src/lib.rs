//! Quantum Fisher information of Gaussian models.
//!
//! The engine works on phase-space moments: [`symplectic`] validates states
//! and computes Williamson frames, [`dgamma`] inverts the map
//! `Y ↦ ΓYΓ − ωYωᵀ`, [`sld`] builds the SLD and Fisher information and
//! [`homodyne`] handles isothermal models. [`oracle`] recomputes the same
//! quantities from truncated Fock-space density matrices.
//!
//! ```
//! use gaussian_qfi::models::builtin_family;
//! use gaussian_qfi::sld::qfi_general;
//! use std::collections::BTreeMap;
//!
//! let point = builtin_family("displacement", &BTreeMap::new()).unwrap().evaluate(0.0).unwrap();
//! assert!((qfi_general(&point).unwrap().qfi - 2.0).abs() < 1e-12);
//! ```

pub mod config;
pub mod dgamma;
pub mod error;
pub mod homodyne;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod sld;
pub mod symplectic;

pub use error::{Error, Result};

// Book chapters run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/williamson.md")]
    mod williamson {}
    #[doc = include_str!("../../../book/src/dgamma.md")]
    mod dgamma {}
    #[doc = include_str!("../../../book/src/sld.md")]
    mod sld {}
    #[doc = include_str!("../../../book/src/homodyne.md")]
    mod homodyne {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
