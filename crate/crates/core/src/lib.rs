//! Entanglement detection length (EDL) and state determination length (SDL)
//! of multi-qubit states.
//!
//! Symmetric states diagonal in the Dicke basis are handled exactly through
//! Hankel moment matrices and small linear systems; general states go through
//! semidefinite programs (fully decomposable witnesses and the pure-state
//! marginal problem). Hypergraph and graph-state utilities cover minimal
//! marginal collections, entanglement transitivity and local complementation.

pub mod error;
pub mod graphstate;
pub mod hypergraph;
pub mod lp;
pub mod oracle;
pub mod qcore;
pub mod sdp;
pub mod symmetric;
pub mod witness;

pub use error::{Error, Result};
