//! HTTP service and command line for the [`tagbrowse`] engine.
//!
//! [`api::router`] builds the REST API over a set of loaded collections;
//! [`cli`] holds the `tagbrowse` subcommands.

pub mod api;
pub mod cli;
pub mod error;
pub mod session;

pub use api::{router, AppState};
pub use error::ApiError;
pub use session::{Session, SessionStore, SessionView};
