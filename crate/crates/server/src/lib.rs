//! HTTP back end: sessions, per-stroke classification, iterative search,
//! screen images and feedback. Endpoints and error codes are documented in
//! docs/api.md.

mod app;
pub mod error;
pub mod feedback;
pub mod screens;
pub mod session;

pub use app::{router, AppState, ServiceConfig, DEFAULT_SESSION_TTL};
