//! HTTP front end and document store for the FRIA engine.

mod api;
pub mod error;
pub mod sessions;
pub mod store;

pub use api::{router, AppState, ACTOR_HEADER, SESSION_HEADER};
pub use error::{ApiError, ErrorBody};
pub use sessions::{Session, Sessions};
pub use store::{DocumentStore, FsStore, MemoryStore, StoreError};

/// Runs the API on `listener` until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
