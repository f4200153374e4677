//! HTTP/JSON front end over the control plane library.

mod error;
mod routes;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use confplane_core::{ControlPlane, StoreError};
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

pub use error::{ApiError, ErrorCode};
pub use routes::router;

/// Canonical JSON body (object keys sorted) with the given status.
pub(crate) fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match confplane_core::canonical::to_string_from(value) {
        Ok(body) => text_response(status, body),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

pub(crate) fn text_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: String,
    pub store: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot open store {}: {source}", path.display())]
    StoreOpen { path: PathBuf, source: StoreError },
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error("server failed: {0}")]
    Io(#[from] io::Error),
}

/// A bound but not yet serving instance.
pub struct Service {
    listener: TcpListener,
    plane: Arc<ControlPlane>,
}

impl Service {
    pub async fn bind(config: &ServiceConfig) -> Result<Self, ServeError> {
        let plane = ControlPlane::open(&config.store)
            .map_err(|source| ServeError::StoreOpen { path: config.store.clone(), source })?;
        let listener = TcpListener::bind(&config.listen)
            .await
            .map_err(|source| ServeError::Bind { addr: config.listen.clone(), source })?;
        Ok(Self { listener, plane: Arc::new(plane) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until `shutdown` resolves, then drains in-flight requests.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
        axum::serve(self.listener, router(self.plane)).with_graceful_shutdown(shutdown).await?;
        Ok(())
    }
}

/// Binds and serves `config` until `shutdown` resolves.
pub async fn serve(
    config: &ServiceConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    Service::bind(config).await?.run(shutdown).await
}

/// In-process server on an ephemeral loopback port, running on its own
/// thread and runtime. Stops when dropped.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(plane: Arc<ControlPlane>) -> io::Result<Self> {
        let std_listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        std_listener.set_nonblocking(true)?;
        let addr = std_listener.local_addr()?;
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = TcpListener::from_std(std_listener).expect("listener registers with the runtime");
                let shutdown = async move {
                    let _ = stopped.await;
                };
                if let Err(e) = axum::serve(listener, router(plane)).with_graceful_shutdown(shutdown).await {
                    tracing::error!(error = %e, "background server failed");
                }
            });
        });
        Ok(Self { addr, stop: Some(stop), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}
