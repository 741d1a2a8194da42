//! In-process stand-in for a denoising worker, speaking the worker's HTTP
//! protocol.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;

pub const FAKE_PNG: &[u8] = b"\x89PNG\r\n\x1a\nstub";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Returns the request latent unchanged.
    Echo,
    /// Returns a latent with one channel more than requested.
    WrongDims,
    BadMagic,
    /// HTTP 500 with an error JSON body.
    Fail500,
    /// HTTP 200 with an error JSON body.
    ErrorJson,
    /// HTTP 503 for the first `n` calls, then echoes.
    Flaky(usize),
}

#[derive(Clone)]
pub struct Stub {
    pub mode: Mode,
    pub calls: Arc<AtomicUsize>,
    pub bodies: Arc<Mutex<Vec<serde_json::Value>>>,
}

impl Stub {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            calls: Arc::new(AtomicUsize::new(0)),
            bodies: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Starts the server on an ephemeral port and returns its base URL.
    pub fn serve(&self) -> String {
        let stub = self.clone();
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                let app = Router::new()
                    .route("/v1/denoise_step", post(step))
                    .route("/v1/decode", post(decode))
                    .route("/v1/health", get(health))
                    .with_state(stub);
                axum::serve(listener, app).await.unwrap();
            });
        });
        format!("http://{}", rx.recv().unwrap())
    }
}

async fn step(State(stub): State<Stub>, Json(body): Json<serde_json::Value>) -> Response {
    let n = stub.calls.fetch_add(1, Ordering::SeqCst);
    stub.bodies.lock().unwrap().push(body.clone());
    let latent = body["latent_b64"].as_str().unwrap_or_default().to_string();
    match stub.mode {
        Mode::Echo => Json(serde_json::json!({ "latent_b64": latent })).into_response(),
        Mode::Flaky(k) if n >= k => Json(serde_json::json!({ "latent_b64": latent })).into_response(),
        Mode::Flaky(_) => (StatusCode::SERVICE_UNAVAILABLE, "warming up").into_response(),
        Mode::WrongDims => {
            let mut bytes = B64.decode(latent).unwrap();
            let c = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
            let plane = u32::from_le_bytes(bytes[16..20].try_into().unwrap())
                * u32::from_le_bytes(bytes[20..24].try_into().unwrap());
            bytes[12..16].copy_from_slice(&(c + 1).to_le_bytes());
            bytes.extend(std::iter::repeat_n(0u8, 4 * plane as usize));
            Json(serde_json::json!({ "latent_b64": B64.encode(bytes) })).into_response()
        }
        Mode::BadMagic => {
            let mut bytes = B64.decode(latent).unwrap();
            bytes[..8].copy_from_slice(b"NOTLATNT");
            Json(serde_json::json!({ "latent_b64": B64.encode(bytes) })).into_response()
        }
        Mode::Fail500 => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(serde_json::json!({ "error": "CUDA out of memory" })),
        )
            .into_response(),
        Mode::ErrorJson => Json(serde_json::json!({ "error": "unknown session" })).into_response(),
    }
}

async fn decode(Json(body): Json<serde_json::Value>) -> Response {
    if body["width"].as_u64().is_none() || body["height"].as_u64().is_none() {
        return (StatusCode::BAD_REQUEST, "missing size").into_response();
    }
    FAKE_PNG.to_vec().into_response()
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "ok": true, "model": "echo" }))
}
