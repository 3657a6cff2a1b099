//! Minimal in-process HTTP server standing in for a translation provider.
//!
//! Speaks just enough HTTP/1.1 to serve one JSON POST per connection
//! (`Connection: close`), which keeps the implementation at a screenful and
//! sidesteps keep-alive bookkeeping. Each request is handed to the
//! configured handler together with its global ordinal.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

type Handler = dyn Fn(usize, &str) -> (u16, String) + Send + Sync;

pub struct MockProvider {
    address: String,
    hits: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

impl MockProvider {
    /// Starts a server whose handler receives `(request ordinal, body)` and
    /// returns `(status, response body)`. Responses are `application/json`.
    pub fn start<F>(handler: F) -> MockProvider
    where
        F: Fn(usize, &str) -> (u16, String) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind test listener");
        let address = format!("http://{}/", listener.local_addr().expect("local addr"));
        let hits = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);

        let accept_thread = {
            let hits = Arc::clone(&hits);
            let shutdown = Arc::clone(&shutdown);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let ordinal = hits.fetch_add(1, Ordering::SeqCst);
                    let handler = Arc::clone(&handler);
                    std::thread::spawn(move || serve_one(stream, ordinal, handler.as_ref()));
                }
            })
        };

        MockProvider {
            address,
            hits,
            shutdown,
            accept_thread: Some(accept_thread),
        }
    }

    /// Convenience: always answer 200 with `{"response": "<prefix><prompt>"}`
    /// where `<prompt>` is the request's `prompt` field (or the whole body
    /// when absent).
    pub fn echo(prefix: &'static str) -> MockProvider {
        MockProvider::start(move |_, body| {
            let text = prompt_field(body);
            (
                200,
                serde_json::json!({ "response": format!("{prefix}{text}") }).to_string(),
            )
        })
    }

    pub fn url(&self) -> &str {
        &self.address
    }

    /// Total requests received so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for MockProvider {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.address.trim_start_matches("http://").trim_end_matches('/'));
        if let Some(handle) = self.accept_thread.take() {
            let _ = handle.join();
        }
    }
}

fn serve_one(stream: TcpStream, ordinal: usize, handler: &Handler) {
    let mut reader = BufReader::new(stream);
    let mut content_length = 0usize;
    let mut line = String::new();
    // Request line + headers.
    loop {
        line.clear();
        if reader.read_line(&mut line).is_err() || line.trim_end().is_empty() {
            break;
        }
        if let Some(value) = line
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
        {
            content_length = value.parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let body = String::from_utf8_lossy(&body);
    let (status, response_body) = handler(ordinal, &body);
    let reason = match status {
        200 => "OK",
        500 => "Internal Server Error",
        _ => "Status",
    };
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{response_body}",
        response_body.len()
    );
    let mut stream = reader.into_inner();
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}

/// Pulls the `prompt` string field out of a JSON body; falls back to the raw
/// body when there is none.
fn prompt_field(body: &str) -> String {
    serde_json::from_str::<serde_json::Value>(body)
        .ok()
        .and_then(|value| value.get("prompt")?.as_str().map(String::from))
        .unwrap_or_else(|| body.to_string())
}
