//! Shared helpers for the integration suites: a minimal in-process HTTP
//! classify endpoint and deterministic stub classifiers.

// each integration target compiles its own copy; not every target uses
// every helper
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use emoflow_core::error::Result;
use emoflow_core::fusion::{EmotionClassifier, EmotionDistribution};

pub const SIX_LABELS: [&str; 6] = ["anger", "fear", "joy", "love", "sadness", "surprise"];

pub fn six_labels() -> Vec<String> {
    SIX_LABELS.iter().map(|s| s.to_string()).collect()
}

/// A classifier whose distribution depends only on a hash of the text:
/// deterministic, varied across messages.
pub struct HashStubClassifier {
    labels: Vec<String>,
}

impl HashStubClassifier {
    pub fn new() -> Self {
        Self { labels: six_labels() }
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl EmotionClassifier for HashStubClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, text: &str) -> Result<EmotionDistribution> {
        let h = fnv1a(text);
        let dominant = (h % 6) as usize;
        let peak = 0.40 + (h % 31) as f64 / 100.0; // 0.40..0.70
        let rest = (1.0 - peak) / 5.0;
        let mut probs = vec![rest; 6];
        probs[dominant] = peak;
        EmotionDistribution::new(self.labels.clone(), probs)
    }
}

/// A blocking one-purpose HTTP server: answers every `POST /classify` with
/// the same JSON body. Shuts down when dropped.
pub struct StubEndpoint {
    pub url: String,
    stop: Arc<AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl StubEndpoint {
    /// Serves `{"probs": {...}}` built from the given label/probability
    /// pairs.
    pub fn serve(probs: &[(&str, f64)]) -> Self {
        let body = {
            let entries: Vec<String> = probs
                .iter()
                .map(|(label, p)| format!("\"{label}\":{p}"))
                .collect();
            format!("{{\"probs\":{{{}}}}}", entries.join(","))
        };
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub endpoint");
        let addr = listener.local_addr().expect("local addr");
        listener.set_nonblocking(true).expect("nonblocking accept loop");
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = stop.clone();
        let handle = std::thread::spawn(move || {
            while !stop_flag.load(Ordering::Relaxed) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let body = body.clone();
                        std::thread::spawn(move || {
                            let _ = handle_connection(stream, &body);
                        });
                    }
                    Err(ref e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(std::time::Duration::from_millis(2));
                    }
                    Err(_) => break,
                }
            }
        });
        Self {
            url: format!("http://{addr}"),
            stop,
            handle: Some(handle),
        }
    }
}

impl Drop for StubEndpoint {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn handle_connection(stream: TcpStream, body: &str) -> std::io::Result<()> {
    stream.set_read_timeout(Some(std::time::Duration::from_secs(5)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut content_length = 0usize;
    let mut line = String::new();
    // request line + headers
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            break;
        }
        if let Some(value) = trimmed.to_ascii_lowercase().strip_prefix("content-length:") {
            content_length = value.trim().parse().unwrap_or(0);
        }
    }
    // drain the request body
    let mut request_body = vec![0u8; content_length];
    reader.read_exact(&mut request_body)?;

    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
        body.len(),
        body
    )?;
    stream.flush()
}
