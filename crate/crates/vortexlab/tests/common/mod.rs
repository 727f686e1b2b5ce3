//! Shared by the integration tests: a bundle builder and a bare HTTP/1.1 client.

#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::Path;

use vortex_core::Execution;
use vortexlab::bundle::{write_bundle, Bundle};
use vortexlab::pipeline::{run_all, PipelineParams};
use vortexlab::scenarios::{scenario_field, Scenario};
use vortexlab::service::{serve_on, AppState};

/// Runs the pipeline on a scenario and writes the bundle into `dir`.
pub fn build_bundle(dir: &Path, scenario: Scenario, n: usize, params: &PipelineParams) -> Bundle {
    let (meta, vel) = scenario_field(scenario, n, Execution::Parallel);
    let out = run_all(&meta, &vel, params, Execution::Parallel).expect("pipeline runs");
    write_bundle(dir, out.parts(), params, format!("{scenario:?}-{n}")).expect("bundle written");
    Bundle::load(dir).expect("bundle loads")
}

/// A served bundle; the server stops when this is dropped.
pub struct Server {
    pub addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl Server {
    pub fn start(bundle: Bundle, workers: usize) -> Server {
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                let state = AppState::new(bundle, workers, Execution::Parallel);
                serve_on(listener, state, async {
                    let _ = stop_rx.await;
                })
                .await
                .unwrap();
            });
        });
        Server { addr: addr_rx.recv().unwrap(), stop: Some(stop_tx), thread: Some(thread) }
    }

    /// A handle that only talks to an already running server.
    pub fn client(addr: SocketAddr) -> Server {
        Server { addr, stop: None, thread: None }
    }

    pub fn get(&self, path: &str) -> Response {
        request(self.addr, "GET", path, None)
    }

    pub fn post(&self, path: &str, body: &str) -> Response {
        request(self.addr, "POST", path, Some(body))
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

#[derive(Debug)]
pub struct Response {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl Response {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

fn request(addr: SocketAddr, method: &str, path: &str, body: Option<&str>) -> Response {
    let mut s = TcpStream::connect(addr).unwrap();
    let body = body.unwrap_or("");
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = Vec::new();
    s.read_to_end(&mut raw).unwrap();
    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").expect("header terminator");
    let head = String::from_utf8(raw[..split].to_vec()).unwrap();
    let mut lines = head.split("\r\n");
    let status = lines.next().unwrap().split(' ').nth(1).unwrap().parse().unwrap();
    let headers: Vec<(String, String)> = lines
        .filter_map(|l| l.split_once(':').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())))
        .collect();
    let mut body = raw[split + 4..].to_vec();
    let chunked = headers.iter().any(|(k, v)| k.eq_ignore_ascii_case("transfer-encoding") && v.contains("chunked"));
    if chunked {
        body = dechunk(&body);
    }
    Response { status, headers, body }
}

fn dechunk(mut raw: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    loop {
        let eol = raw.windows(2).position(|w| w == b"\r\n").unwrap();
        let size = usize::from_str_radix(std::str::from_utf8(&raw[..eol]).unwrap().trim(), 16).unwrap();
        if size == 0 {
            return out;
        }
        out.extend_from_slice(&raw[eol + 2..eol + 2 + size]);
        raw = &raw[eol + 4 + size..];
    }
}

/// Parses the mesh wire format: u32 n, n×3 f32, u32 m, m×3 u32, little-endian.
pub fn parse_mesh(bytes: &[u8]) -> (Vec<[f32; 3]>, Vec<[u32; 3]>) {
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let n = u32_at(0) as usize;
    let verts = (0..n).map(|i| [0, 1, 2].map(|c| f32::from_le_bytes(bytes[4 + 12 * i + 4 * c..][..4].try_into().unwrap()))).collect();
    let t0 = 4 + 12 * n;
    let m = u32_at(t0) as usize;
    let tris = (0..m).map(|i| [0, 1, 2].map(|c| u32_at(t0 + 4 + 12 * i + 4 * c))).collect();
    assert_eq!(bytes.len(), t0 + 4 + 12 * m, "trailing bytes in mesh");
    (verts, tris)
}
