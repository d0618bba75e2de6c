//! In-process HTTP server speaking the remote-judge protocol, for tests
//! and local dry runs.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Response, Server};

use super::{RemoteRequest, RemoteResponse};

#[derive(Debug, Clone)]
pub enum MockBehavior {
    /// Always answer these logits.
    Fixed(Vec<f64>),
    /// Zero logits, one per requested option.
    Uniform,
    /// Logits equal to the number of evidence tokens containing the
    /// option text, one per option. Deterministic and evidence-sensitive.
    Overlap,
    /// Body that is not valid JSON.
    Malformed,
    /// Sleep before answering with zero logits.
    Delay(Duration),
    Status(u16),
}

pub struct MockJudgeServer {
    server: Arc<Server>,
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<RemoteRequest>>>,
    handle: Option<JoinHandle<()>>,
}

impl MockJudgeServer {
    /// Bind an ephemeral localhost port and serve until dropped.
    pub fn start(behavior: MockBehavior) -> std::io::Result<Self> {
        let server = Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("not an IP listener"))?;
        let server = Arc::new(server);
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handle = {
            let server = Arc::clone(&server);
            let requests = Arc::clone(&requests);
            std::thread::spawn(move || {
                for mut req in server.incoming_requests() {
                    let behavior = behavior.clone();
                    let requests = Arc::clone(&requests);
                    // one thread per request so slow answers do not block others
                    std::thread::spawn(move || {
                        let mut body = String::new();
                        let _ = req.as_reader().read_to_string(&mut body);
                        let parsed: Option<RemoteRequest> = serde_json::from_str(&body).ok();
                        if let Some(p) = &parsed {
                            requests.lock().unwrap().push(p.clone());
                        }
                        let url = req.url().to_string();
                        let _ = req.respond(respond(&behavior, &url, parsed.as_ref()));
                    });
                }
            })
        };
        Ok(Self {
            server,
            addr,
            requests,
            handle: Some(handle),
        })
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Every well-formed request received so far.
    pub fn requests(&self) -> Vec<RemoteRequest> {
        self.requests.lock().unwrap().clone()
    }
}

fn json_header() -> Header {
    Header::from_bytes("Content-Type", "application/json").expect("static header")
}

fn respond(
    behavior: &MockBehavior,
    url: &str,
    request: Option<&RemoteRequest>,
) -> Response<std::io::Cursor<Vec<u8>>> {
    if url != "/score" {
        return Response::from_string("not found").with_status_code(404);
    }
    let Some(request) = request else {
        return Response::from_string("bad request").with_status_code(400);
    };
    let logits = match behavior {
        MockBehavior::Fixed(l) => l.clone(),
        MockBehavior::Uniform => vec![0.0; request.options.len()],
        MockBehavior::Overlap => {
            let evidence = request.evidence.join(" ").to_lowercase();
            request
                .options
                .iter()
                .map(|o| {
                    o.to_lowercase()
                        .split_whitespace()
                        .filter(|w| evidence.contains(w))
                        .count() as f64
                })
                .collect()
        }
        MockBehavior::Malformed => {
            return Response::from_string("{\"logits\": [1.0, oops").with_header(json_header())
        }
        MockBehavior::Delay(d) => {
            std::thread::sleep(*d);
            vec![0.0; request.options.len()]
        }
        MockBehavior::Status(code) => {
            return Response::from_string("mock failure").with_status_code(*code)
        }
    };
    let body = serde_json::to_string(&RemoteResponse { logits }).expect("serializable");
    Response::from_string(body).with_header(json_header())
}

impl Drop for MockJudgeServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
