use std::net::IpAddr;
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::RETRY_AFTER;
use reqwest::{StatusCode, Url};
use serde::Deserialize;
use serde_json::json;

use super::{remote_denied, BackendConfig, Completer, CompletionRequest, LlmError};

const MAX_BACKOFF: Duration = Duration::from_secs(30);

/// Counting semaphore bounding in-flight requests.
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Permits {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Client for `POST {base}/chat/completions`.
pub struct HttpChatBackend {
    client: Client,
    endpoint: Url,
    api_key: Option<String>,
    max_retries: u32,
    max_batch: usize,
    backoff: Duration,
    permits: Permits,
}

enum Failure {
    RateLimited(Option<Duration>),
    Timeout,
    Server(String),
    Fatal(LlmError),
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

fn is_loopback(url: &Url) -> bool {
    let Some(host) = url.host_str() else { return false };
    let host = host.trim_start_matches('[').trim_end_matches(']');
    host == "localhost" || host.parse::<IpAddr>().is_ok_and(|ip| ip.is_loopback())
}

impl HttpChatBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self, LlmError> {
        let base = cfg
            .base_url
            .as_deref()
            .ok_or_else(|| LlmError::Config("the http backend needs a base URL".into()))?;
        if cfg.model.is_empty() {
            return Err(LlmError::Config("the http backend needs a model name".into()));
        }
        let endpoint = Url::parse(&format!("{}/chat/completions", base.trim_end_matches('/')))
            .map_err(|e| LlmError::Config(format!("bad base URL {base}: {e}")))?;
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        if api_key.is_none() && !is_loopback(&endpoint) {
            return Err(LlmError::Auth(format!(
                "environment variable {} is not set",
                cfg.api_key_env
            )));
        }
        let client = Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(HttpChatBackend {
            client,
            endpoint,
            api_key,
            max_retries: cfg.max_retries,
            max_batch: cfg.max_batch.max(1),
            backoff: Duration::from_millis(500),
            permits: Permits::new(cfg.max_in_flight),
        })
    }

    /// Base delay of the exponential backoff.
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn model_endpoint(&self) -> &Url {
        &self.endpoint
    }

    fn send(&self, req: &CompletionRequest, n: usize) -> Result<Vec<String>, Failure> {
        let body = json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "n": n,
            "temperature": req.temperature,
            "max_tokens": req.max_new_tokens,
        });
        let mut builder = self.client.post(self.endpoint.clone()).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = {
            let _permit = self.permits.acquire();
            builder.send()
        };
        let resp = match resp {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Err(Failure::Timeout),
            Err(e) => return Err(Failure::Server(e.to_string())),
        };
        let status = resp.status();
        let retry_after = resp
            .headers()
            .get(RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            let text = resp.text().unwrap_or_default();
            return Err(Failure::Fatal(LlmError::Auth(format!("{status}: {}", snippet(&text)))));
        }
        if status == StatusCode::TOO_MANY_REQUESTS {
            return Err(Failure::RateLimited(retry_after));
        }
        if status == StatusCode::REQUEST_TIMEOUT || status == StatusCode::GATEWAY_TIMEOUT {
            return Err(Failure::Timeout);
        }
        if status.is_server_error() {
            return Err(Failure::Server(status.to_string()));
        }
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) if e.is_timeout() => return Err(Failure::Timeout),
            Err(e) => return Err(Failure::Server(e.to_string())),
        };
        if !status.is_success() {
            return Err(Failure::Fatal(LlmError::Transport(format!("{status}: {}", snippet(&text)))));
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(LlmError::MalformedResponse(e.to_string())))?;
        Ok(parsed
            .choices
            .into_iter()
            .map(|c| c.message.content.unwrap_or_default())
            .collect())
    }

    fn send_with_retries(&self, req: &CompletionRequest, n: usize) -> Result<Vec<String>, LlmError> {
        let mut attempt = 0;
        loop {
            let failure = match self.send(req, n) {
                Ok(texts) => return Ok(texts),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(f) => f,
            };
            attempt += 1;
            if attempt > self.max_retries {
                return Err(match failure {
                    Failure::RateLimited(_) => LlmError::RateLimited { attempts: attempt },
                    Failure::Timeout => LlmError::Timeout { attempts: attempt },
                    Failure::Server(msg) => LlmError::Transport(msg),
                    Failure::Fatal(e) => e,
                });
            }
            let exp = self.backoff.saturating_mul(1 << (attempt - 1).min(16));
            let delay = match failure {
                Failure::RateLimited(Some(after)) => after.max(exp),
                _ => exp,
            };
            log::debug!("retrying completion request in {delay:?} (attempt {attempt})");
            thread::sleep(delay.min(MAX_BACKOFF));
        }
    }
}

fn snippet(s: &str) -> String {
    s.chars().take(200).collect()
}

impl Completer for HttpChatBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<Vec<String>, LlmError> {
        req.validate()?;
        if remote_denied() && !is_loopback(&self.endpoint) {
            return Err(LlmError::NetworkDenied(self.endpoint.to_string()));
        }
        let mut out = Vec::with_capacity(req.n_samples);
        while out.len() < req.n_samples {
            let want = (req.n_samples - out.len()).min(self.max_batch);
            let texts = self.send_with_retries(req, want)?;
            if texts.is_empty() {
                return Err(LlmError::MalformedResponse("no choices in response".into()));
            }
            // endpoints without `n` support return one choice per call
            out.extend(texts.into_iter().take(want));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::Arc;

    /// Serves one scripted `(status, body)` per connection and records the
    /// request bodies.
    fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<serde_json::Value>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        thread::spawn(move || {
            for (status, body) in script {
                let Ok((stream, _)) = listener.accept() else { return };
                let mut reader = BufReader::new(stream);
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                log.lock().unwrap().push(serde_json::from_slice(&buf).unwrap());
                let mut stream = reader.into_inner();
                let resp = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/v1"), seen)
    }

    fn choices(texts: &[&str]) -> String {
        let c: Vec<_> = texts.iter().map(|t| json!({"message": {"content": t}})).collect();
        json!({ "choices": c }).to_string()
    }

    fn backend(base: &str, retries: u32, batch: usize) -> HttpChatBackend {
        let cfg = BackendConfig {
            base_url: Some(base.into()),
            model: "m".into(),
            api_key_env: "TYPEPROMPT_TEST_UNSET_KEY".into(),
            max_retries: retries,
            max_batch: batch,
            ..Default::default()
        };
        HttpChatBackend::new(&cfg).unwrap().with_backoff(Duration::from_millis(1))
    }

    fn request(n: usize) -> CompletionRequest {
        CompletionRequest {
            prompt: "Question".into(),
            n_samples: n,
            temperature: 1.0,
            max_new_tokens: 8,
            model: "m".into(),
            key: None,
        }
    }

    #[test]
    fn batches_and_retries() {
        let (base, seen) = serve(vec![
            (429, "{}".into()),
            (200, choices(&["a", "b"])),
            (200, choices(&["c"])),
        ]);
        let out = backend(&base, 2, 2).complete(&request(3)).unwrap();
        assert_eq!(out, ["a", "b", "c"]);
        let bodies = seen.lock().unwrap();
        assert_eq!(bodies.len(), 3);
        assert_eq!(bodies[0]["n"], 2);
        assert_eq!(bodies[2]["n"], 1);
        assert_eq!(bodies[0]["temperature"], 1.0);
        assert_eq!(bodies[0]["messages"][0]["content"], "Question");
    }

    #[test]
    fn rate_limit_exhausted() {
        let (base, _) = serve(vec![(429, "{}".into()), (429, "{}".into())]);
        let err = backend(&base, 1, 5).complete(&request(1)).unwrap_err();
        assert_eq!(err, LlmError::RateLimited { attempts: 2 });
    }

    #[test]
    fn auth_and_malformed() {
        let (base, _) = serve(vec![(401, "nope".into())]);
        assert!(matches!(backend(&base, 3, 5).complete(&request(1)), Err(LlmError::Auth(_))));
        let (base, _) = serve(vec![(200, "{\"x\":1}".into())]);
        assert!(matches!(
            backend(&base, 3, 5).complete(&request(1)),
            Err(LlmError::MalformedResponse(_))
        ));
    }

    #[test]
    fn remote_hosts_need_a_key() {
        let cfg = BackendConfig {
            base_url: Some("https://example.invalid/v1".into()),
            api_key_env: "TYPEPROMPT_TEST_UNSET_KEY".into(),
            ..Default::default()
        };
        assert!(matches!(HttpChatBackend::new(&cfg), Err(LlmError::Auth(_))));
    }
}
