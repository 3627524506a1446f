//! HTTP backend wire-shape tests against a local listener.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::sync::Arc;

use claimdrift_gateway::{
    ChatRequest, EmbedRequest, Gateway, HttpBackend, GatewayError, Message, RetryConfig,
    ScoreRequest,
};

/// Serve canned HTTP responses on a local port; returns the base URL and
/// a channel yielding each raw request.
fn serve(responses: Vec<String>) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind localhost");
    let port = listener.local_addr().unwrap().port();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for response in responses {
            let Ok((mut stream, _)) = listener.accept() else { return };
            let mut buf = vec![0u8; 65536];
            let mut request = String::new();
            loop {
                let n = stream.read(&mut buf).unwrap_or(0);
                if n == 0 {
                    break;
                }
                request.push_str(&String::from_utf8_lossy(&buf[..n]));
                // Stop once the declared body is fully read.
                if let Some(header_end) = request.find("\r\n\r\n") {
                    let content_length = request
                        .lines()
                        .find(|l| l.to_ascii_lowercase().starts_with("content-length:"))
                        .and_then(|l| l.split(':').nth(1))
                        .and_then(|v| v.trim().parse::<usize>().ok())
                        .unwrap_or(0);
                    if request.len() >= header_end + 4 + content_length {
                        break;
                    }
                }
            }
            let _ = tx.send(request);
            let _ = stream.write_all(response.as_bytes());
        }
    });
    (format!("http://127.0.0.1:{port}/v1"), rx)
}

fn http_response(status: &str, extra_headers: &str, body: &str) -> String {
    format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n{extra_headers}Connection: close\r\n\r\n{body}",
        body.len()
    )
}

fn retry_fast() -> RetryConfig {
    RetryConfig { max_attempts: 3, base_delay_ms: 1 }
}

#[test]
fn chat_posts_the_expected_body_and_reads_the_reply() {
    let body = serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": "hello back"},
                     "finish_reason": "stop"}]
    })
    .to_string();
    let (base, rx) = serve(vec![http_response("200 OK", "", &body)]);
    let gateway = Gateway::new(
        Arc::new(HttpBackend::new(base, Some("sekret".into()))),
        None,
        1,
        retry_fast(),
    );
    let reply = gateway
        .chat(&ChatRequest {
            model_id: "m1".into(),
            messages: vec![Message::system("sys"), Message::user("hi")],
            temperature: 0.7,
            max_tokens: 64,
            seed: Some(9),
        })
        .unwrap();
    assert_eq!(reply, "hello back");

    let raw = rx.recv().unwrap();
    assert!(raw.starts_with("POST /v1/chat/completions"));
    assert!(raw.contains("Authorization: Bearer sekret"));
    let payload: serde_json::Value =
        serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
    assert_eq!(payload["model"], "m1");
    assert_eq!(payload["messages"][0]["role"], "system");
    assert_eq!(payload["messages"][1]["content"], "hi");
    assert_eq!(payload["temperature"], 0.7);
    assert_eq!(payload["max_tokens"], 64);
    assert_eq!(payload["seed"], 9);
}

#[test]
fn content_filter_finish_reason_maps_to_refusal() {
    let body = serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": ""},
                     "finish_reason": "content_filter"}]
    })
    .to_string();
    let (base, _rx) = serve(vec![http_response("200 OK", "", &body)]);
    let gateway = Gateway::new(Arc::new(HttpBackend::new(base, None)), None, 1, retry_fast());
    let err = gateway
        .chat(&ChatRequest {
            model_id: "m".into(),
            messages: vec![Message::user("x")],
            temperature: 0.0,
            max_tokens: 8,
            seed: None,
        })
        .unwrap_err();
    assert!(matches!(err, GatewayError::Refusal(_)), "{err:?}");
}

#[test]
fn server_errors_are_retried_then_succeed() {
    let ok = serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": "third try"},
                     "finish_reason": "stop"}]
    })
    .to_string();
    let (base, _rx) = serve(vec![
        http_response("500 Internal Server Error", "", "{}"),
        http_response("429 Too Many Requests", "Retry-After: 0\r\n", "{}"),
        http_response("200 OK", "", &ok),
    ]);
    let gateway = Gateway::new(Arc::new(HttpBackend::new(base, None)), None, 1, retry_fast());
    let reply = gateway
        .chat(&ChatRequest {
            model_id: "m".into(),
            messages: vec![Message::user("x")],
            temperature: 0.0,
            max_tokens: 8,
            seed: None,
        })
        .unwrap();
    assert_eq!(reply, "third try");
    assert_eq!(gateway.backend_calls(), 3);
}

#[test]
fn score_uses_the_echo_logprobs_form_and_skips_the_null_head() {
    let body = serde_json::json!({
        "choices": [{"logprobs": {"token_logprobs": [null, -1.5, -0.25]}}]
    })
    .to_string();
    let (base, rx) = serve(vec![http_response("200 OK", "", &body)]);
    let gateway = Gateway::new(Arc::new(HttpBackend::new(base, None)), None, 1, retry_fast());
    let scores = gateway
        .score_logprobs(&ScoreRequest { model_id: "gpt-ish".into(), text: "a b c".into() })
        .unwrap();
    assert_eq!(scores, vec![-1.5, -0.25]);

    let raw = rx.recv().unwrap();
    assert!(raw.starts_with("POST /v1/completions"));
    let payload: serde_json::Value =
        serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
    assert_eq!(payload["echo"], true);
    assert_eq!(payload["logprobs"], 0);
    assert_eq!(payload["max_tokens"], 0);
    assert_eq!(payload["prompt"], "a b c");
}

#[test]
fn embeddings_roundtrip_and_normalize() {
    let body = serde_json::json!({
        "data": [
            {"embedding": [3.0, 4.0]},
            {"embedding": [0.0, 2.0]}
        ]
    })
    .to_string();
    let (base, rx) = serve(vec![http_response("200 OK", "", &body)]);
    let gateway = Gateway::new(Arc::new(HttpBackend::new(base, None)), None, 1, retry_fast());
    let vectors = gateway
        .embed(&EmbedRequest { model_id: "embedder".into(), texts: vec!["a".into(), "b".into()] })
        .unwrap();
    assert!((vectors[0][0] - 0.6).abs() < 1e-12);
    assert!((vectors[0][1] - 0.8).abs() < 1e-12);
    assert_eq!(vectors[1], vec![0.0, 1.0]);

    let raw = rx.recv().unwrap();
    assert!(raw.starts_with("POST /v1/embeddings"));
    let payload: serde_json::Value =
        serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
    assert_eq!(payload["input"][1], "b");
}
