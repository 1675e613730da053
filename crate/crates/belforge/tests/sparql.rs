use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use belforge::Error;
use belforge::mapping::{SparqlClient, SparqlConfig};

const BODY: &str = r#"{"head":{"vars":["concept","conceptLabel","cui","article"]},"results":{"bindings":[
{"concept":{"type":"uri","value":"http://www.wikidata.org/entity/Q12152"},"cui":{"type":"literal","value":"C0027051"},"article":{"type":"uri","value":"https://nl.wikipedia.org/wiki/Hartinfarct"}},
{"concept":{"type":"uri","value":"http://www.wikidata.org/entity/Q2840"},"cui":{"type":"literal","value":"C0021400"},"article":{"type":"uri","value":"https://nl.wikipedia.org/wiki/Griep"}}
]}}"#;

/// Serves the given statuses in order, one connection each, and records
/// the request lines.
fn serve(statuses: Vec<u16>) -> (String, Arc<Mutex<Vec<String>>>, thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/sparql", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let handle = thread::spawn(move || {
        for status in statuses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap() == 0 || h == "\r\n" {
                    break;
                }
            }
            log.lock().unwrap().push(request_line.trim_end().to_string());
            let body = if status == 200 { BODY } else { "busy" };
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/sparql-results+json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen, handle)
}

fn config(endpoint: &str, retries: u32) -> SparqlConfig {
    SparqlConfig { endpoint: endpoint.into(), retries, retry_delay_ms: 5, timeout_secs: 5, ..SparqlConfig::default() }
}

#[test]
fn retries_after_server_error_then_uses_cache() {
    let cache = tempfile::tempdir().unwrap();
    let (url, seen, handle) = serve(vec![503, 200]);
    let client = SparqlClient::new(config(&url, 2)).with_cache_dir(Some(cache.path().to_path_buf()));
    let map = client.load_map().unwrap();
    handle.join().unwrap();
    assert_eq!(map.len(), 2);
    assert_eq!(map.get("Griep").unwrap().cui.as_str(), "C0021400");

    let requests = seen.lock().unwrap().clone();
    assert_eq!(requests.len(), 2);
    for r in &requests {
        assert!(r.starts_with("GET /sparql?"), "{r}");
        assert!(r.contains("format=json"), "{r}");
        assert!(r.contains("query=SELECT"), "{r}");
    }
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 1);

    // the server is gone: the cached body must be used without a request
    let again = SparqlClient::new(config(&url, 0)).with_cache_dir(Some(cache.path().to_path_buf()));
    assert_eq!(again.load_map().unwrap(), map);
}

#[test]
fn persistent_failure_is_a_network_error() {
    let (url, seen, handle) = serve(vec![500, 502]);
    let client = SparqlClient::new(config(&url, 1));
    let err = client.fetch().unwrap_err();
    handle.join().unwrap();
    assert!(matches!(err, Error::Network(_)), "{err}");
    assert_eq!(err.exit_code(), 3);
    assert_eq!(seen.lock().unwrap().len(), 2);
}
