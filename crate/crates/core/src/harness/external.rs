//! External evaluator: a child process speaking the line-delimited JSON
//! protocol over stdin/stdout. Timeouts and malformed responses become
//! protocol-tagged records; rate limits are retried with exponential backoff
//! and seeded jitter.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::harness::protocol::{parse_hello, EvalRequest, EvalResponse, Hello, WireCaps, PROTOCOL_VERSION};
use crate::harness::{Capabilities, ErrorTag, EvalRecord, Evaluator};
use crate::space::FlowConfig;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ConnectionSettings {
    /// argv of the evaluator process.
    pub command: Vec<String>,
    /// Per-request response deadline.
    pub timeout: Duration,
    /// Retries after a rate-limit response.
    pub max_retries: u32,
    /// Base delay of the exponential backoff.
    pub backoff_base: Duration,
    /// Seed of the backoff jitter.
    pub seed: u64,
}

impl Default for ConnectionSettings {
    fn default() -> Self {
        ConnectionSettings {
            command: vec![],
            timeout: Duration::from_secs(60),
            max_retries: 5,
            backoff_base: Duration::from_millis(200),
            seed: 0,
        }
    }
}

/// The first `n` backoff delays for a fresh connection: base · 2^i scaled by
/// a jitter factor in [1, 1.5). Strictly increasing, since the doubling
/// outpaces the jitter range.
pub fn backoff_delays(base: Duration, seed: u64, n: usize) -> Vec<Duration> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let jitter = 1.0 + rng.random_range(0.0..0.5);
            base.mul_f64(2f64.powi(i as i32) * jitter)
        })
        .collect()
}

struct Pipe {
    child: Child,
    writer: BufWriter<ChildStdin>,
    lines: Receiver<String>,
}

/// Evaluator backed by a spawned child process. Requests are serialized
/// through a mutex; the wire protocol itself multiplexes by request id.
pub struct ExternalEvaluator {
    pipe: Mutex<Pipe>,
    settings: ConnectionSettings,
    peer_caps: WireCaps,
    counter: AtomicU64,
    jitter: Mutex<ChaCha12Rng>,
}

impl ExternalEvaluator {
    /// Spawns the process and performs the mutual handshake.
    pub fn connect(settings: ConnectionSettings) -> Result<ExternalEvaluator> {
        let (program, args) = settings
            .command
            .split_first()
            .ok_or_else(|| Error::Config("external evaluator command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");

        let (tx, lines) = std::sync::mpsc::channel::<String>();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines().map_while(|l| l.ok()) {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut writer = BufWriter::new(stdin);
        let hello = Hello::new(WireCaps::default());
        writeln!(writer, "{}", serde_json::to_string(&hello)?)?;
        writer.flush()?;

        let line = lines
            .recv_timeout(settings.timeout)
            .map_err(|_| Error::Protocol("handshake timed out".into()))?;
        let peer = parse_hello(&line)?;
        let peer_caps = peer.caps.unwrap_or_default();

        Ok(ExternalEvaluator {
            pipe: Mutex::new(Pipe {
                child,
                writer,
                lines,
            }),
            jitter: Mutex::new(ChaCha12Rng::seed_from_u64(settings.seed)),
            settings,
            peer_caps,
            counter: AtomicU64::new(0),
        })
    }

    /// Sends one request and waits for its matching response within the
    /// deadline. Out-of-order responses to other request ids are dropped
    /// (their waiters have already timed out).
    fn round_trip(&self, pipe: &mut Pipe, request: &EvalRequest) -> Result<EvalResponse> {
        writeln!(pipe.writer, "{}", serde_json::to_string(request)?)?;
        pipe.writer.flush()?;
        let deadline = Instant::now() + self.settings.timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let line = pipe.lines.recv_timeout(remaining).map_err(|e| match e {
                RecvTimeoutError::Timeout => Error::Protocol("response timed out".into()),
                RecvTimeoutError::Disconnected => {
                    Error::Protocol("evaluator closed its output".into())
                }
            })?;
            let resp: EvalResponse = serde_json::from_str(&line)
                .map_err(|e| Error::Protocol(format!("malformed response: {e}")))?;
            if resp.v != PROTOCOL_VERSION {
                return Err(Error::VersionMismatch(resp.v));
            }
            if resp.req_id == request.req_id {
                return Ok(resp);
            }
        }
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&self, config: &FlowConfig, trial: u64, question: &str) -> EvalRecord {
        let mut attempt: u32 = 0;
        loop {
            let id = self.counter.fetch_add(1, Ordering::Relaxed);
            let request = EvalRequest::new(&format!("r-{id}"), trial, config, question);
            let outcome = {
                let mut pipe = self.pipe.lock().expect("pipe mutex");
                self.round_trip(&mut pipe, &request)
            };
            return match outcome {
                Ok(resp) => {
                    match resp.error.as_deref() {
                        Some("rate-limit") if attempt < self.settings.max_retries => {
                            let jitter =
                                1.0 + self.jitter.lock().expect("jitter rng").random_range(0.0..0.5);
                            let delay = self
                                .settings
                                .backoff_base
                                .mul_f64(2f64.powi(attempt as i32) * jitter);
                            std::thread::sleep(delay);
                            attempt += 1;
                            continue;
                        }
                        Some(tag) => EvalRecord::errored(question, ErrorTag::from_wire(tag)),
                        None => EvalRecord::success(
                            question,
                            resp.passed,
                            resp.cost_usd,
                            resp.latency_s,
                        ),
                    }
                }
                Err(_) => EvalRecord::errored(question, ErrorTag::Protocol),
            };
        }
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            batch_size: self.peer_caps.batch_size,
            timeout_s: self.peer_caps.timeout_s,
        }
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        if let Ok(mut pipe) = self.pipe.lock() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_is_strictly_increasing_with_jitter() {
        for seed in 0..20 {
            let delays = backoff_delays(Duration::from_millis(100), seed, 6);
            for pair in delays.windows(2) {
                assert!(pair[1] > pair[0], "delays must increase: {delays:?}");
            }
            // Jitter keeps each delay within [1.0, 1.5) of its base step.
            for (i, d) in delays.iter().enumerate() {
                let base = 100.0 * 2f64.powi(i as i32);
                let ms = d.as_secs_f64() * 1000.0;
                assert!(ms >= base && ms < base * 1.5);
            }
        }
    }

    #[test]
    fn backoff_is_seeded() {
        let a = backoff_delays(Duration::from_millis(50), 9, 4);
        let b = backoff_delays(Duration::from_millis(50), 9, 4);
        let c = backoff_delays(Duration::from_millis(50), 10, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empty_command_is_a_config_error() {
        let err = ExternalEvaluator::connect(ConnectionSettings::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
