//! Reference external evaluator speaking the line-delimited JSON protocol,
//! backed by the desk-1 simulated benchmark. Misbehavior modes exercise the
//! client's failure handling:
//!
//!   stub_evaluator [--mode normal|malformed|wrong-version|silent|slow]
//!                  [--rate-limits N] [--delay-ms MS]
//!
//! `--rate-limits N` answers the first N eval requests with a rate-limit
//! error before behaving normally.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use flowopt::harness::protocol::{EvalRequest, EvalResponse, Hello, WireCaps, PROTOCOL_VERSION};
use flowopt::harness::sim::{desk1, SimEvaluator};
use flowopt::harness::{hash_str, Evaluator};
use flowopt::space::FlowConfig;

struct Options {
    mode: String,
    rate_limits: u64,
    delay_ms: u64,
}

fn parse_args() -> Options {
    let mut opts = Options {
        mode: "normal".into(),
        rate_limits: 0,
        delay_ms: 0,
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "--mode" => {
                opts.mode = args.get(i + 1).cloned().unwrap_or_default();
                i += 2;
            }
            "--rate-limits" => {
                opts.rate_limits = args.get(i + 1).and_then(|v| v.parse().ok()).unwrap_or(0);
                i += 2;
            }
            "--delay-ms" => {
                opts.delay_ms = args.get(i + 1).and_then(|v| v.parse().ok()).unwrap_or(0);
                i += 2;
            }
            other => {
                eprintln!("stub_evaluator: unknown argument `{other}`");
                std::process::exit(2);
            }
        }
    }
    opts
}

fn main() {
    let opts = parse_args();
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let evaluator = SimEvaluator::new(desk1());

    let mut lines = stdin.lock().lines();
    // The optimizer greets first; answer with our own hello.
    let Some(Ok(_greeting)) = lines.next() else {
        return;
    };
    let mut hello = Hello::new(WireCaps {
        batch_size: 1,
        timeout_s: 30.0,
    });
    if opts.mode == "wrong-version" {
        hello.v = PROTOCOL_VERSION + 1;
    }
    writeln!(out, "{}", serde_json::to_string(&hello).unwrap()).unwrap();
    out.flush().unwrap();

    let mut served: u64 = 0;
    for line in lines.map_while(|l| l.ok()) {
        let Ok(request) = serde_json::from_str::<EvalRequest>(&line) else {
            continue;
        };
        if opts.delay_ms > 0 {
            std::thread::sleep(std::time::Duration::from_millis(opts.delay_ms));
        }
        match opts.mode.as_str() {
            "silent" => continue,
            "malformed" => {
                writeln!(out, "this is not a json response").unwrap();
                out.flush().unwrap();
                continue;
            }
            _ => {}
        }
        served += 1;
        let response = if served <= opts.rate_limits {
            EvalResponse {
                v: PROTOCOL_VERSION,
                req_id: request.req_id,
                passed: false,
                cost_usd: 0.0,
                latency_s: 0.0,
                error: Some("rate-limit".into()),
            }
        } else {
            let config = FlowConfig {
                assignments: request.config.into_iter().collect::<BTreeMap<_, _>>(),
            };
            let trial: u64 = request
                .trial
                .parse()
                .unwrap_or_else(|_| hash_str(&request.trial));
            let record = evaluator.evaluate(&config, trial, &request.question);
            EvalResponse {
                v: PROTOCOL_VERSION,
                req_id: request.req_id,
                passed: record.passed,
                cost_usd: record.cost,
                latency_s: record.latency,
                error: record.error.map(|t| t.as_wire().to_string()),
            }
        };
        writeln!(out, "{}", serde_json::to_string(&response).unwrap()).unwrap();
        out.flush().unwrap();
    }
}
