//! Append-only study log: line-delimited JSON records, versioned with v:1.
//! Every state change is written before it is acted on, so a crash loses at
//! most the in-flight trial's unflushed records.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::harness::{EvalRecord, TrialStatus};
use crate::pareto::{ObjectiveVector, ParetoFront};
use crate::pruner::StatsSummary;
use crate::space::FlowConfig;
use crate::study::{StudyConfig, Trial, TrialOrigin};
use crate::{Error, Result};

pub const LOG_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LogRecord {
    StudyMeta {
        v: u64,
        config: StudyConfig,
        ts: u64,
    },
    TrialStart {
        v: u64,
        trial: u64,
        origin: TrialOrigin,
        config: FlowConfig,
        ts: u64,
    },
    EvalBatch {
        v: u64,
        trial: u64,
        records: Vec<EvalRecord>,
        ts: u64,
    },
    TrialEnd {
        v: u64,
        trial: u64,
        status: TrialStatus,
        objectives: Option<ObjectiveVector>,
        mean_cost_usd: Option<f64>,
        mean_latency_s: Option<f64>,
        stats: StatsSummary,
        pruned_corner: Option<(f64, f64)>,
        ts: u64,
    },
    FrontUpdate {
        v: u64,
        trial: u64,
        objectives: ObjectiveVector,
        ts: u64,
    },
}

impl LogRecord {
    pub fn version(&self) -> u64 {
        match self {
            LogRecord::StudyMeta { v, .. }
            | LogRecord::TrialStart { v, .. }
            | LogRecord::EvalBatch { v, .. }
            | LogRecord::TrialEnd { v, .. }
            | LogRecord::FrontUpdate { v, .. } => *v,
        }
    }
}

pub fn now_ts() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Flushing line writer over the study log.
pub struct LogWriter {
    file: BufWriter<File>,
    pub path: PathBuf,
}

impl LogWriter {
    /// Creates a fresh log; refuses to clobber an existing non-empty one.
    pub fn create(path: &Path) -> Result<LogWriter> {
        if path.exists() && std::fs::metadata(path)?.len() > 0 {
            return Err(Error::Storage(format!(
                "log `{}` already exists; resume it instead",
                path.display()
            )));
        }
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let file = File::create(path)?;
        Ok(LogWriter {
            file: BufWriter::new(file),
            path: path.to_path_buf(),
        })
    }

    pub fn append_to(path: &Path) -> Result<LogWriter> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(LogWriter {
            file: BufWriter::new(file),
            path: path.to_path_buf(),
        })
    }

    pub fn append(&mut self, record: &LogRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.file, "{line}")?;
        self.file.flush()?;
        Ok(())
    }
}

/// Reads and parses the log. A corrupted final line is truncated away with a
/// warning (the last complete record wins); corruption earlier in the file
/// is fatal.
pub fn read_log(path: &Path) -> Result<(Vec<LogRecord>, Vec<String>)> {
    let file = File::open(path)
        .map_err(|e| Error::Storage(format!("cannot open `{}`: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut records = Vec::with_capacity(lines.len());
    let mut warnings = Vec::new();
    let mut keep_bytes: u64 = 0;
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() && i == lines.len() - 1 {
            break;
        }
        match serde_json::from_str::<LogRecord>(line) {
            Ok(r) => {
                if r.version() != LOG_VERSION {
                    return Err(Error::Storage(format!(
                        "log record v{} unsupported (line {})",
                        r.version(),
                        i + 1
                    )));
                }
                keep_bytes += line.len() as u64 + 1;
                records.push(r);
            }
            Err(e) if i == lines.len() - 1 => {
                warnings.push(format!(
                    "truncated corrupted final log line ({e}); last complete record wins"
                ));
                let file = OpenOptions::new().write(true).open(path)?;
                file.set_len(keep_bytes)?;
                break;
            }
            Err(e) => {
                return Err(Error::Storage(format!(
                    "corrupted log record at line {}: {e}",
                    i + 1
                )));
            }
        }
    }
    Ok((records, warnings))
}

/// In-memory state reconstructed from a log.
#[derive(Debug, Clone)]
pub struct Replay {
    pub config: StudyConfig,
    pub trials: BTreeMap<u64, Trial>,
    pub front: ParetoFront,
    pub warnings: Vec<String>,
}

/// Replays records idempotently: a repeated trial-start resets that trial,
/// later records override earlier state. The front is rebuilt from
/// trial-end records; front-update records are an audit trail.
pub fn replay(records: Vec<LogRecord>, warnings: Vec<String>) -> Result<Replay> {
    let mut iter = records.into_iter();
    let config = match iter.next() {
        Some(LogRecord::StudyMeta { config, .. }) => config,
        Some(_) => {
            return Err(Error::Storage(
                "log does not start with a study-meta record".into(),
            ))
        }
        None => return Err(Error::Storage("log is empty".into())),
    };
    let mut trials: BTreeMap<u64, Trial> = BTreeMap::new();
    for record in iter {
        match record {
            LogRecord::StudyMeta { .. } => {
                return Err(Error::Storage("duplicate study-meta record".into()));
            }
            LogRecord::TrialStart {
                trial,
                origin,
                config,
                ts,
                ..
            } => {
                trials.insert(
                    trial,
                    Trial {
                        id: trial,
                        config,
                        origin,
                        status: TrialStatus::Running,
                        records: Vec::new(),
                        objectives: None,
                        mean_cost_usd: None,
                        mean_latency_s: None,
                        pruned_corner: None,
                        started_at: ts,
                        ended_at: None,
                    },
                );
            }
            LogRecord::EvalBatch { trial, records, .. } => {
                let t = trials
                    .get_mut(&trial)
                    .ok_or(Error::UnmatchedTrial(trial))?;
                t.records.extend(records);
            }
            LogRecord::TrialEnd {
                trial,
                status,
                objectives,
                mean_cost_usd,
                mean_latency_s,
                pruned_corner,
                ts,
                ..
            } => {
                let t = trials
                    .get_mut(&trial)
                    .ok_or(Error::UnmatchedTrial(trial))?;
                t.status = status;
                t.objectives = objectives;
                t.mean_cost_usd = mean_cost_usd;
                t.mean_latency_s = mean_latency_s;
                t.pruned_corner = pruned_corner;
                t.ended_at = Some(ts);
            }
            LogRecord::FrontUpdate { trial, .. } => {
                if !trials.contains_key(&trial) {
                    return Err(Error::UnmatchedTrial(trial));
                }
            }
        }
    }
    let mut front = ParetoFront::new();
    for t in trials.values() {
        if t.status == TrialStatus::Completed {
            if let Some(obj) = t.objectives {
                front.insert(t.id, obj);
            }
        }
    }
    Ok(Replay {
        config,
        trials,
        front,
        warnings,
    })
}
