use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, SubsecRound, Utc};
use crossflow_core::coding::{write_codesheet, CodeRow, CodeSheet, Codes};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// One coder's five codes for one video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub coder_id: u32,
    pub video_id: String,
    pub v: bool,
    pub p: bool,
    pub n: bool,
    pub q: bool,
    pub cx: bool,
    #[serde(with = "rfc3339")]
    pub submitted_at: DateTime<Utc>,
}

mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
            .map_err(serde::de::Error::custom)
    }
}

impl Judgment {
    fn codes(&self) -> Codes {
        Codes::from_array([self.v, self.p, self.n, self.q, self.cx])
    }
}

#[derive(Default)]
struct State {
    arrivals: u64,
    /// (video, coder) -> (submitted_at, arrival, judgment)
    effective: BTreeMap<(String, u32), (DateTime<Utc>, u64, Judgment)>,
}

impl State {
    fn apply(&mut self, j: Judgment) {
        let arrival = self.arrivals;
        self.arrivals += 1;
        let key = (j.video_id.clone(), j.coder_id);
        let newer = self
            .effective
            .get(&key)
            .is_none_or(|(at, seen, _)| (j.submitted_at, arrival) >= (*at, *seen));
        if newer {
            self.effective.insert(key, (j.submitted_at, arrival, j));
        }
    }
}

/// Append-only JSONL judgment log. Every append is flushed to disk before
/// it is acknowledged; opening the log replays it. The effective judgment
/// per (coder, video) is the latest by `submitted_at`, then by arrival.
pub struct JudgmentLog {
    path: PathBuf,
    file: Mutex<File>,
    state: RwLock<State>,
}

impl JudgmentLog {
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let io = |source| ServiceError::Log {
            path: path.to_path_buf(),
            source,
        };
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;

        // a crash mid-append leaves an unterminated final line
        let complete = text.rfind('\n').map_or(0, |i| i + 1);
        if complete < text.len() {
            log::warn!(
                "{}: dropping unterminated final record ({} bytes)",
                path.display(),
                text.len() - complete
            );
            file.set_len(complete as u64).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
        }

        let mut state = State::default();
        for (i, line) in text[..complete].lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let j: Judgment = serde_json::from_str(line).map_err(|e| ServiceError::CorruptLog {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            state.apply(j);
        }
        Ok(JudgmentLog {
            path: path.to_path_buf(),
            file: Mutex::new(file),
            state: RwLock::new(state),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Durably append `judgment` and return the stored record.
    pub fn append(&self, mut judgment: Judgment) -> Result<Judgment, ServiceError> {
        judgment.submitted_at = judgment.submitted_at.trunc_subsecs(0);
        let mut line = serde_json::to_string(&judgment).expect("judgment serializes");
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        let io = |source| ServiceError::Log {
            path: self.path.clone(),
            source,
        };
        file.write_all(line.as_bytes()).map_err(io)?;
        file.sync_data().map_err(io)?;
        // still holding the file lock, so arrival order matches log order
        self.state
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .apply(judgment.clone());
        Ok(judgment)
    }

    /// Effective judgments sorted by video then coder.
    pub fn effective(&self) -> Vec<Judgment> {
        let state = self.state.read().unwrap_or_else(|e| e.into_inner());
        state.effective.values().map(|(_, _, j)| j.clone()).collect()
    }

    pub fn code_sheet(&self) -> CodeSheet {
        let rows = self
            .effective()
            .into_iter()
            .map(|j| CodeRow {
                codes: j.codes(),
                video_id: j.video_id,
                coder_id: j.coder_id,
                coded_at: j.submitted_at,
            })
            .collect();
        CodeSheet::new(rows).expect("effective judgments are unique per video and coder")
    }

    /// The effective judgments as a code sheet CSV.
    pub fn export_csv(&self) -> String {
        let mut out = Vec::new();
        write_codesheet(&mut out, &self.code_sheet()).expect("writing to memory");
        String::from_utf8(out).expect("csv is utf-8")
    }
}

pub(crate) fn now() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(0)
}
