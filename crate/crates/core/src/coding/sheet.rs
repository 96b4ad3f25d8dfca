use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};

use crate::{Error, Result};

/// Column names of the five codes, in sheet order.
pub const CODE_NAMES: [&str; 5] = ["v", "p", "n", "q", "cx"];

/// The five binary judgments made on a video.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Codes {
    /// Vaccine-related content.
    pub v: bool,
    /// Positive valence toward vaccination.
    pub p: bool,
    /// Negative valence toward vaccination.
    pub n: bool,
    /// Flagged for discussion among coders.
    pub q: bool,
    /// Platform context panel present.
    pub cx: bool,
}

impl Codes {
    pub fn from_array(a: [bool; 5]) -> Self {
        Codes {
            v: a[0],
            p: a[1],
            n: a[2],
            q: a[3],
            cx: a[4],
        }
    }

    pub fn to_array(self) -> [bool; 5] {
        [self.v, self.p, self.n, self.q, self.cx]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRow {
    pub video_id: String,
    pub coder_id: u32,
    pub codes: Codes,
    pub coded_at: DateTime<Utc>,
}

/// Code judgments with at most one row per `(video_id, coder_id)`, sorted by
/// video then coder.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodeSheet {
    rows: Vec<CodeRow>,
}

impl CodeSheet {
    pub fn new(mut rows: Vec<CodeRow>) -> Result<Self> {
        rows.sort_by(|a, b| (&a.video_id, a.coder_id).cmp(&(&b.video_id, b.coder_id)));
        if let Some(w) = rows
            .windows(2)
            .find(|w| w[0].video_id == w[1].video_id && w[0].coder_id == w[1].coder_id)
        {
            return Err(Error::invalid(format!(
                "video {} coded twice by coder {}",
                w[0].video_id, w[0].coder_id
            )));
        }
        Ok(CodeSheet { rows })
    }

    pub fn rows(&self) -> &[CodeRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn coders(&self) -> BTreeSet<u32> {
        self.rows.iter().map(|r| r.coder_id).collect()
    }

    pub fn n_videos(&self) -> usize {
        self.rows.iter().map(|r| &r.video_id).collect::<BTreeSet<_>>().len()
    }

    /// rows × 5 matrix of 0/1 values.
    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows.len(), 5, |i, j| {
            if self.rows[i].codes.to_array()[j] {
                1.0
            } else {
                0.0
            }
        })
    }
}

fn parse_bool(field: &str) -> Option<bool> {
    match field.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" => Some(true),
        "0" | "false" | "f" => Some(false),
        _ => None,
    }
}

const HEADER: [&str; 8] = ["video_id", "coder_id", "v", "p", "n", "q", "cx", "coded_at"];

/// Parse a code sheet CSV (`video_id,coder_id,v,p,n,q,cx,coded_at`).
///
/// Codes may be written as `0/1`, `true/false` or `t/f`.
pub fn parse_codesheet<R: Read>(reader: R) -> Result<CodeSheet> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() < HEADER.len() || header[..HEADER.len()] != HEADER {
        return Err(Error::invalid(format!(
            "code sheet header must start with {}",
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |what: &str| Error::invalid(format!("code sheet line {line}: {what}"));
        let coder_id = rec[1].trim().parse().map_err(|_| bad("coder_id is not an integer"))?;
        let mut codes = [false; 5];
        for (j, c) in codes.iter_mut().enumerate() {
            *c = parse_bool(&rec[2 + j]).ok_or_else(|| bad("code is not boolean"))?;
        }
        let coded_at = DateTime::parse_from_rfc3339(rec[7].trim())
            .map_err(|_| bad("coded_at is not RFC 3339"))?
            .with_timezone(&Utc)
            .trunc_subsecs(0);
        rows.push(CodeRow {
            video_id: rec[0].trim().to_string(),
            coder_id,
            codes: Codes::from_array(codes),
            coded_at,
        });
    }
    CodeSheet::new(rows)
}

pub fn read_codesheet(path: &Path) -> Result<CodeSheet> {
    let file = std::fs::File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_codesheet(file)
}

pub(crate) fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub(crate) fn timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Write rows in sheet order with codes as `0/1`.
pub fn write_codesheet<W: Write>(writer: W, sheet: &CodeSheet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in sheet.rows() {
        let mut rec = vec![r.video_id.clone(), r.coder_id.to_string()];
        rec.extend(r.codes.to_array().iter().map(|&b| bit(b).to_string()));
        rec.push(timestamp(&r.coded_at));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}
